//! Acceptance suite: one test per criterion, each printing a single
//! PASS line (run with `cargo test --test acceptance -- --nocapture`
//! to see them). Tolerances and runtime budgets are pinned here and
//! must not be loosened; a genuine failure is a finding, not a test bug.

use momentlab::arith::{primes_up_to, sieve_lambda, CharacterGroup, LambdaTable};
use momentlab::combin::{enumerate_class, formula_f, nu, nu_dprime, nu_prime, ClassTag};
use momentlab::explicit::{psi_eta_char, psi_eta_zero_side, weil_residual};
use momentlab::manifest::{schema_for, validate_schema};
use momentlab::model::{estimate_moments, model_mean_exact, sample_H, SampleMode};
use momentlab::moments::{
    delta_s, delta_s_smoothed, distribution_histogram, m_n_spectral, moment_residue_side,
    moment_character_side, omega_search, vsn_empirical, vsn_spectral, DeltaMode, OmegaMode, Sigma,
};
use momentlab::weights::{Kernel, Weight};
use momentlab::zeros::{conductor_moments, expected_count, load_zeros, ZeroStore};
use num_bigint::BigUint;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

fn pass(criterion: u32, desc: &str, start: Instant, limit: Duration) {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= limit,
        "criterion {criterion} exceeded its runtime budget: {elapsed:?} > {limit:?}"
    );
    println!(
        "[acceptance] criterion {criterion:2} ({desc}): PASS ({:.1} s)",
        elapsed.as_secs_f64()
    );
}

fn expk() -> Weight {
    Weight::parse("expK:1").unwrap()
}

/// Zeros for q in {3,4,5,7} certified past height 400, shared by the
/// explicit-formula and completeness criteria.
fn ef_store() -> &'static ZeroStore {
    static STORE: OnceLock<ZeroStore> = OnceLock::new();
    STORE.get_or_init(|| {
        let mut store = ZeroStore::new();
        for q in [3u64, 4, 5, 7] {
            store.compute_group(q, 405.0).unwrap();
        }
        store
    })
}

fn big_table() -> &'static LambdaTable {
    static TABLE: OnceLock<LambdaTable> = OnceLock::new();
    TABLE.get_or_init(|| sieve_lambda(3_000_000).unwrap())
}

#[test]
fn criterion_01_character_identities() {
    let start = Instant::now();
    let mut prime_powers: Vec<(u64, u32)> = Vec::new();
    for p in primes_up_to(200) {
        let (mut e, mut v) = (1u32, p);
        while v <= 200 {
            prime_powers.push((p, e));
            e += 1;
            v = v.saturating_mul(p);
        }
    }
    for q in 3..=50u64 {
        let group = CharacterGroup::new(q);
        if let Err((a, b)) = group.verify_orthogonality(1e-10) {
            panic!("orthogonality fails mod {q} at pair ({a}, {b})");
        }
        for chi in group.characters() {
            for &(p1, e1) in &prime_powers {
                for &(p2, e2) in &prime_powers {
                    let closed = group.sq_closed(chi, (p1, e1), (p2, e2)).unwrap();
                    let brute = group.sq_brute(chi, p1.pow(e1), p2.pow(e2));
                    assert!(
                        (closed - brute).norm() < 1e-9,
                        "S_{q}({p1}^{e1}, {p2}^{e2}) at chi_{}: {closed} vs {brute}",
                        chi.conrey
                    );
                }
            }
        }
    }
    pass(1, "character identities", start, Duration::from_secs(60));
}

#[test]
fn criterion_02_conductor_identity() {
    let start = Instant::now();
    for q in 3..=200u64 {
        let (residual, variance) = conductor_moments(q).unwrap();
        assert!(residual.abs() < 1e-12, "mod {q}: residual {residual}");
        assert!(variance >= 0.0);
    }
    pass(2, "conductor first moment", start, Duration::from_secs(5));
}

#[test]
fn criterion_03_combinatorial_formulas() {
    let start = Instant::now();
    // enumeration oracle behind the derived constants
    assert_eq!(enumerate_class(2, 2, ClassTag::F).unwrap().count, BigUint::from(2u32));
    assert_eq!(enumerate_class(3, 2, ClassTag::F).unwrap().count, BigUint::from(8u32));
    assert_eq!(nu(2).unwrap(), num_rational::BigRational::from_integer(2.into()));
    assert_eq!(nu_prime(2).unwrap(), num_rational::BigRational::from_integer(0.into()));
    assert_eq!(
        nu_dprime(2).unwrap(),
        num_rational::BigRational::new(8.into(), 3.into())
    );
    // even s = 2r: mu_{2r} nu_n^r; odd s = 2r+1: (2r+1)!/(2^r (r-1)!) nu_n^{r-1}(nu'+nu'')
    let cases: &[(u32, u32)] = &[(2, 2), (2, 3), (2, 4), (4, 2), (4, 3), (4, 4), (3, 2), (3, 4)];
    for &(s, n) in cases {
        let formula = formula_f(s, n).unwrap().expect("formula applies");
        let enumerated = enumerate_class(s, n, ClassTag::F).unwrap().count;
        assert!(formula.is_integer(), "({s},{n}): non-integer formula {formula}");
        assert_eq!(
            formula.to_integer().magnitude(),
            &enumerated,
            "({s},{n}): formula {formula} vs enumeration {enumerated}"
        );
    }
    pass(3, "involution class formulas", start, Duration::from_secs(300));
}

#[test]
fn criterion_04_explicit_formula_closure() {
    let start = Instant::now();
    let eta = expk();
    let table = big_table();
    let store = ef_store();
    for q in [3u64, 4, 5, 7] {
        let group = CharacterGroup::new(q);
        for chi in group.non_principal() {
            for t in 1..=6u32 {
                let x = f64::from(t).exp();
                let prime = psi_eta_char(x, &group, chi.conrey, &eta, table).unwrap();
                let zero = psi_eta_zero_side(x, &group, chi.conrey, &eta, store, 200.0).unwrap();
                let gap = (prime.value - zero.value).norm();
                assert!(
                    gap <= prime.bound + zero.bound,
                    "q={q} chi_{} t={t}: gap {gap} > bound {}",
                    chi.conrey,
                    prime.bound + zero.bound
                );
                let r200 = weil_residual(x, &group, chi.conrey, &eta, store, 200.0, table).unwrap();
                let r400 = weil_residual(x, &group, chi.conrey, &eta, store, 400.0, table).unwrap();
                assert!(
                    r400 <= r200 + 5e-3,
                    "q={q} chi_{} t={t}: residual grew {r200} -> {r400}",
                    chi.conrey
                );
            }
        }
    }
    pass(4, "explicit formula closure", start, Duration::from_secs(600));
}

#[test]
fn criterion_05_zero_completeness() {
    let start = Instant::now();
    let store = ef_store();
    let check = |store: &ZeroStore, label: &str| {
        for &(q, conrey) in store.keys() {
            let group = CharacterGroup::new(q);
            let chi = group.get(conrey).unwrap();
            let conj = group.conj(chi).conrey;
            let list = store.get(q, conrey).unwrap();
            let other = store.get(q, conj).unwrap();
            let t = list.t_cert;
            assert!(t >= 400.0 || label == "ingested", "{label} q={q} chi_{conrey}: t_cert {t}");
            let count = list.gammas.iter().filter(|g| **g <= t).count()
                + other.gammas.iter().filter(|g| **g <= t).count();
            let tolerance = 2.0 * (chi.conductor as f64 * (t + 2.0)).ln() + 5.0;
            let expect = expected_count(chi.conductor, t);
            assert!(
                (count as f64 - expect).abs() <= tolerance,
                "{label} q={q} chi_{conrey}: N({t}) = {count} vs {expect} (tol {tolerance})"
            );
        }
    };
    check(store, "computed");
    // round-trip through the TSV cache re-certifies from the counts alone
    let dir = tempfile::tempdir().unwrap();
    store.save_cache(dir.path()).unwrap();
    let mut merged = ZeroStore::new();
    for &(q, conrey) in store.keys() {
        let path = ZeroStore::cache_path(dir.path(), q, conrey);
        let loaded = load_zeros(&path).unwrap();
        let list = loaded.get(q, conrey).unwrap().clone();
        merged.insert(q, conrey, list);
    }
    for q in [3u64, 4, 5, 7] {
        merged.recertify(q);
    }
    check(&merged, "ingested");
    pass(5, "zero count completeness", start, Duration::from_secs(120));
}

#[test]
fn criterion_06_moment_identities() {
    let start = Instant::now();
    let eta = expk();
    let table = sieve_lambda(500_000).unwrap();
    for q in 3..=12u64 {
        let group = CharacterGroup::new(q);
        for x in [100.0, 1_000.0, 10_000.0] {
            let m1 = moment_residue_side(x, &group, 1, &eta, &table).unwrap();
            assert!(m1.abs() < 1e-12, "q={q} x={x}: M_1 = {m1}");
            for n in 2..=4u32 {
                let r = moment_residue_side(x, &group, n, &eta, &table).unwrap();
                let c = moment_character_side(x, &group, n, &eta, &table).unwrap();
                // absolute floor for cases where the character side is an
                // empty tuple sum (exact 0) and the residue side carries
                // only rounding noise
                let scale = r.abs().max(c.abs());
                assert!(
                    (r - c).abs() <= 1e-9 * scale + 1e-12,
                    "q={q} n={n} x={x}: residue {r} vs character {c}"
                );
            }
        }
    }
    // Jensen: M_{2m} >= M_2^m for m <= 3
    let group = CharacterGroup::new(7);
    for x in [100.0, 10_000.0, 300_000.0] {
        let m2 = moment_residue_side(x, &group, 2, &eta, &table).unwrap();
        for m in 2..=3u32 {
            let high = moment_residue_side(x, &group, 2 * m, &eta, &table).unwrap();
            let low = m2.powi(m as i32);
            assert!(
                high >= low - 1e-12 * low.abs().max(1.0),
                "q=7 x={x}: M_{} = {high} < M_2^{m} = {low}",
                2 * m
            );
        }
    }
    pass(6, "moment identities", start, Duration::from_secs(300));
}

#[test]
fn criterion_07_delta_kernel() {
    let start = Instant::now();
    let kernel = Kernel::parse("triangle").unwrap();
    for s in 1..=5usize {
        let mut idx = vec![0i32; s];
        let mut seen = 0u64;
        'grid: loop {
            let values: Vec<i32> = idx.iter().map(|&i| i - 2).collect();
            let sigma: Vec<Sigma> =
                values.iter().map(|&v| Sigma::new(v as f64, v == 0)).collect();
            let expect = i64::from(
                values.iter().sum::<i32>() == 0 && values.iter().all(|&v| v != 0),
            );
            assert_eq!(delta_s(&sigma), expect, "sigma = {values:?}");
            for t in [1.0, 10.0, 100.0] {
                let smoothed = delta_s_smoothed(&sigma, &kernel, t);
                assert!(
                    smoothed >= expect as f64 - 1e-12,
                    "sigma = {values:?} T = {t}: {smoothed} < {expect}"
                );
            }
            seen += 1;
            let mut k = s;
            loop {
                if k == 0 {
                    break 'grid;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < 5 {
                    break;
                }
                idx[k] = 0;
            }
        }
        assert_eq!(seen, 5u64.pow(s as u32));
    }
    pass(7, "delta selection kernel", start, Duration::from_secs(60));
}

#[test]
fn criterion_08_spectral_vs_empirical() {
    let start = Instant::now();
    let eta = expk();
    let kernel = Kernel::parse("triangle").unwrap();
    for (q, height) in [(3u64, 60.0f64), (5, 50.0)] {
        let group = CharacterGroup::new(q);
        let mut store = ZeroStore::new();
        store.compute_group(q, height).unwrap();
        let m2 = m_n_spectral(&group, &store, 2, &eta, height).unwrap();
        for s in [1u32, 2] {
            let spectral = vsn_spectral(
                &group, &store, s, 2, &eta, &kernel, 50.0, height, DeltaMode::Smoothed,
            )
            .unwrap();
            let empirical =
                vsn_empirical(&group, &store, s, 2, &eta, &kernel, 50.0, 0.02, m2, height)
                    .unwrap();
            let gap = (spectral.value - empirical.value).abs();
            assert!(
                gap <= spectral.budget + empirical.budget,
                "q={q} s={s}: gap {gap} > {} + {}",
                spectral.budget,
                empirical.budget
            );
        }
    }
    pass(8, "spectral vs empirical V_{s,n}", start, Duration::from_secs(900));
}

#[test]
fn criterion_09_li_monte_carlo() {
    let start = Instant::now();
    let eta = expk();
    for q in [3u64, 5, 7] {
        let group = CharacterGroup::new(q);
        let mut store = ZeroStore::new();
        store.compute_group(q, 50.0).unwrap();
        for n in [2u32, 3] {
            let batch =
                sample_H(&group, &store, n, &eta, SampleMode::Li, 20_260_823, 100_000, 50.0)
                    .unwrap();
            assert!(batch.max_imag < 1e-9, "q={q} n={n}: max imag {}", batch.max_imag);
            let est = estimate_moments(&batch, &[], &group, &eta).unwrap();
            let target = if n == 2 {
                model_mean_exact(&group, &store, 2, &eta, 50.0).unwrap()
            } else {
                0.0
            };
            assert!(
                (est.mean - target).abs() <= 3.0 * est.mean_std_error,
                "q={q} n={n}: mean {} vs {target} (se {})",
                est.mean,
                est.mean_std_error
            );
        }
    }
    pass(9, "LI-model Monte Carlo", start, Duration::from_secs(300));
}

#[test]
fn criterion_10_search_and_histogram_end_to_end() {
    let start = Instant::now();
    let eta = expk();
    let points = 25usize;
    let (lo, hi) = (1e3f64.ln(), 1e7f64.ln());
    let grid: Vec<f64> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let search = omega_search(101, &eta, &grid, 0.5, OmegaMode::MomentM { m: 1 }, 6.0).unwrap();
    assert_eq!(search.evaluated.len(), points);
    // validate the shape the CLI emits: payload plus the manifest id stamp
    let mut value = serde_json::to_value(&search).unwrap();
    value["manifest"] = serde_json::Value::String("0".repeat(16));
    let schema: serde_json::Value =
        serde_json::from_str(schema_for("omega-search").unwrap()).unwrap();
    validate_schema(&value, &schema).unwrap();

    let hist = distribution_histogram(1e7, 101, 20).unwrap();
    assert!(hist.bins.iter().map(|b| b.count).sum::<u64>() > 0);
    let mut value = serde_json::to_value(&hist).unwrap();
    value["manifest"] = serde_json::Value::String("0".repeat(16));
    let schema: serde_json::Value =
        serde_json::from_str(schema_for("histogram").unwrap()).unwrap();
    validate_schema(&value, &schema).unwrap();
    // report-only: no ground-truth assertion on hit locations or tail masses
    pass(10, "omega search and histogram", start, Duration::from_secs(600));
}
