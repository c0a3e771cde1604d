//! Zeros of Dirichlet L-functions: internal computation for small conductor,
//! TSV ingestion with validation, Riemann–von Mangoldt completeness
//! certification, the zero-sum b(χ;h) with its Weil decomposition, conductor
//! statistics, and pair correlation sums.
//!
//! The engine evaluates L(s, χ*) = q*^{−s} Σ_a χ*(a) ζ(s, a/q*) with
//! Euler–Maclaurin Hurwitz zetas, rotates to a real Hardy-type function on
//! the critical line with the phase of the completed L-function (root number
//! from the normalized Gauss sum), brackets sign changes on a density-aware
//! grid, and bisects to 1e−9. Only positive heights are stored; negative
//! zeros of χ are recovered as −γ over the zeros of the conjugate character.

use crate::arith::{inv_mod, CharacterGroup, LambdaTable};
use crate::numerics::special::{hurwitz_zeta, ln_gamma};
use crate::numerics::{integrate_to_inf, CNeumaier, Neumaier};
use crate::weights::{Kernel, SpectralWeight, GAMMA0};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Ingested,
    Computed,
}

#[derive(Debug, Clone)]
pub struct ZeroList {
    /// positive heights, strictly increasing
    pub gammas: Vec<f64>,
    pub provenance: Provenance,
    /// height up to which the count check has passed
    pub t_cert: f64,
}

impl ZeroList {
    pub fn count_up_to(&self, t: f64) -> usize {
        self.gammas.partition_point(|&g| g <= t)
    }
}

/// Expected zero count N(T, χ) for |Im ρ| ≤ T, in terms of the conductor.
pub fn expected_count(qstar: u64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t / PI * (qstar as f64 * t / (2.0 * PI * std::f64::consts::E)).ln()
}

/// Tolerance of the completeness check at height T.
pub fn count_tolerance(qstar: u64, t: f64) -> f64 {
    2.0 * (qstar as f64 * (t + 2.0)).ln() + 5.0
}

#[derive(Debug, Default)]
pub struct ZeroStore {
    lists: BTreeMap<(u64, u64), ZeroList>,
}

impl ZeroStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, q: u64, conrey: u64) -> Option<&ZeroList> {
        self.lists.get(&(q, conrey))
    }

    pub fn keys(&self) -> impl Iterator<Item = &(u64, u64)> {
        self.lists.keys()
    }

    pub fn insert(&mut self, q: u64, conrey: u64, list: ZeroList) {
        self.lists.insert((q, conrey), list);
    }

    /// Recompute certification heights against the conjugate lists currently
    /// in the store. Needed after merging per-character cache files, since a
    /// file loaded on its own has no conjugate to count against.
    pub fn recertify(&mut self, q: u64) {
        let group = crate::arith::CharacterGroup::new(q);
        let keys: Vec<(u64, u64)> = self.lists.keys().copied().filter(|k| k.0 == q).collect();
        for (lq, conrey) in keys {
            let conj = conj_label(lq, conrey);
            let qstar = group.get(conrey).map(|c| c.conductor).unwrap_or(lq);
            let t_cert = match (self.lists.get(&(lq, conrey)), self.lists.get(&(lq, conj))) {
                (Some(a), Some(b)) => certified_height(qstar, &a.gammas, &b.gammas),
                _ => 0.0,
            };
            if let Some(list) = self.lists.get_mut(&(lq, conrey)) {
                list.t_cert = t_cert;
            }
        }
    }

    /// Compute (if needed) zeros for χ and its conjugate up to height T.
    pub fn ensure_computed(&mut self, q: u64, conrey: u64, t: f64) -> Result<()> {
        let conj = conj_label(q, conrey);
        let have = |s: &Self, c: u64| s.get(q, c).map_or(false, |l| l.t_cert >= t);
        if have(self, conrey) && have(self, conj) {
            return Ok(());
        }
        let (pos, neg) = compute_zero_pair(q, conrey, t)?;
        self.lists.insert(
            (q, conrey),
            ZeroList { gammas: pos, provenance: Provenance::Computed, t_cert: t },
        );
        self.lists.insert(
            (q, conj),
            ZeroList { gammas: neg, provenance: Provenance::Computed, t_cert: t },
        );
        Ok(())
    }

    /// Compute zeros for every non-principal character mod q, in parallel.
    pub fn compute_group(&mut self, q: u64, t: f64) -> Result<()> {
        let group = CharacterGroup::new(q);
        let mut todo: Vec<u64> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for chi in group.non_principal() {
            let conj = conj_label(q, chi.conrey);
            let key = chi.conrey.min(conj);
            if seen.insert(key)
                && self.get(q, chi.conrey).map_or(true, |l| l.t_cert < t)
            {
                todo.push(key);
            }
        }
        let results: Vec<Result<(u64, Vec<f64>, Vec<f64>)>> = todo
            .par_iter()
            .map(|&c| compute_zero_pair(q, c, t).map(|(p, n)| (c, p, n)))
            .collect();
        for r in results {
            let (c, pos, neg) = r?;
            self.lists
                .insert((q, c), ZeroList { gammas: pos, provenance: Provenance::Computed, t_cert: t });
            self.lists.insert(
                (q, conj_label(q, c)),
                ZeroList { gammas: neg, provenance: Provenance::Computed, t_cert: t },
            );
        }
        Ok(())
    }

    /// Iterate over all signed zeros of χ with |γ| ≤ T: positive heights from
    /// χ itself, negative heights as −γ over the conjugate character.
    pub fn signed_zeros(&self, q: u64, conrey: u64, t: f64) -> Result<Vec<f64>> {
        let conj = conj_label(q, conrey);
        let pos = self
            .get(q, conrey)
            .ok_or_else(|| Error::Validation(format!("no zeros stored for ({q}, {conrey})")))?;
        let neg = self
            .get(q, conj)
            .ok_or_else(|| Error::Validation(format!("no zeros stored for ({q}, {conj})")))?;
        if pos.t_cert < t || neg.t_cert < t {
            return Err(Error::Validation(format!(
                "zeros for ({q}, {conrey}) certified only to {}, need {t}",
                pos.t_cert.min(neg.t_cert)
            )));
        }
        let mut out: Vec<f64> = neg.gammas[..neg.count_up_to(t)].iter().map(|&g| -g).collect();
        out.reverse();
        out.extend_from_slice(&pos.gammas[..pos.count_up_to(t)]);
        Ok(out)
    }

    /// Write each list to `root/q=<q>/chi=<conrey>.tsv`.
    pub fn save_cache(&self, root: &Path) -> Result<()> {
        for (&(q, conrey), list) in &self.lists {
            let dir = root.join(format!("q={q}"));
            std::fs::create_dir_all(&dir)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(
                dir.join(format!("chi={conrey}.tsv")),
            )?);
            writeln!(f, "q\tconrey\tgamma")?;
            for &g in &list.gammas {
                writeln!(f, "{q}\t{conrey}\t{g:.12e}")?;
            }
        }
        Ok(())
    }

    pub fn cache_path(root: &Path, q: u64, conrey: u64) -> PathBuf {
        root.join(format!("q={q}")).join(format!("chi={conrey}.tsv"))
    }
}

fn conj_label(q: u64, conrey: u64) -> u64 {
    if q <= 2 {
        1
    } else {
        inv_mod(conrey % q, q)
    }
}

/// Parse a zeros TSV file and certify each list against the count formula.
pub fn load_zeros(path: &Path) -> Result<ZeroStore> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lists: BTreeMap<(u64, u64), Vec<f64>> = BTreeMap::new();
    let mut prev: Option<(u64, u64, f64)> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim_end() != "q\tconrey\tgamma" {
                return Err(Error::Format {
                    line: lineno,
                    msg: format!("expected header 'q\\tconrey\\tgamma', got {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Format { line: lineno, msg: format!("expected 3 fields, got {}", fields.len()) });
        }
        let q: u64 = fields[0]
            .parse()
            .map_err(|_| Error::Format { line: lineno, msg: format!("bad modulus {:?}", fields[0]) })?;
        let conrey: u64 = fields[1]
            .parse()
            .map_err(|_| Error::Format { line: lineno, msg: format!("bad conrey label {:?}", fields[1]) })?;
        let gamma: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Format { line: lineno, msg: format!("bad height {:?}", fields[2]) })?;
        if !(gamma > 0.0) {
            return Err(Error::Format { line: lineno, msg: format!("non-positive height {gamma}") });
        }
        if let Some((pq, pc, pg)) = prev {
            if (q, conrey) < (pq, pc) {
                return Err(Error::Format { line: lineno, msg: "rows not sorted by (q, conrey)".into() });
            }
            if (q, conrey) == (pq, pc) && gamma <= pg {
                return Err(Error::Format {
                    line: lineno,
                    msg: format!("heights not strictly increasing: {gamma} after {pg}"),
                });
            }
        }
        prev = Some((q, conrey, gamma));
        lists.entry((q, conrey)).or_default().push(gamma);
    }

    let mut store = ZeroStore::new();
    let keys: Vec<(u64, u64)> = lists.keys().copied().collect();
    for (q, conrey) in keys {
        let gammas = lists[&(q, conrey)].clone();
        let conj = conj_label(q, conrey);
        let other = lists.get(&(q, conj));
        let qstar = CharacterGroup::new(q)
            .get(conrey)
            .map(|c| c.conductor)
            .unwrap_or(q);
        let t_cert = match other {
            Some(og) => certified_height(qstar, &gammas, og),
            None => 0.0,
        };
        store.insert(q, conrey, ZeroList { gammas, provenance: Provenance::Ingested, t_cert });
    }
    Ok(store)
}

/// Largest listed height at which the two-sided count matches the formula.
fn certified_height(qstar: u64, pos: &[f64], neg: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut merged: Vec<f64> = pos.iter().chain(neg.iter()).copied().collect();
    merged.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    for (i, &t) in merged.iter().enumerate() {
        let count = (i + 1) as f64;
        if (count - expected_count(qstar, t)).abs() <= count_tolerance(qstar, t) {
            best = t;
        }
    }
    // lists can only certify up to the shorter side
    let cap = pos
        .last()
        .copied()
        .unwrap_or(0.0)
        .min(neg.last().copied().unwrap_or(0.0));
    best.min(cap)
}

// ---------------------------------------------------------------------------
// the zero engine
// ---------------------------------------------------------------------------

/// Hardy-type real rotation of L(1/2 + it, χ*) for a primitive χ*.
struct HardyEvaluator {
    qstar: u64,
    coeffs: Vec<Complex64>,
    half_log_q_pi: f64,
    gamma_shift: f64,
    omega: Complex64,
}

impl HardyEvaluator {
    fn new(group: &CharacterGroup, conrey: u64) -> Result<Self> {
        let chi = group
            .get(conrey)
            .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {}", group.modulus)))?;
        if chi.is_principal() {
            return Err(Error::Validation("principal character has no L-zero engine".into()));
        }
        let qstar = chi.conductor;
        let coeffs: Vec<Complex64> = (1..=qstar).map(|a| chi.primitive_value(a)).collect();
        // normalized Gauss sum: epsilon = tau(χ*) / (i^a sqrt(q*))
        let mut tau = CNeumaier::new();
        for (a, c) in coeffs.iter().enumerate() {
            let m = (a + 1) as f64;
            tau.add(c * Complex64::from_polar(1.0, 2.0 * PI * m / qstar as f64));
        }
        let a_parity = chi.parity;
        let i_a = if a_parity == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        let eps = tau.total() / (i_a * (qstar as f64).sqrt());
        if (eps.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "root number off the unit circle: |eps| = {}",
                eps.norm()
            )));
        }
        let omega = Complex64::from_polar(1.0, -0.5 * eps.arg());
        Ok(HardyEvaluator {
            qstar,
            coeffs,
            half_log_q_pi: 0.5 * (qstar as f64 / PI).ln(),
            gamma_shift: (0.5 + a_parity as f64) / 2.0,
            omega,
        })
    }

    fn l_value(&self, t: f64) -> Complex64 {
        let s = Complex64::new(0.5, t);
        let mut acc = CNeumaier::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let a = (i + 1) as f64 / self.qstar as f64;
            acc.add(c * hurwitz_zeta(s, a));
        }
        acc.total() * (-s * (self.qstar as f64).ln()).exp()
    }

    /// Real on the critical line up to rounding.
    fn z(&self, t: f64) -> f64 {
        let theta = t * self.half_log_q_pi
            + ln_gamma(Complex64::new(self.gamma_shift, t / 2.0)).im;
        (self.omega * Complex64::from_polar(1.0, theta) * self.l_value(t)).re
    }
}

/// Zeros of χ and of its conjugate in (0, T], via one scan of [−T, T].
fn compute_zero_pair(q: u64, conrey: u64, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(3..=100).contains(&q) {
        return Err(Error::Validation(format!("zero engine supports 3 <= q <= 100, got {q}")));
    }
    if !(t > 0.0 && t <= 500.0) {
        return Err(Error::Validation(format!("zero engine supports 0 < T <= 500, got {t}")));
    }
    let group = CharacterGroup::new(q);
    let ev = HardyEvaluator::new(&group, conrey)?;
    let qstar = ev.qstar;
    let self_conjugate = conj_label(q, conrey) == conrey % q;

    let mut step = (PI / (6.0 * (qstar as f64 * (t + 2.0)).ln())).min(0.1);
    for _attempt in 0..5 {
        let signed = scan_zeros(&ev, t, step, self_conjugate);
        let pos: Vec<f64> = signed.iter().filter(|&&g| g > 0.0).copied().collect();
        let neg: Vec<f64> = {
            let mut v: Vec<f64> = signed.iter().filter(|&&g| g < 0.0).map(|&g| -g).collect();
            v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        let (pos, neg) = if self_conjugate { (pos.clone(), pos) } else { (pos, neg) };
        let count = (pos.len() + neg.len()) as f64;
        if (count - expected_count(qstar, t)).abs() <= count_tolerance(qstar, t) {
            return Ok((pos, neg));
        }
        step /= 2.0;
    }
    Err(Error::Validation(format!(
        "completeness check failed for ({q}, {conrey}) on (0, {t}] after grid refinement"
    )))
}

fn scan_zeros(ev: &HardyEvaluator, t: f64, step: f64, self_conjugate: bool) -> Vec<f64> {
    let lo = if self_conjugate { 1e-3 } else { -t };
    let n = ((t - lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + i as f64 * step).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&x| ev.z(x)).collect();
    let mut zeros = Vec::new();
    for i in 0..n {
        if vals[i] == 0.0 {
            if grid[i].abs() > 1e-6 {
                zeros.push(grid[i]);
            }
            continue;
        }
        if vals[i].signum() != vals[i + 1].signum() {
            let (mut a, mut b) = (grid[i], grid[i + 1]);
            let mut fa = vals[i];
            while b - a > 1e-9 {
                let m = 0.5 * (a + b);
                let fm = ev.z(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa.signum() == fm.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            if root.abs() > 1e-6 && root <= t && root >= -t {
                zeros.push(root);
            }
        }
    }
    zeros
}

/// Public single-character entry point: positive zeros of χ in (0, T].
pub fn compute_zeros(q: u64, conrey: u64, t: f64) -> Result<Vec<f64>> {
    compute_zero_pair(q, conrey, t).map(|(pos, _)| pos)
}

// ---------------------------------------------------------------------------
// zero sums
// ---------------------------------------------------------------------------

/// b(χ;h) truncated at |γ| ≤ T: value and a reported tail bound obtained by
/// integrating the h envelope against the zero-counting density.
pub fn b_chi(
    store: &ZeroStore,
    q: u64,
    conrey: u64,
    h: &SpectralWeight,
    t: f64,
) -> Result<(f64, f64)> {
    let qstar = CharacterGroup::new(q)
        .get(conrey)
        .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {q}")))?
        .conductor;
    let zeros = store.signed_zeros(q, conrey, t)?;
    let mut acc = Neumaier::new();
    for g in zeros {
        acc.add(h.h(g / (2.0 * PI)));
    }
    // tail: 2 ∫_T^∞ h(u/2π) dN(u), with density (1/π) log(q* u / 2π) per side
    let (tail, _) = integrate_to_inf(
        |u| h.h(u / (2.0 * PI)) * (qstar as f64 * u / (2.0 * PI)).ln() / PI,
        t,
        1e-13,
    );
    Ok((acc.total(), 2.0 * tail.abs() + 1e-12))
}

#[derive(Debug, Clone)]
pub struct BDecomposition {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// reported bound on the truncated b2 prime tail
    pub b2_tail: f64,
    /// quadrature error bound for b3
    pub b3_err: f64,
    pub n_primes: u64,
}

impl BDecomposition {
    pub fn total(&self) -> f64 {
        self.b1 + self.b2 + self.b3
    }
    pub fn combined_bound(&self) -> f64 {
        self.b2_tail + self.b3_err
    }
}

/// Weil-side decomposition b = b1 + b2 + b3 for a non-principal χ.
pub fn b_decomposition(
    group: &CharacterGroup,
    conrey: u64,
    h: &SpectralWeight,
    lambda: &LambdaTable,
) -> Result<BDecomposition> {
    let chi = group
        .get(conrey)
        .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {}", group.modulus)))?;
    if chi.is_principal() {
        return Err(Error::Validation("b decomposition needs a non-principal character".into()));
    }
    let qstar = chi.conductor as f64;
    let alpha = h.alpha();
    let b1 = alpha * ((qstar / (8.0 * PI)).ln() - GAMMA0 - (PI / 2.0) * chi.sign());

    // b2 = −Σ_{n≤N} Λ(n) n^{−1/2} (χ*(n) ĥ(log n) + conj(χ*)(n) ĥ(−log n))
    let mut acc = CNeumaier::new();
    for &(n, l) in lambda.entries() {
        let c = chi.primitive_value(n);
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let x = (n as f64).ln();
        let w = l / (n as f64).sqrt();
        acc.add(c * (w * h.h_hat(x)));
        acc.add(c.conj() * (w * h.h_hat(-x)));
    }
    let b2 = -acc.total().re;
    let n_primes = lambda.limit;
    let ln_n = (n_primes as f64).ln();
    // heuristic tail from ψ(x,χ) ≪ √x log²(qx) by partial summation
    let (b2_tail, _) = integrate_to_inf(
        |x| {
            let d = 1e-5;
            let hd = ((h.h_hat(x + d) - h.h_hat(x - d)) / (2.0 * d)).abs();
            (x + (group.modulus as f64).ln()).powi(2) * (0.5 * h.h_hat(x) + hd)
        },
        ln_n,
        1e-14,
    );
    let b2_tail = 2.0 * b2_tail.abs() + 1e-12;

    // b3 = ∫_0^∞ e^{−(1/2+a)x}/(1−e^{−2x}) (2ĥ(0) − ĥ(x) − ĥ(−x)) dx
    let a = chi.parity as f64;
    let front = |x: f64| (-(0.5 + a) * x).exp() / (-(-2.0 * x).exp_m1());
    let diff = |x: f64| 2.0 * alpha - h.h_hat(x) - h.h_hat(-x);
    let eps = 1e-3;
    let c2 = diff(eps) / (eps * eps);
    const X0: f64 = 0.125;
    let (head, e1) = crate::numerics::integrate(
        |x| {
            let d = if x < 1e-4 { c2 * x * x } else { diff(x) };
            front(x) * d
        },
        0.0,
        X0,
        1e-11,
    );
    let (tail3, e2) = integrate_to_inf(|x| front(x) * diff(x), X0, 1e-11);
    Ok(BDecomposition {
        b1,
        b2,
        b3: head + tail3,
        b2_tail,
        b3_err: e1 + e2 + 1e-10,
        n_primes,
    })
}

/// Mean-identity residual and variance of log q_χ over non-principal χ mod q.
pub fn conductor_moments(q: u64) -> Result<(f64, f64)> {
    if q < 3 {
        return Err(Error::Validation(format!("conductor moments need q >= 3, got {q}")));
    }
    let group = CharacterGroup::new(q);
    let prime_part: f64 = crate::arith::factorize(q)
        .iter()
        .map(|&(p, _)| (p as f64).ln() / (p as f64 - 1.0))
        .sum();
    let target = (q as f64).ln() - prime_part;
    let phi = group.phi as f64;
    let mut mean = Neumaier::new();
    let mut var = Neumaier::new();
    for chi in group.non_principal() {
        let lq = (chi.conductor as f64).ln();
        mean.add(lq);
        var.add((lq - target) * (lq - target));
    }
    Ok((mean.total() / phi - target, var.total() / phi))
}

/// Pair correlation sum P(h; χ, z) with an explicit kernel; returns the value
/// and a reported truncation bound.
#[allow(clippy::too_many_arguments)]
pub fn pair_correlation(
    store: &ZeroStore,
    group: &CharacterGroup,
    conrey: u64,
    z: f64,
    l: f64,
    h: &SpectralWeight,
    kernel: &Kernel,
    t: f64,
) -> Result<(f64, f64)> {
    if l < 1.0 {
        return Err(Error::Validation(format!("pair correlation needs L >= 1, got {l}")));
    }
    let q = group.modulus;
    let chi = group
        .get(conrey)
        .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {q}")))?;
    let phimax = kernel.phi_hat(0.0);
    let mut value = Neumaier::new();
    let mut bound = 0.0f64;
    for c1 in group.non_principal() {
        let c2 = group.mul(chi, group.conj(c1));
        if c2.is_principal() {
            continue;
        }
        let z1 = store.signed_zeros(q, c1.conrey, t)?;
        let z2 = store.signed_zeros(q, c2.conrey, t)?;
        let (s1, tau1) = b_chi(store, q, c1.conrey, h, t)?;
        let (s2, tau2) = b_chi(store, q, c2.conrey, h, t)?;
        for &g1 in &z1 {
            let h1 = h.h(g1 / (2.0 * PI));
            if h1 == 0.0 {
                continue;
            }
            for &g2 in &z2 {
                let arg = l / (2.0 * PI) * (z - g1 - g2);
                let k = kernel.phi_hat(arg);
                if k != 0.0 {
                    value.add(h1 * h.h(g2 / (2.0 * PI)) * k);
                }
            }
        }
        bound += phimax * (s1.abs() * tau2 + tau1 * s2.abs() + tau1 * tau2);
    }
    Ok((value.total(), bound))
}
