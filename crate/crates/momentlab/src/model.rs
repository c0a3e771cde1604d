//! Monte Carlo model of the limiting random variable H_n(q; η).
//!
//! Under LI the phases e^{iγt} of distinct positive zero heights flow
//! independently, so the limiting distribution of the zero-side M_n(e^t)
//! is modelled by replacing each e^{iγt} with an independent uniform unit
//! phase per orbit, an orbit being (character, positive height) together
//! with its conjugate (χ̄, −γ). The construction keeps the spectrum
//! conjugate-closed, so every sample is real.

use crate::arith::{gcd, CharacterGroup};
use crate::moments::Trajectory;
use crate::numerics::{CNeumaier, Neumaier};
use crate::weights::Weight;
use crate::zeros::ZeroStore;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    Li,
    TimeAverage,
}

#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub mode: SampleMode,
    pub q: u64,
    pub n: u32,
    pub values: Vec<f64>,
    /// largest |Im| seen in any D(a) power sum before taking the real part
    pub max_imag: f64,
}

/// Precomputed spectral data: per non-principal character, the positive
/// zeros up to the certified height with their η̂ weights.
struct Spectrum {
    /// (conrey, conj conrey, weights η̂(γ/2π) for the positive zeros)
    chars: Vec<(u64, u64, Vec<f64>)>,
    /// orbit count = total number of positive zeros across characters
    orbits: usize,
}

fn build_spectrum(
    group: &CharacterGroup,
    store: &ZeroStore,
    eta: &Weight,
    t_height: f64,
) -> Result<Spectrum> {
    let q = group.modulus;
    let mut chars = Vec::new();
    let mut orbits = 0usize;
    for chi in group.non_principal() {
        let list = store
            .get(q, chi.conrey)
            .ok_or_else(|| Error::Validation(format!("no zeros stored for ({q}, {})", chi.conrey)))?;
        if list.t_cert < t_height {
            return Err(Error::Validation(format!(
                "zeros for ({q}, {}) certified to {}, need {t_height}",
                chi.conrey, list.t_cert
            )));
        }
        let weights: Result<Vec<f64>> = list
            .gammas
            .iter()
            .take_while(|&&g| g <= t_height)
            .map(|&g| eta.eta_hat(g / (2.0 * PI)))
            .collect();
        let weights = weights?;
        orbits += weights.len();
        chars.push((chi.conrey, group.conj(chi).conrey, weights));
    }
    Ok(Spectrum { chars, orbits })
}

/// One H_n evaluation for a fixed assignment of unit phases z[k], one per
/// orbit in the deterministic order of `spectrum.chars`. Returns
/// (H_n, max |Im| residue).
fn h_n_for_phases(
    group: &CharacterGroup,
    spectrum: &Spectrum,
    phases: &[Complex64],
    n: u32,
) -> (f64, f64) {
    let q = group.modulus;
    let phi = group.phi as f64;
    // W(χ) = −Σ_{γ>0 of χ} η̂ z − Σ_{γ>0 of χ̄} η̂ conj(z)
    let mut offset = Vec::with_capacity(spectrum.chars.len());
    let mut k = 0usize;
    for (_, _, w) in &spectrum.chars {
        offset.push(k);
        k += w.len();
    }
    let w_half: Vec<CNeumaier> = spectrum
        .chars
        .iter()
        .enumerate()
        .map(|(i, (_, _, weights))| {
            let mut acc = CNeumaier::new();
            for (j, &wt) in weights.iter().enumerate() {
                acc.add(phases[offset[i] + j] * wt);
            }
            let _ = i;
            acc
        })
        .collect();
    let w_value = |conrey: u64| -> Complex64 {
        // locate χ and χ̄ rows
        let i = spectrum.chars.iter().position(|c| c.0 == conrey).unwrap();
        let conj = spectrum.chars[i].1;
        let ic = spectrum.chars.iter().position(|c| c.0 == conj).unwrap();
        -(w_half[i].total() + w_half[ic].total().conj())
    };
    let w: Vec<(u64, Complex64)> = spectrum
        .chars
        .iter()
        .map(|(conrey, _, _)| (*conrey, w_value(*conrey)))
        .collect();
    let mut max_imag = 0.0f64;
    let mut h = Neumaier::new();
    for a in 1..q.max(2) {
        if gcd(a, q) != 1 {
            continue;
        }
        let mut acc = CNeumaier::new();
        for (conrey, wv) in &w {
            let chi = group.get(*conrey).unwrap();
            acc.add(chi.value(a).conj() * wv);
        }
        let d = acc.total() / phi;
        max_imag = max_imag.max(d.im.abs());
        h.add(d.re.powi(n as i32));
    }
    (h.total() / phi, max_imag)
}

/// Draw `count` independent H_n samples. Each sample uses its own
/// counter-based RNG stream, so the batch is reproducible and
/// order-independent under parallel generation.
#[allow(clippy::too_many_arguments, non_snake_case)]
pub fn sample_H(
    group: &CharacterGroup,
    store: &ZeroStore,
    n: u32,
    eta: &Weight,
    mode: SampleMode,
    seed: u64,
    count: usize,
    t_height: f64,
) -> Result<SampleBatch> {
    if n < 2 {
        return Err(Error::Validation(format!("sample_H needs n >= 2, got {n}")));
    }
    if count == 0 || count > 50_000_000 {
        return Err(Error::Budget(format!("sample count {count} out of range")));
    }
    let spectrum = build_spectrum(group, store, eta, t_height)?;
    let results: Vec<(f64, f64)> = match mode {
        SampleMode::Li => (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(i as u64 + 1);
                let phases: Vec<Complex64> = (0..spectrum.orbits)
                    .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))
                    .collect();
                h_n_for_phases(group, &spectrum, &phases, n)
            })
            .collect(),
        SampleMode::TimeAverage => {
            // X ~ U[0, X_max] time draws with Z_γ = e^{iγX}; the spread is
            // wide enough to decorrelate the stored heights
            let x_max = 1.0e4;
            (0..count)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha20Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64 + 1);
                    let x = rng.gen_range(0.0..x_max);
                    let mut phases = Vec::with_capacity(spectrum.orbits);
                    for (conrey, _, weights) in &spectrum.chars {
                        let zeros = store.get(group.modulus, *conrey).unwrap();
                        for j in 0..weights.len() {
                            phases.push(Complex64::from_polar(1.0, zeros.gammas[j] * x));
                        }
                    }
                    h_n_for_phases(group, &spectrum, &phases, n)
                })
                .collect()
        }
    };
    let mut max_imag = 0.0f64;
    let mut values = Vec::with_capacity(count);
    for (v, im) in results {
        values.push(v);
        max_imag = max_imag.max(im);
    }
    Ok(SampleBatch {
        seed,
        count,
        mode,
        q: group.modulus,
        n,
        values,
        max_imag,
    })
}

/// Exact LI-mode expectation of H_2: only (χ, χ̄) pairs with (γ, −γ)
/// survive phase averaging, giving φ^{−2} Σ_{χ≠χ₀} Σ_γ η̂(γ/2π)².
pub fn model_mean_exact(
    group: &CharacterGroup,
    store: &ZeroStore,
    n: u32,
    eta: &Weight,
    t_height: f64,
) -> Result<f64> {
    if n != 2 {
        return Err(Error::Validation(format!(
            "exact model mean implemented for n = 2 only, got {n}"
        )));
    }
    let spectrum = build_spectrum(group, store, eta, t_height)?;
    let mut acc = Neumaier::new();
    for (_, _, weights) in &spectrum.chars {
        for &w in weights {
            // both ±γ of this character
            acc.add(2.0 * w * w);
        }
    }
    Ok(acc.total() / (group.phi as f64).powi(2))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentEstimate {
    pub s: u32,
    pub value: f64,
    pub std_error: f64,
    pub prediction: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EstimateReport {
    pub q: u64,
    pub n: u32,
    pub count: usize,
    pub mean: f64,
    pub mean_std_error: f64,
    pub centered: Vec<MomentEstimate>,
}

/// Centered sample moments with bootstrap standard errors, side by side
/// with the main-term predictions.
pub fn estimate_moments(
    batch: &SampleBatch,
    s_list: &[u32],
    group: &CharacterGroup,
    eta: &Weight,
) -> Result<EstimateReport> {
    if batch.values.is_empty() {
        return Err(Error::Validation("empty sample batch".into()));
    }
    let m = batch.values.len();
    let mean = batch.values.iter().sum::<f64>() / m as f64;
    let var = batch.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
    let mean_se = (var / m as f64).sqrt();

    let nboot = 200usize;
    let mut centered = Vec::new();
    for &s in s_list {
        if s == 0 {
            return Err(Error::Validation("moment order s must be >= 1".into()));
        }
        let stat = |vals: &[f64]| -> f64 {
            let mu = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - mu).powi(s as i32)).sum::<f64>() / vals.len() as f64
        };
        let point = stat(&batch.values);
        let boots: Vec<f64> = (0..nboot)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha20Rng::seed_from_u64(batch.seed ^ 0x626f6f74);
                rng.set_stream(b as u64 + 1);
                let resampled: Vec<f64> = (0..m)
                    .map(|_| batch.values[rng.gen_range(0..m)])
                    .collect();
                stat(&resampled)
            })
            .collect();
        let bmean = boots.iter().sum::<f64>() / nboot as f64;
        let bse =
            (boots.iter().map(|v| (v - bmean).powi(2)).sum::<f64>() / (nboot - 1) as f64).sqrt();
        let prediction = crate::moments::main_term_vsn(group, s, batch.n, eta)?;
        centered.push(MomentEstimate {
            s,
            value: point,
            std_error: bse,
            prediction,
        });
    }
    Ok(EstimateReport {
        q: batch.q,
        n: batch.n,
        count: m,
        mean,
        mean_std_error: mean_se,
        centered,
    })
}

/// Deterministic trajectory H_n(t) = zero-side M_n(e^t) on a grid, with its
/// running time average.
pub fn time_average_mode(
    group: &CharacterGroup,
    store: &ZeroStore,
    n: u32,
    eta: &Weight,
    t_max: f64,
    grid_step: f64,
    t_height: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(t_max > 0.0 && grid_step > 0.0) {
        return Err(Error::Validation("t_max and grid step must be positive".into()));
    }
    let npts = (t_max / grid_step).ceil() as usize + 1;
    if npts > 20_000_000 {
        return Err(Error::Budget(format!("{npts} grid points exceed budget")));
    }
    let traj = Trajectory::new(group, store, eta, t_height)?;
    let series: Vec<(f64, f64)> = (0..npts)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * grid_step;
            (t, traj.m_n(t, n))
        })
        .collect();
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Weight;

    fn setup(q: u64, height: f64) -> (CharacterGroup, ZeroStore) {
        let group = CharacterGroup::new(q);
        let mut store = ZeroStore::new();
        store.compute_group(q, height).unwrap();
        (group, store)
    }

    #[test]
    fn reproducible_and_real() {
        let (group, store) = setup(5, 50.0);
        let eta = Weight::parse("expK:1").unwrap();
        let b1 = sample_H(&group, &store, 2, &eta, SampleMode::Li, 42, 500, 50.0).unwrap();
        let b2 = sample_H(&group, &store, 2, &eta, SampleMode::Li, 42, 500, 50.0).unwrap();
        assert_eq!(b1.values, b2.values);
        assert!(b1.max_imag < 1e-9, "imaginary residue {}", b1.max_imag);
        let b3 = sample_H(&group, &store, 2, &eta, SampleMode::Li, 43, 500, 50.0).unwrap();
        assert_ne!(b1.values, b3.values);
    }

    #[test]
    fn n2_samples_nonnegative() {
        let (group, store) = setup(7, 50.0);
        let eta = Weight::parse("expK:1").unwrap();
        let b = sample_H(&group, &store, 2, &eta, SampleMode::Li, 7, 300, 50.0).unwrap();
        assert!(b.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn exact_mean_is_quarter_b_sum_at_q3() {
        let (group, store) = setup(3, 60.0);
        let eta = Weight::parse("expK:1").unwrap();
        let h = eta.spectral().unwrap();
        let mean = model_mean_exact(&group, &store, 2, &eta, 60.0).unwrap();
        let chi = group.non_principal().next().unwrap();
        let (b, _) = crate::zeros::b_chi(&store, 3, chi.conrey, &h, 60.0).unwrap();
        assert!((mean - 0.25 * b).abs() < 1e-13, "{mean} vs {}", 0.25 * b);
        assert!(mean >= 0.0);
        // agrees with the spectral m_2 route
        let m2 = crate::moments::m_n_spectral(&group, &store, 2, &eta, 60.0).unwrap();
        assert!((mean - m2).abs() < 1e-13);
    }

    #[test]
    fn li_mean_within_three_standard_errors() {
        let (group, store) = setup(5, 50.0);
        let eta = Weight::parse("expK:1").unwrap();
        let exact = model_mean_exact(&group, &store, 2, &eta, 50.0).unwrap();
        let b = sample_H(&group, &store, 2, &eta, SampleMode::Li, 11, 20_000, 50.0).unwrap();
        let rep = estimate_moments(&b, &[2], &group, &eta).unwrap();
        assert!(
            (rep.mean - exact).abs() <= 3.0 * rep.mean_std_error,
            "mean {} exact {exact} se {}",
            rep.mean,
            rep.mean_std_error
        );
        assert!(rep.centered[0].value >= 0.0);
    }

    #[test]
    fn odd_n_mean_near_zero() {
        let (group, store) = setup(5, 50.0);
        let eta = Weight::parse("expK:1").unwrap();
        let b = sample_H(&group, &store, 3, &eta, SampleMode::Li, 13, 20_000, 50.0).unwrap();
        let rep = estimate_moments(&b, &[2], &group, &eta).unwrap();
        assert!(
            rep.mean.abs() <= 3.0 * rep.mean_std_error,
            "odd mean {} se {}",
            rep.mean,
            rep.mean_std_error
        );
    }

    #[test]
    fn phase_route_matches_tuple_sum() {
        // one fixed phase assignment: the D(a)-power formula equals the
        // direct sum over X_{1,2} of W(χ1)W(χ2)/φ²
        let (group, store) = setup(5, 50.0);
        let eta = Weight::parse("expK:1").unwrap();
        let spectrum = build_spectrum(&group, &store, &eta, 50.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let phases: Vec<Complex64> = (0..spectrum.orbits)
            .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let (h2, _) = h_n_for_phases(&group, &spectrum, &phases, 2);
        // rebuild the W values the same way and sum over tuples (χ, χ̄)
        let mut offset = Vec::new();
        let mut k = 0usize;
        for (_, _, w) in &spectrum.chars {
            offset.push(k);
            k += w.len();
        }
        let half: Vec<Complex64> = spectrum
            .chars
            .iter()
            .enumerate()
            .map(|(i, (_, _, weights))| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, &wt)| phases[offset[i] + j] * wt)
                    .sum()
            })
            .collect();
        let w_of = |conrey: u64| -> Complex64 {
            let i = spectrum.chars.iter().position(|c| c.0 == conrey).unwrap();
            let ic = spectrum
                .chars
                .iter()
                .position(|c| c.0 == spectrum.chars[i].1)
                .unwrap();
            -(half[i] + half[ic].conj())
        };
        let mut direct = Complex64::new(0.0, 0.0);
        for chi in group.non_principal() {
            let conj = group.conj(chi);
            direct += w_of(chi.conrey) * w_of(conj.conrey);
        }
        let direct = direct / (group.phi as f64).powi(2);
        assert!(direct.im.abs() < 1e-9);
        assert!((h2 - direct.re).abs() < 1e-9, "{h2} vs {}", direct.re);
    }

    #[test]
    fn time_average_converges_to_exact_mean() {
        let (group, store) = setup(3, 60.0);
        let eta = Weight::parse("expK:1").unwrap();
        let exact = model_mean_exact(&group, &store, 2, &eta, 60.0).unwrap();
        let series = time_average_mode(&group, &store, 2, &eta, 1.0e4, 0.5, 60.0).unwrap();
        let avg = series.iter().map(|&(_, v)| v).sum::<f64>() / series.len() as f64;
        assert!(
            (avg - exact).abs() < 0.05 * exact.abs(),
            "avg {avg} exact {exact}"
        );
        // t = 0 collapses all phases to 1
        let traj = Trajectory::new(&group, &store, &eta, 60.0).unwrap();
        assert!((series[0].1 - traj.m_n(0.0, 2)).abs() < 1e-12);
    }

    #[test]
    fn constant_batch_centered_moments_vanish() {
        let group = CharacterGroup::new(5);
        let eta = Weight::parse("expK:1").unwrap();
        let batch = SampleBatch {
            seed: 1,
            count: 100,
            mode: SampleMode::Li,
            q: 5,
            n: 2,
            values: vec![0.7; 100],
            max_imag: 0.0,
        };
        let rep = estimate_moments(&batch, &[2, 3], &group, &eta).unwrap();
        assert!((rep.mean - 0.7).abs() < 1e-12);
        for c in &rep.centered {
            assert!(c.value.abs() < 1e-12);
        }
    }
}
