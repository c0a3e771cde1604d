//! Moments of primes in progressions and their moments of moments.
//!
//! The centered moment is
//!
//! ```text
//! M_n(x, q; η) = (1/φ(q)) Σ_{(a,q)=1} (ψ_η(x; q, a) − ψ_η(x, χ₀)/φ(q))^n,
//! ```
//!
//! equal by orthogonality to φ(q)^{−n} Σ ψ_η(x, χ₁)···ψ_η(x, χ_n) over
//! non-principal tuples with χ₁···χ_n = χ₀. The moment of moments
//! V_{s,n}(T) averages (M_n(e^t) − m_n)^s against Φ(t/T) and has an exact
//! spectral expansion over arrays of zeros weighted by the Δ_s kernel; both
//! routes are implemented and compared.
//!
//! Time-domain trajectories of M_n beyond sievable x are evaluated through
//! the truncated zero-side expansion of ψ_η; the prime side is used (and
//! cross-checked against the zero side) wherever x fits in a sieve table.

use crate::arith::{gcd, CharacterGroup, LambdaTable};
use crate::combin::{mu, nu, theta};
use crate::explicit::{psi_eta_ap, psi_eta_char};
use crate::numerics::{CNeumaier, Neumaier};
use crate::weights::{beta_q, Kernel, Weight, WeightKind};
use crate::zeros::ZeroStore;
use crate::{Error, Result};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Hard cap on enumerated tuple/array combinations.
const COMBINATORIAL_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentReport {
    pub q: u64,
    pub s: u32,
    pub n: u32,
    /// T for averaged quantities, x for pointwise ones
    pub scale: f64,
    pub eta: String,
    pub kernel: Option<String>,
    pub value: f64,
    pub main_term: f64,
    pub residual: f64,
    /// quadrature + truncation budget
    pub budget: f64,
}

// ---------------------------------------------------------------------------
// pointwise moments from the prime side
// ---------------------------------------------------------------------------

/// Non-principal character tuples (χ_1, …, χ_n) with χ_1···χ_n = χ₀,
/// returned as Conrey label vectors.
fn character_tuples(group: &CharacterGroup, n: u32) -> Result<Vec<Vec<u64>>> {
    let non_principal: Vec<u64> = group.non_principal().map(|c| c.conrey).collect();
    let count = (non_principal.len() as u64).checked_pow(n.saturating_sub(1));
    match count {
        Some(c) if c <= COMBINATORIAL_BUDGET => {}
        _ => {
            return Err(Error::Budget(format!(
                "character tuple enumeration for n={n}, phi={} exceeds budget",
                group.phi
            )))
        }
    }
    let mut tuples = Vec::new();
    let mut stack = vec![0usize; n.max(1) as usize - 1];
    loop {
        // free characters are the first n−1; the last is forced
        let mut prod = group.principal();
        let mut tuple = Vec::with_capacity(n as usize);
        for &i in &stack {
            let c = group.get(non_principal[i]).unwrap();
            tuple.push(c.conrey);
            prod = group.mul(prod, c);
        }
        let last = group.conj(prod);
        if !last.is_principal() {
            tuple.push(last.conrey);
            tuples.push(tuple);
        }
        // odometer
        let mut k = stack.len();
        loop {
            if k == 0 {
                return Ok(tuples);
            }
            k -= 1;
            stack[k] += 1;
            if stack[k] < non_principal.len() {
                break;
            }
            stack[k] = 0;
        }
    }
}

/// M_n(x, q; η) over residue classes.
pub fn moment_residue_side(
    x: f64,
    group: &CharacterGroup,
    n: u32,
    eta: &Weight,
    table: &LambdaTable,
) -> Result<f64> {
    let q = group.modulus;
    if q < 3 {
        return Err(Error::Validation(format!("moments need q >= 3, got {q}")));
    }
    let phi = group.phi as f64;
    let center = psi_eta_char(x, group, 1, eta, table)?.value.re / phi;
    let mut acc = Neumaier::new();
    for a in 1..q {
        if gcd(a, q) != 1 {
            continue;
        }
        let d = psi_eta_ap(x, q, a, eta, table)?.value.re - center;
        acc.add(d.powi(n as i32));
    }
    Ok(acc.total() / phi)
}

/// M_n(x, q; η) over non-principal character tuples.
pub fn moment_character_side(
    x: f64,
    group: &CharacterGroup,
    n: u32,
    eta: &Weight,
    table: &LambdaTable,
) -> Result<f64> {
    let q = group.modulus;
    if q < 3 {
        return Err(Error::Validation(format!("moments need q >= 3, got {q}")));
    }
    let mut psi: HashMap<u64, Complex64> = HashMap::new();
    for chi in group.non_principal() {
        psi.insert(chi.conrey, psi_eta_char(x, group, chi.conrey, eta, table)?.value);
    }
    let mut acc = CNeumaier::new();
    for tuple in character_tuples(group, n)? {
        let mut prod = Complex64::new(1.0, 0.0);
        for label in tuple {
            prod *= psi[&label];
        }
        acc.add(prod);
    }
    let total = acc.total() / (group.phi as f64).powi(n as i32);
    if total.im.abs() > 1e-10 {
        return Err(Error::Validation(format!(
            "character-side moment has imaginary part {}",
            total.im
        )));
    }
    Ok(total.re)
}

// ---------------------------------------------------------------------------
// Δ kernels
// ---------------------------------------------------------------------------

/// One entry of a σ vector: the numeric value together with the symbolic
/// exactly-zero flag derived from the pairing structure of the zeros.
#[derive(Debug, Clone, Copy)]
pub struct Sigma {
    pub value: f64,
    pub is_zero: bool,
}

impl Sigma {
    pub fn new(value: f64, is_zero: bool) -> Self {
        Sigma { value, is_zero }
    }
}

/// Exact Δ_s(σ) by inclusion–exclusion: Σ_I (−1)^{s−|I|} δ₀(Σ_{μ∈I} σ_μ)
/// Π_{μ∉I} δ₀(σ_μ). Per-entry zero tests use the symbolic flag; subset-sum
/// zero tests use exact arithmetic (intended for integer-valued σ).
pub fn delta_s(sigma: &[Sigma]) -> i64 {
    let s = sigma.len();
    let mut total: i64 = 0;
    for mask in 0u32..(1 << s) {
        let mut outside_zero = true;
        let mut sum = 0.0;
        for (mu, sg) in sigma.iter().enumerate() {
            if mask & (1 << mu) != 0 {
                sum += sg.value;
            } else if !sg.is_zero {
                outside_zero = false;
                break;
            }
        }
        if !outside_zero {
            continue;
        }
        if sum == 0.0 {
            let sign = if (s - mask.count_ones() as usize) % 2 == 0 { 1 } else { -1 };
            total += sign;
        }
    }
    total
}

/// Smoothed Δ_s(σ; Φ, T): the outer δ₀ is replaced by Φ̂(T Σ_I σ)/Φ̂(0).
pub fn delta_s_smoothed(sigma: &[Sigma], kernel: &Kernel, t: f64) -> f64 {
    let s = sigma.len();
    let norm = kernel.phi_hat(0.0);
    let mut total = 0.0;
    for mask in 0u32..(1 << s) {
        let mut outside_zero = true;
        let mut sum = 0.0;
        for (mu, sg) in sigma.iter().enumerate() {
            if mask & (1 << mu) != 0 {
                sum += sg.value;
            } else if !sg.is_zero {
                outside_zero = false;
                break;
            }
        }
        if !outside_zero {
            continue;
        }
        let sign = if (s - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * kernel.phi_hat(t * sum) / norm;
    }
    total
}

// ---------------------------------------------------------------------------
// spectral side: rows and V_{s,n}
// ---------------------------------------------------------------------------

/// A signed zero symbol: (character label, index in its positive list, sign).
type Symbol = (u32, u32, i8);

/// One term of the single-row sum: a character tuple in X_{1,n} together
/// with one zero chosen per position.
#[derive(Debug, Clone)]
struct RowTerm {
    /// σ = Σ_j γ_j / 2π
    sigma: f64,
    /// Π_j η̂(γ_j / 2π) ≥ 0
    weight: f64,
    /// canonical residual symbol multiset; empty ⇔ σ symbolically zero
    sig: Vec<Symbol>,
}

fn cancel_symbols(mut sig: Vec<Symbol>) -> Vec<Symbol> {
    sig.sort_unstable_by_key(|&(c, i, s)| (c, i, s));
    let mut out: Vec<Symbol> = Vec::with_capacity(sig.len());
    for sym in sig {
        if let Some(&last) = out.last() {
            if last.0 == sym.0 && last.1 == sym.1 && last.2 == -sym.2 {
                out.pop();
                continue;
            }
        }
        out.push(sym);
    }
    out
}

/// Signed zero list for one character position: (symbol, γ, η̂(γ/2π)).
fn signed_symbol_list(
    store: &ZeroStore,
    group: &CharacterGroup,
    conrey: u64,
    eta: &Weight,
    t_height: f64,
) -> Result<Vec<(Symbol, f64, f64)>> {
    let q = group.modulus;
    let conj = group.conj(group.get(conrey).unwrap()).conrey;
    let check = |c: u64| -> Result<()> {
        let list = store
            .get(q, c)
            .ok_or_else(|| Error::Validation(format!("no zeros stored for ({q}, {c})")))?;
        if list.t_cert < t_height {
            return Err(Error::Validation(format!(
                "zeros for ({q}, {c}) certified to {}, need {t_height}",
                list.t_cert
            )));
        }
        Ok(())
    };
    check(conrey)?;
    check(conj)?;
    let mut out = Vec::new();
    let pos = store.get(q, conrey).unwrap();
    for (i, &g) in pos.gammas.iter().enumerate() {
        if g > t_height {
            break;
        }
        out.push(((conrey as u32, i as u32, 1i8), g, eta.eta_hat(g / (2.0 * PI))?));
    }
    let neg = store.get(q, conj).unwrap();
    for (i, &g) in neg.gammas.iter().enumerate() {
        if g > t_height {
            break;
        }
        out.push(((conj as u32, i as u32, -1i8), -g, eta.eta_hat(g / (2.0 * PI))?));
    }
    Ok(out)
}

/// Enumerate all single-row terms for X_{1,n} with zeros up to `t_height`.
fn row_terms(
    group: &CharacterGroup,
    store: &ZeroStore,
    n: u32,
    eta: &Weight,
    t_height: f64,
) -> Result<Vec<RowTerm>> {
    let tuples = character_tuples(group, n)?;
    let mut lists: HashMap<u64, Vec<(Symbol, f64, f64)>> = HashMap::new();
    for chi in group.non_principal() {
        lists.insert(
            chi.conrey,
            signed_symbol_list(store, group, chi.conrey, eta, t_height)?,
        );
    }
    let mut budget: u64 = 0;
    for tuple in &tuples {
        let mut size: u64 = 1;
        for label in tuple {
            size = size.saturating_mul(lists[label].len() as u64);
        }
        budget = budget.saturating_add(size);
    }
    if budget > COMBINATORIAL_BUDGET {
        return Err(Error::Budget(format!(
            "row enumeration needs {budget} zero arrays, budget {COMBINATORIAL_BUDGET}"
        )));
    }

    let mut rows = Vec::new();
    for tuple in &tuples {
        let position_lists: Vec<&Vec<(Symbol, f64, f64)>> =
            tuple.iter().map(|l| &lists[l]).collect();
        let mut stack: Vec<usize> = vec![0; tuple.len()];
        'outer: loop {
            let mut sigma = 0.0;
            let mut weight = 1.0;
            let mut sig: Vec<Symbol> = Vec::with_capacity(tuple.len());
            for (j, &idx) in stack.iter().enumerate() {
                let (sym, g, w) = position_lists[j][idx];
                sigma += g;
                weight *= w;
                sig.push(sym);
            }
            rows.push(RowTerm {
                sigma: sigma / (2.0 * PI),
                weight,
                sig: cancel_symbols(sig),
            });
            let mut k = stack.len();
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                stack[k] += 1;
                if stack[k] < position_lists[k].len() {
                    break;
                }
                stack[k] = 0;
            }
        }
    }
    Ok(rows)
}

/// m_n(q; η) from the spectral Γ₀ sum: (−1)^n φ^{−n} Σ over zero arrays with
/// symbolically vanishing total.
pub fn m_n_spectral(
    group: &CharacterGroup,
    store: &ZeroStore,
    n: u32,
    eta: &Weight,
    t_height: f64,
) -> Result<f64> {
    let rows = row_terms(group, store, n, eta, t_height)?;
    let mut acc = Neumaier::new();
    for r in &rows {
        if r.sig.is_empty() {
            acc.add(r.weight);
        }
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * acc.total() / (group.phi as f64).powi(n as i32))
}

#[derive(Debug, Clone, Copy)]
pub enum DeltaMode {
    Exact,
    Smoothed,
}

/// Spectral V_{s,n}(T): (−1)^{sn} φ^{−sn} Σ_{χ arrays} Σ_{zero arrays}
/// η̂(γ) Δ_s(σ_γ; Φ, T). Uses the closed form of Δ_s: rows with σ_μ = 0
/// drop out, the survivors couple through Φ̂(T Σ_μ σ_μ)/Φ̂(0).
pub fn vsn_spectral(
    group: &CharacterGroup,
    store: &ZeroStore,
    s: u32,
    n: u32,
    eta: &Weight,
    kernel: &Kernel,
    t_average: f64,
    t_height: f64,
    mode: DeltaMode,
) -> Result<MomentReport> {
    if s == 0 || n < 2 {
        return Err(Error::Validation(format!("vsn needs s >= 1, n >= 2, got s={s} n={n}")));
    }
    let rows_all = row_terms(group, store, n, eta, t_height)?;
    let rows: Vec<&RowTerm> = rows_all.iter().filter(|r| !r.sig.is_empty()).collect();
    let total_ops = (rows.len() as u64).checked_pow(s);
    match total_ops {
        Some(c) if c <= COMBINATORIAL_BUDGET => {}
        _ => {
            return Err(Error::Budget(format!(
                "{}^{s} coupled row combinations exceed budget",
                rows.len()
            )))
        }
    }

    let norm = kernel.phi_hat(0.0);
    let value = match mode {
        DeltaMode::Smoothed => match s {
            1 => {
                let mut acc = Neumaier::new();
                for r in &rows {
                    acc.add(r.weight * kernel.phi_hat(t_average * r.sigma));
                }
                acc.total() / norm
            }
            2 => rows
                .par_iter()
                .map(|r1| {
                    let mut acc = Neumaier::new();
                    for r2 in &rows {
                        acc.add(
                            r1.weight
                                * r2.weight
                                * kernel.phi_hat(t_average * (r1.sigma + r2.sigma)),
                        );
                    }
                    acc.total()
                })
                .sum::<f64>()
                / norm,
            _ => {
                // general recursion over s rows
                fn rec(
                    rows: &[&RowTerm],
                    depth: u32,
                    sigma: f64,
                    weight: f64,
                    kernel: &Kernel,
                    t: f64,
                ) -> f64 {
                    if depth == 0 {
                        return weight * kernel.phi_hat(t * sigma);
                    }
                    let mut acc = Neumaier::new();
                    for r in rows {
                        acc.add(rec(rows, depth - 1, sigma + r.sigma, weight * r.weight, kernel, t));
                    }
                    acc.total()
                }
                rec(&rows, s, 0.0, 1.0, kernel, t_average) / norm
            }
        },
        DeltaMode::Exact => match s {
            1 => 0.0,
            2 => {
                // Δ exact: rows pair up iff their symbol sets are opposite
                let mut by_sig: HashMap<Vec<Symbol>, f64> = HashMap::new();
                for r in &rows {
                    *by_sig.entry(r.sig.clone()).or_insert(0.0) += r.weight;
                }
                let mut acc = Neumaier::new();
                for (sig, w) in &by_sig {
                    let neg: Vec<Symbol> = sig.iter().map(|&(c, i, sg)| (c, i, -sg)).collect();
                    let neg = cancel_symbols(neg);
                    if let Some(w2) = by_sig.get(&neg) {
                        acc.add(w * w2);
                    }
                }
                acc.total()
            }
            _ => {
                return Err(Error::Budget(format!(
                    "exact Delta mode implemented for s <= 2, got {s}"
                )))
            }
        },
    };

    let phi = group.phi as f64;
    let sign = if (s * n) % 2 == 0 { 1.0 } else { -1.0 };
    let value = sign * value / phi.powi((s * n) as i32);

    let main_term = main_term_vsn(group, s, n, eta)?;
    // reported budget: finite zero height plus the O(1/T) kernel remainder
    let tail_per_char = zero_tail(group, eta, t_height);
    let row_mass: f64 = rows.iter().map(|r| r.weight).sum();
    let trunc = (s as f64)
        * (n as f64)
        * tail_per_char
        * row_mass.powi(s as i32 - 1).max(1.0)
        / phi.powi((s * n) as i32);
    let kernel_rem = match mode {
        DeltaMode::Smoothed => {
            (2.0 * eta.spectral()?.alpha() * (group.modulus as f64).ln()).powi((s * n) as i32)
                / (t_average * phi.powi(s as i32))
        }
        DeltaMode::Exact => 0.0,
    };
    Ok(MomentReport {
        q: group.modulus,
        s,
        n,
        scale: t_average,
        eta: eta.spec_string(),
        kernel: Some(kernel.spec_string().into()),
        value,
        main_term,
        residual: value - main_term,
        budget: trunc + kernel_rem,
    })
}

/// Σ_{|γ|>T} η̂(γ/2π) envelope for one character (both signs).
fn zero_tail(group: &CharacterGroup, eta: &Weight, t_height: f64) -> f64 {
    let q = group.modulus as f64;
    let (tail, _) = crate::numerics::integrate_to_inf(
        |u| eta.eta_hat(u / (2.0 * PI)).unwrap_or(0.0).abs() * (q * u / (2.0 * PI)).ln() / PI,
        t_height,
        1e-13,
    );
    2.0 * tail.abs()
}

/// Main-term prediction for V_{s,n}: μ_s V_n^{s/2} for even s, the
/// θ-weighted term for odd s = 2r+1.
pub fn main_term_vsn(group: &CharacterGroup, s: u32, n: u32, eta: &Weight) -> Result<f64> {
    let v_n = v_n_prediction(group, n, eta)?;
    if s % 2 == 0 {
        let m = mu(s).to_f64().expect("small Gaussian moment");
        Ok(m * v_n.powi((s / 2) as i32))
    } else {
        let r = s / 2;
        if r == 0 {
            return Ok(0.0);
        }
        let th = theta(n, r)?;
        let mut coeff = 1.0;
        for k in 1..=(2 * r + 1) {
            coeff *= k as f64;
        }
        for _ in 0..r {
            coeff /= 2.0;
        }
        for k in 1..r {
            coeff /= k as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * coeff * th / (group.phi as f64).sqrt() * v_n.powf((2 * r + 1) as f64 / 2.0))
    }
}

/// V_n(q;η) = ν_n (α(η̂²) log q)^n / φ(q)^{n+1}.
pub fn v_n_prediction(group: &CharacterGroup, n: u32, eta: &Weight) -> Result<f64> {
    let alpha = eta.spectral()?.alpha();
    let nun = nu(n)?.to_f64().expect("nu fits in f64");
    let phi = group.phi as f64;
    Ok(nun * (alpha * (group.modulus as f64).ln()).powi(n as i32) / phi.powi(n as i32 + 1))
}

/// Record of the closed-form predictors.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MainTerms {
    pub q: u64,
    pub n: u32,
    pub s: u32,
    pub v_n: f64,
    pub vsn_main: f64,
    /// Gaussian mean prediction μ_{2m}((α log q + β_q)/φ)^m at 2m = n
    pub gaussian_mean: Option<f64>,
    pub theta_n: f64,
}

pub fn main_terms(group: &CharacterGroup, n: u32, s: u32, eta: &Weight) -> Result<MainTerms> {
    let v_n = v_n_prediction(group, n, eta)?;
    let vsn_main = main_term_vsn(group, s, n, eta)?;
    let gaussian_mean = if n % 2 == 0 {
        let m = n / 2;
        let h = eta.spectral()?;
        let band = (h.alpha() * (group.modulus as f64).ln() + beta_q(&h, group.modulus)?)
            / group.phi as f64;
        Some(mu(n).to_f64().unwrap() * band.powi(m as i32))
    } else {
        None
    };
    Ok(MainTerms {
        q: group.modulus,
        n,
        s,
        v_n,
        vsn_main,
        gaussian_mean,
        theta_n: theta(n, s.max(3) / 2)?,
    })
}

// ---------------------------------------------------------------------------
// time-domain trajectories and quadrature
// ---------------------------------------------------------------------------

/// Per-character zero-side values ψ_η(e^t, χ) for all non-principal χ, then
/// D_a(t) = (1/φ) Σ_{χ≠χ₀} χ̄(a) ψ_η(e^t, χ) for the unit residues a.
pub struct Trajectory<'a> {
    group: &'a CharacterGroup,
    /// per non-principal character: (conrey, signed zeros, η̂ weights)
    zero_data: Vec<(u64, Vec<f64>, Vec<f64>)>,
    units: Vec<u64>,
}

impl<'a> Trajectory<'a> {
    pub fn new(
        group: &'a CharacterGroup,
        store: &ZeroStore,
        eta: &Weight,
        t_height: f64,
    ) -> Result<Self> {
        let mut zero_data = Vec::new();
        for chi in group.non_principal() {
            let zeros = store.signed_zeros(group.modulus, chi.conrey, t_height)?;
            let weights: Result<Vec<f64>> =
                zeros.iter().map(|&g| eta.eta_hat(g / (2.0 * PI))).collect();
            zero_data.push((chi.conrey, zeros, weights?));
        }
        let units = (1..group.modulus.max(2)).filter(|&a| gcd(a, group.modulus) == 1).collect();
        Ok(Trajectory { group, zero_data, units })
    }

    /// D_a(t) for every unit residue a at time t.
    pub fn d_values(&self, t: f64) -> Vec<f64> {
        let phi = self.group.phi as f64;
        let psi: Vec<(u64, Complex64)> = self
            .zero_data
            .iter()
            .map(|(conrey, zeros, weights)| {
                let mut acc = CNeumaier::new();
                for (&g, &w) in zeros.iter().zip(weights.iter()) {
                    acc.add(Complex64::from_polar(w, g * t));
                }
                (*conrey, -acc.total())
            })
            .collect();
        self.units
            .iter()
            .map(|&a| {
                let mut acc = CNeumaier::new();
                for (conrey, v) in &psi {
                    let chi = self.group.get(*conrey).unwrap();
                    acc.add(chi.value(a).conj() * v);
                }
                acc.total().re / phi
            })
            .collect()
    }

    /// M_n(e^t) from the zero side.
    pub fn m_n(&self, t: f64, n: u32) -> f64 {
        let d = self.d_values(t);
        let mut acc = Neumaier::new();
        for v in d {
            acc.add(v.powi(n as i32));
        }
        acc.total() / self.group.phi as f64
    }
}

/// Composite Simpson of f over [0, b] with an even number of panels.
fn simpson<F: Fn(f64) -> f64 + Sync>(f: &F, b: f64, npanels: usize) -> f64 {
    let n = if npanels % 2 == 0 { npanels } else { npanels + 1 };
    let h = b / n as f64;
    let vals: Vec<f64> = (0..=n).into_par_iter().map(|i| f(i as f64 * h)).collect();
    let mut acc = Neumaier::new();
    acc.add(vals[0]);
    acc.add(vals[n]);
    for (i, v) in vals.iter().enumerate().skip(1).take(n - 1) {
        acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
    }
    acc.total() * h / 3.0
}

/// Empirical V_{s,n}(T): quadrature of Φ(t/T)(M_n(e^t) − m_n)^s on [0, T],
/// with refinement doubling as the error estimate. The trajectory is the
/// zero-side expansion at height `t_height`.
#[allow(clippy::too_many_arguments)]
pub fn vsn_empirical(
    group: &CharacterGroup,
    store: &ZeroStore,
    s: u32,
    n: u32,
    eta: &Weight,
    kernel: &Kernel,
    t_average: f64,
    grid_step: f64,
    m_n: f64,
    t_height: f64,
) -> Result<MomentReport> {
    if s == 0 || n < 2 {
        return Err(Error::Validation(format!("vsn needs s >= 1, n >= 2, got s={s} n={n}")));
    }
    if !(grid_step > 0.0 && t_average > 0.0) {
        return Err(Error::Validation("grid step and T must be positive".into()));
    }
    let traj = Trajectory::new(group, store, eta, t_height)?;
    // Φ supported in [−1, 1] for both named kernels: integrate over [0, T]
    let f = |t: f64| {
        kernel.phi(t / t_average) * (traj.m_n(t, n) - m_n).powi(s as i32)
    };
    let coarse_panels = (t_average / grid_step).ceil() as usize;
    let coarse = simpson(&f, t_average, coarse_panels);
    let fine = simpson(&f, t_average, 2 * coarse_panels);
    let norm = t_average * kernel.half_mass();
    let value = fine / norm;
    let quad_err = (fine - coarse).abs() / norm;
    let main_term = main_term_vsn(group, s, n, eta)?;
    Ok(MomentReport {
        q: group.modulus,
        s,
        n,
        scale: t_average,
        eta: eta.spec_string(),
        kernel: Some(kernel.spec_string().into()),
        value,
        main_term,
        residual: value - main_term,
        budget: 2.0 * quad_err + 1e-12,
    })
}

/// (1/(T∫Φ)) ∫ Φ(t/T) D_1(t)^{2m} dt, against the Gaussian-mean prediction
/// μ_{2m}((α log q + β_q)/φ)^m.
#[allow(clippy::too_many_arguments)]
pub fn moments_a1(
    group: &CharacterGroup,
    store: &ZeroStore,
    m: u32,
    eta: &Weight,
    kernel: &Kernel,
    t_average: f64,
    grid_step: f64,
    t_height: f64,
) -> Result<MomentReport> {
    if m == 0 {
        return Err(Error::Validation("moments_a1 needs m >= 1".into()));
    }
    let traj = Trajectory::new(group, store, eta, t_height)?;
    let a1_index = 0usize; // units are listed in increasing order, a = 1 first
    let f = |t: f64| {
        let d = traj.d_values(t);
        kernel.phi(t / t_average) * d[a1_index].powi(2 * m as i32)
    };
    let panels = (t_average / grid_step).ceil() as usize;
    let coarse = simpson(&f, t_average, panels);
    let fine = simpson(&f, t_average, 2 * panels);
    let norm = t_average * kernel.half_mass();
    let value = fine / norm;
    let h = eta.spectral()?;
    let band =
        (h.alpha() * (group.modulus as f64).ln() + beta_q(&h, group.modulus)?) / group.phi as f64;
    let main_term = mu(2 * m).to_f64().unwrap() * band.powi(m as i32);
    Ok(MomentReport {
        q: group.modulus,
        s: 2 * m,
        n: 1,
        scale: t_average,
        eta: eta.spec_string(),
        kernel: Some(kernel.spec_string().into()),
        value,
        main_term,
        residual: value - main_term,
        budget: 2.0 * (fine - coarse).abs() / norm + 1e-12,
    })
}

// ---------------------------------------------------------------------------
// omega search and distribution histogram
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct OmegaHit {
    pub x: f64,
    pub value: f64,
    pub threshold: f64,
    /// heuristic (square-root cancellation) bound on the truncation error
    pub tail_heuristic: f64,
    /// unconditional Chebyshev-type bound on the truncation error
    pub tail_unconditional: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct OmegaReport {
    pub q: u64,
    pub eta: String,
    pub mode: String,
    pub epsilon: f64,
    pub prime_limit: u64,
    pub evaluated: Vec<OmegaHit>,
    pub hits: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum OmegaMode {
    /// M_{2m}(x) vs (1−ε) μ_{2m}(α log q / φ)^m
    MomentM { m: u32 },
    /// |ψ(x; q, a) − ψ(x, χ₀)/φ| ≥ c √(x log q / φ) for some a
    RawPsi { c: f64 },
}

/// Scan a grid of x values for large moment values. For the smoothed modes
/// the weight must be expK (the exponential shape makes the progression sums
/// prefix-summable in a single streaming pass over primes up to
/// x_max · e^W).
pub fn omega_search(
    q: u64,
    eta: &Weight,
    x_grid: &[f64],
    epsilon: f64,
    mode: OmegaMode,
    window: f64,
) -> Result<OmegaReport> {
    if q < 3 {
        return Err(Error::Validation(format!("omega search needs q >= 3, got {q}")));
    }
    let mut grid: Vec<f64> = x_grid.to_vec();
    grid.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    if grid.is_empty() || grid[0] < 3.0 {
        return Err(Error::Validation("x grid must be non-empty with x >= 3".into()));
    }
    let x_max = *grid.last().unwrap();
    let phi = crate::arith::euler_phi(q) as f64;
    let lnq = (q as f64).ln();

    match mode {
        OmegaMode::MomentM { m } => {
            let k = match eta.kind {
                WeightKind::ExpK(k) => k,
                _ => {
                    return Err(Error::Validation(
                        "omega search moment mode requires an expK weight".into(),
                    ))
                }
            };
            let limit = (x_max * window.exp()).ceil() as u64;
            if limit > 20_000_000_000 {
                return Err(Error::Budget(format!(
                    "prime streaming to {limit} exceeds budget"
                )));
            }
            // one streaming pass: snapshots of the two prefix arrays at grid x
            let qu = q as usize;
            let mut left = vec![Neumaier::new(); qu]; // Λ(n) n^{−1/2+K}, n ≤ x
            let mut right_prefix = vec![Neumaier::new(); qu]; // Λ(n) n^{−1/2−K}
            let mut snap_left: Vec<Vec<f64>> = vec![vec![0.0; qu]; grid.len()];
            let mut snap_right: Vec<Vec<f64>> = vec![vec![0.0; qu]; grid.len()];
            // entries must be consumed in increasing n for the snapshots
            let mut entries: Vec<(u64, f64)> = Vec::new();
            crate::arith::for_each_prime_power(limit, |n, l| entries.push((n, l)));
            entries.sort_unstable_by_key(|e| e.0);
            let mut gi = 0usize;
            for (n, l) in entries {
                while gi < grid.len() && (n as f64) > grid[gi] {
                    for a in 0..qu {
                        snap_left[gi][a] = left[a].total();
                        snap_right[gi][a] = right_prefix[a].total();
                    }
                    gi += 1;
                }
                let a = (n % q) as usize;
                if gcd(n % q, q) != 1 {
                    continue;
                }
                let ln_n = (n as f64).ln();
                left[a].add(l * ((k - 0.5) * ln_n).exp());
                right_prefix[a].add(l * ((-k - 0.5) * ln_n).exp());
            }
            while gi < grid.len() {
                for a in 0..qu {
                    snap_left[gi][a] = left[a].total();
                    snap_right[gi][a] = right_prefix[a].total();
                }
                gi += 1;
            }
            let total_right: Vec<f64> = (0..qu).map(|a| right_prefix[a].total()).collect();

            let mmu = mu(2 * m).to_f64().unwrap();
            let threshold = (1.0 - epsilon) * mmu * (k.recip() * lnq / phi).powi(m as i32);
            let mut evaluated = Vec::new();
            for (i, &x) in grid.iter().enumerate() {
                let mut d: Vec<f64> = Vec::new();
                for a in 1..qu {
                    if gcd(a as u64, q) != 1 {
                        continue;
                    }
                    d.push(
                        x.powf(-k) * snap_left[i][a]
                            + x.powf(k) * (total_right[a] - snap_right[i][a]),
                    );
                }
                let mean: f64 = d.iter().sum::<f64>() / phi;
                let m2m: f64 = d.iter().map(|v| (v - mean).powi(2 * m as i32)).sum::<f64>() / phi;
                // tail of the centered progression sum beyond the stream limit
                let w_here = (limit as f64 / x).ln();
                let ln_lim = (limit as f64).ln();
                let d_tail_heur = 1.5 * ln_lim * ln_lim * (-k * w_here).exp() / k;
                let d_tail_uncond = if k > 0.5 {
                    2.5 * ((0.5 - k) * w_here).exp() * x.sqrt() / (k - 0.5)
                } else {
                    f64::INFINITY
                };
                let dmax = d.iter().fold(0.0f64, |acc, v| acc.max((v - mean).abs()));
                let amp = 2.0 * (2 * m) as f64 * dmax.powi(2 * m as i32 - 1);
                evaluated.push(OmegaHit {
                    x,
                    value: m2m,
                    threshold,
                    tail_heuristic: amp * d_tail_heur,
                    tail_unconditional: amp * d_tail_uncond,
                });
            }
            let hits = evaluated.iter().filter(|h| h.value >= h.threshold).count();
            Ok(OmegaReport {
                q,
                eta: eta.spec_string(),
                mode: format!("M{}", 2 * m),
                epsilon,
                prime_limit: limit,
                evaluated,
                hits,
            })
        }
        OmegaMode::RawPsi { c } => {
            let limit = x_max.ceil() as u64;
            let qu = q as usize;
            let mut prefix = vec![Neumaier::new(); qu];
            let mut snaps: Vec<Vec<f64>> = vec![vec![0.0; qu]; grid.len()];
            let mut entries: Vec<(u64, f64)> = Vec::new();
            crate::arith::for_each_prime_power(limit, |n, l| entries.push((n, l)));
            entries.sort_unstable_by_key(|e| e.0);
            let mut gi = 0usize;
            for (n, l) in entries {
                while gi < grid.len() && (n as f64) > grid[gi] {
                    for a in 0..qu {
                        snaps[gi][a] = prefix[a].total();
                    }
                    gi += 1;
                }
                if gcd(n % q, q) != 1 {
                    continue;
                }
                prefix[(n % q) as usize].add(l);
            }
            while gi < grid.len() {
                for a in 0..qu {
                    snaps[gi][a] = prefix[a].total();
                }
                gi += 1;
            }
            let mut evaluated = Vec::new();
            for (i, &x) in grid.iter().enumerate() {
                let units: Vec<f64> = (1..qu)
                    .filter(|&a| gcd(a as u64, q) == 1)
                    .map(|a| snaps[i][a])
                    .collect();
                let mean = units.iter().sum::<f64>() / phi;
                let dev = units.iter().fold(0.0f64, |acc, v| acc.max((v - mean).abs()));
                let threshold = c * (x * lnq / phi).sqrt();
                evaluated.push(OmegaHit {
                    x,
                    value: dev,
                    threshold,
                    tail_heuristic: 0.0,
                    tail_unconditional: 0.0,
                });
            }
            let hits = evaluated.iter().filter(|h| h.value >= h.threshold).count();
            Ok(OmegaReport {
                q,
                eta: eta.spec_string(),
                mode: "raw-psi".into(),
                epsilon,
                prime_limit: limit,
                evaluated,
                hits,
            })
        }
    }
}

/// Standard normal upper-tail ∫_V^∞ e^{−u²/2} du / √(2π).
pub fn gaussian_tail(v: f64) -> f64 {
    0.5 * erfc_approx(v / std::f64::consts::SQRT_2)
}

fn erfc_approx(x: f64) -> f64 {
    // Abramowitz–Stegun 7.1.26, |error| < 1.5e−7; reflected for x < 0
    if x < 0.0 {
        return 2.0 - erfc_approx(-x);
    }
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    poly * (-x * x).exp()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HistogramReport {
    pub q: u64,
    pub x: f64,
    pub bins: Vec<HistogramBin>,
    /// (V, empirical frequency of value ≥ V, Gaussian tail)
    pub tails: Vec<(f64, f64, f64)>,
}

/// Empirical distribution of (ψ(x; q, a) − ψ(x, χ₀)/φ) φ^{1/2} / (x log q)^{1/2}.
pub fn distribution_histogram(x: f64, q: u64, nbins: usize) -> Result<HistogramReport> {
    if q < 3 || nbins == 0 {
        return Err(Error::Validation("histogram needs q >= 3 and bins >= 1".into()));
    }
    if !(x >= 10.0 && x <= 2e10) {
        return Err(Error::Budget(format!("histogram x = {x} out of supported range")));
    }
    let qu = q as usize;
    let mut prefix = vec![Neumaier::new(); qu];
    crate::arith::for_each_prime_power(x.floor() as u64, |n, l| {
        if gcd(n % q, q) == 1 {
            prefix[(n % q) as usize].add(l);
        }
    });
    let phi = crate::arith::euler_phi(q) as f64;
    let units: Vec<f64> = (1..qu)
        .filter(|&a| gcd(a as u64, q) == 1)
        .map(|a| prefix[a].total())
        .collect();
    let mean = units.iter().sum::<f64>() / phi;
    let scale = phi.sqrt() / (x * (q as f64).ln()).sqrt();
    let values: Vec<f64> = units.iter().map(|v| (v - mean) * scale).collect();
    let vmax = values.iter().fold(1e-9f64, |acc, v| acc.max(v.abs())) * 1.0001;
    let width = 2.0 * vmax / nbins as f64;
    let mut bins: Vec<HistogramBin> = (0..nbins)
        .map(|i| HistogramBin {
            lo: -vmax + i as f64 * width,
            hi: -vmax + (i + 1) as f64 * width,
            count: 0,
            frequency: 0.0,
        })
        .collect();
    for &v in &values {
        let idx = (((v + vmax) / width).floor() as usize).min(nbins - 1);
        bins[idx].count += 1;
    }
    for b in &mut bins {
        b.frequency = b.count as f64 / values.len() as f64;
    }
    let tails: Vec<(f64, f64, f64)> = [0.0, 0.5, 1.0, 1.5, 1.96, 2.5, 3.0]
        .iter()
        .map(|&v| {
            let emp = values.iter().filter(|&&w| w >= v).count() as f64 / values.len() as f64;
            (v, emp, gaussian_tail(v))
        })
        .collect();
    Ok(HistogramReport { q, x, bins, tails })
}
