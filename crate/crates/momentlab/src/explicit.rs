//! Both sides of the explicit formula.
//!
//! Prime side: ψ_η(x; q, a) = Σ_{n ≡ a (q)} Λ(n) n^{−1/2} η(log(n/x)) and its
//! character twist ψ_η(x, χ). Zero side: −Σ_{|γ|≤T} e^{iγt} η̂(γ/2π) with
//! t = log x, together with a computed budget for the archimedean and
//! ramified corrections that the identity hides in its O(e^{−t/2} log q)
//! term. `weil_residual` evaluates every term of the identity and reports
//! the leftover, which should be at truncation scale.

use crate::arith::{gcd, CharacterGroup, LambdaTable};
use crate::numerics::special::digamma;
use crate::numerics::{integrate, integrate_to_inf, CNeumaier, Neumaier};
use crate::weights::Weight;
use crate::zeros::ZeroStore;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Prime,
    Zero,
}

#[derive(Debug, Clone, Copy)]
pub struct PsiValue {
    pub value: Complex64,
    pub bound: f64,
    pub side: Side,
}

fn small_lambda() -> &'static LambdaTable {
    static TABLE: OnceLock<LambdaTable> = OnceLock::new();
    TABLE.get_or_init(|| crate::arith::sieve_lambda(100_000).expect("small sieve"))
}

/// Right-tail bound for the prime sum truncated at the table limit:
/// 2 ∫_{log N}^∞ e^{v/2} |η(t − v)| dv (Chebyshev slack factor 2).
fn prime_tail(t: f64, limit: u64, eta: &Weight) -> f64 {
    let ln_n = (limit as f64).ln();
    // tolerance scaled to the e^{t/2} magnitude of the integrand near ln N
    let tol = 1e-13 * (1.0 + (t / 2.0).exp());
    let (tail, _) = integrate_to_inf(|v| (v / 2.0).exp() * eta.eta(t - v).abs(), ln_n, tol);
    2.0 * tail.abs()
}

/// ψ_η(x; q, a) over the progression n ≡ a mod q.
pub fn psi_eta_ap(x: f64, q: u64, a: u64, eta: &Weight, table: &LambdaTable) -> Result<PsiValue> {
    if q == 0 || gcd(a % q.max(1), q.max(1)) != 1 && q > 1 {
        return Err(Error::Validation(format!("need gcd(a, q) = 1, got a={a} q={q}")));
    }
    if !(x >= 1.0) {
        return Err(Error::Validation(format!("x must be >= 1, got {x}")));
    }
    if (table.limit as f64) < x {
        return Err(Error::Validation(format!(
            "lambda table covers n <= {}, need at least x = {x}",
            table.limit
        )));
    }
    let t = x.ln();
    let mut acc = Neumaier::new();
    for &(n, l) in table.entries() {
        if q > 1 && n % q != a % q {
            continue;
        }
        acc.add(l / (n as f64).sqrt() * eta.eta((n as f64).ln() - t));
    }
    Ok(PsiValue {
        value: Complex64::new(acc.total(), 0.0),
        bound: prime_tail(t, table.limit, eta),
        side: Side::Prime,
    })
}

/// ψ_η(x, χ) = Σ_n Λ(n) χ(n) n^{−1/2} η(log(n/x)).
pub fn psi_eta_char(
    x: f64,
    group: &CharacterGroup,
    conrey: u64,
    eta: &Weight,
    table: &LambdaTable,
) -> Result<PsiValue> {
    let chi = group
        .get(conrey)
        .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {}", group.modulus)))?;
    if !(x >= 1.0) {
        return Err(Error::Validation(format!("x must be >= 1, got {x}")));
    }
    if (table.limit as f64) < x {
        return Err(Error::Validation(format!(
            "lambda table covers n <= {}, need at least x = {x}",
            table.limit
        )));
    }
    let t = x.ln();
    let mut acc = CNeumaier::new();
    for &(n, l) in table.entries() {
        let c = chi.value(n);
        if c.norm_sqr() == 0.0 {
            continue;
        }
        acc.add(c * (l / (n as f64).sqrt() * eta.eta((n as f64).ln() - t)));
    }
    Ok(PsiValue {
        value: acc.total(),
        bound: prime_tail(t, table.limit, eta),
        side: Side::Prime,
    })
}

/// ∫_0^∞ e^{−(1/2+a)u}/(1−e^{−2u}) (2η(t) − η(t+u) − η(t−u)) du, with the
/// removable singularity at 0 patched and the kink of η at u = t isolated.
fn archimedean_integral(t: f64, a: f64, eta: &Weight) -> f64 {
    let front = |u: f64| (-(0.5 + a) * u).exp() / (-(-2.0 * u).exp_m1());
    let diff = |u: f64| 2.0 * eta.eta(t) - eta.eta(t + u) - eta.eta(t - u);
    let eps = 1e-3;
    let c2 = diff(eps) / (eps * eps);
    const X0: f64 = 0.125;
    let (head, _) = integrate(
        |u| front(u) * if u < 1e-4 { c2 * u * u } else { diff(u) },
        0.0,
        X0.min(t.max(1e-3)),
        1e-11,
    );
    let mut total = head;
    let split = X0.min(t.max(1e-3));
    if t > split {
        let (mid, _) = integrate(|u| front(u) * diff(u), split, t, 1e-11);
        total += mid;
    }
    let (tail, _) = integrate_to_inf(|u| front(u) * diff(u), t.max(split), 1e-11);
    total + tail
}

/// ψ_η(x, χ) − ψ_η(x, χ*): the ramified-prime correction, computed directly
/// as −Σ_{p | q} Σ_k χ*(p^k) p^{−k/2} log p · η(t − k log p).
/// Also returns the fitted envelope constant |diff| e^{t/2} / log q.
pub fn ramified_diff(
    x: f64,
    group: &CharacterGroup,
    conrey: u64,
    eta: &Weight,
) -> Result<(Complex64, f64)> {
    let chi = group
        .get(conrey)
        .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {}", group.modulus)))?;
    if chi.is_principal() {
        return Err(Error::Validation("ramified diff needs a non-principal character".into()));
    }
    let t = x.ln();
    let q = group.modulus;
    let mut acc = CNeumaier::new();
    for (p, _) in crate::arith::factorize(q) {
        if chi.conductor % p == 0 {
            continue; // χ*(p^k) = 0
        }
        let lp = (p as f64).ln();
        let kmax = ((t + 60.0) / lp).ceil() as u32;
        let mut pk: u64 = 1;
        for k in 1..=kmax {
            pk = match pk.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
            let w = lp / (pk as f64).sqrt() * eta.eta(t - k as f64 * lp);
            acc.add(chi.primitive_value(pk) * w);
        }
    }
    let diff = -acc.total();
    let fitted = diff.norm() * (t / 2.0).exp() / (q as f64).ln();
    Ok((diff, fitted))
}

/// Computed budget for everything the truncated zero sum omits relative to
/// ψ_η(x, χ): archimedean terms, the η(t + log n) prime sum, the ramified
/// correction, and the zero tail beyond T.
fn correction_budget(
    x: f64,
    group: &CharacterGroup,
    conrey: u64,
    eta: &Weight,
    t_height: f64,
) -> Result<f64> {
    let chi = group.get(conrey).expect("validated by caller");
    let t = x.ln();
    let qstar = chi.conductor as f64;
    let a = chi.parity as f64;
    let gamma_term =
        ((qstar / PI).ln() + digamma(0.25 + a / 2.0)).abs() * eta.eta(t).abs();
    let arch = archimedean_integral(t, a, eta).abs();

    let table = small_lambda();
    let mut conj_sum = Neumaier::new();
    for &(n, l) in table.entries() {
        if chi.conductor > 1 && gcd(n, chi.conductor) != 1 {
            continue;
        }
        conj_sum.add(l / (n as f64).sqrt() * eta.eta(t + (n as f64).ln()).abs());
    }
    let (conj_tail, _) = integrate_to_inf(
        |v| (v / 2.0).exp() * eta.eta(t + v).abs(),
        (table.limit as f64).ln(),
        1e-13,
    );
    let conj = conj_sum.total() + 2.0 * conj_tail.abs();

    let (ram, _) = ramified_diff(x, group, conrey, eta)?;

    let (ztail, _) = integrate_to_inf(
        |u| eta.eta_hat(u / (2.0 * PI)).unwrap_or(0.0).abs() * (qstar * u / (2.0 * PI)).ln() / PI,
        t_height,
        1e-13,
    );
    Ok(gamma_term + arch + conj + ram.norm() + 2.0 * ztail.abs())
}

/// Zero-side expansion −Σ_{|γ|≤T} e^{iγ log x} η̂(γ/2π); the bound covers the
/// zero tail and the computed correction budget of the identity.
pub fn psi_eta_zero_side(
    x: f64,
    group: &CharacterGroup,
    conrey: u64,
    eta: &Weight,
    store: &ZeroStore,
    t_height: f64,
) -> Result<PsiValue> {
    let chi = group
        .get(conrey)
        .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {}", group.modulus)))?;
    if chi.is_principal() {
        return Err(Error::Validation("zero side needs a non-principal character".into()));
    }
    if !(x >= 1.0) {
        return Err(Error::Validation(format!("x must be >= 1, got {x}")));
    }
    let t = x.ln();
    let zeros = store.signed_zeros(group.modulus, conrey, t_height)?;
    let mut acc = CNeumaier::new();
    for &g in &zeros {
        let w = eta.eta_hat(g / (2.0 * PI))?;
        acc.add(Complex64::from_polar(w, g * t));
    }
    Ok(PsiValue {
        value: -acc.total(),
        bound: correction_budget(x, group, conrey, eta, t_height)?,
        side: Side::Zero,
    })
}

/// Residual of the full identity
/// Σ_ρ e^{iγt} η̂(γ/2π) = (log(q*/π) + ψ₀(1/4 + a/2)) η(t)
///   − Σ_n Λ(n) n^{−1/2} (χ*(n) η(t−log n) + conj(χ*)(n) η(t+log n))
///   + ∫_0^∞ e^{−(1/2+a)u}/(1−e^{−2u}) (2η(t) − η(t+u) − η(t−u)) du,
/// all terms computed; the residual reflects the zero and prime truncations.
pub fn weil_residual(
    x: f64,
    group: &CharacterGroup,
    conrey: u64,
    eta: &Weight,
    store: &ZeroStore,
    t_height: f64,
    table: &LambdaTable,
) -> Result<f64> {
    let chi = group
        .get(conrey)
        .ok_or_else(|| Error::Validation(format!("label {conrey} invalid mod {}", group.modulus)))?;
    if chi.is_principal() {
        return Err(Error::Validation("weil residual needs a non-principal character".into()));
    }
    let t = x.ln();
    let qstar = chi.conductor as f64;
    let a = chi.parity as f64;

    let zeros = store.signed_zeros(group.modulus, conrey, t_height)?;
    let mut lhs = CNeumaier::new();
    for &g in &zeros {
        lhs.add(Complex64::from_polar(eta.eta_hat(g / (2.0 * PI))?, g * t));
    }

    let gamma_term = ((qstar / PI).ln() + digamma(0.25 + a / 2.0)) * eta.eta(t);
    let mut prime = CNeumaier::new();
    for &(n, l) in table.entries() {
        let c = chi.primitive_value(n);
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let x1 = (n as f64).ln();
        let w = l / (n as f64).sqrt();
        prime.add(c * (w * eta.eta(t - x1)));
        prime.add(c.conj() * (w * eta.eta(t + x1)));
    }
    let arch = archimedean_integral(t, a, eta);
    let rhs = Complex64::new(gamma_term + arch, 0.0) - prime.total();
    Ok((lhs.total() - rhs).norm())
}
