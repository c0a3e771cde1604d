//! Test functions η, their spectral weights h = η̂², and smoothing kernels Φ.
//!
//! The admissible class 𝒮_δ consists of even real η with η and η′ bounded by
//! C e^{−(1/2+δ)|t|} and with η̂ ≥ 0 decaying at least like
//! (|ξ|+1)^{−1} log^{−2−δ}(|ξ|+2). Two members are provided in closed form:
//!
//! * `expK:<K>`: η(t) = e^{−K|t|}, η̂(ξ) = 2K/(K² + 4π²ξ²), requiring
//!   K ≥ 1/2 + δ;
//! * `selfconv:gauss`: η = g⋆g with g(t) = e^{−t²/2}, so η(t) = √π e^{−t²/4}
//!   and η̂(ξ) = 2π e^{−4π²ξ²} ≥ 0 automatically.
//!
//! The classical weight η₀(t) = e^{t/2} 1_{t≤0} is also constructible but it
//! is not even and sits outside 𝒮_δ; it is accepted only by the empirical
//! prime-sum paths and carries a flag saying so.

use crate::numerics::{integrate, integrate_to_inf};
use crate::{Error, Result};

/// Euler–Mascheroni constant.
pub const GAMMA0: f64 = 0.577_215_664_901_532_9;

pub const DEFAULT_DELTA: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    ExpK(f64),
    SelfConvGauss,
    Classical,
}

#[derive(Debug, Clone, Copy)]
pub struct Weight {
    pub kind: WeightKind,
    pub delta: f64,
    /// certified member of 𝒮_δ (even, real, η̂ ≥ 0, admissible decay)
    pub in_s_delta: bool,
    /// stored envelope constant: |η(t)| ≤ C e^{−(1/2+δ)|t|}
    pub envelope_c: f64,
}

impl Weight {
    /// Parse `expK:<K>` | `selfconv:gauss` | `classical` with the default δ.
    pub fn parse(spec: &str) -> Result<Weight> {
        Weight::parse_with_delta(spec, DEFAULT_DELTA)
    }

    pub fn parse_with_delta(spec: &str, delta: f64) -> Result<Weight> {
        if !(delta > 0.0) {
            return Err(Error::Validation(format!("delta must be positive, got {delta}")));
        }
        if let Some(kstr) = spec.strip_prefix("expK:") {
            let k: f64 = kstr
                .parse()
                .map_err(|_| Error::Validation(format!("bad expK parameter {kstr:?}")))?;
            if !(k >= 0.5 + delta) {
                return Err(Error::Validation(format!(
                    "expK:{k} is not in S_delta for delta={delta}: requires K >= {}",
                    0.5 + delta
                )));
            }
            return Ok(Weight { kind: WeightKind::ExpK(k), delta, in_s_delta: true, envelope_c: 1.0 });
        }
        if let Some(bump) = spec.strip_prefix("selfconv:") {
            if bump != "gauss" {
                return Err(Error::Validation(format!("unknown bump {bump:?}")));
            }
            // sup_t sqrt(pi) e^{-t^2/4 + (1/2+delta)t}
            let c = std::f64::consts::PI.sqrt() * ((0.5 + delta) * (0.5 + delta)).exp();
            return Ok(Weight {
                kind: WeightKind::SelfConvGauss,
                delta,
                in_s_delta: true,
                envelope_c: c,
            });
        }
        if spec == "classical" {
            return Ok(Weight {
                kind: WeightKind::Classical,
                delta,
                in_s_delta: false,
                envelope_c: 1.0,
            });
        }
        Err(Error::Validation(format!("unknown weight spec {spec:?}")))
    }

    pub fn eta(&self, t: f64) -> f64 {
        match self.kind {
            WeightKind::ExpK(k) => (-k * t.abs()).exp(),
            WeightKind::SelfConvGauss => std::f64::consts::PI.sqrt() * (-t * t / 4.0).exp(),
            WeightKind::Classical => {
                if t <= 0.0 {
                    (t / 2.0).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// η̂(ξ), real since η is even. Errors for the classical weight.
    pub fn eta_hat(&self, xi: f64) -> Result<f64> {
        match self.kind {
            WeightKind::ExpK(k) => {
                let w = 2.0 * std::f64::consts::PI * xi;
                Ok(2.0 * k / (k * k + w * w))
            }
            WeightKind::SelfConvGauss => {
                let w = 2.0 * std::f64::consts::PI * xi;
                Ok(2.0 * std::f64::consts::PI * (-w * w).exp())
            }
            WeightKind::Classical => Err(Error::Validation(
                "classical weight has no real even transform".into(),
            )),
        }
    }

    /// The spectral weight h = η̂².
    pub fn spectral(&self) -> Result<SpectralWeight> {
        match self.kind {
            WeightKind::ExpK(k) => Ok(SpectralWeight { kind: SpectralKind::ExpK(k) }),
            WeightKind::SelfConvGauss => Ok(SpectralWeight { kind: SpectralKind::SelfConvGauss }),
            WeightKind::Classical => Err(Error::Validation(
                "classical weight has no spectral weight in T_delta".into(),
            )),
        }
    }

    pub fn spec_string(&self) -> String {
        match self.kind {
            WeightKind::ExpK(k) => format!("expK:{k}"),
            WeightKind::SelfConvGauss => "selfconv:gauss".into(),
            WeightKind::Classical => "classical".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SpectralKind {
    ExpK(f64),
    SelfConvGauss,
}

/// h ∈ 𝒯_δ with evaluators for h and its transform ĥ.
#[derive(Debug, Clone, Copy)]
pub struct SpectralWeight {
    kind: SpectralKind,
}

impl SpectralWeight {
    pub fn h(&self, xi: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * xi;
        match self.kind {
            SpectralKind::ExpK(k) => {
                let v = 2.0 * k / (k * k + w * w);
                v * v
            }
            SpectralKind::SelfConvGauss => {
                let v = 2.0 * std::f64::consts::PI * (-w * w).exp();
                v * v
            }
        }
    }

    /// ĥ(x): e^{−K|x|}(|x| + 1/K) for expK, √2 π^{3/2} e^{−x²/8} for the
    /// Gaussian self-convolution.
    pub fn h_hat(&self, x: f64) -> f64 {
        match self.kind {
            SpectralKind::ExpK(k) => (-k * x.abs()).exp() * (x.abs() + 1.0 / k),
            SpectralKind::SelfConvGauss => {
                std::f64::consts::SQRT_2
                    * std::f64::consts::PI.powf(1.5)
                    * (-x * x / 8.0).exp()
            }
        }
    }

    /// α(h) = ĥ(0).
    pub fn alpha(&self) -> f64 {
        self.h_hat(0.0)
    }

    /// exponential decay rate of ĥ: ĥ(x) ≪ e^{−rate·|x|}
    pub fn h_hat_decay(&self) -> f64 {
        match self.kind {
            SpectralKind::ExpK(k) => k,
            // Gaussian: any rate works at scale; report the rate at |x| = 8
            SpectralKind::SelfConvGauss => 2.0,
        }
    }
}

/// β_q(h) = −ĥ(0)(log 8π + γ₀ + Σ_{p|q} log p/(p−1))
///          + (1/2) ∫₀^∞ e^{−x/2}/(1−e^{−x}) (2ĥ(0) − ĥ(x) − ĥ(−x)) dx.
pub fn beta_q(h: &SpectralWeight, q: u64) -> Result<f64> {
    if q < 3 {
        return Err(Error::Validation(format!("beta_q requires q >= 3, got {q}")));
    }
    let prime_part: f64 = crate::arith::factorize(q)
        .iter()
        .map(|&(p, _)| (p as f64).ln() / (p as f64 - 1.0))
        .sum();
    let a = h.alpha();
    let first = -a * ((8.0 * std::f64::consts::PI).ln() + GAMMA0 + prime_part);
    Ok(first + 0.5 * singular_integral(h, 1e-10)?)
}

/// ∫₀^∞ e^{−x/2}/(1−e^{−x}) (2ĥ(0) − ĥ(x) − ĥ(−x)) dx with the removable
/// singularity at 0 patched on [0, x₀].
fn singular_integral(h: &SpectralWeight, tol: f64) -> Result<f64> {
    const X0: f64 = 0.125;
    let a = h.alpha();
    // e^{-x/2}/(1-e^{-x}) = 1/(2 sinh(x/2)) ~ 1/x near 0
    let front = |x: f64| 1.0 / (2.0 * (x / 2.0).sinh());
    let diff = |x: f64| 2.0 * a - h.h_hat(x) - h.h_hat(-x);
    // numeric second-difference coefficient for the Taylor patch
    let eps = 1e-3;
    let c2 = diff(eps) / (eps * eps);
    let patched = |x: f64| {
        let d = if x < 1e-4 { c2 * x * x } else { diff(x) };
        front(x) * d
    };
    let (head, e1) = integrate(patched, 0.0, X0, tol / 2.0);
    let (tail, e2) = integrate_to_inf(|x| front(x) * diff(x), X0, tol / 2.0);
    let achieved = e1 + e2;
    if achieved > 1e-6 {
        return Err(Error::Validation(format!(
            "beta integral did not converge: error bound {achieved:.3e}"
        )));
    }
    Ok(head + tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Triangle,
    Indicator,
}

/// Averaging kernel Φ ∈ 𝒰 with nonnegative transform.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub kind: KernelKind,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl Kernel {
    pub fn parse(spec: &str) -> Result<Kernel> {
        match spec {
            "triangle" => Ok(Kernel { kind: KernelKind::Triangle }),
            "indicator" => Ok(Kernel { kind: KernelKind::Indicator }),
            other => Err(Error::Validation(format!("unknown kernel spec {other:?}"))),
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        match self.kind {
            KernelKind::Triangle => (1.0 - t.abs()).max(0.0),
            KernelKind::Indicator => {
                if t.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn phi_hat(&self, xi: f64) -> f64 {
        let w = std::f64::consts::PI * xi;
        match self.kind {
            KernelKind::Triangle => {
                let s = sinc(w);
                s * s
            }
            KernelKind::Indicator => 2.0 * sinc(2.0 * w),
        }
    }

    /// ∫₀^∞ Φ(t) dt
    pub fn half_mass(&self) -> f64 {
        match self.kind {
            KernelKind::Triangle => 0.5,
            KernelKind::Indicator => 1.0,
        }
    }

    pub fn spec_string(&self) -> &'static str {
        match self.kind {
            KernelKind::Triangle => "triangle",
            KernelKind::Indicator => "indicator",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parse_and_membership() {
        let w = Weight::parse("expK:1").unwrap();
        assert!(w.in_s_delta);
        assert_eq!(w.eta_hat(0.0).unwrap(), 2.0);
        assert!(Weight::parse("expK:0.4").is_err()); // K < 1/2 + 1/4
        let c = Weight::parse("classical").unwrap();
        assert!(!c.in_s_delta);
        assert!(c.eta_hat(0.0).is_err());
        assert!(Weight::parse("selfconv:gauss").unwrap().in_s_delta);
        assert!(Weight::parse("selfconv:box").is_err());
        assert!(Weight::parse("nope").is_err());
    }

    #[test]
    fn alpha_closed_forms() {
        assert_eq!(Weight::parse("expK:1").unwrap().spectral().unwrap().alpha(), 1.0);
        assert_eq!(Weight::parse("expK:2").unwrap().spectral().unwrap().alpha(), 0.5);
        let g = Weight::parse("selfconv:gauss").unwrap().spectral().unwrap();
        assert!((g.alpha() - 2.0f64.sqrt() * PI.powf(1.5)).abs() < 1e-14);
    }

    #[test]
    fn h_hat_matches_quadrature() {
        // ĥ(x) = ∫ h(ξ) e(ξx) dξ = 2 ∫_0^∞ h(ξ) cos(2πξx) dξ
        let h = Weight::parse("expK:1").unwrap().spectral().unwrap();
        for x in [0.0, 0.5, 1.0, 3.0, 20.0] {
            let (v, _) = integrate(|xi| h.h(xi) * (2.0 * PI * xi * x).cos(), 0.0, 200.0, 1e-11);
            assert!(
                (2.0 * v - h.h_hat(x)).abs() < 1e-8,
                "x={x}: quad {} vs closed {}",
                2.0 * v,
                h.h_hat(x)
            );
        }
    }

    #[test]
    fn eta_hat_nonnegative_on_grid() {
        for spec in ["expK:1", "expK:2.5", "selfconv:gauss"] {
            let w = Weight::parse(spec).unwrap();
            for i in 0..10_000 {
                let xi = -50.0 + i as f64 * 0.01;
                assert!(w.eta_hat(xi).unwrap() >= 0.0, "{spec} at {xi}");
            }
        }
    }

    #[test]
    fn beta_reference_values() {
        let h = Weight::parse("expK:1").unwrap().spectral().unwrap();
        let b3 = beta_q(&h, 3).unwrap();
        let b12 = beta_q(&h, 12).unwrap();
        assert!((b3 - -3.285_495_437_309_503).abs() < 1e-8, "beta_3 = {b3}");
        assert!((b12 - -3.978_642_617_869_448).abs() < 1e-8, "beta_12 = {b12}");
        // same radical, same beta
        let b9 = beta_q(&h, 9).unwrap();
        assert!((b9 - b3).abs() < 1e-12);
        assert!(beta_q(&h, 2).is_err());
    }

    #[test]
    fn beta_first_term_monotone_in_divisors() {
        // adding a prime divisor lowers the first term when ĥ(0) > 0
        let h = Weight::parse("expK:1").unwrap().spectral().unwrap();
        let a = h.alpha();
        let term = |q: u64| {
            let pp: f64 = crate::arith::factorize(q)
                .iter()
                .map(|&(p, _)| (p as f64).ln() / (p as f64 - 1.0))
                .sum();
            -a * ((8.0 * PI).ln() + GAMMA0 + pp)
        };
        assert!(term(6) < term(3));
        assert!(term(30) < term(6));
    }

    #[test]
    fn kernels() {
        let t = Kernel::parse("triangle").unwrap();
        assert!((t.phi_hat(0.0) - 1.0).abs() < 1e-14);
        assert!(t.phi_hat(1.0).abs() < 1e-14);
        let i = Kernel::parse("indicator").unwrap();
        assert!((i.phi_hat(0.25) - 4.0 / PI).abs() < 1e-14);
        assert!((i.phi_hat(0.0) - 2.0).abs() < 1e-14);
        assert!(Kernel::parse("box").is_err());
        // transforms nonnegative on a grid for the triangle kernel
        for j in 0..10_000 {
            let xi = -20.0 + j as f64 * 0.004;
            assert!(t.phi_hat(xi) >= -1e-15);
        }
    }

    #[test]
    fn classical_weight_shape() {
        let c = Weight::parse("classical").unwrap();
        assert_eq!(c.eta(-2.0f64.ln()), 0.5f64.sqrt());
        assert_eq!(c.eta(0.1), 0.0);
        assert_eq!(c.eta(0.0), 1.0);
    }
}
