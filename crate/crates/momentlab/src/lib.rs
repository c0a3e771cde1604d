//! Weighted prime-counting moments in arithmetic progressions.
//!
//! The library evaluates, on both sides of the explicit formula, the moments
//!
//! ```text
//! M_n(x, q; η) = (1/φ(q)) Σ_{(a,q)=1} ( ψ_η(x; q, a) − ψ_η(x, χ₀)/φ(q) )^n
//! ```
//!
//! of the weighted prime-counting deviation ψ_η(x; q, a) = Σ_{n ≡ a (q)} Λ(n) n^{−1/2} η(log(n/x)),
//! together with their moments over logarithmic time,
//!
//! ```text
//! V_{s,n}(T, q; η, Φ) = (1/(T∫Φ)) ∫ Φ(t/T) (M_n(e^t) − m_n)^s dt,
//! ```
//!
//! which it cross-checks against the equivalent spectral sums over nontrivial
//! zeros of Dirichlet L-functions. Supporting machinery: the character group
//! mod q with Conrey labels ([`arith`]), admissible weights η and kernels Φ
//! ([`weights`]), a small-conductor zero engine with Riemann–von Mangoldt
//! completeness certificates ([`zeros`]), prime-side and zero-side ψ sums
//! ([`explicit`]), the Δ_s selection kernels and V_{s,n} evaluators
//! ([`moments`]), the involution combinatorics behind the main-term constants
//! ([`combin`]), and a Monte Carlo sampler of the limiting distribution
//! ([`model`]).
//!
//! ```
//! use momentlab::arith::CharacterGroup;
//!
//! let g = CharacterGroup::new(12);
//! let mut conductors: Vec<u64> = g.characters().iter().map(|c| c.conductor).collect();
//! conductors.sort();
//! assert_eq!(conductors, vec![1, 3, 4, 12]);
//! ```

pub mod arith;
pub mod combin;
pub mod explicit;
pub mod manifest;
pub mod model;
pub mod moments;
pub mod numerics;
pub mod weights;
pub mod zeros;

/// Errors shared across modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("budget or tolerance exceeded: {0}")]
    Budget(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
