//! Gaussian moments, the constants ν_n, ν′_n, ν″_n, and brute-force
//! enumeration of the involution classes F, G, I on an s × n grid of points.
//!
//! An involution π on the grid is fixed-point-free; J_{μ,ν}(π) is the set of
//! points of row μ mapped into row ν. The classes are cut out by conditions
//! on the |J_{μ,ν}| matrix alone, so the enumeration scans all (sn−1)!!
//! pairings via the canonical recursion (pair the smallest unpaired point
//! with each larger point) and tests the row-interaction profile.

use crate::{Error, Result};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

const MAX_POINTS: u32 = 16;
const MAX_ROWS: usize = 16;

fn factorial(n: u32) -> BigUint {
    (1..=u64::from(n)).fold(BigUint::one(), |acc, k| acc * k)
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// n-th moment of the standard Gaussian: (2m)!/(2^m m!) for n = 2m, else 0.
pub fn mu(n: u32) -> BigUint {
    if n % 2 == 1 {
        return BigUint::zero();
    }
    let m = n / 2;
    factorial(2 * m) / (BigUint::from(2u32).pow(m) * factorial(m))
}

/// ν_n = n!² Σ_{k≥2, m≥0, n=k+2m} 1/(k! 2^{2m} m!²)
pub fn nu(n: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::Validation(format!("nu requires n >= 2, got {n}")));
    }
    let mut total = BigRational::zero();
    for k in 2..=n {
        if (n - k) % 2 != 0 {
            continue;
        }
        let m = (n - k) / 2;
        let den = factorial(k) * BigUint::from(2u32).pow(2 * m) * factorial(m).pow(2);
        total += BigRational::new(1.into(), den.into());
    }
    let nf = factorial(n);
    Ok(total * BigRational::from_integer((nf.clone() * nf).into()))
}

/// ν′_n: sum over (ℓ₁,ℓ₂,ℓ₃; k₁,k₂) with k ≥ 2, n = k₁+2ℓ₁ = k₂+2ℓ₂ = k₁+k₂+2ℓ₃
/// of n!³ / (k₁! k₂! 2^{ℓ₁+ℓ₂+ℓ₃} ℓ₁! ℓ₂! ℓ₃!).
pub fn nu_prime(n: u32) -> Result<BigRational> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Validation(format!("nu_prime requires even n >= 2, got {n}")));
    }
    let n3 = factorial(n).pow(3);
    let mut total = BigRational::zero();
    for k1 in 2..=n {
        if (n - k1) % 2 != 0 {
            continue;
        }
        let l1 = (n - k1) / 2;
        for k2 in 2..=n {
            if (n - k2) % 2 != 0 || k1 + k2 > n {
                continue;
            }
            let l2 = (n - k2) / 2;
            let l3 = (n - k1 - k2) / 2;
            let den = factorial(k1)
                * factorial(k2)
                * BigUint::from(2u32).pow(l1 + l2 + l3)
                * factorial(l1)
                * factorial(l2)
                * factorial(l3);
            total += BigRational::new(n3.clone().into(), den.into());
        }
    }
    Ok(total)
}

/// ν″_n: (1/3) Σ over (ℓ; k) ∈ ℤ≥0³ × ℤ≥1³ with n = k_i + k_j + 2ℓ_k for
/// every permutation {i,j,k} = {1,2,3}, of n!³ / (k₁!k₂!k₃! 2^{Σℓ} ℓ₁!ℓ₂!ℓ₃!).
pub fn nu_dprime(n: u32) -> Result<BigRational> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Validation(format!("nu_dprime requires even n >= 2, got {n}")));
    }
    let n3 = factorial(n).pow(3);
    let ell = |a: u32, b: u32| -> Option<u32> {
        let s = a + b;
        if s <= n && (n - s) % 2 == 0 {
            Some((n - s) / 2)
        } else {
            None
        }
    };
    let mut total = BigRational::zero();
    for k1 in 1..=n {
        for k2 in 1..=n {
            for k3 in 1..=n {
                let (Some(l1), Some(l2), Some(l3)) = (ell(k2, k3), ell(k1, k3), ell(k1, k2))
                else {
                    continue;
                };
                let den = factorial(k1)
                    * factorial(k2)
                    * factorial(k3)
                    * BigUint::from(2u32).pow(l1 + l2 + l3)
                    * factorial(l1)
                    * factorial(l2)
                    * factorial(l3);
                total += BigRational::new(n3.clone().into(), den.into());
            }
        }
    }
    Ok(total / big(3))
}

/// θ_{n,2r+1} = ν_n^{−3/2}(ν′_n + ν″_n) for even n, 0 for odd n.
/// The r argument only selects the odd-moment family; the value is r-free.
pub fn theta(n: u32, _r: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Validation(format!("theta requires n >= 2, got {n}")));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let nv = nu(n)?.to_f64().expect("nu fits in f64 for enumerable n");
    let sum = (nu_prime(n)? + nu_dprime(n)?)
        .to_f64()
        .expect("nu'+nu'' fits in f64 for enumerable n");
    Ok(sum / nv.powf(1.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ClassTag {
    F,
    G,
    I,
}

impl std::str::FromStr for ClassTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" => Ok(ClassTag::F),
            "G" | "g" => Ok(ClassTag::G),
            "I" | "i" => Ok(ClassTag::I),
            other => Err(Error::Validation(format!("unknown class tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvolutionClassCount {
    pub s: u32,
    pub n: u32,
    pub tag: ClassTag,
    pub count: BigUint,
    /// number of fixed-point-free involutions scanned
    pub raw_scanned: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct ClassCounts {
    f: u64,
    g: u64,
    i: u64,
    raw: u64,
}

impl ClassCounts {
    fn merge(self, other: ClassCounts) -> ClassCounts {
        ClassCounts {
            f: self.f + other.f,
            g: self.g + other.g,
            i: self.i + other.i,
            raw: self.raw + other.raw,
        }
    }
}

/// Row-interaction matrix |J_{μ,ν}| for the pairing stored in `partner`.
fn j_matrix(partner: &[u8], s: usize, n: usize) -> [[u8; MAX_ROWS]; MAX_ROWS] {
    let mut j = [[0u8; MAX_ROWS]; MAX_ROWS];
    for p in 0..s * n {
        let q = partner[p] as usize;
        j[p / n][q / n] += 1;
    }
    j
}

fn off_row_mass_ok(j: &[[u8; MAX_ROWS]; MAX_ROWS], s: usize) -> bool {
    (0..s).all(|mu| {
        let total: u32 = (0..s).filter(|&v| v != mu).map(|v| u32::from(j[mu][v])).sum();
        total >= 2
    })
}

fn in_f_even(j: &[[u8; MAX_ROWS]; MAX_ROWS], s: usize) -> bool {
    if !off_row_mass_ok(j, s) {
        return false;
    }
    (0..s).all(|mu| (0..s).filter(|&v| v != mu && j[mu][v] > 0).count() == 1)
}

fn in_f_odd(j: &[[u8; MAX_ROWS]; MAX_ROWS], s: usize) -> bool {
    if !off_row_mass_ok(j, s) {
        return false;
    }
    // some 3-row block N: rows outside N each have a unique partner row, and
    // the number of interacting pairs inside N is 2 or 3
    for a in 0..s {
        for b in a + 1..s {
            for c in b + 1..s {
                let in_n = |mu: usize| mu == a || mu == b || mu == c;
                let outside_ok = (0..s).filter(|&mu| !in_n(mu)).all(|mu| {
                    (0..s).filter(|&v| v != mu && j[mu][v] > 0).count() == 1
                });
                if !outside_ok {
                    continue;
                }
                let edges = u32::from(j[a][b] > 0) + u32::from(j[a][c] > 0) + u32::from(j[b][c] > 0);
                if edges == 2 || edges == 3 {
                    return true;
                }
            }
        }
    }
    false
}

fn in_i(j: &[[u8; MAX_ROWS]; MAX_ROWS], s: usize) -> bool {
    (0..s).all(|mu| j[mu][mu] % 2 == 0) && off_row_mass_ok(j, s)
}

/// Pairs of distinct rows that interact.
fn edge_list(j: &[[u8; MAX_ROWS]; MAX_ROWS], s: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for a in 0..s {
        for b in a + 1..s {
            if j[a][b] > 0 {
                e.push((a, b));
            }
        }
    }
    e
}

fn in_g(j: &[[u8; MAX_ROWS]; MAX_ROWS], s: usize) -> bool {
    if !in_i(j, s) {
        return false;
    }
    let r = s / 2;
    let e1 = edge_list(j, s);
    if s % 2 == 0 {
        e1.len() >= r + 1
    } else if e1.len() >= r + 3 {
        true
    } else if e1.len() == r + 2 {
        // admit only triangle-free edge sets at the threshold
        for (i, &(a, b)) in e1.iter().enumerate() {
            for &(c, d) in &e1[i + 1..] {
                let third = if b == c {
                    (a, d)
                } else if b == d {
                    (a, c)
                } else if a == c {
                    (b.min(d), b.max(d))
                } else {
                    continue;
                };
                if e1.contains(&third) {
                    return false;
                }
            }
        }
        true
    } else {
        false
    }
}

fn classify(partner: &[u8], s: usize, n: usize) -> ClassCounts {
    let j = j_matrix(partner, s, n);
    let odd = s % 2 == 1;
    ClassCounts {
        f: u64::from(if odd { in_f_odd(&j, s) } else { in_f_even(&j, s) }),
        g: u64::from(in_g(&j, s)),
        i: u64::from(in_i(&j, s)),
        raw: 1,
    }
}

fn scan(partner: &mut [u8], used: u32, total: usize, s: usize, n: usize) -> ClassCounts {
    let Some(first) = (0..total).find(|&p| used & (1 << p) == 0) else {
        return classify(partner, s, n);
    };
    let mut acc = ClassCounts::default();
    for q in first + 1..total {
        if used & (1 << q) != 0 {
            continue;
        }
        partner[first] = q as u8;
        partner[q] = first as u8;
        acc = acc.merge(scan(partner, used | (1 << first) | (1 << q), total, s, n));
    }
    acc
}

fn count_classes(s: u32, n: u32) -> Result<ClassCounts> {
    let total = s * n;
    if total > MAX_POINTS {
        return Err(Error::Budget(format!(
            "grid {s}x{n} has {total} points, limit {MAX_POINTS}"
        )));
    }
    if total % 2 != 0 || total == 0 {
        return Err(Error::Validation(format!(
            "grid {s}x{n} admits no fixed-point-free involution"
        )));
    }
    let (s, n, total) = (s as usize, n as usize, total as usize);
    // parallel over the partner of point 0
    let acc = (1..total)
        .into_par_iter()
        .map(|q| {
            let mut partner = vec![0u8; total];
            partner[0] = q as u8;
            partner[q] = 0;
            scan(&mut partner, 1 | (1 << q), total, s, n)
        })
        .reduce(ClassCounts::default, ClassCounts::merge);
    Ok(acc)
}

pub fn enumerate_class(s: u32, n: u32, tag: ClassTag) -> Result<InvolutionClassCount> {
    let c = count_classes(s, n)?;
    let count = match tag {
        ClassTag::F => c.f,
        ClassTag::G => c.g,
        ClassTag::I => c.i,
    };
    Ok(InvolutionClassCount { s, n, tag, count: count.into(), raw_scanned: c.raw })
}

/// Closed-form prediction for |F_{s,n}|: μ_s ν_n^r for s = 2r, and
/// (2r+1)!/(2^r (r−1)!) ν_n^{r−1}(ν′_n+ν″_n) for s = 2r+1 with n even.
/// None when no formula applies (odd s with odd n, or r = 0).
pub fn formula_f(s: u32, n: u32) -> Result<Option<BigRational>> {
    if s % 2 == 0 {
        let r = s / 2;
        if r == 0 {
            return Ok(None);
        }
        let m = BigRational::from_integer(mu(s).into());
        Ok(Some(m * nu(n)?.pow(r as i32)))
    } else {
        let r = s / 2;
        if r == 0 || n % 2 != 0 {
            return Ok(None);
        }
        let coeff = BigRational::new(
            factorial(2 * r + 1).into(),
            (BigUint::from(2u32).pow(r) * factorial(r - 1)).into(),
        );
        Ok(Some(coeff * nu(n)?.pow(r as i32 - 1) * (nu_prime(n)? + nu_dprime(n)?)))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyEntry {
    pub s: u32,
    pub n: u32,
    pub enumerated: BigUint,
    pub formula: BigRational,
    pub matches: bool,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub entries: Vec<VerifyEntry>,
    pub all_match: bool,
}

/// Compare enumeration with the closed formulas over every grid with at most
/// `max_points` points where a formula applies.
pub fn verify_formulas(max_points: u32) -> Result<VerifyReport> {
    if max_points > MAX_POINTS {
        return Err(Error::Budget(format!(
            "max_points {max_points} exceeds enumeration limit {MAX_POINTS}"
        )));
    }
    let mut entries = Vec::new();
    for s in 2..=max_points {
        for n in 2..=max_points {
            if s * n > max_points || (s * n) % 2 != 0 {
                continue;
            }
            let Some(formula) = formula_f(s, n)? else {
                continue;
            };
            let enumerated = enumerate_class(s, n, ClassTag::F)?.count;
            let matches = formula.is_integer()
                && !formula.is_negative()
                && formula.to_integer().magnitude() == &enumerated;
            entries.push(VerifyEntry { s, n, enumerated, formula, matches });
        }
    }
    let all_match = entries.iter().all(|e| e.matches);
    Ok(VerifyReport { entries, all_match })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(mu(0), BigUint::from(1u32));
        assert_eq!(mu(2), BigUint::from(1u32));
        assert_eq!(mu(4), BigUint::from(3u32));
        assert_eq!(mu(6), BigUint::from(15u32));
        assert_eq!(mu(3), BigUint::zero());
    }

    #[test]
    fn nu_values() {
        assert_eq!(nu(2).unwrap(), rat(2, 1));
        assert_eq!(nu(3).unwrap(), rat(6, 1));
        assert_eq!(nu(4).unwrap(), rat(96, 1));
        assert_eq!(nu(5).unwrap(), rat(720, 1));
        assert_eq!(nu(6).unwrap(), rat(10170, 1));
        assert_eq!(nu(7).unwrap(), rat(124110, 1));
        assert_eq!(nu(8).unwrap(), rat(2016000, 1));
        assert!(nu(1).is_err());
    }

    #[test]
    fn nu_prime_dprime_values() {
        assert_eq!(nu_prime(2).unwrap(), rat(0, 1));
        assert_eq!(nu_dprime(2).unwrap(), rat(8, 3));
        assert_eq!(nu_prime(4).unwrap(), rat(864, 1));
        assert_eq!(nu_dprime(4).unwrap(), rat(2304, 1));
        assert_eq!(nu_prime(6).unwrap(), rat(1701000, 1));
        assert_eq!(nu_dprime(6).unwrap(), rat(9631800, 1));
        assert!(nu_prime(3).is_err());
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(3, 1).unwrap(), 0.0);
        let t2 = theta(2, 1).unwrap();
        assert!((t2 - (8.0 / 3.0) / 8.0f64.sqrt()).abs() < 1e-14);
        let t4 = theta(4, 1).unwrap();
        assert!((t4 - 3168.0 / 96.0f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn enumeration_small_grids() {
        let cases: &[(u32, u32, u64, u64, u64, u64)] = &[
            // s, n, F, G, I, raw
            (2, 2, 2, 0, 2, 3),
            (3, 2, 8, 0, 8, 15),
            (4, 2, 12, 48, 60, 105),
            (2, 3, 6, 0, 6, 15),
            (2, 4, 96, 0, 96, 105),
            (5, 2, 160, 384, 544, 945),
            (2, 5, 720, 0, 720, 945),
            (4, 3, 108, 3240, 3348, 10395),
            (6, 2, 120, 5920, 6040, 10395),
            (2, 6, 10170, 0, 10170, 10395),
        ];
        for &(s, n, f, g, i, raw) in cases {
            let cf = enumerate_class(s, n, ClassTag::F).unwrap();
            let cg = enumerate_class(s, n, ClassTag::G).unwrap();
            let ci = enumerate_class(s, n, ClassTag::I).unwrap();
            assert_eq!(cf.count, BigUint::from(f), "F s={s} n={n}");
            assert_eq!(cg.count, BigUint::from(g), "G s={s} n={n}");
            assert_eq!(ci.count, BigUint::from(i), "I s={s} n={n}");
            assert_eq!(cf.raw_scanned, raw, "raw s={s} n={n}");
            assert_eq!(cf.count.clone() + cg.count, ci.count, "I = F + G s={s} n={n}");
        }
    }

    #[test]
    fn enumeration_larger_grids() {
        let c = enumerate_class(3, 4, ClassTag::F).unwrap();
        assert_eq!(c.count, BigUint::from(9504u32));
        let c = enumerate_class(2, 7, ClassTag::F).unwrap();
        assert_eq!(c.count, BigUint::from(124110u32));
        let c = enumerate_class(2, 8, ClassTag::F).unwrap();
        assert_eq!(c.count, BigUint::from(2016000u32));
        let c = enumerate_class(8, 2, ClassTag::F).unwrap();
        assert_eq!(c.count, BigUint::from(1680u32));
        let c = enumerate_class(4, 4, ClassTag::F).unwrap();
        assert_eq!(c.count, BigUint::from(27648u32));
    }

    #[test]
    fn formulas_match_enumeration() {
        let report = verify_formulas(12).unwrap();
        assert!(report.all_match, "{:?}", report.entries.iter().find(|e| !e.matches));
        assert!(!report.entries.is_empty());
        // the r = 1 even case specializes to |F_{2,n}| = ν_n
        for e in &report.entries {
            if e.s == 2 {
                assert_eq!(BigRational::from_integer(e.enumerated.clone().into()), nu(e.n).unwrap());
            }
        }
    }

    #[test]
    fn budget_and_domain_errors() {
        assert!(matches!(enumerate_class(5, 4, ClassTag::F), Err(Error::Budget(_))));
        assert!(matches!(enumerate_class(3, 3, ClassTag::F), Err(Error::Validation(_))));
    }
}
