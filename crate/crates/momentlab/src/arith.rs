//! Integer and Dirichlet-character arithmetic.
//!
//! Characters mod q are built through the CRT factorization of (ℤ/qℤ)* with
//! discrete-log tables on each prime-power factor, and labeled by their
//! Conrey index: the pairing χ_q(n, m) is symmetric and completely
//! multiplicative in both arguments, χ_q(1, ·) is principal, and the label is
//! compatible with public zero databases. For even moduli 2^k (k ≥ 3) the
//! two-generator convention is (−1, 5): every odd residue is (−1)^ε 5^α and
//!
//! ```text
//! χ_{2^k}(n, m) = e( ε_n ε_m / 2 + α_n α_m / 2^{k−2} ).
//! ```
//!
//! Character values are stored as exact root-of-unity exponents over the
//! common denominator φ(q) and materialized to complex on demand, so products
//! and conjugates are exact integer arithmetic.

use crate::numerics::CNeumaier;
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::TAU;

/// Largest table the sieve will allocate (entries are one byte each).
const SIEVE_BUDGET: u64 = 2_000_000_000;

// ---------------------------------------------------------------------------
// elementary number theory helpers
// ---------------------------------------------------------------------------

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = ((result as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        exp >>= 1;
    }
    result
}

/// Modular inverse for gcd(a, m) = 1.
pub fn inv_mod(a: u64, m: u64) -> u64 {
    // extended Euclid on signed values
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    debug_assert_eq!(old_r, 1, "inv_mod of non-unit");
    old_s.rem_euclid(m as i128) as u64
}

/// Trial-division factorization, smallest primes first.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

/// Divisors of n in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pe = 1;
        for _ in 0..e {
            pe *= p;
            out.extend(prev.iter().map(|d| d * pe));
        }
    }
    out.sort_unstable();
    out
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return vec![];
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            let mut k = p * p;
            while k <= n {
                sieve[k] = false;
                k += p;
            }
        }
        p += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

// ---------------------------------------------------------------------------
// von Mangoldt tables
// ---------------------------------------------------------------------------

/// Sparse table of Λ(n) for n ≤ limit: only prime powers are stored.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    pub limit: u64,
    /// (n, Λ(n)) sorted by n; Λ(p^k) = log p.
    entries: Vec<(u64, f64)>,
}

impl LambdaTable {
    pub fn lambda(&self, n: u64) -> f64 {
        match self.entries.binary_search_by_key(&n, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    /// Entries with lo ≤ n ≤ hi.
    pub fn range(&self, lo: u64, hi: u64) -> &[(u64, f64)] {
        let a = self.entries.partition_point(|e| e.0 < lo);
        let b = self.entries.partition_point(|e| e.0 <= hi);
        &self.entries[a..b]
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }
}

/// Sieve Λ(n) up to `n`.
pub fn sieve_lambda(n: u64) -> Result<LambdaTable> {
    if n < 2 {
        return Err(Error::Validation(format!("sieve limit {n} < 2")));
    }
    if n > SIEVE_BUDGET {
        return Err(Error::Budget(format!(
            "sieve limit {n} exceeds budget {SIEVE_BUDGET}"
        )));
    }
    let primes = primes_up_to(n);
    let mut entries: Vec<(u64, f64)> = Vec::with_capacity(primes.len() + 1024);
    for &p in &primes {
        let lp = (p as f64).ln();
        let mut pk = p;
        loop {
            entries.push((pk, lp));
            match pk.checked_mul(p) {
                Some(next) if next <= n => pk = next,
                _ => break,
            }
        }
    }
    entries.sort_unstable_by_key(|e| e.0);
    Ok(LambdaTable { limit: n, entries })
}

/// Stream (n, Λ(n)) over all prime powers n ≤ limit without building a table,
/// using a segmented sieve. Entries arrive in increasing order of the prime,
/// not of n; the closure receives every prime power exactly once.
pub fn for_each_prime_power<F: FnMut(u64, f64)>(limit: u64, mut f: F) {
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = primes_up_to(root);
    for &p in &base {
        let lp = (p as f64).ln();
        let mut pk = p;
        loop {
            f(pk, lp);
            match pk.checked_mul(p) {
                Some(next) if next <= limit => pk = next,
                _ => break,
            }
        }
    }
    // remaining primes in (root, limit], segmented
    const SEG: u64 = 1 << 20;
    let mut lo = root + 1;
    while lo <= limit {
        let hi = (lo + SEG - 1).min(limit);
        let mut seg = vec![true; (hi - lo + 1) as usize];
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut k = lo.div_ceil(p) * p;
            if k < p * p {
                k = p * p;
            }
            while k <= hi {
                seg[(k - lo) as usize] = false;
                k += p;
            }
        }
        for (i, &alive) in seg.iter().enumerate() {
            if alive {
                let n = lo + i as u64;
                f(n, (n as f64).ln());
            }
        }
        lo = hi + 1;
    }
}

// ---------------------------------------------------------------------------
// character group
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum CompKind {
    /// trivial component (2^1)
    Trivial,
    /// modulus 4: group {1, 3}
    Four,
    /// modulus 2^k, k ≥ 3: generated by −1 and 5; dlog[x] = (ε, α)
    TwoPow { dlog: Vec<Option<(u32, u32)>>, half_order: u64 },
    /// odd prime power: cyclic with generator g
    Odd { dlog: Vec<Option<u32>>, order: u64 },
}

#[derive(Debug, Clone)]
struct Component {
    pe: u64,
    kind: CompKind,
}

impl Component {
    fn build(p: u64, e: u32) -> Self {
        let pe = p.pow(e);
        if p == 2 {
            return match e {
                1 => Component { pe, kind: CompKind::Trivial },
                2 => Component { pe, kind: CompKind::Four },
                _ => {
                    let half_order = pe / 4; // 2^{k-2}
                    let mut dlog = vec![None; pe as usize];
                    for eps in 0..2u32 {
                        let sign = if eps == 0 { 1 } else { pe - 1 };
                        let mut x = sign % pe;
                        for alpha in 0..half_order as u32 {
                            dlog[x as usize] = Some((eps, alpha));
                            x = ((x as u128 * 5) % pe as u128) as u64;
                        }
                    }
                    Component { pe, kind: CompKind::TwoPow { dlog, half_order } }
                }
            };
        }
        let order = pe / p * (p - 1);
        let g = primitive_root_prime_power(p, e);
        let mut dlog = vec![None; pe as usize];
        let mut x = 1u64;
        for i in 0..order as u32 {
            dlog[x as usize] = Some(i);
            x = ((x as u128 * g as u128) % pe as u128) as u64;
        }
        Component { pe, kind: CompKind::Odd { dlog, order } }
    }

    /// Conrey pairing exponent as a fraction of a full turn: (num, den).
    /// Returns None if either argument is not a unit.
    fn pair(&self, n: u64, m: u64) -> Option<(u64, u64)> {
        let (n, m) = (n % self.pe, m % self.pe);
        match &self.kind {
            CompKind::Trivial => Some((0, 1)),
            CompKind::Four => {
                if n % 2 == 0 || m % 2 == 0 {
                    return None;
                }
                let bit = u64::from(n % 4 == 3 && m % 4 == 3);
                Some((bit, 2))
            }
            CompKind::TwoPow { dlog, half_order } => {
                let (en, an) = dlog[n as usize]?;
                let (em, am) = dlog[m as usize]?;
                // ε_n ε_m / 2 + α_n α_m / 2^{k-2}
                let den = 2 * half_order;
                let num = (u64::from(en) * u64::from(em) % 2) * half_order
                    + 2 * (u64::from(an) * u64::from(am) % half_order);
                Some((num % den, den))
            }
            CompKind::Odd { dlog, order } => {
                let an = u64::from(dlog[n as usize]?);
                let am = u64::from(dlog[m as usize]?);
                Some((an * am % order, *order))
            }
        }
    }
}

fn primitive_root_prime_power(p: u64, e: u32) -> u64 {
    let pf: Vec<u64> = factorize(p - 1).into_iter().map(|(f, _)| f).collect();
    let mut g = 2;
    loop {
        if pf.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1) {
            break;
        }
        g += 1;
    }
    if e == 1 {
        return g;
    }
    // lift: g must have order p−1 mod p² as well
    if pow_mod(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

/// A Dirichlet character mod q with Conrey label.
#[derive(Debug, Clone)]
pub struct Character {
    pub modulus: u64,
    pub conrey: u64,
    /// exponent numerators over denominator φ(q), indexed by residue; None off units
    exps: Vec<Option<u64>>,
    phi: u64,
    pub conductor: u64,
    pub primitive_conrey: u64,
    /// exponents of the inducing primitive character over φ(conductor)
    prim_exps: Vec<Option<u64>>,
    prim_phi: u64,
    /// a(χ) ∈ {0,1}: 0 iff χ(−1) = 1
    pub parity: u8,
}

fn unit(num: u64, den: u64) -> Complex64 {
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, TAU * num as f64 / den as f64)
}

impl Character {
    pub fn is_principal(&self) -> bool {
        self.conrey == 1 || self.modulus <= 2
    }

    /// Exact exponent of χ(m): value is e(num/φ(q)); None if gcd(m, q) > 1.
    pub fn exponent(&self, m: u64) -> Option<u64> {
        self.exps[(m % self.modulus) as usize]
    }

    pub fn value(&self, m: u64) -> Complex64 {
        match self.exponent(m) {
            Some(k) => unit(k, self.phi),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Value of the inducing primitive character χ*(m); zero off units mod conductor.
    pub fn primitive_value(&self, m: u64) -> Complex64 {
        match self.prim_exps[(m % self.conductor) as usize] {
            Some(k) => unit(k, self.prim_phi),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    /// χ(−1)
    pub fn sign(&self) -> f64 {
        if self.parity == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// The full group of Dirichlet characters mod q.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    pub modulus: u64,
    pub phi: u64,
    comps: Vec<Component>,
    chars: Vec<Character>,
    pos: HashMap<u64, usize>,
}

impl CharacterGroup {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "modulus must be positive");
        let comps: Vec<Component> = factorize(q)
            .into_iter()
            .map(|(p, e)| Component::build(p, e))
            .collect();
        let phi = euler_phi(q);

        let conreys: Vec<u64> = if q == 1 {
            vec![1]
        } else {
            (1..=q).filter(|&n| gcd(n, q) == 1).collect()
        };

        // subgroup cache for primitive-ancestor identification
        let mut subgroups: HashMap<u64, CharacterGroup> = HashMap::new();

        let mut chars = Vec::with_capacity(conreys.len());
        let mut pos = HashMap::new();
        for &n in &conreys {
            let mut exps: Vec<Option<u64>> = vec![None; q.max(1) as usize];
            if q == 1 {
                exps = vec![Some(0)];
            } else {
                for m in 0..q {
                    if gcd(m, q) != 1 {
                        continue;
                    }
                    let mut num = 0u64;
                    let mut ok = true;
                    for comp in &comps {
                        match comp.pair(n, m) {
                            Some((cn, cd)) => num = (num + cn * (phi / cd)) % phi,
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        exps[m as usize] = Some(num);
                    }
                }
            }

            let conductor = conductor_of(q, &exps);
            let prim_phi = euler_phi(conductor);
            let mut prim_exps: Vec<Option<u64>> = vec![None; conductor as usize];
            if conductor == 1 {
                prim_exps = vec![Some(0)];
            } else {
                for m in 0..conductor {
                    if gcd(m, conductor) != 1 {
                        continue;
                    }
                    // lift to a residue coprime to q
                    let mut lift = m;
                    while gcd(lift, q) != 1 {
                        lift += conductor;
                    }
                    let k = exps[lift as usize].expect("lift is a unit");
                    debug_assert_eq!(k * prim_phi % phi, 0, "value order divides φ(conductor)");
                    prim_exps[m as usize] = Some(k * prim_phi / phi);
                }
            }

            let primitive_conrey = if conductor == q {
                n
            } else if conductor == 1 {
                1
            } else {
                let sub = subgroups
                    .entry(conductor)
                    .or_insert_with(|| CharacterGroup::new(conductor));
                sub.chars
                    .iter()
                    .find(|c| {
                        c.exps
                            .iter()
                            .zip(prim_exps.iter())
                            .all(|(a, b)| match (a, b) {
                                (Some(x), Some(y)) => x * prim_phi == y * sub.phi,
                                (None, None) => true,
                                _ => false,
                            })
                    })
                    .map(|c| c.conrey)
                    .expect("primitive ancestor exists")
            };

            let parity = if q <= 2 {
                0
            } else {
                match exps[(q - 1) as usize] {
                    Some(0) => 0,
                    Some(_) => 1,
                    None => unreachable!("−1 is always a unit"),
                }
            };

            pos.insert(n, chars.len());
            chars.push(Character {
                modulus: q.max(1),
                conrey: n,
                exps,
                phi,
                conductor,
                primitive_conrey,
                prim_exps,
                prim_phi,
                parity,
            });
        }

        CharacterGroup { modulus: q, phi, comps, chars, pos }
    }

    pub fn characters(&self) -> &[Character] {
        &self.chars
    }

    pub fn get(&self, conrey: u64) -> Option<&Character> {
        // labels are stored reduced mod q; the trivial modulus keeps label 1
        let key = if self.modulus <= 1 { 1 } else { conrey % self.modulus };
        self.pos.get(&key).map(|&i| &self.chars[i])
    }

    pub fn principal(&self) -> &Character {
        self.get(1).expect("principal character")
    }

    /// Product character χ_{n1}·χ_{n2} = χ_{n1 n2 mod q}.
    pub fn mul<'a>(&'a self, a: &Character, b: &Character) -> &'a Character {
        let n = if self.modulus <= 1 {
            1
        } else {
            (a.conrey as u128 * b.conrey as u128 % self.modulus as u128) as u64
        };
        self.get(n).expect("group closed under multiplication")
    }

    /// Conjugate (inverse) character.
    pub fn conj<'a>(&'a self, a: &Character) -> &'a Character {
        let n = if self.modulus <= 2 { 1 } else { inv_mod(a.conrey, self.modulus) };
        self.get(n).expect("group closed under conjugation")
    }

    pub fn non_principal(&self) -> impl Iterator<Item = &Character> {
        self.chars.iter().filter(|c| !c.is_principal())
    }

    /// Check Σ_m χ(m) conj(χ′(m)) = φ(q)·[χ=χ′] for all pairs.
    /// Returns the first failing pair if any.
    pub fn verify_orthogonality(&self, tol: f64) -> std::result::Result<(), (u64, u64)> {
        for a in &self.chars {
            for b in &self.chars {
                let mut acc = CNeumaier::new();
                for m in 0..self.modulus.max(1) {
                    acc.add(a.value(m) * b.value(m).conj());
                }
                let expect = if a.conrey == b.conrey { self.phi as f64 } else { 0.0 };
                if (acc.total() - expect).norm() > tol {
                    return Err((a.conrey, b.conrey));
                }
            }
        }
        Ok(())
    }

    /// Value of the component character χ^{(c)} mod p^ν at x, where the CRT
    /// decomposition is χ = Π_c χ^{(c)}.
    fn component_value(&self, chi: &Character, p: u64, x: u64) -> Complex64 {
        let comp = self
            .comps
            .iter()
            .find(|c| c.pe % p == 0)
            .expect("p divides the modulus");
        match comp.pair(chi.conrey, x) {
            Some((num, den)) => unit(num, den),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// S_q(m, n) = Σ_{χ1 χ2 = χ} χ1*(m) χ2*(n) by direct summation over the group.
    pub fn sq_brute(&self, chi: &Character, m: u64, n: u64) -> Complex64 {
        let mut acc = CNeumaier::new();
        for c1 in &self.chars {
            let c2 = self.mul(chi, self.conj(c1));
            acc.add(c1.primitive_value(m) * c2.primitive_value(n));
        }
        acc.total()
    }

    /// Closed form of S_q(p1^{e1}, p2^{e2}) by the five-case lemma.
    pub fn sq_closed(
        &self,
        chi: &Character,
        (p1, e1): (u64, u32),
        (p2, e2): (u64, u32),
    ) -> Result<Complex64> {
        if !is_prime(p1) || !is_prime(p2) || e1 == 0 || e2 == 0 {
            return Err(Error::Validation(format!(
                "arguments ({p1}^{e1}, {p2}^{e2}) must be prime powers"
            )));
        }
        let q = self.modulus;
        let nu = |p: u64| -> u32 {
            let mut v = 0;
            let mut m = q;
            while m % p == 0 {
                m /= p;
                v += 1;
            }
            v
        };
        let (nu1, nu2) = (nu(p1), nu(p2));
        let zero = Complex64::new(0.0, 0.0);

        let value = if nu1 == 0 && nu2 == 0 {
            if pow_mod(p1, e1 as u64, q) != pow_mod(p2, e2 as u64, q) {
                zero
            } else {
                chi.value(pow_mod(p2, e2 as u64, q)) * self.phi as f64
            }
        } else if nu1 > 0 && nu2 == 0 {
            let q1 = q / p1.pow(nu1);
            if pow_mod(p1, e1 as u64, q1) != pow_mod(p2, e2 as u64, q1) {
                zero
            } else {
                chi.value(pow_mod(p2, e2 as u64, q)) * euler_phi(q1) as f64
            }
        } else if nu1 == 0 && nu2 > 0 {
            let q2 = q / p2.pow(nu2);
            if pow_mod(p1, e1 as u64, q2) != pow_mod(p2, e2 as u64, q2) {
                zero
            } else {
                chi.value(pow_mod(p1, e1 as u64, q)) * euler_phi(q2) as f64
            }
        } else if p1 == p2 {
            let qd = q / p1.pow(nu1);
            if qd % chi.conductor != 0 {
                // cond(χ) ∤ q/p^ν
                zero
            } else if pow_mod(p1, e1 as u64, qd) != pow_mod(p1, e2 as u64, qd) {
                zero
            } else {
                let arg = (pow_mod(p1, e2 as u64, q) + qd % q) % q;
                chi.value(arg) * euler_phi(qd) as f64
            }
        } else {
            // p1 ≠ p2, both dividing q
            let qe = q / (p1.pow(nu1) * p2.pow(nu2));
            let shift = q / p2.pow(nu2);
            let lhs = pow_mod(p1, e1 as u64, qe);
            let rhs = (pow_mod(p2, e2 as u64, qe) + shift % qe.max(1)) % qe.max(1);
            if qe > 1 && lhs != rhs {
                zero
            } else {
                let arg2 = (pow_mod(p2, e2 as u64, q) + shift % q) % q;
                let c2_at_p1 = self.component_value(chi, p2, pow_mod(p1, e1 as u64, p2.pow(nu2)));
                let c2_at_arg = self.component_value(chi, p2, arg2 % p2.pow(nu2));
                chi.value(arg2) * c2_at_p1 * c2_at_arg.conj() * euler_phi(qe) as f64
            }
        };
        Ok(value)
    }
}

fn conductor_of(q: u64, exps: &[Option<u64>]) -> u64 {
    'outer: for d in divisors(q) {
        // trivial on {x ≡ 1 mod d, gcd(x, q) = 1}?
        let mut x = 1 + d;
        if d == q {
            return q;
        }
        while x < q {
            if gcd(x, q) == 1 && exps[x as usize] != Some(0) {
                continue 'outer;
            }
            x += d;
        }
        return d;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small_values() {
        let t = sieve_lambda(10).unwrap();
        assert_eq!(t.lambda(8), 2.0f64.ln());
        assert_eq!(t.lambda(9), 3.0f64.ln());
        assert_eq!(t.lambda(10), 0.0);
        assert_eq!(t.lambda(2), 2.0f64.ln());
        assert_eq!(t.lambda(7), 7.0f64.ln());
        assert_eq!(t.lambda(1), 0.0);
    }

    #[test]
    fn sieve_pnt_sanity() {
        let t = sieve_lambda(1_000_000).unwrap();
        let sum: f64 = t.entries().iter().map(|e| e.1).sum();
        assert!((sum - 1e6).abs() < 3e3, "ψ(10^6) = {sum}");
    }

    #[test]
    fn segmented_stream_matches_table() {
        let t = sieve_lambda(30_000).unwrap();
        let mut got: Vec<(u64, f64)> = Vec::new();
        for_each_prime_power(30_000, |n, l| got.push((n, l)));
        got.sort_unstable_by_key(|e| e.0);
        assert_eq!(got.len(), t.entries().len());
        for (a, b) in got.iter().zip(t.entries()) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-14);
        }
    }

    #[test]
    fn group_q5() {
        let g = CharacterGroup::new(5);
        assert_eq!(g.characters().len(), 4);
        let p = g.principal();
        for m in 1..5 {
            assert_eq!(p.value(m), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn group_q3_quadratic() {
        let g = CharacterGroup::new(3);
        let chi = g.get(2).unwrap();
        assert!((chi.value(2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(chi.parity, 1);
        assert_eq!(chi.conductor, 3);
    }

    #[test]
    fn conductors_q12() {
        let g = CharacterGroup::new(12);
        let mut conds: Vec<u64> = g.characters().iter().map(|c| c.conductor).collect();
        conds.sort_unstable();
        assert_eq!(conds, vec![1, 3, 4, 12]);
    }

    #[test]
    fn orthogonality_various_moduli() {
        for q in [5, 12, 30] {
            assert!(CharacterGroup::new(q).verify_orthogonality(1e-10).is_ok());
        }
    }

    #[test]
    fn group_closure_pointwise() {
        for q in [8, 9, 15, 16, 21, 24, 40] {
            let g = CharacterGroup::new(q);
            for a in g.characters() {
                for b in g.characters() {
                    let c = g.mul(a, b);
                    for m in 0..q {
                        let prod = a.value(m) * b.value(m);
                        assert!(
                            (prod - c.value(m)).norm() < 1e-12,
                            "q={q} χ{}·χ{} at {m}",
                            a.conrey,
                            b.conrey
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn conrey_pairing_symmetric() {
        for q in [7, 8, 16, 45, 48] {
            let g = CharacterGroup::new(q);
            for a in g.characters() {
                for b in g.characters() {
                    let ab = a.value(b.conrey);
                    let ba = b.value(a.conrey);
                    assert!((ab - ba).norm() < 1e-12, "q={q} ({},{})", a.conrey, b.conrey);
                }
            }
        }
    }

    #[test]
    fn conductor_multiplicative_over_crt() {
        // conductor of a character mod 45 = product of component conductors
        let g45 = CharacterGroup::new(45);
        let g9 = CharacterGroup::new(9);
        let g5 = CharacterGroup::new(5);
        for c in g45.characters() {
            // component labels by CRT reduction
            let c9 = g9.get(c.conrey % 9).unwrap();
            let c5 = g5.get(c.conrey % 5).unwrap();
            assert_eq!(c.conductor, c9.conductor * c5.conductor, "conrey {}", c.conrey);
        }
    }

    #[test]
    fn exactly_one_principal() {
        for q in 1..=60 {
            let g = CharacterGroup::new(q);
            let count = g
                .characters()
                .iter()
                .filter(|c| c.conductor == 1)
                .count();
            assert_eq!(count, 1, "q={q}");
        }
    }

    #[test]
    fn primitive_ancestor_agrees_on_units() {
        for q in [12, 24, 36, 40] {
            let g = CharacterGroup::new(q);
            for c in g.characters() {
                let sub = CharacterGroup::new(c.conductor);
                let star = sub.get(c.primitive_conrey).unwrap();
                for m in 0..q {
                    if gcd(m, q) == 1 {
                        assert!(
                            (c.value(m) - star.value(m % c.conductor)).norm() < 1e-12,
                            "q={q} conrey={} m={m}",
                            c.conrey
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sq_examples_from_small_moduli() {
        let g = CharacterGroup::new(5);
        let chi0 = g.principal();
        let v = g.sq_closed(chi0, (2, 1), (7, 1)).unwrap();
        assert!((v - Complex64::new(4.0, 0.0)).norm() < 1e-12); // 2 ≡ 7 mod 5
        let v = g.sq_closed(chi0, (2, 1), (3, 1)).unwrap();
        assert!(v.norm() < 1e-12); // 2 ≢ 3 mod 5
        let b = g.sq_brute(chi0, 4, 4);
        assert!((b - Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sq_closed_matches_brute_small() {
        let pps: Vec<(u64, u32)> = vec![
            (2, 1),
            (2, 2),
            (2, 3),
            (3, 1),
            (3, 2),
            (5, 1),
            (7, 1),
            (11, 1),
            (13, 1),
        ];
        for q in [5, 8, 9, 12, 15, 16, 24, 45] {
            let g = CharacterGroup::new(q);
            for chi in g.characters() {
                for &a in &pps {
                    for &b in &pps {
                        let c = g.sq_closed(chi, a, b).unwrap();
                        let m = a.0.pow(a.1);
                        let n = b.0.pow(b.1);
                        let br = g.sq_brute(chi, m, n);
                        assert!(
                            (c - br).norm() < 1e-9,
                            "q={q} χ={} ({},{})^({},{}): closed={c} brute={br}",
                            chi.conrey,
                            a.0,
                            b.0,
                            a.1,
                            b.1
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sq_rejects_non_prime_power() {
        let g = CharacterGroup::new(5);
        assert!(g.sq_closed(g.principal(), (6, 1), (2, 1)).is_err());
    }
}
