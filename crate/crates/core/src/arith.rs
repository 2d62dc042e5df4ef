//! Exact integer and modular arithmetic: factorization, multiplicative
//! functions, two-dimensional lattice reduction, and coprime pair
//! partitioning. All operations are pure and reentrant.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Euclidean gcd. `gcd(0, 0) = 0` by convention.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd3(a: u64, b: u64, c: u64) -> u64 {
    gcd(gcd(a, b), c)
}

/// Reduce a signed integer into `[0, q)`.
pub fn reduce_mod(a: i64, q: u64) -> u64 {
    let q_i = q as i64;
    let r = a % q_i;
    if r < 0 {
        (r + q_i) as u64
    } else {
        r as u64
    }
}

pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    let mut acc = 1u64;
    a %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, q);
        }
        a = mul_mod(a, a, q);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `q`, in `[1, q)` for `q >= 2`. For the degenerate
/// modulus `q = 1` every residue is everything, and `0` is returned.
pub fn mod_inverse(a: i64, q: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus 0".into()));
    }
    if q == 1 {
        return Ok(0);
    }
    let a0 = reduce_mod(a, q);
    let g = gcd(a0, q);
    if g != 1 {
        return Err(Error::NotInvertible { a: a0, q, gcd: g });
    }
    // extended Euclid on (a0, q)
    let (mut old_r, mut r) = (a0 as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quo = old_r / r;
        (old_r, r) = (r, old_r - quo * r);
        (old_s, s) = (s, old_s - quo * s);
    }
    let q_i = q as i128;
    let inv = ((old_s % q_i) + q_i) % q_i;
    Ok(inv as u64)
}

/// Deterministic Miller-Rabin, valid for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const SMALL_SPF_LIMIT: usize = 1 << 20;

fn small_spf() -> &'static [u32] {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut spf = vec![0u32; SMALL_SPF_LIMIT + 1];
        for i in 2..=SMALL_SPF_LIMIT {
            if spf[i] == 0 {
                for j in (i..=SMALL_SPF_LIMIT).step_by(i) {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                }
            }
        }
        spf
    })
}

fn pollard_brent(n: u64) -> u64 {
    // n odd composite, not a prime power caught earlier. Deterministic:
    // parameters are swept in a fixed order.
    debug_assert!(n > 3 && n % 2 == 1);
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut ys) = (2u64, 2u64);
        let mut y = 2u64;
        let mut d = 1u64;
        let mut q = 1u64;
        let m = 128u64;
        let mut r = 1u64;
        while d == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0u64;
            while k < r && d == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                d = gcd(q, n);
                k += m;
            }
            r <<= 1;
        }
        if d == n {
            // backtrack
            loop {
                ys = f(ys);
                d = gcd(x.abs_diff(ys), n);
                if d > 1 {
                    break;
                }
            }
        }
        if d != n {
            return d;
        }
    }
    unreachable!()
}

/// An integer together with its full prime factorization, primes strictly
/// increasing. `n = 1` has an empty factor list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

/// Canonical factorization of `n >= 1` by trial division over a precomputed
/// smallest-prime-factor table, with Pollard-Brent rho above the table limit.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factorize 0".into()));
    }
    let mut factors = Vec::new();
    let mut m = n;
    let spf = small_spf();
    while m > 1 && (m as usize) < spf.len() {
        let p = spf[m as usize] as u64;
        let mut e = 0u32;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        factors.push((p, e));
    }
    if m > 1 {
        let mut stack = vec![m];
        let mut big: Vec<u64> = Vec::new();
        while let Some(v) = stack.pop() {
            if is_prime(v) {
                big.push(v);
                continue;
            }
            // strip small primes missed when m exceeded the table
            let mut v = v;
            for p in 2..1024u64 {
                while v % p == 0 {
                    big.push(p);
                    v /= p;
                }
            }
            if v == 1 {
                continue;
            }
            if is_prime(v) {
                big.push(v);
                continue;
            }
            // perfect-power check before rho
            let mut split = 0u64;
            for k in [2u32, 3, 5, 7] {
                let r = (v as f64).powf(1.0 / k as f64).round() as u64;
                for cand in r.saturating_sub(1)..=r + 1 {
                    if cand > 1 && (cand.checked_pow(k) == Some(v)) {
                        split = cand;
                    }
                }
            }
            if split == 0 {
                split = pollard_brent(v);
            }
            stack.push(split);
            stack.push(v / split);
        }
        big.sort_unstable();
        let mut i = 0;
        while i < big.len() {
            let p = big[i];
            let mut e = 0u32;
            while i < big.len() && big[i] == p {
                e += 1;
                i += 1;
            }
            factors.push((p, e));
        }
        factors.sort_unstable();
    }
    Ok(Factorization { n, factors })
}

impl Factorization {
    /// Assemble from an already-computed factor list (primes strictly
    /// increasing, product equal to n).
    pub fn from_factors(n: u64, factors: Vec<(u64, u32)>) -> Self {
        debug_assert_eq!(
            factors.iter().fold(1u64, |acc, &(p, e)| acc * p.pow(e)),
            n
        );
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        Self { n, factors }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Distinct prime factors in increasing order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
    }

    pub fn mobius(&self) -> i64 {
        if self.factors.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// k-fold divisor function: number of ordered k-tuples with product n.
    pub fn tau_k(&self, k: u32) -> u64 {
        if k == 0 {
            return u64::from(self.n == 1);
        }
        self.factors.iter().fold(1u64, |acc, &(_, e)| {
            // C(e + k - 1, k - 1)
            let mut binom = 1u64;
            for i in 1..=(k - 1) as u64 {
                binom = binom * (e as u64 + i) / i;
            }
            acc * binom
        })
    }

    pub fn tau(&self) -> u64 {
        self.tau_k(2)
    }

    /// Smallest prime factor; `None` encodes the `P^-(1) = +infinity`
    /// convention, so that "P^-(n) >= z" is true for n = 1.
    pub fn p_minus(&self) -> Option<u64> {
        self.factors.first().map(|&(p, _)| p)
    }

    /// Largest prime factor, with `P^+(1) = 1`.
    pub fn p_plus(&self) -> u64 {
        self.factors.last().map_or(1, |&(p, _)| p)
    }

    /// True iff `P^-(n) > z` (strict), with `P^-(1) = +infinity`.
    pub fn is_rough_gt(&self, z: f64) -> bool {
        self.p_minus().is_none_or(|p| (p as f64) > z)
    }

    /// True iff `P^-(n) >= z`.
    pub fn is_rough_ge(&self, z: f64) -> bool {
        self.p_minus().is_none_or(|p| (p as f64) >= z)
    }

    /// Square-full part: product of p^e over primes with e >= 2.
    pub fn sq_part(&self) -> u64 {
        self.factors
            .iter()
            .filter(|&&(_, e)| e >= 2)
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }

    /// z-smooth part: product of p^e over primes p <= z.
    pub fn smooth_part(&self, z: f64) -> u64 {
        self.factors
            .iter()
            .filter(|&&(p, _)| (p as f64) <= z)
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }

    /// All divisors, sorted increasing.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pe = 1u64;
            for _ in 0..e {
                pe *= p;
                for i in 0..len {
                    divs.push(divs[i] * pe);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Bundle of the standard multiplicative statistics of one integer.
#[derive(Debug, Clone, PartialEq)]
pub struct MultFunctions {
    pub n: u64,
    pub phi: u64,
    pub mobius: i64,
    pub tau_k: u64,
    /// `None` means +infinity (n = 1).
    pub p_minus: Option<u64>,
    pub p_plus: u64,
    pub sq_part: u64,
    pub smooth_part: u64,
}

pub fn mult_functions(f: &Factorization, k: u32, z: f64) -> MultFunctions {
    MultFunctions {
        n: f.n(),
        phi: f.phi(),
        mobius: f.mobius(),
        tau_k: f.tau_k(k),
        p_minus: f.p_minus(),
        p_plus: f.p_plus(),
        sq_part: f.sq_part(),
        smooth_part: f.smooth_part(z),
    }
}

/// A residue class `a (mod q)` with `0 <= a < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueClass {
    a: u64,
    q: u64,
}

impl ResidueClass {
    pub fn new(a: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("modulus 0".into()));
        }
        Ok(Self { a: reduce_mod(a, q), q })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn contains(&self, n: u64) -> bool {
        n % self.q == self.a
    }
}

/// Integer basis of the rank-2 lattice `{(n1, n2) : n1 = c*n2 (mod q)}`,
/// Gauss-reduced: `|v1| <= |v2|`, `v1` a shortest nonzero vector, and
/// `|v1||v2| <= (2/sqrt(3)) q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice2D {
    pub q: u64,
    pub c: u64,
    pub v1: (i64, i64),
    pub v2: (i64, i64),
}

fn norm2(v: (i64, i64)) -> i128 {
    let (x, y) = (v.0 as i128, v.1 as i128);
    x * x + y * y
}

fn dot(a: (i64, i64), b: (i64, i64)) -> i128 {
    a.0 as i128 * b.0 as i128 + a.1 as i128 * b.1 as i128
}

fn canonical_key(v: (i64, i64)) -> (i64, i64, i64, i64) {
    (v.0.abs(), v.1.abs(), v.0, v.1)
}

fn canonical_sign(v: (i64, i64)) -> (i64, i64) {
    if v.0 < 0 || (v.0 == 0 && v.1 < 0) {
        (-v.0, -v.1)
    } else {
        v
    }
}

impl Lattice2D {
    /// True iff `v` lies in the lattice.
    pub fn contains(&self, v: (i64, i64)) -> bool {
        let q = self.q as i128;
        let lhs = v.0 as i128 - self.c as i128 * v.1 as i128;
        lhs.rem_euclid(q) == 0
    }

    pub fn det_abs(&self) -> u64 {
        let d = self.v1.0 as i128 * self.v2.1 as i128 - self.v1.1 as i128 * self.v2.0 as i128;
        d.unsigned_abs() as u64
    }
}

/// Lagrange-Gauss reduction of the congruence lattice
/// `{(n1, n2) : n1 = c*n2 (mod q)}`, starting from the basis
/// `{(q, 0), (c, 1)}`. Ties between equal-norm vectors are broken by
/// lexicographic order on `(|x|, |y|, x, y)` for determinism.
pub fn gauss_reduce(q: u64, c: u64) -> Result<Lattice2D> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus 0".into()));
    }
    if c >= q {
        return Err(Error::Precondition(format!("c = {c} must satisfy 0 <= c < q = {q}")));
    }
    let mut v1: (i64, i64) = (q as i64, 0);
    let mut v2: (i64, i64) = (c as i64, 1);
    if norm2(v1) > norm2(v2) {
        std::mem::swap(&mut v1, &mut v2);
    }
    loop {
        // round(dot / |v1|^2) with exact integer rounding
        let d = dot(v1, v2);
        let n1 = norm2(v1);
        let t = {
            let two_d = 2 * d;
            let num = if two_d >= 0 { two_d + n1 } else { two_d - n1 };
            num / (2 * n1)
        };
        if t != 0 {
            v2 = (v2.0 - t as i64 * v1.0, v2.1 - t as i64 * v1.1);
        }
        if norm2(v2) >= norm2(v1) {
            break;
        }
        std::mem::swap(&mut v1, &mut v2);
    }
    v1 = canonical_sign(v1);
    v2 = canonical_sign(v2);
    if norm2(v1) == norm2(v2) && canonical_key(v2) < canonical_key(v1) {
        std::mem::swap(&mut v1, &mut v2);
    }
    Ok(Lattice2D { q, c, v1, v2 })
}

/// Partition coprime pairs into classes such that within each class every
/// two pairs `(a,b)`, `(a',b')` satisfy `gcd(a,b') = gcd(a',b) = 1`.
/// Greedy first-fit over classes in creation order; the class count J is
/// `partition.len()`.
pub fn partition_coprime(pairs: &[(u64, u64)]) -> Result<Vec<Vec<(u64, u64)>>> {
    for &(a, b) in pairs {
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument(format!("pair ({a},{b}) has a zero entry")));
        }
        let g = gcd(a, b);
        if g != 1 {
            return Err(Error::Precondition(format!(
                "pair ({a},{b}) is not coprime (gcd = {g})"
            )));
        }
    }
    let mut classes: Vec<Vec<(u64, u64)>> = Vec::new();
    'next: for &(a, b) in pairs {
        for class in classes.iter_mut() {
            if class
                .iter()
                .all(|&(a2, b2)| gcd(a, b2) == 1 && gcd(a2, b) == 1)
            {
                class.push((a, b));
                continue 'next;
            }
        }
        classes.push(vec![(a, b)]);
    }
    Ok(classes)
}
