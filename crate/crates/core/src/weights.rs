//! Sieve weight constructions: the truncated (Brun/Bonferroni) upper-bound
//! sieve lambda_d^+, the rho_B majorant built from it, and finite interval
//! sets for classifying subproducts.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::arith::{factorize, Factorization};
use crate::error::{Error, Result};
use crate::sieve::PrimeTable;

/// Finite union of disjoint closed real intervals, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    /// Normalize: drop empty pieces (lo > hi), sort, merge overlaps.
    pub fn new(mut pieces: Vec<(f64, f64)>) -> Self {
        pieces.retain(|&(lo, hi)| lo <= hi);
        pieces.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match intervals.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => intervals.push((lo, hi)),
            }
        }
        Self { intervals }
    }

    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.intervals
            .binary_search_by(|&(lo, hi)| {
                if v < lo {
                    std::cmp::Ordering::Greater
                } else if v > hi {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn contains_u64(&self, v: u64) -> bool {
        self.contains(v as f64)
    }

    /// `B1 = [x^(2/5)/4, x^(2/5+6d) L^2C] u [x^(1/2-3d)/L^C, 2 x^(1/2)]`
    /// with `L = log x`.
    pub fn b1(x: f64, delta: f64, c: f64) -> Self {
        let l = x.ln();
        Self::new(vec![
            (x.powf(0.4) / 4.0, x.powf(0.4 + 6.0 * delta) * l.powf(2.0 * c)),
            (x.powf(0.5 - 3.0 * delta) / l.powf(c), 2.0 * x.sqrt()),
        ])
    }

    /// `B2 = [x^(3/7), x^(3/7+8d)] u [x^(1/2-4d), x^(1/2+4d)] u
    /// [x^(4/7-8d), x^(4/7)]`.
    pub fn b2(x: f64, delta: f64) -> Self {
        Self::new(vec![
            (x.powf(3.0 / 7.0), x.powf(3.0 / 7.0 + 8.0 * delta)),
            (x.powf(0.5 - 4.0 * delta), x.powf(0.5 + 4.0 * delta)),
            (x.powf(4.0 / 7.0 - 8.0 * delta), x.powf(4.0 / 7.0)),
        ])
    }

    /// `G = [x^(2/5+6d) L^2C, x^(1/2-3d)/L^C]` (the Type-II window).
    pub fn g_typeii(x: f64, delta: f64, c: f64) -> Self {
        let l = x.ln();
        Self::new(vec![(
            x.powf(0.4 + 6.0 * delta) * l.powf(2.0 * c),
            x.powf(0.5 - 3.0 * delta) / l.powf(c),
        )])
    }

    /// `G = [x^(3/7+8d), x^(1/2-4d)] u [x^(1/2+4d), x^(4/7-8d)]` (the
    /// minorant decomposition's good set; empty for delta >= 1/168).
    pub fn g_thm3(x: f64, delta: f64) -> Self {
        Self::new(vec![
            (x.powf(3.0 / 7.0 + 8.0 * delta), x.powf(0.5 - 4.0 * delta)),
            (x.powf(0.5 + 4.0 * delta), x.powf(4.0 / 7.0 - 8.0 * delta)),
        ])
    }
}

/// Truncated upper-bound sieve weights: support on squarefree d with
/// `P^+(d) < z` and at most 2r prime factors, `lambda_d = mu(d)` there.
#[derive(Debug, Clone)]
pub struct SieveWeights {
    z: f64,
    r: u32,
    cap: Option<u64>,
    weights: BTreeMap<u64, f64>,
}

/// Bonferroni truncation of the Moebius inclusion-exclusion at an even
/// number of prime factors; both majorant inequalities hold pointwise.
pub fn upper_sieve(z: f64, r: u32) -> Result<SieveWeights> {
    upper_sieve_capped(z, r, None)
}

/// Same, with the support additionally hard-filtered to `d < cap`.
pub fn upper_sieve_capped(z: f64, r: u32, cap: Option<u64>) -> Result<SieveWeights> {
    if z < 2.0 {
        return Err(Error::Precondition(format!("z = {z} must be >= 2")));
    }
    if r == 0 {
        return Err(Error::Precondition("r must be >= 1".into()));
    }
    if z > 100_000.0 {
        return Err(Error::Range { what: "z", got: z as u64, limit: 100_000 });
    }
    let zc = z.ceil() as u64;
    let mut primes = Vec::new();
    for p in 2..zc {
        if (p as f64) < z && crate::arith::is_prime(p) {
            primes.push(p);
        }
    }
    let mut weights = BTreeMap::new();
    weights.insert(1u64, 1.0);
    // DFS over squarefree z-smooth products with <= 2r factors
    let mut stack: Vec<(usize, u64, u32)> = vec![(0, 1, 0)];
    while let Some((start, d, omega)) = stack.pop() {
        if omega == 2 * r {
            continue;
        }
        for (i, &p) in primes.iter().enumerate().skip(start) {
            let nd = match d.checked_mul(p) {
                Some(v) => v,
                None => continue,
            };
            if let Some(cap) = cap {
                if nd >= cap {
                    continue;
                }
            }
            let sign = if (omega + 1) % 2 == 0 { 1.0 } else { -1.0 };
            weights.insert(nd, sign);
            if weights.len() > 5_000_000 {
                return Err(Error::Resource("sieve support exceeds 5e6 entries".into()));
            }
            stack.push((i + 1, nd, omega + 1));
        }
    }
    Ok(SieveWeights { z, r, cap, weights })
}

impl SieveWeights {
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    pub fn weights(&self) -> &BTreeMap<u64, f64> {
        &self.weights
    }

    pub fn lambda(&self, d: u64) -> f64 {
        self.weights.get(&d).copied().unwrap_or(0.0)
    }

    /// `sum_{d | n} lambda_d` over the support.
    pub fn divisor_sum(&self, f: &Factorization) -> f64 {
        f.divisors()
            .iter()
            .map(|&d| self.lambda(d))
            .sum()
    }

    /// `sum_d lambda_d / d`, reported against the `1/log z` scale.
    pub fn lambda_over_d_sum(&self) -> f64 {
        self.weights.iter().map(|(&d, &l)| l / d as f64).sum()
    }
}

/// `rho_B(n) = sum over m1 m2 = n with m1 in B of
/// (sum_{d|m1} lambda_d)(sum_{d|m2} lambda_d)`.
pub fn rho_b(n: u64, b: &IntervalSet, w: &SieveWeights) -> Result<f64> {
    if n == 0 || n > 100_000_000 {
        return Err(Error::Range { what: "n", got: n, limit: 100_000_000 });
    }
    if b.is_empty() {
        return Ok(0.0);
    }
    let f = factorize(n)?;
    let divs = f.divisors();
    // inner lambda-sums for every divisor, sharing the divisor list
    let mut inner = vec![0.0f64; divs.len()];
    for (i, &v) in divs.iter().enumerate() {
        inner[i] = divs
            .iter()
            .filter(|&&d| d <= v && v % d == 0)
            .map(|&d| w.lambda(d))
            .sum();
    }
    let idx = |v: u64| divs.binary_search(&v).unwrap();
    let mut total = 0.0;
    for (i, &m1) in divs.iter().enumerate() {
        if b.contains_u64(m1) {
            total += inner[i] * inner[idx(n / m1)];
        }
    }
    Ok(total)
}

/// Exact `sum over n in (x, 2x] of rho_B(n)`, parallel over fixed chunks
/// with deterministic summation order.
pub fn rho_b_mean(x: u64, b: &IntervalSet, w: &SieveWeights, table: &PrimeTable) -> Result<f64> {
    if x > 10_000_000 {
        return Err(Error::Range { what: "x", got: x, limit: 10_000_000 });
    }
    if 2 * x > table.limit() {
        return Err(Error::Range { what: "2x", got: 2 * x, limit: table.limit() });
    }
    if b.is_empty() {
        return Ok(0.0);
    }
    let chunk = 1u64 << 16;
    let chunks: Vec<(u64, u64)> = (x + 1..=2 * x)
        .step_by(chunk as usize)
        .map(|lo| (lo, (lo + chunk - 1).min(2 * x)))
        .collect();
    let partials: Vec<f64> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = 0.0;
            for n in lo..=hi {
                let f = Factorization::from_table(n, table);
                let divs = f.divisors();
                let lam = |v: u64| -> f64 {
                    divs.iter().filter(|&&d| d <= v && v.is_multiple_of(d)).map(|&d| w.lambda(d)).sum()
                };
                for &m1 in &divs {
                    if b.contains_u64(m1) {
                        acc += lam(m1) * lam(n / m1);
                    }
                }
            }
            acc
        })
        .collect();
    Ok(partials.iter().sum())
}
