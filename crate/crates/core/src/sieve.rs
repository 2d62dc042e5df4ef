//! Segmented prime sieving and bulk arithmetic-function tables, plus prime
//! counting in arithmetic progressions. A [`PrimeTable`] is immutable after
//! construction and freely shared read-only across workers.

use crate::error::{Error, Result};

/// Default segment size in entries (cache residency).
pub const DEFAULT_SEGMENT: usize = 1 << 20;

/// Memory cap for table construction, in bytes of the dominant arrays.
const MEMORY_CAP_BYTES: u64 = 6_000_000_000;

/// Sieve output up to `limit`: primality bits, smallest prime factor,
/// von Mangoldt values (log p at prime powers) and Moebius values.
pub struct PrimeTable {
    limit: u64,
    is_prime: Vec<u64>,
    spf: Vec<u32>,
    lambda: Vec<f64>,
    mu: Vec<i8>,
}

impl PrimeTable {
    /// Sieve everything up to `limit` inclusive, marking segment by segment.
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_segmented(limit, DEFAULT_SEGMENT)
    }

    pub fn build_segmented(limit: u64, segment: usize) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidArgument("limit must be >= 2".into()));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Range { what: "limit", got: limit, limit: u32::MAX as u64 });
        }
        let bytes = (limit + 1) * (4 + 8 + 1) + (limit + 1) / 8;
        if bytes > MEMORY_CAP_BYTES {
            return Err(Error::Resource(format!(
                "table for limit {limit} needs ~{bytes} bytes (cap {MEMORY_CAP_BYTES})"
            )));
        }
        let n = (limit + 1) as usize;
        let segment = segment.max(1 << 10);

        // base primes up to sqrt(limit)
        let root = (limit as f64).sqrt() as u64 + 1;
        let mut base_sieve = vec![true; root as usize + 1];
        let mut base_primes = Vec::new();
        for p in 2..=root {
            if base_sieve[p as usize] {
                base_primes.push(p);
                let mut m = p * p;
                while m <= root {
                    base_sieve[m as usize] = false;
                    m += p;
                }
            }
        }

        let mut is_prime = vec![u64::MAX; n / 64 + 1];
        let clear = |bits: &mut [u64], i: u64| bits[(i / 64) as usize] &= !(1u64 << (i % 64));
        clear(&mut is_prime, 0);
        clear(&mut is_prime, 1);
        let mut spf = vec![0u32; n];

        let mut lo = 2u64;
        while lo <= limit {
            let hi = (lo + segment as u64 - 1).min(limit);
            for &p in &base_primes {
                if p * p > hi {
                    break;
                }
                let start = (lo.div_ceil(p) * p).max(p * p);
                let mut m = start;
                while m <= hi {
                    clear(&mut is_prime, m);
                    if spf[m as usize] == 0 {
                        spf[m as usize] = p as u32;
                    }
                    m += p;
                }
            }
            lo = hi + 1;
        }
        // primes have themselves as smallest factor
        for v in 2..=limit {
            if spf[v as usize] == 0 {
                spf[v as usize] = v as u32;
            }
        }

        // mu and lambda in one pass over the spf structure
        let mut mu = vec![0i8; n];
        let mut lambda = vec![0.0f64; n];
        if n > 1 {
            mu[1] = 1;
        }
        for v in 2..=limit {
            let i = v as usize;
            let p = spf[i] as u64;
            let m = (v / p) as usize;
            mu[i] = if (m as u64).is_multiple_of(p) { 0 } else { -mu[m] };
            if p == v {
                lambda[i] = (v as f64).ln();
            } else if spf[m] as u64 == p && lambda[m] != 0.0 {
                lambda[i] = lambda[m];
            }
        }

        Ok(Self { limit, is_prime, spf, lambda, mu })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit);
        self.is_prime[(n / 64) as usize] >> (n % 64) & 1 == 1
    }

    /// Smallest prime factor of `n >= 2`.
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    /// Von Mangoldt value (stored double precision; exact-comparison checks
    /// should use the prime-power structure instead of this float).
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        self.lambda[n as usize]
    }

    #[inline]
    pub fn mu(&self, n: u64) -> i8 {
        self.mu[n as usize]
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(move |&n| self.is_prime(n))
    }

    /// Distinct prime factors of `n <= limit`, via the spf chain.
    pub fn distinct_primes(&self, mut n: u64) -> Vec<u64> {
        let mut ps = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            ps.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        ps
    }

    /// Full factorization of `n <= limit` via the spf chain.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut fs = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            fs.push((p, e));
        }
        fs
    }

    /// Ternary divisor function of `n <= limit`.
    pub fn tau3(&self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        self.factor(n)
            .iter()
            .fold(1u64, |acc, &(_, e)| acc * ((e as u64 + 1) * (e as u64 + 2) / 2))
    }

    pub fn pi(&self, x: u64) -> u64 {
        assert!(x <= self.limit);
        (2..=x).filter(|&n| self.is_prime(n)).count() as u64
    }

    pub fn mertens(&self, x: u64) -> i64 {
        assert!(x <= self.limit);
        (1..=x).map(|n| self.mu(n) as i64).sum()
    }

    pub fn chebyshev_psi(&self, x: u64) -> f64 {
        assert!(x <= self.limit);
        (2..=x).map(|n| self.lambda(n)).sum()
    }
}

/// Number of primes `p <= x` with `p = a (mod q)`.
pub fn pi_in_ap(x: u64, q: u64, a: u64, table: &PrimeTable) -> Result<u64> {
    if x > table.limit() {
        return Err(Error::Range { what: "x", got: x, limit: table.limit() });
    }
    if q == 0 {
        return Err(Error::InvalidArgument("modulus 0".into()));
    }
    Ok(table.primes().take_while(|&p| p <= x).filter(|&p| p % q == a % q).count() as u64)
}

/// Weight selector for bulk residue-class sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    PrimeIndicator,
    Lambda,
    Mu,
}

/// Entry `a` is `sum over n <= x, n = a (mod q) of weight(n)`; the entries
/// sum to the unrestricted total by construction.
pub fn ap_count_vector(x: u64, q: u64, weight: Weight, table: &PrimeTable) -> Result<Vec<f64>> {
    if x > table.limit() {
        return Err(Error::Range { what: "x", got: x, limit: table.limit() });
    }
    if q == 0 {
        return Err(Error::InvalidArgument("modulus 0".into()));
    }
    let mut out = vec![0.0f64; q as usize];
    for n in 1..=x {
        let w = match weight {
            Weight::PrimeIndicator => {
                if table.is_prime(n) {
                    1.0
                } else {
                    continue;
                }
            }
            Weight::Lambda => {
                let l = table.lambda(n);
                if l == 0.0 {
                    continue;
                }
                l
            }
            Weight::Mu => {
                let m = table.mu(n);
                if m == 0 {
                    continue;
                }
                m as f64
            }
        };
        out[(n % q) as usize] += w;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain non-segmented reference sieve, kept independent of the
    /// segmented implementation.
    fn reference_table(limit: u64) -> (Vec<bool>, Vec<u32>, Vec<i8>, Vec<f64>) {
        let n = (limit + 1) as usize;
        let mut isp = vec![true; n];
        isp[0] = false;
        if n > 1 {
            isp[1] = false;
        }
        let mut spf = vec![0u32; n];
        for i in 2..n {
            if spf[i] == 0 {
                for j in (i..n).step_by(i) {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                }
            }
            if spf[i] != i as u32 {
                isp[i] = false;
            }
        }
        let mut mu = vec![0i8; n];
        if n > 1 {
            mu[1] = 1;
        }
        let mut lambda = vec![0.0f64; n];
        for v in 2..n {
            let p = spf[v] as usize;
            let m = v / p;
            mu[v] = if m.is_multiple_of(p) { 0 } else { -mu[m] };
            if p == v {
                lambda[v] = (v as f64).ln();
            } else if spf[m] as usize == p && lambda[m] != 0.0 {
                lambda[v] = lambda[m];
            }
        }
        (isp, spf, mu, lambda)
    }

    #[test]
    fn build_table_examples() {
        let t = PrimeTable::build(10).unwrap();
        assert_eq!(t.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        let t = PrimeTable::build(100).unwrap();
        assert_eq!(t.pi(100), 25);
    }

    #[test]
    fn prime_count_1e6() {
        let t = PrimeTable::build(1_000_000).unwrap();
        assert_eq!(t.pi(1_000_000), 78_498);
    }

    #[test]
    fn segmented_matches_reference_to_1e7() {
        let limit = 10_000_000u64;
        let t = PrimeTable::build(limit).unwrap();
        let t_small_seg = PrimeTable::build_segmented(limit, 1 << 14).unwrap();
        let (isp, spf, mu, lambda) = reference_table(limit);
        for n in 2..=limit {
            let i = n as usize;
            assert_eq!(t.is_prime(n), isp[i], "is_prime({n})");
            assert_eq!(t.spf(n), spf[i] as u64, "spf({n})");
            assert_eq!(t.mu(n), mu[i], "mu({n})");
            assert!(t.lambda(n) == lambda[i], "lambda({n}) bit-identical");
            assert!(t.is_prime(n) == t_small_seg.is_prime(n));
            assert!(t.spf(n) == t_small_seg.spf(n));
            assert!(t.lambda(n) == t_small_seg.lambda(n));
        }
    }

    #[test]
    fn pi_in_ap_examples() {
        let t = PrimeTable::build(100).unwrap();
        assert_eq!(pi_in_ap(10, 3, 1, &t).unwrap(), 1);
        assert_eq!(pi_in_ap(50, 4, 3, &t).unwrap(), 8);
        assert_eq!(pi_in_ap(100, 1, 0, &t).unwrap(), t.pi(100));
        assert!(pi_in_ap(1000, 3, 1, &t).is_err());
    }

    #[test]
    fn pi_in_ap_naive_exhaustive() {
        let t = PrimeTable::build(10_000).unwrap();
        for q in 1..=50u64 {
            for a in 0..q {
                let naive = (2..=10_000u64)
                    .filter(|&n| t.is_prime(n) && n % q == a)
                    .count() as u64;
                assert_eq!(pi_in_ap(10_000, q, a, &t).unwrap(), naive);
            }
        }
    }

    #[test]
    fn ap_count_vector_examples() {
        let t = PrimeTable::build(100).unwrap();
        let v = ap_count_vector(10, 2, Weight::PrimeIndicator, &t).unwrap();
        assert_eq!(v, vec![1.0, 3.0]);

        let v = ap_count_vector(20, 1, Weight::Lambda, &t).unwrap();
        let direct: f64 = (2..=20u64).map(|n| t.lambda(n)).sum();
        assert!((v[0] - direct).abs() < 1e-12);
        assert!((v[0] - 19.2656).abs() < 1e-3);

        let v = ap_count_vector(9, 3, Weight::Mu, &t).unwrap();
        let total: f64 = v.iter().sum();
        assert_eq!(total, -2.0); // Mertens M(9)
    }

    #[test]
    fn conservation_over_classes() {
        let t = PrimeTable::build(50_000).unwrap();
        for q in [1u64, 2, 3, 7, 12, 97, 360] {
            for w in [Weight::PrimeIndicator, Weight::Lambda, Weight::Mu] {
                let v = ap_count_vector(50_000, q, w, &t).unwrap();
                let total: f64 = v.iter().sum();
                let direct: f64 = match w {
                    Weight::PrimeIndicator => t.pi(50_000) as f64,
                    Weight::Lambda => t.chebyshev_psi(50_000),
                    Weight::Mu => t.mertens(50_000) as f64,
                };
                let tol = if matches!(w, Weight::Lambda) { 1e-9 } else { 0.0 };
                assert!(
                    (total - direct).abs() <= tol,
                    "q={q} {w:?}: {total} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn memory_cap_respected() {
        assert!(matches!(
            PrimeTable::build(4_000_000_000),
            Err(Error::Resource(_))
        ));
    }
}
