//! Desk-scale measurement harness for equidistribution in arithmetic
//! progressions: discrepancy sums over modulus families, the nested-sup
//! three-factor variant, Barban-Davenport-Halberstam variances, double
//! divisor and ternary divisor checks, and the minorant-proxy mean.
//!
//! Everything is computed exactly by residue bucketing (one O(x) pass per
//! modulus), parallel over moduli with a deterministic reduction order, so
//! reports are byte-identical across thread counts.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::gcd;
use crate::decomp::harman_terms;
use crate::error::{Error, Result};
use crate::sieve::PrimeTable;

/// Weight attached to each integer in the harness sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpWeight {
    Prime,
    Lambda,
    Mu,
    Tau3,
    /// Minorant proxy `1_prime - S_{2,3} - S_{2,5}`, summed over (x, 2x].
    RhoProxy,
}

impl ExpWeight {
    /// Summation range: weights run over [1, x], except the proxy, whose
    /// natural range is the dyadic window (x, 2x].
    pub fn range(self, x: u64) -> (u64, u64) {
        match self {
            ExpWeight::RhoProxy => (x + 1, 2 * x),
            _ => (1, x),
        }
    }
}

/// Restrictions on the summed integers (applied on top of the weight).
#[derive(Debug, Clone, Default, Serialize)]
pub struct NFilter {
    /// keep squarefree n only
    pub squarefree: bool,
    /// keep n coprime to this value
    pub coprime_to: Option<u64>,
    /// keep n with some divisor in the closed interval
    pub divisor_in: Option<(u64, u64)>,
}

impl NFilter {
    pub fn is_trivial(&self) -> bool {
        !self.squarefree && self.coprime_to.is_none() && self.divisor_in.is_none()
    }
}

/// Configuration of one discrepancy experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub x: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub q1: (u64, u64),
    pub q2: (u64, u64),
    pub q3: Option<(u64, u64)>,
    pub weight: ExpWeight,
    pub filter: NFilter,
}

impl ExperimentConfig {
    pub fn new(
        x: u64,
        q1: (u64, u64),
        q2: (u64, u64),
        q3: Option<(u64, u64)>,
        weight: ExpWeight,
    ) -> Result<Self> {
        if x < 100 {
            return Err(Error::Precondition(format!("x = {x} must be >= 100")));
        }
        for &(lo, hi) in [&q1, &q2].into_iter().chain(q3.as_ref()) {
            if lo < 1 || hi < lo {
                return Err(Error::Precondition(format!("empty modulus range [{lo},{hi}]")));
            }
        }
        let prod = q1.1 as u128 * q2.1 as u128 * q3.map_or(1, |r| r.1) as u128;
        if prod > x as u128 {
            return Err(Error::Precondition(format!(
                "modulus range product {prod} exceeds x = {x}"
            )));
        }
        Ok(Self { x, delta: 0.0, epsilon: 0.0, q1, q2, q3, weight, filter: NFilter::default() })
    }

    pub fn with_filter(mut self, filter: NFilter) -> Self {
        self.filter = filter;
        self
    }

    /// The two-factor family shape `q1 in [Q1, 2Q1], q2 in [Q2, 2Q2]` with
    /// `Q1 = x^(1/10-3d)/L^C`, `Q2 = x^(4/10+4d) L^C`, clamped to >= 2.
    pub fn theorem1_shape(x: u64, delta: f64, c: f64, weight: ExpWeight) -> Result<Self> {
        let xf = x as f64;
        let l = xf.ln();
        let qq1 = (xf.powf(0.1 - 3.0 * delta) / l.powf(c)).max(2.0);
        let qq2 = (xf.powf(0.4 + 4.0 * delta) * l.powf(c)).max(2.0);
        let mut cfg = Self::new(
            x,
            (qq1.ceil() as u64, (2.0 * qq1).floor() as u64),
            (qq2.ceil() as u64, (2.0 * qq2).floor() as u64),
            None,
            weight,
        )?;
        cfg.delta = delta;
        Ok(cfg)
    }
}

/// One modulus of the family.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyRecord {
    /// the factors (q1, q2) or (q1, q2, q3) producing this modulus
    pub q_parts: Vec<u64>,
    pub q: u64,
    /// sup over admissible residues of |class sum - main/phi(q)|
    pub sup_disc: f64,
    /// residue attaining the sup (coprime to q by construction)
    pub argmax_a: u64,
    /// the main-term mass (pi(x) for the prime weight, else the
    /// coprime-filtered total)
    pub main_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub records: Vec<DiscrepancyRecord>,
    /// sum of the per-modulus sups
    pub total: f64,
    /// sum of main_mass / phi(q): the trivial comparator
    pub trivial_bound: f64,
}

impl DiscrepancyReport {
    pub fn ratio(&self) -> f64 {
        if self.trivial_bound == 0.0 {
            0.0
        } else {
            self.total / self.trivial_bound
        }
    }
}

/// Weight values for n in [lo, hi], indexed by n - lo.
pub fn weight_values(
    weight: ExpWeight,
    x: u64,
    table: &PrimeTable,
) -> Result<(u64, Vec<f64>)> {
    let (lo, hi) = weight.range(x);
    if hi > table.limit() {
        return Err(Error::Range { what: "range top", got: hi, limit: table.limit() });
    }
    let mut w = vec![0.0f64; (hi - lo + 1) as usize];
    match weight {
        ExpWeight::Prime => {
            for n in lo..=hi {
                if table.is_prime(n) {
                    w[(n - lo) as usize] = 1.0;
                }
            }
        }
        ExpWeight::Lambda => {
            for n in lo..=hi {
                w[(n - lo) as usize] = table.lambda(n);
            }
        }
        ExpWeight::Mu => {
            for n in lo..=hi {
                w[(n - lo) as usize] = table.mu(n) as f64;
            }
        }
        ExpWeight::Tau3 => {
            for n in lo..=hi {
                w[(n - lo) as usize] = table.tau3(n) as f64;
            }
        }
        ExpWeight::RhoProxy => {
            for n in lo..=hi {
                let h = harman_terms(n, x, 0.0, table)?;
                let prime = i64::from(table.is_prime(n));
                w[(n - lo) as usize] = (prime - h.s23 as i64 - h.s25 as i64) as f64;
            }
        }
    }
    Ok((lo, w))
}

fn residue_sums(q: u64, lo: u64, w: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0f64; q as usize];
    let mut a = (lo % q) as usize;
    for &v in w {
        sums[a] += v;
        a += 1;
        if a == q as usize {
            a = 0;
        }
    }
    sums
}

fn phi_of(q: u64) -> u64 {
    crate::arith::factorize(q).unwrap().phi()
}

/// Per-modulus sup and argmax over coprime residues, given class sums.
fn sup_over_residues(q: u64, sums: &[f64], main_mass: f64, phi: u64) -> (f64, u64) {
    let expected = main_mass / phi as f64;
    let mut sup = -1.0f64;
    let mut argmax = 0u64;
    for a in 0..q {
        if gcd(a, q) != 1 {
            continue;
        }
        let d = (sums[a as usize] - expected).abs();
        if d > sup {
            sup = d;
            argmax = a;
        }
    }
    (sup.max(0.0), argmax)
}

fn family_pairs(cfg: &ExperimentConfig) -> Vec<(u64, u64)> {
    let mut pairs = Vec::new();
    for q1 in cfg.q1.0..=cfg.q1.1 {
        for q2 in cfg.q2.0..=cfg.q2.1 {
            pairs.push((q1, q2));
        }
    }
    pairs
}

fn check_family_cost(moduli_count: u64, span: u64) -> Result<()> {
    let cost = moduli_count as u128 * span as u128;
    if cost > 1_000_000_000_000 {
        return Err(Error::Resource(format!(
            "family needs ~{cost} residue-bucket operations; split the ranges"
        )));
    }
    Ok(())
}

/// Two-factor discrepancy sum: for each modulus `q = q1 q2` of the family,
/// the sup over coprime residues of the class-sum deviation from the main
/// term, aggregated with the trivial comparator.
pub fn discrepancy_sum(cfg: &ExperimentConfig, table: &PrimeTable) -> Result<DiscrepancyReport> {
    if cfg.q3.is_some() {
        return Err(Error::Precondition("three-factor config: use nested_sup_discrepancy".into()));
    }
    let (lo, w) = weight_values(cfg.weight, cfg.x, table)?;
    let pairs = family_pairs(cfg);
    check_family_cost(pairs.len() as u64, w.len() as u64)?;
    let prime_main = match cfg.weight {
        ExpWeight::Prime => Some(table.pi(cfg.x) as f64),
        _ => None,
    };
    let records: Vec<DiscrepancyRecord> = pairs
        .par_iter()
        .map(|&(q1, q2)| {
            let q = q1 * q2;
            let sums = residue_sums(q, lo, &w);
            let phi = phi_of(q);
            let main_mass = prime_main.unwrap_or_else(|| {
                (0..q).filter(|&a| gcd(a, q) == 1).map(|a| sums[a as usize]).sum()
            });
            let (sup_disc, argmax_a) = sup_over_residues(q, &sums, main_mass, phi);
            DiscrepancyRecord { q_parts: vec![q1, q2], q, sup_disc, argmax_a, main_mass }
        })
        .collect();
    let total = records.iter().map(|r| r.sup_disc).sum();
    let trivial_bound = records.iter().map(|r| r.main_mass / phi_of(r.q) as f64).sum();
    Ok(DiscrepancyReport { records, total, trivial_bound })
}

/// Three-factor nested-sup discrepancy: per (q1, q2), the sup over residues
/// b mod q1 q2 of the sum over q3 of the inner sup over a = b (mod q1 q2)
/// coprime to q1 q2 q3. Rows are emitted per (q1, q2, q3), evaluated at the
/// outer argmax b, so the row sums reproduce the report total.
pub fn nested_sup_discrepancy(
    cfg: &ExperimentConfig,
    table: &PrimeTable,
) -> Result<DiscrepancyReport> {
    let q3_range = cfg
        .q3
        .ok_or_else(|| Error::Precondition("nested_sup_discrepancy needs a q3 range".into()))?;
    let (lo, w) = weight_values(cfg.weight, cfg.x, table)?;
    let pairs = family_pairs(cfg);
    let q3_count = q3_range.1 - q3_range.0 + 1;
    check_family_cost(pairs.len() as u64 * q3_count, w.len() as u64)?;
    let prime_main = match cfg.weight {
        ExpWeight::Prime => Some(table.pi(cfg.x) as f64),
        _ => None,
    };

    let per_pair: Vec<Vec<DiscrepancyRecord>> = pairs
        .par_iter()
        .map(|&(q1, q2)| {
            let q12 = q1 * q2;
            // pass 1: accumulate per-b sums of inner sups
            let mut acc = vec![0.0f64; q12 as usize];
            for q3 in q3_range.0..=q3_range.1 {
                let q = q12 * q3;
                let sums = residue_sums(q, lo, &w);
                let phi = phi_of(q);
                let main_mass = prime_main.unwrap_or_else(|| {
                    (0..q).filter(|&a| gcd(a, q) == 1).map(|a| sums[a as usize]).sum()
                });
                let expected = main_mass / phi as f64;
                let mut cur = vec![-1.0f64; q12 as usize];
                for a in 0..q {
                    if gcd(a, q) != 1 {
                        continue;
                    }
                    let d = (sums[a as usize] - expected).abs();
                    let b = (a % q12) as usize;
                    if d > cur[b] {
                        cur[b] = d;
                    }
                }
                for (acc_b, cur_b) in acc.iter_mut().zip(&cur) {
                    if *cur_b >= 0.0 {
                        *acc_b += cur_b;
                    }
                }
            }
            let mut best_b = 0u64;
            let mut best = -1.0f64;
            for b in 0..q12 {
                if gcd(b, q12) == 1 && acc[b as usize] > best {
                    best = acc[b as usize];
                    best_b = b;
                }
            }
            // pass 2: emit rows at the argmax b
            let mut rows = Vec::with_capacity(q3_count as usize);
            for q3 in q3_range.0..=q3_range.1 {
                let q = q12 * q3;
                let sums = residue_sums(q, lo, &w);
                let phi = phi_of(q);
                let main_mass = prime_main.unwrap_or_else(|| {
                    (0..q).filter(|&a| gcd(a, q) == 1).map(|a| sums[a as usize]).sum()
                });
                let expected = main_mass / phi as f64;
                let mut sup = 0.0f64;
                let mut argmax = best_b;
                let mut a = best_b;
                while a < q {
                    if gcd(a, q) == 1 {
                        let d = (sums[a as usize] - expected).abs();
                        if d > sup {
                            sup = d;
                            argmax = a;
                        }
                    }
                    a += q12;
                }
                rows.push(DiscrepancyRecord {
                    q_parts: vec![q1, q2, q3],
                    q,
                    sup_disc: sup,
                    argmax_a: argmax,
                    main_mass,
                });
            }
            rows
        })
        .collect();

    let records: Vec<DiscrepancyRecord> = per_pair.into_iter().flatten().collect();
    let total = records.iter().map(|r| r.sup_disc).sum();
    let trivial_bound = records.iter().map(|r| r.main_mass / phi_of(r.q) as f64).sum();
    Ok(DiscrepancyReport { records, total, trivial_bound })
}

/// Barban-Davenport-Halberstam variance over n in (N, 2N]:
/// `sum_{q <= Q} tau(q)^B sum_{(b,q)=1} |sum_n w(n) (1_{n=b(q)} -
/// 1_{(n,q)=1}/phi(q))|^2`.
pub fn bdh_variance(
    n_scale: u64,
    q_max: u64,
    weight: ExpWeight,
    tau_exponent: i32,
    table: &PrimeTable,
) -> Result<f64> {
    if !matches!(weight, ExpWeight::Lambda | ExpWeight::Mu) {
        return Err(Error::Precondition("bdh_variance takes Lambda or Mu weights".into()));
    }
    if 2 * n_scale > table.limit() {
        return Err(Error::Range { what: "2N", got: 2 * n_scale, limit: table.limit() });
    }
    if q_max > n_scale {
        return Err(Error::Precondition(format!("Q = {q_max} exceeds N = {n_scale}")));
    }
    let lo = n_scale + 1;
    let mut w = vec![0.0f64; n_scale as usize];
    for n in lo..=2 * n_scale {
        w[(n - lo) as usize] = match weight {
            ExpWeight::Lambda => table.lambda(n),
            _ => table.mu(n) as f64,
        };
    }
    let per_q: Vec<f64> = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let sums = residue_sums(q, lo, &w);
            let phi = phi_of(q);
            let coprime_total: f64 =
                (0..q).filter(|&a| gcd(a, q) == 1).map(|a| sums[a as usize]).sum();
            let expected = coprime_total / phi as f64;
            let var: f64 = (0..q)
                .filter(|&a| gcd(a, q) == 1)
                .map(|a| {
                    let d = sums[a as usize] - expected;
                    d * d
                })
                .sum();
            let tau = crate::arith::factorize(q).unwrap().tau() as f64;
            tau.powi(tau_exponent) * var
        })
        .collect();
    Ok(per_q.iter().sum())
}

/// Output of the double divisor comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DoubleDivisorCheck {
    pub lhs: u64,
    pub rhs: f64,
    pub diff: f64,
}

/// `lhs = #{n1 n2 in (x, 2x] : n1 in I1, n2 in I2, n1 n2 = a (mod q)}`
/// against `rhs = (1/phi(q)) #{same with (n1 n2, q) = 1}`.
pub fn double_divisor_check(
    x: u64,
    q: u64,
    a: u64,
    i1: (u64, u64),
    i2: (u64, u64),
) -> Result<DoubleDivisorCheck> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus 0".into()));
    }
    if gcd(a, q) != 1 {
        return Err(Error::Precondition(format!("gcd(a={a}, q={q}) must be 1")));
    }
    // progression count of n in [lo, hi] with n = r (mod q)
    let ap_count = |lo: u64, hi: u64, r: u64| -> u64 {
        if hi < lo {
            return 0;
        }
        let first = lo + (q + r % q - lo % q) % q;
        if first > hi {
            0
        } else {
            (hi - first) / q + 1
        }
    };
    let fq = crate::arith::factorize(q)?;
    let sq_divs: Vec<(u64, i64)> = fq
        .divisors()
        .iter()
        .map(|&d| (d, crate::arith::factorize(d).unwrap().mobius()))
        .filter(|&(_, mu)| mu != 0)
        .collect();
    let coprime_count = |lo: u64, hi: u64| -> i64 {
        if hi < lo {
            return 0;
        }
        sq_divs
            .iter()
            .map(|&(d, mu)| mu * ((hi / d) as i64 - ((lo - 1) / d) as i64))
            .sum()
    };

    let mut lhs = 0u64;
    let mut coprime_pairs = 0i64;
    for n1 in i1.0..=i1.1 {
        if n1 == 0 {
            continue;
        }
        let lo = (x / n1) + 1;
        let hi = (2 * x) / n1;
        let lo = lo.max(i2.0);
        let hi = hi.min(i2.1);
        if hi < lo {
            continue;
        }
        if gcd(n1, q) != 1 {
            continue;
        }
        let inv = crate::arith::mod_inverse(n1 as i64, q)?;
        let r = crate::arith::mul_mod(a % q, inv, q.max(1));
        lhs += ap_count(lo, hi, r);
        coprime_pairs += coprime_count(lo, hi);
    }
    let rhs = coprime_pairs as f64 / fq.phi() as f64;
    Ok(DoubleDivisorCheck { lhs, rhs, diff: lhs as f64 - rhs })
}

/// Ternary divisor discrepancy over the (q, r) family:
/// `sum_{q <= Q} sum_{r <= R} sup_a |sum_{n <= x, n = a} tau3(n) -
/// (1/phi(qr)) sum_{(n,qr)=1} tau3(n)|`.
pub fn tau3_discrepancy(
    x: u64,
    q_max: u64,
    r_max: u64,
    table: &PrimeTable,
) -> Result<DiscrepancyReport> {
    if x > 10_000_000 {
        return Err(Error::Range { what: "x", got: x, limit: 10_000_000 });
    }
    let guard = (q_max as f64 * r_max as f64).powf(1.5);
    if guard > (x as f64) * (x as f64).powf(0.5) {
        // QR <= x^(2/3) desk guard
        return Err(Error::Precondition(format!(
            "Q*R = {} exceeds the x^(2/3) guard",
            q_max * r_max
        )));
    }
    let (lo, w) = weight_values(ExpWeight::Tau3, x, table)?;
    let mut pairs = Vec::new();
    for q in 1..=q_max {
        for r in 1..=r_max {
            pairs.push((q, r));
        }
    }
    check_family_cost(pairs.len() as u64, w.len() as u64)?;
    let records: Vec<DiscrepancyRecord> = pairs
        .par_iter()
        .map(|&(q, r)| {
            let m = q * r;
            let sums = residue_sums(m, lo, &w);
            let phi = phi_of(m);
            let main_mass: f64 =
                (0..m).filter(|&a| gcd(a, m) == 1).map(|a| sums[a as usize]).sum();
            let (sup_disc, argmax_a) = sup_over_residues(m, &sums, main_mass, phi);
            DiscrepancyRecord { q_parts: vec![q, r], q: m, sup_disc, argmax_a, main_mass }
        })
        .collect();
    let total = records.iter().map(|r| r.sup_disc).sum();
    let trivial_bound = records.iter().map(|r| r.main_mass / phi_of(r.q) as f64).sum();
    Ok(DiscrepancyReport { records, total, trivial_bound })
}

/// Mean of the constructive minorant proxy `1_prime - S_{2,3} - S_{2,5}`
/// over (x, 2x], normalized by x/log x, against the closed-form constant.
#[derive(Debug, Clone, Serialize)]
pub struct MinorantCheck {
    pub x: u64,
    pub prime_count: u64,
    pub s23_sum: u64,
    pub s25_sum: u64,
    pub proxy_sum: i64,
    pub normalized: f64,
    /// `25/12 - (19/6) log 2 + (1/4) log 3` (the omega <= 1 crude bound)
    pub prediction_crude: f64,
}

pub fn minorant_mean_check(x: u64, delta: f64, table: &PrimeTable) -> Result<MinorantCheck> {
    if x > 10_000_000 {
        return Err(Error::Range { what: "x", got: x, limit: 10_000_000 });
    }
    if 2 * x > table.limit() {
        return Err(Error::Range { what: "2x", got: 2 * x, limit: table.limit() });
    }
    let chunk = 1u64 << 16;
    let chunks: Vec<(u64, u64)> = (x + 1..=2 * x)
        .step_by(chunk as usize)
        .map(|lo| (lo, (lo + chunk - 1).min(2 * x)))
        .collect();
    let partials: Vec<(u64, u64, u64)> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut primes = 0u64;
            let mut s23 = 0u64;
            let mut s25 = 0u64;
            for n in lo..=hi {
                if table.is_prime(n) {
                    primes += 1;
                }
                let h = harman_terms(n, x, delta, table).unwrap();
                s23 += h.s23 as u64;
                s25 += h.s25 as u64;
            }
            (primes, s23, s25)
        })
        .collect();
    let prime_count: u64 = partials.iter().map(|p| p.0).sum();
    let s23_sum: u64 = partials.iter().map(|p| p.1).sum();
    let s25_sum: u64 = partials.iter().map(|p| p.2).sum();
    let proxy_sum = prime_count as i64 - s23_sum as i64 - s25_sum as i64;
    let normalized = proxy_sum as f64 / (x as f64 / (x as f64).ln());
    Ok(MinorantCheck {
        x,
        prime_count,
        s23_sum,
        s25_sum,
        proxy_sum,
        normalized,
        prediction_crude: crate::decomp::theorem3_closed_form(),
    })
}
