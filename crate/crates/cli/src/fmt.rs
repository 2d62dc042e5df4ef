//! Report formatting: CSV emit/parse for the harness reports and the
//! 12-significant-digit scalar rendering used on stdout.
//!
//! CSV float cells use Rust's shortest round-trip rendering so that an
//! emitted report re-parses to the exact in-memory values (the stdout
//! 12-digit rule would lose the low bits); the '.' decimal separator is
//! unconditional in both.

use apl_core::equidist::{DiscrepancyRecord, DiscrepancyReport};
use apl_core::decomp::HarmanTermSet;

/// 12 significant digits, positional where reasonable.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0.000000000000".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..=14).contains(&exp) {
        let prec = (11 - exp).max(0) as usize;
        format!("{v:.prec$}")
    } else {
        format!("{v:.11e}")
    }
}

/// CSV for a discrepancy-style report; `part_names` labels the modulus
/// factor columns (e.g. ["q1","q2"] or ["q","r"]).
pub fn discrepancy_to_csv(rep: &DiscrepancyReport, part_names: &[&str]) -> String {
    let mut out = String::new();
    out.push_str(&part_names.join(","));
    out.push_str(",q,sup_disc,argmax_a,main_mass\n");
    for r in &rep.records {
        let parts: Vec<String> = r.q_parts.iter().map(|p| p.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            parts.join(","),
            r.q,
            r.sup_disc,
            r.argmax_a,
            r.main_mass
        ));
    }
    out
}

/// Re-parse an emitted CSV back into a report (totals recomputed the same
/// way the harness computes them).
pub fn discrepancy_from_csv(csv: &str) -> Result<DiscrepancyReport, String> {
    let mut lines = csv.lines();
    let header = lines.next().ok_or("empty csv")?;
    let cols: Vec<&str> = header.split(',').collect();
    let parts_len = cols.len().checked_sub(4).ok_or("short header")?;
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != parts_len + 4 {
            return Err(format!("row {}: wrong arity", i + 2));
        }
        let q_parts = fields[..parts_len]
            .iter()
            .map(|s| s.parse::<u64>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(DiscrepancyRecord {
            q_parts,
            q: fields[parts_len].parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            sup_disc: fields[parts_len + 1].parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
            argmax_a: fields[parts_len + 2].parse().map_err(|e: std::num::ParseIntError| e.to_string())?,
            main_mass: fields[parts_len + 3].parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
        });
    }
    let total = records.iter().map(|r| r.sup_disc).sum();
    let trivial_bound = records
        .iter()
        .map(|r| r.main_mass / apl_core::arith::factorize(r.q).unwrap().phi() as f64)
        .sum();
    Ok(DiscrepancyReport { records, total, trivial_bound })
}

pub fn harman_csv_header() -> &'static str {
    "n,s1,s2,s3,s21,s22,s23,s24,s25,s221,s222,s3_g,s3_b,s24_g,s24_b,s222_g,s222_b,identity_ok\n"
}

pub fn harman_csv_row(t: &HarmanTermSet) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        t.n,
        t.s1,
        t.s2,
        t.s3,
        t.s21,
        t.s22,
        t.s23,
        t.s24,
        t.s25,
        t.s221,
        t.s222,
        t.s3_g,
        t.s3_b,
        t.s24_g,
        t.s24_b,
        t.s222_g,
        t.s222_b,
        u8::from(t.identities_ok())
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_shapes() {
        assert_eq!(sig12(2.0 / 3.0), "0.666666666667");
        assert_eq!(sig12(0.163020533727), "0.163020533727");
        assert!(sig12(1.5e-9).contains('e'));
        assert_eq!(sig12(78498.0), "78498.0000000");
    }
}
