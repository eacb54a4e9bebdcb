use std::fmt::Write;

use piestim::curve::SweepRow;
use piestim::optimal_states::ConstraintReport;
use piestim::Structure;
use serde::Serialize;

/// Fixed-point decimal with `digits` significant digits, independent of locale.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exponent = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit (9.99.. -> 10.0..)
    let carried = s
        .trim_start_matches('-')
        .trim_start_matches("0.")
        .trim_start_matches('0');
    if carried.chars().filter(char::is_ascii_digit).count() > digits && decimals > 0 {
        let decimals = decimals - 1;
        format!("{x:.decimals$}")
    } else {
        s
    }
}

fn num(x: f64) -> String {
    sig(x, 12)
}

pub const SWEEP_HEADER: &str = "r,f_sym,f_prod,f_unknown,f_known";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let cells = [row.r, row.f_sym, row.f_prod, row.f_unknown, row.f_known].map(num);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorLine {
    pub two_j: u32,
    pub j: String,
    pub weight: f64,
    pub orientation: &'static str,
    pub bloch_length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateDescription {
    pub n: u32,
    pub r: f64,
    pub structure: Structure,
    pub fidelity: f64,
    pub residuals: ConstraintReport,
    pub sectors: Vec<SectorLine>,
}

pub fn half_integer(two_j: u32) -> String {
    if two_j.is_multiple_of(2) {
        (two_j / 2).to_string()
    } else {
        format!("{two_j}/2")
    }
}

pub fn state_csv(d: &StateDescription) -> String {
    let mut out = String::new();
    let res = &d.residuals;
    let _ = writeln!(out, "# n={}", d.n);
    let _ = writeln!(out, "# r={}", num(d.r));
    let _ = writeln!(out, "# structure={}", d.structure);
    let _ = writeln!(out, "# fidelity={}", num(d.fidelity));
    let _ = writeln!(out, "# residual_weight_sum={:e}", res.weight_sum);
    let _ = writeln!(out, "# residual_negative_weight={:e}", res.negative_weight);
    let _ = writeln!(out, "# residual_length_excess={:e}", res.length_excess);
    let _ = writeln!(out, "# residual_bloch={:e}", res.bloch);
    out.push_str("two_j,j,weight,orientation,bloch_length\n");
    for s in &d.sectors {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.two_j,
            s.j,
            num(s.weight),
            s.orientation,
            num(s.bloch_length)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.875, 12), "0.875000000000");
        assert_eq!(sig(1.0, 12), "1.00000000000");
        assert_eq!(sig(2.0 / 3.0, 6), "0.666667");
        assert_eq!(sig(0.0, 12), "0");
        assert_eq!(sig(0.01, 3), "0.0100");
        assert_eq!(sig(0.99999999999999, 12), "1.00000000000");
        assert_eq!(sig(-0.5, 3), "-0.500");
    }

    #[test]
    fn csv_layout() {
        let rows = [SweepRow {
            r: 1.0,
            f_sym: 0.875,
            f_prod: 0.875,
            f_unknown: 0.875,
            f_known: 0.875,
        }];
        let csv = sweep_csv(&rows);
        assert_eq!(
            csv,
            "r,f_sym,f_prod,f_unknown,f_known\n1.00000000000,0.875000000000,0.875000000000,0.875000000000,0.875000000000\n"
        );
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn spins() {
        assert_eq!(half_integer(6), "3");
        assert_eq!(half_integer(5), "5/2");
    }
}
