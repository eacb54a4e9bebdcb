//! Fidelity-versus-length curves for the four state families.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exec::Execution;
use crate::fidelity::{f_known, f_prod, f_sym, f_unknown, Structure};
use crate::optimal_states::{known_opt_state, optimal_fidelity, unknown_opt_state};
use crate::spin_algebra::BlochVector;

/// Slack allowed on the family ordering within one row.
pub const ORDER_TOL: f64 = 1e-10;

/// Fidelities of the four families at one local Bloch length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub f_sym: f64,
    pub f_prod: f64,
    pub f_unknown: f64,
    pub f_known: f64,
}

impl SweepRow {
    /// Evaluates every family at `(n, r)`. For `n = 1` all four coincide with the
    /// single-qubit value.
    pub fn evaluate(n: u32, r: f64) -> Result<Self> {
        let sym = f_sym(n, r)?.value;
        let prod = f_prod(n, r)?.value;
        if n == 1 {
            return Ok(Self {
                r,
                f_sym: sym,
                f_prod: prod,
                f_unknown: sym,
                f_known: sym,
            });
        }
        let (unknown, known) = if r > 0.0 {
            let z = BlochVector::zhat();
            (
                f_unknown(&unknown_opt_state(n, r, z)?)?.value,
                f_known(&known_opt_state(n, r, z)?)?.value,
            )
        } else {
            (
                optimal_fidelity(n, r, Structure::Unknown)?.value,
                optimal_fidelity(n, r, Structure::Known)?.value,
            )
        };
        Ok(Self {
            r,
            f_sym: sym,
            f_prod: prod,
            f_unknown: unknown,
            f_known: known,
        })
    }

    /// Largest violation of `f_known >= f_unknown >= f_prod >= f_sym`, or zero.
    pub fn ordering_violation(&self) -> f64 {
        (self.f_unknown - self.f_known)
            .max(self.f_prod - self.f_unknown)
            .max(self.f_sym - self.f_prod)
            .max(0.0)
    }

    /// Ordering holds within [`ORDER_TOL`] and every value lies in `[1/2, 1]`.
    pub fn is_valid(&self) -> bool {
        let in_range = [self.f_sym, self.f_prod, self.f_unknown, self.f_known]
            .iter()
            .all(|f| (0.5 - ORDER_TOL..=1.0 + ORDER_TOL).contains(f));
        in_range && self.ordering_violation() <= ORDER_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub n: u32,
    pub rows: Vec<SweepRow>,
}

impl FidelityCurve {
    pub fn invalid_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|row| !row.is_valid())
    }
}

/// Uniform grid of `steps` points from `r_min` to exactly `r_max`.
pub fn grid(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(0.0 <= r_min && r_min < r_max && r_max <= 1.0) {
        return Err(domain(format!(
            "need 0 <= r_min < r_max <= 1, got [{r_min}, {r_max}]"
        )));
    }
    if steps < 2 {
        return Err(domain("need at least two grid points"));
    }
    let last = steps - 1;
    Ok((0..steps)
        .map(|i| {
            if i == last {
                r_max
            } else {
                r_min + (r_max - r_min) * i as f64 / last as f64
            }
        })
        .collect())
}

pub fn sweep(
    n: u32,
    r_min: f64,
    r_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<FidelityCurve> {
    let rs = grid(r_min, r_max, steps)?;
    let rows = exec
        .map(&rs, |&r| SweepRow::evaluate(n, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityCurve { n, rows })
}
