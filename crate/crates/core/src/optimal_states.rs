//! Canonical and optimal permutation-invariant states at fixed local Bloch length.
//!
//! Optimal states are first described as a [`CollinearConfig`]: a list of sectors,
//! each with a weight and a signed Bloch length measured along the target
//! direction. The config carries everything the fidelities depend on; turning it
//! into a [`SchurState`] only picks the direction in space.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::fidelity::{EstimationFidelity, FidelityFamily, Structure};
use crate::spin_algebra::{
    reduce_full, sector_reduced_density, BlochVector, SchurEntry, SchurState, SectorState,
    SpinSector,
};

/// Residual tolerance used by [`ConstraintReport::passes`].
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Distance from an integer `rN` at which the unknown-structure optimum collapses to a
/// single sector.
const WINDOW_TIE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Symmetric,
    KnownOptimal,
    UnknownOptimal,
}

/// A named family of states at fixed local Bloch length and direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateFamily {
    pub kind: FamilyKind,
    pub n: u32,
    pub r: f64,
    pub direction: BlochVector,
}

impl StateFamily {
    pub fn new(kind: FamilyKind, n: u32, r: f64, direction: BlochVector) -> Result<Self> {
        check_length(r)?;
        unit(&direction)?;
        Ok(Self {
            kind,
            n,
            r,
            direction,
        })
    }

    pub fn build(&self) -> Result<SchurState> {
        match self.kind {
            FamilyKind::Symmetric => canonical_sym_state(self.n, self.r, self.direction),
            FamilyKind::KnownOptimal => known_opt_state(self.n, self.r, self.direction),
            FamilyKind::UnknownOptimal => unknown_opt_state(self.n, self.r, self.direction),
        }
    }
}

/// `S = 2` for even `N` and `1` for odd `N`: twice the smallest non-zero spin.
pub fn parity_step(n: u32) -> u32 {
    if n.is_multiple_of(2) {
        2
    } else {
        1
    }
}

fn check_length(r: f64) -> Result<()> {
    if !(r.is_finite() && (0.0..=1.0).contains(&r)) {
        return Err(domain(format!("Bloch length {r} outside [0, 1]")));
    }
    Ok(())
}

fn unit(direction: &BlochVector) -> Result<BlochVector> {
    if (direction.norm() - 1.0).abs() > 1e-12 {
        return Err(domain(format!(
            "direction {direction} is not a unit vector"
        )));
    }
    Ok(*direction)
}

/// One sector of a collinear configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollinearTerm {
    pub two_j: u32,
    pub weight: f64,
    /// Sector Bloch length along the target direction, in `[-1, 1]`.
    pub signed_length: f64,
}

impl CollinearTerm {
    fn shrink(&self) -> f64 {
        self.two_j as f64 / (self.two_j as f64 + 2.0)
    }
}

/// Sector weights and signed sector Bloch lengths, all measured along one axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollinearConfig {
    pub n: u32,
    pub terms: Vec<CollinearTerm>,
}

impl CollinearConfig {
    /// `sum p_j j/(j+1) |r_j|`.
    pub fn delta_known(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.shrink() * t.signed_length.abs())
            .sum()
    }

    /// `sum (+-) p_j j/(j+1) r_j`.
    pub fn delta_unknown(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.shrink() * t.signed_length)
            .sum()
    }

    pub fn delta(&self, structure: Structure) -> f64 {
        match structure {
            Structure::Known => self.delta_known(),
            Structure::Unknown => self.delta_unknown(),
        }
    }

    /// `(2/N) sum (+-) p_j j r_j`, the local Bloch length the config produces.
    pub fn local_length(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.two_j as f64 * t.signed_length)
            .sum::<f64>()
            / self.n as f64
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Realizes the config with sector Bloch vectors along `+-direction`.
    /// Terms sharing a sector are merged into one sector state.
    pub fn to_state(&self, direction: BlochVector) -> Result<SchurState> {
        let direction = unit(&direction)?;
        let mut entries: Vec<SchurEntry> = Vec::new();
        for sector in SpinSector::all(self.n).rev() {
            let here: Vec<_> = self
                .terms
                .iter()
                .filter(|t| t.two_j == sector.two_j())
                .collect();
            let weight: f64 = here.iter().map(|t| t.weight).sum();
            if here.is_empty() || weight <= 0.0 {
                continue;
            }
            let length = here.iter().map(|t| t.weight * t.signed_length).sum::<f64>() / weight;
            let state = SectorState::collinear(sector, length.clamp(-1.0, 1.0), &direction)?;
            entries.push(SchurEntry { weight, state });
        }
        SchurState::new(self.n, entries)
    }
}

/// A symmetric-subspace state with local Bloch vector `r * direction`:
/// `p_{N/2} = 1` and `lambda = q |dir><dir| + (1-q) |-dir><-dir|`, `q = (1+r)/2`.
pub fn canonical_sym_state(n: u32, r: f64, direction: BlochVector) -> Result<SchurState> {
    check_length(r)?;
    let direction = unit(&direction)?;
    let sector = SpinSector::symmetric(n)?;
    Ok(SchurState::single(SectorState::collinear(
        sector, r, &direction,
    )?))
}

/// Weights of the known-structure optimum: the top sector parallel and the next one
/// antiparallel to the local Bloch vector.
pub fn known_opt_config(n: u32, r: f64) -> Result<CollinearConfig> {
    if n < 2 {
        return Err(domain("the known-structure optimum needs n >= 2"));
    }
    check_length(r)?;
    let nf = n as f64;
    let top = (nf * (r + 1.0) - 2.0) / (2.0 * nf - 2.0);
    let next = (nf - r * nf) / (2.0 * nf - 2.0);
    let mut terms = vec![CollinearTerm {
        two_j: n,
        weight: top,
        signed_length: 1.0,
    }];
    if next > 0.0 {
        terms.push(CollinearTerm {
            two_j: n - 2,
            weight: next,
            signed_length: -1.0,
        });
    }
    Ok(CollinearConfig { n, terms })
}

/// Weights of the unknown-structure optimum, piecewise in `r`.
///
/// For `r >= S/N` two adjacent sectors bracketing `rN/2` share the weight, both
/// parallel. For `r < S/N` the lowest non-zero spin `S/2` is parallel and the
/// symmetric sector antiparallel. At `rN/2` equal to an allowed spin a single
/// sector carries all the weight.
pub fn unknown_opt_config(n: u32, r: f64) -> Result<CollinearConfig> {
    if n < 2 {
        return Err(domain("the unknown-structure optimum needs n >= 2"));
    }
    check_length(r)?;
    let nf = n as f64;
    let s = parity_step(n);
    let two_x = r * nf;
    let parity = n % 2;
    let terms = if two_x >= s as f64 - WINDOW_TIE_TOL {
        let nearest = (((two_x - parity as f64) / 2.0).round() as u32) * 2 + parity;
        let nearest = nearest.clamp(s, n);
        if (two_x - nearest as f64).abs() <= WINDOW_TIE_TOL {
            vec![CollinearTerm {
                two_j: nearest,
                weight: 1.0,
                signed_length: 1.0,
            }]
        } else {
            let hi = if (nearest as f64) > two_x {
                nearest
            } else {
                nearest + 2
            };
            let (x, j) = (two_x / 2.0, hi as f64 / 2.0);
            vec![
                CollinearTerm {
                    two_j: hi,
                    weight: x + 1.0 - j,
                    signed_length: 1.0,
                },
                CollinearTerm {
                    two_j: hi - 2,
                    weight: j - x,
                    signed_length: 1.0,
                },
            ]
        }
    } else {
        let sf = s as f64;
        vec![
            CollinearTerm {
                two_j: s,
                weight: (r + 1.0) * nf / (nf + sf),
                signed_length: 1.0,
            },
            CollinearTerm {
                two_j: n,
                weight: (sf - r * nf) / (nf + sf),
                signed_length: -1.0,
            },
        ]
    };
    Ok(CollinearConfig { n, terms })
}

pub fn known_opt_state(n: u32, r: f64, direction: BlochVector) -> Result<SchurState> {
    known_opt_config(n, r)?.to_state(direction)
}

pub fn unknown_opt_state(n: u32, r: f64, direction: BlochVector) -> Result<SchurState> {
    unknown_opt_config(n, r)?.to_state(direction)
}

/// Fidelity of the optimal config for the given structure, `(1 + delta)/2`.
///
/// Unlike evaluating the built state, this is defined at `r = 0` as the `r -> 0+`
/// limit, since the signs of the sector vectors are fixed by the config.
pub fn optimal_fidelity(n: u32, r: f64, structure: Structure) -> Result<EstimationFidelity> {
    let (config, family) = match structure {
        Structure::Known => (known_opt_config(n, r)?, FidelityFamily::Known),
        Structure::Unknown => (unknown_opt_config(n, r)?, FidelityFamily::Unknown),
    };
    Ok(EstimationFidelity {
        value: 0.5 * (1.0 + config.delta(structure)),
        family,
    })
}

/// `Delta_unknown` of the two-sector state reached from `p_{j'} = 1` after lowering
/// `r` by `eps` and moving weight into sector `j''`:
/// `N eps / (2 (j' - j'')) (j''/(j''+1) - j'/(j'+1)) + j'/(j'+1)`.
pub fn split_delta(n: u32, two_j_hi: u32, two_j_lo: u32, eps: f64) -> Result<f64> {
    if two_j_lo >= two_j_hi {
        return Err(domain("the lower sector must have smaller spin"));
    }
    SpinSector::new(n, two_j_hi)?;
    SpinSector::new(n, two_j_lo)?;
    let (jh, jl) = (two_j_hi as f64 / 2.0, two_j_lo as f64 / 2.0);
    let (ch, cl) = (jh / (jh + 1.0), jl / (jl + 1.0));
    Ok(n as f64 * eps / (2.0 * (jh - jl)) * (cl - ch) + ch)
}

/// Residuals of the feasibility constraints for a target local Bloch vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// `|sum p_j - 1|`.
    pub weight_sum: f64,
    /// Most negative weight, or zero.
    pub negative_weight: f64,
    /// Largest excess of a sector Bloch length over one, or zero.
    pub length_excess: f64,
    /// Component-wise max of `(2/N) sum p_j j r_j - r_target`.
    pub bloch: f64,
}

impl ConstraintReport {
    pub fn max_residual(&self) -> f64 {
        self.weight_sum
            .max(self.negative_weight)
            .max(self.length_excess)
            .max(self.bloch)
    }

    pub fn passes(&self) -> bool {
        self.max_residual() <= CONSTRAINT_TOL
    }
}

pub fn check_constraints(state: &SchurState, r_target: &BlochVector) -> ConstraintReport {
    let sum: f64 = state.entries().iter().map(|e| e.weight).sum();
    let negative_weight = state
        .entries()
        .iter()
        .map(|e| (-e.weight).max(0.0))
        .fold(0.0, f64::max);
    let length_excess = state
        .entries()
        .iter()
        .map(|e| (sector_reduced_density(&e.state).length() - 1.0).max(0.0))
        .fold(0.0, f64::max);
    ConstraintReport {
        weight_sum: (sum - 1.0).abs(),
        negative_weight,
        length_excess,
        bloch: reduce_full(state).max_abs_diff(r_target),
    }
}
