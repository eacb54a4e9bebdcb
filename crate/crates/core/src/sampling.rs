//! Random states and random feasible weight configurations for property checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{domain, Result};
use crate::optimal_states::{canonical_sym_state, CollinearConfig, CollinearTerm};
use crate::spin_algebra::{
    reduce_full, BlochVector, SchurEntry, SchurState, SectorState, SpinSector,
};

/// Uniformly random unit vector.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// `G G^dag / tr` for a complex Ginibre matrix `G`, with random rank.
pub fn random_sector_state<R: Rng + ?Sized>(sector: SpinSector, rng: &mut R) -> SectorState {
    let d = sector.dim();
    let rank = rng.random_range(1..=d);
    let g = DMatrix::from_fn(d, rank, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut rho = &g * g.adjoint();
    let tr: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    rho /= Complex64::new(tr, 0.0);
    // Symmetrise away rounding so the Hermitian check is exact.
    let rho = (&rho + rho.adjoint()).map(|z| z * 0.5);
    SectorState::new_unchecked(sector, rho).expect("shape matches sector")
}

/// Random Schur state: each sector is kept with probability one half (at least one
/// is kept), weights are flat-Dirichlet and sector matrices are random.
pub fn random_schur_state<R: Rng + ?Sized>(n: u32, rng: &mut R) -> SchurState {
    let sectors: Vec<SpinSector> = SpinSector::all(n).collect();
    let mut keep: Vec<bool> = sectors.iter().map(|_| rng.random_bool(0.5)).collect();
    if !keep.iter().any(|&k| k) {
        let i = rng.random_range(0..sectors.len());
        keep[i] = true;
    }
    let raw: Vec<f64> = keep
        .iter()
        .map(|&k| if k { Exp1.sample(rng) } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    let entries = sectors
        .iter()
        .zip(raw)
        .filter(|(_, w)| *w > 0.0)
        .map(|(s, w)| SchurEntry {
            weight: w / total,
            state: random_sector_state(*s, rng),
        })
        .collect();
    SchurState::new_unchecked(n, entries)
}

/// Random Schur state whose local Bloch vector has exactly length `r`.
///
/// A random state is mixed with either a zero-Bloch symmetric state (to shorten
/// its Bloch vector) or the pure symmetric state along its own direction (to
/// lengthen it). The reduction is linear, so the mixing parameter is solved for
/// exactly.
pub fn random_schur_state_with_length<R: Rng + ?Sized>(
    n: u32,
    r: f64,
    rng: &mut R,
) -> Result<SchurState> {
    if !(0.0..=1.0).contains(&r) {
        return Err(domain(format!("Bloch length {r} outside [0, 1]")));
    }
    let base = random_schur_state(n, rng);
    let bloch = reduce_full(&base);
    let len = bloch.norm();
    let dir = bloch.normalized().unwrap_or_else(|| random_direction(rng));
    if len > r {
        let zero = canonical_sym_state(n, 0.0, dir)?;
        base.mix(&zero, 1.0 - r / len)
    } else if len < r {
        let top = canonical_sym_state(n, 1.0, dir)?;
        base.mix(&top, (r - len) / (1.0 - len))
    } else {
        Ok(base)
    }
}

/// Random extreme point of the feasible set
/// `{ sum p = 1, (2/N) sum (+-) p_j j = r, p >= 0, |r_j| = 1 }`.
fn random_vertex<R: Rng + ?Sized>(n: u32, r: f64, rng: &mut R) -> CollinearConfig {
    // Variables are (two_j, sign); their contribution to 2 * sum p j s is two_j * s.
    let vars: Vec<(u32, f64)> = SpinSector::all(n)
        .flat_map(|s| {
            let two_j = s.two_j();
            if two_j == 0 {
                vec![(0, 1.0)]
            } else {
                vec![(two_j, 1.0), (two_j, -1.0)]
            }
        })
        .collect();
    let target = r * n as f64;
    let value = |v: &(u32, f64)| v.0 as f64 * v.1;
    let below: Vec<_> = vars.iter().filter(|v| value(v) <= target).collect();
    let above: Vec<_> = vars.iter().filter(|v| value(v) >= target).collect();
    let lo = below[rng.random_range(0..below.len())];
    let hi = above[rng.random_range(0..above.len())];
    let (a, b) = (value(lo), value(hi));
    let t = if b > a { (target - a) / (b - a) } else { 1.0 };
    CollinearConfig {
        n,
        terms: vec![
            CollinearTerm {
                two_j: hi.0,
                weight: t,
                signed_length: hi.1,
            },
            CollinearTerm {
                two_j: lo.0,
                weight: 1.0 - t,
                signed_length: lo.1,
            },
        ],
    }
}

/// Moves `config` a random step towards a random feasible point built from up to
/// four random vertices. The result keeps the weight-sum and local-length
/// constraints exactly and all weights non-negative.
pub fn perturb_feasible<R: Rng + ?Sized>(
    config: &CollinearConfig,
    r: f64,
    max_step: f64,
    rng: &mut R,
) -> CollinearConfig {
    let count = rng.random_range(1..=4);
    let raw: Vec<f64> = (0..count).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    // log-uniform step size spanning six decades
    let step = max_step * 10f64.powf(-6.0 * rng.random::<f64>());
    let mut terms: Vec<CollinearTerm> = config
        .terms
        .iter()
        .map(|t| CollinearTerm {
            weight: t.weight * (1.0 - step),
            ..*t
        })
        .collect();
    for w in raw {
        for t in random_vertex(config.n, r, rng).terms {
            terms.push(CollinearTerm {
                weight: t.weight * step * w / total,
                ..t
            });
        }
    }
    CollinearConfig { n: config.n, terms }
}
