use nalgebra::{DMatrix, Unit, UnitQuaternion, Vector3};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::quadrature::SphereQuadrature;
use crate::error::{domain, Result};
use crate::exec::Execution;
use crate::fidelity::{EstimationFidelity, FidelityFamily, ReflectionRule};
use crate::sampling::random_direction;
use crate::spin_algebra::{
    coherent_amplitudes, reduce_full, sector_reduced_density, BlochVector, SchurState,
};

/// Largest qubit count accepted by [`covariant_povm_fidelity`].
const MAX_POVM_QUBITS: u32 = 8;

/// Quadrature estimate of a fidelity, with a warning when the rule is too coarse to
/// be exact for the integrand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PovmFidelity {
    pub value: EstimationFidelity,
    pub warning: Option<String>,
}

/// Fidelity of the continuous covariant measurement `(2j+1)|phi^{2j}><phi^{2j}|`
/// applied sector by sector, evaluated by quadrature.
///
/// The target is the direction of the local Bloch vector (`z` when it vanishes).
/// Under [`ReflectionRule::ReflectWhenObtuse`] a sector whose Bloch vector is obtuse
/// to the target has its guesses inverted.
pub fn covariant_povm_fidelity(
    state: &SchurState,
    quadrature: &SphereQuadrature,
    rule: ReflectionRule,
    exec: Execution,
) -> Result<PovmFidelity> {
    let n = state.n();
    if n > MAX_POVM_QUBITS {
        return Err(domain(format!(
            "quadrature oracle supports n <= {MAX_POVM_QUBITS}, got {n}"
        )));
    }
    let target = reduce_full(state)
        .normalized()
        .unwrap_or(BlochVector::zhat());
    let warning = (quadrature.order() < 2 * n as usize + 2).then(|| {
        format!(
            "quadrature order {} is below {} and may be inexact for n={n}",
            quadrature.order(),
            2 * n + 2
        )
    });
    let mut total = 0.0;
    for entry in state.entries() {
        let two_j = entry.state.sector().two_j();
        if two_j == 0 {
            total += entry.weight * 0.5;
            continue;
        }
        let sign = match rule {
            ReflectionRule::Identity => 1.0,
            ReflectionRule::ReflectWhenObtuse => {
                if sector_reduced_density(&entry.state).bloch.dot(&target) < 0.0 {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        let lambda = entry.state.lambda();
        let scale = (two_j + 1) as f64;
        let terms = exec.map(quadrature.nodes(), |(phi, w)| {
            let c = coherent_amplitudes(two_j, phi);
            let prob = (c.adjoint() * lambda * &c)[(0, 0)].re;
            w * scale * prob * 0.5 * (1.0 + sign * phi.dot(&target))
        });
        total += entry.weight * terms.iter().sum::<f64>();
    }
    Ok(PovmFidelity {
        value: EstimationFidelity {
            value: total,
            family: FidelityFamily::PerSector,
        },
        warning,
    })
}

/// `max |sum_nodes w (2j+1) |phi^{2j}><phi^{2j}| - 1|`.
pub fn povm_completeness_residual(two_j: u32, quadrature: &SphereQuadrature) -> f64 {
    let dim = two_j as usize + 1;
    let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
    for (phi, w) in quadrature.nodes() {
        let c = coherent_amplitudes(two_j, phi);
        sum += &c * c.adjoint() * Complex64::new(w * dim as f64, 0.0);
    }
    sum -= DMatrix::identity(dim, dim);
    sum.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Bloch vector of the average guess when the measurement is applied to
/// `|psi><psi|^{(x) n}`: `sum_nodes w (n+1) ((1 + phi.psi)/2)^n phi`.
pub fn estimate_map_bloch(n: u32, psi: &BlochVector, quadrature: &SphereQuadrature) -> BlochVector {
    quadrature
        .nodes()
        .iter()
        .fold(BlochVector::ZERO, |acc, (phi, w)| {
            let p = (0.5 * (1.0 + phi.dot(psi))).powi(n as i32);
            acc + (w * (n + 1) as f64 * p) * *phi
        })
}

fn estimate_map_trace(n: u32, psi: &BlochVector, quadrature: &SphereQuadrature) -> f64 {
    quadrature.integrate(|phi| (n + 1) as f64 * (0.5 * (1.0 + phi.dot(psi))).powi(n as i32))
}

/// Measured shrink factors and covariance residuals of the estimate map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub n: u32,
    pub expected_shrink: f64,
    pub mean_shrink: f64,
    /// `max - min` of the measured shrink over all trial directions.
    pub shrink_spread: f64,
    /// Largest component of the estimate orthogonal to the input direction.
    pub transverse_residual: f64,
    /// Largest `|1 - Tr E(psi)|`.
    pub trace_residual: f64,
    /// Largest `|E(R psi) - R E(psi)|` over random rotations.
    pub commutation_residual: f64,
}

impl CovarianceReport {
    pub fn max_residual(&self) -> f64 {
        (self.mean_shrink - self.expected_shrink)
            .abs()
            .max(self.shrink_spread)
            .max(self.transverse_residual)
            .max(self.trace_residual)
            .max(self.commutation_residual)
    }
}

fn to_vector(b: &BlochVector) -> Vector3<f64> {
    Vector3::new(b.x, b.y, b.z)
}

fn from_vector(v: &Vector3<f64>) -> BlochVector {
    BlochVector::new(v.x, v.y, v.z)
}

fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    let axis = Unit::new_normalize(to_vector(&random_direction(rng)));
    UnitQuaternion::from_axis_angle(&axis, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Checks that the estimate map sends `|psi><psi|^{(x) n}` to
/// `a |psi><psi| + (1 - a)/2` with `a = n/(n+2)` for every direction, and that it
/// commutes with rotations.
pub fn verify_covariance<R: Rng + ?Sized>(
    n: u32,
    trials: usize,
    rng: &mut R,
    quadrature: &SphereQuadrature,
) -> Result<CovarianceReport> {
    if n == 0 || trials == 0 {
        return Err(domain("need n >= 1 and at least one trial"));
    }
    let expected_shrink = n as f64 / (n as f64 + 2.0);
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    let (mut transverse, mut trace, mut commutation) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let psi = random_direction(rng);
        let est = estimate_map_bloch(n, &psi, quadrature);
        let a = est.dot(&psi);
        lo = lo.min(a);
        hi = hi.max(a);
        sum += a;
        transverse = transverse.max((est - a * psi).norm());
        trace = trace.max((estimate_map_trace(n, &psi, quadrature) - 1.0).abs());

        let rot = random_rotation(rng);
        let rotated_psi = from_vector(&(rot * to_vector(&psi)));
        let lhs = estimate_map_bloch(n, &rotated_psi, quadrature);
        let rhs = from_vector(&(rot * to_vector(&est)));
        commutation = commutation.max((lhs - rhs).norm());
    }
    Ok(CovarianceReport {
        n,
        expected_shrink,
        mean_shrink: sum / trials as f64,
        shrink_spread: hi - lo,
        transverse_residual: transverse,
        trace_residual: trace,
        commutation_residual: commutation,
    })
}
