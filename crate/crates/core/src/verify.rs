//! Cross-checks of the closed forms against the brute-force oracle.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exec::Execution;
use crate::fidelity::{f_known, f_known_optimal, f_prod, f_sym, f_unknown, ReflectionRule};
use crate::optimal_states::{
    canonical_sym_state, check_constraints, known_opt_config, known_opt_state, unknown_opt_config,
    unknown_opt_state,
};
use crate::oracle::{
    best_known_pair, best_unknown_vertex, build_coupled_basis, covariant_povm_fidelity,
    permutation_residual, povm_completeness_residual, schur_to_dense, sector_weights_of_product,
    verify_covariance, SphereQuadrature,
};
use crate::sampling::{random_direction, random_schur_state, random_schur_state_with_length};
use crate::spin_algebra::{reduce_full, validate_schur_state, BlochVector, SchurState, SpinSector};

/// Largest qubit count accepted by [`run_verification`].
pub const MAX_VERIFY_QUBITS: u32 = 8;

const R_GRID: [f64; 4] = [0.0, 0.3, 0.7, 1.0];
const R_PRODUCT: [f64; 3] = [0.1, 0.5, 0.9];
const RANDOM_STATES: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub n: u32,
    pub quadrature_order: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n={} quadrature_order={} seed={}",
            self.n, self.quadrature_order, self.seed
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for c in &self.checks {
            writeln!(
                f,
                "{} {} residual={:.3e} tolerance={:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            )?;
        }
        write!(
            f,
            "{} of {} checks passed",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        )
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Runs every oracle cross-check and invariant suite at `n` qubits.
///
/// `quadrature_order` defaults to `2n + 4`. The random checks are reproducible for
/// a fixed `seed`.
pub fn run_verification(
    n: u32,
    quadrature_order: Option<usize>,
    seed: u64,
    exec: Execution,
) -> Result<VerificationReport> {
    if n == 0 || n > MAX_VERIFY_QUBITS {
        return Err(domain(format!(
            "verification supports 1 <= n <= {MAX_VERIFY_QUBITS}, got {n}"
        )));
    }
    let quad = match quadrature_order {
        Some(k) => SphereQuadrature::new(k)?,
        None => SphereQuadrature::for_qubits(n),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let z = BlochVector::zhat();

    // Structure of the decomposition.
    let dim_sum: u128 = SpinSector::all(n)
        .map(|s| s.multiplicity() * s.dim() as u128)
        .sum();
    checks.push(Check::new(
        "dimension_identity",
        dim_sum.abs_diff(1u128 << n) as f64,
        0.0,
    ));

    let basis = build_coupled_basis(n)?;
    checks.push(Check::new(
        "basis_orthonormality",
        basis.orthonormality_residual(),
        1e-10,
    ));
    let path_mismatch = SpinSector::all(n)
        .map(|s| (basis.path_count(s.two_j()) as u128).abs_diff(s.multiplicity()) as f64)
        .fold(0.0, f64::max);
    checks.push(Check::new("basis_path_counts", path_mismatch, 0.0));

    // Families and random states embedded densely.
    let mut states: Vec<SchurState> = Vec::new();
    for &r in &R_GRID {
        let d = random_direction(&mut rng);
        states.push(canonical_sym_state(n, r, d)?);
        if n >= 2 {
            states.push(known_opt_state(n, r, d)?);
            states.push(unknown_opt_state(n, r, d)?);
        }
    }
    for _ in 0..10 {
        states.push(random_schur_state(n, &mut rng));
    }
    let mut perm = 0.0f64;
    let mut partial = 0.0f64;
    let mut dense_validity = 0.0f64;
    for state in &states {
        let dense = schur_to_dense(state, &basis)?;
        perm = perm.max(permutation_residual(&dense));
        partial = partial.max(dense.qubit_bloch(0)?.max_abs_diff(&reduce_full(state)));
        dense_validity = dense_validity
            .max(dense.hermitian_residual())
            .max((dense.trace() - 1.0).abs())
            .max((-dense.min_eigenvalue()).max(0.0));
    }
    checks.push(Check::new("dense_validity", dense_validity, 1e-10));
    checks.push(Check::new("permutation_invariance", perm, 1e-10));
    checks.push(Check::new("partial_trace_vs_reduction", partial, 1e-10));

    // Product states through the Casimir projectors.
    let mixed = sector_weights_of_product(n, 0.0, &basis)?;
    let counting = SpinSector::all(n)
        .map(|s| {
            let expected = s.multiplicity() as f64 * s.dim() as f64 / (1u64 << n) as f64;
            (mixed.weight(s.two_j()) - expected).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("mixed_product_weights", counting, 1e-10));
    let (mut sums, mut mismatch, mut spread, mut fid) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &r in &R_PRODUCT {
        let d = sector_weights_of_product(n, r, &basis)?;
        sums = sums.max((d.weight_sum() - 1.0).abs());
        mismatch = mismatch.max(d.weight_mismatch());
        spread = spread.max(d.alpha_spread());
        fid = fid.max((f_known(&d.to_schur_state())?.value - f_prod(n, r)?.value).abs());
    }
    checks.push(Check::new("product_weight_sum", sums, 1e-10));
    checks.push(Check::new("product_casimir_vs_blocks", mismatch, 1e-10));
    checks.push(Check::new("product_alpha_independence", spread, 1e-9));
    checks.push(Check::new("product_fidelity_vs_closed_form", fid, 1e-9));

    // Covariant measurement by quadrature.
    if quad.order() < 2 * n as usize + 2 {
        warnings.push(format!(
            "quadrature order {} is below {}; quadrature checks may be inexact",
            quad.order(),
            2 * n + 2
        ));
    }
    let completeness = max_of((0..=n).map(|two_j| povm_completeness_residual(two_j, &quad)));
    checks.push(Check::new("povm_completeness", completeness, 1e-8));

    let povm = |state: &SchurState, rule: ReflectionRule| -> Result<f64> {
        Ok(covariant_povm_fidelity(state, &quad, rule, exec)?
            .value
            .value)
    };
    let mut sym = 0.0f64;
    for &r in &R_GRID {
        let state = canonical_sym_state(n, r, random_direction(&mut rng))?;
        sym = sym.max((povm(&state, ReflectionRule::Identity)? - f_sym(n, r)?.value).abs());
    }
    checks.push(Check::new("povm_vs_symmetric", sym, 1e-7));
    if n >= 2 {
        let (mut known, mut unknown) = (0.0f64, 0.0f64);
        for &r in R_GRID.iter().filter(|&&r| r > 0.0) {
            let d = random_direction(&mut rng);
            let k = known_opt_state(n, r, d)?;
            let u = unknown_opt_state(n, r, d)?;
            known = known
                .max((povm(&k, ReflectionRule::ReflectWhenObtuse)? - f_known(&k)?.value).abs());
            unknown =
                unknown.max((povm(&u, ReflectionRule::Identity)? - f_unknown(&u)?.value).abs());
        }
        checks.push(Check::new("povm_vs_known_structure", known, 1e-7));
        checks.push(Check::new("povm_vs_unknown_structure", unknown, 1e-7));
    }
    if n <= 6 {
        let report = verify_covariance(n, 20, &mut rng, &quad)?;
        checks.push(Check::new(
            "covariance_shrink",
            (report.mean_shrink - report.expected_shrink).abs(),
            1e-7,
        ));
        checks.push(Check::new("covariance_spread", report.shrink_spread, 1e-7));
        checks.push(Check::new(
            "covariance_commutation",
            report.commutation_residual,
            1e-7,
        ));
    }

    // Closed forms against enumeration.
    if n >= 2 {
        let rs: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        let (mut closed, mut constraints, mut lp_known, mut lp_unknown) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &r in &rs {
            if r > 0.0 {
                let k = known_opt_state(n, r, z)?;
                closed = closed.max((f_known(&k)?.value - f_known_optimal(n, r)?.value).abs());
                let target = z.scale(r);
                constraints = constraints
                    .max(check_constraints(&k, &target).max_residual())
                    .max(check_constraints(&unknown_opt_state(n, r, z)?, &target).max_residual());
            }
            lp_known = lp_known
                .max(best_known_pair(n, r)?.delta_known() - known_opt_config(n, r)?.delta_known());
            lp_unknown = lp_unknown.max(
                best_unknown_vertex(n, r)?.delta_unknown()
                    - unknown_opt_config(n, r)?.delta_unknown(),
            );
        }
        checks.push(Check::new("known_closed_form", closed, 1e-12));
        checks.push(Check::new("optimal_state_constraints", constraints, 1e-10));
        checks.push(Check::new(
            "known_optimum_vs_enumeration",
            lp_known.max(0.0),
            1e-12,
        ));
        checks.push(Check::new(
            "unknown_optimum_vs_enumeration",
            lp_unknown.max(0.0),
            1e-12,
        ));
    }

    // Random states.
    let (mut invalid, mut worst) = (0.0f64, 0.0f64);
    for i in 0..RANDOM_STATES {
        let r = 0.05 + 0.9 * i as f64 / RANDOM_STATES as f64;
        let state = random_schur_state_with_length(n, r, &mut rng)?;
        invalid = invalid.max(validate_schur_state(&state).len() as f64);
        worst = worst.max(f_sym(n, r)?.value - f_known(&state)?.value);
    }
    checks.push(Check::new("random_state_validity", invalid, 0.0));
    checks.push(Check::new(
        "symmetric_state_is_worst",
        worst.max(0.0),
        1e-10,
    ));

    Ok(VerificationReport {
        n,
        quadrature_order: quad.order(),
        seed,
        warnings,
        checks,
    })
}
