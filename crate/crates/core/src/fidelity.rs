//! Closed-form direction-estimation fidelities and cloning shrink factors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spin_algebra::{
    ln_sector_multiplicity, reduce_full, sector_reduced_density, BlochVector, SchurState,
    SectorState, SpinSector,
};

/// Below this Bloch length [`f_prod`] switches to the exact polynomial expansion of
/// its bracket, avoiding the `(...)/r^2` cancellation.
pub const SERIES_CUTOFF: f64 = 1e-2;
/// Largest qubit count accepted by [`f_prod`]; binomials stay inside `f64` range.
pub const F_PROD_MAX_N: u32 = 1000;
/// Local Bloch lengths below this are treated as having no direction.
pub const DIRECTION_EPS: f64 = 1e-12;
/// Slack on the `r <= 1` domain check.
const LENGTH_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FidelityFamily {
    Sym,
    Prod,
    Known,
    Unknown,
    PerSector,
}

/// Whether the relative orientation of sector Bloch vectors is available to the
/// estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Known,
    Unknown,
}

impl FromStr for Structure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "known" => Ok(Structure::Known),
            "unknown" => Ok(Structure::Unknown),
            other => Err(domain(format!("unknown structure '{other}'"))),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Structure::Known => "known",
            Structure::Unknown => "unknown",
        })
    }
}

/// How a sector's direction guess is turned into a guess for the local direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReflectionRule {
    /// Use the sector guess as is.
    Identity,
    /// Invert the guess when the sector Bloch vector is obtuse to the local one.
    ReflectWhenObtuse,
}

impl From<Structure> for ReflectionRule {
    fn from(s: Structure) -> Self {
        match s {
            Structure::Known => ReflectionRule::ReflectWhenObtuse,
            Structure::Unknown => ReflectionRule::Identity,
        }
    }
}

/// An ensemble-averaged overlap between the true direction and the average guess.
///
/// Optimal strategies give values in `[1/2, 1]`; the signed unknown-structure rule
/// applied to an adversarial state can fall below `1/2`, so the range is not
/// enforced here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimationFidelity {
    pub value: f64,
    pub family: FidelityFamily,
}

impl EstimationFidelity {
    fn new(value: f64, family: FidelityFamily) -> Self {
        Self { value, family }
    }
}

/// Number of clones produced by a cloning machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloneCount {
    Finite(u32),
    Infinite,
}

impl FromStr for CloneCount {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(CloneCount::Infinite),
            other => other
                .parse::<u32>()
                .map(CloneCount::Finite)
                .map_err(|_| domain(format!("invalid clone count '{s}'"))),
        }
    }
}

/// Factor in `[0, 1]` by which a Bloch vector is shortened.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct ShrinkFactor(f64);

impl ShrinkFactor {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Shrink factor `N (M + 2) / (M (N + 2))` of the optimal universal `N -> M` qubit
/// cloner; `N / (N + 2)` for infinitely many clones.
pub fn shrink_cloning(n_in: u32, m_out: CloneCount) -> Result<ShrinkFactor> {
    if n_in == 0 {
        return Err(domain("at least one input copy is required"));
    }
    let n = n_in as f64;
    match m_out {
        CloneCount::Infinite => Ok(ShrinkFactor(n / (n + 2.0))),
        CloneCount::Finite(m) if m < n_in => Err(domain(format!(
            "cannot clone {n_in} copies into fewer ({m}) outputs"
        ))),
        CloneCount::Finite(m) => {
            let m = m as f64;
            Ok(ShrinkFactor(n * (m + 2.0) / (m * (n + 2.0))))
        }
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(domain("qubit count must be positive"));
    }
    Ok(())
}

fn check_length(r: f64) -> Result<f64> {
    if !(r.is_finite() && (0.0..=1.0 + LENGTH_SLACK).contains(&r)) {
        return Err(domain(format!("Bloch length {r} outside [0, 1]")));
    }
    Ok(r.min(1.0))
}

/// Optimal fidelity for any state on the symmetric subspace with local Bloch length
/// `r`: `(a r + 1) / 2` with the pure-state shrink `a = N / (N + 2)`.
pub fn f_sym(n: u32, r: f64) -> Result<EstimationFidelity> {
    check_n(n)?;
    let r = check_length(r)?;
    let a = shrink_cloning(n, CloneCount::Infinite)?.value();
    Ok(EstimationFidelity::new(
        (a * r + 1.0) / 2.0,
        FidelityFamily::Sym,
    ))
}

/// Coefficients of `B(r) / r^2` where
/// `B(r) = (1+r)^a ((2a+1) r - 1) + (1-r)^(a+1)`, lowest order first.
/// `B` vanishes to second order at `r = 0`, so the division is exact.
fn bracket_series(a: u32) -> Vec<f64> {
    // binomial rows C(a, k) and C(a+1, k) in f64
    let row = |n: u32| {
        let mut v = vec![1.0f64; n as usize + 1];
        for k in 1..=n as usize {
            v[k] = v[k - 1] * (n as usize - k + 1) as f64 / k as f64;
        }
        v
    };
    let ca = row(a);
    let ca1 = row(a + 1);
    let two_a1 = (2 * a + 1) as f64;
    (2..=a as usize + 1)
        .map(|k| {
            let shifted = if k - 1 <= a as usize { ca[k - 1] } else { 0.0 };
            let plain = if k <= a as usize { ca[k] } else { 0.0 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            two_a1 * shifted - plain + sign * ca1[k]
        })
        .collect()
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Optimal fidelity of estimating the Bloch direction from the product state
/// `rho^{(x) N}` with local Bloch length `r`.
///
/// `r = 0` returns the removable-singularity limit `1/2`.
pub fn f_prod(n: u32, r: f64) -> Result<EstimationFidelity> {
    check_n(n)?;
    if n > F_PROD_MAX_N {
        return Err(Error::Resource(format!(
            "f_prod supports n <= {F_PROD_MAX_N}, got {n}"
        )));
    }
    let r = check_length(r)?;
    if r == 0.0 {
        return Ok(EstimationFidelity::new(0.5, FidelityFamily::Prod));
    }
    let ln2 = std::f64::consts::LN_2;
    let nf = n as f64;
    let mut total = 0.0;
    for sector in SpinSector::all(n) {
        let j = sector.j();
        let a = sector.two_j() + 1;
        let pairs = sector.singlet_pairs();
        let ln_dj = ln_sector_multiplicity(n, sector.two_j())?;
        let ln_prefactor = ln_dj - (nf + 3.0) * ln2 - (j + 1.0).ln();
        let mixed = if pairs == 0 {
            1.0
        } else if r == 1.0 {
            0.0
        } else {
            (pairs as f64 * (1.0 - r * r).ln()).exp()
        };
        if mixed == 0.0 {
            continue;
        }
        let term = if r < SERIES_CUTOFF {
            (ln_prefactor).exp() * horner(&bracket_series(a), r)
        } else {
            // B(r)/r^2 = (1+r)^a [ (2a+1) r - 1 + (1-r) ((1-r)/(1+r))^a ] / r^2
            let ratio = ((1.0 - r) / (1.0 + r)).powi(a as i32);
            let inner = (2 * a + 1) as f64 * r - 1.0 + (1.0 - r) * ratio;
            (ln_prefactor + a as f64 * r.ln_1p() - 2.0 * r.ln()).exp() * inner
        };
        total += mixed * term;
    }
    Ok(EstimationFidelity::new(total, FidelityFamily::Prod))
}

/// Contribution `(1/2)(1 + j/(j+1) s (r_j . rhat))` of one sector, where `s = -1`
/// when the rule reflects an obtuse sector vector and `+1` otherwise.
pub fn sector_fidelity(state: &SectorState, target: &BlochVector, rule: ReflectionRule) -> f64 {
    let r_j = sector_reduced_density(state).bloch;
    let overlap = r_j.dot(target);
    let signed = match rule {
        ReflectionRule::Identity => overlap,
        ReflectionRule::ReflectWhenObtuse => overlap.abs(),
    };
    0.5 * (1.0 + state.sector().shrink() * signed)
}

fn structured_fidelity(state: &SchurState, rule: ReflectionRule) -> Result<f64> {
    let rhat = reduce_full(state);
    let r = rhat.norm();
    if r < DIRECTION_EPS {
        return Err(Error::DirectionUndefined);
    }
    let rhat = rhat.scale(1.0 / r);
    Ok(state
        .entries()
        .iter()
        .map(|e| e.weight * sector_fidelity(&e.state, &rhat, rule))
        .sum())
}

/// Fidelity when the correlation structure is known: every sector whose Bloch
/// vector is obtuse to the local one has its guesses reflected.
pub fn f_known(state: &SchurState) -> Result<EstimationFidelity> {
    structured_fidelity(state, ReflectionRule::ReflectWhenObtuse)
        .map(|v| EstimationFidelity::new(v, FidelityFamily::Known))
}

/// Fidelity when the correlation structure is unknown: sector guesses are used
/// without reflection.
pub fn f_unknown(state: &SchurState) -> Result<EstimationFidelity> {
    structured_fidelity(state, ReflectionRule::Identity)
        .map(|v| EstimationFidelity::new(v, FidelityFamily::Unknown))
}

/// `(N^2 + r - 2) / ((N - 1)(N + 2))`, the best fidelity over all
/// permutation-invariant states with local length `r` when the structure is known.
///
/// `r = 0` is accepted and returns the `r -> 0+` limit.
pub fn f_known_optimal(n: u32, r: f64) -> Result<EstimationFidelity> {
    if n < 2 {
        return Err(domain("the known-structure optimum needs n >= 2"));
    }
    let r = check_length(r)?;
    let nf = n as f64;
    Ok(EstimationFidelity::new(
        (nf * nf + r - 2.0) / ((nf - 1.0) * (nf + 2.0)),
        FidelityFamily::Known,
    ))
}

/// Leading-order large-`N` fidelity: `1 - 1/N` (known) or `1 - 1/(rN)` (unknown),
/// clamped to `[1/2, 1]`.
pub fn asymptotic_fidelity(n: u32, r: f64, structure: Structure) -> Result<EstimationFidelity> {
    check_n(n)?;
    let r = check_length(r)?;
    if r == 0.0 {
        return Err(domain("asymptotic law needs r > 0"));
    }
    let nf = n as f64;
    let (value, family) = match structure {
        Structure::Known => (1.0 - 1.0 / nf, FidelityFamily::Known),
        Structure::Unknown => (1.0 - 1.0 / (r * nf), FidelityFamily::Unknown),
    };
    Ok(EstimationFidelity::new(value.clamp(0.5, 1.0), family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::SchurEntry;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Direct transcription of the product-state closed form, valid away from r = 0.
    fn f_prod_naive(n: u32, r: f64) -> f64 {
        SpinSector::all(n)
            .map(|s| {
                let j = s.j();
                let d = s.multiplicity() as f64;
                d * (1.0 - r * r).powf(n as f64 / 2.0 - j)
                    / (2f64.powi(n as i32 + 3) * r * r * (j + 1.0))
                    * ((1.0 + r).powf(2.0 * j + 1.0) * (r * (3.0 + 4.0 * j) - 1.0)
                        + (1.0 - r).powf(2.0 + 2.0 * j))
            })
            .sum()
    }

    fn collinear(n: u32, parts: &[(u32, f64, f64)]) -> SchurState {
        SchurState::new(
            n,
            parts
                .iter()
                .map(|&(two_j, w, s)| SchurEntry {
                    weight: w,
                    state: SectorState::collinear(
                        SpinSector::new(n, two_j).unwrap(),
                        s,
                        &BlochVector::zhat(),
                    )
                    .unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn shrink_examples() {
        assert_abs_diff_eq!(
            shrink_cloning(1, CloneCount::Finite(2)).unwrap().value(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
        for n in 1..20 {
            assert_abs_diff_eq!(
                shrink_cloning(n, CloneCount::Finite(n)).unwrap().value(),
                1.0,
                epsilon = 1e-15
            );
        }
        assert_abs_diff_eq!(
            shrink_cloning(3, CloneCount::Infinite).unwrap().value(),
            0.6,
            epsilon = 1e-15
        );
        assert!(shrink_cloning(3, CloneCount::Finite(2)).is_err());
        assert!(shrink_cloning(0, CloneCount::Infinite).is_err());
        assert_eq!("inf".parse::<CloneCount>().unwrap(), CloneCount::Infinite);
        assert_eq!("7".parse::<CloneCount>().unwrap(), CloneCount::Finite(7));
    }

    #[test]
    fn f_sym_examples() {
        assert_abs_diff_eq!(f_sym(2, 1.0).unwrap().value, 0.75, epsilon = 1e-15);
        for n in 1..10 {
            assert_eq!(f_sym(n, 0.0).unwrap().value, 0.5);
        }
        assert_abs_diff_eq!(f_sym(6, 0.5).unwrap().value, 0.6875, epsilon = 1e-15);
        assert!(f_sym(3, 1.5).is_err());
        assert!(f_sym(3, -0.1).is_err());
    }

    #[test]
    fn f_prod_examples() {
        assert_abs_diff_eq!(f_prod(1, 1.0).unwrap().value, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(f_prod(5, 0.0).unwrap().value, 0.5);
        let mid = f_prod(6, 0.5).unwrap().value;
        assert!(mid > 0.6875 && mid < 0.791667, "{mid}");
        // frozen from an independent double-precision transcription of the closed form
        assert_abs_diff_eq!(mid, 0.7353515625, epsilon = 1e-13);
        assert!(f_prod(3, 1.2).is_err());
        assert!(f_prod(F_PROD_MAX_N + 1, 0.5).is_err());
    }

    #[test]
    fn f_prod_pure_endpoint() {
        for n in 1..=20u32 {
            let expected = (n as f64 + 1.0) / (n as f64 + 2.0);
            assert_abs_diff_eq!(f_prod(n, 1.0).unwrap().value, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn f_prod_matches_naive_transcription() {
        for n in 1..=30u32 {
            for &r in &[0.05, 0.2, 0.5, 0.77, 0.95] {
                let got = f_prod(n, r).unwrap().value;
                assert_abs_diff_eq!(got, f_prod_naive(n, r), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn f_prod_series_and_direct_paths_meet() {
        for n in [1u32, 2, 5, 12, 40, 41, 100, 400] {
            let below = f_prod(n, SERIES_CUTOFF * (1.0 - 1e-13)).unwrap().value;
            let above = f_prod(n, SERIES_CUTOFF).unwrap().value;
            assert_abs_diff_eq!(below, above, epsilon = 1e-11);
            // tiny r approaches the limit 1/2 smoothly
            let tiny = f_prod(n, 1e-9).unwrap().value;
            assert!(tiny >= 0.5 && tiny - 0.5 < 1e-7, "n={n}: {tiny}");
        }
    }

    #[test]
    fn bracket_series_reproduces_bracket() {
        for a in 1..12u32 {
            let coeffs = bracket_series(a);
            for &r in &[0.1, 0.4, 0.9] {
                let direct = (1.0f64 + r).powi(a as i32) * ((2 * a + 1) as f64 * r - 1.0)
                    + (1.0 - r).powi(a as i32 + 1);
                assert_abs_diff_eq!(horner(&coeffs, r) * r * r, direct, epsilon = 1e-9);
            }
            // B(r)/r^2 -> 2a(a+1) as r -> 0
            assert_abs_diff_eq!(coeffs[0], 2.0 * a as f64 * (a as f64 + 1.0), epsilon = 1e-9);
        }
    }

    #[test]
    fn known_and_unknown_examples() {
        let pure = collinear(6, &[(6, 1.0, 1.0)]);
        assert_abs_diff_eq!(f_known(&pure).unwrap().value, 0.875, epsilon = 1e-15);

        let known = collinear(6, &[(6, 0.7, 1.0), (4, 0.3, -1.0)]);
        assert_abs_diff_eq!(f_known(&known).unwrap().value, 0.8625, epsilon = 1e-14);
        assert_abs_diff_eq!(
            f_known_optimal(6, 0.5).unwrap().value,
            0.8625,
            epsilon = 1e-15
        );

        let parallel = collinear(6, &[(4, 0.5, 1.0), (2, 0.5, 1.0)]);
        assert_abs_diff_eq!(
            f_unknown(&parallel).unwrap().value,
            0.5 * (1.0 + 1.0 / 3.0 + 0.25),
            epsilon = 1e-14
        );
        assert_eq!(
            f_unknown(&parallel).unwrap().value,
            f_known(&parallel).unwrap().value
        );

        let low = collinear(6, &[(2, 0.825, 1.0), (6, 0.175, -1.0)]);
        assert_abs_diff_eq!(f_unknown(&low).unwrap().value, 0.640625, epsilon = 1e-14);

        let singlet = collinear(2, &[(0, 1.0, 0.0)]);
        assert_eq!(f_known(&singlet), Err(Error::DirectionUndefined));
        assert_eq!(f_unknown(&singlet), Err(Error::DirectionUndefined));
    }

    #[test]
    fn known_optimal_examples() {
        for n in 2..30u32 {
            let nf = n as f64;
            assert_abs_diff_eq!(
                f_known_optimal(n, 1.0).unwrap().value,
                (nf + 1.0) / (nf + 2.0),
                epsilon = 1e-15
            );
            // r -> 0 limit stays above random guessing
            let floor = f_known_optimal(n, 0.0).unwrap().value;
            assert_abs_diff_eq!(
                floor,
                (nf * nf - 2.0) / ((nf - 1.0) * (nf + 2.0)),
                epsilon = 1e-15
            );
            assert!(floor > 0.5 || n == 2);
        }
        let f = f_known_optimal(200, 0.01).unwrap().value;
        assert!(((1.0 - f) * 200.0 - 1.0).abs() < 0.02);
        assert!(f_known_optimal(1, 0.5).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        assert_abs_diff_eq!(
            asymptotic_fidelity(1000, 0.3, Structure::Known)
                .unwrap()
                .value,
            0.999,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            asymptotic_fidelity(1000, 0.5, Structure::Unknown)
                .unwrap()
                .value,
            0.998,
            epsilon = 1e-15
        );
        for n in [3u32, 10, 77] {
            assert_eq!(
                asymptotic_fidelity(n, 1.0, Structure::Unknown)
                    .unwrap()
                    .value,
                asymptotic_fidelity(n, 1.0, Structure::Known).unwrap().value
            );
        }
        assert_eq!(
            asymptotic_fidelity(2, 0.1, Structure::Unknown)
                .unwrap()
                .value,
            0.5
        );
    }

    proptest! {
        #[test]
        fn f_sym_monotone(n in 1u32..200, r in 0.0f64..0.99, dr in 1e-6f64..0.01) {
            let base = f_sym(n, r).unwrap().value;
            prop_assert!(f_sym(n, r + dr).unwrap().value > base);
            prop_assert!(r == 0.0 || f_sym(n + 1, r).unwrap().value > base);
        }

        #[test]
        fn f_prod_between_sym_and_one(n in 1u32..60, r in 0.0f64..=1.0) {
            let p = f_prod(n, r).unwrap().value;
            let s = f_sym(n, r).unwrap().value;
            prop_assert!(p >= s - 1e-10, "n={} r={} prod={} sym={}", n, r, p, s);
            prop_assert!(p <= 1.0);
        }

        #[test]
        fn known_dominates_unknown(
            w in 0.0f64..1.0, s1 in -1.0f64..1.0, s2 in -1.0f64..1.0, s3 in -1.0f64..1.0, split in 0.0f64..1.0,
        ) {
            let state = collinear(6, &[(6, w, s1), (4, (1.0 - w) * split, s2), (2, (1.0 - w) * (1.0 - split), s3)]);
            if let (Ok(k), Ok(u)) = (f_known(&state), f_unknown(&state)) {
                prop_assert!(k.value >= u.value - 1e-15);
            }
        }
    }
}
