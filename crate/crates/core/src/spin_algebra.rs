//! Total-spin sectors of `N` qubits and Schur-parameterised permutation-invariant
//! states.
//!
//! Spins are carried as doubled integers (`two_j`, `two_m`) so half-integer labels
//! stay exact. Sector matrices are stored with row/column `i` holding the magnetic
//! number `two_m = two_j - 2 i`, i.e. the top state `m = +j` comes first. Matrix
//! elements are ordinary density-matrix entries `lambda[(i, k)] = <j,m_i| rho_j |j,m_k>`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Allowed deviation of `sum p_j` from one.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Allowed deviation of a sector trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Allowed anti-Hermitian residual of a sector matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semi-definite.
pub const PSD_FLOOR: f64 = -1e-10;

/// A total-spin sector of `n` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinSector {
    n: u32,
    two_j: u32,
}

impl SpinSector {
    pub fn new(n: u32, two_j: u32) -> Result<Self> {
        if n == 0 {
            return Err(domain("qubit count must be positive"));
        }
        if two_j > n {
            return Err(domain(format!("two_j={two_j} exceeds n={n}")));
        }
        if !(n - two_j).is_multiple_of(2) {
            return Err(domain(format!(
                "two_j={two_j} has the wrong parity for n={n}"
            )));
        }
        Ok(Self { n, two_j })
    }

    /// The symmetric (maximal spin) sector `j = N/2`.
    pub fn symmetric(n: u32) -> Result<Self> {
        Self::new(n, n)
    }

    /// All sectors of `n` qubits in increasing spin order, `j = s, s+1, ..., N/2`.
    pub fn all(n: u32) -> impl DoubleEndedIterator<Item = SpinSector> {
        (0..=n / 2).map(move |k| SpinSector {
            n,
            two_j: n % 2 + 2 * k,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Dimension `2j + 1` of the SU(2) irrep.
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Number of singlet pairs traced out when reducing to the `(j, 1)` block.
    pub fn singlet_pairs(&self) -> u32 {
        (self.n - self.two_j) / 2
    }

    /// `two_m` of row `index`.
    pub fn two_m(&self, index: usize) -> i64 {
        self.two_j as i64 - 2 * index as i64
    }

    pub fn multiplicity(&self) -> u128 {
        multiplicity_unchecked(self.n, self.two_j).expect("multiplicity overflow")
    }

    /// Optimal single-sector shrink factor `j/(j+1)`.
    pub fn shrink(&self) -> f64 {
        self.two_j as f64 / (self.two_j as f64 + 2.0)
    }
}

impl fmt::Display for SpinSector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_j.is_multiple_of(2) {
            write!(f, "j={}", self.two_j / 2)
        } else {
            write!(f, "j={}/2", self.two_j)
        }
    }
}

fn binomial_u128(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn multiplicity_unchecked(n: u32, two_j: u32) -> Option<u128> {
    let k = (n - two_j) / 2;
    let upper = binomial_u128(n, k)?;
    let lower = if k == 0 { 0 } else { binomial_u128(n, k - 1)? };
    Some(upper - lower)
}

/// Multiplicity `d_j` of the spin-`j` irrep among `n` qubits, in exact integer
/// arithmetic: `C(N, N/2 - j) - C(N, N/2 - j - 1)`, with `d_{N/2} = 1`.
pub fn sector_multiplicity(n: u32, two_j: u32) -> Result<u128> {
    SpinSector::new(n, two_j)?;
    multiplicity_unchecked(n, two_j)
        .ok_or_else(|| Error::Resource(format!("multiplicity for n={n} overflows u128")))
}

/// Natural log of `d_j`, usable far beyond the exact-integer range.
pub fn ln_sector_multiplicity(n: u32, two_j: u32) -> Result<f64> {
    SpinSector::new(n, two_j)?;
    if n <= 64 {
        return Ok((multiplicity_unchecked(n, two_j).unwrap() as f64).ln());
    }
    let k = (n - two_j) / 2;
    // d_j = C(N,k) (N - 2k + 1) / (N - k + 1)
    let ln_binom: f64 = (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
    Ok(ln_binom + ((n - 2 * k + 1) as f64).ln() - ((n - k + 1) as f64).ln())
}

/// A real 3-vector on (or inside) the Bloch ball.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zhat() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let r = self.norm();
        (r > 0.0).then(|| self.scale(1.0 / r))
    }

    pub fn max_abs_diff(&self, other: &BlochVector) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    /// Polar and azimuthal angles `(theta, phi)` of the direction.
    pub fn angles(&self) -> (f64, f64) {
        let r = self.norm();
        if r == 0.0 {
            return (0.0, 0.0);
        }
        ((self.z / r).clamp(-1.0, 1.0).acos(), self.y.atan2(self.x))
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        self.scale(-1.0)
    }
}

impl Mul<BlochVector> for f64 {
    type Output = BlochVector;
    fn mul(self, v: BlochVector) -> BlochVector {
        v.scale(self)
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Amplitudes of the spin coherent state `|n>^{(x) 2j}` in the `|j, m>` basis
/// (top state first). The single-qubit state is `cos(t/2)|up> + e^{i p} sin(t/2)|down>`.
pub fn coherent_amplitudes(two_j: u32, direction: &BlochVector) -> DVector<Complex64> {
    let dim = two_j as usize + 1;
    let (theta, phi) = direction.angles();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    if two_j == 0 {
        return DVector::from_element(1, Complex64::new(1.0, 0.0));
    }
    if s < 1e-300 {
        let mut v = DVector::zeros(dim);
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    if c < 1e-300 {
        let mut v = DVector::zeros(dim);
        v[dim - 1] = Complex64::from_polar(1.0, phi * two_j as f64);
        return v;
    }
    // theta lies in [0, pi], so both half-angle factors are non-negative.
    let (ln_c, ln_s) = (c.ln(), s.ln());
    let mut ln_binom = 0.0;
    DVector::from_fn(dim, |k, _| {
        if k > 0 {
            ln_binom += ((two_j as usize - k + 1) as f64 / k as f64).ln();
        }
        let ln_mag = 0.5 * ln_binom + (two_j as usize - k) as f64 * ln_c + k as f64 * ln_s;
        Complex64::from_polar(ln_mag.exp(), phi * k as f64)
    })
}

/// Single-particle reduction of a sector state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorReduction {
    /// `<up| rho_j |up>`.
    pub a: f64,
    /// `<down| rho_j |down>`.
    pub b: f64,
    /// `<up| rho_j |down>`.
    pub c: Complex64,
    pub bloch: BlochVector,
}

impl SectorReduction {
    /// `sqrt((A - B)^2 + 4|C|^2)`, the length of the sector Bloch vector.
    pub fn length(&self) -> f64 {
        ((self.a - self.b).powi(2) + 4.0 * self.c.norm_sqr()).sqrt()
    }
}

/// A `(2j+1) x (2j+1)` density matrix on one spin-`j` irrep.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorState {
    sector: SpinSector,
    lambda: DMatrix<Complex64>,
}

impl SectorState {
    /// Validating constructor.
    pub fn new(sector: SpinSector, lambda: DMatrix<Complex64>) -> Result<Self> {
        let state = Self::new_unchecked(sector, lambda)?;
        if let Some(v) = state.violations().into_iter().next() {
            return Err(domain(v.to_string()));
        }
        Ok(state)
    }

    /// Builds a sector state checking only the shape.
    pub fn new_unchecked(sector: SpinSector, lambda: DMatrix<Complex64>) -> Result<Self> {
        if lambda.nrows() != sector.dim() || lambda.ncols() != sector.dim() {
            return Err(domain(format!(
                "sector {sector} needs a {0}x{0} matrix, got {1}x{2}",
                sector.dim(),
                lambda.nrows(),
                lambda.ncols()
            )));
        }
        Ok(Self { sector, lambda })
    }

    /// Pure state `|v><v|` for a normalized amplitude vector `v`.
    pub fn pure(sector: SpinSector, amplitudes: &DVector<Complex64>) -> Result<Self> {
        Self::new(sector, amplitudes * amplitudes.adjoint())
    }

    /// `I / (2j+1)`.
    pub fn maximally_mixed(sector: SpinSector) -> Self {
        let d = sector.dim();
        Self {
            sector,
            lambda: DMatrix::identity(d, d).map(|x: Complex64| x / d as f64),
        }
    }

    /// Mixture `q |dir><dir| + (1 - q) |-dir><-dir|` of the two antipodal coherent
    /// states of the sector. Along `z` this is `diag(q, 0, ..., 0, 1 - q)`.
    pub fn extremal(sector: SpinSector, q: f64, direction: &BlochVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(domain(format!("mixing weight {q} outside [0, 1]")));
        }
        let up = coherent_amplitudes(sector.two_j, direction);
        let down = coherent_amplitudes(sector.two_j, &-*direction);
        let lambda =
            (&up * up.adjoint()).map(|x| x * q) + (&down * down.adjoint()).map(|x| x * (1.0 - q));
        Ok(Self { sector, lambda })
    }

    /// Sector state whose reduced Bloch vector is `signed_length * direction`.
    pub fn collinear(
        sector: SpinSector,
        signed_length: f64,
        direction: &BlochVector,
    ) -> Result<Self> {
        Self::extremal(sector, (1.0 + signed_length) / 2.0, direction)
    }

    pub fn sector(&self) -> SpinSector {
        self.sector
    }

    pub fn lambda(&self) -> &DMatrix<Complex64> {
        &self.lambda
    }

    pub fn trace(&self) -> f64 {
        self.lambda.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermitian_residual(&self) -> f64 {
        let diff = &self.lambda - self.lambda.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.lambda + self.lambda.adjoint()).map(|z| z * 0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    fn violations(&self) -> Vec<Violation> {
        let two_j = self.sector.two_j;
        let mut out = Vec::new();
        let herm = self.hermitian_residual();
        if herm > HERMITIAN_TOL {
            out.push(Violation::NotHermitian {
                two_j,
                residual: herm,
            });
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            out.push(Violation::Trace { two_j, trace });
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < PSD_FLOOR {
            out.push(Violation::NotPsd {
                two_j,
                min_eigenvalue: min_eig,
            });
        }
        out
    }

    /// Conjugates the sector matrix by `exp(-i phi J_z)`, a rotation about `z`.
    pub fn rotate_about_z(&self, phi: f64) -> Self {
        let sector = self.sector;
        let lambda = DMatrix::from_fn(sector.dim(), sector.dim(), |a, b| {
            let dm = (sector.two_m(a) - sector.two_m(b)) as f64 / 2.0;
            self.lambda[(a, b)] * Complex64::from_polar(1.0, -phi * dm)
        });
        Self { sector, lambda }
    }
}

/// Single-particle reduced density matrix of a sector state and its Bloch vector.
///
/// For `two_j = 0` the reduction is maximally mixed and the Bloch vector is zero.
pub fn sector_reduced_density(state: &SectorState) -> SectorReduction {
    let sector = state.sector;
    let two_j = sector.two_j as f64;
    if sector.two_j == 0 {
        return SectorReduction {
            a: 0.5,
            b: 0.5,
            c: Complex64::new(0.0, 0.0),
            bloch: BlochVector::ZERO,
        };
    }
    let lambda = &state.lambda;
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..sector.dim() {
        let two_m = sector.two_m(i) as f64;
        let p = lambda[(i, i)].re;
        a += (two_j + two_m) / (2.0 * two_j) * p;
        b += (two_j - two_m) / (2.0 * two_j) * p;
    }
    let mut c = Complex64::new(0.0, 0.0);
    // Row i holds m, row i + 1 holds m - 1.
    for i in 0..sector.two_j as usize {
        let two_m = sector.two_m(i) as f64;
        let coeff = ((two_j + two_m) / 2.0 * (two_j - two_m + 2.0) / 2.0).sqrt();
        c += lambda[(i, i + 1)] * coeff;
    }
    c /= two_j;
    SectorReduction {
        a,
        b,
        c,
        bloch: BlochVector::new(2.0 * c.re, -2.0 * c.im, a - b),
    }
}

/// One weighted sector of a [`SchurState`].
#[derive(Clone, Debug, PartialEq)]
pub struct SchurEntry {
    pub weight: f64,
    pub state: SectorState,
}

/// A permutation-invariant `N`-qubit state `sum_j p_j / d_j sum_alpha rho_{j,alpha}`,
/// stored through the `alpha = 1` representative of each sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurState {
    n: u32,
    entries: Vec<SchurEntry>,
}

impl SchurState {
    /// Validating constructor; rejects any state with a [`Violation`].
    pub fn new(n: u32, entries: Vec<SchurEntry>) -> Result<Self> {
        let state = Self::new_unchecked(n, entries);
        let report = validate_schur_state(&state);
        if let Some(v) = report.first() {
            return Err(domain(v.to_string()));
        }
        Ok(state)
    }

    pub fn new_unchecked(n: u32, entries: Vec<SchurEntry>) -> Self {
        Self { n, entries }
    }

    /// A state carried entirely by one sector.
    pub fn single(state: SectorState) -> Self {
        Self {
            n: state.sector.n,
            entries: vec![SchurEntry { weight: 1.0, state }],
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn entries(&self) -> &[SchurEntry] {
        &self.entries
    }

    /// Weight of the given sector, zero when absent.
    pub fn weight(&self, two_j: u32) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.state.sector.two_j == two_j)
            .map(|e| e.weight)
            .sum()
    }

    pub fn entry(&self, two_j: u32) -> Option<&SchurEntry> {
        self.entries.iter().find(|e| e.state.sector.two_j == two_j)
    }

    /// Applies `f` to every sector state.
    pub fn map_sectors(&self, f: impl Fn(&SectorState) -> SectorState) -> Self {
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| SchurEntry {
                    weight: e.weight,
                    state: f(&e.state),
                })
                .collect(),
        }
    }

    /// The convex mixture `(1 - t) self + t other` of the full density matrices.
    pub fn mix(&self, other: &SchurState, t: f64) -> Result<SchurState> {
        if self.n != other.n {
            return Err(domain("cannot mix states of different qubit counts"));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(domain(format!("mixing parameter {t} outside [0, 1]")));
        }
        let mut entries = Vec::new();
        for sector in SpinSector::all(self.n) {
            let pa = (1.0 - t) * self.weight(sector.two_j);
            let pb = t * other.weight(sector.two_j);
            let p = pa + pb;
            if p <= 0.0 {
                continue;
            }
            let mut lambda = DMatrix::zeros(sector.dim(), sector.dim());
            if let Some(e) = self.entry(sector.two_j) {
                lambda += e.state.lambda.map(|z| z * (pa / p));
            }
            if let Some(e) = other.entry(sector.two_j) {
                lambda += e.state.lambda.map(|z| z * (pb / p));
            }
            entries.push(SchurEntry {
                weight: p,
                state: SectorState { sector, lambda },
            });
        }
        Ok(SchurState { n: self.n, entries })
    }
}

/// Local Bloch vector `(2/N) sum_j p_j j r_j` of a Schur-parameterised state.
pub fn reduce_full(state: &SchurState) -> BlochVector {
    let n = state.n as f64;
    state
        .entries
        .iter()
        .filter(|e| e.state.sector.two_j > 0)
        .fold(BlochVector::ZERO, |acc, e| {
            let r_j = sector_reduced_density(&e.state).bloch;
            acc + r_j.scale(e.weight * e.state.sector.two_j as f64 / n)
        })
}

/// A broken invariant found by [`validate_schur_state`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NegativeWeight {
        two_j: u32,
        weight: f64,
    },
    WeightSum {
        sum: f64,
    },
    QubitCount {
        two_j: u32,
        expected: u32,
        found: u32,
    },
    InvalidSector {
        n: u32,
        two_j: u32,
    },
    DuplicateSector {
        two_j: u32,
    },
    NotHermitian {
        two_j: u32,
        residual: f64,
    },
    Trace {
        two_j: u32,
        trace: f64,
    },
    NotPsd {
        two_j: u32,
        min_eigenvalue: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeWeight { two_j, weight } => {
                write!(f, "sector two_j={two_j} has negative weight {weight}")
            }
            Violation::WeightSum { sum } => write!(f, "weights sum {sum} ≠ 1"),
            Violation::QubitCount {
                two_j,
                expected,
                found,
            } => write!(
                f,
                "sector two_j={two_j} belongs to n={found}, expected n={expected}"
            ),
            Violation::InvalidSector { n, two_j } => {
                write!(f, "sector two_j={two_j} is not allowed for n={n}")
            }
            Violation::DuplicateSector { two_j } => {
                write!(f, "sector two_j={two_j} appears more than once")
            }
            Violation::NotHermitian { two_j, residual } => {
                write!(
                    f,
                    "sector two_j={two_j} not Hermitian (residual {residual:e})"
                )
            }
            Violation::Trace { two_j, trace } => {
                write!(f, "sector two_j={two_j} has trace {trace} ≠ 1")
            }
            Violation::NotPsd {
                two_j,
                min_eigenvalue,
            } => write!(
                f,
                "sector two_j={two_j} not PSD (min eigenvalue {min_eigenvalue:e})"
            ),
        }
    }
}

/// Checks every invariant of a Schur state and lists what is broken.
pub fn validate_schur_state(state: &SchurState) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = Vec::new();
    let mut sum = 0.0;
    for e in &state.entries {
        let sector = e.state.sector;
        let two_j = sector.two_j;
        if sector.n != state.n {
            out.push(Violation::QubitCount {
                two_j,
                expected: state.n,
                found: sector.n,
            });
        } else if SpinSector::new(state.n, two_j).is_err() {
            out.push(Violation::InvalidSector { n: state.n, two_j });
        }
        if seen.contains(&two_j) {
            out.push(Violation::DuplicateSector { two_j });
        }
        seen.push(two_j);
        if e.weight < 0.0 {
            out.push(Violation::NegativeWeight {
                two_j,
                weight: e.weight,
            });
        }
        sum += e.weight;
        out.extend(e.state.violations());
    }
    if (sum - 1.0).abs() > WEIGHT_TOL {
        out.push(Violation::WeightSum { sum });
    }
    out
}
