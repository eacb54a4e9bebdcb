use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::basis::CoupledBasis;
use super::check_dense_size;
use crate::error::{domain, Error, Result};
use crate::spin_algebra::{BlochVector, SchurEntry, SchurState, SectorState, SpinSector};

/// Grouping tolerance for Casimir eigenvalues.
const CASIMIR_TOL: f64 = 1e-8;

/// An explicit `2^N x 2^N` density matrix.
#[derive(Clone, Debug)]
pub struct DenseState {
    n: u32,
    matrix: DMatrix<Complex64>,
}

impl DenseState {
    pub fn new(n: u32, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_dense_size(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(domain(format!("expected a {dim}x{dim} matrix for n={n}")));
        }
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermitian_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Reduced state of one qubit (0-based, qubit 0 is the most significant bit).
    pub fn reduced_qubit(&self, qubit: u32) -> Result<[[Complex64; 2]; 2]> {
        if qubit >= self.n {
            return Err(domain(format!(
                "qubit {qubit} out of range for n={}",
                self.n
            )));
        }
        let shift = self.n - 1 - qubit;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for row in 0..self.matrix.nrows() {
            let rest = row & !(1 << shift);
            for (a, out_row) in out.iter_mut().enumerate() {
                if (row >> shift) & 1 != a {
                    continue;
                }
                for (b, slot) in out_row.iter_mut().enumerate() {
                    *slot += self.matrix[(row, rest | (b << shift))];
                }
            }
        }
        Ok(out)
    }

    /// Bloch vector of one qubit's reduced state.
    pub fn qubit_bloch(&self, qubit: u32) -> Result<BlochVector> {
        let rho = self.reduced_qubit(qubit)?;
        let c = rho[0][1];
        Ok(BlochVector::new(
            2.0 * c.re,
            -2.0 * c.im,
            rho[0][0].re - rho[1][1].re,
        ))
    }

    /// `Pi rho Pi^dag` for the permutation exchanging qubits `a` and `b`.
    pub fn swapped(&self, a: u32, b: u32) -> DenseState {
        let dim = self.matrix.nrows();
        let perm: Vec<usize> = (0..dim).map(|i| swap_bits(i, self.n, a, b)).collect();
        let matrix = DMatrix::from_fn(dim, dim, |r, c| self.matrix[(perm[r], perm[c])]);
        DenseState { n: self.n, matrix }
    }
}

fn swap_bits(index: usize, n: u32, a: u32, b: u32) -> usize {
    let (sa, sb) = (n - 1 - a, n - 1 - b);
    let (ba, bb) = ((index >> sa) & 1, (index >> sb) & 1);
    if ba == bb {
        index
    } else {
        index ^ ((1 << sa) | (1 << sb))
    }
}

/// Explicit permutation matrix exchanging qubits `a` and `b`.
pub fn transposition_matrix(n: u32, a: u32, b: u32) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(swap_bits(i, n, a, b), i)] = 1.0;
    }
    m
}

/// `max_k max |Pi_k rho Pi_k^dag - rho|` over all adjacent transpositions.
pub fn permutation_residual(state: &DenseState) -> f64 {
    (0..state.n.saturating_sub(1))
        .map(|k| {
            (state.swapped(k, k + 1).matrix - &state.matrix)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Embeds a Schur state into the computational basis: each sector matrix goes into
/// every `(j, alpha)` block with weight `p_j / d_j`.
pub fn schur_to_dense(state: &SchurState, basis: &CoupledBasis) -> Result<DenseState> {
    if state.n() != basis.n() {
        return Err(domain(format!(
            "state has n={} but basis has n={}",
            state.n(),
            basis.n()
        )));
    }
    let dim = 1usize << basis.n();
    let mut coupled = DMatrix::<Complex64>::zeros(dim, dim);
    for entry in state.entries() {
        let two_j = entry.state.sector().two_j();
        let d_j = basis.path_count(two_j) as f64;
        let block = entry.state.lambda().map(|z| z * (entry.weight / d_j));
        for b in basis.blocks_of(two_j) {
            coupled
                .view_mut((b.start, b.start), (b.dim(), b.dim()))
                .copy_from(&block);
        }
    }
    let u = basis.matrix().map(|x| Complex64::new(x, 0.0));
    let matrix = &u * coupled * u.transpose();
    DenseState::new(basis.n(), matrix)
}

/// Diagonal of `rho^{(x) N}` with `rho = (1 + r sigma_z)/2`.
pub fn product_state_diagonal(n: u32, r: f64) -> DVector<f64> {
    let (up, down) = ((1.0 + r) / 2.0, (1.0 - r) / 2.0);
    DVector::from_fn(1 << n, |i, _| {
        let ones = (i as u32).count_ones();
        up.powi((n - ones) as i32) * down.powi(ones as i32)
    })
}

/// Diagonal of `J_z = (1/2) sum_i sigma_z^(i)`.
pub fn collective_jz(n: u32) -> DVector<f64> {
    DVector::from_fn(1 << n, |i, _| {
        (n as f64 - 2.0 * (i as u32).count_ones() as f64) / 2.0
    })
}

/// `J_+ = sum_i sigma_+^(i)`, flipping one qubit from down (1) to up (0).
pub fn collective_jplus(n: u32) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        for bit in 0..n {
            if col & (1 << bit) != 0 {
                m[(col & !(1 << bit), col)] = 1.0;
            }
        }
    }
    m
}

/// Collective Casimir `J^2 = J_z^2 + (J_+ J_- + J_- J_+)/2`.
pub fn casimir(n: u32) -> DMatrix<f64> {
    let jz = collective_jz(n);
    let jp = collective_jplus(n);
    let jm = jp.transpose();
    let mut j2 = (&jp * &jm + &jm * &jp) * 0.5;
    for i in 0..j2.nrows() {
        j2[(i, i)] += jz[i] * jz[i];
    }
    j2
}

/// One spin sector of the product-state decomposition.
#[derive(Clone, Debug)]
pub struct ProductSector {
    pub two_j: u32,
    /// `Tr(P_j rho^{(x) N})` from the Casimir eigenprojector.
    pub weight: f64,
    /// The same weight summed over coupled-basis blocks.
    pub block_weight: f64,
    /// Normalized `(j, alpha)` block, identical for every `alpha`.
    pub lambda: SectorState,
    /// Largest deviation between the normalized blocks of different `alpha`.
    pub alpha_spread: f64,
}

/// Sector weights and sector matrices of `rho^{(x) N}`.
#[derive(Clone, Debug)]
pub struct ProductDecomposition {
    pub n: u32,
    pub r: f64,
    pub sectors: Vec<ProductSector>,
}

impl ProductDecomposition {
    pub fn weight_sum(&self) -> f64 {
        self.sectors.iter().map(|s| s.weight).sum()
    }

    /// Largest mismatch between the Casimir and coupled-basis weights.
    pub fn weight_mismatch(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| (s.weight - s.block_weight).abs())
            .fold(0.0, f64::max)
    }

    pub fn alpha_spread(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| s.alpha_spread)
            .fold(0.0, f64::max)
    }

    pub fn weight(&self, two_j: u32) -> f64 {
        self.sectors
            .iter()
            .find(|s| s.two_j == two_j)
            .map_or(0.0, |s| s.weight)
    }

    /// The decomposition as a Schur state (zero-weight sectors dropped).
    pub fn to_schur_state(&self) -> SchurState {
        let entries = self
            .sectors
            .iter()
            .filter(|s| s.weight > 0.0)
            .map(|s| SchurEntry {
                weight: s.weight,
                state: s.lambda.clone(),
            })
            .collect();
        SchurState::new_unchecked(self.n, entries)
    }
}

/// Casimir eigenprojector weights `Tr(P_j rho)` for a diagonal `rho`.
///
/// `J^2` commutes with `J_z`, so it is diagonalised one magnetization block at a
/// time.
fn casimir_weights(n: u32, diag: &DVector<f64>) -> Result<Vec<(u32, f64)>> {
    let j2 = casimir(n);
    let mut weights: Vec<(u32, f64)> = SpinSector::all(n).map(|s| (s.two_j(), 0.0)).collect();
    for ones in 0..=n {
        let idx: Vec<usize> = (0..1usize << n)
            .filter(|i| (*i as u32).count_ones() == ones)
            .collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |a, b| j2[(idx[a], idx[b])]);
        let eig = SymmetricEigen::new(block);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            // j(j+1) = lambda  =>  2j = sqrt(4 lambda + 1) - 1
            let two_j_f = (4.0 * lambda + 1.0).max(0.0).sqrt() - 1.0;
            let two_j = two_j_f.round();
            let expected = two_j / 2.0 * (two_j / 2.0 + 1.0);
            if (lambda - expected).abs() > CASIMIR_TOL {
                return Err(Error::Domain(format!(
                    "Casimir eigenvalue {lambda} is not j(j+1)"
                )));
            }
            let v = eig.eigenvectors.column(k);
            let tr: f64 = idx
                .iter()
                .enumerate()
                .map(|(a, &i)| v[a] * v[a] * diag[i])
                .sum();
            let slot = weights
                .iter_mut()
                .find(|(t, _)| *t == two_j as u32)
                .ok_or_else(|| Error::Domain(format!("unexpected sector 2j={two_j}")))?;
            slot.1 += tr;
        }
    }
    Ok(weights)
}

/// Decomposes `rho^{(x) N}` (`rho = (1 + r sigma_z)/2`) into spin sectors.
///
/// Weights come from Casimir eigenprojectors; sector matrices are the `(j, alpha)`
/// blocks of the coupled basis, normalized, which agree across `alpha`.
pub fn sector_weights_of_product(
    n: u32,
    r: f64,
    basis: &CoupledBasis,
) -> Result<ProductDecomposition> {
    check_dense_size(n)?;
    if basis.n() != n {
        return Err(domain("basis qubit count does not match"));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(domain(format!("Bloch length {r} outside [0, 1]")));
    }
    let diag = product_state_diagonal(n, r);
    let casimir = casimir_weights(n, &diag)?;
    let u = basis.matrix();
    let mut sectors = Vec::new();
    for sector in SpinSector::all(n).rev() {
        let two_j = sector.two_j();
        let mut blocks = Vec::new();
        for b in basis.blocks_of(two_j) {
            let cols = u.columns(b.start, b.dim());
            let m = DMatrix::from_fn(b.dim(), b.dim(), |x, y| {
                (0..diag.len())
                    .map(|k| cols[(k, x)] * diag[k] * cols[(k, y)])
                    .sum::<f64>()
            });
            blocks.push(m);
        }
        let block_weight: f64 = blocks.iter().map(|m| m.trace()).sum();
        let normalized: Vec<DMatrix<f64>> = blocks
            .iter()
            .map(|m| {
                let t = m.trace();
                if t > 0.0 {
                    m / t
                } else {
                    DMatrix::zeros(m.nrows(), m.ncols())
                }
            })
            .collect();
        let reference = &normalized[0];
        let alpha_spread = normalized
            .iter()
            .map(|m| (m - reference).amax())
            .fold(0.0, f64::max);
        let lambda = if block_weight > 0.0 {
            SectorState::new_unchecked(sector, reference.map(|x| Complex64::new(x, 0.0)))?
        } else {
            SectorState::maximally_mixed(sector)
        };
        let weight = casimir
            .iter()
            .find(|(t, _)| *t == two_j)
            .map_or(0.0, |(_, w)| *w);
        sectors.push(ProductSector {
            two_j,
            weight,
            block_weight,
            lambda,
            alpha_spread,
        });
    }
    Ok(ProductDecomposition { n, r, sectors })
}
