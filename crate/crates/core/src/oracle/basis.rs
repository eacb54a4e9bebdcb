use nalgebra::{DMatrix, DVector};

use super::check_dense_size;
use crate::error::Result;
use crate::spin_algebra::SpinSector;

/// One `(j, alpha)` block of the coupled basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledBlock {
    pub two_j: u32,
    /// Doubled intermediate spins after coupling qubits `1..=k`, for `k = 1..=N`.
    pub path: Vec<u32>,
    /// First column of the block; columns hold `m = j, j-1, ..., -j`.
    pub start: usize,
}

impl CoupledBlock {
    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn columns(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.dim()
    }
}

/// Orthonormal basis `|j, m, alpha>` of `N` qubits obtained by coupling one qubit
/// at a time. Qubit 1 is the most significant bit and `|0>` is spin up.
#[derive(Clone, Debug)]
pub struct CoupledBasis {
    n: u32,
    matrix: DMatrix<f64>,
    blocks: Vec<CoupledBlock>,
}

impl CoupledBasis {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `2^N x 2^N` real orthogonal matrix whose columns are the basis vectors.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn blocks(&self) -> &[CoupledBlock] {
        &self.blocks
    }

    pub fn blocks_of(&self, two_j: u32) -> impl Iterator<Item = &CoupledBlock> {
        self.blocks.iter().filter(move |b| b.two_j == two_j)
    }

    /// Number of coupling paths (the multiplicity `d_j`) for a spin.
    pub fn path_count(&self, two_j: u32) -> usize {
        self.blocks_of(two_j).count()
    }

    /// `max |B^T B - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let gram = self.matrix.transpose() * &self.matrix;
        let dim = gram.nrows();
        (gram - DMatrix::<f64>::identity(dim, dim)).amax()
    }
}

struct Partial {
    path: Vec<u32>,
    two_j: u32,
    /// `m = j` first
    vectors: Vec<DVector<f64>>,
}

/// `|v> (x) |bit>` with the new qubit as least significant bit.
fn append_qubit(v: &DVector<f64>, bit: usize) -> DVector<f64> {
    let mut out = DVector::zeros(2 * v.len());
    for (i, x) in v.iter().enumerate() {
        out[2 * i + bit] = *x;
    }
    out
}

fn couple(parent: &Partial, raise: bool) -> Partial {
    let two_j1 = parent.two_j as i64;
    let two_j = if raise { two_j1 + 1 } else { two_j1 - 1 };
    let denom = (two_j1 + 1) as f64;
    let dim = parent.vectors[0].len() * 2;
    let parent_index = |two_m1: i64| -> Option<usize> {
        (two_m1.abs() <= two_j1).then(|| ((two_j1 - two_m1) / 2) as usize)
    };
    let vectors = (0..=two_j)
        .map(|k| {
            let two_m = two_j - 2 * k;
            // j1 + m + 1/2 and j1 - m + 1/2, doubled then halved
            let plus = ((two_j1 + two_m + 1) as f64 / 2.0 / denom).sqrt();
            let minus = ((two_j1 - two_m + 1) as f64 / 2.0 / denom).sqrt();
            let (c_up, c_down) = if raise { (plus, minus) } else { (-minus, plus) };
            let mut v = DVector::zeros(dim);
            if let Some(i) = parent_index(two_m - 1) {
                v += append_qubit(&parent.vectors[i], 0) * c_up;
            }
            if let Some(i) = parent_index(two_m + 1) {
                v += append_qubit(&parent.vectors[i], 1) * c_down;
            }
            v
        })
        .collect();
    let mut path = parent.path.clone();
    path.push(two_j as u32);
    Partial {
        path,
        two_j: two_j as u32,
        vectors,
    }
}

/// Builds the coupled basis by adding qubits one at a time with the two-term
/// spin-1/2 Clebsch-Gordan coefficients (Condon-Shortley phases). Blocks are
/// ordered by decreasing spin, then by path.
pub fn build_coupled_basis(n: u32) -> Result<CoupledBasis> {
    check_dense_size(n)?;
    let mut level = vec![Partial {
        path: vec![1],
        two_j: 1,
        vectors: vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ],
    }];
    for _ in 1..n {
        level = level
            .iter()
            .flat_map(|p| {
                let mut next = vec![couple(p, true)];
                if p.two_j > 0 {
                    next.push(couple(p, false));
                }
                next
            })
            .collect();
    }
    level.sort_by(|a, b| b.two_j.cmp(&a.two_j).then_with(|| b.path.cmp(&a.path)));
    let dim = 1usize << n;
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut blocks = Vec::with_capacity(level.len());
    let mut col = 0;
    for p in level {
        debug_assert!(SpinSector::new(n, p.two_j).is_ok());
        blocks.push(CoupledBlock {
            two_j: p.two_j,
            path: p.path,
            start: col,
        });
        for v in p.vectors {
            matrix.set_column(col, &v);
            col += 1;
        }
    }
    debug_assert_eq!(col, dim);
    Ok(CoupledBasis { n, matrix, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::sector_multiplicity;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_qubits() {
        let b = build_coupled_basis(2).unwrap();
        assert_eq!(b.path_count(2), 1);
        assert_eq!(b.path_count(0), 1);
        let singlet = b.blocks_of(0).next().unwrap();
        let v = b.matrix().column(singlet.start);
        let s = 1.0 / 2f64.sqrt();
        // (|01> - |10>)/sqrt(2)
        for (got, want) in v.iter().zip([0.0, s, -s, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        let triplet = b.blocks_of(2).next().unwrap();
        let mid = b.matrix().column(triplet.start + 1);
        for (got, want) in mid.iter().zip([0.0, s, s, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn path_counts_match_multiplicities() {
        let b = build_coupled_basis(6).unwrap();
        let counts: Vec<usize> = [6, 4, 2, 0].iter().map(|&t| b.path_count(t)).collect();
        assert_eq!(counts, vec![1, 5, 9, 5]);
        for n in 1..=8 {
            let b = build_coupled_basis(n).unwrap();
            for s in SpinSector::all(n) {
                assert_eq!(
                    b.path_count(s.two_j()) as u128,
                    sector_multiplicity(n, s.two_j()).unwrap()
                );
            }
            let total: usize = b.blocks().iter().map(|bl| bl.dim()).sum();
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn orthonormal() {
        for n in 1..=8 {
            assert!(build_coupled_basis(n).unwrap().orthonormality_residual() < 1e-10);
        }
    }

    #[test]
    fn size_cap() {
        assert!(build_coupled_basis(11).is_err());
        assert!(build_coupled_basis(0).is_err());
    }
}
