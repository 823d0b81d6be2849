use num_traits::{One, Zero};

use super::{rational_to_f64, Rational};
use crate::error::{GmasError, Result};

/// Dense row-major matrix over arbitrary-precision rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

/// Output of [`RationalMatrix::rref`].
#[derive(Debug, Clone)]
pub struct RrefResult {
    pub reduced: RationalMatrix,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows * cols");
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![Rational::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let entries = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c);
                row.iter().map(|&v| Rational::from_integer(v.into()))
            })
            .collect();
        Self::new(r, c, entries)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Rational>]) -> Self {
        let n = cols.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(n, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Self::new(self.rows + other.rows, self.cols, entries)
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut entries = Vec::with_capacity((self.cols + other.cols) * self.rows);
        for i in 0..self.rows {
            entries.extend(self.row(i).iter().cloned());
            entries.extend(other.row(i).iter().cloned());
        }
        Self::new(self.rows, self.cols + other.cols, entries)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| rational_to_f64(&self[(i, j)]))
    }

    /// Reduced row-echelon form via Gauss-Jordan elimination.
    pub fn rref(&self) -> RrefResult {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let Some(sel) = (pivot_row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(pivot_row, sel);
            let inv = m[(pivot_row, col)].recip();
            for j in col..m.cols {
                let v = &m[(pivot_row, j)] * &inv;
                m[(pivot_row, j)] = v;
            }
            for r in 0..m.rows {
                if r != pivot_row && !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone();
                    for j in col..m.cols {
                        let v = &m[(r, j)] - &factor * &m[(pivot_row, j)];
                        m[(r, j)] = v;
                    }
                }
            }
            pivot_cols.push(col);
            pivot_row += 1;
        }
        let rank = pivot_cols.len();
        RrefResult { reduced: m, pivot_cols, rank }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of the kernel (right null space), one vector per free column.
    pub fn kernel_basis(&self) -> SubspaceBasis {
        let RrefResult { reduced, pivot_cols, .. } = self.rref();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &c in &pivot_cols {
                v[c] = true;
            }
            v
        };
        let mut vectors = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (r, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -reduced[(r, free)].clone();
            }
            vectors.push(v);
        }
        SubspaceBasis::new_unchecked(self.cols, vectors)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

/// A list of linearly independent vectors spanning a subspace of Q^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    vectors: Vec<Vec<Rational>>,
}

impl SubspaceBasis {
    /// Builds a basis from spanning vectors, discarding dependent ones.
    pub fn from_spanning(ambient_dim: usize, spanning: &[Vec<Rational>]) -> Self {
        for v in spanning {
            assert_eq!(v.len(), ambient_dim, "vector length must match ambient dim");
        }
        if spanning.is_empty() {
            return Self::new_unchecked(ambient_dim, Vec::new());
        }
        let entries: Vec<Rational> = spanning.iter().flatten().cloned().collect();
        let m = RationalMatrix::new(spanning.len(), ambient_dim, entries);
        let RrefResult { reduced, rank, .. } = m.rref();
        let vectors = (0..rank).map(|i| reduced.row(i).to_vec()).collect();
        Self::new_unchecked(ambient_dim, vectors)
    }

    pub fn new(ambient_dim: usize, vectors: Vec<Vec<Rational>>) -> Result<Self> {
        let b = Self::from_spanning(ambient_dim, &vectors);
        if b.dim() != vectors.len() {
            return Err(GmasError::Invalid(
                "basis vectors are linearly dependent".into(),
            ));
        }
        Ok(Self { ambient_dim, vectors })
    }

    pub(crate) fn new_unchecked(ambient_dim: usize, vectors: Vec<Vec<Rational>>) -> Self {
        Self { ambient_dim, vectors }
    }

    pub fn full_space(n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| {
                let mut v = vec![Rational::zero(); n];
                v[i] = Rational::one();
                v
            })
            .collect();
        Self::new_unchecked(n, vectors)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.vectors
    }

    /// Matrix whose rows are the basis vectors (dim x n).
    pub fn as_row_matrix(&self) -> RationalMatrix {
        let entries: Vec<Rational> = self.vectors.iter().flatten().cloned().collect();
        RationalMatrix::new(self.dim(), self.ambient_dim, entries)
    }

    /// Matrix whose columns are the basis vectors (n x dim).
    pub fn as_col_matrix(&self) -> RationalMatrix {
        self.as_row_matrix().transpose()
    }

    /// Orthogonal complement with respect to the standard inner product.
    pub fn orth_complement(&self) -> SubspaceBasis {
        if self.dim() == 0 {
            return SubspaceBasis::full_space(self.ambient_dim);
        }
        self.as_row_matrix().kernel_basis()
    }

    /// Two bases span the same subspace iff their rref'd row matrices agree.
    pub fn spans_same(&self, other: &SubspaceBasis) -> bool {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return false;
        }
        self.as_row_matrix().rref().reduced == other.as_row_matrix().rref().reduced
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        let mut spanning: Vec<Vec<Rational>> = self.vectors.clone();
        spanning.push(v.to_vec());
        Self::from_spanning(self.ambient_dim, &spanning).dim() == self.dim()
    }

    /// Basis of the intersection of two subspaces of the same ambient space.
    pub fn intersect(&self, other: &SubspaceBasis) -> Result<SubspaceBasis> {
        if self.ambient_dim != other.ambient_dim {
            return Err(GmasError::Dimension(format!(
                "ambient dims differ: {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(SubspaceBasis::new_unchecked(self.ambient_dim, Vec::new()));
        }
        // Solve A p - B q = 0; intersection vectors are A p.
        let a = self.as_col_matrix();
        let b = other.as_col_matrix();
        let neg_b = {
            let mut m = b.clone();
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let v = -m[(i, j)].clone();
                    m[(i, j)] = v;
                }
            }
            m
        };
        let stacked = a.hstack(&neg_b);
        let ker = stacked.kernel_basis();
        let mut spanning = Vec::new();
        for w in ker.vectors() {
            let p = &w[..self.dim()];
            spanning.push(a.mul_vec(p));
        }
        Ok(SubspaceBasis::from_spanning(self.ambient_dim, &spanning))
    }
}
