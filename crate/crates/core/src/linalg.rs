//! Exact linear algebra over the rationals.
//!
//! Every homology and subspace computation in this crate reduces to the
//! routines here: reduced row-echelon form with pivot tracking, kernel and
//! image bases, linear solves and quotient dimensions. Matrices are dense;
//! the derivation slices this crate produces stay small enough that nothing
//! cleverer is warranted.

use crate::Rat;
use num::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a subspace: vector {index} of the small space lies outside the big space")]
    NotASubspace { index: usize },
}

/// Dense matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has length {} but row 0 has length {ncols}",
                    r.len()
                )));
            }
        }
        Ok(RatMatrix {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Matrix whose columns are the given vectors, each of length `ambient`.
    pub fn from_columns(ambient: usize, columns: &[Vec<Rat>]) -> Result<Self, LinalgError> {
        let mut m = RatMatrix::zero(ambient, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != ambient {
                return Err(LinalgError::DimensionMismatch(format!(
                    "column {j} has length {} but ambient dimension is {ambient}",
                    c.len()
                )));
            }
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rat) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Rat> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, rhs: &RatMatrix) -> Result<RatMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = RatMatrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j).clone();
                        out.set(i, j, cur + a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector length {} does not match {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .filter(|&j| !v[j].is_zero())
                    .map(|j| self.get(i, j) * &v[j])
                    .sum()
            })
            .collect())
    }

    /// Reduced row-echelon form together with the strictly increasing list of
    /// pivot columns. Gauss-Jordan with exact division; results are invariant
    /// under row scaling of the input by nonzero rationals.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let Some(r) = (pivot_row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            if r != pivot_row {
                for j in 0..m.cols {
                    m.entries.swap(r * m.cols + j, pivot_row * m.cols + j);
                }
            }
            let inv = Rat::one() / m.get(pivot_row, col).clone();
            for j in col..m.cols {
                let scaled = m.get(pivot_row, j) * &inv;
                m.set(pivot_row, j, scaled);
            }
            for r in 0..m.rows {
                if r == pivot_row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in col..m.cols {
                    let x = m.get(r, j) - &factor * m.get(pivot_row, j);
                    m.set(r, j, x);
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self . x = 0}`; dimension equals `cols - rank`.
    pub fn kernel_basis(&self) -> Subspace {
        let (r, pivots) = self.rref();
        let is_pivot = {
            let mut v = vec![None; self.cols];
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = Some(row);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free].is_some() {
                continue;
            }
            let mut x = vec![Rat::zero(); self.cols];
            x[free] = Rat::one();
            for (col, slot) in is_pivot.iter().enumerate() {
                if let Some(row) = slot {
                    x[col] = -r.get(*row, free).clone();
                }
            }
            basis.push(x);
        }
        Subspace {
            ambient_dim: self.cols,
            basis,
        }
    }

    /// Basis of the column space: the original columns at the pivot indices.
    pub fn image_basis(&self) -> Subspace {
        let (_, pivots) = self.rref();
        Subspace {
            ambient_dim: self.rows,
            basis: pivots.into_iter().map(|j| self.column(j)).collect(),
        }
    }

    /// Some solution of `self . x = b`, or `None` when the system is
    /// inconsistent. Free variables are set to zero.
    pub fn solve(&self, b: &[Rat]) -> Result<Option<Vec<Rat>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side length {} does not match {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = RatMatrix::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r.get(row, self.cols).clone();
        }
        Ok(Some(x))
    }
}

/// A linear subspace of Q^n given by a linearly independent basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Rat>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![Rat::zero(); ambient_dim];
                v[i] = Rat::one();
                v
            })
            .collect();
        Subspace { ambient_dim, basis }
    }

    /// Checks linear independence of the proposed basis by rank.
    pub fn new(ambient_dim: usize, basis: Vec<Vec<Rat>>) -> Result<Self, LinalgError> {
        let m = RatMatrix::from_columns(ambient_dim, &basis)?;
        if m.rank() != basis.len() {
            return Err(LinalgError::DimensionMismatch(
                "proposed basis vectors are linearly dependent".into(),
            ));
        }
        Ok(Subspace { ambient_dim, basis })
    }

    /// The span of arbitrary vectors, reduced to the canonical row-echelon
    /// basis. Same span in, same basis out, regardless of input order or
    /// scaling.
    pub fn from_span(ambient_dim: usize, vectors: &[Vec<Rat>]) -> Result<Self, LinalgError> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(LinalgError::DimensionMismatch(format!(
                    "vector {i} has length {} but ambient dimension is {ambient_dim}",
                    v.len()
                )));
            }
        }
        let m = RatMatrix::from_rows(vectors.to_vec())?;
        let (r, pivots) = m.rref();
        let basis = (0..pivots.len()).map(|i| r.row(i)).collect();
        Ok(Subspace { ambient_dim, basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.basis
    }

    /// Matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> RatMatrix {
        RatMatrix::from_columns(self.ambient_dim, &self.basis)
            .expect("basis vectors have ambient length by construction")
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.coordinates_of(v).is_some()
    }

    /// Coordinates of `v` in this basis, when `v` lies in the subspace.
    pub fn coordinates_of(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        if v.len() != self.ambient_dim {
            return None;
        }
        self.basis_matrix().solve(v).expect("length checked above")
    }

    /// Canonical form: the row-echelon basis of the same span.
    pub fn canonicalize(&self) -> Subspace {
        Subspace::from_span(self.ambient_dim, &self.basis)
            .expect("existing basis vectors are well-formed")
    }
}

/// `dim(big) - dim(small)` after verifying `small` really sits inside `big`.
pub fn quotient_dim(big: &Subspace, small: &Subspace) -> Result<usize, LinalgError> {
    check_inclusion(big, small)?;
    Ok(big.dim() - small.dim())
}

/// Coset representatives for `big / small`: the basis vectors of `big` whose
/// columns pick up new pivots after the columns of `small`. Deterministic,
/// since rref is.
pub fn quotient_representatives(
    big: &Subspace,
    small: &Subspace,
) -> Result<Vec<Vec<Rat>>, LinalgError> {
    check_inclusion(big, small)?;
    let mut columns = small.basis.clone();
    columns.extend(big.basis.iter().cloned());
    let m = RatMatrix::from_columns(big.ambient_dim, &columns)?;
    let (_, pivots) = m.rref();
    Ok(pivots
        .into_iter()
        .filter(|&p| p >= small.dim())
        .map(|p| big.basis[p - small.dim()].clone())
        .collect())
}

fn check_inclusion(big: &Subspace, small: &Subspace) -> Result<(), LinalgError> {
    if big.ambient_dim != small.ambient_dim {
        return Err(LinalgError::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            big.ambient_dim, small.ambient_dim
        )));
    }
    for (index, v) in small.basis.iter().enumerate() {
        if !big.contains(v) {
            return Err(LinalgError::NotASubspace { index });
        }
    }
    Ok(())
}
