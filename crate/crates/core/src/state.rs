//! Small fixed-capacity state vectors and matrices.
//!
//! Every bundled system has at most three conserved variables, so states and
//! Jacobians live on the stack and are `Copy`. This keeps the inner loops of
//! reconstruction, prediction and the reverse march free of allocation.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Largest number of conserved variables supported.
pub const MAX_VARS: usize = 3;

/// Vector of conserved variables `Q` (or reverse-problem variables `U`).
#[derive(Clone, Copy, PartialEq)]
pub struct StateVec {
    len: usize,
    data: [f64; MAX_VARS],
}

impl StateVec {
    pub fn zeros(len: usize) -> Self {
        assert!((1..=MAX_VARS).contains(&len), "state dimension {len} out of range");
        Self {
            len,
            data: [0.0; MAX_VARS],
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut s = Self::zeros(values.len());
        s.data[..values.len()].copy_from_slice(values);
        s
    }

    pub fn splat(len: usize, value: f64) -> Self {
        let mut s = Self::zeros(len);
        s.data[..len].iter_mut().for_each(|v| *v = value);
        s
    }

    pub fn scalar(value: f64) -> Self {
        Self::from_slice(&[value])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data[..self.len]
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.as_slice().iter()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        out.as_mut_slice().iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for (o, b) in out.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *o = f(*o, *b);
        }
        out
    }

    pub fn norm_inf(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    /// `self + s * other`, the workhorse of the update loops.
    #[inline]
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        let mut out = *self;
        for i in 0..self.len {
            out.data[i] += s * other.data[i];
        }
        out
    }
}

impl fmt::Debug for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for StateVec {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.len);
        &self.data[i]
    }
}

impl IndexMut<usize> for StateVec {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.len);
        &mut self.data[i]
    }
}

impl Add for StateVec {
    type Output = StateVec;
    #[inline]
    fn add(self, rhs: StateVec) -> StateVec {
        self.axpy(1.0, &rhs)
    }
}

impl Sub for StateVec {
    type Output = StateVec;
    #[inline]
    fn sub(self, rhs: StateVec) -> StateVec {
        self.axpy(-1.0, &rhs)
    }
}

impl AddAssign for StateVec {
    #[inline]
    fn add_assign(&mut self, rhs: StateVec) {
        *self = self.axpy(1.0, &rhs);
    }
}

impl SubAssign for StateVec {
    #[inline]
    fn sub_assign(&mut self, rhs: StateVec) {
        *self = self.axpy(-1.0, &rhs);
    }
}

impl Mul<f64> for StateVec {
    type Output = StateVec;
    #[inline]
    fn mul(self, s: f64) -> StateVec {
        self.map(|v| v * s)
    }
}

impl Mul<StateVec> for f64 {
    type Output = StateVec;
    #[inline]
    fn mul(self, v: StateVec) -> StateVec {
        v * self
    }
}

impl Neg for StateVec {
    type Output = StateVec;
    #[inline]
    fn neg(self) -> StateVec {
        self.map(|v| -v)
    }
}

/// Dense square matrix of size at most `MAX_VARS`.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    n: usize,
    data: [[f64; MAX_VARS]; MAX_VARS],
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_VARS).contains(&n), "matrix size {n} out of range");
        Self {
            n,
            data: [[0.0; MAX_VARS]; MAX_VARS],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i][..n].copy_from_slice(row);
        }
        m
    }

    pub fn diagonal(d: &StateVec) -> Self {
        let mut m = Self::zeros(d.len());
        for i in 0..d.len() {
            m.data[i][i] = d[i];
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[StateVec]) -> Self {
        let n = cols.len();
        let mut m = Self::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n);
            for i in 0..n {
                m.data[i][j] = c[i];
            }
        }
        m
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i][j] = v;
    }

    pub fn row(&self, i: usize) -> StateVec {
        StateVec::from_slice(&self.data[i][..self.n])
    }

    #[inline]
    pub fn mul_vec(&self, v: &StateVec) -> StateVec {
        debug_assert_eq!(self.n, v.len());
        let mut out = StateVec::zeros(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.data[i][j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn mul_mat(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.n, other.n);
        let mut out = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[i][j] = (0..self.n).map(|k| self.data[i][k] * other.data[k][j]).sum();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[i][j] *= s;
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.data[j][i] = self.data[i][j];
            }
        }
        out
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max(self.data[i][j].abs());
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self.data[i][j] - other.data[i][j]).abs());
            }
        }
        m
    }

    /// Gauss-Jordan inverse with partial pivoting; `None` when singular.
    pub fn inverse(&self) -> Option<Mat> {
        let n = self.n;
        let mut a = *self;
        let mut inv = Mat::identity(n);
        let scale = self.norm_max().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a.data[r][col].abs().total_cmp(&a.data[s][col].abs()))
                .unwrap();
            if a.data[pivot][col].abs() <= 1e-14 * scale {
                return None;
            }
            a.data.swap(col, pivot);
            inv.data.swap(col, pivot);
            let p = a.data[col][col];
            for j in 0..n {
                a.data[col][j] /= p;
                inv.data[col][j] /= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a.data[r][col];
                    if f != 0.0 {
                        for j in 0..n {
                            a.data[r][j] -= f * a.data[col][j];
                            inv.data[r][j] -= f * inv.data[col][j];
                        }
                    }
                }
            }
        }
        Some(inv)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.n).map(|i| &self.data[i][..self.n]).collect();
        f.debug_list().entries(rows).finish()
    }
}
