use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// An `n x d` matrix of latent positions, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Positions<T: Real> {
    n: usize,
    d: usize,
    data: Vec<T>,
}

impl<T: Real> Positions<T> {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { n, d, data: vec![T::zero(); n * d] }
    }

    pub fn from_vec(n: usize, d: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * d {
            return Err(invalid(format!("{} values for a {n} x {d} position matrix", data.len())));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(invalid("ragged position rows"));
        }
        Ok(Self { n, d, data: rows.concat() })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.d.max(1)).take(self.n)
    }

    /// Euclidean distance between rows `i` and `j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        euclidean(self.row(i), self.row(j))
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Positions<U> {
        Positions { n: self.n, d: self.d, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

#[inline]
pub(crate) fn euclidean<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| {
            let t = x - y;
            acc + t * t
        })
        .sqrt()
}

#[inline]
pub(crate) fn sq_norm<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x * x)
}
