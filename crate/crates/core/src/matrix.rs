//! Dense symmetric storage and the size guard shared by every dense path.

use crate::error::{invalid, Error, Result};

/// Default cap on the dimension of dense n×n problems.
pub const DEFAULT_MAX_POINTS: usize = 12_000;

/// Size guard for dense allocations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_points: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Self {
            max_points: usize::MAX,
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.max_points {
            Err(Error::MemoryCap {
                requested: n,
                cap: self.max_points,
            })
        } else {
            Ok(())
        }
    }
}

/// Dense symmetric matrix in full row-major storage.
///
/// Constructors guarantee `get(i, j) == get(j, i)` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from full row-major data, rejecting anything that is
    /// not exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid(
                "data",
                format!("expected {} entries, got {}", n * n, data.len()),
            ));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(invalid(
                        "data",
                        format!("entry ({i},{j}) differs from ({j},{i})"),
                    ));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix by evaluating `f(i, j)` on the upper triangle and
    /// mirroring. Rows are filled in parallel; every entry is computed
    /// independently so the result does not depend on the schedule.
    pub fn from_upper_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let mut data = vec![0.0; n * n];
        if n == 0 {
            return Self { n, data };
        }
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate().skip(i) {
                *slot = f(i, j);
            }
        });
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Σᵢⱼ Mᵢⱼ².
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Adds `shift` to every diagonal entry.
    pub fn add_diagonal(&mut self, shift: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += shift;
        }
    }

    /// Multiplies a vector: y = M x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub(crate) fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_data() {
        let err = SymMatrix::from_row_major(2, vec![1.0, 2.0, 3.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
    }

    #[test]
    fn upper_fn_mirrors_exactly() {
        let m = SymMatrix::from_upper_fn(7, |i, j| ((i * 31 + j * 7) as f64).sin());
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn limits_reject_oversize() {
        let lim = Limits { max_points: 10 };
        assert!(lim.check(10).is_ok());
        assert!(matches!(
            lim.check(11),
            Err(Error::MemoryCap {
                requested: 11,
                cap: 10
            })
        ));
    }
}
