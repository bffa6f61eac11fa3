//! Small dense symmetric matrices over a generic scalar.
//!
//! Matrices here are tiny (moment determinants rarely exceed 5x5), so the
//! emphasis is on exactness and honest degeneracy detection rather than
//! throughput. Determinants use fraction-free Bareiss elimination in the
//! rational backend and partially pivoted elimination with a pivot-growth
//! estimate in the floating backend.

use nalgebra::DMatrix;

use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> SquareMatrix<S> {
    pub fn from_fn(n: usize, mut entry: impl FnMut(usize, usize) -> S) -> Self {
        assert!(n > 0, "empty matrix");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(entry(i, j));
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.n + j]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.n {
                self.data.swap(a * self.n + j, b * self.n + j);
            }
        }
    }

    /// Leading principal submatrix of size `k`.
    pub fn leading(&self, k: usize) -> SquareMatrix<S> {
        assert!(k >= 1 && k <= self.n);
        SquareMatrix::from_fn(k, |i, j| self.at(i, j).clone())
    }

    /// Determinant, dispatched per backend.
    pub fn determinant(&self) -> S {
        if S::EXACT {
            self.clone().det_bareiss()
        } else {
            self.clone().det_pivoted().0
        }
    }

    /// Determinant plus a pivot-growth estimate (max |pivot| / min |pivot|)
    /// from the floating elimination. The estimate is `None` in the exact
    /// backend, where conditioning is irrelevant.
    pub fn determinant_with_growth(&self) -> (S, Option<f64>) {
        if S::EXACT {
            (self.clone().det_bareiss(), None)
        } else {
            let (d, g) = self.clone().det_pivoted();
            (d, Some(g))
        }
    }

    /// Fraction-free (Bareiss) elimination. Exact over any field; keeps
    /// intermediate entries as quotients of minors, which controls size
    /// growth for big rationals.
    fn det_bareiss(mut self) -> S {
        let n = self.n;
        let mut sign = false;
        let mut prev = S::one();
        for k in 0..n.saturating_sub(1) {
            if self.at(k, k).is_zero() {
                match (k + 1..n).find(|&r| !self.at(r, k).is_zero()) {
                    Some(r) => {
                        self.swap_rows(k, r);
                        sign = !sign;
                    }
                    None => return S::zero(),
                }
            }
            let pivot = self.at(k, k).clone();
            for i in k + 1..n {
                let lead = self.at(i, k).clone();
                for j in k + 1..n {
                    let v = (self.at(i, j).clone() * pivot.clone()
                        - lead.clone() * self.at(k, j).clone())
                        / prev.clone();
                    *self.at_mut(i, j) = v;
                }
                *self.at_mut(i, k) = S::zero();
            }
            prev = pivot;
        }
        let det = self.at(n - 1, n - 1).clone();
        if sign {
            -det
        } else {
            det
        }
    }

    /// Gaussian elimination with partial pivoting. Returns the determinant
    /// and the pivot-growth ratio.
    fn det_pivoted(mut self) -> (S, f64) {
        let n = self.n;
        let mut det = S::one();
        let mut max_pivot = 0.0_f64;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&a, &b| {
                    self.at(a, k)
                        .abs()
                        .partial_cmp(&self.at(b, k).abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if self.at(pivot_row, k).is_zero() {
                return (S::zero(), f64::INFINITY);
            }
            if pivot_row != k {
                self.swap_rows(k, pivot_row);
                det = -det;
            }
            let pivot = self.at(k, k).clone();
            let mag = pivot.to_f64().abs();
            max_pivot = max_pivot.max(mag);
            min_pivot = min_pivot.min(mag);
            det = det * pivot.clone();
            for i in k + 1..n {
                let factor = self.at(i, k).clone() / pivot.clone();
                for j in k + 1..n {
                    let v = self.at(i, j).clone() - factor.clone() * self.at(k, j).clone();
                    *self.at_mut(i, j) = v;
                }
                *self.at_mut(i, k) = S::zero();
            }
        }
        let growth = if min_pivot > 0.0 {
            max_pivot / min_pivot
        } else {
            f64::INFINITY
        };
        (det, growth)
    }

    /// All leading principal minors, sizes 1..=n.
    pub fn leading_minors(&self) -> Vec<S> {
        (1..=self.n).map(|k| self.leading(k).determinant()).collect()
    }

    fn to_f64_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.at(i, j).to_f64())
    }

    /// Positive-semidefiniteness of a symmetric matrix.
    ///
    /// Exact backend: the characteristic polynomial det(lambda I + A) is
    /// computed by Faddeev-LeVerrier; its coefficients are the elementary
    /// symmetric functions of the eigenvalues and are all nonnegative iff no
    /// eigenvalue is negative.
    ///
    /// Floating backend: symmetric eigendecomposition with the relative test
    /// `lambda_min >= -eps * lambda_max`.
    pub fn is_psd(&self, eps: f64) -> bool {
        if S::EXACT {
            self.charpoly_of_negated()
                .into_iter()
                .all(|c| c >= S::zero())
        } else {
            let eig = self.to_f64_matrix().symmetric_eigen();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &l in eig.eigenvalues.iter() {
                lo = lo.min(l);
                hi = hi.max(l);
            }
            lo >= -eps * hi
        }
    }

    /// Coefficients `c_0..c_n` of det(lambda I + A) = sum c_k lambda^(n-k),
    /// via Faddeev-LeVerrier on -A. `c_0 = 1`.
    fn charpoly_of_negated(&self) -> Vec<S> {
        let n = self.n;
        let b = SquareMatrix::from_fn(n, |i, j| -self.at(i, j).clone());
        let mut coeffs = vec![S::one()];
        // m starts as the identity; each step: c_k = -tr(B m)/k, then
        // m <- B m + c_k I.
        let mut m = SquareMatrix::from_fn(n, |i, j| {
            if i == j {
                S::one()
            } else {
                S::zero()
            }
        });
        for k in 1..=n {
            let bm = b.mul(&m);
            let mut trace = S::zero();
            for i in 0..n {
                trace = trace + bm.at(i, i).clone();
            }
            let c = -trace / S::from_int(k as i64);
            coeffs.push(c.clone());
            m = bm;
            for i in 0..n {
                *m.at_mut(i, i) = m.at(i, i).clone() + c.clone();
            }
        }
        coeffs
    }

    fn mul(&self, rhs: &SquareMatrix<S>) -> SquareMatrix<S> {
        let n = self.n;
        SquareMatrix::from_fn(n, |i, j| {
            let mut acc = S::zero();
            for t in 0..n {
                acc = acc + self.at(i, t).clone() * rhs.at(t, j).clone();
            }
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use num::traits::Zero;

    /// Naive cofactor expansion; the independent oracle for both
    /// elimination routes.
    fn det_cofactor<S: Scalar>(m: &SquareMatrix<S>) -> S {
        let n = m.size();
        if n == 1 {
            return m.at(0, 0).clone();
        }
        let mut acc = S::zero();
        for j in 0..n {
            let minor = SquareMatrix::from_fn(n - 1, |r, c| {
                m.at(r + 1, if c < j { c } else { c + 1 }).clone()
            });
            let term = m.at(0, j).clone() * det_cofactor(&minor);
            acc = if j % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }

    fn exact_mat(rows: &[&[i64]]) -> SquareMatrix<Exact> {
        SquareMatrix::from_fn(rows.len(), |i, j| Exact::from_int(rows[i][j]))
    }

    #[test]
    fn bareiss_matches_cofactor_oracle() {
        let m = exact_mat(&[
            &[1_334_961, 14833, 265],
            &[14833, 265, 9],
            &[265, 9, 1],
        ]);
        let expect = det_cofactor(&m);
        assert_eq!(m.determinant(), expect);
        assert_eq!(expect, Exact::from_int(77_758_720));
    }

    #[test]
    fn pivoted_matches_cofactor_oracle() {
        let m = SquareMatrix::from_fn(4, |i, j| ((i * 7 + j * 3) % 5) as f64 + (i == j) as u8 as f64 * 2.0);
        let expect = det_cofactor(&m);
        let (d, growth) = m.determinant_with_growth();
        assert!((d - expect).abs() <= 1e-10 * expect.abs().max(1.0));
        assert!(growth.unwrap() >= 1.0);
    }

    #[test]
    fn singular_matrix_detected() {
        let m = exact_mat(&[&[1, 2], &[2, 4]]);
        assert!(m.determinant().is_zero());
        let f = SquareMatrix::from_fn(2, |i, j| ((i + 1) * (j + 1)) as f64);
        assert_eq!(f.determinant(), 0.0);
    }

    #[test]
    fn psd_exact_charpoly() {
        // Gram-type matrix: PSD with zero eigenvalue.
        assert!(exact_mat(&[&[1, 1], &[1, 1]]).is_psd(0.0));
        assert!(exact_mat(&[&[2, 1], &[1, 2]]).is_psd(0.0));
        // Indefinite: [[0,1],[1,0]] has eigenvalues +-1.
        assert!(!exact_mat(&[&[0, 1], &[1, 0]]).is_psd(0.0));
        // All leading minors zero but matrix indefinite: [[0,0],[0,-1]].
        assert!(!exact_mat(&[&[0, 0], &[0, -1]]).is_psd(0.0));
    }

    #[test]
    fn psd_real_eigen() {
        let m = SquareMatrix::from_fn(2, |i, j| [[1.0, 3.0], [3.0, 15.0]][i][j]);
        assert!(m.is_psd(1e-10));
        let bad = SquareMatrix::from_fn(2, |i, j| [[1.0, 1.0], [1.0, 0.5]][i][j]);
        assert!(!bad.is_psd(1e-10));
    }

    #[test]
    fn leading_minors_sequence() {
        let m = exact_mat(&[&[1, 3], &[3, 15]]);
        assert_eq!(
            m.leading_minors(),
            vec![Exact::from_int(1), Exact::from_int(6)]
        );
    }
}
