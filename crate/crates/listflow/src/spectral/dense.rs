//! Dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration, with eigenvector accumulation. This is the classical
//! tred2/tql2 pair; it is exact-arithmetic-stable for symmetric input and
//! entirely adequate for the matrix sizes this crate produces (N <= 1024).

use crate::error::{Error, Result};

/// Iterations allowed per eigenvalue before the QL sweep gives up.
const MAX_QL_ITERATIONS: usize = 50;

/// Square matrix in row-major storage.
#[derive(Clone, Debug)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] += value;
    }

    /// Column `j` as an owned vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest |A_ij - A_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Eigenvalues in ascending order; column k of `vectors` is the unit
/// eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Full eigendecomposition of a symmetric matrix. The input is consumed and
/// overwritten by the accumulated orthogonal transform.
pub fn decompose(mut v: Matrix) -> Result<Eigendecomposition> {
    let n = v.n;
    debug_assert!(v.asymmetry() <= 1e-12 * (1.0 + v.norm()));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    sort_ascending(&mut v, &mut d);
    Ok(Eigendecomposition {
        values: d,
        vectors: v,
    })
}

/// Householder reduction of `v` to tridiagonal form, accumulating the
/// transformation in `v`. On return `d` holds the diagonal and `e[1..]` the
/// subdiagonal.
fn tred2(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let mut g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v.add(k, j, -(f * e[k] + g * d[k]));
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        v.set(n - 1, i, v.get(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    v.add(k, j, -g * d[k]);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal (d, e), rotating the
/// columns of `v` along with it.
fn tql2(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = 2.0f64.powi(-52);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence {
                        row: l,
                        iterations: MAX_QL_ITERATIONS,
                    });
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v.get(k, i + 1);
                        v.set(k, i + 1, s * v.get(k, i) + c * h);
                        v.set(k, i, c * v.get(k, i) - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Selection sort keeping columns of `v` attached to their eigenvalues.
fn sort_ascending(v: &mut Matrix, d: &mut [f64]) {
    let n = v.n;
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                let tmp = v.get(row, i);
                v.set(row, i, v.get(row, k));
                v.set(row, k, tmp);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> Matrix {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    fn residual(a: &Matrix, eig: &Eigendecomposition) -> f64 {
        let n = a.n();
        let mut worst = 0.0f64;
        for k in 0..n {
            let v = eig.vectors.column(k);
            for i in 0..n {
                let mut av = 0.0;
                for j in 0..n {
                    av += a.get(i, j) * v[j];
                }
                worst = worst.max((av - eig.values[k] * v[i]).abs());
            }
        }
        worst
    }

    fn orthogonality_defect(eig: &Eigendecomposition) -> f64 {
        let n = eig.vectors.n();
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += eig.vectors.get(i, p) * eig.vectors.get(i, q);
                }
                let target = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    #[test]
    fn solves_one_by_one() {
        let a = from_rows(&[&[7.5]]);
        let eig = decompose(a).unwrap();
        assert_eq!(eig.values, vec![7.5]);
        assert_eq!(eig.vectors.get(0, 0).abs(), 1.0);
    }

    #[test]
    fn solves_two_by_two_exactly() {
        let a = from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let eig = decompose(a.clone()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
        assert!(residual(&a, &eig) < 1e-14);
    }

    #[test]
    fn matches_tridiagonal_closed_form() {
        // eig([[4,1,0],[1,4,1],[0,1,4]]) = {4 - sqrt(2), 4, 4 + sqrt(2)}
        let a = from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 4.0, 1.0], &[0.0, 1.0, 4.0]]);
        let eig = decompose(a).unwrap();
        let expected = [4.0 - 2.0f64.sqrt(), 4.0, 4.0 + 2.0f64.sqrt()];
        for (got, want) in eig.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn diagonal_input_is_sorted_passthrough() {
        let a = from_rows(&[
            &[3.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
            &[0.0, 0.0, 2.0, 0.0],
            &[0.0, 0.0, 0.0, 0.5],
        ]);
        let eig = decompose(a).unwrap();
        assert_eq!(eig.values, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn circulant_second_difference_spectrum() {
        // Periodic 1-D stiffness matrix; eigenvalues 2 - 2 cos(2 pi k / n).
        let n = 16;
        let mut a = Matrix::zeros(n);
        for i in 0..n {
            a.set(i, i, 2.0);
            a.add(i, (i + 1) % n, -1.0);
            a.add(i, (i + n - 1) % n, -1.0);
        }
        let eig = decompose(a).unwrap();
        let mut expected: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (got, want) in eig.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn random_matrix_reconstruction_and_orthogonality() {
        let n = 60;
        let mut a = Matrix::zeros(n);
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in 0..=i {
                let x = next();
                a.set(i, j, x);
                a.set(j, i, x);
            }
        }
        let eig = decompose(a.clone()).unwrap();
        let scale = a.norm();
        assert!(residual(&a, &eig) <= 1e-10 * scale, "residual too large");
        assert!(orthogonality_defect(&eig) <= 1e-12, "vectors not orthonormal");
        let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
        let sum: f64 = eig.values.iter().sum();
        assert!((trace - sum).abs() <= 1e-11 * (1.0 + scale));
    }

    #[test]
    fn clustered_eigenvalues_stay_orthogonal() {
        // Two nearly equal eigenvalues through a similarity rotation.
        let d = [1.0, 1.0 + 1e-12, 5.0];
        let theta: f64 = 0.7;
        let (s, c) = theta.sin_cos();
        // Rotate in the (0, 2) plane: A = R diag(d) R^T.
        let r = [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]];
        let mut a = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut x = 0.0;
                for (k, dk) in d.iter().enumerate() {
                    x += r[i][k] * dk * r[j][k];
                }
                a.set(i, j, x);
            }
        }
        let eig = decompose(a.clone()).unwrap();
        assert!(residual(&a, &eig) < 1e-13);
        assert!(orthogonality_defect(&eig) < 1e-13);
    }
}
