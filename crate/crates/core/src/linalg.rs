//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; every routine here is a pure
//! function of its inputs. Hermitian inputs are symmetrized as `(M + M†)/2`
//! before diagonalization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entrywise tolerance for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(rows * cols, data.len());
    CMatrix::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

pub fn pauli_x() -> CMatrix {
    from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    diag(&[1.0, -1.0])
}

/// Kronecker (tensor) product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Outer product `|u⟩⟨v|`.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Projector `|v⟩⟨v|`.
pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

/// Largest entrywise deviation `max |M - M†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise absolute difference between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order together with the matrix whose
/// columns are the corresponding orthonormal eigenvectors.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let deviation = hermitian_deviation(m);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(eigh_unchecked(m))
}

/// [`eigh`] without the Hermitian check; the input is symmetrized first.
pub fn eigh_unchecked(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Cyclic Jacobi eigensolver for small Hermitian matrices held on the stack.
///
/// Only the upper triangle is read. Eigenvalues are unsorted; column `k` of
/// the returned matrix is the eigenvector for value `k`.
#[allow(clippy::needless_range_loop)]
pub fn small_eigh<const N: usize>(mut a: [[C64; N]; N]) -> ([f64; N], [[C64; N]; N]) {
    for i in 0..N {
        a[i][i] = C64::new(a[i][i].re, 0.0);
        for j in 0..i {
            a[i][j] = a[j][i].conj();
        }
    }
    let mut v = [[ZERO; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }
    for _ in 0..50 {
        let off: f64 = (0..N).flat_map(|i| (i + 1..N).map(move |j| (i, j))).map(|(i, j)| a[i][j].norm_sqr()).sum();
        let scale: f64 = (0..N).map(|i| a[i][i].re * a[i][i].re).sum::<f64>() + 2.0 * off;
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = (apq / r).conj();
                let theta = (a[q][q].re - a[p][p].re) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let cs = 1.0 / t.hypot(1.0);
                let sn = t * cs;
                // J = diag phase on q, then a real rotation in the (p, q) plane
                let jpp = C64::new(cs, 0.0);
                let jpq = C64::new(sn, 0.0);
                let jqp = phase * (-sn);
                let jqq = phase * cs;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * jpp + y * jqp;
                    row[q] = x * jpq + y * jqq;
                }
                for k in 0..N {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = jpp.conj() * x + jqp.conj() * y;
                    a[q][k] = jpq.conj() * x + jqq.conj() * y;
                }
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * jpp + y * jqp;
                    row[q] = x * jpq + y * jqq;
                }
            }
        }
    }
    let mut values = [0.0; N];
    for (i, val) in values.iter_mut().enumerate() {
        *val = a[i][i].re;
    }
    (values, v)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh_unchecked(m);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * f(values[j])
    });
    &scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are clipped.
pub fn sqrtm_psd(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Pseudo-inverse square root on the support `{λ > tol}`.
pub fn pinv_sqrt_psd(m: &CMatrix, tol: f64) -> CMatrix {
    hermitian_fn(m, |x| if x > tol { 1.0 / x.sqrt() } else { 0.0 })
}

/// Trace norm `Tr|M|`, the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if hermitian_deviation(m) <= HERMITIAN_TOL {
        return Ok(eigvalsh(m).iter().map(|x| x.abs()).sum());
    }
    Ok(m.clone().singular_values().iter().sum())
}

/// Operator (spectral) norm of a square matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Real Frobenius inner product `Re Tr(A† B)`.
pub fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Orthonormalizes the columns of `m` with the polar factor `M (M†M)^{-1/2}`.
pub fn polar_orthonormalize(m: &CMatrix) -> CMatrix {
    let gram = m.adjoint() * m;
    m * pinv_sqrt_psd(&gram, 1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_eigh_matches_dense_solver() {
        let mut rng = crate::random::rng_from_seed(11);
        for _ in 0..50 {
            let g = crate::random::ginibre(3, 3, &mut rng);
            let h = hermitian_part(&g);
            let mut a = [[ZERO; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] = h[(i, j)];
                }
            }
            let (vals, vecs) = small_eigh(a);
            let mut sorted = vals.to_vec();
            sorted.sort_by(f64::total_cmp);
            for (x, y) in sorted.iter().zip(eigvalsh(&h)) {
                assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
            }
            let v = CMatrix::from_fn(3, 3, |i, j| vecs[i][j]);
            let rebuilt = &v * diag(&vals) * v.adjoint();
            assert!(max_abs_diff(&rebuilt, &h) < 1e-12);
            assert!(max_abs_diff(&(v.adjoint() * &v), &identity(3)) < 1e-12);
        }
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&identity(2), &identity(2));
        assert_abs_diff_eq!(max_abs_diff(&k, &identity(4)), 0.0);
    }

    #[test]
    fn kron_of_basis_projectors() {
        let k = kron(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]));
        assert_abs_diff_eq!(max_abs_diff(&k, &diag(&[0.0, 1.0, 0.0, 0.0])), 0.0);
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let xx = kron(&pauli_x(), &pauli_x());
        let mut ket00 = CVector::zeros(4);
        ket00[0] = ONE;
        let out = &xx * &ket00;
        // |11⟩ is the last basis vector
        for (i, v) in out.iter().enumerate() {
            let expected = if i == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, expected);
            assert_abs_diff_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn eigh_identity_and_pauli() {
        let (vals, _) = eigh(&identity(3)).unwrap();
        for v in vals {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
        let (vals, _) = eigh(&pauli_x()).unwrap();
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_matches_quadratic_formula() {
        // [[a, b], [b*, d]] has eigenvalues (a+d)/2 ± sqrt(((a-d)/2)^2 + |b|^2)
        let cases = [(0.3, c(0.2, -0.7), -1.1), (2.0, c(0.0, 0.0), 2.0), (-0.4, c(1e-3, 4.0), 0.9)];
        for (a, b, d) in cases {
            let m = CMatrix::from_row_slice(2, 2, &[c(a, 0.0), b, b.conj(), c(d, 0.0)]);
            let mean = 0.5 * (a + d);
            let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            let (vals, _) = eigh(&m).unwrap();
            assert_abs_diff_eq!(vals[0], mean - radius, epsilon = 1e-10);
            assert_abs_diff_eq!(vals[1], mean + radius, epsilon = 1e-10);
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert_abs_diff_eq!(trace_norm(&diag(&[1.0, -1.0])).unwrap(), 2.0, epsilon = 1e-12);
        let zero = diag(&[1.0, 0.0]);
        let plus = from_real_rows(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert_abs_diff_eq!(
            trace_norm(&(zero - plus)).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(trace_norm(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn trace_norm_non_hermitian_uses_singular_values() {
        // nilpotent |0⟩⟨1| has a single singular value 1
        let m = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 1.0, epsilon = 1e-12);
    }
}
