//! Density matrices, purifications and partial traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, HERMITIAN_TOL};
use crate::random::{ginibre, SeededRng};

/// Tolerance on trace and eigenvalue positivity for a valid density matrix.
pub const STATE_TOL: f64 = 1e-10;

/// Positive semidefinite, unit-trace Hermitian matrix with subsystem dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates and wraps `mat`. `dims` must multiply to the matrix dimension.
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        check_dims(&dims, mat.nrows())?;
        let deviation = linalg::hermitian_deviation(&mat);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = linalg::trace(&mat).re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min_eig = linalg::eigvalsh(&mat).first().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self {
            mat: linalg::hermitian_part(&mat),
            dims,
        })
    }

    /// Single-system state.
    pub fn single(mat: CMatrix) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, vec![n])
    }

    /// Wraps a matrix produced by a CPTP operation on a valid state. Only
    /// symmetrizes; positivity and trace hold up to round-off.
    pub(crate) fn from_cptp_output(mat: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.nrows());
        Self {
            mat: linalg::hermitian_part(&mat),
            dims,
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: linalg::identity(d).unscale(d as f64),
            dims: vec![d],
        }
    }

    /// `|v⟩⟨v|` for a unit vector `v`.
    pub fn pure(v: &CVector, dims: Vec<usize>) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        check_dims(&dims, v.len())?;
        Ok(Self {
            mat: linalg::projector(v),
            dims,
        })
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::single(linalg::diag(probs))
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Reinterprets the subsystem structure.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        self.dims = dims;
        Ok(self)
    }

    /// Dimensions `(d_A, d_B)` of a bipartite state.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::DimMetadataMissing),
        }
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            mat: linalg::kron(&self.mat, &other.mat),
            dims,
        }
    }

    /// Eigenvalues in ascending order, negatives clipped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat).into_iter().map(|x| x.max(0.0)).collect()
    }

    pub fn purity(&self) -> f64 {
        linalg::real_inner(&self.mat, &self.mat)
    }

    /// Swaps the two halves of a bipartite state, `τ^{AB} ↦ τ^{BA}`.
    pub fn swap_parties(&self) -> Result<DensityMatrix> {
        let (da, db) = self.bipartite_dims()?;
        let idx = |a: usize, b: usize| a * db + b;
        let n = da * db;
        let mut out = CMatrix::zeros(n, n);
        for a in 0..da {
            for b in 0..db {
                for a2 in 0..da {
                    for b2 in 0..db {
                        out[(b * da + a, b2 * da + a2)] = self.mat[(idx(a, b), idx(a2, b2))];
                    }
                }
            }
        }
        Ok(Self {
            mat: out,
            dims: vec![db, da],
        })
    }
}

fn check_dims(dims: &[usize], n: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != n {
        return Err(Error::DimMismatch(format!(
            "subsystem dims {dims:?} do not multiply to {n}"
        )));
    }
    Ok(())
}

/// Partial trace keeping the subsystems listed in `keep` (output in ascending
/// subsystem order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n_sub = rho.dims.len();
    if keep.is_empty() {
        return Err(Error::BadParam("partial trace must keep at least one subsystem".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&k| k >= n_sub) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            count: n_sub,
        });
    }
    let traced: Vec<usize> = (0..n_sub).filter(|k| !kept.contains(k)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| rho.dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| rho.dims[k]).collect();
    let kd: usize = kept_dims.iter().product();
    let td: usize = traced_dims.iter().product();

    // strides of each subsystem in the full row-major index
    let mut strides = vec![1usize; n_sub];
    for k in (0..n_sub.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * rho.dims[k + 1];
    }
    let offset = |subs: &[usize], sub_dims: &[usize], mut flat: usize| -> usize {
        let mut acc = 0;
        for (pos, &s) in subs.iter().enumerate().rev() {
            let d = sub_dims[pos];
            acc += (flat % d) * strides[s];
            flat /= d;
        }
        acc
    };
    let kept_off: Vec<usize> = (0..kd).map(|a| offset(&kept, &kept_dims, a)).collect();
    let traced_off: Vec<usize> = (0..td).map(|t| offset(&traced, &traced_dims, t)).collect();

    let mut out = CMatrix::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = c(0.0, 0.0);
            for &t in &traced_off {
                acc += rho.mat[(kept_off[a] + t, kept_off[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix::from_cptp_output(out, kept_dims))
}

/// Unit vector on `R ⊗ A`, stored with the reference index outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct PureBipartiteState {
    vec: CVector,
    dim_r: usize,
    dim_a: usize,
}

impl PureBipartiteState {
    pub fn new(vec: CVector, dim_r: usize, dim_a: usize) -> Result<Self> {
        if vec.len() != dim_r * dim_a {
            return Err(Error::DimMismatch(format!(
                "vector length {} != {dim_r}x{dim_a}",
                vec.len()
            )));
        }
        let norm = vec.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { vec, dim_r, dim_a })
    }

    /// Normalizes `vec` before wrapping it.
    pub fn normalized(vec: CVector, dim_r: usize, dim_a: usize) -> Result<Self> {
        let norm = vec.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Self::new(vec.unscale(norm), dim_r, dim_a)
    }

    /// `Σ_i |ii⟩ / √d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = CVector::zeros(d * d);
        let amp = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            v[i * d + i] = c(amp, 0.0);
        }
        Self {
            vec: v,
            dim_r: d,
            dim_a: d,
        }
    }

    pub fn vec(&self) -> &CVector {
        &self.vec
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    /// Coefficient matrix `M[r, a] = ⟨r a|ψ⟩`.
    pub fn coefficients(&self) -> CMatrix {
        CMatrix::from_fn(self.dim_r, self.dim_a, |r, a| self.vec[r * self.dim_a + a])
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_cptp_output(linalg::projector(&self.vec), vec![self.dim_r, self.dim_a])
    }

    /// `Tr_R |ψ⟩⟨ψ|`.
    pub fn reduced_system(&self) -> DensityMatrix {
        let mt = self.coefficients().transpose();
        DensityMatrix::from_cptp_output(&mt * mt.adjoint(), vec![self.dim_a])
    }

    /// `Tr_A |ψ⟩⟨ψ|`.
    pub fn reduced_reference(&self) -> DensityMatrix {
        let m = self.coefficients();
        DensityMatrix::from_cptp_output(&m * m.adjoint(), vec![self.dim_r])
    }
}

/// Purification `Σ_i √λ_i |i⟩_R |e_i⟩_A` with `dim R = dim A`.
pub fn purify(rho: &DensityMatrix) -> PureBipartiteState {
    let d = rho.dim();
    let (values, vectors) = linalg::eigh_unchecked(rho.mat());
    let mut v = CVector::zeros(d * d);
    for (i, &lambda) in values.iter().enumerate() {
        let amp = lambda.max(0.0).sqrt();
        for a in 0..d {
            v[i * d + a] = vectors[(a, i)] * amp;
        }
    }
    let norm = v.norm();
    PureBipartiteState {
        vec: v.unscale(norm),
        dim_r: d,
        dim_a: d,
    }
}

/// Random state from the induced measure: the partial trace of a Haar-random
/// pure state on `system ⊗ ancilla(rank)`.
pub fn random_state(dims: &[usize], rank: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    let d: usize = dims.iter().product();
    if dims.is_empty() || d == 0 {
        return Err(Error::BadParam("empty dimension list".into()));
    }
    if rank == 0 || rank > d {
        return Err(Error::BadParam(format!("rank {rank} outside 1..={d}")));
    }
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    Ok(DensityMatrix::from_cptp_output(m.unscale(tr), dims.to_vec()))
}

/// Serializable density matrix: `{dims, re, im}` with row-major entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(value: DensityMatrixJson) -> Result<Self> {
        let n = value.re.len();
        if value.im.len() != n || value.re.iter().chain(value.im.iter()).any(|r| r.len() != n) {
            return Err(Error::Parse("density matrix rows must be square".into()));
        }
        let m = CMatrix::from_fn(n, n, |i, j| c(value.re[i][j], value.im[i][j]));
        DensityMatrix::new(m, value.dims)
    }
}
