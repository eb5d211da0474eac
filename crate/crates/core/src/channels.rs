//! CPTP maps in Kraus and Choi form, composition, canonical instances and
//! Haar-random generation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::random::{haar_isometry, SeededRng};
use crate::state::{DensityMatrix, PureBipartiteState};

/// Tolerance for trace preservation and Choi positivity.
pub const CPTP_TOL: f64 = 1e-9;

/// Kraus operators below this Frobenius norm are dropped from zoo channels.
const NEGLIGIBLE_KRAUS: f64 = 1e-15;

/// Channel `A → B` as a list of `d_B × d_A` Kraus operators with
/// `Σ_k A_k† A_k = I_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl KrausChannel {
    /// Validates trace preservation. Kraus sets larger than `d_A·d_B` are
    /// re-factorized through the Choi matrix.
    pub fn new(kraus: Vec<CMatrix>, dim_in: usize, dim_out: usize) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::NotCptp("no Kraus operators".into()));
        }
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimMismatch(format!(
                "Kraus operator is {:?}, expected ({dim_out}, {dim_in})",
                bad.shape()
            )));
        }
        let ch = Self {
            kraus,
            dim_in,
            dim_out,
        };
        let err = ch.trace_preservation_error();
        if err > CPTP_TOL {
            return Err(Error::NotCptp(format!("Σ A†A deviates from I by {err:e}")));
        }
        if ch.kraus.len() > dim_in * dim_out {
            return ch.choi().to_kraus();
        }
        Ok(ch)
    }

    /// Builds a channel whose trace preservation is guaranteed by
    /// construction (isometry slices, products of channels).
    pub(crate) fn from_isometry_blocks(kraus: Vec<CMatrix>, dim_in: usize, dim_out: usize) -> Self {
        Self {
            kraus,
            dim_in,
            dim_out,
        }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `max |Σ A_k† A_k − I|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(self.dim_in))
    }

    fn check_input(&self, d: usize) -> Result<()> {
        if d != self.dim_in {
            return Err(Error::DimMismatch(format!(
                "channel input dimension {} != state dimension {d}",
                self.dim_in
            )));
        }
        Ok(())
    }

    /// `N(X) = Σ_k A_k X A_k†` on an arbitrary operator.
    pub fn apply_operator(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// Adjoint map `N†(Y) = Σ_k A_k† Y A_k`.
    pub fn apply_adjoint(&self, y: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    /// Complementary (environment) output `[Tr(A_k ρ A_l†)]_{kl}`.
    pub fn apply_complementary(&self, rho: &CMatrix) -> CMatrix {
        let n = self.kraus.len();
        let images: Vec<CMatrix> = self.kraus.iter().map(|k| k * rho).collect();
        CMatrix::from_fn(n, n, |k, l| {
            let al = &self.kraus[l];
            // Tr(A_k ρ A_l†) = Σ_{b,a} (A_k ρ)[b,a] conj(A_l[b,a])
            images[k].iter().zip(al.iter()).map(|(x, y)| x * y.conj()).sum()
        })
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho.dim())?;
        Ok(DensityMatrix::from_cptp_output(
            self.apply_operator(rho.mat()),
            vec![self.dim_out],
        ))
    }

    /// `(id_n ⊗ N)(X)` for an operator `X` on `C^n ⊗ A`.
    pub fn apply_extended(&self, x: &CMatrix, dim_ref: usize) -> CMatrix {
        let id = linalg::identity(dim_ref);
        let n = dim_ref * self.dim_out;
        let mut out = CMatrix::zeros(n, n);
        for k in &self.kraus {
            let big = linalg::kron(&id, k);
            out += &big * x * big.adjoint();
        }
        out
    }

    /// `(id^R ⊗ N^A)(Ψ^{RA})` on `R ⊗ B`.
    pub fn apply_to_subsystem(&self, state: &PureBipartiteState) -> Result<DensityMatrix> {
        self.check_input(state.dim_a())?;
        let dr = state.dim_r();
        let m = state.coefficients();
        let n = dr * self.dim_out;
        let mut out = CMatrix::zeros(n, n);
        for k in &self.kraus {
            // (I ⊗ A_k)|ψ⟩ has coefficient matrix M A_kᵀ
            let mk = &m * k.transpose();
            let v = CVector::from_fn(n, |i, _| mk[(i / self.dim_out, i % self.dim_out)]);
            out += linalg::projector(&v);
        }
        Ok(DensityMatrix::from_cptp_output(out, vec![dr, self.dim_out]))
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)` with trace `d_A`.
    pub fn choi(&self) -> ChoiMatrix {
        let (da, db) = (self.dim_in, self.dim_out);
        let n = da * db;
        let mut mat = CMatrix::zeros(n, n);
        for k in &self.kraus {
            let v = CVector::from_fn(n, |idx, _| k[(idx % db, idx / db)]);
            mat += linalg::projector(&v);
        }
        ChoiMatrix {
            mat,
            dim_in: da,
            dim_out: db,
        }
    }

    /// Serial composition `second ∘ self`.
    pub fn then(&self, second: &KrausChannel) -> Result<KrausChannel> {
        compose(second, self)
    }

    pub fn to_json(&self) -> KrausJson {
        KrausJson {
            dim_a: self.dim_in,
            dim_b: self.dim_out,
            kraus: self
                .kraus
                .iter()
                .map(row_major_pairs)
                .collect(),
        }
    }
}

fn row_major_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn from_pairs(rows: usize, cols: usize, data: &[[f64; 2]]) -> Result<CMatrix> {
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = data[i * cols + j];
        c(re, im)
    }))
}

/// Serialized Kraus channel. Each operator is a row-major list of
/// `[re, im]` pairs of length `dimB·dimA`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KrausJson {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<KrausJson> for KrausChannel {
    type Error = Error;

    fn try_from(value: KrausJson) -> Result<Self> {
        let ops = value
            .kraus
            .iter()
            .map(|k| from_pairs(value.dim_b, value.dim_a, k))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(ops, value.dim_a, value.dim_b)
    }
}

/// Serialized Choi matrix, row-major `[re, im]` pairs of size `(dimA·dimB)²`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChoiJson {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    pub choi: Vec<[f64; 2]>,
}

/// Choi matrix on `A ⊗ B`, normalized to trace `d_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    mat: CMatrix,
    dim_in: usize,
    dim_out: usize,
}

impl ChoiMatrix {
    /// Validates positivity and `Tr_B J = I_A`.
    pub fn new(mat: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if mat.shape() != (n, n) {
            return Err(Error::DimMismatch(format!(
                "Choi matrix is {:?}, expected ({n}, {n})",
                mat.shape()
            )));
        }
        let deviation = linalg::hermitian_deviation(&mat);
        if deviation > CPTP_TOL {
            return Err(Error::NotCptp(format!("Choi matrix not Hermitian ({deviation:e})")));
        }
        let choi = Self {
            mat: linalg::hermitian_part(&mat),
            dim_in,
            dim_out,
        };
        let min_eig = linalg::eigvalsh(&choi.mat)[0];
        if min_eig < -CPTP_TOL {
            return Err(Error::NotCptp(format!("Choi eigenvalue {min_eig:e} < 0")));
        }
        let tp = linalg::max_abs_diff(&choi.input_marginal(), &linalg::identity(dim_in));
        if tp > CPTP_TOL {
            return Err(Error::NotCptp(format!("Tr_B J deviates from I by {tp:e}")));
        }
        Ok(choi)
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `Tr_B J`.
    pub fn input_marginal(&self) -> CMatrix {
        let (da, db) = (self.dim_in, self.dim_out);
        CMatrix::from_fn(da, da, |i, j| (0..db).map(|b| self.mat[(i * db + b, j * db + b)]).sum())
    }

    /// Rank-many Kraus operators from the eigendecomposition of `J`.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let (da, db) = (self.dim_in, self.dim_out);
        let (values, vectors) = linalg::eigh_unchecked(&self.mat);
        let scale = values.iter().copied().fold(0.0, f64::max);
        let mut ops = Vec::new();
        for (j, &lambda) in values.iter().enumerate().rev() {
            if lambda <= 1e-14 * scale.max(1.0) {
                continue;
            }
            let amp = lambda.sqrt();
            ops.push(CMatrix::from_fn(db, da, |b, a| vectors[(a * db + b, j)] * amp));
        }
        let ch = KrausChannel {
            kraus: ops,
            dim_in: da,
            dim_out: db,
        };
        let err = ch.trace_preservation_error();
        if ch.kraus.is_empty() || err > CPTP_TOL {
            return Err(Error::NotCptp(format!("Choi factorization is not trace preserving ({err:e})")));
        }
        Ok(ch)
    }

    pub fn to_json(&self) -> ChoiJson {
        ChoiJson {
            dim_a: self.dim_in,
            dim_b: self.dim_out,
            choi: row_major_pairs(&self.mat),
        }
    }
}

impl TryFrom<ChoiJson> for ChoiMatrix {
    type Error = Error;

    fn try_from(value: ChoiJson) -> Result<Self> {
        let n = value.dim_a * value.dim_b;
        let mat = from_pairs(n, n, &value.choi)?;
        ChoiMatrix::new(mat, value.dim_a, value.dim_b)
    }
}

/// `second ∘ first`. Product Kraus sets exceeding `d_in·d_out` operators are
/// re-factorized through the Choi matrix.
pub fn compose(second: &KrausChannel, first: &KrausChannel) -> Result<KrausChannel> {
    if first.dim_out != second.dim_in {
        return Err(Error::DimMismatch(format!(
            "cannot compose {}→{} after {}→{}",
            second.dim_in, second.dim_out, first.dim_in, first.dim_out
        )));
    }
    let mut ops = Vec::with_capacity(first.kraus.len() * second.kraus.len());
    for s in &second.kraus {
        for f in &first.kraus {
            ops.push(s * f);
        }
    }
    let ch = KrausChannel {
        kraus: ops,
        dim_in: first.dim_in,
        dim_out: second.dim_out,
    };
    if ch.kraus.len() > ch.dim_in * ch.dim_out {
        return ch.choi().to_kraus();
    }
    Ok(ch)
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::BadParam(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

fn weighted(ops: Vec<(f64, CMatrix)>) -> Vec<CMatrix> {
    ops.into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, k)| k.scale(w.sqrt()))
        .filter(|k| k.norm() > NEGLIGIBLE_KRAUS)
        .collect()
}

pub fn identity(d: usize) -> KrausChannel {
    KrausChannel::from_isometry_blocks(vec![linalg::identity(d)], d, d)
}

/// Unitary channel `ρ ↦ U ρ U†`.
pub fn unitary(u: CMatrix) -> Result<KrausChannel> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    let d = u.nrows();
    KrausChannel::new(vec![u], d, d)
}

/// Qubit phase rotation `diag(1, e^{iθ})`.
pub fn phase_rotation(theta: f64) -> KrausChannel {
    let u = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(theta.cos(), theta.sin())]);
    KrausChannel::from_isometry_blocks(vec![u], 2, 2)
}

/// Generalized Pauli (Weyl) operator `X^a Z^b` in dimension `d`.
pub fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    let omega = 2.0 * PI / d as f64;
    CMatrix::from_fn(d, d, |row, col| {
        if row == (col + a) % d {
            let phase = omega * (b * col) as f64;
            c(phase.cos(), phase.sin())
        } else {
            ZERO
        }
    })
}

/// `ρ ↦ (1 − p) ρ + p I/d`.
pub fn depolarizing(p: f64, d: usize) -> Result<KrausChannel> {
    check_prob("p", p)?;
    if d == 0 {
        return Err(Error::BadParam("dimension must be positive".into()));
    }
    let d2 = (d * d) as f64;
    let mut ops = vec![(1.0 - p + p / d2, linalg::identity(d))];
    for a in 0..d {
        for b in 0..d {
            if a == 0 && b == 0 {
                continue;
            }
            ops.push((p / d2, weyl(d, a, b)));
        }
    }
    Ok(KrausChannel::from_isometry_blocks(weighted(ops), d, d))
}

/// Qubit dephasing `ρ ↦ (1 − p) ρ + p ZρZ`; `p = 1/2` removes all coherences.
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_prob("p", p)?;
    let ops = weighted(vec![(1.0 - p, linalg::identity(2)), (p, linalg::pauli_z())]);
    Ok(KrausChannel::from_isometry_blocks(ops, 2, 2))
}

/// Qubit amplitude damping with decay probability `γ`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_prob("gamma", gamma)?;
    let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c((1.0 - gamma).sqrt(), 0.0)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[ZERO, c(gamma.sqrt(), 0.0), ZERO, ZERO]);
    let ops = vec![k0, k1].into_iter().filter(|k| k.norm() > NEGLIGIBLE_KRAUS).collect();
    Ok(KrausChannel::from_isometry_blocks(ops, 2, 2))
}

/// Erasure into `d + 1` levels: with probability `p` the input is replaced
/// by the flag state `|d⟩`.
pub fn erasure(p: f64, d: usize) -> Result<KrausChannel> {
    check_prob("p", p)?;
    let embed = CMatrix::from_fn(d + 1, d, |i, j| if i == j { c(1.0, 0.0) } else { ZERO });
    let mut ops = vec![(1.0 - p, embed)];
    for i in 0..d {
        ops.push((p, CMatrix::from_fn(d + 1, d, |r, col| if r == d && col == i { c(1.0, 0.0) } else { ZERO })));
    }
    Ok(KrausChannel::from_isometry_blocks(weighted(ops), d, d + 1))
}

/// Replacement channel `ρ ↦ Tr(ρ) σ` from `d_in` levels.
pub fn replace_with_state(sigma: &DensityMatrix, dim_in: usize) -> KrausChannel {
    let d_out = sigma.dim();
    let (values, vectors) = linalg::eigh_unchecked(sigma.mat());
    let mut ops = Vec::new();
    for (j, &lambda) in values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        for i in 0..dim_in {
            ops.push(CMatrix::from_fn(d_out, dim_in, |b, a| {
                if a == i {
                    vectors[(b, j)] * lambda.sqrt()
                } else {
                    ZERO
                }
            }));
        }
    }
    let ops = ops.into_iter().filter(|k| k.norm() > NEGLIGIBLE_KRAUS).collect();
    KrausChannel::from_isometry_blocks(ops, dim_in, d_out)
}

/// Named canonical channel. Recognized names and parameters:
/// `identity(d)`, `x`, `y`, `z`, `phase(theta)`, `depolarizing(p, d)`,
/// `dephasing(p)`, `amplitude_damping(gamma)`, `erasure(p, d)`,
/// `replace_mixed(d)`.
pub fn channel_zoo(name: &str, params: &BTreeMap<String, f64>) -> Result<KrausChannel> {
    let get = |key: &str, default: Option<f64>| -> Result<f64> {
        params
            .get(key)
            .copied()
            .or(default)
            .ok_or_else(|| Error::BadParam(format!("{name} needs parameter `{key}`")))
    };
    let dim = |default: f64| -> Result<usize> {
        let d = get("d", Some(default))?;
        if d < 1.0 || d.fract() != 0.0 {
            return Err(Error::BadParam(format!("d = {d} is not a positive integer")));
        }
        Ok(d as usize)
    };
    match name {
        "identity" | "id" => Ok(identity(dim(2.0)?)),
        "x" => unitary(linalg::pauli_x()),
        "y" => unitary(linalg::pauli_y()),
        "z" => unitary(linalg::pauli_z()),
        "phase" => Ok(phase_rotation(get("theta", None)?)),
        "depolarizing" => depolarizing(get("p", None)?, dim(2.0)?),
        "dephasing" => dephasing(get("p", None)?),
        "amplitude_damping" => amplitude_damping(get("gamma", None)?),
        "erasure" => erasure(get("p", None)?, dim(2.0)?),
        "replace_mixed" => {
            let d = dim(2.0)?;
            Ok(replace_with_state(&DensityMatrix::maximally_mixed(d), d))
        }
        other => Err(Error::UnknownChannel(other.to_string())),
    }
}

/// Parses `name` or `name:key=value,key=value` into a zoo channel.
pub fn parse_zoo_spec(spec: &str) -> Result<KrausChannel> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), r),
        None => (spec.trim(), ""),
    };
    let mut params = BTreeMap::new();
    for part in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number `{v}` for `{k}`")))?;
        params.insert(k.trim().to_string(), value);
    }
    channel_zoo(name, &params)
}

/// Haar-random channel of Kraus rank `rank` via a random Stinespring
/// isometry `A → B ⊗ E` with `dim E = rank`.
pub fn random_channel(dim_in: usize, dim_out: usize, rank: usize, rng: &mut SeededRng) -> Result<KrausChannel> {
    if dim_in == 0 || dim_out == 0 {
        return Err(Error::BadParam("dimensions must be positive".into()));
    }
    if rank == 0 || rank > dim_in * dim_out {
        return Err(Error::BadParam(format!("rank {rank} outside 1..={}", dim_in * dim_out)));
    }
    if dim_out * rank < dim_in {
        return Err(Error::BadParam(format!(
            "no isometry {dim_in} → {dim_out}·{rank} exists"
        )));
    }
    let v = haar_isometry(dim_out * rank, dim_in, rng);
    let ops = (0..rank)
        .map(|k| CMatrix::from_fn(dim_out, dim_in, |b, a| v[(b * rank + k, a)]))
        .collect();
    Ok(KrausChannel::from_isometry_blocks(ops, dim_in, dim_out))
}
