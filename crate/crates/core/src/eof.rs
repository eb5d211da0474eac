//! Entanglement of formation.
//!
//! The variational estimate minimizes the average pure-state entanglement
//! over ensemble decompositions of `τ`. Every size-`m` decomposition is
//! `φ̃_i = Σ_j U_ij √λ_j |e_j⟩` for an `m × rank` isometry `U`, where
//! `λ_j, |e_j⟩` is the eigensystem of `τ`; the optimizer runs retracted
//! gradient descent over `U` from several Haar-random starts. Any feasible
//! decomposition gives an upper bound on `E_f`.
//!
//! For two qubits [`wootters_eof`] evaluates the concurrence formula.

use num_complex::Complex64 as C64;

use crate::entropy::{binary_entropy, entropy_of_spectrum, SPECTRUM_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::manifold::{self, DescentConfig};
use crate::parallel::map_indexed;
use crate::random::{haar_isometry, stream};
use crate::state::DensityMatrix;

/// Largest supported `d_A·d_B`.
pub const MAX_EOF_DIM: usize = 9;

#[derive(Clone, Debug)]
pub struct EofConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Objective improvement per sweep below which a restart is converged.
    pub tol: f64,
    pub seed: u64,
    /// Ensemble size; defaults to `rank²` capped at `(d_A d_B)²`.
    pub ensemble_size: Option<usize>,
    /// Stop once a decomposition with average entanglement at most this
    /// value has been found.
    pub stop_below: Option<f64>,
}

impl Default for EofConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iter: 2000,
            tol: 1e-8,
            seed: 0,
            ensemble_size: None,
            stop_below: None,
        }
    }
}

/// Pure-state ensemble `{p_i, |φ_i⟩}` on `A ⊗ B`.
#[derive(Clone, Debug)]
pub struct EnsembleDecomposition {
    pub weights: Vec<f64>,
    pub pure_states: Vec<CVector>,
}

impl EnsembleDecomposition {
    /// `Σ p_i |φ_i⟩⟨φ_i|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.pure_states.first().map_or(0, |v| v.len());
        let mut out = CMatrix::zeros(n, n);
        for (p, v) in self.weights.iter().zip(&self.pure_states) {
            out += linalg::projector(v).scale(*p);
        }
        out
    }

    /// `Σ p_i E(φ_i)`.
    pub fn average_entanglement(&self, dim_a: usize, dim_b: usize) -> f64 {
        self.weights
            .iter()
            .zip(&self.pure_states)
            .map(|(p, v)| p * entanglement_entropy(v, dim_a, dim_b))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct EofResult {
    /// Upper bound on `E_f`, equal to the average entanglement of `decomposition`.
    pub value: f64,
    pub decomposition: EnsembleDecomposition,
    pub restarts_used: usize,
    pub converged: bool,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

impl EofResult {
    /// Spread between the best and the second-best restart values, a
    /// practical saturation indicator.
    pub fn restart_spread(&self) -> f64 {
        let mut v = self.restart_values.clone();
        v.sort_by(f64::total_cmp);
        if v.len() < 2 {
            return 0.0;
        }
        v[1] - v[0]
    }
}

/// Coefficient matrix of `|φ⟩` arranged as (smaller side) × (larger side).
fn coefficient_matrix(phi: &CVector, dim_a: usize, dim_b: usize) -> CMatrix {
    if dim_a <= dim_b {
        CMatrix::from_fn(dim_a, dim_b, |a, b| phi[a * dim_b + b])
    } else {
        CMatrix::from_fn(dim_b, dim_a, |b, a| phi[a * dim_b + b])
    }
}

/// Entropy of entanglement of an (unnormalized) vector's normalized state.
fn entanglement_entropy(phi: &CVector, dim_a: usize, dim_b: usize) -> f64 {
    let m = coefficient_matrix(phi, dim_a, dim_b);
    let rho = &m * m.adjoint();
    let p = linalg::trace(&rho).re;
    if p <= 0.0 {
        return 0.0;
    }
    let spec: Vec<f64> = linalg::eigvalsh(&rho).iter().map(|x| x / p).collect();
    entropy_of_spectrum(&spec)
}

/// Entropy of pure-state entanglement `S(Tr_B |φ⟩⟨φ|)`.
pub fn pure_entanglement(phi: &CVector, dim_a: usize, dim_b: usize) -> Result<f64> {
    if phi.len() != dim_a * dim_b {
        return Err(Error::DimMismatch(format!(
            "vector length {} != {dim_a}x{dim_b}",
            phi.len()
        )));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    Ok(entanglement_entropy(phi, dim_a, dim_b))
}

/// Average entanglement of the ensemble generated by an isometry `U`.
pub(crate) struct EnsembleObjective {
    /// `V √Λ`, columns spanning the support of `τ`.
    weighted_vectors: CMatrix,
    dim_a: usize,
    dim_b: usize,
}

impl EnsembleObjective {
    pub(crate) fn new(tau: &DensityMatrix, dim_a: usize, dim_b: usize) -> Self {
        let (values, vectors) = linalg::eigh_unchecked(tau.mat());
        let top = values.iter().copied().fold(0.0, f64::max);
        let support: Vec<usize> = (0..values.len()).filter(|&j| values[j] > 1e-13 * top).collect();
        let d = tau.dim();
        let weighted_vectors =
            CMatrix::from_fn(d, support.len(), |i, k| vectors[(i, support[k])] * values[support[k]].sqrt());
        Self {
            weighted_vectors,
            dim_a,
            dim_b,
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.weighted_vectors.ncols()
    }

    /// Unnormalized ensemble members as columns, `W Uᵀ`.
    fn members(&self, u: &CMatrix) -> CMatrix {
        &self.weighted_vectors * u.transpose()
    }

    pub(crate) fn evaluate(&self, u: &CMatrix, with_grad: bool) -> (f64, Option<CMatrix>) {
        match self.dim_a.min(self.dim_b) {
            1 => self.evaluate_sized::<1>(u, with_grad),
            2 => self.evaluate_sized::<2>(u, with_grad),
            _ => self.evaluate_sized::<3>(u, with_grad),
        }
    }

    /// Member loop with the `N × N` reduced states on the stack, `N` the
    /// smaller local dimension.
    fn evaluate_sized<const N: usize>(&self, u: &CMatrix, with_grad: bool) -> (f64, Option<CMatrix>) {
        let (da, db) = (self.dim_a, self.dim_b);
        let large = da.max(db);
        // flat index of coefficient (small s, large l)
        let idx = |s: usize, l: usize| if da <= db { s * db + l } else { l * db + s };
        let members = self.members(u);
        let m = members.ncols();
        let mut value = 0.0;
        let mut member_grads = if with_grad { Some(CMatrix::zeros(da * db, m)) } else { None };
        for i in 0..m {
            let phi = members.column(i);
            let mut rho = [[ZERO; N]; N];
            for r in 0..N {
                for c in r..N {
                    rho[r][c] = (0..large).map(|l| phi[idx(r, l)] * phi[idx(c, l)].conj()).sum();
                }
            }
            let p: f64 = (0..N).map(|r| rho[r][r].re).sum();
            if p <= 1e-300 {
                continue;
            }
            let (mu, vecs) = linalg::small_eigh(rho);
            let mut logs = [0.0; N];
            for k in 0..N {
                let x = mu[k] / p;
                if x > 0.0 {
                    value -= mu[k] * x.log2();
                    logs[k] = x.log2();
                }
            }
            if let Some(grads) = member_grads.as_mut() {
                // d[p S(ρ̃/p)] = −Tr[dρ̃ log₂(ρ̃/p)], so ∂/∂M = −2 log₂(ρ̃/p) M
                let mut log_rho = [[ZERO; N]; N];
                for r in 0..N {
                    for c in 0..N {
                        log_rho[r][c] = (0..N).map(|k| vecs[r][k] * vecs[c][k].conj() * logs[k]).sum();
                    }
                }
                for r in 0..N {
                    for l in 0..large {
                        let g: C64 = (0..N).map(|c| log_rho[r][c] * phi[idx(c, l)]).sum();
                        grads[(idx(r, l), i)] = g * -2.0;
                    }
                }
            }
        }
        let grad = member_grads.map(|g| (self.weighted_vectors.adjoint() * g).transpose());
        (value, grad)
    }

    pub(crate) fn decomposition(&self, u: &CMatrix) -> EnsembleDecomposition {
        let members = self.members(u);
        let mut weights = Vec::new();
        let mut pure_states = Vec::new();
        for col in members.column_iter() {
            let p = col.norm_squared();
            if p <= 0.0 {
                continue;
            }
            weights.push(p);
            pure_states.push(col.unscale(p.sqrt()));
        }
        EnsembleDecomposition { weights, pure_states }
    }
}

fn check_eof_dims(tau: &DensityMatrix) -> Result<(usize, usize)> {
    let (da, db) = tau.bipartite_dims()?;
    if da * db > MAX_EOF_DIM {
        return Err(Error::DimTooLarge {
            product: da * db,
            limit: MAX_EOF_DIM,
        });
    }
    Ok((da, db))
}

struct RestartOutcome {
    value: f64,
    members: usize,
    point: CMatrix,
    converged: bool,
}

/// Variational entanglement of formation (an upper bound on `E_f`).
pub fn eof(tau: &DensityMatrix, cfg: &EofConfig) -> Result<EofResult> {
    let (da, db) = check_eof_dims(tau)?;
    let objective = EnsembleObjective::new(tau, da, db);
    let rank = objective.rank();
    if rank == 1 {
        let u = CMatrix::from_element(1, 1, linalg::ONE);
        let decomposition = objective.decomposition(&u);
        let value = decomposition.average_entanglement(da, db);
        return Ok(EofResult {
            value,
            decomposition,
            restarts_used: 0,
            converged: true,
            restart_values: vec![value],
        });
    }
    let cap = (da * db) * (da * db);
    let m = cfg.ensemble_size.unwrap_or(rank * rank).clamp(rank, cap.max(rank));
    let descent = DescentConfig {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        stop_below: cfg.stop_below,
        ..DescentConfig::default()
    };
    let run = |restart: usize| {
        let mut rng = stream(cfg.seed, restart as u64);
        let u0 = haar_isometry(m, rank, &mut rng);
        let mut f = |u: &CMatrix| {
            let (v, g) = objective.evaluate(u, true);
            (v, g.expect("gradient requested"))
        };
        let out = manifold::minimize(&mut f, u0, &descent);
        let members = objective
            .decomposition(&out.point)
            .weights
            .iter()
            .filter(|&&p| p > 1e-12)
            .count();
        RestartOutcome {
            value: out.value,
            members,
            point: out.point,
            converged: out.converged,
        }
    };
    let restarts = cfg.restarts.max(1);
    let outcomes: Vec<RestartOutcome> = match cfg.stop_below {
        Some(target) => {
            let mut outs = Vec::new();
            for r in 0..restarts {
                let o = run(r);
                let hit = o.value <= target;
                outs.push(o);
                if hit {
                    break;
                }
            }
            outs
        }
        None => map_indexed(restarts, run),
    };
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate().skip(1) {
        let b = &outcomes[best];
        if o.value < b.value - 1e-10 || ((o.value - b.value).abs() <= 1e-10 && o.members < b.members) {
            best = i;
        }
    }
    let winner = &outcomes[best];
    let decomposition = objective.decomposition(&winner.point);
    let value = decomposition.average_entanglement(da, db);
    Ok(EofResult {
        value,
        decomposition,
        restarts_used: outcomes.len(),
        converged: winner.converged,
        restart_values: outcomes.iter().map(|o| o.value).collect(),
    })
}

/// Two-qubit concurrence. With `τ = W W†` on its numerical support, the
/// spin-flip spectrum `λ_i` is the singular values of `Wᵀ (σ_y ⊗ σ_y) W`,
/// which avoids square roots of round-off eigenvalues.
pub fn concurrence(tau: &DensityMatrix) -> Result<f64> {
    if tau.dims() != [2, 2] {
        return Err(Error::DimMismatch(format!(
            "concurrence needs a two-qubit state, got dims {:?}",
            tau.dims()
        )));
    }
    let (vals, vecs) = linalg::eigh_unchecked(tau.mat());
    let support: Vec<usize> = (0..4).filter(|&i| vals[i] > SPECTRUM_FLOOR).collect();
    let w = CMatrix::from_fn(4, support.len(), |r, j| vecs[(r, support[j])] * vals[support[j]].sqrt());
    let yy = linalg::kron(&linalg::pauli_y(), &linalg::pauli_y());
    let m = w.transpose() * yy * &w;
    let mut lambdas: Vec<f64> = m.singular_values().iter().copied().collect();
    lambdas.resize(4, 0.0);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Closed-form two-qubit entanglement of formation
/// `h((1 + √(1 − C²))/2)`.
pub fn wootters_eof(tau: &DensityMatrix) -> Result<f64> {
    let c = concurrence(tau)?.min(1.0);
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt())))
}
