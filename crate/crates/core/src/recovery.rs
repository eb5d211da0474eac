//! Entanglement fidelity, recovery channels, the correction-quality function
//! `g`, and the entanglement-of-formation bound curve.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channels::{compose, KrausChannel};
use crate::entropy::LossKind;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::manifold::{self, DescentConfig};
use crate::parallel::map_indexed;
use crate::random::{haar_isometry, stream};
use crate::state::DensityMatrix;

/// Largest supported `d_A·d_B` for recovery optimization.
pub const MAX_RECOVERY_DIM: usize = 9;

/// Support threshold for pseudo-inverses in the transpose channel.
const SUPPORT_TOL: f64 = 1e-12;

/// `F_e(ρ, N) = Σ_k |Tr(ρ A_k)|²` for a channel `A → A`.
pub fn entanglement_fidelity(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    if ch.dim_in() != ch.dim_out() {
        return Err(Error::DimMismatch(format!(
            "entanglement fidelity needs equal input/output spaces, got {}→{}",
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    if ch.dim_in() != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "state dimension {} != channel dimension {}",
            rho.dim(),
            ch.dim_in()
        )));
    }
    Ok(fidelity_sum(rho.mat(), ch.kraus()))
}

fn fidelity_sum(rho: &CMatrix, kraus: &[CMatrix]) -> f64 {
    kraus.iter().map(|k| trace_product(rho, k).norm_sqr()).sum()
}

/// `Tr(X Y)` without forming the product.
fn trace_product(x: &CMatrix, y: &CMatrix) -> num_complex::Complex64 {
    let mut acc = ZERO;
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Corrected fidelity `F_e(ρ, R ∘ N)` for `R: B → A`, `N: A → B`.
pub fn corrected_fidelity(rho: &DensityMatrix, recovery: &KrausChannel, ch: &KrausChannel) -> Result<f64> {
    let composed = compose(recovery, ch)?;
    entanglement_fidelity(rho, &composed)
}

/// Transpose (Petz) recovery `R_k = ρ^{1/2} A_k† N(ρ)^{-1/2}`, completed on
/// the kernel of `N(ρ)` by a branch that prepares `ρ`.
pub fn transpose_channel(rho: &DensityMatrix, ch: &KrausChannel) -> Result<KrausChannel> {
    if ch.dim_in() != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "state dimension {} != channel input {}",
            rho.dim(),
            ch.dim_in()
        )));
    }
    let (da, db) = (ch.dim_in(), ch.dim_out());
    let out = ch.apply_operator(rho.mat());
    let root_rho = linalg::sqrtm_psd(rho.mat());
    let inv_root_out = linalg::pinv_sqrt_psd(&out, SUPPORT_TOL);
    let mut ops: Vec<CMatrix> = ch
        .kraus()
        .iter()
        .map(|k| &root_rho * k.adjoint() * &inv_root_out)
        .collect();

    let (out_vals, out_vecs) = linalg::eigh_unchecked(&out);
    let (rho_vals, rho_vecs) = linalg::eigh_unchecked(rho.mat());
    for (j, &mu) in out_vals.iter().enumerate() {
        if mu > SUPPORT_TOL {
            continue;
        }
        let kernel = out_vecs.column(j).into_owned();
        for (i, &lambda) in rho_vals.iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let target = rho_vecs.column(i).scale(lambda.sqrt());
            ops.push(&target * kernel.adjoint());
        }
    }
    // exact up to round-off amplified by N(ρ)^{-1/2}; renormalize
    let mut gram = CMatrix::zeros(db, db);
    for k in &ops {
        gram += k.adjoint() * k;
    }
    let fix = linalg::pinv_sqrt_psd(&gram, 0.5);
    let ops = ops.into_iter().map(|k| k * &fix).collect();
    KrausChannel::new(ops, db, da)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    TransposeChannel,
    Optimized,
}

#[derive(Clone, Debug)]
pub struct RecoveryConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iter: 1000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    /// Best recovery `B → A` found.
    pub channel: KrausChannel,
    /// `F_e(ρ, channel ∘ N)`, a lower bound on the optimal corrected fidelity.
    pub fidelity: f64,
    pub method: RecoveryMethod,
    pub iterations: usize,
    /// Corrected fidelity of every recovery evaluated during the search.
    pub evaluated_fidelities: Vec<f64>,
}

/// Corrected fidelity as a function of a Stinespring isometry
/// `V: B → A ⊗ E` of the recovery, `R_l[a, b] = V[a·E + l, b]`.
struct RecoveryObjective {
    /// `A_k ρ`, each `d_B × d_A`.
    weighted_kraus: Vec<CMatrix>,
    dim_a: usize,
    dim_b: usize,
    env: usize,
}

impl RecoveryObjective {
    fn new(rho: &DensityMatrix, ch: &KrausChannel) -> Self {
        Self {
            weighted_kraus: ch.kraus().iter().map(|k| k * rho.mat()).collect(),
            dim_a: ch.dim_in(),
            dim_b: ch.dim_out(),
            env: ch.dim_in() * ch.dim_out(),
        }
    }

    fn block(&self, v: &CMatrix, l: usize) -> CMatrix {
        isometry_block(v, self.dim_a, self.dim_b, l)
    }

    fn value_grad(&self, v: &CMatrix) -> (f64, CMatrix) {
        let mut value = 0.0;
        let mut grad = CMatrix::zeros(v.nrows(), v.ncols());
        for l in 0..self.env {
            let r = self.block(v, l);
            let mut g = CMatrix::zeros(self.dim_a, self.dim_b);
            for x in &self.weighted_kraus {
                let c = trace_product(x, &r);
                value += c.norm_sqr();
                g += x.adjoint() * (c * 2.0);
            }
            for a in 0..self.dim_a {
                for b in 0..self.dim_b {
                    grad[(a * self.env + l, b)] = g[(a, b)];
                }
            }
        }
        (value, grad)
    }

    fn to_channel(&self, v: &CMatrix) -> Result<KrausChannel> {
        recovery_from_isometry(v, self.dim_a, self.dim_b)
    }

    fn stacked_isometry(&self, r: &KrausChannel) -> Result<CMatrix> {
        isometry_from_recovery(r)
    }
}

/// Kraus operator `R_l[a, b] = V[a·E + l, b]` of a recovery `B → A` with
/// environment dimension `E = d_A d_B`.
pub(crate) fn isometry_block(v: &CMatrix, dim_a: usize, dim_b: usize, l: usize) -> CMatrix {
    let env = dim_a * dim_b;
    CMatrix::from_fn(dim_a, dim_b, |a, b| v[(a * env + l, b)])
}

pub(crate) fn recovery_from_isometry(v: &CMatrix, dim_a: usize, dim_b: usize) -> Result<KrausChannel> {
    let ops: Vec<CMatrix> = (0..dim_a * dim_b)
        .map(|l| isometry_block(v, dim_a, dim_b, l))
        .filter(|k| k.norm() > 1e-15)
        .collect();
    KrausChannel::new(ops, dim_b, dim_a)
}

/// Inverse of [`recovery_from_isometry`] for a recovery `B → A`.
pub(crate) fn isometry_from_recovery(r: &KrausChannel) -> Result<CMatrix> {
    let (dim_a, dim_b) = (r.dim_out(), r.dim_in());
    let env = dim_a * dim_b;
    let ops = if r.kraus().len() > env {
        r.choi().to_kraus()?.kraus().to_vec()
    } else {
        r.kraus().to_vec()
    };
    let mut v = CMatrix::zeros(dim_a * env, dim_b);
    for (l, k) in ops.iter().enumerate() {
        for a in 0..dim_a {
            for b in 0..dim_b {
                v[(a * env + l, b)] = k[(a, b)];
            }
        }
    }
    Ok(manifold::retract(&v))
}

fn check_recovery_dims(ch: &KrausChannel) -> Result<()> {
    let product = ch.dim_in() * ch.dim_out();
    if product > MAX_RECOVERY_DIM {
        return Err(Error::DimTooLarge {
            product,
            limit: MAX_RECOVERY_DIM,
        });
    }
    Ok(())
}

/// Maximizes the corrected fidelity over recoveries `B → A`. Restart 0
/// starts at the transpose channel, the rest at Haar-random isometries, so
/// the result is never worse than the transpose channel.
pub fn optimize_recovery(rho: &DensityMatrix, ch: &KrausChannel, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    optimize_recovery_from(rho, ch, cfg, &[])
}

/// [`optimize_recovery`] with extra warm-start recoveries tried after the
/// transpose channel.
pub fn optimize_recovery_from(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    cfg: &RecoveryConfig,
    warm: &[KrausChannel],
) -> Result<RecoveryResult> {
    check_recovery_dims(ch)?;
    let transpose = transpose_channel(rho, ch)?;
    let objective = RecoveryObjective::new(rho, ch);
    let mut starts = vec![objective.stacked_isometry(&transpose)?];
    for w in warm {
        starts.push(objective.stacked_isometry(w)?);
    }
    let restarts = cfg.restarts.max(starts.len());
    let rows = ch.dim_in() * objective.env;
    let descent = DescentConfig {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        initial_step: 1.0,
        ..DescentConfig::default()
    };
    let runs = map_indexed(restarts, |r| {
        let v0 = match starts.get(r) {
            Some(v) => v.clone(),
            None => haar_isometry(rows, ch.dim_out(), &mut stream(cfg.seed, r as u64)),
        };
        let mut seen = Vec::new();
        let mut f = |v: &CMatrix| {
            let (val, g) = objective.value_grad(v);
            seen.push(val);
            (val, g)
        };
        let out = manifold::maximize(&mut f, v0, &descent);
        (out, seen)
    });
    let initial = runs[0].0.history[0];
    let mut best = 0;
    for (i, (out, _)) in runs.iter().enumerate() {
        if out.value > runs[best].0.value {
            best = i;
        }
    }
    let (winner, _) = &runs[best];
    let channel = objective.to_channel(&winner.point)?;
    let fidelity = corrected_fidelity(rho, &channel, ch)?;
    let method = if winner.value > initial + 1e-12 {
        RecoveryMethod::Optimized
    } else {
        RecoveryMethod::TransposeChannel
    };
    Ok(RecoveryResult {
        channel,
        fidelity,
        method,
        iterations: runs.iter().map(|(o, _)| o.iterations).sum(),
        evaluated_fidelities: runs.into_iter().flat_map(|(_, seen)| seen).collect(),
    })
}

/// Largest argument for which the explicit form of `g` is used.
pub const G_DOMAIN_MAX: f64 = 0.5;

/// `g(x) = 4x log₂(d_A/x)` on `[0, 1/2]`, with `g(0) = 0`.
pub fn g_eval(x: f64, dim_a: usize) -> Result<f64> {
    if !(0.0..=G_DOMAIN_MAX).contains(&x) {
        return Err(Error::Domain {
            value: x,
            domain: "[0, 1/2]",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * x * (dim_a as f64 / x).log2())
}

/// Preimage of `y` under `g` in `[0, 1/2]`, by bisection.
pub fn g_inverse(y: f64, dim_a: usize) -> Result<f64> {
    if dim_a < 2 {
        return Err(Error::BadParam("g is invertible on (0, 1/2] only for d_A >= 2".into()));
    }
    let top = g_eval(G_DOMAIN_MAX, dim_a)?;
    if !(0.0..=top).contains(&y) {
        return Err(Error::Domain {
            value: y,
            domain: "[0, g(1/2)]",
        });
    }
    let (mut lo, mut hi) = (0.0f64, G_DOMAIN_MAX);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g_eval(mid, dim_a)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One point of the coherent-information lower bound as a function of
/// entanglement of formation, both axes divided by `S(τ^A)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Point {
    pub ef_norm: f64,
    pub bound_norm: f64,
}

/// Lower bound on `I_c^{A→B}` implied by `E_f` when `S(τ^A) = s_a`:
/// `max{0, S_A − g(√(2 K_f (S_A − E_f)))}`, and 0 when the argument of `g`
/// exceeds 1/2.
pub fn coherent_info_lower_bound(ef: f64, dim_a: usize, dim_b: usize, s_a: f64) -> f64 {
    let k = LossKind::F.k_constant(dim_a, dim_b);
    let delta = (s_a - ef).max(0.0);
    let x = (2.0 * k * delta).sqrt();
    match g_eval(x, dim_a) {
        Ok(g) => (s_a - g).max(0.0),
        Err(_) => 0.0,
    }
}

/// Evaluates the bound on a grid of `E_f` values in `[0, s_a]`.
pub fn fig2_curve(dim_a: usize, dim_b: usize, s_a: f64, ef_grid: &[f64]) -> Result<Vec<Fig2Point>> {
    ef_grid
        .iter()
        .map(|&ef| {
            if !(-1e-12..=s_a + 1e-12).contains(&ef) || ef.is_nan() {
                return Err(Error::GridOutOfRange(ef));
            }
            let ef = ef.clamp(0.0, s_a);
            Ok(Fig2Point {
                ef_norm: ef / s_a,
                bound_norm: coherent_info_lower_bound(ef, dim_a, dim_b, s_a) / s_a,
            })
        })
        .collect()
}

/// Grid of `E_f` values on `[0, s_a]`: `grid_size` uniform points plus
/// `grid_size` points whose normalized deficit `1 − E_f/s_a` is
/// log-spaced in `[1e-9, 1e-2]`, resolving the region where the bound is
/// nonzero.
pub fn fig2_grid(grid_size: usize, s_a: f64) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::BadParam("grid size must be at least 2".into()));
    }
    let n = grid_size;
    let mut norm: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let (lo, hi) = (1e-9f64.ln(), 1e-2f64.ln());
    for i in 0..n {
        let deficit = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        norm.push(1.0 - deficit);
    }
    norm.sort_by(f64::total_cmp);
    norm.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    Ok(norm.into_iter().map(|x| x * s_a).collect())
}

/// Qutrit-pair curve with `τ^A = I/3`.
pub fn fig2_qutrit_curve(grid_size: usize) -> Result<Vec<Fig2Point>> {
    let s_a = 3f64.log2();
    fig2_curve(3, 3, s_a, &fig2_grid(grid_size, s_a)?)
}

/// Formation loss `δ_f` below which the bound becomes nontrivial: the root
/// of `g(√(2 K_f δ)) = s_a`.
pub fn fig2_threshold(dim_a: usize, dim_b: usize, s_a: f64) -> Result<f64> {
    let k = LossKind::F.k_constant(dim_a, dim_b);
    let x = g_inverse(s_a, dim_a)?;
    Ok(x * x / (2.0 * k))
}

/// Writes the curve as CSV with header `ef_norm,bound_norm`.
pub fn write_fig2_csv<W: Write>(points: &[Fig2Point], mut out: W) -> Result<()> {
    writeln!(out, "ef_norm,bound_norm")?;
    for p in points {
        writeln!(out, "{:.12},{:.12}", p.ef_norm, p.bound_norm)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, dephasing, depolarizing, identity, random_channel, unitary};
    use crate::entropy::delta_c;
    use crate::random::rng_from_seed;
    use crate::state::{purify, random_state};
    use approx::assert_abs_diff_eq;

    /// `⟨Ψ|(id ⊗ N)(Ψ)|Ψ⟩` straight from the definition.
    fn fidelity_via_purification(rho: &DensityMatrix, ch: &KrausChannel) -> f64 {
        let psi = purify(rho);
        let out = ch.apply_to_subsystem(&psi).unwrap();
        (psi.vec().adjoint() * out.mat() * psi.vec())[(0, 0)].re
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = rng_from_seed(1);
        let rho = random_state(&[3], 3, &mut rng).unwrap();
        assert_abs_diff_eq!(entanglement_fidelity(&rho, &identity(3)).unwrap(), 1.0, epsilon = 1e-12);
        let half = DensityMatrix::maximally_mixed(2);
        for p in [0.0, 0.1, 0.5, 1.0] {
            let f = entanglement_fidelity(&half, &depolarizing(p, 2).unwrap()).unwrap();
            assert_abs_diff_eq!(f, 1.0 - 0.75 * p, epsilon = 1e-10);
        }
        let x = unitary(linalg::pauli_x()).unwrap();
        assert_abs_diff_eq!(entanglement_fidelity(&half, &x).unwrap(), 0.0, epsilon = 1e-14);
        let rect = random_channel(2, 3, 2, &mut rng).unwrap();
        assert!(entanglement_fidelity(&half, &rect).is_err());
    }

    #[test]
    fn fidelity_is_purification_independent() {
        let mut rng = rng_from_seed(2);
        for _ in 0..20 {
            let rho = random_state(&[3], 2, &mut rng).unwrap();
            let ch = random_channel(3, 3, 4, &mut rng).unwrap();
            assert_abs_diff_eq!(
                entanglement_fidelity(&rho, &ch).unwrap(),
                fidelity_via_purification(&rho, &ch),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn transpose_channel_inverts_unitaries() {
        let mut rng = rng_from_seed(3);
        let u = crate::random::haar_unitary(3, &mut rng);
        let ch = unitary(u.clone()).unwrap();
        let rho = random_state(&[3], 2, &mut rng).unwrap();
        let r = transpose_channel(&rho, &ch).unwrap();
        assert_abs_diff_eq!(corrected_fidelity(&rho, &r, &ch).unwrap(), 1.0, epsilon = 1e-10);
        let full = random_state(&[3], 3, &mut rng).unwrap();
        let r_id = transpose_channel(&full, &identity(3)).unwrap();
        assert!(linalg::max_abs_diff(r_id.choi().mat(), identity(3).choi().mat()) < 1e-10);
    }

    #[test]
    fn transpose_channel_is_cptp_off_support() {
        // amplitude damping on |0⟩ has a rank-deficient output
        let rho = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let ch = amplitude_damping(0.3).unwrap();
        let r = transpose_channel(&rho, &ch).unwrap();
        assert!(r.trace_preservation_error() < 1e-9);
        let mut rng = rng_from_seed(4);
        let ch = random_channel(3, 2, 2, &mut rng).unwrap();
        let rho = random_state(&[3], 3, &mut rng).unwrap();
        let r = transpose_channel(&rho, &ch).unwrap();
        assert_eq!((r.dim_in(), r.dim_out()), (2, 3));
        assert!(r.trace_preservation_error() < 1e-9);
    }

    #[test]
    fn dephasing_transpose_fidelity_and_direct_bound() {
        // {√½ I, √½ Z} is idempotent and self-adjoint, so it is its own
        // transpose channel and the corrected fidelity stays at 1/2
        let half = DensityMatrix::maximally_mixed(2);
        let ch = dephasing(0.5).unwrap();
        let r = transpose_channel(&half, &ch).unwrap();
        let f = corrected_fidelity(&half, &r, &ch).unwrap();
        assert_abs_diff_eq!(f, 0.5, epsilon = 1e-10);
        let dc = delta_c(&half, &ch).unwrap();
        assert!(f >= 1.0 - (2.0 * dc).sqrt());
    }

    #[test]
    fn optimized_recovery_examples() {
        let cfg = RecoveryConfig {
            restarts: 4,
            ..Default::default()
        };
        let mut rng = rng_from_seed(5);
        let u = random_channel(2, 2, 1, &mut rng).unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        let res = optimize_recovery(&half, &u, &cfg).unwrap();
        assert_abs_diff_eq!(res.fidelity, 1.0, epsilon = 1e-9);

        let dep = depolarizing(1.0, 2).unwrap();
        let res = optimize_recovery(&half, &dep, &cfg).unwrap();
        assert_abs_diff_eq!(res.fidelity, 0.25, epsilon = 1e-9);
        // 1 − F̄ = 3/4 lies outside the explicit domain of g
        assert!(g_eval(1.0 - res.fidelity, 2).is_err());

        let ad = amplitude_damping(0.1).unwrap();
        let res = optimize_recovery(&half, &ad, &cfg).unwrap();
        let dc = delta_c(&half, &ad).unwrap();
        assert!(res.fidelity >= 1.0 - (2.0 * dc).sqrt());
        assert!(dc <= g_eval(1.0 - res.fidelity, 2).unwrap());
    }

    #[test]
    fn optimized_recovery_dominates_transpose_and_is_consistent() {
        let mut rng = rng_from_seed(6);
        let cfg = RecoveryConfig {
            restarts: 4,
            ..Default::default()
        };
        for dims in [(2, 2), (2, 3), (3, 3)] {
            let ch = random_channel(dims.0, dims.1, 2, &mut rng).unwrap();
            let rho = random_state(&[dims.0], dims.0, &mut rng).unwrap();
            let t = transpose_channel(&rho, &ch).unwrap();
            let ft = corrected_fidelity(&rho, &t, &ch).unwrap();
            let res = optimize_recovery(&rho, &ch, &cfg).unwrap();
            assert!(res.fidelity >= ft - 1e-9, "{} < {ft}", res.fidelity);
            let again = corrected_fidelity(&rho, &res.channel, &ch).unwrap();
            assert_abs_diff_eq!(res.fidelity, again, epsilon = 1e-9);
            assert!(res.evaluated_fidelities.iter().all(|f| (0.0..=1.0 + 1e-9).contains(f)));
        }
    }

    #[test]
    fn optimize_recovery_rejects_large_dimensions() {
        let mut rng = rng_from_seed(7);
        let ch = random_channel(3, 4, 2, &mut rng).unwrap();
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            optimize_recovery(&rho, &ch, &RecoveryConfig::default()),
            Err(Error::DimTooLarge { .. })
        ));
    }

    #[test]
    fn g_examples() {
        assert_abs_diff_eq!(g_eval(0.0, 3).unwrap(), 0.0);
        assert!(g_eval(1e-12, 3).unwrap() < 1e-9);
        assert_abs_diff_eq!(g_eval(0.5, 2).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g_inverse(g_eval(0.3, 3).unwrap(), 3).unwrap(), 0.3, epsilon = 1e-10);
        assert!(g_eval(0.6, 2).is_err());
        assert!(g_eval(-0.1, 2).is_err());
        assert!(g_inverse(10.0, 2).is_err());
    }

    #[test]
    fn fig2_examples() {
        let s = 3f64.log2();
        let pts = fig2_curve(3, 3, s, &[s, 0.99 * s, 0.5 * s, 0.0]).unwrap();
        assert_abs_diff_eq!(pts[0].bound_norm, 1.0, epsilon = 1e-12);
        assert_eq!(pts[1].bound_norm, 0.0);
        assert_eq!(pts[2].bound_norm, 0.0);
        assert_eq!(pts[3].bound_norm, 0.0);
        assert!(fig2_curve(3, 3, s, &[2.0 * s]).is_err());
        let thr = fig2_threshold(3, 3, s).unwrap();
        assert!((thr - 9.6e-6).abs() < 0.05 * 9.6e-6, "threshold {thr}");
    }

    #[test]
    fn fig2_csv_format() {
        let pts = fig2_qutrit_curve(11).unwrap();
        let mut buf = Vec::new();
        write_fig2_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ef_norm,bound_norm");
        assert_eq!(lines[1], "0.000000000000,0.000000000000");
        assert_eq!(*lines.last().unwrap(), "1.000000000000,1.000000000000");
    }
}
