//! Entropic quantities in bits: von Neumann entropy, coherent and mutual
//! information, and the entanglement-loss functions.

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::eof::{eof, EofConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{partial_trace, purify, DensityMatrix};

/// Losses within this margin below zero are clipped; anything more negative
/// is reported as an internal inconsistency.
pub const LOSS_CLIP_TOL: f64 = 1e-9;

/// Spectrum entries below this are round-off and contribute nothing.
pub const SPECTRUM_FLOOR: f64 = 1e-14;

/// `−Σ λ log₂ λ` over a spectrum, with `0 log 0 = 0`; entries below
/// [`SPECTRUM_FLOOR`] are dropped.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&x| x > SPECTRUM_FLOOR)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of the spectrum of a Hermitian operator.
pub fn operator_entropy(m: &CMatrix) -> f64 {
    entropy_of_spectrum(&linalg::eigvalsh(m))
}

/// `S(ρ) = −Tr ρ log₂ ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    operator_entropy(rho.mat())
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of_spectrum(&[p, 1.0 - p])
}

/// Direction of quantum information flow in a bipartite state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    AToB,
    BToA,
}

/// Entropies `(S(τ^A), S(τ^B), S(τ^{AB}))`.
pub fn bipartite_entropies(tau: &DensityMatrix) -> Result<(f64, f64, f64)> {
    tau.bipartite_dims()?;
    let a = partial_trace(tau, &[0])?;
    let b = partial_trace(tau, &[1])?;
    Ok((
        von_neumann_entropy(&a),
        von_neumann_entropy(&b),
        von_neumann_entropy(tau),
    ))
}

/// `I_c^{A→B} = S(τ^B) − S(τ^{AB})`, or the `B→A` counterpart.
pub fn coherent_information(tau: &DensityMatrix, direction: Direction) -> Result<f64> {
    let (sa, sb, sab) = bipartite_entropies(tau)?;
    Ok(match direction {
        Direction::AToB => sb - sab,
        Direction::BToA => sa - sab,
    })
}

/// `I^{A:B} = S(τ^A) + S(τ^B) − S(τ^{AB})`.
pub fn mutual_information(tau: &DensityMatrix) -> Result<f64> {
    let (sa, sb, sab) = bipartite_entropies(tau)?;
    Ok((sa + sb - sab).max(0.0))
}

/// Channel coherent information `S(σ^B) − S(σ^{RB})` with
/// `σ^{RB} = (id ⊗ N)(Ψ^{RA})` for a purification of `ρ`.
pub fn channel_coherent_information(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    let sigma = ch.apply_to_subsystem(&purify(rho))?;
    coherent_information(&sigma, Direction::AToB)
}

/// Clips a loss that should be nonnegative.
pub fn clip_loss(raw: f64, what: &str) -> Result<f64> {
    if raw < -LOSS_CLIP_TOL {
        return Err(Error::InternalConsistency(format!("{what} = {raw:e} is negative")));
    }
    Ok(raw.max(0.0))
}

/// Unclipped coherent-information loss `S(ρ) − I_c(ρ, N)`.
pub fn delta_c_raw(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    Ok(von_neumann_entropy(rho) - channel_coherent_information(rho, ch)?)
}

/// Coherent-information loss `δ_c(ρ, N) = S(ρ) − I_c(ρ, N) ≥ 0`.
pub fn delta_c(rho: &DensityMatrix, ch: &KrausChannel) -> Result<f64> {
    clip_loss(delta_c_raw(rho, ch)?, "delta_c")
}

/// Entanglement measure behind a loss function, with the constant `K_x`
/// that appears in the fidelity bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    /// coherent information
    C,
    /// entanglement of formation
    F,
    /// squashed entanglement (bounds only)
    Sq,
}

impl LossKind {
    pub fn k_constant(self, dim_a: usize, dim_b: usize) -> f64 {
        match self {
            LossKind::C => 1.0,
            LossKind::Sq => 2.0,
            LossKind::F => {
                let m = (2 * dim_a * dim_b - 1) as f64;
                m * m
            }
        }
    }

    pub fn is_computable(self) -> bool {
        !matches!(self, LossKind::Sq)
    }

    pub fn tag(self) -> &'static str {
        match self {
            LossKind::C => "c",
            LossKind::F => "f",
            LossKind::Sq => "sq",
        }
    }
}

/// Entropic entanglement measures that appear in the bound chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureId {
    DistillableEntanglement,
    DistillableKey,
    Squashed,
    RelativeEntropy,
    Cost,
    Formation,
    CoherentInformation,
    HalfMutualInformation,
}

impl MeasureId {
    pub fn computable(self) -> bool {
        matches!(
            self,
            MeasureId::Formation | MeasureId::CoherentInformation | MeasureId::HalfMutualInformation
        )
    }
}

/// State-level loss `δ_x(τ) = S(τ^A) − E_x(τ)` (or the `B→A` analogue).
///
/// For `x = f` the entanglement of formation comes from the variational
/// optimizer, so the returned value is a lower bound on the true loss.
pub fn delta_x_state(tau: &DensityMatrix, x: LossKind, direction: Direction, cfg: &EofConfig) -> Result<f64> {
    let (sa, sb, sab) = bipartite_entropies(tau)?;
    let s_marg = match direction {
        Direction::AToB => sa,
        Direction::BToA => sb,
    };
    match x {
        LossKind::C => {
            let ic = match direction {
                Direction::AToB => sb - sab,
                Direction::BToA => sa - sab,
            };
            Ok(s_marg - ic)
        }
        LossKind::F => {
            let ef = eof(tau, cfg)?.value;
            clip_loss(s_marg - ef, "delta_f")
        }
        LossKind::Sq => Err(Error::NotComputable("squashed entanglement")),
    }
}
