//! Seeded verification suites over random and canonical instances, and the
//! single-channel report.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{count_by_family, family, BoundCheckRecord, Status, StatusCounts};
use crate::cbnorm::{
    big_delta_c, big_delta_f, big_phi, q_cb, verify_chain, verify_final_bounds, verify_norm_fidelity, ChannelReport,
    DeltaConfig, DiamondConfig, PhiConfig, QcbConfig, ReportBound,
};
use crate::channels::{self, KrausChannel};
use crate::entropy::{bipartite_entropies, delta_c, delta_c_raw, von_neumann_entropy, LossKind};
use crate::eof::{eof, wootters_eof, EofConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::parallel::map_indexed;
use crate::random::{derive_seed, haar_isometry, stream, SeededRng};
use crate::recovery::{
    corrected_fidelity, g_eval, optimize_recovery, transpose_channel, RecoveryConfig, G_DOMAIN_MAX, MAX_RECOVERY_DIM,
};
use crate::state::{purify, random_state, DensityMatrix, PureBipartiteState};

/// Per-family tolerances on `slack ≥ −tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub dpi_nonneg: f64,
    pub thm1_direct: f64,
    pub thm1_converse: f64,
    pub miao: f64,
    pub thm2_direct2: f64,
    pub converse2: f64,
    pub corollary_gap: f64,
    pub hashing: f64,
    pub mutualinfo_half: f64,
    pub eof_wootters: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            dpi_nonneg: 1e-9,
            thm1_direct: 1e-7,
            thm1_converse: 1e-7,
            miao: 1e-6,
            thm2_direct2: 1e-6,
            converse2: 1e-9,
            corollary_gap: 1e-6,
            hashing: 1e-4,
            mutualinfo_half: 1e-9,
            eof_wootters: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            dpi_nonneg: tol,
            thm1_direct: tol,
            thm1_converse: tol,
            miao: tol,
            thm2_direct2: tol,
            converse2: tol,
            corollary_gap: tol,
            hashing: tol,
            mutualinfo_half: tol,
            eof_wootters: tol,
        }
    }
}

/// Random channels for the state–channel families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFamily {
    /// Haar-random Stinespring isometries of random Kraus rank.
    Random,
    /// Haar-random unitaries, or isometries when `d_A < d_B`.
    Unitary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dims: Vec<(usize, usize)>,
    /// Random instances per dimension pair and family.
    pub instances: usize,
    /// Restarts for recovery and entanglement-of-formation optimizers.
    pub restarts: usize,
    /// Restarts for diamond-norm and channel-level estimators.
    pub channel_restarts: usize,
    pub quick: bool,
    pub channels: ChannelFamily,
    /// Tolerances of the state-level families.
    pub tolerances: Tolerances,
    pub format: Format,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dims: vec![(2, 2), (2, 3), (3, 3)],
            instances: 100,
            restarts: 16,
            channel_restarts: 64,
            quick: false,
            channels: ChannelFamily::Random,
            tolerances: Tolerances::default(),
            format: Format::Json,
        }
    }
}

pub const QUICK_INSTANCES: usize = 50;
pub const QUICK_RESTARTS: usize = 8;
pub const EPSILONS: [f64; 3] = [1e-3, 1e-5, 1e-7];

impl SuiteConfig {
    /// Caps instances and restarts for fast runs.
    pub fn quick(mut self) -> Self {
        self.quick = true;
        self.instances = self.instances.min(QUICK_INSTANCES);
        self.restarts = self.restarts.min(QUICK_RESTARTS);
        self.channel_restarts = self.channel_restarts.min(QUICK_RESTARTS);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::Config("no dimension pairs".into()));
        }
        for &(a, b) in &self.dims {
            if a < 2 || b < 2 {
                return Err(Error::Config(format!("dimensions {a}x{b} must be at least 2")));
            }
            if a * b > MAX_RECOVERY_DIM {
                return Err(Error::Config(format!(
                    "dimensions {a}x{b} exceed d_A·d_B ≤ {MAX_RECOVERY_DIM}"
                )));
            }
        }
        if self.instances == 0 || self.restarts == 0 || self.channel_restarts == 0 {
            return Err(Error::Config("counts must be positive".into()));
        }
        let t = &self.tolerances;
        let all = [
            t.dpi_nonneg,
            t.thm1_direct,
            t.thm1_converse,
            t.miao,
            t.thm2_direct2,
            t.converse2,
            t.corollary_gap,
            t.hashing,
            t.mutualinfo_half,
            t.eof_wootters,
        ];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn recovery(&self, seed: u64) -> RecoveryConfig {
        RecoveryConfig {
            restarts: self.restarts,
            seed,
            ..RecoveryConfig::default()
        }
    }

    fn eof(&self, seed: u64, stop_below: Option<f64>) -> EofConfig {
        EofConfig {
            restarts: self.restarts,
            seed,
            stop_below,
            ..EofConfig::default()
        }
    }

    fn diamond(&self) -> DiamondConfig {
        DiamondConfig {
            restarts: self.channel_restarts,
            seed: derive_seed(self.seed, 0xD1A),
            ..DiamondConfig::default()
        }
    }
}

/// Parses `2x2,2x3` into dimension pairs.
pub fn parse_dims(spec: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(['x', 'X'])
                .ok_or_else(|| Error::Config(format!("expected AxB, got `{pair}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad dimension `{s}`")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

/// `√(2 K x)`-type argument, zero for nonpositive losses.
fn root(k: f64, loss: f64) -> f64 {
    (2.0 * k * loss.max(0.0)).sqrt()
}

fn entanglement_of_formation(tau: &DensityMatrix, cfg: &EofConfig) -> Result<f64> {
    if tau.dims() == [2, 2] {
        wootters_eof(tau)
    } else {
        Ok(eof(tau, cfg)?.value)
    }
}

/// Records for one `(ρ, N)` pair: data processing, both directions of the
/// coherent-information recovery bounds, their restatements for the
/// optimized recovery, and the formation-loss bounds.
pub fn state_channel_records(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    instance: &str,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<Vec<BoundCheckRecord>> {
    let tol = &cfg.tolerances;
    let (da, db) = (ch.dim_in(), ch.dim_out());
    let raw = delta_c_raw(rho, ch)?;
    let dc = raw.max(0.0);
    let mut out = vec![BoundCheckRecord::check(family::DPI_NONNEG, instance, 0.0, raw, tol.dpi_nonneg)];

    let ft = corrected_fidelity(rho, &transpose_channel(rho, ch)?, ch)?;
    out.push(direct_record(dc, ft, instance, tol.thm1_direct));

    let rec = optimize_recovery(rho, ch, &cfg.recovery(seed))?;
    out.push(converse_record(&rec.evaluated_fidelities, dc, da, instance, tol.thm1_converse));
    let fbar = rec.fidelity;
    out.push(BoundCheckRecord::check(family::MIAO, instance, 1.0 - dc.sqrt() * 2f64.sqrt(), fbar, tol.miao));
    let deficit = (1.0 - fbar).max(0.0);
    out.push(if deficit <= G_DOMAIN_MAX {
        BoundCheckRecord::check(family::MIAO2, instance, dc, g_eval(deficit, da)?, tol.miao)
    } else {
        BoundCheckRecord::skipped(family::MIAO2, instance, Some(dc), None)
    });

    let k = LossKind::F.k_constant(da, db);
    let s = von_neumann_entropy(rho);
    let sigma = ch.apply_to_subsystem(&purify(rho))?;
    let ef = entanglement_of_formation(&sigma, &cfg.eof(derive_seed(seed, 1), Some(s - 1.0 / (2.0 * k))))?;
    let df = (s - ef).max(0.0);
    out.push(BoundCheckRecord::check(family::CONVERSE2, instance, df, dc, tol.converse2));
    let rhs = 1.0 - root(k, df);
    out.push(if df >= 1.0 / (2.0 * k) {
        BoundCheckRecord::skipped(family::THM2_DIRECT2, instance, Some(rhs), Some(fbar))
    } else {
        BoundCheckRecord::check(family::THM2_DIRECT2, instance, rhs, fbar, tol.thm2_direct2)
    });
    Ok(out)
}

/// `1 − √(2δ_c) ≤ F_e(ρ, R∘N)` for the transpose-channel fidelity `f`.
pub fn direct_record(dc: f64, f: f64, instance: &str, tol: f64) -> BoundCheckRecord {
    BoundCheckRecord::check(family::THM1_DIRECT, instance, 1.0 - root(1.0, dc), f, tol)
}

/// `δ_c ≤ g(1 − F)` over every evaluated fidelity with `1 − F ≤ 1/2`,
/// reporting the smallest slack.
pub fn converse_record(fidelities: &[f64], dc: f64, dim_a: usize, instance: &str, tol: f64) -> BoundCheckRecord {
    let mut worst: Option<(f64, f64)> = None;
    for &f in fidelities {
        let deficit = (1.0 - f).max(0.0);
        if deficit > G_DOMAIN_MAX {
            continue;
        }
        let g = g_eval(deficit, dim_a).expect("deficit in domain");
        if worst.is_none_or(|(_, w)| g < w) {
            worst = Some((f, g));
        }
    }
    match worst {
        Some((_, g)) => BoundCheckRecord::check(family::THM1_CONVERSE, instance, dc, g, tol),
        None => BoundCheckRecord::skipped(family::THM1_CONVERSE, instance, Some(dc), None),
    }
}

/// Coherent-information loss `S_A − I_c^{A→B}` of a bipartite state.
fn state_delta_c(sa: f64, sb: f64, sab: f64) -> f64 {
    sa - (sb - sab)
}

/// `δ_c ≤ g(√(2 K_f δ_f))` for a bipartite state, oriented so that
/// `S(τ^A) ≤ S(τ^B)`; skipped when the argument of `g` exceeds 1/2.
pub fn corollary_record(tau: &DensityMatrix, instance: &str, tol: f64, eof_cfg: &EofConfig) -> Result<BoundCheckRecord> {
    let (mut sa, mut sb, sab) = bipartite_entropies(tau)?;
    let swapped;
    let tau = if sa > sb {
        std::mem::swap(&mut sa, &mut sb);
        swapped = tau.swap_parties()?;
        &swapped
    } else {
        tau
    };
    let (da, db) = tau.bipartite_dims()?;
    let k = LossKind::F.k_constant(da, db);
    let dc = state_delta_c(sa, sb, sab).max(0.0);
    let cfg = EofConfig {
        stop_below: Some(sa - 1.0 / (8.0 * k)),
        ..eof_cfg.clone()
    };
    let df = (sa - entanglement_of_formation(tau, &cfg)?).max(0.0);
    let arg = root(k, df);
    Ok(if arg > G_DOMAIN_MAX {
        BoundCheckRecord::skipped(family::COROLLARY_GAP, instance, Some(dc), None)
    } else {
        BoundCheckRecord::check(family::COROLLARY_GAP, instance, dc, g_eval(arg, da)?, tol)
    })
}

/// `max{I_c, 0} ≤ I/2`, `max{I_c, 0} ≤ E_f` and `E_f ≤ min{S_A, S_B}`.
pub fn hashing_records(tau: &DensityMatrix, instance: &str, tol: &Tolerances, eof_cfg: &EofConfig) -> Result<Vec<BoundCheckRecord>> {
    let (sa, sb, sab) = bipartite_entropies(tau)?;
    let ic = (sb - sab).max(0.0);
    let half_mi = 0.5 * (sa + sb - sab);
    let min_s = sa.min(sb);
    let mut out = vec![BoundCheckRecord::check(family::MUTUALINFO_HALF, instance, ic, half_mi, tol.mutualinfo_half)];
    let upper_cfg = EofConfig {
        stop_below: Some(min_s),
        ..eof_cfg.clone()
    };
    let ef_upper = entanglement_of_formation(tau, &upper_cfg)?;
    out.push(BoundCheckRecord::check(family::HASHING_UPPER, instance, ef_upper, min_s, tol.hashing));
    let ef = if ic > 0.0 {
        entanglement_of_formation(tau, eof_cfg)?
    } else {
        ef_upper
    };
    out.push(BoundCheckRecord::check(family::HASHING_LOWER, instance, ic, ef, tol.hashing));
    Ok(out)
}

/// `|E_f^{var} − E_f^{Wootters}| ≤ tol` on two qubits; `lhs` is the
/// variational value and `rhs` the closed form.
pub fn wootters_record(tau: &DensityMatrix, instance: &str, tol: f64, eof_cfg: &EofConfig) -> Result<BoundCheckRecord> {
    let var = eof(tau, eof_cfg)?.value;
    let exact = wootters_eof(tau)?;
    let status = if (var - exact).abs() <= tol { Status::Pass } else { Status::Fail };
    Ok(BoundCheckRecord::with_status(family::EOF_WOOTTERS, instance, var, exact, status))
}

fn random_channel_for(da: usize, db: usize, kind: ChannelFamily, index: usize, rng: &mut SeededRng) -> Result<KrausChannel> {
    match kind {
        ChannelFamily::Random => {
            let min_rank = da.div_ceil(db);
            let max_rank = da * db;
            let rank = min_rank + index % (max_rank - min_rank + 1);
            channels::random_channel(da, db, rank, rng)
        }
        ChannelFamily::Unitary => isometric_channel(da, db, rng),
    }
}

/// Haar-random isometric (unitary when `d_A = d_B`) channel.
fn isometric_channel(da: usize, db: usize, rng: &mut SeededRng) -> Result<KrausChannel> {
    if db < da {
        return Err(Error::Config(format!("no isometric channel {da} → {db}")));
    }
    KrausChannel::new(vec![haar_isometry(db, da, rng)], da, db)
}

/// `(1 − ε) V·V† + ε N` for the isometric embedding `V` and a random `N`.
pub fn perturbed_identity(da: usize, db: usize, eps: f64, rng: &mut SeededRng) -> Result<KrausChannel> {
    let embed = CMatrix::from_fn(db, da, |b, a| if a == b { linalg::ONE } else { linalg::ZERO });
    let noise = channels::random_channel(da, db, da * db, rng)?;
    let mut ops = vec![embed.scale((1.0 - eps).sqrt())];
    ops.extend(noise.kraus().iter().map(|k| k.scale(eps.sqrt())));
    KrausChannel::new(ops, da, db)
}

/// `(1 − ε) Φ + ε σ` with `Φ` maximally entangled of Schmidt rank
/// `min(d_A, d_B)` and `σ` a random pure state.
pub fn perturbed_max_entangled(da: usize, db: usize, eps: f64, rng: &mut SeededRng) -> Result<DensityMatrix> {
    let r = da.min(db);
    let amp = 1.0 / (r as f64).sqrt();
    let v = linalg::CVector::from_fn(da * db, |idx, _| {
        let (a, b) = (idx / db, idx % db);
        if a == b && a < r {
            linalg::c(amp, 0.0)
        } else {
            linalg::ZERO
        }
    });
    let phi = PureBipartiteState::new(v, da, db)?.density();
    let sigma = random_state(&[da, db], 1, rng)?;
    let mix = phi.mat().scale(1.0 - eps) + sigma.mat().scale(eps);
    DensityMatrix::new(mix, vec![da, db])
}

/// Channels at `d = 2` with their descriptors.
pub fn qubit_zoo() -> Vec<(String, KrausChannel)> {
    let mut specs = vec!["identity:d=2".to_string(), "z".to_string()];
    specs.push("depolarizing:p=0.001".into());
    for i in 1..=9 {
        specs.push(format!("depolarizing:p=0.{i}"));
    }
    specs.push("dephasing:p=0.5".into());
    specs.push("amplitude_damping:gamma=0.3".into());
    specs
        .into_iter()
        .map(|s| {
            let ch = channels::parse_zoo_spec(&s).expect("zoo entries are valid");
            (s, ch)
        })
        .collect()
}

const TAG_CHANNEL: u64 = 1;
const TAG_STATE: u64 = 2;
const TAG_EPS_CHANNEL: u64 = 3;
const TAG_EPS_STATE: u64 = 4;
const TAG_NORM_FIDELITY: u64 = 5;
const TAG_FINAL: u64 = 6;

fn instance_seed(master: u64, tag: u64, group: usize, index: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(master, tag), group as u64), index as u64)
}

fn state_level_records(tau: &DensityMatrix, instance: &str, cfg: &SuiteConfig, seed: u64) -> Result<Vec<BoundCheckRecord>> {
    let tol = &cfg.tolerances;
    let eof_cfg = cfg.eof(seed, None);
    let mut out = vec![corollary_record(tau, instance, tol.corollary_gap, &eof_cfg)?];
    out.extend(hashing_records(tau, instance, tol, &eof_cfg)?);
    if tau.dims() == [2, 2] {
        out.push(wootters_record(tau, instance, tol.eof_wootters, &eof_cfg)?);
    }
    Ok(out)
}

fn flatten(parts: Vec<Result<Vec<BoundCheckRecord>>>) -> Result<Vec<BoundCheckRecord>> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Random `(ρ, N)` pairs plus the ε-perturbed identity channels.
pub fn run_state_channel(cfg: &SuiteConfig) -> Result<Vec<BoundCheckRecord>> {
    let mut out = Vec::new();
    for (g, &(da, db)) in cfg.dims.iter().enumerate() {
        let parts = map_indexed(cfg.instances, |i| {
            let seed = instance_seed(cfg.seed, TAG_CHANNEL, g, i);
            let mut rng = stream(seed, 0);
            let rho = random_state(&[da], 1 + i % da, &mut rng)?;
            let ch = random_channel_for(da, db, cfg.channels, i, &mut rng)?;
            state_channel_records(&rho, &ch, &format!("{da}x{db} #{i}"), cfg, seed)
        });
        out.extend(flatten(parts)?);
        if db >= da {
            let parts = map_indexed(EPSILONS.len(), |e| {
                let seed = instance_seed(cfg.seed, TAG_EPS_CHANNEL, g, e);
                let ch = perturbed_identity(da, db, EPSILONS[e], &mut stream(seed, 0))?;
                let rho = DensityMatrix::maximally_mixed(da);
                state_channel_records(&rho, &ch, &format!("{da}x{db} eps={:e} channel", EPSILONS[e]), cfg, seed)
            });
            out.extend(flatten(parts)?);
        }
    }
    Ok(out)
}

/// Random bipartite states plus the ε-perturbed maximally entangled states.
pub fn run_state_level(cfg: &SuiteConfig) -> Result<Vec<BoundCheckRecord>> {
    let mut out = Vec::new();
    for (g, &(da, db)) in cfg.dims.iter().enumerate() {
        let parts = map_indexed(cfg.instances, |i| {
            let seed = instance_seed(cfg.seed, TAG_STATE, g, i);
            let tau = random_state(&[da, db], 1 + i % (da * db), &mut stream(seed, 0))?;
            state_level_records(&tau, &format!("{da}x{db} #{i}"), cfg, seed)
        });
        out.extend(flatten(parts)?);
        let parts = map_indexed(EPSILONS.len(), |e| {
            let seed = instance_seed(cfg.seed, TAG_EPS_STATE, g, e);
            let tau = perturbed_max_entangled(da, db, EPSILONS[e], &mut stream(seed, 0))?;
            state_level_records(&tau, &format!("{da}x{db} eps={:e} state", EPSILONS[e]), cfg, seed)
        });
        out.extend(flatten(parts)?);
    }
    Ok(out)
}

/// Both norm–fidelity inequalities on the qubit zoo and random qubit channels.
pub fn run_norm_fidelity(cfg: &SuiteConfig) -> Result<Vec<BoundCheckRecord>> {
    let mut channels: Vec<(String, KrausChannel)> = qubit_zoo();
    for i in 0..cfg.instances {
        let mut rng = stream(instance_seed(cfg.seed, TAG_NORM_FIDELITY, 0, i), 0);
        let rank = rng.random_range(1..=4);
        channels.push((format!("random 2x2 #{i}"), channels::random_channel(2, 2, rank, &mut rng)?));
    }
    let diamond = cfg.diamond();
    let parts = map_indexed(channels.len(), |i| {
        let (name, ch) = &channels[i];
        Ok(verify_norm_fidelity(ch, &diamond, name)?.records.to_vec())
    });
    flatten(parts)
}

fn channel_configs(cfg: &SuiteConfig) -> (QcbConfig, DeltaConfig) {
    let q = QcbConfig {
        restarts: if cfg.quick { 1 } else { 4 },
        seed: derive_seed(cfg.seed, TAG_FINAL),
        diamond: cfg.diamond(),
        ..QcbConfig::default()
    };
    let d = DeltaConfig {
        restarts: cfg.channel_restarts,
        seed: derive_seed(cfg.seed, TAG_FINAL + 1),
        eof: cfg.eof(derive_seed(cfg.seed, TAG_FINAL + 2), None),
        ..DeltaConfig::default()
    };
    (q, d)
}

/// `Δ_x ≤ g(4√Q_cb)` and `Q_cb ≤ 4 (2 K_x Δ_x)^{1/4}` on the qubit zoo.
pub fn run_final(cfg: &SuiteConfig) -> Result<Vec<BoundCheckRecord>> {
    let zoo = qubit_zoo();
    let (qcfg, dcfg) = channel_configs(cfg);
    let parts = map_indexed(zoo.len(), |i| {
        let (name, ch) = &zoo[i];
        let q = q_cb(ch, &qcfg)?;
        let dc = big_delta_c(ch, &dcfg)?;
        let df = big_delta_f(ch, &dcfg, std::slice::from_ref(&dc.state))?;
        let mut out = verify_final_bounds(LossKind::C, 2, 2, &q, dc.value, name)?.to_vec();
        out.extend(verify_final_bounds(LossKind::F, 2, 2, &q, df.value, name)?);
        Ok(out)
    });
    flatten(parts)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: SuiteConfig,
    pub counts: BTreeMap<String, StatusCounts>,
    pub records: Vec<BoundCheckRecord>,
}

impl VerifyReport {
    pub fn new(config: SuiteConfig, records: Vec<BoundCheckRecord>) -> Self {
        Self {
            counts: count_by_family(&records),
            config,
            records,
        }
    }

    pub fn fail_count(&self) -> usize {
        self.counts.values().map(|c| c.fail).sum()
    }

    /// 0 with no failures, 1 if any inequality failed, and 3 if the only
    /// failures are in the channel-level bounds whose estimates cannot
    /// certify a violation.
    pub fn exit_code(&self) -> i32 {
        let is_final = |name: &str| name == family::FINAL_A || name == family::FINAL_B;
        let other = self
            .counts
            .iter()
            .filter(|(n, _)| !is_final(n))
            .any(|(_, c)| c.fail > 0);
        let finals = self.counts.iter().filter(|(n, _)| is_final(n)).any(|(_, c)| c.fail > 0);
        if other {
            1
        } else if finals {
            3
        } else {
            0
        }
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
            Format::Csv => write_records_csv(&self.records, out)?,
        }
        Ok(())
    }
}

fn csv_number(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.11e}")).unwrap_or_default()
}

/// `name,instance,lhs,rhs,slack,status` with 12 significant digits.
pub fn write_records_csv<W: Write>(records: &[BoundCheckRecord], mut out: W) -> Result<()> {
    writeln!(out, "name,instance,lhs,rhs,slack,status")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            r.instance.replace(',', ";"),
            csv_number(r.lhs),
            csv_number(r.rhs),
            csv_number(r.slack),
            r.status.as_str()
        )?;
    }
    Ok(())
}

/// Runs every family. Records are ordered by family and then instance.
pub fn run_verify(cfg: &SuiteConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut records = run_state_channel(cfg)?;
    records.extend(run_state_level(cfg)?);
    records.extend(run_norm_fidelity(cfg)?);
    records.extend(run_final(cfg)?);
    Ok(VerifyReport::new(cfg.clone(), records))
}

#[derive(Clone, Debug)]
#[derive(Default)]
pub struct ReportConfig {
    pub seed: u64,
    pub quick: bool,
}


/// Single-channel summary. Losses are channel-level lower bounds (the
/// larger of the optimized value and the value at `state`, which defaults
/// to the maximally mixed input); the records cover the state-level bounds
/// at `state` and every channel-level bound, with the loss-dependent ones
/// named like `final_b[f]`.
pub fn channel_report(
    ch: &KrausChannel,
    descriptor: &str,
    state: Option<&DensityMatrix>,
    cfg: &ReportConfig,
) -> Result<ChannelReport> {
    let (da, db) = (ch.dim_in(), ch.dim_out());
    if da * db > MAX_RECOVERY_DIM {
        return Err(Error::DimTooLarge {
            product: da * db,
            limit: MAX_RECOVERY_DIM,
        });
    }
    let rho = match state {
        Some(s) if s.dim() != da => {
            return Err(Error::DimMismatch(format!("state of dimension {} for input {da}", s.dim())))
        }
        Some(s) => s.clone(),
        None => DensityMatrix::maximally_mixed(da),
    };
    let mut suite = SuiteConfig {
        seed: cfg.seed,
        ..SuiteConfig::default()
    };
    if cfg.quick {
        suite = suite.quick();
    }
    let mut records = state_channel_records(&rho, ch, descriptor, &suite, derive_seed(cfg.seed, 0x5E))?;

    let (qcfg, dcfg) = channel_configs(&suite);
    let q = q_cb(ch, &qcfg)?;
    let dc_opt = big_delta_c(ch, &dcfg)?;
    let dc = dc_opt.value.max(delta_c(&rho, ch)?);
    let df = big_delta_f(ch, &dcfg, &[rho.clone(), dc_opt.state])?.value;
    let phi_cfg = PhiConfig {
        restarts: if cfg.quick { 2 } else { PhiConfig::default().restarts },
        seed: derive_seed(cfg.seed, 0xF1),
        ..PhiConfig::default()
    };
    let phi = big_phi(ch, &phi_cfg)?;

    if da == db {
        records.extend(verify_norm_fidelity(ch, &suite.diamond(), descriptor)?.records);
    }
    for (x, delta) in [(LossKind::C, dc), (LossKind::F, df)] {
        let mut per_x = verify_final_bounds(x, da, db, &q, delta, descriptor)?.to_vec();
        per_x.extend(verify_chain(x, da, db, phi.value, delta, descriptor));
        for r in &mut per_x {
            r.name = format!("{}[{}]", r.name, x.tag());
        }
        records.extend(per_x);
    }
    Ok(ChannelReport {
        channel_descriptor: descriptor.to_string(),
        q_cb_upper: q.upper,
        delta_c_lower: dc,
        delta_f_lower: df,
        phi_lower: phi.value,
        bounds: records.iter().map(ReportBound::from).collect(),
    })
}
