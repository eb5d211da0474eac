//! Property tests for the stated invariants. Each case draws a seed and
//! builds its random objects from the library's seeded generators.

use entloss::bounds::{BoundCheckRecord, Status};
use entloss::cbnorm::{big_delta_c, big_phi, diamond_distance, q_cb, DeltaConfig, DiamondConfig, PhiConfig, QcbConfig};
use entloss::channels::{compose, random_channel, unitary, KrausChannel};
use entloss::entropy::{bipartite_entropies, delta_c_raw, LossKind};
use entloss::eof::{eof, EofConfig};
use entloss::linalg::{self, CMatrix};
use entloss::random::{ginibre, haar_unitary, rng_from_seed, SeededRng};
use entloss::recovery::{
    corrected_fidelity, entanglement_fidelity, fig2_curve, fig2_grid, g_eval, optimize_recovery, transpose_channel,
    RecoveryConfig,
};
use entloss::state::{partial_trace, purify, random_state, DensityMatrix};
use entloss::suite::{corollary_record, Tolerances};
use proptest::prelude::*;

const DIMS: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 3)];

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(DIMS.to_vec())
}

fn channel(da: usize, db: usize, rng: &mut SeededRng) -> KrausChannel {
    let min_rank = da.div_ceil(db);
    let rank = rng.random_range(min_rank..=da * db);
    random_channel(da, db, rank, rng).unwrap()
}

fn state(dims: &[usize], rng: &mut SeededRng) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let rank = rng.random_range(1..=d);
    random_state(dims, rank, rng).unwrap()
}

use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn purification_reduces_to_the_state(seed: u64, d in 2usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = state(&[d], &mut rng);
        let psi = purify(&rho);
        let red = partial_trace(&psi.density(), &[1]).unwrap();
        prop_assert!(linalg::max_abs_diff(red.mat(), rho.mat()) < 1e-10);
    }

    #[test]
    fn random_states_are_valid(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let tau = state(&[da, db], &mut rng);
        prop_assert!(linalg::hermitian_deviation(tau.mat()) <= 1e-10);
        prop_assert!((linalg::trace(tau.mat()).re - 1.0).abs() <= 1e-10);
        prop_assert!(linalg::eigvalsh(tau.mat())[0] >= -1e-10);
    }

    #[test]
    fn kron_is_associative(seed: u64) {
        let mut rng = rng_from_seed(seed);
        let a = ginibre(2, 2, &mut rng);
        let b = ginibre(3, 2, &mut rng);
        let c = ginibre(2, 3, &mut rng);
        let left = linalg::kron(&linalg::kron(&a, &b), &c);
        let right = linalg::kron(&a, &linalg::kron(&b, &c));
        prop_assert!(linalg::max_abs_diff(&left, &right) < 1e-12);
    }

    #[test]
    fn trace_norm_is_a_norm(seed: u64, n in 2usize..=5, s in -3.0f64..3.0) {
        let mut rng = rng_from_seed(seed);
        let a = ginibre(n, n, &mut rng);
        let b = ginibre(n, n, &mut rng);
        let na = linalg::trace_norm(&a).unwrap();
        let nb = linalg::trace_norm(&b).unwrap();
        prop_assert!(linalg::trace_norm(&(&a + &b)).unwrap() <= na + nb + 1e-10);
        let scaled = linalg::trace_norm(&a.scale(s)).unwrap();
        prop_assert!((scaled - s.abs() * na).abs() <= 1e-10 * (1.0 + na));
    }

    #[test]
    fn random_channels_are_cptp(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let ch = channel(da, db, &mut rng);
        prop_assert!(ch.trace_preservation_error() <= 1e-9);
        prop_assert!(!ch.kraus().is_empty() && ch.kraus().len() <= da * db);
        let choi = ch.choi();
        prop_assert!(linalg::eigvalsh(choi.mat())[0] >= -1e-9);
        prop_assert!(linalg::max_abs_diff(&choi.input_marginal(), &linalg::identity(da)) <= 1e-9);
    }

    #[test]
    fn subsystem_action_commutes_with_partial_trace(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let rho = state(&[da], &mut rng);
        let ch = channel(da, db, &mut rng);
        let psi = purify(&rho);
        let sigma = ch.apply_to_subsystem(&psi).unwrap();
        let out_b = partial_trace(&sigma, &[1]).unwrap();
        prop_assert!(linalg::max_abs_diff(out_b.mat(), ch.apply(&rho).unwrap().mat()) < 1e-10);
        let out_r = partial_trace(&sigma, &[0]).unwrap();
        prop_assert!(linalg::max_abs_diff(out_r.mat(), psi.reduced_reference().mat()) < 1e-10);
    }

    #[test]
    fn compose_is_associative(seed: u64) {
        let mut rng = rng_from_seed(seed);
        let a = channel(2, 3, &mut rng);
        let b = channel(3, 3, &mut rng);
        let c = channel(3, 2, &mut rng);
        let left = compose(&c, &compose(&b, &a).unwrap()).unwrap();
        let right = compose(&compose(&c, &b).unwrap(), &a).unwrap();
        prop_assert!(linalg::max_abs_diff(left.choi().mat(), right.choi().mat()) < 1e-9);
    }

    #[test]
    fn channel_json_round_trips(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let ch = channel(da, db, &mut rng);
        let text = serde_json::to_string(&ch.to_json()).unwrap();
        let back = KrausChannel::try_from(serde_json::from_str::<entloss::channels::KrausJson>(&text).unwrap()).unwrap();
        for (x, y) in ch.kraus().iter().zip(back.kraus()) {
            prop_assert!(linalg::max_abs_diff(x, y) < 1e-12);
        }
    }

    #[test]
    fn coherent_information_loss_is_nonnegative(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let rho = state(&[da], &mut rng);
        let ch = channel(da, db, &mut rng);
        prop_assert!(delta_c_raw(&rho, &ch).unwrap() >= -1e-9);
    }

    #[test]
    fn coherent_information_below_half_mutual_information(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let tau = state(&[da, db], &mut rng);
        let (sa, sb, sab) = bipartite_entropies(&tau).unwrap();
        prop_assert!((sb - sab).max(0.0) <= 0.5 * (sa + sb - sab) + 1e-9);
    }

    #[test]
    fn transpose_channel_meets_the_direct_bound(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let rho = state(&[da], &mut rng);
        let ch = channel(da, db, &mut rng);
        let dc = delta_c_raw(&rho, &ch).unwrap().max(0.0);
        let f = corrected_fidelity(&rho, &transpose_channel(&rho, &ch).unwrap(), &ch).unwrap();
        prop_assert!(f >= 1.0 - (2.0 * dc).sqrt() - 1e-7);
    }

    #[test]
    fn g_is_increasing_and_vanishes_at_zero(d in 2usize..=9, a in 1e-9f64..0.5, b in 1e-9f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(g_eval(lo, d).unwrap() <= g_eval(hi, d).unwrap());
        prop_assert!(g_eval(1e-12, d).unwrap() < 1e-9);
        prop_assert!(g_eval(0.6, d).is_err());
    }

    #[test]
    fn check_status_matches_slack(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0, tol in 1e-12f64..1.0) {
        let r = BoundCheckRecord::check("p", "", lhs, rhs, tol);
        prop_assert_eq!(r.status == Status::Pass, rhs - lhs >= -tol);
        prop_assert_eq!(r.slack, Some(rhs - lhs));
    }

    #[test]
    fn k_constants_match_definition(da in 1usize..=5, db in 1usize..=5) {
        prop_assert_eq!(LossKind::C.k_constant(da, db), 1.0);
        prop_assert_eq!(LossKind::Sq.k_constant(da, db), 2.0);
        let m = (2 * da * db - 1) as f64;
        prop_assert_eq!(LossKind::F.k_constant(da, db), m * m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimized_recovery_is_consistent_and_meets_the_converse(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let rho = state(&[da], &mut rng);
        let ch = channel(da, db, &mut rng);
        let cfg = RecoveryConfig { restarts: 4, seed, ..RecoveryConfig::default() };
        let res = optimize_recovery(&rho, &ch, &cfg).unwrap();
        let direct = entanglement_fidelity(&rho, &compose(&res.channel, &ch).unwrap()).unwrap();
        prop_assert!((res.fidelity - direct).abs() < 1e-9);
        let dc = delta_c_raw(&rho, &ch).unwrap().max(0.0);
        prop_assert!(res.fidelity >= 1.0 - (2.0 * dc).sqrt() - 1e-6);
        for &f in &res.evaluated_fidelities {
            let x = (1.0 - f).max(0.0);
            if x <= 0.5 {
                prop_assert!(dc <= g_eval(x, da).unwrap() + 1e-7, "δ_c {dc} vs F {f}");
            }
        }
    }

    #[test]
    fn eof_respects_hashing_and_entropy_bounds(seed: u64, db in 2usize..=3) {
        let mut rng = rng_from_seed(seed);
        let tau = state(&[2, db], &mut rng);
        let res = eof(&tau, &EofConfig { restarts: 8, seed, ..EofConfig::default() }).unwrap();
        let (sa, sb, sab) = bipartite_entropies(&tau).unwrap();
        let ic = (sb - sab).max(sa - sab).max(0.0);
        prop_assert!(res.value >= ic - 1e-6);
        prop_assert!(res.value <= sa.min(sb) + 1e-6);
        // the loss from formation never exceeds the coherent-information loss
        prop_assert!(sa - res.value <= sa - (sb - sab) + 1e-6);
        let d = &res.decomposition;
        prop_assert!((d.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(d.weights.iter().all(|&p| p >= 0.0));
        prop_assert!(linalg::max_abs_diff(&d.reconstruct(), tau.mat()) < 1e-8);
        prop_assert!((d.average_entanglement(2, db) - res.value).abs() < 1e-10);
    }

    #[test]
    fn eof_is_convex_on_mixtures(seed: u64, lambda in 0.0f64..=1.0) {
        let mut rng = rng_from_seed(seed);
        let t1 = state(&[2, 2], &mut rng);
        let t2 = state(&[2, 2], &mut rng);
        let mix = DensityMatrix::new(t1.mat().scale(lambda) + t2.mat().scale(1.0 - lambda), vec![2, 2]).unwrap();
        let cfg = EofConfig { restarts: 16, seed, ..EofConfig::default() };
        let e = |t: &DensityMatrix| eof(t, &cfg).unwrap().value;
        prop_assert!(e(&mix) <= lambda * e(&t1) + (1.0 - lambda) * e(&t2) + 1e-5);
    }

    #[test]
    fn corollary_holds_on_random_states(seed: u64, (da, db) in dims()) {
        let mut rng = rng_from_seed(seed);
        let tau = state(&[da, db], &mut rng);
        let cfg = EofConfig { restarts: 8, seed, ..EofConfig::default() };
        let rec = corollary_record(&tau, "p", Tolerances::default().corollary_gap, &cfg).unwrap();
        prop_assert_ne!(rec.status, Status::Fail);
    }

    #[test]
    fn fig2_curve_is_monotone(n in 2usize..200, da in 2usize..=3, db in 2usize..=3) {
        let s_a = (da as f64).log2();
        let pts = fig2_curve(da, db, s_a, &fig2_grid(n, s_a).unwrap()).unwrap();
        prop_assert!(pts.windows(2).all(|w| w[1].bound_norm >= w[0].bound_norm - 1e-15));
        prop_assert!((pts.last().unwrap().bound_norm - 1.0).abs() < 1e-15);
        prop_assert_eq!(pts[0].bound_norm, 0.0);
    }

    #[test]
    fn diamond_is_symmetric_and_satisfies_the_triangle_inequality(seed: u64) {
        let mut rng = rng_from_seed(seed);
        let a = channel(2, 2, &mut rng);
        let b = channel(2, 2, &mut rng);
        let c = channel(2, 2, &mut rng);
        let cfg = DiamondConfig { restarts: 16, seed, ..DiamondConfig::default() };
        let ab = diamond_distance(&a, &b, &cfg).unwrap();
        let ba = diamond_distance(&b, &a, &cfg).unwrap();
        let bc = diamond_distance(&b, &c, &cfg).unwrap();
        let ac = diamond_distance(&a, &c, &cfg).unwrap();
        prop_assert!((ab.lower - ba.lower).abs() < 1e-9);
        prop_assert!(ac.lower <= ab.lower + bc.lower + 1e-6);
        for est in [&ab, &bc, &ac] {
            prop_assert!(est.lower >= 0.0 && est.lower <= est.upper + 1e-12 && est.upper <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn diamond_is_continuous_under_perturbation(seed: u64) {
        let mut rng = rng_from_seed(seed);
        let base = channel(2, 2, &mut rng);
        let noise = channel(2, 2, &mut rng);
        let cfg = DiamondConfig { restarts: 16, seed, ..DiamondConfig::default() };
        let mut last = f64::INFINITY;
        for eps in [1e-2f64, 1e-3, 1e-4] {
            let mut ops: Vec<CMatrix> = base.kraus().iter().map(|k| k.scale((1.0 - eps).sqrt())).collect();
            ops.extend(noise.kraus().iter().map(|k| k.scale(eps.sqrt())));
            let perturbed = KrausChannel::new(ops, 2, 2).unwrap();
            let d = diamond_distance(&base, &perturbed, &cfg).unwrap().lower;
            prop_assert!(d < last);
            prop_assert!(d <= 2.0 * eps + 1e-12);
            last = d;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn unitaries_are_exactly_invertible(seed: u64) {
        let mut rng = rng_from_seed(seed);
        let u = unitary(haar_unitary(2, &mut rng)).unwrap();
        let q = q_cb(&u, &QcbConfig { restarts: 1, diamond: DiamondConfig { restarts: 8, ..DiamondConfig::default() }, ..QcbConfig::default() }).unwrap();
        prop_assert!(q.proxy <= 1e-6 && q.upper <= 1e-6);
        let phi = big_phi(&u, &PhiConfig { restarts: 2, max_iter: 10, ..PhiConfig::default() }).unwrap();
        prop_assert!(phi.value >= 1.0 - 1e-6);
        let dc = big_delta_c(&u, &DeltaConfig { restarts: 8, ..DeltaConfig::default() }).unwrap();
        prop_assert!(dc.value <= 1e-9);
    }
}
