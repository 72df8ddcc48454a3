use ipd_core::markov::MarkovError;
use ipd_core::zd::{
    extortion_best_case, extortionate, phi_upper_bound, set_opponent_score, zd_from_constraint, ExtortionParams,
    LinearConstraint,
};
use ipd_core::{expected_scores, GameParams, ScorePair, StrategyVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opponents(seed: u64) -> Vec<StrategyVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..20).map(|_| StrategyVector::new(std::array::from_fn(|_| rng.gen_range(0.02..0.98))).unwrap()).collect()
}

fn scores(p: &StrategyVector, q: &StrategyVector, g: &GameParams) -> ScorePair {
    match expected_scores(p, q, g) {
        Ok(s) => s,
        Err(MarkovError::Degenerate { scores, .. }) => scores,
        Err(e) => panic!("{e}"),
    }
}

fn game() -> impl Strategy<Value = GameParams> {
    (0.0..2.0f64, 0.1..2.0f64, 0.1..2.0f64, 0.1..2.0f64)
        .prop_map(|(s, dp, dr, dt)| GameParams::new(s + dp + dr + dt, s + dp + dr, s + dp, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any feasible constraint is enforced against arbitrary opponents. The
    /// constraint is parametrised by the `p1`, `p4` it produces plus `alpha`,
    /// so only `p2`, `p3` can fall outside the unit interval.
    #[test]
    fn feasible_constraints_hold(
        p1 in 0.0..=1.0f64,
        p4 in 0.0..=1.0f64,
        alpha in -0.3..0.3f64,
        seed in any::<u64>(),
    ) {
        let g = GameParams::standard();
        let sum = (p1 - 1.0 - p4) / (g.r() - g.p());
        let (beta, gamma) = (sum - alpha, p4 - sum * g.p());
        prop_assume!(alpha.abs() + beta.abs() > 1e-3);
        let c = LinearConstraint::new(alpha, beta, gamma).unwrap();
        let p = zd_from_constraint(&c, &g);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        for q in opponents(seed) {
            let s = scores(&p, &q, &g);
            prop_assert!(c.residual(&s).abs() < 1e-8, "residual {}", c.residual(&s));
        }
    }

    #[test]
    fn set_score_pins_the_opponent(p1 in 0.0..=1.0f64, p4 in 0.0..=1.0f64, g in game(), seed in any::<u64>()) {
        let Ok(s) = set_opponent_score(p1, p4, &g) else { return Ok(()) };
        prop_assert!(s.s_y >= g.p() - 1e-12 && s.s_y <= g.r() + 1e-12);
        for q in opponents(seed) {
            let got = scores(&s.p, &q, &g).s_y;
            prop_assert!((got - s.s_y).abs() < 1e-7, "{got} vs {}", s.s_y);
        }
    }

    #[test]
    fn extortion_holds_below_the_bound(chi in 1.0..10.0f64, frac in 0.01..1.0f64, g in game(), seed in any::<u64>()) {
        let phi = frac * phi_upper_bound(chi, &g);
        let p = extortionate(&ExtortionParams { chi, phi }, &g).unwrap();
        for q in opponents(seed) {
            let s = scores(&p, &q, &g);
            prop_assert!(((s.s_x - g.p()) - chi * (s.s_y - g.p())).abs() < 1e-7);
        }
    }

    #[test]
    fn extortion_above_the_bound_is_rejected(chi in 1.0..10.0f64, excess in 1.001..3.0f64, g in game()) {
        let phi = excess * phi_upper_bound(chi, &g);
        let rejected = extortionate(&ExtortionParams { chi, phi }, &g).is_err();
        prop_assert!(rejected);
    }

    #[test]
    fn best_case_moves_with_chi(a in 1.0..50.0f64, b in 1.0..50.0f64) {
        let g = GameParams::standard();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (x, y) = (extortion_best_case(lo, &g), extortion_best_case(hi, &g));
        prop_assert!(y.s_x >= x.s_x - 1e-12 && y.s_y <= x.s_y + 1e-12);
        prop_assert!(y.s_x < 13.0 / 3.0 && y.s_y > 1.0);
    }
}

#[test]
fn mutual_extortion_collapses_to_punishment() {
    let g = GameParams::standard();
    let a = extortionate(&ExtortionParams { chi: 2.0, phi: 1.0 / 18.0 }, &g).unwrap();
    let b = extortionate(&ExtortionParams { chi: 3.0, phi: 1.0 / 26.0 }, &g).unwrap();
    let s = scores(&a, &b, &g);
    assert!((s.s_x - 1.0).abs() < 1e-9 && (s.s_y - 1.0).abs() < 1e-9);
}

#[test]
fn extortioner_against_a_cooperator_matches_the_closed_form() {
    let g = GameParams::standard();
    let all_c = StrategyVector::constant(1.0).unwrap();
    for (chi, phi) in [(2.0, 1.0 / 18.0), (3.0, 1.0 / 26.0), (5.0, 0.01)] {
        let p = extortionate(&ExtortionParams { chi, phi }, &g).unwrap();
        let s = scores(&p, &all_c, &g);
        let want = extortion_best_case(chi, &g);
        assert!((s.s_x - want.s_x).abs() < 1e-9 && (s.s_y - want.s_y).abs() < 1e-9, "{s:?} vs {want:?}");
    }
}
