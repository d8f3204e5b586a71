use proptest::prelude::*;

use altcong::certificates::{check_dual_feasible, poa_17_3_certificate};
use altcong::equilibria::{
    best_response_dynamics, best_responses, enumerate_nash, nash_witness, social_optimum, DynamicsKind, Policy,
    ProfileSpace, DEFAULT_BUDGET,
};
use altcong::gamefile::{parse_game_file, GameFile};
use altcong::game::{altruistic_cost, social_cost};
use altcong::instances::{gen_random, ContextKind, Instance, RandomSpec};
use altcong::lp::{build_dual, build_primal, export_lp, parse_lp_text, LpReadMode};
use altcong::potential::{check_exact_potential, PotentialKind};
use altcong::{qeval, rat, QuadExt, Rational, SocialContext};

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| rat(n, d))
}

fn quad() -> impl Strategy<Value = QuadExt> {
    (rational(), rational(), prop::sample::select(vec![2u64, 3, 5, 6, 7])).prop_map(|(a, b, d)| QuadExt::new(a, b, d).unwrap())
}

fn instance(kind: ContextKind) -> impl Strategy<Value = Instance> {
    (any::<u64>(), 2usize..=4, 1usize..=3, 2usize..=8, any::<bool>()).prop_map(move |(seed, players, k, m, beta)| {
        gen_random(&RandomSpec {
            seed,
            players,
            max_strategies: k,
            resources: m,
            coeff_bound: 10,
            ctx_kind: kind,
            with_beta: beta,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_field_axioms(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        prop_assert_eq!(&a - &a, Rational::zero());
        if !a.is_zero() {
            prop_assert_eq!(&a * a.recip().unwrap(), Rational::one());
        }
        prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
    }

    #[test]
    fn quad_field_axioms(x in quad(), y in quad()) {
        prop_assume!(x.radicand() == y.radicand() || x.is_rational() || y.is_rational());
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        if !y.is_zero() {
            prop_assert_eq!(&(&x / &y) * &y, x.clone());
        }
        prop_assert_eq!((&x * &y).signum(), x.signum() * y.signum());
    }

    #[test]
    fn quad_sign_matches_high_precision(x in quad()) {
        let approx = x.to_f64();
        if approx.abs() > 1e-9 {
            prop_assert_eq!(x.signum(), if approx > 0.0 { 1 } else { -1 });
        }
        let text = qeval(&x, 64);
        let parsed: f64 = text.parse().unwrap();
        prop_assert!((parsed - approx).abs() < 1e-9, "{} vs {}", text, approx);
    }

    #[test]
    fn potential_exact_restricted_symmetric(inst in instance(ContextKind::RestrictedSymmetric)) {
        let rep = check_exact_potential(&inst.game, &inst.context, PotentialKind::RestrictedSymmetric, DEFAULT_BUDGET).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.witness);
    }

    #[test]
    fn potential_exact_gamma_v(inst in instance(ContextKind::GammaV)) {
        let rep = check_exact_potential(&inst.game, &inst.context, PotentialKind::GammaV, DEFAULT_BUDGET).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep.witness);
    }

    #[test]
    fn normalization_keeps_best_responses(inst in instance(ContextKind::RestrictedAny)) {
        let norm = inst.context.normalize().unwrap();
        for s in ProfileSpace::new(&inst.game).iter().take(20) {
            for i in 0..inst.game.players() {
                prop_assert_eq!(
                    best_responses(&inst.game, &inst.context, &s, i).unwrap(),
                    best_responses(&inst.game, &norm, &s, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn enumeration_agrees_with_witnesses(inst in instance(ContextKind::ArbitraryNonneg)) {
        let ne = enumerate_nash(&inst.game, &inst.context, DEFAULT_BUDGET).unwrap();
        for s in ProfileSpace::new(&inst.game).iter() {
            let witness = nash_witness(&inst.game, &inst.context, &s).unwrap();
            prop_assert_eq!(witness.is_none(), ne.contains(&s));
            if let Some(d) = witness {
                let after = altruistic_cost(&inst.game, &inst.context, &s.deviate(d.player, d.to), d.player).unwrap();
                let before = altruistic_cost(&inst.game, &inst.context, &s, d.player).unwrap();
                prop_assert_eq!(before - after, d.delta);
            }
        }
    }

    #[test]
    fn dynamics_converge_with_potential(inst in instance(ContextKind::RestrictedSymmetric), best in any::<bool>()) {
        let policy = if best { Policy::BestImprover } else { Policy::FirstImprover };
        let start = ProfileSpace::new(&inst.game).profile_at(0);
        let out = best_response_dynamics(&inst.game, &inst.context, &start, policy, 100_000).unwrap();
        prop_assert_eq!(&out.kind, &DynamicsKind::Converged);
        let ne = enumerate_nash(&inst.game, &inst.context, DEFAULT_BUDGET).unwrap();
        prop_assert!(ne.contains(out.final_profile()));
    }

    /// The 17/3 certificate is dual feasible for every pair, and weak duality
    /// bounds the ratio of any equilibrium to the optimum.
    #[test]
    fn weak_duality_17_3(inst in instance(ContextKind::RestrictedAny)) {
        let ctx = inst.context.normalize().unwrap();
        let game = inst.game.with_latencies(
            inst.game.latencies().iter().map(|l| altcong::Latency::linear(l.alpha.clone())).collect(),
        ).unwrap();
        let (opt, opt_value) = social_optimum(&game, DEFAULT_BUDGET).unwrap();
        let cert = poa_17_3_certificate(None).for_players(game.players());
        for k in ProfileSpace::new(&game).iter().take(30) {
            let dual = build_dual(&game, &ctx, &k, &opt).unwrap();
            prop_assert!(check_dual_feasible(&dual, &cert).unwrap().is_feasible());
        }
        for k in enumerate_nash(&game, &ctx, DEFAULT_BUDGET).unwrap() {
            prop_assert!(Rational::from(3) * social_cost(&game, &k).unwrap() <= Rational::from(17) * &opt_value);
        }
    }

    #[test]
    fn game_file_round_trip(inst in instance(ContextKind::ArbitraryNonneg), gv in instance(ContextKind::GammaV)) {
        for inst in [inst, gv] {
            let file = GameFile::new(inst.game.clone(), inst.context.clone()).unwrap();
            let text = file.emit();
            let back = parse_game_file(&text).unwrap();
            prop_assert_eq!(&back, &file);
            prop_assert_eq!(back.emit(), text);
        }
    }

    #[test]
    fn lp_export_round_trip(inst in instance(ContextKind::RestrictedSymmetric)) {
        let space = ProfileSpace::new(&inst.game);
        let (k, o) = (space.profile_at(0), space.profile_at(space.size().unwrap() - 1));
        for lp in [build_primal(&inst.game, &inst.context, &k, &o).unwrap(), build_dual(&inst.game, &inst.context, &k, &o).unwrap()] {
            let back = parse_lp_text(&export_lp(&lp), LpReadMode::Exact).unwrap();
            prop_assert!(back.structurally_equal(&lp));
        }
        let primal = build_primal(&inst.game, &inst.context, &k, &o).unwrap();
        let dual = build_dual(&inst.game, &inst.context, &k, &o).unwrap();
        prop_assert_eq!(primal.dual().unwrap().matrix(), dual.matrix());
    }
}

#[test]
fn identity_context_normalizes_to_itself() {
    let id = SocialContext::identity(4);
    assert_eq!(id.normalize().unwrap(), id);
}
