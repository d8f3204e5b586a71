//! Exact potential functions for restricted symmetric contexts and for the
//! `Γ_V` family, and a brute-force exactness checker.

use std::fmt;

use thiserror::Error;

use crate::context::{AltruismVector, ContextError, SocialContext};
use crate::equilibria::{EquilibriaError, ProfileSpace};
use crate::game::{Game, GameError, Occupancy, Profile};
use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PotentialError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Enumeration(#[from] EquilibriaError),
    #[error("context is not symmetric after normalization")]
    NotSymmetric,
    #[error("context is not of the Gamma_V form")]
    NotGammaV,
    #[error("altruism vector has {got} entries, game has {expected} players")]
    Dimension { expected: usize, got: usize },
    #[error("deviation space has {size} triples, budget is {budget}: refusing to enumerate")]
    BudgetExceeded { size: u64, budget: u64 },
}

/// `Σ_{i ≠ j, both on e} γ_ij` over the user set of `e`.
pub fn pair_weight(ctx: &SocialContext, users: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for &i in users {
        for &j in users {
            if i != j {
                total += ctx.gamma(i, j);
            }
        }
    }
    total
}

/// Potential with no precondition on `ctx`; only a potential when `ctx` is
/// restricted, symmetric and has unit diagonal.
pub fn phi_restricted_symmetric_raw(game: &Game, ctx: &SocialContext, s: &Profile) -> Result<Rational, GameError> {
    game.validate_context(ctx)?;
    let occ = Occupancy::new(game, s)?;
    let two = Rational::from(2);
    let mut sum = Rational::zero();
    for e in 0..game.resources() {
        let n = occ.load(e);
        if n == 0 {
            continue;
        }
        let lat = game.latency(e);
        let x = Rational::from(n as i64);
        let quad = &x * (&x + Rational::one()) + pair_weight(ctx, occ.users(e));
        sum += &lat.alpha * quad + &two * &lat.beta * &x;
    }
    Ok(sum / two)
}

/// Normalizes `ctx` and evaluates the restricted symmetric potential.
pub fn phi_restricted_symmetric(game: &Game, ctx: &SocialContext, s: &Profile) -> Result<Rational, PotentialError> {
    let norm = normalized_symmetric(ctx)?;
    Ok(phi_restricted_symmetric_raw(game, &norm, s)?)
}

fn normalized_symmetric(ctx: &SocialContext) -> Result<SocialContext, PotentialError> {
    let norm = ctx.normalize()?;
    if !norm.is_symmetric() {
        return Err(PotentialError::NotSymmetric);
    }
    Ok(norm)
}

pub fn phi_gamma_v(game: &Game, v: &AltruismVector, s: &Profile) -> Result<Rational, PotentialError> {
    if v.len() != game.players() {
        return Err(PotentialError::Dimension { expected: game.players(), got: v.len() });
    }
    let occ = Occupancy::new(game, s)?;
    let two = Rational::from(2);
    let mut sum = Rational::zero();
    for e in 0..game.resources() {
        let users = occ.users(e);
        if users.is_empty() {
            continue;
        }
        let lat = game.latency(e);
        let x = Rational::from(users.len() as i64);
        let vsum: Rational = users.iter().map(|&j| v.get(j)).sum();
        let selfish: Rational = users.iter().map(|&j| Rational::one() - v.get(j)).sum();
        sum += &lat.alpha * (&x * (&x + Rational::one()) - &two * vsum) + &two * &lat.beta * selfish;
    }
    Ok(sum / two)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// Normalize, require symmetry, then evaluate.
    RestrictedSymmetric,
    /// Evaluate the restricted symmetric formula on the raw matrix.
    RestrictedSymmetricForced,
    /// Read `V` off the matrix and evaluate the `Γ_V` potential.
    GammaV,
}

impl std::str::FromStr for PotentialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rs" | "restricted-symmetric" => Ok(Self::RestrictedSymmetric),
            "rs-forced" | "forced" => Ok(Self::RestrictedSymmetricForced),
            "gammav" | "gamma-v" => Ok(Self::GammaV),
            other => Err(format!("unknown potential kind '{other}' (expected rs, rs-forced or gammav)")),
        }
    }
}

/// First deviation where `ΔΦ ≠ Δĉ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialWitness {
    pub profile: Profile,
    pub player: usize,
    pub strategy: usize,
    pub delta_phi: Rational,
    pub delta_cost: Rational,
}

impl fmt::Display for PotentialWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S={} player {} -> {}: dPhi={} dcost={}",
            self.profile,
            self.player + 1,
            self.strategy + 1,
            self.delta_phi,
            self.delta_cost
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessReport {
    pub deviations_checked: u64,
    pub witness: Option<PotentialWitness>,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

type PotentialFn<'a> = Box<dyn Fn(&Profile) -> Rational + 'a>;

/// Compare `Φ(S) − Φ(S ⋄ t)` with the deviation delta of `ctx` for every
/// profile, player and strategy, in enumeration order.
pub fn check_exact_potential(
    game: &Game,
    ctx: &SocialContext,
    kind: PotentialKind,
    budget: u64,
) -> Result<ExactnessReport, PotentialError> {
    game.validate_context(ctx)?;
    let space = ProfileSpace::new(game);
    let per_profile: u64 = game.strategy_counts().iter().map(|&k| k as u64).sum();
    let size = space
        .size()
        .and_then(|s| s.checked_mul(per_profile))
        .filter(|&t| t <= budget)
        .ok_or(PotentialError::BudgetExceeded { size: space.size().unwrap_or(u64::MAX), budget })?;
    let _ = size;

    let (eval_ctx, phi): (SocialContext, PotentialFn<'_>) = match kind {
        PotentialKind::RestrictedSymmetric => {
            let norm = normalized_symmetric(ctx)?;
            let n2 = norm.clone();
            (norm, Box::new(move |s| phi_restricted_symmetric_raw(game, &n2, s).expect("validated")))
        }
        PotentialKind::RestrictedSymmetricForced => {
            let raw = ctx.clone();
            (ctx.clone(), Box::new(move |s| phi_restricted_symmetric_raw(game, &raw, s).expect("validated")))
        }
        PotentialKind::GammaV => {
            let v = ctx.extract_gamma_v().ok_or(PotentialError::NotGammaV)?;
            (ctx.clone(), Box::new(move |s| phi_gamma_v(game, &v, s).expect("validated")))
        }
    };

    let mut checked = 0u64;
    for s in space.iter() {
        let occ = Occupancy::new(game, &s)?;
        let phi_s = phi(&s);
        for i in 0..game.players() {
            for t in 0..game.strategies(i).len() {
                checked += 1;
                let delta_cost = occ.deviation_delta(game, &eval_ctx, i, t);
                let delta_phi = &phi_s - phi(&s.deviate(i, t));
                if delta_phi != delta_cost {
                    return Ok(ExactnessReport {
                        deviations_checked: checked,
                        witness: Some(PotentialWitness { profile: s, player: i, strategy: t, delta_phi, delta_cost }),
                    });
                }
            }
        }
    }
    Ok(ExactnessReport { deviations_checked: checked, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{best_response_dynamics, DynamicsKind, Policy};
    use crate::game::{altruistic_cost, Latency, Strategy};
    use crate::instances::{self, ContextKind, RandomSpec};
    use crate::numerics::rat;

    #[test]
    fn single_player_single_resource() {
        let g = Game::with_min_players(vec![Latency::linear(rat(1, 1))], vec![vec![Strategy::new(vec![0])]], 1)
            .unwrap();
        let s = Profile::new(vec![0]);
        assert_eq!(phi_restricted_symmetric(&g, &SocialContext::identity(1), &s).unwrap(), rat(1, 1));
    }

    #[test]
    fn identity_is_rosenthal() {
        for seed in 0..10 {
            let inst = instances::gen_random(&RandomSpec { seed, ctx_kind: ContextKind::Identity, ..Default::default() });
            for s in ProfileSpace::new(&inst.game).iter() {
                let occ = Occupancy::new(&inst.game, &s).unwrap();
                let rosenthal: Rational = (0..inst.game.resources())
                    .flat_map(|e| (1..=occ.load(e)).map(move |k| (e, k)))
                    .map(|(e, k)| inst.game.latency(e).at(k))
                    .sum();
                assert_eq!(phi_restricted_symmetric(&inst.game, &inst.context, &s).unwrap(), rosenthal);
            }
        }
    }

    #[test]
    fn gamma_v_special_cases() {
        let inst = instances::gen_random(&RandomSpec { seed: 3, ctx_kind: ContextKind::Identity, ..Default::default() });
        let n = inst.game.players();
        let zero = AltruismVector::uniform(n, rat(0, 1)).unwrap();
        let ones = AltruismVector::uniform(n, rat(1, 1)).unwrap();
        for s in ProfileSpace::new(&inst.game).iter() {
            assert_eq!(
                phi_gamma_v(&inst.game, &zero, &s).unwrap(),
                phi_restricted_symmetric(&inst.game, &SocialContext::identity(n), &s).unwrap()
            );
            let occ = Occupancy::new(&inst.game, &s).unwrap();
            let expected: Rational = (0..inst.game.resources())
                .map(|e| {
                    let x = Rational::from(occ.load(e) as i64);
                    &inst.game.latency(e).alpha * &x * (&x - Rational::one()) / Rational::from(2)
                })
                .sum();
            assert_eq!(phi_gamma_v(&inst.game, &ones, &s).unwrap(), expected);
        }
    }

    #[test]
    fn random_restricted_symmetric_exact() {
        for seed in 0..20 {
            let inst = instances::gen_random(&RandomSpec {
                seed,
                ctx_kind: ContextKind::RestrictedSymmetric,
                ..Default::default()
            });
            let rep = check_exact_potential(&inst.game, &inst.context, PotentialKind::RestrictedSymmetric, 1 << 20)
                .unwrap();
            assert!(rep.passed(), "seed {seed}: {:?}", rep.witness);
            // Direct difference as an independent oracle.
            let s = Profile::uniform(inst.game.players(), 0);
            for i in 0..inst.game.players() {
                for t in 0..inst.game.strategies(i).len() {
                    let direct = altruistic_cost(&inst.game, &inst.context, &s, i).unwrap()
                        - altruistic_cost(&inst.game, &inst.context, &s.deviate(i, t), i).unwrap();
                    let dphi = phi_restricted_symmetric(&inst.game, &inst.context, &s).unwrap()
                        - phi_restricted_symmetric(&inst.game, &inst.context, &s.deviate(i, t)).unwrap();
                    assert_eq!(direct, dphi);
                }
            }
        }
    }

    #[test]
    fn forced_on_ne2_fails_and_cycle_sums_to_zero() {
        let inst = instances::gen_ne2();
        let rep =
            check_exact_potential(&inst.game, &inst.context, PotentialKind::RestrictedSymmetricForced, 1000).unwrap();
        assert!(!rep.passed());
        assert!(matches!(
            check_exact_potential(&inst.game, &inst.context, PotentialKind::RestrictedSymmetric, 1000),
            Err(PotentialError::NotSymmetric)
        ));
        let out = best_response_dynamics(&inst.game, &inst.context, &Profile::uniform(3, 0), Policy::FirstImprover, 50)
            .unwrap();
        assert_eq!(out.kind, DynamicsKind::Cycle);
        let start = out.cycle_start.unwrap();
        let cyc = &out.profiles[start..];
        let mut dphi = Rational::zero();
        for w in cyc.windows(2) {
            dphi += phi_restricted_symmetric_raw(&inst.game, &inst.context, &w[0]).unwrap()
                - phi_restricted_symmetric_raw(&inst.game, &inst.context, &w[1]).unwrap();
        }
        assert!(dphi.is_zero());
        let gains: Rational = out.moves[start..].iter().map(|m| m.delta.clone()).sum();
        assert!(gains.is_positive());
    }

    #[test]
    fn ne1_not_normalizable() {
        let inst = instances::gen_ne1();
        assert!(matches!(
            phi_restricted_symmetric(&inst.game, &inst.context, &Profile::uniform(3, 0)),
            Err(PotentialError::Context(ContextError::ZeroDiagonal { player: 2 }))
        ));
    }

    #[test]
    fn pair_weight_uniform() {
        let v = AltruismVector::uniform(4, rat(1, 3)).unwrap();
        let ctx = SocialContext::gamma_v(&v);
        assert_eq!(pair_weight(&ctx, &[0, 2, 3]), rat(6, 1) * rat(1, 3));
    }
}
