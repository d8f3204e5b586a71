//! Best responses, pure Nash equilibria, the social optimum, PoA/PoS and
//! improvement dynamics.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::context::SocialContext;
use crate::game::{Game, GameError, Occupancy, Profile};
use crate::numerics::Rational;

/// Default cap on the number of profiles any exhaustive operation will visit.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquilibriaError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("profile space has {size} profiles, budget is {budget}: refusing to enumerate")]
    BudgetExceeded { size: String, budget: u64 },
    #[error("max_steps must be at least 1")]
    ZeroSteps,
}

/// The mixed-radix profile space; the last player varies fastest.
#[derive(Debug, Clone)]
pub struct ProfileSpace {
    radices: Vec<usize>,
}

impl ProfileSpace {
    pub fn new(game: &Game) -> Self {
        Self { radices: game.strategy_counts() }
    }

    /// Number of profiles, or `None` if it does not fit in a `u64`.
    pub fn size(&self) -> Option<u64> {
        self.radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r as u64))
    }

    fn size_text(&self) -> String {
        match self.size() {
            Some(s) => s.to_string(),
            None => {
                let total: num_bigint::BigUint = self.radices.iter().map(|&r| num_bigint::BigUint::from(r)).product();
                total.to_string()
            }
        }
    }

    /// Size, if within `budget`.
    pub fn checked_size(&self, budget: u64) -> Result<u64, EquilibriaError> {
        match self.size() {
            Some(s) if s <= budget => Ok(s),
            _ => Err(EquilibriaError::BudgetExceeded { size: self.size_text(), budget }),
        }
    }

    pub fn profile_at(&self, mut index: u64) -> Profile {
        let mut choices = vec![0; self.radices.len()];
        for (slot, &r) in choices.iter_mut().zip(&self.radices).rev() {
            *slot = (index % r as u64) as usize;
            index /= r as u64;
        }
        Profile::new(choices)
    }

    pub fn index_of(&self, s: &Profile) -> u64 {
        s.choices().iter().zip(&self.radices).fold(0u64, |acc, (&k, &r)| acc * r as u64 + k as u64)
    }

    /// Iterate every profile in enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = Profile> + '_ {
        let size = self.size().expect("profile space too large to iterate");
        (0..size).map(move |k| self.profile_at(k))
    }
}

/// A strictly improving unilateral deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub player: usize,
    pub from: usize,
    pub to: usize,
    pub delta: Rational,
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}: {} -> {} (gain {})", self.player + 1, self.from + 1, self.to + 1, self.delta)
    }
}

fn validate(game: &Game, ctx: &SocialContext, s: &Profile) -> Result<(), GameError> {
    game.validate_context(ctx)?;
    game.validate_profile(s)
}

/// All strategies of player `i` minimizing `ĉ_i(S ⋄ t)`.
pub fn best_responses(game: &Game, ctx: &SocialContext, s: &Profile, i: usize) -> Result<Vec<usize>, EquilibriaError> {
    validate(game, ctx, s)?;
    let occ = Occupancy::new(game, s)?;
    let deltas: Vec<Rational> =
        (0..game.strategies(i).len()).map(|t| occ.deviation_delta(game, ctx, i, t)).collect();
    let best = deltas.iter().max().cloned().unwrap_or_else(Rational::zero);
    Ok(deltas.iter().enumerate().filter(|(_, d)| **d == best).map(|(t, _)| t).collect())
}

/// First strictly improving deviation at an occupancy, scanning players then strategies.
fn first_improvement(game: &Game, ctx: &SocialContext, occ: &Occupancy) -> Option<Deviation> {
    let s = occ.profile();
    for i in 0..game.players() {
        for t in 0..game.strategies(i).len() {
            if t == s.choice(i) {
                continue;
            }
            let delta = occ.deviation_delta(game, ctx, i, t);
            if delta.is_positive() {
                return Some(Deviation { player: i, from: s.choice(i), to: t, delta });
            }
        }
    }
    None
}

/// Largest strictly improving deviation; ties go to the lowest (player, strategy).
fn best_improvement(game: &Game, ctx: &SocialContext, occ: &Occupancy) -> Option<Deviation> {
    let s = occ.profile();
    let mut best: Option<Deviation> = None;
    for i in 0..game.players() {
        for t in 0..game.strategies(i).len() {
            if t == s.choice(i) {
                continue;
            }
            let delta = occ.deviation_delta(game, ctx, i, t);
            if delta.is_positive() && best.as_ref().is_none_or(|b| delta > b.delta) {
                best = Some(Deviation { player: i, from: s.choice(i), to: t, delta });
            }
        }
    }
    best
}

/// `Ok(None)` if `S` is a pure Nash equilibrium, otherwise the first improving deviation.
pub fn nash_witness(game: &Game, ctx: &SocialContext, s: &Profile) -> Result<Option<Deviation>, EquilibriaError> {
    validate(game, ctx, s)?;
    Ok(first_improvement(game, ctx, &Occupancy::new(game, s)?))
}

pub fn is_pure_nash(game: &Game, ctx: &SocialContext, s: &Profile) -> Result<bool, EquilibriaError> {
    Ok(nash_witness(game, ctx, s)?.is_none())
}

/// Every pure Nash equilibrium, in enumeration order.
pub fn enumerate_nash(game: &Game, ctx: &SocialContext, budget: u64) -> Result<Vec<Profile>, EquilibriaError> {
    game.validate_context(ctx)?;
    let space = ProfileSpace::new(game);
    let size = space.checked_size(budget)?;
    Ok((0..size)
        .into_par_iter()
        .filter_map(|k| {
            let s = space.profile_at(k);
            let occ = Occupancy::new(game, &s).expect("enumerated profile is valid");
            first_improvement(game, ctx, &occ).is_none().then_some(s)
        })
        .collect())
}

/// Social cost of every profile, in enumeration order.
pub fn all_social_costs(game: &Game, budget: u64) -> Result<Vec<Rational>, EquilibriaError> {
    let space = ProfileSpace::new(game);
    let size = space.checked_size(budget)?;
    Ok((0..size)
        .into_par_iter()
        .map(|k| social_cost_unchecked(game, &space.profile_at(k)))
        .collect())
}

fn social_cost_unchecked(game: &Game, s: &Profile) -> Rational {
    let occ = Occupancy::new(game, s).expect("enumerated profile is valid");
    (0..game.resources())
        .filter(|&e| occ.load(e) > 0)
        .map(|e| {
            let x = Rational::from(occ.load(e) as i64);
            let lat = game.latency(e);
            &lat.alpha * &x * &x + &lat.beta * &x
        })
        .sum()
}

/// Lexicographically first profile minimizing `SUM`.
pub fn social_optimum(game: &Game, budget: u64) -> Result<(Profile, Rational), EquilibriaError> {
    let space = ProfileSpace::new(game);
    let costs = all_social_costs(game, budget)?;
    let (k, v) = costs
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1 < best.1 { cur } else { best })
        .expect("profile space is non-empty");
    Ok((space.profile_at(k as u64), v))
}

/// A PoA or PoS value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatioOutcome {
    Value(Rational),
    /// No pure Nash equilibrium exists.
    Undefined,
    /// The optimum has social cost 0.
    Degenerate,
}

impl fmt::Display for RatioOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioOutcome::Value(r) => write!(f, "{} (~{})", r, r.to_decimal(6)),
            RatioOutcome::Undefined => write!(f, "undefined (no NE)"),
            RatioOutcome::Degenerate => write!(f, "degenerate (zero optimum)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub ne_list: Vec<Profile>,
    pub ne_costs: Vec<Rational>,
    pub opt_profile: Profile,
    pub opt_value: Rational,
    pub poa: RatioOutcome,
    pub pos: RatioOutcome,
    pub profile_count: u64,
}

pub fn ratios(game: &Game, ctx: &SocialContext, budget: u64) -> Result<AnalysisReport, EquilibriaError> {
    game.validate_context(ctx)?;
    let space = ProfileSpace::new(game);
    let profile_count = space.checked_size(budget)?;
    let costs = all_social_costs(game, budget)?;
    let ne_list = enumerate_nash(game, ctx, budget)?;
    let (opt_k, opt_value) = costs
        .iter()
        .enumerate()
        .reduce(|best, cur| if cur.1 < best.1 { cur } else { best })
        .map(|(k, v)| (k, v.clone()))
        .expect("profile space is non-empty");
    let ne_costs: Vec<Rational> = ne_list.iter().map(|s| costs[space.index_of(s) as usize].clone()).collect();
    let (poa, pos) = if ne_list.is_empty() {
        (RatioOutcome::Undefined, RatioOutcome::Undefined)
    } else if opt_value.is_zero() {
        (RatioOutcome::Degenerate, RatioOutcome::Degenerate)
    } else {
        let worst = ne_costs.iter().max().expect("non-empty");
        let best = ne_costs.iter().min().expect("non-empty");
        (RatioOutcome::Value(worst / &opt_value), RatioOutcome::Value(best / &opt_value))
    };
    Ok(AnalysisReport {
        ne_list,
        ne_costs,
        opt_profile: space.profile_at(opt_k as u64),
        opt_value,
        poa,
        pos,
        profile_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    FirstImprover,
    BestImprover,
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" | "first-improver" => Ok(Policy::FirstImprover),
            "best" | "best-improver" => Ok(Policy::BestImprover),
            other => Err(format!("unknown policy '{other}' (expected first-improver or best-improver)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DynamicsKind {
    Converged,
    Cycle,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsOutcome {
    pub kind: DynamicsKind,
    /// Moves in order; `profiles[k + 1]` is the result of `moves[k]`.
    pub moves: Vec<Deviation>,
    pub profiles: Vec<Profile>,
    /// Index into `profiles` where the cycle starts (for `Cycle`).
    pub cycle_start: Option<usize>,
}

impl DynamicsOutcome {
    pub fn final_profile(&self) -> &Profile {
        self.profiles.last().expect("trajectory contains the start")
    }

    /// The repeating profile sequence, closing back on its first element.
    pub fn cycle(&self) -> Option<&[Profile]> {
        self.cycle_start.map(|k| &self.profiles[k..])
    }
}

/// Iterate strict single-player improvements from `start`.
pub fn best_response_dynamics(
    game: &Game,
    ctx: &SocialContext,
    start: &Profile,
    policy: Policy,
    max_steps: usize,
) -> Result<DynamicsOutcome, EquilibriaError> {
    if max_steps == 0 {
        return Err(EquilibriaError::ZeroSteps);
    }
    validate(game, ctx, start)?;
    let mut occ = Occupancy::new(game, start)?;
    let mut seen: HashMap<Profile, usize> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut moves = Vec::new();
    let mut profiles = vec![start.clone()];
    let visit_cap = ProfileSpace::new(game).size().unwrap_or(u64::MAX).min(DEFAULT_BUDGET);
    for _ in 0..max_steps {
        let next = match policy {
            Policy::FirstImprover => first_improvement(game, ctx, &occ),
            Policy::BestImprover => best_improvement(game, ctx, &occ),
        };
        let Some(dev) = next else {
            return Ok(DynamicsOutcome { kind: DynamicsKind::Converged, moves, profiles, cycle_start: None });
        };
        occ.apply_move(game, dev.player, dev.to);
        moves.push(dev);
        let s = occ.profile().clone();
        profiles.push(s.clone());
        if let Some(&k) = seen.get(&s) {
            return Ok(DynamicsOutcome { kind: DynamicsKind::Cycle, moves, profiles, cycle_start: Some(k) });
        }
        if (seen.len() as u64) < visit_cap {
            seen.insert(s, profiles.len() - 1);
        }
    }
    Ok(DynamicsOutcome { kind: DynamicsKind::Truncated, moves, profiles, cycle_start: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::SocialContext;
    use crate::game::{Latency, Strategy};
    use crate::instances;
    use crate::numerics::rat;

    fn p(v: &[usize]) -> Profile {
        Profile::new(v.iter().map(|k| k - 1).collect())
    }

    #[test]
    fn profile_space_order() {
        let inst = instances::gen_ne2();
        let space = ProfileSpace::new(&inst.game);
        let all: Vec<String> = space.iter().map(|s| s.to_string()).collect();
        assert_eq!(all[0], "(1,1,1)");
        assert_eq!(all[1], "(1,1,2)");
        assert_eq!(all[7], "(2,2,2)");
        for (k, s) in space.iter().enumerate() {
            assert_eq!(space.index_of(&s), k as u64);
        }
    }

    #[test]
    fn ne2_best_response_and_no_ne() {
        let inst = instances::gen_ne2();
        assert_eq!(best_responses(&inst.game, &inst.context, &p(&[1, 1, 1]), 0).unwrap(), vec![1]);
        assert!(enumerate_nash(&inst.game, &inst.context, DEFAULT_BUDGET).unwrap().is_empty());
        let r = ratios(&inst.game, &inst.context, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.poa, RatioOutcome::Undefined);
        assert_eq!(r.profile_count, 8);
    }

    #[test]
    fn ne2_cycle() {
        let inst = instances::gen_ne2();
        let out = best_response_dynamics(&inst.game, &inst.context, &p(&[1, 1, 1]), Policy::FirstImprover, 100)
            .unwrap();
        assert_eq!(out.kind, DynamicsKind::Cycle);
        let seq: Vec<String> = out.profiles.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            seq,
            ["(1,1,1)", "(2,1,1)", "(2,2,1)", "(1,2,1)", "(1,2,2)", "(1,1,2)", "(2,1,2)", "(2,1,1)"]
        );
        assert_eq!(out.cycle_start, Some(1));
    }

    #[test]
    fn ne2_optimum_matches_brute_force() {
        let inst = instances::gen_ne2();
        let (s, v) = social_optimum(&inst.game, DEFAULT_BUDGET).unwrap();
        let oracle = ProfileSpace::new(&inst.game)
            .iter()
            .map(|s| crate::game::social_cost(&inst.game, &s).unwrap())
            .min()
            .unwrap();
        assert_eq!(v, oracle);
        assert_eq!(crate::game::social_cost(&inst.game, &s).unwrap(), v);
    }

    #[test]
    fn tree_h1_indifference() {
        let inst = instances::gen_tree_lb(1).unwrap();
        let k = inst.k.clone().unwrap();
        for i in 0..inst.game.players() {
            assert_eq!(best_responses(&inst.game, &inst.context, &k, i).unwrap(), vec![0, 1]);
        }
        assert!(is_pure_nash(&inst.game, &inst.context, &k).unwrap());
        let out = best_response_dynamics(&inst.game, &inst.context, &k, Policy::BestImprover, 10).unwrap();
        assert_eq!(out.kind, DynamicsKind::Converged);
        assert!(out.moves.is_empty());
        let (_, opt) = social_optimum(&inst.game, DEFAULT_BUDGET).unwrap();
        assert!(opt <= rat(9, 1));
    }

    #[test]
    fn single_player_and_singleton_game() {
        let g = Game::with_min_players(
            vec![Latency::linear(rat(3, 1)), Latency::linear(rat(1, 1))],
            vec![vec![Strategy::new(vec![0]), Strategy::new(vec![1])]],
            1,
        )
        .unwrap();
        let id = SocialContext::identity(1);
        assert_eq!(enumerate_nash(&g, &id, 10).unwrap(), vec![Profile::new(vec![1])]);
        assert_eq!(social_optimum(&g, 10).unwrap(), (Profile::new(vec![1]), rat(1, 1)));
        let r = ratios(&g, &id, 10).unwrap();
        assert_eq!(r.poa, RatioOutcome::Value(rat(1, 1)));
        assert_eq!(r.pos, RatioOutcome::Value(rat(1, 1)));

        let single = Game::with_min_players(
            vec![Latency::linear(rat(1, 1))],
            vec![vec![Strategy::new(vec![0])], vec![Strategy::new(vec![0])]],
            1,
        )
        .unwrap();
        assert_eq!(best_responses(&single, &SocialContext::identity(2), &Profile::uniform(2, 0), 1).unwrap(), vec![0]);
    }

    #[test]
    fn budget_refusal() {
        let inst = instances::gen_ne2();
        assert!(matches!(
            enumerate_nash(&inst.game, &inst.context, 7),
            Err(EquilibriaError::BudgetExceeded { .. })
        ));
        let tree = instances::gen_tree_lb(3).unwrap();
        assert!(matches!(
            social_optimum(&tree.game, DEFAULT_BUDGET),
            Err(EquilibriaError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn truncation_and_zero_steps() {
        let inst = instances::gen_ne2();
        let out = best_response_dynamics(&inst.game, &inst.context, &p(&[1, 1, 1]), Policy::BestImprover, 2).unwrap();
        assert_eq!(out.kind, DynamicsKind::Truncated);
        assert_eq!(out.moves.len(), 2);
        assert!(best_response_dynamics(&inst.game, &inst.context, &p(&[1, 1, 1]), Policy::BestImprover, 0).is_err());
    }
}
