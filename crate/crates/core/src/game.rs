//! The linear congestion game model: strategies, congestions, selfish and
//! altruistic costs, and the closed-form deviation delta.
//!
//! Indices are 0-based throughout the library; profiles print 1-based.

use std::fmt;

use thiserror::Error;

use crate::context::SocialContext;
use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("a game needs at least {min} players, got {got}")]
    TooFewPlayers { min: usize, got: usize },
    #[error("a game needs at least one resource")]
    NoResources,
    #[error("player {player} has an empty strategy set")]
    EmptyStrategySet { player: usize },
    #[error("player {player} strategy {strategy} is empty")]
    EmptyStrategy { player: usize, strategy: usize },
    #[error("player {player} strategy {strategy} references resource {resource} outside 1..={m}")]
    ResourceOutOfRange { player: usize, strategy: usize, resource: usize, m: usize },
    #[error("resource {resource}: latency must satisfy alpha >= 0 and alpha + beta >= 0")]
    NegativeLatency { resource: usize },
    #[error("latency list has {got} entries, expected {expected}")]
    LatencyCount { expected: usize, got: usize },
    #[error("profile has {got} entries, game has {expected} players")]
    ProfileLength { expected: usize, got: usize },
    #[error("player {player} has no strategy {strategy}")]
    StrategyOutOfRange { player: usize, strategy: usize },
    #[error("social context is {got}x{got}, game has {expected} players")]
    ContextDimension { expected: usize, got: usize },
}

/// A strategy: a sorted, duplicate-free list of resource indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy(Vec<usize>);

impl Strategy {
    pub fn new(mut resources: Vec<usize>) -> Self {
        resources.sort_unstable();
        resources.dedup();
        Self(resources)
    }

    pub fn resources(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    /// Merge walk over two sorted strategies: `(self \ other, other \ self)`.
    pub fn differences(&self, other: &Strategy) -> (Vec<usize>, Vec<usize>) {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let (mut only_a, mut only_b) = (Vec::new(), Vec::new());
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    only_a.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    only_b.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        only_a.extend_from_slice(&a[i..]);
        only_b.extend_from_slice(&b[j..]);
        (only_a, only_b)
    }
}

/// `ℓ(x) = alpha·x + beta`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Latency {
    pub alpha: Rational,
    pub beta: Rational,
}

impl Latency {
    pub fn new(alpha: Rational, beta: Rational) -> Self {
        Self { alpha, beta }
    }

    pub fn linear(alpha: Rational) -> Self {
        Self { alpha, beta: Rational::zero() }
    }

    pub fn at(&self, load: u32) -> Rational {
        &self.alpha * Rational::from(load as i64) + &self.beta
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Game {
    latencies: Vec<Latency>,
    strategies: Vec<Vec<Strategy>>,
}

impl Game {
    pub fn new(latencies: Vec<Latency>, strategies: Vec<Vec<Strategy>>) -> Result<Self, GameError> {
        Self::with_min_players(latencies, strategies, 2)
    }

    /// Like [`Game::new`] but with a custom lower bound on the player count;
    /// `1` admits the single-player toy games used in tests and examples.
    pub fn with_min_players(
        latencies: Vec<Latency>,
        strategies: Vec<Vec<Strategy>>,
        min_players: usize,
    ) -> Result<Self, GameError> {
        let m = latencies.len();
        if strategies.len() < min_players.max(1) {
            return Err(GameError::TooFewPlayers { min: min_players.max(1), got: strategies.len() });
        }
        if m == 0 {
            return Err(GameError::NoResources);
        }
        for (e, lat) in latencies.iter().enumerate() {
            if lat.alpha.is_negative() || (&lat.alpha + &lat.beta).is_negative() {
                return Err(GameError::NegativeLatency { resource: e + 1 });
            }
        }
        for (i, set) in strategies.iter().enumerate() {
            if set.is_empty() {
                return Err(GameError::EmptyStrategySet { player: i + 1 });
            }
            for (k, s) in set.iter().enumerate() {
                if s.is_empty() {
                    return Err(GameError::EmptyStrategy { player: i + 1, strategy: k + 1 });
                }
                if let Some(&e) = s.resources().iter().find(|&&e| e >= m) {
                    return Err(GameError::ResourceOutOfRange {
                        player: i + 1,
                        strategy: k + 1,
                        resource: e + 1,
                        m,
                    });
                }
            }
        }
        Ok(Self { latencies, strategies })
    }

    pub fn players(&self) -> usize {
        self.strategies.len()
    }

    pub fn resources(&self) -> usize {
        self.latencies.len()
    }

    pub fn latency(&self, e: usize) -> &Latency {
        &self.latencies[e]
    }

    pub fn latencies(&self) -> &[Latency] {
        &self.latencies
    }

    pub fn strategies(&self, i: usize) -> &[Strategy] {
        &self.strategies[i]
    }

    pub fn strategy(&self, i: usize, k: usize) -> &Strategy {
        &self.strategies[i][k]
    }

    pub fn strategy_counts(&self) -> Vec<usize> {
        self.strategies.iter().map(Vec::len).collect()
    }

    /// Every strategy of every player is a single resource.
    pub fn is_load_balancing(&self) -> bool {
        self.strategies.iter().flatten().all(|s| s.len() == 1)
    }

    /// Same game with the latency of each resource replaced.
    pub fn with_latencies(&self, latencies: Vec<Latency>) -> Result<Self, GameError> {
        if latencies.len() != self.resources() {
            return Err(GameError::LatencyCount { expected: self.resources(), got: latencies.len() });
        }
        Self::with_min_players(latencies, self.strategies.clone(), 1)
    }

    pub fn validate_profile(&self, s: &Profile) -> Result<(), GameError> {
        if s.len() != self.players() {
            return Err(GameError::ProfileLength { expected: self.players(), got: s.len() });
        }
        for (i, &k) in s.choices().iter().enumerate() {
            if k >= self.strategies[i].len() {
                return Err(GameError::StrategyOutOfRange { player: i + 1, strategy: k + 1 });
            }
        }
        Ok(())
    }

    pub fn validate_context(&self, ctx: &SocialContext) -> Result<(), GameError> {
        if ctx.dim() != self.players() {
            return Err(GameError::ContextDimension { expected: self.players(), got: ctx.dim() });
        }
        Ok(())
    }

    pub fn chosen<'a>(&'a self, s: &Profile, i: usize) -> &'a Strategy {
        &self.strategies[i][s.choice(i)]
    }
}

/// One chosen strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile(Vec<usize>);

impl Profile {
    pub fn new(choices: Vec<usize>) -> Self {
        Self(choices)
    }

    /// All players on the same strategy index.
    pub fn uniform(players: usize, k: usize) -> Self {
        Self(vec![k; players])
    }

    /// Parse `1,1,2` (1-based indices).
    pub fn parse_one_based(text: &str) -> Option<Self> {
        text.split(',')
            .map(|t| t.trim().parse::<usize>().ok().filter(|&k| k >= 1).map(|k| k - 1))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn choice(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `S_{-i} ⋄ t`.
    pub fn deviate(&self, i: usize, t: usize) -> Self {
        let mut next = self.0.clone();
        next[i] = t;
        Self(next)
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|k| k + 1).collect()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", k + 1)?;
        }
        write!(f, ")")
    }
}

/// Per-resource congestion `n_e(S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongestionVector(Vec<u32>);

impl CongestionVector {
    pub fn get(&self, e: usize) -> u32 {
        self.0[e]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }
}

/// Congestions plus the list of players on every resource, for one profile.
/// Supports incremental single-player moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    profile: Profile,
    users: Vec<Vec<usize>>,
}

impl Occupancy {
    pub fn new(game: &Game, s: &Profile) -> Result<Self, GameError> {
        game.validate_profile(s)?;
        let mut users = vec![Vec::new(); game.resources()];
        for i in 0..game.players() {
            for &e in game.chosen(s, i).resources() {
                users[e].push(i);
            }
        }
        Ok(Self { profile: s.clone(), users })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn load(&self, e: usize) -> u32 {
        self.users[e].len() as u32
    }

    /// Players using `e`, in increasing index order.
    pub fn users(&self, e: usize) -> &[usize] {
        &self.users[e]
    }

    pub fn congestion(&self) -> CongestionVector {
        CongestionVector(self.users.iter().map(|u| u.len() as u32).collect())
    }

    /// Move player `i` to strategy `t`, touching only the symmetric difference.
    pub fn apply_move(&mut self, game: &Game, i: usize, t: usize) {
        let current = game.chosen(&self.profile, i);
        let (leave, join) = current.differences(game.strategy(i, t));
        for e in leave {
            self.users[e].retain(|&j| j != i);
        }
        for e in join {
            let pos = self.users[e].partition_point(|&j| j < i);
            self.users[e].insert(pos, i);
        }
        self.profile = self.profile.deviate(i, t);
    }

    /// Selfish cost of every player.
    pub fn player_costs(&self, game: &Game) -> Vec<Rational> {
        (0..game.players())
            .map(|i| {
                game.chosen(&self.profile, i)
                    .resources()
                    .iter()
                    .map(|&e| game.latency(e).at(self.load(e)))
                    .sum()
            })
            .collect()
    }

    /// `Σ_{j : e ∈ s_j, j ≠ skip} γ_ij`.
    fn weighted_users(&self, ctx: &SocialContext, i: usize, e: usize, skip: Option<usize>) -> Rational {
        self.users[e].iter().filter(|&&j| Some(j) != skip).map(|&j| ctx.gamma(i, j)).sum()
    }

    /// Closed-form `ĉ_i(S) − ĉ_i(S_{-i} ⋄ t)` evaluated over `s_i \ t` and `t \ s_i` only.
    pub fn deviation_delta(&self, game: &Game, ctx: &SocialContext, i: usize, t: usize) -> Rational {
        let current = game.chosen(&self.profile, i);
        let target = game.strategy(i, t);
        let (leave, join) = current.differences(target);
        let g_ii = ctx.gamma(i, i);
        let mut delta = Rational::zero();
        for e in leave {
            let lat = game.latency(e);
            delta += g_ii * lat.at(self.load(e)) + &lat.alpha * self.weighted_users(ctx, i, e, Some(i));
        }
        for e in join {
            let lat = game.latency(e);
            delta -= g_ii * lat.at(self.load(e) + 1) + &lat.alpha * self.weighted_users(ctx, i, e, None);
        }
        delta
    }
}

pub fn congestion(game: &Game, s: &Profile) -> Result<CongestionVector, GameError> {
    Ok(Occupancy::new(game, s)?.congestion())
}

/// `c_i(S) = Σ_{e ∈ s_i} (α_e n_e(S) + β_e)`.
pub fn player_cost(game: &Game, s: &Profile, i: usize) -> Result<Rational, GameError> {
    let occ = Occupancy::new(game, s)?;
    Ok(game.chosen(s, i).resources().iter().map(|&e| game.latency(e).at(occ.load(e))).sum())
}

/// `SUM(S)`, computed both per player and per resource; the two must agree.
pub fn social_cost(game: &Game, s: &Profile) -> Result<Rational, GameError> {
    let occ = Occupancy::new(game, s)?;
    let by_player: Rational = occ.player_costs(game).into_iter().sum();
    let by_resource: Rational = (0..game.resources())
        .map(|e| {
            let x = Rational::from(occ.load(e) as i64);
            let lat = game.latency(e);
            &lat.alpha * &x * &x + &lat.beta * &x
        })
        .sum();
    assert_eq!(by_player, by_resource, "social cost formulas disagree");
    Ok(by_resource)
}

/// `ĉ_i(S) = Σ_j γ_ij c_j(S)`.
pub fn altruistic_cost(game: &Game, ctx: &SocialContext, s: &Profile, i: usize) -> Result<Rational, GameError> {
    game.validate_context(ctx)?;
    let costs = Occupancy::new(game, s)?.player_costs(game);
    Ok(costs.iter().enumerate().map(|(j, c)| ctx.gamma(i, j) * c).sum())
}

/// All altruistic costs for one profile.
pub fn altruistic_costs(game: &Game, ctx: &SocialContext, s: &Profile) -> Result<Vec<Rational>, GameError> {
    game.validate_context(ctx)?;
    let costs = Occupancy::new(game, s)?.player_costs(game);
    Ok((0..game.players())
        .map(|i| costs.iter().enumerate().map(|(j, c)| ctx.gamma(i, j) * c).sum())
        .collect())
}

pub fn deviation_delta(
    game: &Game,
    ctx: &SocialContext,
    s: &Profile,
    i: usize,
    t: usize,
) -> Result<Rational, GameError> {
    game.validate_context(ctx)?;
    if t >= game.strategies(i).len() {
        return Err(GameError::StrategyOutOfRange { player: i + 1, strategy: t + 1 });
    }
    Ok(Occupancy::new(game, s)?.deviation_delta(game, ctx, i, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{AltruismVector, SocialContext};
    use crate::instances;
    use crate::numerics::rat;

    fn p(v: &[usize]) -> Profile {
        Profile::new(v.iter().map(|k| k - 1).collect())
    }

    #[test]
    fn ne2_congestion_at_all_first() {
        let inst = instances::gen_ne2();
        let c = congestion(&inst.game, &p(&[1, 1, 1])).unwrap();
        let expected = [0, 0, 3, 1, 0, 1, 2, 0, 1];
        assert_eq!(c.as_slice(), &expected);
    }

    #[test]
    fn single_player_costs() {
        let g = Game::with_min_players(
            vec![Latency::linear(rat(1, 1)); 3],
            vec![vec![Strategy::new(vec![0, 1, 2])]],
            1,
        )
        .unwrap();
        let s = Profile::new(vec![0]);
        assert_eq!(congestion(&g, &s).unwrap().as_slice(), &[1, 1, 1]);
        assert_eq!(player_cost(&g, &s, 0).unwrap(), rat(3, 1));
        let g = Game::with_min_players(
            vec![Latency::new(rat(0, 1), rat(5, 1))],
            vec![vec![Strategy::new(vec![0])]],
            1,
        )
        .unwrap();
        assert_eq!(social_cost(&g, &Profile::new(vec![0])).unwrap(), rat(5, 1));
    }

    #[test]
    fn ne2_costs() {
        let inst = instances::gen_ne2();
        assert_eq!(player_cost(&inst.game, &p(&[1, 1, 1]), 0).unwrap(), rat(12, 1));
        assert_eq!(altruistic_cost(&inst.game, &inst.context, &p(&[1, 1, 1]), 0).unwrap(), rat(2148, 1));
        assert_eq!(altruistic_cost(&inst.game, &inst.context, &p(&[2, 1, 1]), 2).unwrap(), rat(1159, 1));
        assert_eq!(deviation_delta(&inst.game, &inst.context, &p(&[1, 1, 1]), 0, 1).unwrap(), rat(9, 1));
        assert_eq!(deviation_delta(&inst.game, &inst.context, &p(&[1, 1, 1]), 0, 0).unwrap(), rat(0, 1));
    }

    #[test]
    fn tree_h1_costs() {
        let inst = instances::gen_tree_lb(1).unwrap();
        let k = inst.k.clone().unwrap();
        let o = inst.o.clone().unwrap();
        let c = congestion(&inst.game, &k).unwrap();
        assert_eq!(c.get(0), 3);
        assert!((1..4).all(|e| c.get(e) == 2));
        assert!((4..10).all(|e| c.get(e) == 0));
        assert_eq!(social_cost(&inst.game, &k).unwrap(), rat(81, 5));
        assert_eq!(social_cost(&inst.game, &o).unwrap(), rat(9, 1));
        assert!(inst.game.is_load_balancing());
    }

    #[test]
    fn identity_context_is_selfish() {
        let inst = instances::gen_ne2();
        let id = SocialContext::identity(3);
        for s in crate::equilibria::ProfileSpace::new(&inst.game).iter() {
            for i in 0..3 {
                assert_eq!(
                    altruistic_cost(&inst.game, &id, &s, i).unwrap(),
                    player_cost(&inst.game, &s, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn gamma_v_delta_specialization() {
        let inst = instances::gen_ne1();
        let v = rat(1, 3);
        let ctx = SocialContext::gamma_v(&AltruismVector::uniform(3, v.clone()).unwrap());
        for s in crate::equilibria::ProfileSpace::new(&inst.game).iter() {
            let occ = Occupancy::new(&inst.game, &s).unwrap();
            for i in 0..3 {
                for t in 0..2 {
                    let (leave, join) = inst.game.chosen(&s, i).differences(inst.game.strategy(i, t));
                    let one_minus = rat(1, 1) - &v;
                    let mut expected = Rational::zero();
                    for e in leave {
                        let lat = inst.game.latency(e);
                        let x = Rational::from(occ.load(e) as i64);
                        expected += &lat.alpha * (x - &v) + &one_minus * &lat.beta;
                    }
                    for e in join {
                        let lat = inst.game.latency(e);
                        let x = Rational::from(occ.load(e) as i64);
                        expected -= &lat.alpha * (x + rat(1, 1) - &v) + &one_minus * &lat.beta;
                    }
                    let direct = altruistic_cost(&inst.game, &ctx, &s, i).unwrap()
                        - altruistic_cost(&inst.game, &ctx, &s.deviate(i, t), i).unwrap();
                    assert_eq!(occ.deviation_delta(&inst.game, &ctx, i, t), expected);
                    assert_eq!(direct, expected);
                }
            }
        }
    }

    #[test]
    fn validation_errors() {
        let inst = instances::gen_ne2();
        assert!(matches!(
            congestion(&inst.game, &Profile::new(vec![0, 0, 2])),
            Err(GameError::StrategyOutOfRange { player: 3, strategy: 3 })
        ));
        assert!(matches!(
            congestion(&inst.game, &Profile::new(vec![0, 0])),
            Err(GameError::ProfileLength { .. })
        ));
        let bad = Game::new(
            vec![Latency::linear(rat(1, 1))],
            vec![vec![Strategy::new(vec![0])], vec![Strategy::new(vec![1])]],
        );
        assert!(matches!(bad, Err(GameError::ResourceOutOfRange { resource: 2, .. })));
        assert!(matches!(
            altruistic_cost(&inst.game, &SocialContext::identity(2), &Profile::uniform(3, 0), 0),
            Err(GameError::ContextDimension { .. })
        ));
    }

    #[test]
    fn strategy_differences() {
        let a = Strategy::new(vec![5, 1, 3]);
        let b = Strategy::new(vec![3, 4]);
        assert_eq!(a.differences(&b), (vec![1, 5], vec![4]));
        assert_eq!(a.differences(&a), (vec![], vec![]));
    }
}
