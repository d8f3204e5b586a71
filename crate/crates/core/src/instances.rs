//! Generators for the named instance families and a seeded random generator.

use num_integer::Roots;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::context::{AltruismVector, SocialContext};
use crate::game::{Game, Latency, Profile, Strategy};
use crate::numerics::{rat, Rational};

/// Largest tree the tree generator will build.
pub const TREE_NODE_BUDGET: usize = 10_000;

/// Default `δ` for the lower-bound families.
pub fn default_delta() -> Rational {
    rat(1, 1000)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("tree height must be at least 1")]
    ZeroHeight,
    #[error("tree of height {h} has {nodes} nodes, budget is {budget}")]
    TreeTooLarge { h: u32, nodes: usize, budget: usize },
    #[error("group sizes must satisfy n1 >= {min_n1} and n2 >= 1")]
    GroupSize { min_n1: usize },
    #[error("delta must be positive")]
    NonPositiveDelta,
    #[error("v = {v} is outside the {branch} branch range {range}")]
    BranchRange { v: Rational, branch: &'static str, range: &'static str },
    #[error("delta = {delta} makes the A latency negative")]
    DeltaTooLarge { delta: Rational },
    #[error("random generator bounds must be positive")]
    BadBounds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub game: Game,
    pub context: SocialContext,
    /// The equilibrium profile singled out by the construction, if any.
    pub k: Option<Profile>,
    /// The comparison (optimal or near-optimal) profile, if any.
    pub o: Option<Profile>,
}

fn strategies(sets: &[&[&[usize]]]) -> Vec<Vec<Strategy>> {
    sets.iter()
        .map(|player| player.iter().map(|s| Strategy::new(s.iter().map(|e| e - 1).collect())).collect())
        .collect()
}

fn linear(alphas: &[i64]) -> Vec<Latency> {
    alphas.iter().map(|&a| Latency::linear(Rational::from(a))).collect()
}

/// Three players, thirteen resources, symmetric but non-restricted context; no pure NE.
pub fn gen_ne1() -> Instance {
    let strat = strategies(&[
        &[&[1, 4, 13], &[2, 3, 5, 6]],
        &[&[4, 5, 6, 9, 10, 13], &[3, 7, 8]],
        &[&[1, 4, 5, 7, 10, 12], &[6, 8, 11, 13]],
    ]);
    let game = Game::new(linear(&[9, 7, 16, 25, 14, 32, 363, 87, 383, 318, 1047, 160, 31]), strat)
        .expect("ne1 is well formed");
    let (a, b, c) = (rat(10, 211), rat(2, 53), rat(1, 9));
    let context = SocialContext::new(vec![
        vec![rat(1, 1), a.clone(), b.clone()],
        vec![a, rat(0, 1), c.clone()],
        vec![b, c, rat(1, 1)],
    ])
    .expect("ne1 context is non-negative");
    Instance { name: "ne1".into(), game, context, k: None, o: None }
}

/// Three players, nine resources, restricted but non-symmetric context; no pure NE.
pub fn gen_ne2() -> Instance {
    gen_ne2_with_alpha(&[10, 1, 4, 392, 98, 384, 294, 1052, 160].map(Rational::from))
}

/// The ne2 game with replaced latency slopes (used by sensitivity controls).
pub fn gen_ne2_with_alpha(alpha: &[Rational]) -> Instance {
    let strat = strategies(&[&[&[3], &[1, 2]], &[&[3, 6, 7], &[2, 4, 5]], &[&[3, 4, 7, 9], &[5, 8]]]);
    let lat = alpha.iter().cloned().map(Latency::linear).collect();
    let game = Game::new(lat, strat).expect("ne2 is well formed");
    let one = || rat(1, 1);
    let context = SocialContext::new(vec![
        vec![one(), one(), one()],
        vec![rat(0, 1), one(), one()],
        vec![one(), rat(0, 1), one()],
    ])
    .expect("ne2 context is non-negative");
    Instance { name: "ne2".into(), game, context, k: None, o: None }
}

/// Node counts per level of the tree with `2h + 1` levels.
pub fn tree_level_sizes(h: u32) -> Vec<usize> {
    let mut sizes = vec![1usize];
    for level in 0..2 * h {
        let children = if level < h { 3 } else { 2 };
        sizes.push(sizes[level as usize] * children);
    }
    sizes
}

/// Latency slope of every node at `level`.
pub fn tree_alpha(h: u32, level: u32) -> Rational {
    let (r37, r25) = (rat(3, 7), rat(2, 5));
    if level < h {
        r37.pow(level)
    } else if level < 2 * h {
        rat(3, 5) * r37.pow(h - 1) * r25.pow(level - h)
    } else {
        rat(6, 5) * rat(6, 35).pow(h - 1)
    }
}

/// Load-balancing game on the ternary-then-binary tree. Players are the tree
/// edges (indexed by child node in breadth-first order, minus one); strategy 1
/// is the parent node, strategy 2 the child node. `K` puts everyone on the
/// parent side, `O` on the child side.
pub fn gen_tree_lb(h: u32) -> Result<Instance, InstanceError> {
    if h == 0 {
        return Err(InstanceError::ZeroHeight);
    }
    let sizes = tree_level_sizes(h);
    let nodes: usize = sizes.iter().sum();
    if nodes > TREE_NODE_BUDGET {
        return Err(InstanceError::TreeTooLarge { h, nodes, budget: TREE_NODE_BUDGET });
    }
    let mut level_of = Vec::with_capacity(nodes);
    for (level, &size) in sizes.iter().enumerate() {
        level_of.extend(std::iter::repeat_n(level as u32, size));
    }
    // Breadth-first: the children of node u are contiguous.
    let mut parent = vec![usize::MAX; nodes];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut next = 1;
    for u in 0..nodes {
        let k = match level_of[u] {
            l if l < h => 3,
            l if l < 2 * h => 2,
            _ => 0,
        };
        for _ in 0..k {
            parent[next] = u;
            children[u].push(next);
            next += 1;
        }
    }
    let latencies = level_of.iter().map(|&l| Latency::linear(tree_alpha(h, l))).collect();
    let players = nodes - 1;
    let strat: Vec<Vec<Strategy>> = (1..nodes)
        .map(|v| vec![Strategy::new(vec![parent[v]]), Strategy::new(vec![v])])
        .collect();
    let game = Game::new(latencies, strat).expect("tree game is well formed");

    let mut rows = vec![vec![Rational::zero(); players]; players];
    for v in 1..nodes {
        let j = v - 1;
        rows[j][j] = Rational::one();
        let u = parent[v];
        if u != 0 {
            rows[j][u - 1] = Rational::one();
        }
        for &w in &children[v] {
            rows[j][w - 1] = Rational::one();
        }
    }
    let context = SocialContext::new(rows).expect("boolean context");
    Ok(Instance {
        name: format!("tree_lb(h={h})"),
        game,
        context,
        k: Some(Profile::uniform(players, 0)),
        o: Some(Profile::uniform(players, 1)),
    })
}

/// `SUM(O)` of the tree family in closed form: `27/2 (9/7)^(h-1) - 9/2`.
pub fn tree_sum_o_closed(h: u32) -> Rational {
    rat(27, 2) * rat(9, 7).pow(h - 1) - rat(9, 2)
}

/// `SUM(K)` of the tree family by geometric summation of the per-level terms.
pub fn tree_sum_k_closed(h: u32) -> Rational {
    rat(153, 2) * rat(9, 7).pow(h - 1) - rat(144, 5) * rat(36, 35).pow(h - 1) - rat(63, 2)
}

/// The closed form for `SUM(K)` as printed alongside the construction, whose
/// middle coefficient is `-36/5`. Kept for comparison reports only.
pub fn tree_sum_k_printed(h: u32) -> Rational {
    rat(153, 2) * rat(9, 7).pow(h - 1) - rat(36, 5) * rat(36, 35).pow(h - 1) - rat(63, 2)
}

fn check_groups(n1: usize, n2: usize, min_n1: usize, delta: &Rational) -> Result<(), InstanceError> {
    if n1 < min_n1 || n2 < 1 {
        return Err(InstanceError::GroupSize { min_n1 });
    }
    if !delta.is_positive() {
        return Err(InstanceError::NonPositiveDelta);
    }
    Ok(())
}

/// Three-group price-of-stability family. Players: `P` (`0..n1`), `P'`
/// (`n1..2n1`), `P''` (the last `n2`). Resources: `A_i`, `B_i`, `C_ij`,
/// `D_ij`, `E`, `F` in that order. Strategy 1 is the `k` side, strategy 2 the `o` side.
pub fn gen_pos_lb(n1: usize, n2: usize, delta: &Rational) -> Result<Instance, InstanceError> {
    check_groups(n1, n2, 1, delta)?;
    let a = |i: usize| i;
    let b = |i: usize| n1 + i;
    let c = |i: usize, j: usize| 2 * n1 + i * n1 + j;
    let d = |i: usize, j: usize| 2 * n1 + n1 * n1 + i * n1 + j;
    let e = 2 * n1 + 2 * n1 * n1;
    let f = e + 1;

    let heavy = Latency::new(Rational::from((n1 + 2 * n2) as i64), delta.clone());
    let mut latencies = vec![heavy; 2 * n1];
    latencies.extend(std::iter::repeat_n(Latency::linear(rat(1, 2)), 2 * n1 * n1));
    latencies.extend([Latency::linear(rat(2, 1)), Latency::linear(rat(2, 1))]);

    let mut strat = Vec::with_capacity(2 * n1 + n2);
    for i in 0..n1 {
        let k: Vec<usize> = (0..n1).map(|j| c(i, j)).chain([e]).collect();
        let o: Vec<usize> = [a(i)].into_iter().chain((0..n1).map(|j| d(j, i))).collect();
        strat.push(vec![Strategy::new(k), Strategy::new(o)]);
    }
    for i in 0..n1 {
        let k: Vec<usize> = (0..n1).map(|j| d(i, j)).chain([f]).collect();
        let o: Vec<usize> = [b(i)].into_iter().chain((0..n1).map(|j| c(j, i))).collect();
        strat.push(vec![Strategy::new(k), Strategy::new(o)]);
    }
    for _ in 0..n2 {
        strat.push(vec![Strategy::new(vec![e, f])]);
    }
    let game = Game::new(latencies, strat).expect("pos_lb is well formed");

    let n = 2 * n1 + n2;
    let group = |i: usize| if i < n1 { 0 } else if i < 2 * n1 { 1 } else { 2 };
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let linked = i == j || matches!((group(i), group(j)), (0, 1) | (1, 0));
                    if linked {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let context = SocialContext::new(rows).expect("boolean context");
    let k = Profile::uniform(n, 0);
    let o = Profile::new((0..n).map(|i| usize::from(i < 2 * n1)).collect());
    Ok(Instance { name: format!("pos_lb(n1={n1},n2={n2},delta={delta})"), game, context, k: Some(k), o: Some(o) })
}

/// `SUM(K)/SUM(O)` of the three-group family in closed form.
pub fn pos_lb_ratio(n1: usize, n2: usize, delta: &Rational) -> Rational {
    let (a, b) = (Rational::from(n1 as i64), Rational::from(n2 as i64));
    let four = Rational::from(4);
    let num = &a * &a + &four * (&a + &b).pow(2);
    let den = Rational::from(2) * &a * (&a + Rational::from(2) * &b + delta) + &a * &a + four * &b * &b;
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `v ∈ [0, 1/2]`.
    Low,
    /// `v ∈ [1/2, 1)`.
    High,
}

impl Branch {
    pub fn for_v(v: &Rational) -> Self {
        if *v <= rat(1, 2) {
            Branch::Low
        } else {
            Branch::High
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Low => "low",
            Branch::High => "high",
        }
    }

    fn check(self, v: &Rational) -> Result<(), InstanceError> {
        let ok = match self {
            Branch::Low => !v.is_negative() && *v <= rat(1, 2),
            Branch::High => *v >= rat(1, 2) && *v < rat(1, 1),
        };
        if ok {
            Ok(())
        } else {
            let range = if self == Branch::Low { "[0, 1/2]" } else { "[1/2, 1)" };
            Err(InstanceError::BranchRange { v: v.clone(), branch: self.name(), range })
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(Branch::Low),
            "high" => Ok(Branch::High),
            other => Err(format!("unknown branch '{other}' (expected low or high)")),
        }
    }
}

/// Slope `(n1 + 2 n2 + 1 - 2v) / (2 (1 - v))` of the `A` resources.
pub fn gamma_v_a_slope(v: &Rational, n1: usize, n2: usize) -> Rational {
    let top = Rational::from((n1 + 2 * n2 + 1) as i64) - Rational::from(2) * v;
    top / (Rational::from(2) * (Rational::one() - v))
}

/// Two-group family under uniform `Γ_V`. Players: `P` (`0..n1`, two strategies)
/// then `P'` (`n2` players, one strategy). Resources: `A_i`, `B_ij` (`i ≠ j`,
/// row-major), `C`.
pub fn gen_gamma_v_pos_lb(
    v: &Rational,
    n1: usize,
    n2: usize,
    delta: &Rational,
    branch: Branch,
) -> Result<Instance, InstanceError> {
    check_groups(n1, n2, 2, delta)?;
    branch.check(v)?;
    let slope = gamma_v_a_slope(v, n1, n2);
    let a_lat = match branch {
        Branch::Low => Latency::new(slope, delta.clone()),
        Branch::High => {
            if *delta > slope {
                return Err(InstanceError::DeltaTooLarge { delta: delta.clone() });
            }
            Latency::new(slope, -delta)
        }
    };
    let pairs: Vec<(usize, usize)> =
        (0..n1).flat_map(|i| (0..n1).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let b_index = |i: usize, j: usize| n1 + pairs.iter().position(|&p| p == (i, j)).expect("i != j");
    let c = n1 + pairs.len();

    let mut latencies = vec![a_lat; n1];
    latencies.extend(std::iter::repeat_n(Latency::linear(rat(1, 2)), pairs.len()));
    latencies.push(Latency::linear(rat(1, 1)));

    let mut strat = Vec::with_capacity(n1 + n2);
    for i in 0..n1 {
        let b_k: Vec<usize> = (0..n1).filter(|&j| j != i).map(|j| b_index(i, j)).collect();
        let b_o: Vec<usize> = (0..n1).filter(|&j| j != i).map(|j| b_index(j, i)).collect();
        let (mut k, mut o) = (b_k, b_o);
        match branch {
            Branch::Low => {
                o.push(i);
                k.push(c);
            }
            Branch::High => {
                k.push(i);
                o.push(c);
            }
        }
        strat.push(vec![Strategy::new(k), Strategy::new(o)]);
    }
    for _ in 0..n2 {
        strat.push(vec![Strategy::new(vec![c])]);
    }
    let game = Game::new(latencies, strat).expect("gamma_v pos_lb is well formed");
    let n = n1 + n2;
    let context = SocialContext::gamma_v(&AltruismVector::uniform(n, v.clone()).expect("v checked"));
    let k = Profile::uniform(n, 0);
    let o = Profile::new((0..n).map(|i| usize::from(i < n1)).collect());
    Ok(Instance {
        name: format!("gammav_pos_lb_{}(v={v},n1={n1},n2={n2},delta={delta})", branch.name()),
        game,
        context,
        k: Some(k),
        o: Some(o),
    })
}

/// `SUM(K)/SUM(O)` of the two-group family in closed form.
pub fn gamma_v_pos_lb_ratio(v: &Rational, n1: usize, n2: usize, delta: &Rational, branch: Branch) -> Rational {
    let (a, b) = (Rational::from(n1 as i64), Rational::from(n2 as i64));
    let slope = gamma_v_a_slope(v, n1, n2);
    let pairs = &a * (&a - Rational::one()) / Rational::from(2);
    let crowded = &pairs + (&a + &b).pow(2);
    match branch {
        Branch::Low => crowded / ((slope + delta) * &a + &pairs + &b * &b),
        Branch::High => ((slope - delta) * &a + &pairs + &b * &b) / crowded,
    }
}

fn nearest_sqrt(n: u128) -> u128 {
    let r = n.sqrt();
    if n - r * r > r {
        r + 1
    } else {
        r
    }
}

/// Integer closest to `2(1+√2)·n2`, the group ratio of the three-group family.
pub fn suggest_n1_pos_lb(n2: usize) -> usize {
    let n2 = n2 as u128;
    (2 * n2 + nearest_sqrt(8 * n2 * n2)) as usize
}

/// Integer closest to `(1+√3)·n2`, the group ratio of the two-group family.
pub fn suggest_n1_gamma_v(n2: usize) -> usize {
    let n2 = n2 as u128;
    (n2 + nearest_sqrt(3 * n2 * n2)) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextKind {
    Identity,
    /// Unit diagonal, symmetric, off-diagonal entries in `[0, 1]`.
    RestrictedSymmetric,
    /// Positive diagonal, each row bounded by its diagonal, not necessarily symmetric.
    RestrictedAny,
    /// `Γ_V` with independent random levels.
    GammaV,
    /// Any non-negative entries (diagonal may vanish).
    ArbitraryNonneg,
}

impl std::str::FromStr for ContextKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Self::Identity),
            "restricted_symmetric" | "restricted-symmetric" => Ok(Self::RestrictedSymmetric),
            "restricted_any" | "restricted-any" => Ok(Self::RestrictedAny),
            "gamma_v" | "gammav" | "gamma-v" => Ok(Self::GammaV),
            "arbitrary_nonneg" | "arbitrary" => Ok(Self::ArbitraryNonneg),
            other => Err(format!("unknown context kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub seed: u64,
    pub players: usize,
    pub max_strategies: usize,
    pub resources: usize,
    /// Numerators and denominators of generated coefficients stay within this bound.
    pub coeff_bound: i64,
    pub ctx_kind: ContextKind,
    /// Draw non-zero `β` offsets as well as slopes.
    pub with_beta: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            players: 3,
            max_strategies: 3,
            resources: 6,
            coeff_bound: 10,
            ctx_kind: ContextKind::RestrictedSymmetric,
            with_beta: false,
        }
    }
}

/// A rational in `[0, 1]` with denominator at most `bound`.
fn unit_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    let q = rng.gen_range(1..=bound.max(1));
    rat(rng.gen_range(0..=q), q)
}

fn coefficient(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    let q = rng.gen_range(1..=bound.max(1));
    rat(rng.gen_range(0..=bound), q)
}

#[allow(clippy::needless_range_loop)]
fn random_context(rng: &mut ChaCha8Rng, n: usize, kind: ContextKind, bound: i64) -> SocialContext {
    let mut rows = vec![vec![Rational::zero(); n]; n];
    match kind {
        ContextKind::Identity => return SocialContext::identity(n),
        ContextKind::RestrictedSymmetric => {
            for i in 0..n {
                rows[i][i] = Rational::one();
                for j in i + 1..n {
                    let x = unit_rational(rng, bound);
                    rows[i][j] = x.clone();
                    rows[j][i] = x;
                }
            }
        }
        ContextKind::RestrictedAny => {
            for (i, row) in rows.iter_mut().enumerate() {
                let q = rng.gen_range(1..=bound.max(1));
                let diag = rat(rng.gen_range(1..=bound.max(1)), q);
                for (j, x) in row.iter_mut().enumerate() {
                    *x = if i == j { diag.clone() } else { &diag * unit_rational(rng, bound) };
                }
            }
        }
        ContextKind::GammaV => {
            let v = (0..n).map(|_| unit_rational(rng, bound)).collect();
            return SocialContext::gamma_v(&AltruismVector::new(v).expect("unit rationals"));
        }
        ContextKind::ArbitraryNonneg => {
            for row in rows.iter_mut() {
                for x in row.iter_mut() {
                    *x = coefficient(rng, bound);
                }
            }
        }
    }
    SocialContext::new(rows).expect("non-negative by construction")
}

/// Deterministic random game and context.
pub fn gen_random(spec: &RandomSpec) -> Instance {
    try_gen_random(spec).expect("valid random spec")
}

pub fn try_gen_random(spec: &RandomSpec) -> Result<Instance, InstanceError> {
    if spec.players == 0 || spec.max_strategies == 0 || spec.resources == 0 || spec.coeff_bound <= 0 {
        return Err(InstanceError::BadBounds);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let m = spec.resources;
    let latencies = (0..m)
        .map(|_| {
            let alpha = coefficient(&mut rng, spec.coeff_bound);
            let beta = if spec.with_beta { coefficient(&mut rng, spec.coeff_bound) } else { Rational::zero() };
            Latency::new(alpha, beta)
        })
        .collect();
    let strat = (0..spec.players)
        .map(|_| {
            let count = rng.gen_range(1..=spec.max_strategies);
            (0..count)
                .map(|_| {
                    let mut set: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.4)).collect();
                    if set.is_empty() {
                        set.push(rng.gen_range(0..m));
                    }
                    Strategy::new(set)
                })
                .collect()
        })
        .collect();
    let game = Game::with_min_players(latencies, strat, 1).expect("random game is well formed");
    let context = random_context(&mut rng, spec.players, spec.ctx_kind, spec.coeff_bound);
    Ok(Instance { name: format!("random(seed={})", spec.seed), game, context, k: None, o: None })
}

/// A named family with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSpec {
    Ne1,
    Ne2,
    TreeLb { h: u32 },
    PosLb { n1: usize, n2: usize, delta: Rational },
    GammaVPosLb { v: Rational, n1: usize, n2: usize, delta: Rational, branch: Branch },
    Random(RandomSpec),
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance, InstanceError> {
    match spec {
        InstanceSpec::Ne1 => Ok(gen_ne1()),
        InstanceSpec::Ne2 => Ok(gen_ne2()),
        InstanceSpec::TreeLb { h } => gen_tree_lb(*h),
        InstanceSpec::PosLb { n1, n2, delta } => gen_pos_lb(*n1, *n2, delta),
        InstanceSpec::GammaVPosLb { v, n1, n2, delta, branch } => gen_gamma_v_pos_lb(v, *n1, *n2, delta, *branch),
        InstanceSpec::Random(r) => try_gen_random(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{enumerate_nash, is_pure_nash, DEFAULT_BUDGET};
    use crate::game::{congestion, social_cost};

    #[test]
    fn tree_sizes_and_sums() {
        assert_eq!(tree_level_sizes(1), vec![1, 3, 6]);
        assert_eq!(tree_level_sizes(3).iter().sum::<usize>(), 418);
        for h in 1..=3 {
            let inst = gen_tree_lb(h).unwrap();
            let k = social_cost(&inst.game, inst.k.as_ref().unwrap()).unwrap();
            let o = social_cost(&inst.game, inst.o.as_ref().unwrap()).unwrap();
            assert_eq!(o, tree_sum_o_closed(h), "h={h}");
            assert_eq!(k, tree_sum_k_closed(h), "h={h}");
            assert!(inst.context.is_symmetric());
        }
        assert_eq!(tree_sum_k_closed(1), rat(81, 5));
        assert_ne!(tree_sum_k_printed(1), rat(81, 5));
        assert!(matches!(gen_tree_lb(5), Err(InstanceError::TreeTooLarge { .. })));
    }

    #[test]
    fn pos_lb_shape() {
        let d = default_delta();
        let inst = gen_pos_lb(2, 1, &d).unwrap();
        assert_eq!(inst.game.resources(), 2 * (4 + 2 + 1));
        let f = inst.context.classify();
        assert!(f.restricted && f.symmetric && f.unit_diagonal);
        let k = social_cost(&inst.game, inst.k.as_ref().unwrap()).unwrap();
        let o = social_cost(&inst.game, inst.o.as_ref().unwrap()).unwrap();
        assert_eq!(&k / &o, rat(40, 1) / (rat(24, 1) + rat(4, 1) * &d));
        assert_eq!(&k / &o, pos_lb_ratio(2, 1, &d));
        // K is an equilibrium, but so is O: moving o -> k raises the cost of
        // every P' player on the shared C resources by more than it saves.
        let ne = enumerate_nash(&inst.game, &inst.context, DEFAULT_BUDGET).unwrap();
        assert!(ne.contains(inst.k.as_ref().unwrap()));
        assert!(ne.contains(inst.o.as_ref().unwrap()));
    }

    #[test]
    fn pos_lb_congestion_bounds() {
        let inst = gen_pos_lb(2, 2, &default_delta()).unwrap();
        for s in crate::equilibria::ProfileSpace::new(&inst.game).iter() {
            let c = congestion(&inst.game, &s).unwrap();
            for e in 4..12 {
                assert!(c.get(e) <= 2);
            }
        }
    }

    #[test]
    fn gamma_v_family() {
        let d = default_delta();
        for (v, branch) in [(rat(0, 1), Branch::Low), (rat(1, 4), Branch::Low), (rat(3, 4), Branch::High)] {
            let inst = gen_gamma_v_pos_lb(&v, 2, 1, &d, branch).unwrap();
            let flags = inst.context.classify();
            let vv = flags.gamma_v.unwrap();
            assert!(vv.is_uniform() && *vv.get(0) == v);
            assert_eq!(inst.game.resources(), 5);
            let k = social_cost(&inst.game, inst.k.as_ref().unwrap()).unwrap();
            let o = social_cost(&inst.game, inst.o.as_ref().unwrap()).unwrap();
            assert_eq!(&k / &o, gamma_v_pos_lb_ratio(&v, 2, 1, &d, branch));
            assert!(is_pure_nash(&inst.game, &inst.context, inst.k.as_ref().unwrap()).unwrap());
        }
        assert!(gen_gamma_v_pos_lb(&rat(3, 4), 2, 1, &d, Branch::Low).is_err());
        assert!(gen_gamma_v_pos_lb(&rat(1, 1), 2, 1, &d, Branch::High).is_err());
    }

    #[test]
    fn suggestions() {
        assert_eq!(suggest_n1_pos_lb(1), 5);
        assert_eq!(suggest_n1_pos_lb(10), 48);
        assert_eq!(suggest_n1_gamma_v(1), 3);
        assert_eq!(suggest_n1_gamma_v(10), 27);
    }

    #[test]
    fn random_is_deterministic() {
        let spec = RandomSpec { seed: 42, with_beta: true, ..Default::default() };
        assert_eq!(gen_random(&spec), gen_random(&spec));
        for kind in [ContextKind::RestrictedSymmetric, ContextKind::RestrictedAny, ContextKind::GammaV] {
            for seed in 0..20 {
                let inst = gen_random(&RandomSpec { seed, ctx_kind: kind, ..Default::default() });
                let f = inst.context.classify();
                match kind {
                    ContextKind::RestrictedSymmetric => assert!(f.restricted && f.symmetric && f.unit_diagonal),
                    ContextKind::RestrictedAny => assert!(f.restricted),
                    _ => assert!(f.gamma_v.is_some()),
                }
            }
        }
    }
}
