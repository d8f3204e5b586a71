//! The one-shot verification suite: reproduces the published tables, runs the
//! potential sweeps, checks the lower-bound constructions by enumeration and
//! the closed-form certificates on an integer lattice.

use std::fmt;
use std::time::{Duration, Instant};

use crate::certificates::{
    check_dual_feasible, check_gamma_v_poa_certificate, check_gamma_v_pos_certificate, check_poa_grid_17_3,
    default_poa_lattice, default_pos_levels, gamma_v_poa_certificate, gamma_v_pos_certificate, poa_17_3_certificate,
    Perturbation,
};
use crate::context::SocialContext;
use crate::equilibria::{
    best_response_dynamics, enumerate_nash, is_pure_nash, ratios, DynamicsKind, Policy, RatioOutcome, DEFAULT_BUDGET,
};
use crate::game::{altruistic_costs, social_cost, Game, Occupancy, Profile};
use crate::instances::{
    default_delta, gamma_v_pos_lb_ratio, gen_gamma_v_pos_lb, gen_ne1, gen_ne2, gen_ne2_with_alpha, gen_pos_lb,
    gen_tree_lb, pos_lb_ratio, try_gen_random, tree_sum_k_closed, tree_sum_k_printed, tree_sum_o_closed, Branch,
    ContextKind, Instance, RandomSpec,
};
use crate::lp::{build_dual, build_gamma_v_poa_dual, build_gamma_v_pos_dual};
use crate::numerics::{qeval, rat, QuadExt, Rational};
use crate::potential::{check_exact_potential, PotentialKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// A published claim that does not hold; reported but not counted as a failure.
    Discrepancy,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Discrepancy => "DISCREPANCY",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub status: Status,
    pub item: String,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckLine {
    fn new(ok: bool, item: &str, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { status, item: item.into(), detail, elapsed: Duration::ZERO }
    }

    fn discrepancy(item: &str, detail: String) -> Self {
        Self { status: Status::Discrepancy, item: item.into(), detail, elapsed: Duration::ZERO }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub kmax: i64,
    pub omax: i64,
    /// Replacement ne2 latency slopes.
    pub ne2_alpha: Option<Vec<Rational>>,
    pub perturbation: Option<Perturbation>,
    /// Instances per random potential sweep.
    pub sweep: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { kmax: 100, omax: 100, ne2_alpha: None, perturbation: None, sweep: 100 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    /// No line failed. Discrepancies do not count.
    pub fn passed(&self) -> bool {
        self.lines.iter().all(CheckLine::passed)
    }

    pub fn render(&self, timings: bool) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&format!("{:<11} {:<22} {}", l.status, l.item, l.detail));
            if timings {
                out.push_str(&format!(" [{:.3}s]", l.elapsed.as_secs_f64()));
            }
            out.push('\n');
        }
        let failed = self.lines.iter().filter(|l| l.status == Status::Fail).count();
        out.push_str(&format!("{} checks, {} failed\n", self.lines.len(), failed));
        out
    }
}

fn timed(f: impl FnOnce() -> Vec<CheckLine>) -> Vec<CheckLine> {
    let t = Instant::now();
    let mut lines = f();
    let elapsed = t.elapsed();
    for l in &mut lines {
        l.elapsed = elapsed;
    }
    lines
}

pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let p = cfg.perturbation.as_ref();
    let mut lines = Vec::new();
    lines.extend(timed(|| vec![check_ne2_table(cfg.ne2_alpha.as_deref())]));
    lines.extend(timed(|| vec![check_ne1_table()]));
    lines.extend(timed(|| vec![check_potential_sweep(PotentialKind::RestrictedSymmetric, cfg.sweep)]));
    lines.extend(timed(|| vec![check_potential_sweep(PotentialKind::GammaV, cfg.sweep)]));
    lines.extend(timed(check_tree));
    lines.extend(timed(check_pos_lb));
    lines.extend(timed(|| vec![check_gamma_v_pos_lb()]));
    lines.extend(timed(|| vec![check_poa_17_3(cfg.kmax, cfg.omax, p)]));
    lines.extend(timed(|| vec![check_gamma_v_pos(cfg.kmax, cfg.omax, p)]));
    lines.extend(timed(|| vec![check_gamma_v_poa(cfg.kmax, cfg.omax, p)]));
    VerifyReport { lines }
}

#[derive(Debug, Clone, Copy)]
enum Expect {
    Eq(i64),
    Gt(i64, i64),
    Lt(i64, i64),
}

impl Expect {
    fn holds(self, x: &Rational) -> bool {
        match self {
            Expect::Eq(v) => *x == Rational::from(v),
            Expect::Gt(n, d) => *x > rat(n, d),
            Expect::Lt(n, d) => *x < rat(n, d),
        }
    }

    fn describe(self) -> String {
        match self {
            Expect::Eq(v) => format!("= {v}"),
            Expect::Gt(n, d) => format!("> {}", rat(n, d).to_decimal(2)),
            Expect::Lt(n, d) => format!("< {}", rat(n, d).to_decimal(2)),
        }
    }
}

/// `(profile, [(player, expectation)], mover, next profile)`, 1-based.
type TableRow = (&'static str, &'static [(usize, Expect)], usize, &'static str);

const NE2_TABLE: &[TableRow] = &[
    ("1,1,1", &[(1, Expect::Eq(2148))], 1, "2,1,1"),
    ("2,1,1", &[(1, Expect::Eq(2139)), (2, Expect::Eq(2128)), (3, Expect::Eq(1159))], 2, "2,2,1"),
    ("2,2,1", &[(1, Expect::Eq(2138)), (2, Expect::Eq(2126))], 1, "1,2,1"),
    ("1,2,1", &[(1, Expect::Eq(2137)), (3, Expect::Eq(1254))], 3, "1,2,2"),
    ("1,2,2", &[(2, Expect::Eq(1837)), (3, Expect::Eq(1252))], 2, "1,1,2"),
    ("1,1,2", &[(1, Expect::Eq(1844)), (2, Expect::Eq(1836))], 1, "2,1,2"),
    ("2,1,2", &[(1, Expect::Eq(1843)), (2, Expect::Eq(1832)), (3, Expect::Eq(1161))], 3, "2,1,1"),
    ("2,2,2", &[(2, Expect::Eq(1838))], 2, "2,1,2"),
];

const NE1_TABLE: &[TableRow] = &[
    ("1,1,1", &[(1, Expect::Gt(260, 1))], 1, "2,1,1"),
    ("2,1,1", &[(1, Expect::Lt(243, 1)), (2, Expect::Gt(146, 1)), (3, Expect::Lt(139887, 100))], 2, "2,2,1"),
    ("2,2,1", &[(1, Expect::Gt(18682, 100)), (2, Expect::Lt(146, 1))], 1, "1,2,1"),
    ("1,2,1", &[(1, Expect::Lt(18682, 100)), (3, Expect::Gt(1381, 1))], 3, "1,2,2"),
    ("1,2,2", &[(2, Expect::Gt(15066, 100)), (3, Expect::Lt(1381, 1))], 2, "1,1,2"),
    ("1,1,2", &[(1, Expect::Gt(244, 1)), (2, Expect::Lt(15065, 100))], 1, "2,1,2"),
    ("2,1,2", &[(1, Expect::Lt(239, 1)), (2, Expect::Lt(151, 1)), (3, Expect::Gt(139888, 100))], 3, "2,1,1"),
    ("2,2,2", &[(2, Expect::Gt(151, 1))], 2, "2,1,2"),
];

/// The improvement cycle listed in both tables.
const TABLE_CYCLE: &[&str] = &["2,1,1", "2,2,1", "1,2,1", "1,2,2", "1,1,2", "2,1,2", "2,1,1"];

fn profile(s: &str) -> Profile {
    Profile::parse_one_based(s).expect("table profile")
}

/// Check every table entry and migration. Returns the first mismatch.
fn check_table(inst: &Instance, table: &[TableRow]) -> Result<usize, String> {
    let mut entries = 0;
    for &(s, expects, mover, next) in table {
        let s = profile(s);
        let costs = altruistic_costs(&inst.game, &inst.context, &s).map_err(|e| e.to_string())?;
        for &(player, expect) in expects {
            entries += 1;
            if !expect.holds(&costs[player - 1]) {
                return Err(format!("c{player}{s} = {} expected {}", costs[player - 1], expect.describe()));
            }
        }
        let next = profile(next);
        let t = next.choice(mover - 1);
        if s.deviate(mover - 1, t) != next {
            return Err(format!("table migration {s} -> {next} is not a move of player {mover}"));
        }
        let occ = Occupancy::new(&inst.game, &s).map_err(|e| e.to_string())?;
        let delta = occ.deviation_delta(&inst.game, &inst.context, mover - 1, t);
        if !delta.is_positive() {
            return Err(format!("player {mover} moving {s} -> {next} changes cost by {}", -delta));
        }
    }
    Ok(entries)
}

fn check_cycle_and_ne(inst: &Instance) -> Result<String, String> {
    let out = best_response_dynamics(&inst.game, &inst.context, &profile("1,1,1"), Policy::FirstImprover, 1000)
        .map_err(|e| e.to_string())?;
    let expected: Vec<Profile> = TABLE_CYCLE.iter().map(|s| profile(s)).collect();
    if out.kind != DynamicsKind::Cycle || out.cycle() != Some(&expected[..]) {
        let got: Vec<String> = out.profiles.iter().map(Profile::to_string).collect();
        return Err(format!("first-improver trajectory {}", got.join(" -> ")));
    }
    let ne = enumerate_nash(&inst.game, &inst.context, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    if !ne.is_empty() {
        return Err(format!("found pure NE {}", ne[0]));
    }
    Ok(format!("cycle of length {}, no pure NE among 8 profiles", expected.len() - 1))
}

fn table_line(item: &str, inst: &Instance, table: &[TableRow]) -> CheckLine {
    let result = check_table(inst, table).and_then(|n| check_cycle_and_ne(inst).map(|c| format!("{n} entries reproduced; {c}")));
    match result {
        Ok(detail) => CheckLine::new(true, item, detail),
        Err(detail) => CheckLine::new(false, item, detail),
    }
}

/// Reproduce the ne2 cost table exactly (optionally with replaced slopes).
pub fn check_ne2_table(alpha: Option<&[Rational]>) -> CheckLine {
    let inst = match alpha {
        Some(a) if a.len() != 9 => {
            return CheckLine::new(false, "ne2-table", format!("expected 9 slopes, got {}", a.len()));
        }
        Some(a) => gen_ne2_with_alpha(a),
        None => gen_ne2(),
    };
    table_line("ne2-table", &inst, NE2_TABLE)
}

/// Verify every strict inequality of the ne1 table exactly.
pub fn check_ne1_table() -> CheckLine {
    table_line("ne1-table", &gen_ne1(), NE1_TABLE)
}

/// Random specification used by the potential and ratio sweeps.
pub fn sweep_spec(seed: u64, kind: ContextKind) -> RandomSpec {
    RandomSpec {
        seed,
        players: 2 + (seed % 3) as usize,
        max_strategies: 3,
        resources: 3 + (seed % 6) as usize,
        coeff_bound: 10,
        ctx_kind: kind,
        with_beta: seed % 2 == 1,
    }
}

/// Exactness of the potential on `count` seeded random instances.
pub fn check_potential_sweep(kind: PotentialKind, count: u64) -> CheckLine {
    let (item, ctx_kind) = match kind {
        PotentialKind::GammaV => ("potential-gammav", ContextKind::GammaV),
        _ => ("potential-restricted", ContextKind::RestrictedSymmetric),
    };
    let mut deviations = 0u64;
    for seed in 0..count {
        let inst = try_gen_random(&sweep_spec(seed, ctx_kind)).expect("sweep spec is valid");
        match check_exact_potential(&inst.game, &inst.context, kind, DEFAULT_BUDGET) {
            Ok(rep) => {
                deviations += rep.deviations_checked;
                if let Some(w) = rep.witness {
                    return CheckLine::new(false, item, format!("seed {seed}: {w}"));
                }
            }
            Err(e) => return CheckLine::new(false, item, format!("seed {seed}: {e}")),
        }
    }
    CheckLine::new(true, item, format!("{count} instances, {deviations} deviations, dPhi = dcost exactly"))
}

/// Tree construction for `h ∈ {1, 2, 3}`.
pub fn check_tree() -> Vec<CheckLine> {
    let mut details = Vec::new();
    let mut printed_mismatch = Vec::new();
    let mut last_ratio: Option<Rational> = None;
    for h in 1..=3u32 {
        let inst = match gen_tree_lb(h) {
            Ok(i) => i,
            Err(e) => return vec![CheckLine::new(false, "tree", format!("h={h}: {e}"))],
        };
        let (k, o) = (inst.k.clone().expect("tree K"), inst.o.clone().expect("tree O"));
        let occ = Occupancy::new(&inst.game, &k).expect("tree K is valid");
        for i in 0..inst.game.players() {
            for t in 0..inst.game.strategies(i).len() {
                let d = occ.deviation_delta(&inst.game, &inst.context, i, t);
                if !d.is_zero() {
                    return vec![CheckLine::new(false, "tree", format!("h={h}: player {} to {} has delta {d}", i + 1, t + 1))];
                }
            }
        }
        if !is_pure_nash(&inst.game, &inst.context, &k).unwrap_or(false) {
            return vec![CheckLine::new(false, "tree", format!("h={h}: K is not a pure NE"))];
        }
        let sum_k = social_cost(&inst.game, &k).expect("valid");
        let sum_o = social_cost(&inst.game, &o).expect("valid");
        if sum_o != tree_sum_o_closed(h) {
            return vec![CheckLine::new(false, "tree", format!("h={h}: SUM(O) = {sum_o}, closed form {}", tree_sum_o_closed(h)))];
        }
        if sum_k != tree_sum_k_closed(h) {
            return vec![CheckLine::new(false, "tree", format!("h={h}: SUM(K) = {sum_k}, closed form {}", tree_sum_k_closed(h)))];
        }
        if sum_k != tree_sum_k_printed(h) {
            printed_mismatch.push(format!("h={h}: direct {sum_k} vs {}", tree_sum_k_printed(h)));
        }
        let ratio = &sum_k / &sum_o;
        if ratio > rat(17, 3) || last_ratio.as_ref().is_some_and(|r| ratio <= *r) {
            return vec![CheckLine::new(false, "tree", format!("h={h}: ratio {ratio} not increasing or above 17/3"))];
        }
        let dual = build_dual(&inst.game, &inst.context, &k, &o).expect("valid");
        let cert = poa_17_3_certificate(None).for_players(inst.game.players());
        match check_dual_feasible(&dual, &cert) {
            Ok(c) if c.is_feasible() => {}
            Ok(c) => return vec![CheckLine::new(false, "tree", format!("h={h}: 17/3 dual certificate {c}"))],
            Err(e) => return vec![CheckLine::new(false, "tree", format!("h={h}: {e}"))],
        }
        details.push(format!("h={h} SUM(K)/SUM(O)={ratio} (~{})", ratio.to_decimal(4)));
        last_ratio = Some(ratio);
    }
    let mut lines = vec![CheckLine::new(true, "tree", format!("K is NE with zero deltas; {}", details.join(", ")))];
    if !printed_mismatch.is_empty() {
        lines.push(CheckLine::discrepancy(
            "tree-sum-k-closed-form",
            format!("printed SUM(K) closed form off by a constant: {}", printed_mismatch.join("; ")),
        ));
    }
    lines
}

/// The three-group stability construction at small sizes.
pub fn check_pos_lb() -> Vec<CheckLine> {
    let delta = default_delta();
    let mut details = Vec::new();
    let mut uniqueness = Vec::new();
    for (n1, n2) in [(2usize, 1usize), (3, 1)] {
        let inst = match gen_pos_lb(n1, n2, &delta) {
            Ok(i) => i,
            Err(e) => return vec![CheckLine::new(false, "pos-lb", e.to_string())],
        };
        let (k, o) = (inst.k.clone().expect("K"), inst.o.clone().expect("O"));
        let rep = match ratios(&inst.game, &inst.context, DEFAULT_BUDGET) {
            Ok(r) => r,
            Err(e) => return vec![CheckLine::new(false, "pos-lb", e.to_string())],
        };
        if !rep.ne_list.contains(&k) {
            return vec![CheckLine::new(false, "pos-lb", format!("({n1},{n2}): K is not a pure NE"))];
        }
        let ratio = social_cost(&inst.game, &k).expect("valid") / social_cost(&inst.game, &o).expect("valid");
        if ratio != pos_lb_ratio(n1, n2, &delta) {
            return vec![CheckLine::new(false, "pos-lb", format!("({n1},{n2}): SUM(K)/SUM(O) = {ratio}, formula {}", pos_lb_ratio(n1, n2, &delta)))];
        }
        if (n1, n2) == (2, 1) && ratio != rat(40, 1) / (rat(24, 1) + rat(4, 1) * &delta) {
            return vec![CheckLine::new(false, "pos-lb", format!("(2,1): ratio {ratio} differs from 40/(24+4delta)"))];
        }
        let dual = build_dual(&inst.game, &inst.context, &k, &o).expect("valid");
        if !check_dual_feasible(&dual, &poa_17_3_certificate(None).for_players(inst.game.players()))
            .is_ok_and(|c| c.is_feasible())
        {
            return vec![CheckLine::new(false, "pos-lb", format!("({n1},{n2}): 17/3 dual certificate infeasible"))];
        }
        details.push(format!("({n1},{n2}) SUM(K)/SUM(O)={ratio}"));
        if rep.ne_list.len() != 1 {
            let pos = match &rep.pos {
                RatioOutcome::Value(v) => v.to_string(),
                other => other.to_string(),
            };
            uniqueness.push(format!(
                "({n1},{n2}): {} NE, O {} an NE, enumerated PoS = {pos}",
                rep.ne_list.len(),
                if rep.ne_list.contains(&o) { "is" } else { "is not" }
            ));
        }
    }
    let mut lines = vec![CheckLine::new(true, "pos-lb", format!("K is NE; {}", details.join(", ")))];
    if !uniqueness.is_empty() {
        lines.push(CheckLine::discrepancy("pos-lb-uniqueness", format!("K is not the unique NE: {}", uniqueness.join("; "))));
    }
    lines
}

/// The two-group `Γ_V` stability construction: unique NE and formula agreement.
pub fn check_gamma_v_pos_lb() -> CheckLine {
    let delta = default_delta();
    let item = "gammav-pos-lb";
    let cases = [(rat(0, 1), Branch::Low), (rat(1, 4), Branch::Low), (rat(3, 4), Branch::High)];
    let mut checked = 0;
    for (v, branch) in &cases {
        for (n1, n2) in [(2usize, 1usize), (3, 1), (3, 2)] {
            let inst = match gen_gamma_v_pos_lb(v, n1, n2, &delta, *branch) {
                Ok(i) => i,
                Err(e) => return CheckLine::new(false, item, e.to_string()),
            };
            let (k, o) = (inst.k.clone().expect("K"), inst.o.clone().expect("O"));
            let rep = match ratios(&inst.game, &inst.context, DEFAULT_BUDGET) {
                Ok(r) => r,
                Err(e) => return CheckLine::new(false, item, e.to_string()),
            };
            let formula = gamma_v_pos_lb_ratio(v, n1, n2, &delta, *branch);
            if rep.ne_list != vec![k.clone()] || rep.pos != RatioOutcome::Value(formula.clone()) {
                return CheckLine::new(
                    false,
                    item,
                    format!("v={v} ({n1},{n2}): {} NE, PoS {} vs formula {formula}", rep.ne_list.len(), rep.pos),
                );
            }
            if let Err(msg) = gamma_v_duals(&inst, v, &k, &o) {
                return CheckLine::new(false, item, format!("v={v} ({n1},{n2}): {msg}"));
            }
            checked += 1;
        }
    }
    CheckLine::new(true, item, format!("{checked} instances: K unique NE, PoS equals the closed form, dual certificates feasible"))
}

fn gamma_v_duals(inst: &Instance, v: &Rational, k: &Profile, o: &Profile) -> Result<(), String> {
    let n = inst.game.players();
    let dual = build_gamma_v_pos_dual(&inst.game, v, k, o).map_err(|e| e.to_string())?;
    let cert = gamma_v_pos_certificate(v, None).map_err(|e| e.to_string())?.for_players(n);
    let c = check_dual_feasible(&dual, &cert).map_err(|e| e.to_string())?;
    if !c.is_feasible() {
        return Err(format!("stability certificate {c}"));
    }
    let branch = if *v <= rat(1, 2) { Branch::Low } else { Branch::High };
    let dual = build_gamma_v_poa_dual(&inst.game, v, v, k, o).map_err(|e| e.to_string())?;
    let cert = gamma_v_poa_certificate(v, v, branch, None).map_err(|e| e.to_string())?.for_players(n);
    let c = check_dual_feasible(&dual, &cert).map_err(|e| e.to_string())?;
    if !c.is_feasible() {
        return Err(format!("anarchy certificate {c}"));
    }
    Ok(())
}

fn grid_desc(kmax: i64, omax: i64) -> String {
    format!("[0,{kmax}]x[0,{omax}]")
}

/// `5K² − 5O(2K+1) + 17O² >= 3K²` on the lattice, with the `Δ` refinement.
pub fn check_poa_17_3(kmax: i64, omax: i64, p: Option<&Perturbation>) -> CheckLine {
    let item = "poa-17/3";
    let rep = match check_poa_grid_17_3(kmax, omax, p) {
        Ok(r) => r,
        Err(e) => return CheckLine::new(false, item, e.to_string()),
    };
    if let Some((k, o, d)) = rep.grid.counterexample {
        let d = d.map(|d| format!(", delta={d}")).unwrap_or_default();
        return CheckLine::new(false, item, format!("violated at K={k}, O={o}{d}"));
    }
    if !rep.identity {
        return CheckLine::new(false, item, format!("certificate (theta={}) does not reduce to the stated inequality", rep.theta));
    }
    let want_tight = kmax >= 3 && omax >= 1;
    if want_tight && !rep.grid.tight.contains(&(3, 1)) {
        return CheckLine::new(false, item, "not tight at (3,1)".into());
    }
    CheckLine::new(true, item, format!("{} cells on {}, tight at (3,1)", rep.grid.cells, grid_desc(kmax, omax)))
}

fn render_q(x: &QuadExt) -> String {
    format!("{x} (~{})", qeval(x, 40))
}

/// Stability certificates for the default levels.
pub fn check_gamma_v_pos(kmax: i64, omax: i64, p: Option<&Perturbation>) -> CheckLine {
    let item = "gammav-pos-cert";
    let mut cells = 0;
    for v in default_pos_levels() {
        let rep = match check_gamma_v_pos_certificate(&v, kmax, omax, p) {
            Ok(r) => r,
            Err(e) => return CheckLine::new(false, item, format!("v={v}: {e}")),
        };
        if !rep.passed() {
            return CheckLine::new(false, item, format!("{}: {}", rep.name, failure_reason(&rep)));
        }
        cells += rep.grid.cells;
    }
    let t0 = gamma_v_pos_certificate(&rat(0, 1), p).map(|c| c.theta);
    let t_half = gamma_v_pos_certificate(&rat(1, 2), p).map(|c| c.theta);
    let want0 = QuadExt::new(rat(1, 1), rat(1, 3), 3).expect("sqrt 3");
    match (t0, t_half) {
        (Ok(a), Ok(b)) if a == want0 && b == QuadExt::one() => CheckLine::new(
            true,
            item,
            format!("8 levels, {cells} cells on {}; theta(0)={}, theta(1/2)=1", grid_desc(kmax, omax), render_q(&a)),
        ),
        (a, b) => CheckLine::new(false, item, format!("theta(0)={a:?}, theta(1/2)={b:?}")),
    }
}

/// Anarchy certificates on the default `(v̄, v_)` lattice.
pub fn check_gamma_v_poa(kmax: i64, omax: i64, p: Option<&Perturbation>) -> CheckLine {
    let item = "gammav-poa-cert";
    let mut cells = 0;
    let lattice = default_poa_lattice();
    for (vbar, vund, branch) in &lattice {
        let rep = match check_gamma_v_poa_certificate(vbar, vund, kmax, omax, *branch, p) {
            Ok(r) => r,
            Err(e) => return CheckLine::new(false, item, format!("vbar={vbar} vund={vund}: {e}")),
        };
        if !rep.passed() {
            return CheckLine::new(false, item, format!("{}: {}", rep.name, failure_reason(&rep)));
        }
        cells += rep.grid.cells;
    }
    let theta = |vb: Rational, vu: Rational| gamma_v_poa_certificate(&vb, &vu, Branch::Low, p).map(|c| c.theta);
    match (theta(rat(0, 1), rat(0, 1)), theta(rat(1, 2), rat(1, 2))) {
        (Ok(a), Ok(b)) if a == QuadExt::from(rat(5, 2)) && b == QuadExt::from(rat(3, 1)) => CheckLine::new(
            true,
            item,
            format!("{} lattice points, {cells} cells on {}; theta(0,0)=5/2, theta(1/2,1/2)=3", lattice.len(), grid_desc(kmax, omax)),
        ),
        (a, b) => CheckLine::new(false, item, format!("theta(0,0)={a:?}, theta(1/2,1/2)={b:?}")),
    }
}

fn failure_reason(rep: &crate::certificates::CertificateReport) -> String {
    if let Some((k, o, _)) = rep.grid.counterexample {
        format!("violated at K={k}, O={o}")
    } else if !rep.identity {
        format!("theta={} does not match the closed-form identity", rep.theta)
    } else {
        "discriminant check failed".into()
    }
}

/// Social cost of every NE against the optimum on one random instance, for the
/// anarchy sweep: returns `3·max SUM(NE) <= 17·SUM(opt)`.
pub fn poa_sweep_instance(game: &Game, ctx: &SocialContext) -> Result<bool, String> {
    let norm = ctx.normalize().map_err(|e| e.to_string())?;
    let rep = ratios(game, &norm, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let bound = Rational::from(17) * &rep.opt_value;
    Ok(rep.ne_costs.iter().all(|c| Rational::from(3) * c <= bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::CertConstant;

    #[test]
    fn tables_pass() {
        let l = check_ne2_table(None);
        assert_eq!(l.status, Status::Pass, "{}", l.detail);
        let l = check_ne1_table();
        assert_eq!(l.status, Status::Pass, "{}", l.detail);
    }

    #[test]
    fn corrupted_slope_fails_table() {
        let mut a: Vec<Rational> = [10, 1, 4, 392, 98, 384, 294, 1052, 160].map(Rational::from).to_vec();
        a[7] = &a[7] + Rational::one();
        assert_eq!(check_ne2_table(Some(&a)).status, Status::Fail);
        assert_eq!(check_ne2_table(Some(&a[..3])).status, Status::Fail);
    }

    #[test]
    fn constructions() {
        let t = check_tree();
        assert_eq!(t[0].status, Status::Pass, "{}", t[0].detail);
        let p = check_pos_lb();
        assert_eq!(p[0].status, Status::Pass, "{}", p[0].detail);
        assert_eq!(p[1].status, Status::Discrepancy);
        let g = check_gamma_v_pos_lb();
        assert_eq!(g.status, Status::Pass, "{}", g.detail);
    }

    #[test]
    fn small_grid_suite() {
        let cfg = VerifyConfig { kmax: 5, omax: 5, sweep: 10, ..Default::default() };
        let rep = run_verify(&cfg);
        assert!(rep.passed(), "{}", rep.render(false));
        let bad = VerifyConfig {
            perturbation: Some(Perturbation { constant: CertConstant::Potential, amount: rat(1, 100) }),
            ..cfg
        };
        let rep = run_verify(&bad);
        assert!(!rep.passed());
        assert!(rep.render(false).contains("FAIL gammav-pos-cert"));
    }
}
