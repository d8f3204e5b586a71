//! Dense linear programs with exact coefficients, the primal/dual pairs
//! used to bound the inefficiency of a fixed `(K, O)` profile pair, and an
//! LP text writer/reader.

use std::fmt::Write as _;

use thiserror::Error;

use crate::context::SocialContext;
use crate::game::{Game, GameError, Occupancy, Profile};
use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("only maximization programs with <= / = rows and non-negative variables can be dualized")]
    NotDualizable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarBound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub name: String,
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub var_names: Vec<String>,
    pub bounds: Vec<VarBound>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            sense,
            objective: Vec::new(),
            var_names: Vec::new(),
            bounds: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, bound: VarBound, obj: Rational) -> usize {
        self.var_names.push(name.into());
        self.bounds.push(bound);
        self.objective.push(obj);
        for c in &mut self.constraints {
            c.coeffs.push(Rational::zero());
        }
        self.var_names.len() - 1
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width must match variable count");
        self.constraints.push(Constraint { name: name.into(), coeffs, relation, rhs });
    }

    /// Coefficient matrix, row per constraint.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        self.constraints.iter().map(|c| c.coeffs.clone()).collect()
    }

    /// Same sense, objective, bounds, relations, right-hand sides and
    /// coefficients; names are ignored.
    pub fn structurally_equal(&self, other: &Self) -> bool {
        self.sense == other.sense
            && self.objective == other.objective
            && self.bounds == other.bounds
            && self.constraints.len() == other.constraints.len()
            && self.constraints.iter().zip(&other.constraints).all(|(a, b)| {
                a.coeffs == b.coeffs && a.relation == b.relation && a.rhs == b.rhs
            })
    }

    /// Dual of `max c·x, A x (<=|=) b, x >= 0`: one variable per row (non-negative
    /// for `<=`, free for `=`), one `>=` row per primal variable.
    pub fn dual(&self) -> Result<Self, LpError> {
        if self.sense != Sense::Maximize || self.bounds.iter().any(|b| *b != VarBound::NonNegative) {
            return Err(LpError::NotDualizable);
        }
        let mut d = LinearProgram::new(format!("dual of {}", self.name), Sense::Minimize);
        for c in &self.constraints {
            let bound = match c.relation {
                Relation::Le => VarBound::NonNegative,
                Relation::Eq => VarBound::Free,
                Relation::Ge => return Err(LpError::NotDualizable),
            };
            d.add_var(format!("u_{}", c.name), bound, c.rhs.clone());
        }
        for (e, name) in self.var_names.iter().enumerate() {
            let coeffs = self.constraints.iter().map(|c| c.coeffs[e].clone()).collect();
            d.add_constraint(format!("col_{name}"), coeffs, Relation::Ge, self.objective[e].clone());
        }
        Ok(d)
    }
}

/// Per-player Nash-row coefficients for the pair `(K, O)`:
/// `Σ_{e∈k_i\o_i} α_e(γ_ii K_e + Σ_{j≠i: e∈k_j} γ_ij) − Σ_{e∈o_i\k_i} α_e(γ_ii (K_e+1) + Σ_{j: e∈k_j} γ_ij)`.
fn nash_rows(game: &Game, ctx: &SocialContext, k: &Profile, o: &Profile) -> Result<Vec<Vec<Rational>>, GameError> {
    game.validate_context(ctx)?;
    game.validate_profile(o)?;
    let occ = Occupancy::new(game, k)?;
    let mut rows = vec![vec![Rational::zero(); game.resources()]; game.players()];
    for (i, row) in rows.iter_mut().enumerate() {
        let g_ii = ctx.gamma(i, i);
        let (k_only, o_only) = game.chosen(k, i).differences(game.chosen(o, i));
        for e in k_only {
            let others: Rational = occ.users(e).iter().filter(|&&j| j != i).map(|&j| ctx.gamma(i, j)).sum();
            row[e] += g_ii * Rational::from(occ.load(e) as i64) + others;
        }
        for e in o_only {
            let users: Rational = occ.users(e).iter().map(|&j| ctx.gamma(i, j)).sum();
            row[e] -= g_ii * Rational::from(occ.load(e) as i64 + 1) + users;
        }
    }
    Ok(rows)
}

fn squares(game: &Game, s: &Profile) -> Result<Vec<Rational>, GameError> {
    let occ = Occupancy::new(game, s)?;
    Ok((0..game.resources()).map(|e| Rational::from((occ.load(e) as i64).pow(2))).collect())
}

/// The program maximizing `SUM(K)` over latency slopes subject to `K` being an
/// equilibrium and `SUM(O) = 1` (offsets taken as zero).
pub fn build_primal(game: &Game, ctx: &SocialContext, k: &Profile, o: &Profile) -> Result<LinearProgram, LpError> {
    let rows = nash_rows(game, ctx, k, o)?;
    let k2 = squares(game, k)?;
    let o2 = squares(game, o)?;
    let mut lp = LinearProgram::new(format!("primal K={k} O={o}"), Sense::Maximize);
    for (e, c) in k2.into_iter().enumerate() {
        lp.add_var(format!("a{}", e + 1), VarBound::NonNegative, c);
    }
    for (i, row) in rows.into_iter().enumerate() {
        lp.add_constraint(format!("nash{}", i + 1), row, Relation::Le, Rational::zero());
    }
    lp.add_constraint("norm", o2, Relation::Eq, Rational::one());
    Ok(lp)
}

/// The dual of [`build_primal`]: variables `y_1..y_n >= 0` then `θ` free,
/// minimize `θ`, one `>=` row per resource.
pub fn build_dual(game: &Game, ctx: &SocialContext, k: &Profile, o: &Profile) -> Result<LinearProgram, LpError> {
    let rows = nash_rows(game, ctx, k, o)?;
    let k2 = squares(game, k)?;
    let o2 = squares(game, o)?;
    let mut lp = LinearProgram::new(format!("dual K={k} O={o}"), Sense::Minimize);
    for i in 0..game.players() {
        lp.add_var(format!("y{}", i + 1), VarBound::NonNegative, Rational::zero());
    }
    lp.add_var("theta", VarBound::Free, Rational::one());
    for e in 0..game.resources() {
        let mut coeffs: Vec<Rational> = rows.iter().map(|r| r[e].clone()).collect();
        coeffs.push(o2[e].clone());
        lp.add_constraint(format!("r{}", e + 1), coeffs, Relation::Ge, k2[e].clone());
    }
    Ok(lp)
}

/// Potential-row coefficient `K(K+1) − 2vK − O(O+1) + 2vO` for a uniform level `v`.
pub fn potential_coefficient(v: &Rational, ke: i64, oe: i64) -> Rational {
    let two_v = Rational::from(2) * v;
    Rational::from(ke * (ke + 1) - oe * (oe + 1)) - &two_v * Rational::from(ke) + two_v * Rational::from(oe)
}

fn loads(game: &Game, s: &Profile) -> Result<Occupancy, GameError> {
    Occupancy::new(game, s)
}

/// Primal for stability under a uniform `Γ_V`: one potential row, relaxed
/// Nash rows `Σ_{e∈k_i} α_e(K_e − v) − Σ_{e∈o_i} α_e(K_e + 1 − v) <= 0`, and the normalization.
pub fn build_gamma_v_pos_primal(game: &Game, v: &Rational, k: &Profile, o: &Profile) -> Result<LinearProgram, LpError> {
    let (ko, oo) = (loads(game, k)?, loads(game, o)?);
    let m = game.resources();
    let mut lp = LinearProgram::new(format!("gammav pos primal v={v} K={k} O={o}"), Sense::Maximize);
    for e in 0..m {
        lp.add_var(format!("a{}", e + 1), VarBound::NonNegative, Rational::from((ko.load(e) as i64).pow(2)));
    }
    let pot = (0..m).map(|e| potential_coefficient(v, ko.load(e) as i64, oo.load(e) as i64)).collect();
    lp.add_constraint("potential", pot, Relation::Le, Rational::zero());
    for i in 0..game.players() {
        lp.add_constraint(
            format!("nash{}", i + 1),
            relaxed_nash_row(game, &ko, k, o, i, v, v),
            Relation::Le,
            Rational::zero(),
        );
    }
    lp.add_constraint("norm", (0..m).map(|e| Rational::from((oo.load(e) as i64).pow(2))).collect(), Relation::Eq, Rational::one());
    Ok(lp)
}

/// `Σ_{e∈k_i} α_e(K_e − vk) − Σ_{e∈o_i} α_e(K_e + 1 − vo)`.
fn relaxed_nash_row(
    game: &Game,
    ko: &Occupancy,
    k: &Profile,
    o: &Profile,
    i: usize,
    vk: &Rational,
    vo: &Rational,
) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); game.resources()];
    for &e in game.chosen(k, i).resources() {
        row[e] += Rational::from(ko.load(e) as i64) - vk;
    }
    for &e in game.chosen(o, i).resources() {
        row[e] -= Rational::from(ko.load(e) as i64 + 1) - vo;
    }
    row
}

/// Dual of [`build_gamma_v_pos_primal`]. Variable order: `y_1..y_n`, `x`, `θ`.
pub fn build_gamma_v_pos_dual(game: &Game, v: &Rational, k: &Profile, o: &Profile) -> Result<LinearProgram, LpError> {
    let primal = build_gamma_v_pos_primal(game, v, k, o)?;
    let n = game.players();
    let mut lp = LinearProgram::new(format!("gammav pos dual v={v} K={k} O={o}"), Sense::Minimize);
    for i in 0..n {
        lp.add_var(format!("y{}", i + 1), VarBound::NonNegative, Rational::zero());
    }
    lp.add_var("x", VarBound::NonNegative, Rational::zero());
    lp.add_var("theta", VarBound::Free, Rational::one());
    for e in 0..game.resources() {
        let mut coeffs: Vec<Rational> = (0..n).map(|i| primal.constraints[1 + i].coeffs[e].clone()).collect();
        coeffs.push(primal.constraints[0].coeffs[e].clone());
        coeffs.push(primal.constraints[n + 1].coeffs[e].clone());
        lp.add_constraint(format!("r{}", e + 1), coeffs, Relation::Ge, primal.objective[e].clone());
    }
    Ok(lp)
}

/// Primal for anarchy under `Γ_V` with levels in `[vund, vbar]`: relaxed Nash
/// rows `Σ_{e∈k_i} α_e(K_e − v̄) − Σ_{e∈o_i} α_e(K_e + 1 − v_) <= 0`.
pub fn build_gamma_v_poa_primal(
    game: &Game,
    vbar: &Rational,
    vund: &Rational,
    k: &Profile,
    o: &Profile,
) -> Result<LinearProgram, LpError> {
    let (ko, oo) = (loads(game, k)?, loads(game, o)?);
    let m = game.resources();
    let mut lp = LinearProgram::new(format!("gammav poa primal vbar={vbar} vund={vund} K={k} O={o}"), Sense::Maximize);
    for e in 0..m {
        lp.add_var(format!("a{}", e + 1), VarBound::NonNegative, Rational::from((ko.load(e) as i64).pow(2)));
    }
    for i in 0..game.players() {
        lp.add_constraint(
            format!("nash{}", i + 1),
            relaxed_nash_row(game, &ko, k, o, i, vbar, vund),
            Relation::Le,
            Rational::zero(),
        );
    }
    lp.add_constraint("norm", (0..m).map(|e| Rational::from((oo.load(e) as i64).pow(2))).collect(), Relation::Eq, Rational::one());
    Ok(lp)
}

/// Dual of [`build_gamma_v_poa_primal`]. Variable order: `x_1..x_n`, `θ`.
pub fn build_gamma_v_poa_dual(
    game: &Game,
    vbar: &Rational,
    vund: &Rational,
    k: &Profile,
    o: &Profile,
) -> Result<LinearProgram, LpError> {
    let primal = build_gamma_v_poa_primal(game, vbar, vund, k, o)?;
    let n = game.players();
    let mut lp = LinearProgram::new(format!("gammav poa dual vbar={vbar} vund={vund} K={k} O={o}"), Sense::Minimize);
    for i in 0..n {
        lp.add_var(format!("x{}", i + 1), VarBound::NonNegative, Rational::zero());
    }
    lp.add_var("theta", VarBound::Free, Rational::one());
    for e in 0..game.resources() {
        let mut coeffs: Vec<Rational> = (0..n).map(|i| primal.constraints[i].coeffs[e].clone()).collect();
        coeffs.push(primal.constraints[n].coeffs[e].clone());
        lp.add_constraint(format!("r{}", e + 1), coeffs, Relation::Ge, primal.objective[e].clone());
    }
    Ok(lp)
}

fn term_list(names: &[String], coeffs: &[Rational], exact: bool) -> String {
    let mut out = String::new();
    for (name, c) in names.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        let decimal = c.abs().to_decimal(12);
        // Tiny values that round to zero keep their exact form.
        let mag = if exact || decimal == "0" { c.abs().to_string() } else { decimal };
        let sign = if c.is_negative() { "-" } else { "+" };
        if out.is_empty() {
            if c.is_negative() {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        let _ = write!(out, "{mag} {name}");
    }
    if out.is_empty() {
        out.push_str("0 ");
        out.push_str(names.first().map(String::as_str).unwrap_or("x"));
    }
    out
}

/// CPLEX-style LP text. Coefficients are written as decimals (12 places);
/// each row is preceded by a `\ exact:` comment carrying the `p/q` values.
pub fn export_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", lp.name);
    let _ = writeln!(out, "{}", if lp.sense == Sense::Maximize { "Maximize" } else { "Minimize" });
    if !lp.var_names.is_empty() {
        let _ = writeln!(out, "\\ exact: obj: {}", term_list(&lp.var_names, &lp.objective, true));
        let _ = writeln!(out, " obj: {}", term_list(&lp.var_names, &lp.objective, false));
    }
    let _ = writeln!(out, "Subject To");
    for c in &lp.constraints {
        let sym = c.relation.symbol();
        let _ = writeln!(out, "\\ exact: {}: {} {sym} {}", c.name, term_list(&lp.var_names, &c.coeffs, true), c.rhs);
        let _ = writeln!(
            out,
            " {}: {} {sym} {}",
            c.name,
            term_list(&lp.var_names, &c.coeffs, false),
            c.rhs.to_decimal(12)
        );
    }
    let _ = writeln!(out, "Bounds");
    for (name, b) in lp.var_names.iter().zip(&lp.bounds) {
        match b {
            VarBound::NonNegative => {
                let _ = writeln!(out, " {name} >= 0");
            }
            VarBound::Free => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    let _ = writeln!(out, "End");
    out
}

/// Which coefficient text to read back from [`export_lp`] output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpReadMode {
    /// The `\ exact:` comments.
    Exact,
    /// The decimal body.
    Decimal,
}

fn parse_number(tok: &str, line: usize) -> Result<Rational, LpError> {
    let err = || LpError::Parse { line, message: format!("bad number '{tok}'") };
    if let Some((int, frac)) = tok.split_once('.') {
        let digits = frac.len() as u32;
        let whole: Rational = format!("{int}{frac}").parse().map_err(|_| err())?;
        Ok(whole / Rational::from(10i64.pow(digits)))
    } else {
        tok.parse().map_err(|_| err())
    }
}

type ParsedRow = (String, Vec<(String, Rational)>, Vec<String>);

/// Parse `name: [-] c v (+|-) c v ... [rel rhs]` into `(name, terms, rest)`.
fn parse_row(text: &str, line: usize) -> Result<ParsedRow, LpError> {
    let (name, body) = text
        .split_once(':')
        .ok_or_else(|| LpError::Parse { line, message: "missing row name".into() })?;
    let toks: Vec<&str> = body.split_whitespace().collect();
    let mut terms = Vec::new();
    let mut k = 0;
    let mut sign = Rational::one();
    while k < toks.len() {
        match toks[k] {
            "+" => sign = Rational::one(),
            "-" => sign = -Rational::one(),
            "<=" | ">=" | "=" => break,
            tok => {
                let coef = parse_number(tok, line)?;
                let var = toks
                    .get(k + 1)
                    .ok_or_else(|| LpError::Parse { line, message: "coefficient without variable".into() })?;
                terms.push((var.to_string(), &sign * coef));
                sign = Rational::one();
                k += 1;
            }
        }
        k += 1;
    }
    Ok((name.trim().to_string(), terms, toks[k..].iter().map(|s| s.to_string()).collect()))
}

/// Read text produced by [`export_lp`] back into a program.
pub fn parse_lp_text(text: &str, mode: LpReadMode) -> Result<LinearProgram, LpError> {
    let mut lp = LinearProgram::new("", Sense::Minimize);
    let mut section = "";
    let mut objective: Vec<(String, Rational)> = Vec::new();
    #[allow(clippy::type_complexity)]
    let mut rows: Vec<(String, Vec<(String, Rational)>, Relation, Rational)> = Vec::new();
    let mut bounds: Vec<(String, VarBound)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        let (is_exact, content) = match trimmed.strip_prefix("\\ exact:") {
            Some(rest) => (true, rest.trim()),
            None if trimmed.starts_with('\\') => {
                if lp.name.is_empty() && line == 1 {
                    lp.name = trimmed.trim_start_matches('\\').trim().to_string();
                }
                continue;
            }
            None => (false, trimmed),
        };
        if content.is_empty() {
            continue;
        }
        match content {
            "Maximize" => {
                lp.sense = Sense::Maximize;
                section = "obj";
                continue;
            }
            "Minimize" => {
                lp.sense = Sense::Minimize;
                section = "obj";
                continue;
            }
            "Subject To" => {
                section = "rows";
                continue;
            }
            "Bounds" => {
                section = "bounds";
                continue;
            }
            "End" => break,
            _ => {}
        }
        let wanted = match mode {
            LpReadMode::Exact => is_exact,
            LpReadMode::Decimal => !is_exact,
        };
        match section {
            "obj" if wanted => objective = parse_row(content, line)?.1,
            "rows" if wanted => {
                let (name, terms, rest) = parse_row(content, line)?;
                let relation = match rest.first().map(String::as_str) {
                    Some("<=") => Relation::Le,
                    Some(">=") => Relation::Ge,
                    Some("=") => Relation::Eq,
                    _ => return Err(LpError::Parse { line, message: "missing relation".into() }),
                };
                let rhs = rest
                    .get(1)
                    .ok_or_else(|| LpError::Parse { line, message: "missing right-hand side".into() })
                    .and_then(|t| parse_number(t, line))?;
                rows.push((name, terms, relation, rhs));
            }
            "bounds" if !is_exact => {
                let toks: Vec<&str> = content.split_whitespace().collect();
                match toks.as_slice() {
                    [name, "free"] => bounds.push((name.to_string(), VarBound::Free)),
                    [name, ">=", "0"] => bounds.push((name.to_string(), VarBound::NonNegative)),
                    _ => return Err(LpError::Parse { line, message: format!("unsupported bound '{content}'") }),
                }
            }
            _ => {}
        }
    }
    for (name, bound) in &bounds {
        lp.add_var(name.clone(), *bound, Rational::zero());
    }
    let index = |name: &str, line: usize| {
        lp.var_names
            .iter()
            .position(|v| v == name)
            .ok_or(LpError::Parse { line, message: format!("unknown variable '{name}'") })
    };
    let mut obj = vec![Rational::zero(); lp.num_vars()];
    for (v, c) in objective {
        obj[index(&v, 0)?] += c;
    }
    let mut built = Vec::new();
    for (name, terms, relation, rhs) in rows {
        let mut coeffs = vec![Rational::zero(); lp.num_vars()];
        for (v, c) in terms {
            coeffs[index(&v, 0)?] += c;
        }
        built.push(Constraint { name, coeffs, relation, rhs });
    }
    lp.objective = obj;
    lp.constraints = built;
    Ok(lp)
}
