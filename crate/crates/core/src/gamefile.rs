//! Plain-text game files.
//!
//! ```text
//! # two players, two parallel links
//! players 2
//! resources 2
//! latency 1 1 0
//! latency 2 1 0
//! strategy 1 1 : 1
//! strategy 1 2 : 2
//! strategy 2 1 : 1
//! strategy 2 2 : 2
//! gamma v: 0 1/2
//! ```
//!
//! Indices are 1-based. The context block is either `gamma dense` followed by
//! one row per player, or `gamma v: v1 ... vN`; when absent the identity is
//! used. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::context::{AltruismVector, ContextError, SocialContext};
use crate::game::{Game, GameError, Latency, Strategy};
use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Context { line: usize, source: ContextError },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("resource {resource} has no latency line")]
    MissingLatency { resource: usize },
    #[error("player {player} has no strategy {strategy} (strategies must be numbered 1..k)")]
    StrategyGap { player: usize, strategy: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A parsed game file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameFile {
    pub game: Game,
    pub context: SocialContext,
}

fn syntax(line: usize, message: impl Into<String>) -> GameFileError {
    GameFileError::Syntax { line, message: message.into() }
}

fn parse_index(tok: &str, line: usize, what: &str, max: Option<usize>) -> Result<usize, GameFileError> {
    let value: usize = tok.parse().map_err(|_| syntax(line, format!("invalid {what} '{tok}'")))?;
    if value == 0 {
        return Err(syntax(line, format!("{what} must be at least 1")));
    }
    if let Some(max) = max {
        if value > max {
            return Err(syntax(line, format!("{what} {value} out of range 1..={max}")));
        }
    }
    Ok(value)
}

fn parse_rational(tok: &str, line: usize) -> Result<Rational, GameFileError> {
    tok.parse().map_err(|e| syntax(line, format!("invalid rational '{tok}': {e}")))
}

enum Gamma {
    Dense(Vec<Vec<Rational>>),
    Levels(Vec<Rational>),
}

pub fn parse_game_file(text: &str) -> Result<GameFile, GameFileError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, toks)| !toks.is_empty())
        .collect();

    let mut players: Option<usize> = None;
    let mut resources: Option<usize> = None;
    let mut latencies: BTreeMap<usize, Latency> = BTreeMap::new();
    let mut strategies: BTreeMap<(usize, usize), Strategy> = BTreeMap::new();
    let mut gamma: Option<(usize, Gamma)> = None;

    let mut idx = 0;
    while idx < lines.len() {
        let (ln, ref toks) = lines[idx];
        idx += 1;
        match toks[0] {
            "players" | "resources" => {
                if toks.len() != 2 {
                    return Err(syntax(ln, format!("expected `{} N`", toks[0])));
                }
                let value = parse_index(toks[1], ln, toks[0], None)?;
                let slot = if toks[0] == "players" { &mut players } else { &mut resources };
                if slot.replace(value).is_some() {
                    return Err(syntax(ln, format!("duplicate `{}` header", toks[0])));
                }
            }
            "latency" => {
                let m = resources.ok_or_else(|| syntax(ln, "`latency` before `resources`"))?;
                if toks.len() != 4 {
                    return Err(syntax(ln, "expected `latency E ALPHA BETA`"));
                }
                let e = parse_index(toks[1], ln, "resource", Some(m))?;
                let lat = Latency::new(parse_rational(toks[2], ln)?, parse_rational(toks[3], ln)?);
                if lat.alpha.is_negative() || (&lat.alpha + &lat.beta).is_negative() {
                    return Err(syntax(ln, "latency must satisfy alpha >= 0 and alpha + beta >= 0"));
                }
                if latencies.insert(e, lat).is_some() {
                    return Err(syntax(ln, format!("duplicate latency for resource {e}")));
                }
            }
            "strategy" => {
                let n = players.ok_or_else(|| syntax(ln, "`strategy` before `players`"))?;
                let m = resources.ok_or_else(|| syntax(ln, "`strategy` before `resources`"))?;
                if toks.len() < 5 || toks[3] != ":" {
                    return Err(syntax(ln, "expected `strategy P K : e1 e2 ...`"));
                }
                let p = parse_index(toks[1], ln, "player", Some(n))?;
                let k = parse_index(toks[2], ln, "strategy index", None)?;
                let res = toks[4..]
                    .iter()
                    .map(|t| parse_index(t, ln, "resource", Some(m)).map(|e| e - 1))
                    .collect::<Result<Vec<_>, _>>()?;
                if strategies.insert((p, k), Strategy::new(res)).is_some() {
                    return Err(syntax(ln, format!("duplicate strategy {k} for player {p}")));
                }
            }
            "gamma" => {
                let n = players.ok_or_else(|| syntax(ln, "`gamma` before `players`"))?;
                if gamma.is_some() {
                    return Err(syntax(ln, "duplicate context block"));
                }
                if toks.len() == 2 && toks[1] == "dense" {
                    let mut rows = Vec::with_capacity(n);
                    for _ in 0..n {
                        let (rl, ref rt) = *lines.get(idx).ok_or_else(|| syntax(ln, format!("`gamma dense` needs {n} rows")))?;
                        idx += 1;
                        if rt.len() != n {
                            return Err(syntax(rl, format!("gamma row has {} entries, expected {n}", rt.len())));
                        }
                        rows.push(rt.iter().map(|t| parse_rational(t, rl)).collect::<Result<Vec<_>, _>>()?);
                    }
                    gamma = Some((ln, Gamma::Dense(rows)));
                } else if toks.len() >= 2 && (toks[1] == "v:" || (toks[1] == "v" && toks.get(2) == Some(&":"))) {
                    let start = if toks[1] == "v:" { 2 } else { 3 };
                    let vals = toks[start..].iter().map(|t| parse_rational(t, ln)).collect::<Result<Vec<_>, _>>()?;
                    if vals.len() != n {
                        return Err(syntax(ln, format!("gamma v has {} entries, expected {n}", vals.len())));
                    }
                    gamma = Some((ln, Gamma::Levels(vals)));
                } else {
                    return Err(syntax(ln, "expected `gamma dense` or `gamma v: v1 ... vN`"));
                }
            }
            other => return Err(syntax(ln, format!("unknown directive '{other}'"))),
        }
    }

    let n = players.ok_or(GameFileError::MissingHeader("players"))?;
    let m = resources.ok_or(GameFileError::MissingHeader("resources"))?;
    let lats = (1..=m)
        .map(|e| latencies.remove(&e).ok_or(GameFileError::MissingLatency { resource: e }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sets: Vec<Vec<Strategy>> = vec![Vec::new(); n];
    for ((p, k), s) in strategies {
        let set = &mut sets[p - 1];
        if k != set.len() + 1 {
            return Err(GameFileError::StrategyGap { player: p, strategy: set.len() + 1 });
        }
        set.push(s);
    }
    let game = Game::with_min_players(lats, sets, 1)?;
    let context = match gamma {
        None => SocialContext::identity(n),
        Some((ln, Gamma::Dense(rows))) => {
            SocialContext::new(rows).map_err(|source| GameFileError::Context { line: ln, source })?
        }
        Some((ln, Gamma::Levels(v))) => {
            let v = AltruismVector::new(v).map_err(|source| GameFileError::Context { line: ln, source })?;
            SocialContext::gamma_v(&v)
        }
    };
    game.validate_context(&context)?;
    Ok(GameFile { game, context })
}

impl GameFile {
    pub fn new(game: Game, context: SocialContext) -> Result<Self, GameError> {
        game.validate_context(&context)?;
        Ok(Self { game, context })
    }

    /// Canonical text. `gamma v:` is used whenever the context has that form.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let g = &self.game;
        writeln!(out, "players {}", g.players()).unwrap();
        writeln!(out, "resources {}", g.resources()).unwrap();
        for (e, lat) in g.latencies().iter().enumerate() {
            writeln!(out, "latency {} {} {}", e + 1, lat.alpha, lat.beta).unwrap();
        }
        for i in 0..g.players() {
            for (k, s) in g.strategies(i).iter().enumerate() {
                let res: Vec<String> = s.resources().iter().map(|e| (e + 1).to_string()).collect();
                writeln!(out, "strategy {} {} : {}", i + 1, k + 1, res.join(" ")).unwrap();
            }
        }
        match self.context.extract_gamma_v() {
            Some(v) => {
                let vals: Vec<String> = v.values().iter().map(|x| x.to_string()).collect();
                writeln!(out, "gamma v: {}", vals.join(" ")).unwrap();
            }
            None => {
                writeln!(out, "gamma dense").unwrap();
                for row in self.context.rows() {
                    let vals: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    writeln!(out, "{}", vals.join(" ")).unwrap();
                }
            }
        }
        out
    }

    /// [`GameFile::emit`] preceded by a `# name` comment line.
    pub fn emit_named(&self, name: &str) -> String {
        format!("# {name}\n{}", self.emit())
    }
}
