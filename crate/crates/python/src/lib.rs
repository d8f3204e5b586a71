//! Python bindings. Rationals cross the boundary as `fractions.Fraction`;
//! profiles are sequences of 1-based strategy indices.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use altcong::certificates::{
    check_gamma_v_poa_certificate, check_gamma_v_pos_certificate, check_poa_grid_17_3, CertificateReport,
};
use altcong::equilibria::{
    best_response_dynamics, enumerate_nash, is_pure_nash, ratios, social_optimum, DynamicsKind, Policy,
    RatioOutcome, DEFAULT_BUDGET,
};
use altcong::game::{altruistic_costs, social_cost, Latency, Strategy};
use altcong::gamefile::{parse_game_file, GameFile};
use altcong::instances::{generate, Branch, ContextKind, Instance, InstanceSpec, RandomSpec};
use altcong::lp::{build_dual, build_primal, export_lp};
use altcong::potential::{check_exact_potential, PotentialKind};
use altcong::verify::{run_verify, VerifyConfig};
use altcong::{qeval, Game as CoreGame, Profile, QuadExt, Rational, SocialContext};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_string(),))
}

/// Accepts `int`, `Fraction` or a `"p/q"` string.
fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    obj.str()?.to_str()?.parse().map_err(err)
}

fn ratio_value<'py>(py: Python<'py>, r: &RatioOutcome) -> PyResult<Bound<'py, PyAny>> {
    match r {
        RatioOutcome::Value(v) => to_fraction(py, v),
        RatioOutcome::Undefined => Ok(py.None().into_bound(py)),
        RatioOutcome::Degenerate => Ok("degenerate".into_pyobject(py)?.into_any()),
    }
}

fn profile_tuple(s: &Profile) -> Vec<usize> {
    s.one_based()
}

/// A game together with its social context.
#[pyclass(name = "Game", frozen, module = "altcong")]
struct PyGame {
    file: GameFile,
    name: String,
}

impl PyGame {
    fn game(&self) -> &CoreGame {
        &self.file.game
    }

    fn ctx(&self) -> &SocialContext {
        &self.file.context
    }

    fn profile(&self, choices: Vec<usize>) -> PyResult<Profile> {
        if choices.contains(&0) {
            return Err(err("strategy indices are 1-based"));
        }
        let s = Profile::new(choices.into_iter().map(|c| c - 1).collect());
        self.game().validate_profile(&s).map_err(err)?;
        Ok(s)
    }

    fn from_instance(inst: Instance) -> PyResult<Self> {
        Ok(Self { file: GameFile::new(inst.game, inst.context).map_err(err)?, name: inst.name })
    }
}

#[pymethods]
impl PyGame {
    /// `latencies`: list of `(alpha, beta)`; `strategies[i]`: list of resource
    /// lists (1-based); `gamma`: square matrix, identity when omitted.
    #[new]
    #[pyo3(signature = (latencies, strategies, gamma=None))]
    fn new(
        latencies: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>,
        strategies: Vec<Vec<Vec<usize>>>,
        gamma: Option<Vec<Vec<Bound<'_, PyAny>>>>,
    ) -> PyResult<Self> {
        let lats = latencies
            .iter()
            .map(|(a, b)| Ok(Latency::new(to_rational(a)?, to_rational(b)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let mut sets = Vec::with_capacity(strategies.len());
        for player in strategies {
            let mut set = Vec::with_capacity(player.len());
            for s in player {
                if s.contains(&0) {
                    return Err(err("resource indices are 1-based"));
                }
                set.push(Strategy::new(s.into_iter().map(|e| e - 1).collect()));
            }
            sets.push(set);
        }
        let game = CoreGame::with_min_players(lats, sets, 1).map_err(err)?;
        let ctx = match gamma {
            None => SocialContext::identity(game.players()),
            Some(rows) => SocialContext::new(
                rows.iter().map(|r| r.iter().map(to_rational).collect::<PyResult<Vec<_>>>()).collect::<PyResult<_>>()?,
            )
            .map_err(err)?,
        };
        Ok(Self { file: GameFile::new(game, ctx).map_err(err)?, name: "game".into() })
    }

    /// Parse the text game-file format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { file: parse_game_file(text).map_err(err)?, name: "game".into() })
    }

    fn emit(&self) -> String {
        self.file.emit()
    }

    #[getter]
    fn name(&self) -> String {
        self.name.clone()
    }

    #[getter]
    fn players(&self) -> usize {
        self.game().players()
    }

    #[getter]
    fn resources(&self) -> usize {
        self.game().resources()
    }

    fn social_cost<'py>(&self, py: Python<'py>, profile: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        let s = self.profile(profile)?;
        to_fraction(py, &social_cost(self.game(), &s).map_err(err)?)
    }

    /// Perceived costs `ĉ_i` of all players.
    fn costs<'py>(&self, py: Python<'py>, profile: Vec<usize>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let s = self.profile(profile)?;
        altruistic_costs(self.game(), self.ctx(), &s).map_err(err)?.iter().map(|c| to_fraction(py, c)).collect()
    }

    fn is_nash(&self, profile: Vec<usize>) -> PyResult<bool> {
        let s = self.profile(profile)?;
        is_pure_nash(self.game(), self.ctx(), &s).map_err(err)
    }

    #[pyo3(signature = (budget=DEFAULT_BUDGET))]
    fn nash(&self, budget: u64) -> PyResult<Vec<Vec<usize>>> {
        Ok(enumerate_nash(self.game(), self.ctx(), budget).map_err(err)?.iter().map(profile_tuple).collect())
    }

    #[pyo3(signature = (budget=DEFAULT_BUDGET))]
    fn optimum<'py>(&self, py: Python<'py>, budget: u64) -> PyResult<(Vec<usize>, Bound<'py, PyAny>)> {
        let (s, v) = social_optimum(self.game(), budget).map_err(err)?;
        Ok((profile_tuple(&s), to_fraction(py, &v)?))
    }

    /// `{"ne", "opt_profile", "opt", "poa", "pos"}`; ratios are `None` without an NE.
    #[pyo3(signature = (budget=DEFAULT_BUDGET))]
    fn analyze<'py>(&self, py: Python<'py>, budget: u64) -> PyResult<Bound<'py, PyDict>> {
        let rep = ratios(self.game(), self.ctx(), budget).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("ne", rep.ne_list.iter().map(profile_tuple).collect::<Vec<_>>())?;
        d.set_item("opt_profile", profile_tuple(&rep.opt_profile))?;
        d.set_item("opt", to_fraction(py, &rep.opt_value)?)?;
        d.set_item("poa", ratio_value(py, &rep.poa)?)?;
        d.set_item("pos", ratio_value(py, &rep.pos)?)?;
        Ok(d)
    }

    /// Returns `(kind, profiles)` with kind `"converged"`, `"cycle"` or `"truncated"`.
    #[pyo3(signature = (start, policy="first-improver", max_steps=10_000))]
    fn dynamics(&self, start: Vec<usize>, policy: &str, max_steps: usize) -> PyResult<(String, Vec<Vec<usize>>)> {
        let s = self.profile(start)?;
        let policy: Policy = policy.parse().map_err(err)?;
        let out = best_response_dynamics(self.game(), self.ctx(), &s, policy, max_steps).map_err(err)?;
        let kind = match out.kind {
            DynamicsKind::Converged => "converged",
            DynamicsKind::Cycle => "cycle",
            DynamicsKind::Truncated => "truncated",
        };
        Ok((kind.into(), out.profiles.iter().map(profile_tuple).collect()))
    }

    /// `(exact, deviations_checked)` for kind `rs`, `rs-forced` or `gammav`.
    #[pyo3(signature = (kind="rs", budget=DEFAULT_BUDGET))]
    fn check_potential(&self, kind: &str, budget: u64) -> PyResult<(bool, u64)> {
        let kind: PotentialKind = kind.parse().map_err(err)?;
        let rep = check_exact_potential(self.game(), self.ctx(), kind, budget).map_err(err)?;
        Ok((rep.passed(), rep.deviations_checked))
    }

    #[pyo3(signature = (k, o, dual=false))]
    fn export_lp(&self, k: Vec<usize>, o: Vec<usize>, dual: bool) -> PyResult<String> {
        let (k, o) = (self.profile(k)?, self.profile(o)?);
        let lp = if dual {
            build_dual(self.game(), self.ctx(), &k, &o)
        } else {
            build_primal(self.game(), self.ctx(), &k, &o)
        }
        .map_err(err)?;
        Ok(export_lp(&lp))
    }

    fn __repr__(&self) -> String {
        format!("Game({}, players={}, resources={})", self.name, self.game().players(), self.game().resources())
    }
}

/// Named families: `ne1`, `ne2`, `tree` (h), `pos_lb` (n1, n2, delta),
/// `gammav_pos_lb` (v, n1, n2, delta, branch), `random` (seed, players,
/// strategies, resources, context).
#[pyfunction]
#[pyo3(signature = (family, h=1, n1=2, n2=1, delta=None, v=None, branch=None, seed=0, players=3, strategies=3, resources=6, context="restricted-symmetric"))]
#[allow(clippy::too_many_arguments)]
fn gen(
    family: &str,
    h: u32,
    n1: usize,
    n2: usize,
    delta: Option<Bound<'_, PyAny>>,
    v: Option<Bound<'_, PyAny>>,
    branch: Option<&str>,
    seed: u64,
    players: usize,
    strategies: usize,
    resources: usize,
    context: &str,
) -> PyResult<PyGame> {
    let delta = delta.as_ref().map(to_rational).transpose()?.unwrap_or_else(altcong::instances::default_delta);
    let spec = match family {
        "ne1" => InstanceSpec::Ne1,
        "ne2" => InstanceSpec::Ne2,
        "tree" => InstanceSpec::TreeLb { h },
        "pos_lb" => InstanceSpec::PosLb { n1, n2, delta },
        "gammav_pos_lb" => {
            let v = to_rational(v.as_ref().ok_or_else(|| err("gammav_pos_lb needs v"))?)?;
            let branch = match branch {
                Some(b) => b.parse::<Branch>().map_err(err)?,
                None => Branch::for_v(&v),
            };
            InstanceSpec::GammaVPosLb { v, n1, n2, delta, branch }
        }
        "random" => InstanceSpec::Random(RandomSpec {
            seed,
            players,
            max_strategies: strategies,
            resources,
            ctx_kind: context.parse::<ContextKind>().map_err(err)?,
            ..RandomSpec::default()
        }),
        other => return Err(err(format!("unknown family '{other}'"))),
    };
    PyGame::from_instance(generate(&spec).map_err(err)?)
}

fn cert_dict<'py>(py: Python<'py>, rep: &CertificateReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &rep.name)?;
    d.set_item("passed", rep.passed())?;
    d.set_item("theta", rep.theta.to_string())?;
    d.set_item("theta_decimal", qeval(&rep.theta, 40))?;
    d.set_item("cells", rep.grid.cells)?;
    d.set_item("counterexample", rep.grid.counterexample.map(|(k, o, _)| (k, o)))?;
    d.set_item("tight", rep.grid.tight.clone())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (kmax=100, omax=100))]
fn certify_poa_17_3(py: Python<'_>, kmax: i64, omax: i64) -> PyResult<Bound<'_, PyDict>> {
    cert_dict(py, &check_poa_grid_17_3(kmax, omax, None).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (v, kmax=100, omax=100))]
fn certify_gamma_v_pos<'py>(py: Python<'py>, v: Bound<'py, PyAny>, kmax: i64, omax: i64) -> PyResult<Bound<'py, PyDict>> {
    cert_dict(py, &check_gamma_v_pos_certificate(&to_rational(&v)?, kmax, omax, None).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (vbar, vund, kmax=100, omax=100, branch=None))]
fn certify_gamma_v_poa<'py>(
    py: Python<'py>,
    vbar: Bound<'py, PyAny>,
    vund: Bound<'py, PyAny>,
    kmax: i64,
    omax: i64,
    branch: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let (vb, vu) = (to_rational(&vbar)?, to_rational(&vund)?);
    let branch = match branch {
        Some(b) => b.parse::<Branch>().map_err(err)?,
        None => Branch::for_v(&vb),
    };
    cert_dict(py, &check_gamma_v_poa_certificate(&vb, &vu, kmax, omax, branch, None).map_err(err)?)
}

/// Exact decimal rendering of `a + b·√d`.
#[pyfunction]
#[pyo3(signature = (a, b, d, bits=64))]
fn quad_eval(a: Bound<'_, PyAny>, b: Bound<'_, PyAny>, d: u64, bits: u32) -> PyResult<String> {
    let x = QuadExt::new(to_rational(&a)?, to_rational(&b)?, d).map_err(err)?;
    Ok(qeval(&x, bits))
}

/// Run the verification suite; returns `(passed, report_text)`.
#[pyfunction]
#[pyo3(signature = (kmax=100, omax=100, sweep=100))]
fn verify(py: Python<'_>, kmax: i64, omax: i64, sweep: u64) -> (bool, String) {
    let cfg = VerifyConfig { kmax, omax, sweep, ..VerifyConfig::default() };
    let rep = py.detach(|| run_verify(&cfg));
    (rep.passed(), rep.render(false))
}

#[pymodule]
#[pyo3(name = "altcong")]
fn altcong_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGame>()?;
    m.add_function(wrap_pyfunction!(gen, m)?)?;
    m.add_function(wrap_pyfunction!(certify_poa_17_3, m)?)?;
    m.add_function(wrap_pyfunction!(certify_gamma_v_pos, m)?)?;
    m.add_function(wrap_pyfunction!(certify_gamma_v_poa, m)?)?;
    m.add_function(wrap_pyfunction!(quad_eval, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
