//! Dual certificates: exact feasibility checks against concrete dual
//! programs, and lattice checks of the closed-form certificates for the
//! price of anarchy and stability bounds.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::instances::Branch;
use crate::lp::{LinearProgram, Relation, VarBound};
use crate::numerics::{rat, NumericsError, QuadExt, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("certificate has {got} values, program has {expected} variables")]
    Dimension { expected: usize, got: usize },
    #[error("certificate undefined at {what}: the dual program is infeasible there")]
    Undefined { what: String },
    #[error("{name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: String },
    #[error("require 0 <= vund <= vbar <= 1, got vund = {vund}, vbar = {vbar}")]
    Ordering { vund: String, vbar: String },
}

/// Dual values `(θ, x, y_1..y_n)`; `x` multiplies the potential row when present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub theta: QuadExt,
    pub potential_multiplier: Option<QuadExt>,
    pub nash_multipliers: Vec<QuadExt>,
}

impl DualCertificate {
    /// The same multiplier for every player.
    pub fn uniform(theta: QuadExt, potential: Option<QuadExt>, nash: QuadExt, players: usize) -> Self {
        Self { theta, potential_multiplier: potential, nash_multipliers: vec![nash; players] }
    }

    /// Values in dual-program variable order: multipliers, potential, `θ`.
    pub fn values(&self) -> Vec<QuadExt> {
        let mut v = self.nash_multipliers.clone();
        v.extend(self.potential_multiplier.clone());
        v.push(self.theta.clone());
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualCheck {
    Feasible,
    /// A variable declared non-negative has a negative value.
    NegativeMultiplier { variable: String, value: QuadExt },
    Violated { constraint: usize, name: String, lhs: QuadExt, rhs: QuadExt },
}

impl DualCheck {
    pub fn is_feasible(&self) -> bool {
        matches!(self, DualCheck::Feasible)
    }
}

impl fmt::Display for DualCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualCheck::Feasible => write!(f, "feasible"),
            DualCheck::NegativeMultiplier { variable, value } => write!(f, "{variable} = {value} < 0"),
            DualCheck::Violated { name, lhs, rhs, .. } => write!(f, "{name}: lhs {lhs} vs rhs {rhs}"),
        }
    }
}

/// Evaluate every row of `dlp` at `cert` exactly; report the first violation.
pub fn check_dual_feasible(dlp: &LinearProgram, cert: &DualCertificate) -> Result<DualCheck, CertificateError> {
    let values = cert.values();
    if values.len() != dlp.num_vars() {
        return Err(CertificateError::Dimension { expected: dlp.num_vars(), got: values.len() });
    }
    for ((name, bound), value) in dlp.var_names.iter().zip(&dlp.bounds).zip(&values) {
        if *bound == VarBound::NonNegative && value.signum() < 0 {
            return Ok(DualCheck::NegativeMultiplier { variable: name.clone(), value: value.clone() });
        }
    }
    for (idx, c) in dlp.constraints.iter().enumerate() {
        let mut lhs = QuadExt::zero();
        for (coef, value) in c.coeffs.iter().zip(&values) {
            if !coef.is_zero() {
                lhs = lhs.try_add(&value.scale(coef))?;
            }
        }
        let rhs = QuadExt::from_rational(c.rhs.clone());
        let diff = lhs.try_sub(&rhs)?.signum();
        let ok = match c.relation {
            Relation::Ge => diff >= 0,
            Relation::Le => diff <= 0,
            Relation::Eq => diff == 0,
        };
        if !ok {
            return Ok(DualCheck::Violated { constraint: idx, name: c.name.clone(), lhs, rhs });
        }
    }
    Ok(DualCheck::Feasible)
}

/// `kk·K² + ko·K·O + oo·O² + k·K + o·O + c` over `Q(√d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiQuad {
    pub kk: QuadExt,
    pub ko: QuadExt,
    pub oo: QuadExt,
    pub k: QuadExt,
    pub o: QuadExt,
    pub c: QuadExt,
}

fn q(x: Rational) -> QuadExt {
    QuadExt::from_rational(x)
}

fn qi(x: i64) -> QuadExt {
    q(Rational::from(x))
}

fn sqrt3() -> QuadExt {
    QuadExt::sqrt(3).expect("3 is square-free")
}

impl BiQuad {
    pub fn zero() -> Self {
        Self { kk: QuadExt::zero(), ko: QuadExt::zero(), oo: QuadExt::zero(), k: QuadExt::zero(), o: QuadExt::zero(), c: QuadExt::zero() }
    }

    fn coeffs(&self) -> [&QuadExt; 6] {
        [&self.kk, &self.ko, &self.oo, &self.k, &self.o, &self.c]
    }

    fn map(&self, f: impl Fn(&QuadExt) -> QuadExt) -> Self {
        Self { kk: f(&self.kk), ko: f(&self.ko), oo: f(&self.oo), k: f(&self.k), o: f(&self.o), c: f(&self.c) }
    }

    pub fn scale(&self, s: &QuadExt) -> Self {
        self.map(|x| x * s)
    }

    pub fn eval(&self, ke: i64, oe: i64) -> QuadExt {
        let mono = [ke * ke, ke * oe, oe * oe, ke, oe, 1];
        self.coeffs()
            .iter()
            .zip(mono)
            .fold(QuadExt::zero(), |acc, (c, m)| acc + c.scale(&Rational::from(m)))
    }

    /// Multiply through by the positive common denominator, giving integer
    /// coefficient pairs `(a_t, b_t)` so the sign of the polynomial is the sign
    /// of `Σ a_t m_t + √d Σ b_t m_t`.
    fn integer_form(&self) -> IntBiQuad {
        let mut l = BigInt::from(1);
        let mut d = 0u64;
        for c in self.coeffs() {
            l = l.lcm(c.rational_part().denom()).lcm(c.irrational_part().denom());
            if let Some(r) = c.radicand() {
                d = r;
            }
        }
        let lr = Rational::from(l);
        let to_int = |x: &Rational| (x * &lr).numer().clone();
        let a = self.coeffs().map(|c| to_int(c.rational_part()));
        let b = self.coeffs().map(|c| to_int(c.irrational_part()));
        IntBiQuad { a, b, d }
    }
}

impl std::ops::Sub for &BiQuad {
    type Output = BiQuad;
    fn sub(self, rhs: &BiQuad) -> BiQuad {
        BiQuad {
            kk: &self.kk - &rhs.kk,
            ko: &self.ko - &rhs.ko,
            oo: &self.oo - &rhs.oo,
            k: &self.k - &rhs.k,
            o: &self.o - &rhs.o,
            c: &self.c - &rhs.c,
        }
    }
}

struct IntBiQuad {
    a: [BigInt; 6],
    b: [BigInt; 6],
    d: u64,
}

impl IntBiQuad {
    fn sign_at(&self, ke: i64, oe: i64) -> i8 {
        let mono = [ke * ke, ke * oe, oe * oe, ke, oe, 1].map(BigInt::from);
        let dot = |c: &[BigInt; 6]| -> BigInt { c.iter().zip(&mono).map(|(x, m)| x * m).sum() };
        sign_ab(&dot(&self.a), &dot(&self.b), self.d)
    }
}

/// Sign of `a + b√d` for integers.
fn sign_ab(a: &BigInt, b: &BigInt, d: u64) -> i8 {
    use num_traits::Signed;
    let sgn = |x: &BigInt| if x.is_positive() { 1 } else if x.is_negative() { -1 } else { 0 };
    let (sa, sb) = (sgn(a), sgn(b));
    if sb == 0 || d == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    match (a * a).cmp(&(b * b * BigInt::from(d))) {
        std::cmp::Ordering::Greater => sa,
        std::cmp::Ordering::Less => sb,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Result of checking a reduced per-resource inequality on an integer lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridReport {
    pub cells: u64,
    /// First failing `(K, O)` in row-major order, with `Δ` for the refined form.
    pub counterexample: Option<(i64, i64, Option<i64>)>,
    /// Cells where the inequality holds with equality (`Δ = 0` form).
    pub tight: Vec<(i64, i64)>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Check `poly(K, O) >= 0` on `[0, kmax] × [0, omax]` with exact signs.
pub fn check_grid(poly: &BiQuad, kmax: i64, omax: i64) -> GridReport {
    let int = poly.integer_form();
    let rows: Vec<(Option<i64>, Vec<i64>)> = (0..=kmax)
        .into_par_iter()
        .map(|ke| {
            let mut fail = None;
            let mut tight = Vec::new();
            for oe in 0..=omax {
                match int.sign_at(ke, oe) {
                    0 => tight.push(oe),
                    s if s < 0 => {
                        fail = Some(oe);
                        break;
                    }
                    _ => {}
                }
            }
            (fail, tight)
        })
        .collect();
    let counterexample =
        rows.iter().enumerate().find_map(|(ke, (fail, _))| fail.map(|oe| (ke as i64, oe, None)));
    let tight = rows
        .iter()
        .enumerate()
        .flat_map(|(ke, (_, t))| t.iter().map(move |&oe| (ke as i64, oe)))
        .collect();
    GridReport { cells: ((kmax + 1) * (omax + 1)) as u64, counterexample, tight }
}

/// Which closed-form constant to corrupt in sensitivity runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CertConstant {
    Theta,
    /// The per-player Nash multiplier (`y` or `x_i`).
    Nash,
    /// The potential-row multiplier `x` (stability certificates only).
    Potential,
}

impl std::str::FromStr for CertConstant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theta" => Ok(Self::Theta),
            "nash" | "y" => Ok(Self::Nash),
            "potential" | "x" => Ok(Self::Potential),
            other => Err(format!("unknown certificate constant '{other}' (expected theta, nash or potential)")),
        }
    }
}

/// Add `amount` to one constant of a closed-form certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perturbation {
    pub constant: CertConstant,
    pub amount: Rational,
}

fn perturb(value: QuadExt, which: CertConstant, p: Option<&Perturbation>) -> QuadExt {
    match p {
        Some(p) if p.constant == which => value + q(p.amount.clone()),
        _ => value,
    }
}

/// A closed-form certificate with uniform multipliers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformCertificate {
    pub branch: Option<Branch>,
    pub theta: QuadExt,
    pub potential: Option<QuadExt>,
    pub nash: QuadExt,
}

impl UniformCertificate {
    pub fn for_players(&self, n: usize) -> DualCertificate {
        DualCertificate::uniform(self.theta.clone(), self.potential.clone(), self.nash.clone(), n)
    }
}

/// `θ = 17/3`, `y = 5/3`.
pub fn poa_17_3_certificate(p: Option<&Perturbation>) -> UniformCertificate {
    UniformCertificate {
        branch: None,
        theta: perturb(q(rat(17, 3)), CertConstant::Theta, p),
        potential: None,
        nash: perturb(q(rat(5, 3)), CertConstant::Nash, p),
    }
}

/// `y(K−Δ)K − y(O−Δ)(2K+1) + θO² − K²` at `Δ = 0`.
pub fn poa_17_3_slack(cert: &UniformCertificate) -> BiQuad {
    let (y, t) = (&cert.nash, &cert.theta);
    BiQuad { kk: y - &qi(1), ko: -(y * &qi(2)), oo: t.clone(), k: QuadExt::zero(), o: -y.clone(), c: QuadExt::zero() }
}

/// The target inequality `5K² − 5O(2K+1) + 17O² − 3K² >= 0`.
pub fn poa_17_3_target() -> BiQuad {
    BiQuad { kk: qi(2), ko: qi(-10), oo: qi(17), k: QuadExt::zero(), o: qi(-5), c: QuadExt::zero() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub name: String,
    pub theta: QuadExt,
    pub grid: GridReport,
    /// Slack equals the expected reduced polynomial up to the stated positive factor.
    pub identity: bool,
    /// Discriminant spot checks, when the family has them.
    pub discriminant: Option<bool>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.grid.passed() && self.identity && self.discriminant.unwrap_or(true)
    }
}

/// Grid check of the `17/3` certificate, including every `Δ ∈ [0, min(K, O)]`.
pub fn check_poa_grid_17_3(kmax: i64, omax: i64, p: Option<&Perturbation>) -> Result<CertificateReport, CertificateError> {
    let cert = poa_17_3_certificate(p);
    let slack = poa_17_3_slack(&cert);
    let mut grid = check_grid(&slack, kmax, omax);
    if grid.passed() {
        grid.counterexample = refined_counterexample(&cert, kmax, omax)?;
    }
    let identity = slack.scale(&qi(3)) == poa_17_3_target() && cert.theta == q(rat(17, 3));
    Ok(CertificateReport { name: "poa 17/3".into(), theta: cert.theta, grid, identity, discriminant: None })
}

/// First `(K, O, Δ)` violating `y(K−Δ)K − y(O−Δ)(2K+1) + θO² >= K²`.
fn refined_counterexample(
    cert: &UniformCertificate,
    kmax: i64,
    omax: i64,
) -> Result<Option<(i64, i64, Option<i64>)>, CertificateError> {
    let (y, t) = (&cert.nash, &cert.theta);
    if !y.is_rational() || !t.is_rational() {
        return Err(CertificateError::Undefined { what: "irrational 17/3 constants".into() });
    }
    let (y, t) = (y.rational_part().clone(), t.rational_part().clone());
    let l = y.denom().lcm(t.denom());
    let lr = Rational::from(l.clone());
    let yi = (&y * &lr).numer().clone();
    let ti = (&t * &lr).numer().clone();
    let hits: Vec<Option<(i64, i64, Option<i64>)>> = (0..=kmax)
        .into_par_iter()
        .map(|ke| {
            for oe in 0..=omax {
                for d in 0..=ke.min(oe) {
                    let lhs = &yi * BigInt::from((ke - d) * ke - (oe - d) * (2 * ke + 1))
                        + &ti * BigInt::from(oe * oe)
                        - &l * BigInt::from(ke * ke);
                    if lhs < BigInt::from(0) {
                        return Some((ke, oe, Some(d)));
                    }
                }
            }
            None
        })
        .collect();
    Ok(hits.into_iter().flatten().next())
}

fn check_unit(name: &'static str, v: &Rational) -> Result<(), CertificateError> {
    if v.is_negative() || *v > Rational::one() {
        return Err(CertificateError::OutOfRange { name, value: v.to_string() });
    }
    Ok(())
}

/// Closed-form stability certificate for a uniform level `v ∈ [0, 1)` in `Q(√3)`.
pub fn gamma_v_pos_certificate(v: &Rational, p: Option<&Perturbation>) -> Result<UniformCertificate, CertificateError> {
    check_unit("v", v)?;
    if v.is_one() {
        return Err(CertificateError::Undefined { what: "v = 1".into() });
    }
    let s = sqrt3();
    let vq = q(v.clone());
    let one = qi(1);
    let branch = Branch::for_v(v);
    let (theta, x, y) = match branch {
        Branch::Low => {
            let den = &(&(&qi(2) * &vq) * &vq - &(&qi(6) * &vq)) + &qi(3);
            let theta = &(&(&s + &one) * &(&one - &vq)) / &(&s - &(&vq * &(&s - &one)));
            let x_num = &(&qi(3) - &(&(&(&qi(2) * &(&one + &s)) * &vq) * &vq)) - &(&(&qi(3) - &s) * &vq);
            let x = &x_num / &(&qi(2) * &den);
            let y_num = &(&(&(&(&qi(2) * &(&one + &s)) * &vq) * &vq) - &(&(&one + &(&qi(3) * &s)) * &vq)) + &s;
            let y = &y_num / &den;
            (theta, x, y)
        }
        Branch::High => {
            let omv = &one - &vq;
            let theta = &(&(&qi(3) - &s) - &(&(&qi(2) * &vq) * &(&qi(2) - &s))) / &(&qi(2) * &omv);
            let tvm1 = &(&qi(2) * &vq) - &one;
            let x = &(&(&one + &(&qi(2) * &vq)) - &(&s * &tvm1)) / &(&qi(4) * &omv);
            let y = &(&tvm1 * &(&s - &one)) / &(&qi(2) * &omv);
            (theta, x, y)
        }
    };
    Ok(UniformCertificate {
        branch: Some(branch),
        theta: perturb(theta, CertConstant::Theta, p),
        potential: Some(perturb(x, CertConstant::Potential, p)),
        nash: perturb(y, CertConstant::Nash, p),
    })
}

/// `x(K(K+1) − 2vK − O(O+1) + 2vO) + y(K(K−v) − O(K+1−v)) + θO² − K²`.
pub fn gamma_v_pos_slack(v: &Rational, cert: &UniformCertificate) -> BiQuad {
    let x = cert.potential.clone().unwrap_or_else(QuadExt::zero);
    let y = &cert.nash;
    let vq = q(v.clone());
    let one = qi(1);
    let two_v = &qi(2) * &vq;
    BiQuad {
        kk: &(&x + y) - &one,
        ko: -y.clone(),
        oo: &cert.theta - &x,
        k: &(&x * &(&one - &two_v)) - &(y * &vq),
        o: &(&x * &(&two_v - &one)) + &(y * &(&vq - &one)),
        c: QuadExt::zero(),
    }
}

/// The reduced polynomial `f` and the factor `λ` with `slack = λ·f`.
/// `λ` is negative on the low branch and positive on the high branch.
pub fn gamma_v_pos_reduced(v: &Rational, branch: Branch) -> (BiQuad, QuadExt) {
    let s = sqrt3();
    let vq = q(v.clone());
    let one = qi(1);
    let two_v_m1 = &(&qi(2) * &vq) - &one;
    match branch {
        Branch::Low => {
            // f = K²((√3−1)v+3−2√3) − K(2O−√3)((1+√3)v−√3) + O(O−1)((5+3√3)v−3−2√3)
            let a = &(&(&(&s - &one) * &vq) + &qi(3)) - &(&qi(2) * &s);
            let b = &(&(&one + &s) * &vq) - &s;
            let c = &(&(&(&qi(5) + &(&qi(3) * &s)) * &vq) - &qi(3)) - &(&qi(2) * &s);
            let f = BiQuad {
                kk: a,
                ko: -(&qi(2) * &b),
                oo: c.clone(),
                k: &s * &b,
                o: -c,
                c: QuadExt::zero(),
            };
            let den = &(&(&qi(2) * &vq) * &vq - &(&qi(6) * &vq)) + &qi(3);
            (f, &two_v_m1 / &(&qi(2) * &den))
        }
        Branch::High => {
            // f = K²(1+√3) − K(2O(√3−1)+1+√3) + O(O(3√3−5)+3−√3)
            let f = BiQuad {
                kk: &one + &s,
                ko: -(&qi(2) * &(&s - &one)),
                oo: &(&qi(3) * &s) - &qi(5),
                k: -(&one + &s),
                o: &qi(3) - &s,
                c: QuadExt::zero(),
            };
            (f, &(&one - &(&qi(2) * &vq)) / &(&qi(4) * &(&vq - &one)))
        }
    }
}

/// Discriminant (in `K`) of the reduced polynomial, at congestion `O`.
fn discriminant_of(f: &BiQuad, oe: i64) -> QuadExt {
    let o = Rational::from(oe);
    let a = f.kk.clone();
    let b = &f.ko.scale(&o) + &f.k;
    let c = &f.oo.scale(&(&o * &o)) + &f.o.scale(&o);
    &(&b * &b) - &(&(&qi(4) * &a) * &c)
}

/// The low-branch discriminant expression as printed alongside the proof:
/// `v²(18(2+√3) − (32+16√3)O) + v((48+16√3)O − 18(3+√3)) − 3(8O−9)`.
pub fn gamma_v_pos_low_discriminant_printed(v: &Rational, oe: i64) -> QuadExt {
    let s = sqrt3();
    let vq = q(v.clone());
    let o = qi(oe);
    let t1 = &(&qi(18) * &(&qi(2) + &s)) - &(&(&qi(32) + &(&qi(16) * &s)) * &o);
    let t2 = &(&(&qi(48) + &(&qi(16) * &s)) * &o) - &(&qi(18) * &(&qi(3) + &s));
    let t3 = &qi(3) * &(&(&qi(8) * &o) - &qi(9));
    &(&(&(&vq * &vq) * &t1) + &(&vq * &t2)) - &t3
}

/// `4O(1−√3) + 2 + √3`.
pub fn gamma_v_pos_high_discriminant_printed(oe: i64) -> QuadExt {
    let s = sqrt3();
    &(&(&qi(4 * oe) * &(&qi(1) - &s)) + &qi(2)) + &s
}

/// Lattice check of the stability certificate at level `v`, with identity and
/// discriminant checks for `O ∈ [2, 100]`.
pub fn check_gamma_v_pos_certificate(
    v: &Rational,
    kmax: i64,
    omax: i64,
    p: Option<&Perturbation>,
) -> Result<CertificateReport, CertificateError> {
    let cert = gamma_v_pos_certificate(v, p)?;
    let branch = cert.branch.expect("stability certificates carry a branch");
    let slack = gamma_v_pos_slack(v, &cert);
    let grid = check_grid(&slack, kmax, omax);
    let (f, lambda) = gamma_v_pos_reduced(v, branch);
    let expected = f.scale(&lambda);
    let unperturbed = gamma_v_pos_certificate(v, None)?;
    let identity = slack == expected
        && cert.theta == unperturbed.theta
        && cert.potential.as_ref().is_none_or(|x| x.signum() >= 0)
        && cert.nash.signum() >= 0;
    let disc_ok = (2..=100).all(|oe| {
        let computed = discriminant_of(&f, oe).signum() <= 0;
        let printed = match branch {
            Branch::Low => gamma_v_pos_low_discriminant_printed(v, oe).signum() <= 0,
            Branch::High => gamma_v_pos_high_discriminant_printed(oe).signum() <= 0,
        };
        computed && printed
    });
    Ok(CertificateReport {
        name: format!("gammav pos v={v} ({})", branch.name()),
        theta: cert.theta,
        grid,
        identity,
        discriminant: Some(disc_ok),
    })
}

/// The stability bound at level `v` (without building a full certificate).
pub fn gamma_v_pos_bound(v: &Rational) -> Result<QuadExt, CertificateError> {
    Ok(gamma_v_pos_certificate(v, None)?.theta)
}

/// Closed-form anarchy certificate for levels in `[vund, vbar]` (rational).
pub fn gamma_v_poa_certificate(
    vbar: &Rational,
    vund: &Rational,
    branch: Branch,
    p: Option<&Perturbation>,
) -> Result<UniformCertificate, CertificateError> {
    check_unit("vbar", vbar)?;
    check_unit("vund", vund)?;
    if vund > vbar {
        return Err(CertificateError::Ordering { vund: vund.to_string(), vbar: vbar.to_string() });
    }
    let half = rat(1, 2);
    let one = Rational::one();
    let (theta, x) = match branch {
        Branch::High => {
            if *vbar < half {
                return Err(CertificateError::OutOfRange { name: "vbar (high branch needs >= 1/2)", value: vbar.to_string() });
            }
            if vbar.is_one() {
                return Err(CertificateError::Undefined { what: "vbar = 1".into() });
            }
            let den = &one - vbar;
            ((Rational::from(2) - vund) / &den, one.clone() / den)
        }
        Branch::Low => {
            if *vbar > half {
                return Err(CertificateError::OutOfRange { name: "vbar (low branch needs <= 1/2)", value: vbar.to_string() });
            }
            let den = Rational::from(2) - vbar;
            (
                (Rational::from(5) + Rational::from(2) * vbar - Rational::from(3) * vund) / &den,
                Rational::from(3) / den,
            )
        }
    };
    Ok(UniformCertificate {
        branch: Some(branch),
        theta: perturb(q(theta), CertConstant::Theta, p),
        potential: None,
        nash: perturb(q(x), CertConstant::Nash, p),
    })
}

/// `x·K(K − v̄) − x·O(K + 1 − v_) + θO² − K²`.
pub fn gamma_v_poa_slack(vbar: &Rational, vund: &Rational, cert: &UniformCertificate) -> BiQuad {
    let x = &cert.nash;
    let one = qi(1);
    BiQuad {
        kk: x - &one,
        ko: -x.clone(),
        oo: cert.theta.clone(),
        k: -(x * &q(vbar.clone())),
        o: -(x * &(&one - &q(vund.clone()))),
        c: QuadExt::zero(),
    }
}

/// `(denominator, E)` with `denominator · slack = −E` for the reduced expression `E`.
pub fn gamma_v_poa_reduced(vbar: &Rational, vund: &Rational, branch: Branch) -> (QuadExt, BiQuad) {
    let (vb, vu) = (q(vbar.clone()), q(vund.clone()));
    match branch {
        // v_ O(O−1) + v̄ K(1−K) + O(K − 2O + 1)
        Branch::High => (
            &qi(1) - &vb,
            BiQuad {
                kk: -vb.clone(),
                ko: qi(1),
                oo: &vu - &qi(2),
                k: vb,
                o: &qi(1) - &vu,
                c: QuadExt::zero(),
            },
        ),
        // 3v_ O(O−1) − v̄(K² − 3K + 2O²) − K² + 3KO − O(5O − 3)
        Branch::Low => (
            &qi(2) - &vb,
            BiQuad {
                kk: -(&vb + &qi(1)),
                ko: qi(3),
                oo: &(&(&qi(3) * &vu) - &(&qi(2) * &vb)) - &qi(5),
                k: &qi(3) * &vb,
                o: &qi(3) - &(&qi(3) * &vu),
                c: QuadExt::zero(),
            },
        ),
    }
}

/// Discriminant expression (in `K`) printed with each anarchy branch.
pub fn gamma_v_poa_discriminant_printed(vbar: &Rational, vund: &Rational, branch: Branch, oe: i64) -> Rational {
    let o = Rational::from(oe);
    let (vb, vu) = (vbar.clone(), vund.clone());
    match branch {
        Branch::High => {
            Rational::from(4) * &vu * &vb * &o * (&o - Rational::one()) + &vb * &vb
                + Rational::from(2) * &vb * &o * (Rational::from(3) - Rational::from(4) * &o)
                + &o * &o
        }
        Branch::Low => {
            Rational::from(12) * &vu * (Rational::one() + &vb) * &o * (&o - Rational::one())
                + &vb * &vb * (Rational::from(9) - Rational::from(8) * &o * &o)
                + Rational::from(2) * &vb * &o * (Rational::from(15) - Rational::from(14) * &o)
                - &o * (Rational::from(11) * &o - Rational::from(12))
        }
    }
}

pub fn check_gamma_v_poa_certificate(
    vbar: &Rational,
    vund: &Rational,
    kmax: i64,
    omax: i64,
    branch: Branch,
    p: Option<&Perturbation>,
) -> Result<CertificateReport, CertificateError> {
    let cert = gamma_v_poa_certificate(vbar, vund, branch, p)?;
    let slack = gamma_v_poa_slack(vbar, vund, &cert);
    let grid = check_grid(&slack, kmax, omax);
    let (den, expr) = gamma_v_poa_reduced(vbar, vund, branch);
    let unperturbed = gamma_v_poa_certificate(vbar, vund, branch, None)?;
    let identity = slack.scale(&den) == expr.scale(&qi(-1)) && cert.theta == unperturbed.theta;
    let disc_ok = (2..=100).all(|oe| {
        let printed = gamma_v_poa_discriminant_printed(vbar, vund, branch, oe);
        let computed = discriminant_of(&expr, oe);
        // Leading K coefficient of the reduced expression is negative, so a
        // non-positive discriminant keeps the expression <= 0 for every K.
        q(printed.clone()) == computed && !printed.is_positive()
    });
    Ok(CertificateReport {
        name: format!("gammav poa vbar={vbar} vund={vund} ({})", branch.name()),
        theta: cert.theta,
        grid,
        identity,
        discriminant: Some(disc_ok),
    })
}

/// The default stability sample `v ∈ {0, 1/8, …, 7/8}`.
pub fn default_pos_levels() -> Vec<Rational> {
    (0..8).map(|k| rat(k, 8)).collect()
}

/// The default anarchy lattice: `v_ ≤ v̄` on the `1/8` grid below 1, with the
/// branch containing `v̄` (both branches at `v̄ = 1/2`).
pub fn default_poa_lattice() -> Vec<(Rational, Rational, Branch)> {
    let mut out = Vec::new();
    for b in 0..8 {
        for u in 0..=b {
            let (vbar, vund) = (rat(b, 8), rat(u, 8));
            if b <= 4 {
                out.push((vbar.clone(), vund.clone(), Branch::Low));
            }
            if b >= 4 {
                out.push((vbar, vund, Branch::High));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::build_dual;
    use crate::numerics::qeval;

    #[test]
    fn poa_173_examples() {
        let rep = check_poa_grid_17_3(100, 100, None).unwrap();
        assert!(rep.passed());
        assert!(rep.grid.tight.contains(&(3, 1)));
        assert!(rep.grid.tight.contains(&(0, 0)));
        let small = check_poa_grid_17_3(5, 5, None).unwrap();
        assert!(small.passed());
        // 45 - 35 + 17 = 27 = 3 * 9.
        assert_eq!(poa_17_3_target().eval(3, 1), QuadExt::zero());
    }

    #[test]
    fn poa_173_perturbations_fail() {
        for (c, amt) in [(CertConstant::Theta, rat(-1, 100)), (CertConstant::Nash, rat(1, 100)), (CertConstant::Theta, rat(1, 100))] {
            let rep = check_poa_grid_17_3(20, 20, Some(&Perturbation { constant: c, amount: amt })).unwrap();
            assert!(!rep.passed(), "{c:?}");
        }
    }

    #[test]
    fn pos_special_values() {
        let t0 = gamma_v_pos_bound(&rat(0, 1)).unwrap();
        let expected = QuadExt::new(rat(1, 1), rat(1, 3), 3).unwrap();
        assert_eq!(t0, expected);
        assert!(qeval(&t0, 30).starts_with("1.57735026"));
        let low = gamma_v_pos_certificate(&rat(1, 2), None).unwrap();
        assert_eq!(low.theta, QuadExt::one());
        let high_theta = {
            let s = sqrt3();
            let v = q(rat(1, 2));
            &(&(&qi(3) - &s) - &(&(&qi(2) * &v) * &(&qi(2) - &s))) / &(&qi(2) * &(&qi(1) - &v))
        };
        assert_eq!(high_theta, QuadExt::one());
        assert!(gamma_v_pos_certificate(&rat(1, 1), None).is_err());
    }

    #[test]
    fn pos_grids_small() {
        for v in default_pos_levels() {
            let rep = check_gamma_v_pos_certificate(&v, 30, 30, None).unwrap();
            assert!(rep.passed(), "{}: {:?}", rep.name, rep);
        }
    }

    #[test]
    fn pos_oracle_quarter() {
        // Independent oracle: sign of (2v−1)·f from the factored form.
        let v = rat(1, 4);
        let cert = gamma_v_pos_certificate(&v, None).unwrap();
        let slack = gamma_v_pos_slack(&v, &cert);
        let (f, _) = gamma_v_pos_reduced(&v, Branch::Low);
        for ke in 0..=40 {
            for oe in 0..=40 {
                let s1 = slack.eval(ke, oe).signum();
                let s2 = -f.eval(ke, oe).signum();
                assert_eq!(s1, s2, "({ke},{oe})");
            }
        }
    }

    #[test]
    fn poa_examples() {
        let c = gamma_v_poa_certificate(&rat(0, 1), &rat(0, 1), Branch::Low, None).unwrap();
        assert_eq!(c.theta, q(rat(5, 2)));
        let c = gamma_v_poa_certificate(&rat(1, 2), &rat(1, 2), Branch::Low, None).unwrap();
        assert_eq!(c.theta, q(rat(3, 1)));
        let c = gamma_v_poa_certificate(&rat(3, 4), &rat(1, 2), Branch::High, None).unwrap();
        assert_eq!(c.theta, q(rat(6, 1)));
        assert!(gamma_v_poa_certificate(&rat(1, 1), &rat(0, 1), Branch::High, None).is_err());
        assert!(gamma_v_poa_certificate(&rat(1, 4), &rat(1, 2), Branch::Low, None).is_err());
        for (vb, vu, br) in default_poa_lattice() {
            let rep = check_gamma_v_poa_certificate(&vb, &vu, 25, 25, br, None).unwrap();
            assert!(rep.passed(), "{}: {:?}", rep.name, rep);
        }
    }

    #[test]
    fn infeasible_certificate_detected() {
        use crate::game::{Game, Latency, Profile, Strategy};
        let g = Game::new(
            vec![Latency::linear(rat(1, 1)), Latency::linear(rat(1, 1))],
            vec![vec![Strategy::new(vec![0]), Strategy::new(vec![1])]; 2],
        )
        .unwrap();
        let ctx = crate::context::SocialContext::identity(2);
        let dual = build_dual(&g, &ctx, &Profile::uniform(2, 0), &Profile::uniform(2, 1)).unwrap();
        let weak = DualCertificate::uniform(QuadExt::one(), None, QuadExt::zero(), 2);
        assert!(matches!(check_dual_feasible(&dual, &weak).unwrap(), DualCheck::Violated { constraint: 0, .. }));
        let strong = poa_17_3_certificate(None).for_players(2);
        assert!(check_dual_feasible(&dual, &strong).unwrap().is_feasible());
        let short = DualCertificate::uniform(QuadExt::one(), None, QuadExt::zero(), 1);
        assert!(check_dual_feasible(&dual, &short).is_err());
    }
}
