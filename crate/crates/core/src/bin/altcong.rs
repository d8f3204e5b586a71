use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use altcong::certificates::{
    check_gamma_v_poa_certificate, check_gamma_v_pos_certificate, check_poa_grid_17_3, default_poa_lattice,
    default_pos_levels, CertConstant, CertificateReport, Perturbation,
};
use altcong::equilibria::{
    best_response_dynamics, enumerate_nash, ratios, social_optimum, DynamicsKind, Policy, DEFAULT_BUDGET,
};
use altcong::gamefile::{parse_game_file, GameFile};
use altcong::game::social_cost;
use altcong::instances::{default_delta, generate, Branch, ContextKind, InstanceSpec, RandomSpec};
use altcong::lp::{
    build_dual, build_gamma_v_poa_dual, build_gamma_v_poa_primal, build_gamma_v_pos_dual, build_gamma_v_pos_primal,
    build_primal, export_lp,
};
use altcong::potential::{check_exact_potential, PotentialKind};
use altcong::verify::{run_verify, VerifyConfig};
use altcong::{qeval, Profile, Rational};

type CliResult = Result<bool, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "altcong", version, about = "Exact analysis of linear congestion games with altruistic players")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GameArgs {
    /// Game file.
    file: PathBuf,
    /// Refuse to enumerate more profiles than this.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a game file and print its canonical form.
    #[command(alias = "emit")]
    Parse { file: PathBuf },
    /// Print NE count, optimum, price of anarchy and price of stability.
    Analyze(GameArgs),
    /// List all pure Nash equilibria.
    Nash(GameArgs),
    /// Print a social optimum.
    Optimum(GameArgs),
    /// Run improvement dynamics from a start profile.
    Dynamics {
        file: PathBuf,
        /// Comma-separated 1-based strategy indices, e.g. 1,1,2.
        #[arg(long)]
        start: String,
        #[arg(long, default_value = "first-improver")]
        policy: Policy,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Check that a potential function is exact on every deviation.
    Potential {
        #[command(flatten)]
        game: GameArgs,
        /// rs, rs-forced or gammav.
        #[arg(long, default_value = "rs")]
        kind: PotentialKind,
    },
    /// Check a closed-form certificate on an integer lattice.
    Certify {
        #[arg(value_enum)]
        which: CertKind,
        /// KMAX OMAX.
        #[arg(long, num_args = 2, value_names = ["KMAX", "OMAX"], default_values_t = [100, 100])]
        grid: Vec<i64>,
        /// Altruism level for gammav-pos (default: 0, 1/8, ..., 7/8).
        #[arg(long)]
        v: Option<Rational>,
        /// Upper level for gammav-poa.
        #[arg(long, requires = "vund")]
        vbar: Option<Rational>,
        /// Lower level for gammav-poa.
        #[arg(long, requires = "vbar")]
        vund: Option<Rational>,
        /// Corrupt one constant, e.g. theta=-1/100.
        #[arg(long)]
        perturb: Option<PerturbArg>,
    },
    /// Generate a named or random instance as a game file.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Output path (default: standard output).
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Write the primal or dual program for a pair of profiles.
    ExportLp {
        file: PathBuf,
        /// K O, each as comma-separated 1-based strategy indices.
        #[arg(long, num_args = 2, value_names = ["K", "O"])]
        profiles: Vec<String>,
        #[arg(long)]
        dual: bool,
        /// Build the uniform-level stability program at this level.
        #[arg(long, conflicts_with = "gammav_poa")]
        gammav_pos: Option<Rational>,
        /// Build the anarchy program for levels VBAR VUND.
        #[arg(long, num_args = 2, value_names = ["VBAR", "VUND"])]
        gammav_poa: Option<Vec<Rational>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the full verification suite.
    #[command(alias = "verify")]
    VerifyPaper {
        #[arg(long, num_args = 2, value_names = ["KMAX", "OMAX"], default_values_t = [100, 100])]
        grid: Vec<i64>,
        /// Replacement ne2 slopes, nine comma-separated rationals.
        #[arg(long, value_delimiter = ',')]
        ne2_alpha: Option<Vec<Rational>>,
        /// Add to one ne2 slope, e.g. 8=1 adds 1 to the eighth.
        #[arg(long, conflicts_with = "ne2_alpha")]
        corrupt_ne2_alpha: Option<String>,
        /// Corrupt one certificate constant, e.g. nash=1/100.
        #[arg(long)]
        perturb: Option<PerturbArg>,
        /// Random instances per potential sweep.
        #[arg(long, default_value_t = 100)]
        sweep: u64,
        /// Append wall-clock time to each line.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CertKind {
    Poa173,
    GammavPos,
    GammavPoa,
}

#[derive(Subcommand)]
enum Family {
    Ne1,
    Ne2,
    Tree {
        #[arg(long)]
        h: u32,
    },
    PosLb {
        #[arg(long, default_value_t = 2)]
        n1: usize,
        #[arg(long, default_value_t = 1)]
        n2: usize,
        #[arg(long, default_value_t = default_delta())]
        delta: Rational,
    },
    GammavPosLb {
        #[arg(long)]
        v: Rational,
        #[arg(long, default_value_t = 3)]
        n1: usize,
        #[arg(long, default_value_t = 1)]
        n2: usize,
        #[arg(long, default_value_t = default_delta())]
        delta: Rational,
        /// low or high (default: by v).
        #[arg(long)]
        branch: Option<Branch>,
    },
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        players: usize,
        #[arg(long, default_value_t = 3)]
        strategies: usize,
        #[arg(long, default_value_t = 6)]
        resources: usize,
        #[arg(long, default_value_t = 10)]
        coeff_bound: i64,
        /// identity, restricted-symmetric, restricted-any, gammav or arbitrary.
        #[arg(long, default_value = "restricted-symmetric")]
        context: ContextKind,
        /// Draw latency offsets as well as slopes.
        #[arg(long)]
        beta: bool,
    },
}

#[derive(Clone)]
struct PerturbArg(Perturbation);

impl std::str::FromStr for PerturbArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, amount) = s.split_once('=').ok_or("expected CONSTANT=AMOUNT, e.g. theta=-1/100")?;
        let constant: CertConstant = name.parse()?;
        let amount: Rational = amount.parse().map_err(|e| format!("{e}"))?;
        Ok(Self(Perturbation { constant, amount }))
    }
}

fn load(path: &Path) -> Result<GameFile, Box<dyn Error>> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse_game_file(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn parse_profile(text: &str, file: &GameFile) -> Result<Profile, Box<dyn Error>> {
    let s = Profile::parse_one_based(text).ok_or_else(|| format!("bad profile '{text}'"))?;
    file.game.validate_profile(&s)?;
    Ok(s)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Box<dyn Error>> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn grid(g: &[i64]) -> Result<(i64, i64), Box<dyn Error>> {
    match g {
        [k, o] if *k >= 0 && *o >= 0 => Ok((*k, *o)),
        _ => Err("grid bounds must be two non-negative integers".into()),
    }
}

fn print_cert(rep: &CertificateReport) -> bool {
    let status = if rep.passed() { "PASS" } else { "FAIL" };
    let mut line = format!("{status} {} theta={} (~{}) cells={}", rep.name, rep.theta, qeval(&rep.theta, 40), rep.grid.cells);
    if let Some((k, o, d)) = rep.grid.counterexample {
        line.push_str(&format!(" counterexample K={k} O={o}"));
        if let Some(d) = d {
            line.push_str(&format!(" delta={d}"));
        }
    }
    if !rep.identity {
        line.push_str(" identity=false");
    }
    if rep.discriminant == Some(false) {
        line.push_str(" discriminant=false");
    }
    let tight: Vec<String> = rep.grid.tight.iter().take(8).map(|(k, o)| format!("({k},{o})")).collect();
    if !tight.is_empty() {
        line.push_str(&format!(" tight={}", tight.join(",")));
    }
    println!("{line}");
    rep.passed()
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Parse { file } => {
            print!("{}", load(&file)?.emit());
            Ok(true)
        }
        Command::Analyze(args) => {
            let f = load(&args.file)?;
            let rep = ratios(&f.game, &f.context, args.budget)?;
            println!("profiles: {}", rep.profile_count);
            println!("NE: {}", rep.ne_list.len());
            for (s, c) in rep.ne_list.iter().zip(&rep.ne_costs) {
                println!("  {s} SUM = {c}");
            }
            println!("optimum: {} SUM = {}", rep.opt_profile, rep.opt_value);
            println!("PoA: {}", rep.poa);
            println!("PoS: {}", rep.pos);
            Ok(true)
        }
        Command::Nash(args) => {
            let f = load(&args.file)?;
            let ne = enumerate_nash(&f.game, &f.context, args.budget)?;
            println!("NE: {}", ne.len());
            for s in ne {
                println!("{s} SUM = {}", social_cost(&f.game, &s)?);
            }
            Ok(true)
        }
        Command::Optimum(args) => {
            let f = load(&args.file)?;
            let (s, v) = social_optimum(&f.game, args.budget)?;
            println!("{s} SUM = {v}");
            Ok(true)
        }
        Command::Dynamics { file, start, policy, max_steps } => {
            let f = load(&file)?;
            let s = parse_profile(&start, &f)?;
            let out = best_response_dynamics(&f.game, &f.context, &s, policy, max_steps)?;
            println!("{}", out.profiles[0]);
            for (m, p) in out.moves.iter().zip(&out.profiles[1..]) {
                println!("  {m} => {p}");
            }
            match out.kind {
                DynamicsKind::Converged => println!("converged: {} is a pure NE", out.final_profile()),
                DynamicsKind::Cycle => {
                    let c = out.cycle().expect("cycle");
                    let names: Vec<String> = c.iter().map(Profile::to_string).collect();
                    println!("cycle of length {}: {}", c.len() - 1, names.join(" -> "));
                }
                DynamicsKind::Truncated => println!("stopped after {max_steps} steps"),
            }
            Ok(true)
        }
        Command::Potential { game, kind } => {
            let f = load(&game.file)?;
            let rep = check_exact_potential(&f.game, &f.context, kind, game.budget)?;
            match &rep.witness {
                None => println!("PASS exact on {} deviations", rep.deviations_checked),
                Some(w) => println!("FAIL {w}"),
            }
            Ok(rep.passed())
        }
        Command::Certify { which, grid: g, v, vbar, vund, perturb } => {
            let (kmax, omax) = grid(&g)?;
            let p = perturb.as_ref().map(|p| &p.0);
            let mut ok = true;
            match which {
                CertKind::Poa173 => ok &= print_cert(&check_poa_grid_17_3(kmax, omax, p)?),
                CertKind::GammavPos => {
                    let levels = v.map(|v| vec![v]).unwrap_or_else(default_pos_levels);
                    for v in levels {
                        ok &= print_cert(&check_gamma_v_pos_certificate(&v, kmax, omax, p)?);
                    }
                }
                CertKind::GammavPoa => {
                    let lattice = match (vbar, vund) {
                        (Some(vb), Some(vu)) => {
                            let half = altcong::rat(1, 2);
                            let mut l = Vec::new();
                            if vb <= half {
                                l.push((vb.clone(), vu.clone(), Branch::Low));
                            }
                            if vb >= half {
                                l.push((vb, vu, Branch::High));
                            }
                            l
                        }
                        _ => default_poa_lattice(),
                    };
                    for (vb, vu, br) in lattice {
                        ok &= print_cert(&check_gamma_v_poa_certificate(&vb, &vu, kmax, omax, br, p)?);
                    }
                }
            }
            Ok(ok)
        }
        Command::Gen { family, output } => {
            let spec = match family {
                Family::Ne1 => InstanceSpec::Ne1,
                Family::Ne2 => InstanceSpec::Ne2,
                Family::Tree { h } => InstanceSpec::TreeLb { h },
                Family::PosLb { n1, n2, delta } => InstanceSpec::PosLb { n1, n2, delta },
                Family::GammavPosLb { v, n1, n2, delta, branch } => {
                    let branch = branch.unwrap_or_else(|| Branch::for_v(&v));
                    InstanceSpec::GammaVPosLb { v, n1, n2, delta, branch }
                }
                Family::Random { seed, players, strategies, resources, coeff_bound, context, beta } => {
                    InstanceSpec::Random(RandomSpec {
                        seed,
                        players,
                        max_strategies: strategies,
                        resources,
                        coeff_bound,
                        ctx_kind: context,
                        with_beta: beta,
                    })
                }
            };
            let inst = generate(&spec)?;
            let mut text = GameFile::new(inst.game, inst.context)?.emit_named(&inst.name);
            if let Some(k) = &inst.k {
                text.push_str(&format!("# K = {k}\n"));
            }
            if let Some(o) = &inst.o {
                text.push_str(&format!("# O = {o}\n"));
            }
            write_out(output.as_deref(), &text)?;
            Ok(true)
        }
        Command::ExportLp { file, profiles, dual, gammav_pos, gammav_poa, output } => {
            let f = load(&file)?;
            let [k, o] = &profiles[..] else {
                return Err("--profiles needs K and O".into());
            };
            let (k, o) = (parse_profile(k, &f)?, parse_profile(o, &f)?);
            let lp = match (gammav_pos, gammav_poa.as_deref()) {
                (Some(v), _) if dual => build_gamma_v_pos_dual(&f.game, &v, &k, &o)?,
                (Some(v), _) => build_gamma_v_pos_primal(&f.game, &v, &k, &o)?,
                (None, Some([vb, vu])) if dual => build_gamma_v_poa_dual(&f.game, vb, vu, &k, &o)?,
                (None, Some([vb, vu])) => build_gamma_v_poa_primal(&f.game, vb, vu, &k, &o)?,
                (None, Some(_)) => return Err("--gammav-poa needs VBAR and VUND".into()),
                (None, None) if dual => build_dual(&f.game, &f.context, &k, &o)?,
                (None, None) => build_primal(&f.game, &f.context, &k, &o)?,
            };
            write_out(output.as_deref(), &export_lp(&lp))?;
            Ok(true)
        }
        Command::VerifyPaper { grid: g, ne2_alpha, corrupt_ne2_alpha, perturb, sweep, timings } => {
            let (kmax, omax) = grid(&g)?;
            let ne2_alpha = match corrupt_ne2_alpha {
                Some(spec) => Some(corrupted_alpha(&spec)?),
                None => ne2_alpha,
            };
            let cfg = VerifyConfig { kmax, omax, ne2_alpha, perturbation: perturb.map(|p| p.0), sweep };
            let rep = run_verify(&cfg);
            print!("{}", rep.render(timings));
            Ok(rep.passed())
        }
    }
}

const NE2_ALPHA: [i64; 9] = [10, 1, 4, 392, 98, 384, 294, 1052, 160];

/// `E=AMOUNT`: add `AMOUNT` (default 1) to the `E`-th ne2 slope.
fn corrupted_alpha(spec: &str) -> Result<Vec<Rational>, Box<dyn Error>> {
    let (e, amount) = spec.split_once('=').unwrap_or((spec, "1"));
    let e: usize = e.parse().map_err(|_| format!("bad resource index '{e}'"))?;
    if !(1..=9).contains(&e) {
        return Err(format!("ne2 has resources 1..=9, got {e}").into());
    }
    let amount: Rational = amount.parse()?;
    let mut alpha: Vec<Rational> = NE2_ALPHA.iter().map(|&a| Rational::from(a)).collect();
    alpha[e - 1] += amount;
    Ok(alpha)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
