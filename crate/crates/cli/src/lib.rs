//! Command-line front end: every verification as a subcommand, reports as
//! JSON lines or one text line each.

pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use coupled_painleve::backlund::{
    check_generator_symmetry, explicit_generator, generator_names, translation_shift,
    verify_regeneration, verify_word, WordExpectation,
};
use coupled_painleve::characterize::characterize;
use coupled_painleve::charts::{chart_names, verify_chart};
use coupled_painleve::divisors::{
    certify_all, divisor_table, first_integral_search, integral_report, verify_reductions,
    verify_straightening,
};
use coupled_painleve::numerics::{self, presets, IntegratorConfig, NumericState, TwoFloat};
use coupled_painleve::sampling::DEFAULT_SEED;
use coupled_painleve::systems::{
    build_auto_subsystem, hamiltonian_flow_report, verify_vector_field,
};
use coupled_painleve::{
    build_system, Error, HamiltonianSystem, Status, SystemKind, VerificationReport,
};

use config::ConfigFile;

/// Overrides the default seed when no `--seed` is given.
pub const SEED_ENV: &str = "PAINLEVE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "painleve-verify",
    version,
    about = "Exact and numerical checks for the coupled Painleve systems D3(2) and D5(2)"
)]
pub struct Cli {
    /// Output format (default text).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// key = value file supplying defaults for any long option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symbolic verifications.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Recover the Hamiltonian from the holomorphy conditions.
    Characterize {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        t_deg: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated chart subset.
        #[arg(long)]
        charts: Option<String>,
    },
    /// Polynomial first integrals up to a degree.
    SearchIntegrals {
        /// d3, d5 or auto (the autonomous subsystem).
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        max_deg: Option<u32>,
        #[arg(long)]
        t_deg: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Integrate the flow from a state.
    Integrate {
        #[arg(long)]
        system: Option<String>,
        /// Comma-separated parameters; the last may be left to the normalization.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Comma-separated initial values in q1,p1,q2,p2,... order.
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t_start: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<String>,
        #[arg(long)]
        rtol: Option<f64>,
        #[arg(long)]
        atol: Option<f64>,
        #[arg(long)]
        max_step: Option<f64>,
        /// Write the trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Integrate-then-map against map-then-integrate for a generator.
    CheckBacklund {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        generator: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<String>,
    },
    /// Conservation, divisor drift and convergence checks.
    CheckNumerics {
        #[arg(long)]
        system: Option<String>,
    },
    /// Every check in a fixed order.
    Suite {
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Vector field against the printed equations.
    VectorField {
        #[arg(long)]
        system: Option<String>,
    },
    Symmetry {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        generator: Option<String>,
    },
    /// Reflections rebuilt from their invariant divisors.
    Regenerate {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        generator: Option<String>,
    },
    /// Involutions and translations, or a single word.
    Relations {
        #[arg(long)]
        system: Option<String>,
        /// Comma-separated word, applied left to right.
        #[arg(long)]
        word: Option<String>,
        /// Fail unless the word is the identity.
        #[arg(long)]
        expect_identity: bool,
    },
    Divisors {
        #[arg(long)]
        system: Option<String>,
    },
    /// Reductions on the invariant divisors of d3.
    Reductions,
    /// The straightening map of d3.
    Eq13,
    Holomorphy {
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        chart: Option<String>,
    },
    /// dH/dt along the flow.
    HamiltonianFlow {
        #[arg(long)]
        system: Option<String>,
    },
}

/// Output of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Ctx {
    config: ConfigFile,
}

impl Ctx {
    fn pick(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.config.get(key).map(str::to_string))
    }

    fn require(&self, flag: Option<String>, key: &str) -> Result<String, Error> {
        self.pick(flag, key)
            .ok_or_else(|| Error::InvalidInput(format!("--{key} is required")))
    }

    fn parsed<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Error> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad value `{s}` for {key}"))),
            None => Ok(default),
        }
    }

    fn seed(&self, flag: Option<u64>) -> Result<u64, Error> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Some(s) = self.config.get("seed") {
            return s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad seed `{s}`")));
        }
        match std::env::var(SEED_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad {SEED_ENV} `{s}`"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    fn system(&self, flag: Option<String>) -> Result<HamiltonianSystem, Error> {
        let name = self.require(flag, "system")?;
        Ok(build_system(SystemKind::from_str(&name)?))
    }
}

fn parse_list(s: &str) -> Result<Vec<num_rational::BigRational>, Error> {
    s.split(',')
        .map(|x| {
            numerics::parse_number(x)
                .ok_or_else(|| Error::InvalidInput(format!("bad number `{}`", x.trim())))
        })
        .collect()
}

fn parse_scalar(s: &str) -> Result<num_rational::BigRational, Error> {
    numerics::parse_number(s).ok_or_else(|| Error::InvalidInput(format!("bad number `{s}`")))
}

/// A failed step as a report, so a batch keeps going.
fn error_report(task: &str, system: &str, subject: &str, e: &Error) -> VerificationReport {
    let mut r = VerificationReport::new(task, system, subject).with_status(Status::Fail);
    r.put("error", e.to_string());
    r
}

fn collect(
    out: &mut Vec<VerificationReport>,
    task: &str,
    system: &str,
    subject: &str,
    r: Result<VerificationReport, Error>,
) {
    out.push(r.unwrap_or_else(|e| error_report(task, system, subject, &e)));
}

fn verify(ctx: &Ctx, what: Verify) -> Result<Vec<VerificationReport>, Error> {
    let mut out = Vec::new();
    match what {
        Verify::VectorField { system } => out.push(verify_vector_field(&ctx.system(system)?)?),
        Verify::Symmetry { system, generator } => {
            let sys = ctx.system(system)?;
            let names = match ctx.pick(generator, "generator") {
                Some(g) => {
                    explicit_generator(&sys, &g)?;
                    vec![g]
                }
                None => generator_names(sys.kind.expect("d3 or d5"))
                    .into_iter()
                    .map(String::from)
                    .collect(),
            };
            for g in names {
                let m = explicit_generator(&sys, &g)?;
                collect(
                    &mut out,
                    "symmetry",
                    &sys.label,
                    &g,
                    check_generator_symmetry(&m, &sys),
                );
            }
        }
        Verify::Regenerate { system, generator } => {
            let sys = ctx.system(system)?;
            let indices: Vec<usize> = match ctx.pick(generator, "generator") {
                Some(g) => {
                    let i = g
                        .strip_prefix('s')
                        .and_then(|n| n.parse().ok())
                        .filter(|&i: &usize| i < divisor_table(&sys).len())
                        .ok_or(Error::UnknownGenerator(g.clone()))?;
                    vec![i]
                }
                None => divisor_table(&sys).iter().map(|e| e.index).collect(),
            };
            for i in indices {
                collect(
                    &mut out,
                    "regenerate",
                    &sys.label,
                    &format!("s{i}"),
                    verify_regeneration(&sys, i),
                );
            }
        }
        Verify::Relations {
            system,
            word,
            expect_identity,
        } => {
            let sys = ctx.system(system)?;
            match ctx.pick(word, "word") {
                Some(w) => {
                    let word: Vec<&str> = w.split(',').map(str::trim).collect();
                    for g in &word {
                        explicit_generator(&sys, g)?;
                    }
                    let expect = if expect_identity {
                        WordExpectation::Identity
                    } else {
                        WordExpectation::ReportOnly
                    };
                    out.push(verify_word(&sys, &word, expect)?);
                }
                None => out.extend(relations(&sys)),
            }
        }
        Verify::Divisors { system } => {
            let sys = ctx.system(system)?;
            out.extend(certify_all(&sys)?.iter().map(|c| c.to_report()));
        }
        Verify::Reductions => out.extend(verify_reductions(&build_system(SystemKind::D3))?),
        Verify::Eq13 => out.push(verify_straightening(&build_system(SystemKind::D3))?),
        Verify::Holomorphy { system, chart } => {
            let sys = ctx.system(system)?;
            match ctx.pick(chart, "chart") {
                Some(c) => out.push(verify_chart(&sys, &c)?),
                None => {
                    for c in chart_names(sys.kind.expect("d3 or d5")) {
                        collect(&mut out, "holomorphy", &sys.label, c, verify_chart(&sys, c));
                    }
                }
            }
        }
        Verify::HamiltonianFlow { system } => {
            let name = ctx.require(system, "system")?;
            let sys = named_system(&name)?;
            out.push(hamiltonian_flow_report(&sys)?);
        }
    }
    Ok(out)
}

fn named_system(name: &str) -> Result<HamiltonianSystem, Error> {
    match name {
        "auto" | "h2auto" => Ok(build_auto_subsystem()),
        other => Ok(build_system(SystemKind::from_str(other)?)),
    }
}

/// Involutions of every generator and the translation shifts.
pub fn relations(sys: &HamiltonianSystem) -> Vec<VerificationReport> {
    let kind = sys.kind.expect("d3 or d5");
    let mut out = Vec::new();
    for g in generator_names(kind) {
        collect(
            &mut out,
            "relations",
            &sys.label,
            &format!("{g},{g}"),
            verify_word(sys, &[g, g], WordExpectation::Identity),
        );
    }
    let translations: &[&str] = match kind {
        SystemKind::D3 => &["T1", "T2"],
        SystemKind::D5 => &["T1", "T2", "T3", "T4"],
    };
    for t in translations {
        collect(
            &mut out,
            "translation",
            &sys.label,
            t,
            translation_shift(sys, t),
        );
    }
    out
}

/// Numeric checks at the preset starts.
pub fn numeric_checks(sys: &HamiltonianSystem) -> Vec<VerificationReport> {
    let cfg = IntegratorConfig::default();
    let half = TwoFloat::from(0.5);
    let one = TwoFloat::from(1.0);
    let mut out = Vec::new();
    let label = sys.label.clone();
    if sys.kind.is_none() {
        let (auto, s0) = presets::auto_control();
        collect(
            &mut out,
            "conservation",
            &label,
            "hamiltonian",
            numerics::check_conservation(&auto, &s0, one, &cfg),
        );
        return out;
    }
    let kind = sys.kind.expect("checked");
    match presets::generic(sys) {
        Ok(g) => {
            for name in generator_names(kind) {
                let r = explicit_generator(sys, name)
                    .and_then(|m| numerics::check_backlund_numeric(&m, sys, &g, half, &cfg));
                collect(&mut out, "check-backlund", &label, name, r);
            }
            for e in divisor_table(sys) {
                let r = numerics::check_divisor_drift(
                    sys,
                    &e,
                    &g,
                    TwoFloat::from(presets::DRIFT_T_END),
                    &cfg,
                );
                collect(
                    &mut out,
                    "divisor-drift",
                    &label,
                    &format!("f{}", e.index),
                    r,
                );
            }
            collect(
                &mut out,
                "tolerance-halving",
                &label,
                "endpoint",
                numerics::check_tolerance_halving(sys, &g, one, 1e-10),
            );
        }
        Err(e) => out.push(error_report("numerics", &label, "generic", &e)),
    }
    let r = presets::witness(sys).and_then(|w| {
        numerics::check_nonconservation(sys, &w, TwoFloat::from(presets::WITNESS_T_END), &cfg)
    });
    collect(&mut out, "nonconservation", &label, "hamiltonian", r);
    out
}

/// Every check, in a fixed order.
pub fn suite(seed: u64) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for kind in [SystemKind::D3, SystemKind::D5] {
        let sys = build_system(kind);
        let label = sys.label.clone();
        collect(
            &mut out,
            "vector-field",
            &label,
            "hamiltonian",
            verify_vector_field(&sys),
        );
        for g in generator_names(kind) {
            let r = explicit_generator(&sys, g).and_then(|m| check_generator_symmetry(&m, &sys));
            collect(&mut out, "symmetry", &label, g, r);
        }
        for e in divisor_table(&sys) {
            collect(
                &mut out,
                "regenerate",
                &label,
                &format!("s{}", e.index),
                verify_regeneration(&sys, e.index),
            );
        }
        out.extend(relations(&sys));
        match certify_all(&sys) {
            Ok(cs) => out.extend(cs.iter().map(|c| c.to_report())),
            Err(e) => out.push(error_report("divisor", &label, "all", &e)),
        }
        if kind == SystemKind::D3 {
            match verify_reductions(&sys) {
                Ok(rs) => out.extend(rs),
                Err(e) => out.push(error_report("reduction", &label, "all", &e)),
            }
            collect(
                &mut out,
                "eq13",
                &label,
                "x2,y2,z2,w2",
                verify_straightening(&sys),
            );
        }
        for c in chart_names(kind) {
            collect(&mut out, "holomorphy", &label, c, verify_chart(&sys, c));
        }
        match characterize(kind, 2, 3, seed, None) {
            Ok(rs) => out.extend(rs),
            Err(e) => out.push(error_report("characterize", &label, "all", &e)),
        }
        collect(
            &mut out,
            "hamiltonian-flow",
            &label,
            "dH/dt",
            hamiltonian_flow_report(&sys),
        );
        let r = first_integral_search(&sys, 3, 2, 2, seed).and_then(|s| integral_report(&sys, &s));
        collect(&mut out, "first-integrals", &label, "deg<=3", r);
        out.extend(numeric_checks(&sys));
    }
    let auto = build_auto_subsystem();
    collect(
        &mut out,
        "hamiltonian-flow",
        &auto.label,
        "dH/dt",
        hamiltonian_flow_report(&auto),
    );
    let r = first_integral_search(&auto, 3, 0, 2, seed).and_then(|s| integral_report(&auto, &s));
    collect(&mut out, "first-integrals", &auto.label, "deg<=3", r);
    out.extend(numeric_checks(&auto));
    out
}

fn state_from(
    ctx: &Ctx,
    sys: &HamiltonianSystem,
    alpha: Option<String>,
    state: Option<String>,
    t: Option<String>,
) -> Result<NumericState, Error> {
    let alpha = numerics::complete_alpha(sys, &parse_list(&ctx.require(alpha, "alpha")?)?)?;
    let vars = parse_list(&ctx.require(state, "state")?)?;
    let t0 = match ctx.pick(t, "t-start") {
        Some(s) => parse_scalar(&s)?,
        None => num_rational::BigRational::from_integer(0.into()),
    };
    Ok(NumericState::from_rationals(&t0, &vars, &alpha))
}

fn dispatch(ctx: &Ctx, command: Command) -> Result<Vec<VerificationReport>, Error> {
    match command {
        Command::Verify { what } => verify(ctx, what),
        Command::Characterize {
            system,
            t_deg,
            samples,
            seed,
            charts,
        } => {
            let kind = ctx.system(system)?.kind.expect("d3 or d5");
            let t_deg = ctx.parsed(t_deg, "t-deg", 2)?;
            let samples = ctx.parsed(samples, "samples", 3)?;
            let seed = ctx.seed(seed)?;
            let subset = ctx.pick(charts, "charts");
            let names: Option<Vec<&str>> = subset
                .as_deref()
                .map(|s| s.split(',').map(str::trim).collect());
            characterize(kind, t_deg, samples, seed, names.as_deref())
        }
        Command::SearchIntegrals {
            system,
            max_deg,
            t_deg,
            samples,
            seed,
        } => {
            let sys = named_system(&ctx.require(system, "system")?)?;
            let max_deg = ctx.parsed(max_deg, "max-deg", 3)?;
            let t_deg = ctx.parsed(t_deg, "t-deg", 2)?;
            let samples = ctx.parsed(samples, "samples", 2)?;
            let search = first_integral_search(&sys, max_deg, t_deg, samples, ctx.seed(seed)?)?;
            Ok(vec![integral_report(&sys, &search)?])
        }
        Command::Integrate {
            system,
            alpha,
            state,
            t_start,
            t_end,
            rtol,
            atol,
            max_step,
            csv,
        } => {
            let sys = named_system(&ctx.require(system, "system")?)?;
            let s0 = state_from(ctx, &sys, alpha, state, t_start)?;
            let t_end = numerics::rational_to_tf(&parse_scalar(&ctx.require(t_end, "t-end")?)?);
            let d = IntegratorConfig::default();
            let cfg = IntegratorConfig {
                rtol: ctx.parsed(rtol, "rtol", d.rtol)?,
                atol: ctx.parsed(atol, "atol", d.atol)?,
                max_step: ctx.parsed(max_step, "max-step", d.max_step)?,
                ..d
            };
            let (report, traj) = numerics::integration_report(&sys, &s0, t_end, &cfg)?;
            if let Some(path) = csv.or_else(|| ctx.config.get("csv").map(PathBuf::from)) {
                let file = std::fs::File::create(&path)
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
                numerics::write_csv(&sys, &s0.alpha, &traj, std::io::BufWriter::new(file))?;
            }
            Ok(vec![report])
        }
        Command::CheckBacklund {
            system,
            generator,
            alpha,
            state,
            t_end,
        } => {
            let sys = ctx.system(system)?;
            let g = ctx.require(generator, "generator")?;
            let m = explicit_generator(&sys, &g)?;
            let alpha = ctx.pick(alpha, "alpha");
            let state = ctx.pick(state, "state");
            let s0 = match (alpha, state) {
                (None, None) => presets::generic(&sys)?,
                (a, s) => state_from(ctx, &sys, a, s, None)?,
            };
            let t_end = match ctx.pick(t_end, "t-end") {
                Some(s) => parse_scalar(&s)?,
                None => num_rational::BigRational::new(1.into(), 2.into()),
            };
            let cfg = IntegratorConfig::default();
            Ok(vec![numerics::check_backlund_numeric(
                &m,
                &sys,
                &s0,
                numerics::rational_to_tf(&t_end),
                &cfg,
            )?])
        }
        Command::CheckNumerics { system } => {
            let sys = named_system(&ctx.require(system, "system")?)?;
            Ok(numeric_checks(&sys))
        }
        Command::Suite { seed } => Ok(suite(ctx.seed(seed)?)),
    }
}

/// One line per report.
pub fn render(reports: &[VerificationReport], format: Format) -> String {
    let mut s = String::new();
    for r in reports {
        match format {
            Format::Json => s.push_str(&serde_json::to_string(r).expect("reports serialize")),
            Format::Text => {
                let status = serde_json::to_value(r.status).expect("status");
                let payload = serde_json::to_string(&r.payload).expect("payload");
                s.push_str(&format!(
                    "{:<13} {:<7} {:<18} {:<14} {}",
                    status.as_str().unwrap_or("?").to_uppercase(),
                    r.system,
                    r.task,
                    r.subject,
                    coupled_painleve::report::clip(payload, 240)
                ));
            }
        }
        s.push('\n');
    }
    s
}

/// Runs a command line and returns its exit code and output: 0 when nothing
/// failed, 1 when a verification failed, 2 on usage or internal errors.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let config = match &cli.config {
        Some(p) => match ConfigFile::load(p) {
            Ok(c) => c,
            Err(e) => {
                return Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: format!("error: config: {e}\n"),
                }
            }
        },
        None => ConfigFile::default(),
    };
    let format = match cli.format {
        Some(f) => f,
        None => match config.get("format") {
            None | Some("text") => Format::Text,
            Some("json") => Format::Json,
            Some(other) => {
                return Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: format!("error: unknown format `{other}`\n"),
                }
            }
        },
    };
    let ctx = Ctx { config };
    match dispatch(&ctx, cli.command) {
        Ok(reports) => {
            let failed = reports.iter().any(|r| r.status.is_failure());
            Outcome {
                code: i32::from(failed),
                stdout: render(&reports, format),
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
