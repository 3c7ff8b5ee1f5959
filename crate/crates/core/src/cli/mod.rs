//! Command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::aposteriori::{example_valuations, valuation_table};
use crate::arith::{format_rat, Prime, Rat};
use crate::graph::{check_graph_consistency, predicted_graph, solve_self_intersections, DualGraph};
use crate::poly::parse::parse_uni;
use crate::resolve::{dual_graph, resolve, ResolutionState, ResolveError};
use crate::wildquot::{
    compute_break, presentation_matrix, verify_presentation, ChartDescriptor, WildQuotData,
    WildQuotError, SCHEMA,
};

#[derive(Debug, Parser)]
#[command(name = "maclane-surfaces", version, about = "Wild quotient singularities and their resolution")]
pub struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Determinantal presentation of the chart.
    Chart(Common),
    /// Check that the 2×2 minors vanish on the generator functions.
    VerifyRelations {
        #[command(flatten)]
        common: Common,
        /// Random rational points for an additional numeric check.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Run the resolution pipeline and print its log.
    Resolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = crate::resolve::DEFAULT_BLOWUP_CAP)]
        cap: usize,
    },
    /// Dual graph of the resolution with self-intersections.
    Graph {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = crate::resolve::DEFAULT_BLOWUP_CAP)]
        cap: usize,
    },
    /// Valuations of the components of the resolved special fiber.
    Valuations(Common),
    /// Expected shape of the exceptional graph.
    Predict {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub p: u64,
    /// Eisenstein polynomial in `x`.
    #[arg(long)]
    pub phi: String,
    /// Ramification break; computed from φ when omitted.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub k_max: usize,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<WildQuotError> for CliError {
    fn from(e: WildQuotError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn resolve_failure(e: ResolveError) -> CliError {
    match e {
        ResolveError::KMaxTooLarge(_)
        | ResolveError::AmbientTooLarge(_)
        | ResolveError::NoEliminableGenerator
        | ResolveError::WildQuot(_)
        | ResolveError::Poly(_) => CliError::Input(e.to_string()),
        other => CliError::Verification(other.to_string()),
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Loaded {
    data: WildQuotData,
    m_source: &'static str,
    warning: Option<String>,
}

fn load(c: &Common) -> Result<Loaded, CliError> {
    let p = Prime::new(c.p).map_err(|e| CliError::Input(e.to_string()))?;
    let phi = parse_uni(&c.phi, "x").map_err(|e| CliError::Input(format!("phi: {e}")))?;
    let (m, m_source, warning) = match c.m {
        Some(0) => return Err(CliError::Input("m must be positive".into())),
        Some(m) => (m, "given", None),
        None => {
            let est = compute_break(&phi, p)?;
            let m = est.as_break().ok_or_else(|| {
                CliError::Input(format!(
                    "computed break {} is not an integer; pass --m",
                    format_rat(&est.value)
                ))
            })?;
            (m, "computed", est.warning)
        }
    };
    let data = WildQuotData::new(p, &phi, m)?;
    Ok(Loaded { data, m_source, warning })
}

fn with_provenance(mut v: Value, l: &Loaded) -> Value {
    if let Some(obj) = v.as_object_mut() {
        obj.insert("m_source".into(), json!(l.m_source));
        if let Some(w) = &l.warning {
            obj.insert("warning".into(), json!(w));
        }
    }
    v
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn emit(format: Format, json: &Value, text: impl FnOnce() -> String, dot: Option<String>) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(pretty(json)),
        Format::Text => Ok(text()),
        Format::Dot => dot.ok_or_else(|| CliError::Input("DOT output is only available for graphs".into())),
    }
}

fn chart_cmd(c: &Common) -> Result<String, CliError> {
    let l = load(c)?;
    let pres = presentation_matrix(&l.data)?;
    let desc = ChartDescriptor::new(&l.data, &pres);
    let v = with_provenance(serde_json::to_value(&desc).expect("descriptor serializes"), &l);
    emit(
        c.output.format,
        &v,
        || {
            let mut s = String::new();
            let _ = writeln!(s, "variables: {}", desc.variables.join(", "));
            for (i, g) in desc.generators.iter().enumerate() {
                let _ = writeln!(s, "{} = {}", desc.variables[i], g);
            }
            for row in &desc.matrix {
                let _ = writeln!(s, "[{}, {}]", row[0], row[1]);
            }
            s
        },
        None,
    )
}

fn verify_cmd(c: &Common, samples: usize, seed: u64) -> Result<(String, bool), CliError> {
    let l = load(c)?;
    let pres = presentation_matrix(&l.data)?;
    let report = verify_presentation(&pres)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spot = Vec::new();
    let phi = l.data.phi();
    while spot.len() < samples {
        let t = Rat::new(rng.gen_range(-1000i64..=1000).into(), rng.gen_range(1i64..=1000).into());
        if phi.eval(&t) == Rat::from_integer(0.into()) {
            continue;
        }
        let point: Vec<Rat> = pres
            .generators
            .iter()
            .map(|g| g.num().eval(&t) / g.den().eval(&t))
            .collect();
        let vanish = pres
            .minors
            .iter()
            .all(|mnr| mnr.eval_rat(&point).map(|v| v == Rat::from_integer(0.into())).unwrap_or(false));
        spot.push(json!({"x": format_rat(&t), "minors_vanish": vanish}));
    }
    let spot_ok = spot.iter().all(|s| s["minors_vanish"] == true);
    let ok = report.ok() && spot_ok;
    let v = with_provenance(
        json!({
            "schema": SCHEMA,
            "p": l.data.p().get(),
            "phi": l.data.phi().to_string(),
            "m": l.data.m(),
            "ok": ok,
            "seed": seed,
            "entries": report.entries.iter().map(|e| json!({
                "minor": e.minor.to_string(),
                "residual": e.residual.to_string(),
            })).collect::<Vec<_>>(),
            "spot_checks": spot,
        }),
        &l,
    );
    let out = emit(
        c.output.format,
        &v,
        || {
            let mut s = String::new();
            for e in &report.entries {
                let _ = writeln!(s, "{} -> {}", e.minor, e.residual);
            }
            let _ = writeln!(s, "{}", if ok { "all minors vanish" } else { "FAILED" });
            s
        },
        None,
    )?;
    Ok((out, ok))
}

fn resolved(c: &Common, cap: usize) -> Result<(Loaded, ResolutionState), CliError> {
    let l = load(c)?;
    let st = resolve(&l.data, c.k_max, cap).map_err(resolve_failure)?;
    Ok((l, st))
}

fn resolve_cmd(c: &Common, cap: usize) -> Result<String, CliError> {
    let (l, st) = resolved(c, cap)?;
    let v = with_provenance(st.to_json(), &l);
    emit(c.output.format, &v, || st.dump(None), None)
}

fn solved_graph(st: &ResolutionState) -> Result<(DualGraph, bool, bool), CliError> {
    let g = dual_graph(st).map_err(resolve_failure)?;
    let g = solve_self_intersections(&g).map_err(|e| CliError::Verification(e.to_string()))?;
    let consistent = check_graph_consistency(&g).passed();
    let exc: Vec<String> = st
        .registry()
        .iter()
        .filter(|d| d.exceptional)
        .map(|d| d.label.clone())
        .collect();
    let exc_refs: Vec<&str> = exc.iter().map(String::as_str).collect();
    let definite = g
        .restrict(&exc_refs)
        .is_negative_definite()
        .map_err(|e| CliError::Verification(e.to_string()))?;
    Ok((g, consistent, definite))
}

fn graph_cmd(c: &Common, cap: usize) -> Result<(String, bool), CliError> {
    let (l, st) = resolved(c, cap)?;
    let (g, consistent, definite) = solved_graph(&st)?;
    let mut v = with_provenance(g.to_json(), &l);
    v["consistent"] = json!(consistent);
    v["negative_definite"] = json!(definite);
    let out = emit(
        c.output.format,
        &v,
        || {
            let mut s = String::new();
            for vx in &g.vertices {
                let _ = writeln!(
                    s,
                    "{}: m={} self={}",
                    vx.label,
                    vx.multiplicity,
                    vx.self_intersection.map_or("?".into(), |x| x.to_string())
                );
            }
            for e in &g.edges {
                let _ = writeln!(s, "{} -- {}", g.vertices[e.i].label, g.vertices[e.j].label);
            }
            s
        },
        Some(g.to_dot()),
    )?;
    Ok((out, consistent && definite))
}

fn valuations_cmd(c: &Common) -> Result<(String, bool), CliError> {
    let l = load(c)?;
    let example = WildQuotData::example();
    if l.data.p() != example.p() || l.data.phi() != example.phi() || l.data.m() != example.m() {
        return Err(CliError::Input(
            "a valuation table is only known for p = 3, phi = x^3 - 3*x^2 + 3, m = 2".into(),
        ));
    }
    let st = resolve(&l.data, c.k_max, crate::resolve::DEFAULT_BLOWUP_CAP).map_err(resolve_failure)?;
    let spec = example_valuations();
    let v = with_provenance(
        valuation_table(&st, &spec).map_err(|e| CliError::Verification(e.to_string()))?,
        &l,
    );
    let ok = v["bijection"] == true;
    let out = emit(
        c.output.format,
        &v,
        || {
            let mut s = String::new();
            for row in v["components"].as_array().into_iter().flatten() {
                let vals: Vec<String> = row["valuations"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|x| format!("{} (m={})", x["valuation"].as_str().unwrap_or(""), x["multiplicity"]))
                    .collect();
                let _ = writeln!(s, "{}: {}", row["label"].as_str().unwrap_or(""), vals.join("; "));
            }
            s
        },
        None,
    )?;
    Ok((out, ok))
}

fn predict_cmd(p: u64, m: u64, o: &OutputOpts) -> Result<String, CliError> {
    let pr = predicted_graph(p, m).map_err(|e| CliError::Input(e.to_string()))?;
    let mut v = pr.graph.to_json();
    v["p"] = json!(p);
    v["m"] = json!(m);
    v["attach_at"] = json!(pr.attach_at);
    v["even_chain"] = json!(pr.even_chain);
    emit(
        o.format,
        &v,
        || {
            let mut s = format!("chain A1..A{} with C0 on A{}\n", p * m - 1, pr.attach_at);
            if pr.even_chain {
                s.push_str("chain length is even; the attachment point is a convention\n");
            }
            s
        },
        Some(pr.graph.to_dot()),
    )
}

fn output_of(cli: &Cli) -> &OutputOpts {
    match &cli.command {
        Command::Chart(c) | Command::Valuations(c) => &c.output,
        Command::VerifyRelations { common, .. }
        | Command::Resolve { common, .. }
        | Command::Graph { common, .. } => &common.output,
        Command::Predict { output, .. } => output,
    }
}

/// Runs one command; exit code 0 on success, 1 when a check fails, 2 on bad input.
pub fn run(cli: &Cli) -> Outcome {
    let result: Result<(String, bool), CliError> = match &cli.command {
        Command::Chart(c) => chart_cmd(c).map(|s| (s, true)),
        Command::VerifyRelations { common, samples } => verify_cmd(common, *samples, cli.seed),
        Command::Resolve { common, cap } => resolve_cmd(common, *cap).map(|s| (s, true)),
        Command::Graph { common, cap } => graph_cmd(common, *cap),
        Command::Valuations(c) => valuations_cmd(c),
        Command::Predict { p, m, output } => predict_cmd(*p, *m, output).map(|s| (s, true)),
    };
    let (body, ok) = match result {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                code: e.exit_code(),
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let code = if ok { 0 } else { 1 };
    let stderr = if ok { String::new() } else { "error: verification failed\n".into() };
    match &output_of(cli).output {
        None => Outcome { code, stdout: body, stderr },
        Some(path) => match std::fs::write(path, &body) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {}\n", CliError::Io(e)),
            },
        },
    }
}

/// Parses arguments and runs; clap usage errors exit with 2.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}
