//! Command-line front end.
//!
//! Every run prints one JSON envelope `{tool, version, command, config,
//! result}` to stdout. Experiments also write `<name>.json` and
//! `<name>.csv` into the output directory. Values come from flags, then the
//! TOML config file (keys are the long flag names), then defaults.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 resource limit,
//! 4 solver non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::bounds::{self, BoundParams, DeltaChoice, DesignOrderVariant};
use crate::analysis::design::{DesignEnsembleSpec, EnsembleKind};
use crate::analysis::experiment::{
    self, CircuitFamily, DesignConfig, FhConfig, GapConfig, HaarOverlapConfig, ProfileKind,
    SplitConfig,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    assemble, compile_feynman_kitaev, gamma_norm, ClockKind, CompileOptions, Rescale,
};
use crate::history::{
    check_amplitudes_case1, check_amplitudes_case2, profiles, random_instance, reduce_to_standard,
    AmplitudeCheckParams, AmplitudeProfile, HistoryState,
};
use crate::linalg::C64;
use crate::qcircuit::{sample_seeded_circuit, Circuit, QuditRegister};
use crate::report::{TOOL, VERSION};
use crate::spectral::{ground_and_gap, Method, SolverOptions};

/// Environment variable read for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "HISTGAP_THREADS";
pub const DEFAULT_OUT_DIR: &str = "histgap-out";

fn parse_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "histgap",
    version,
    about = "History-state Hamiltonian compiler and spectral-gap workbench"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML file whose keys are long flag names; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to HISTGAP_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest assembled operator dimension.
    #[arg(long = "memory-cap", global = true)]
    pub memory_cap: Option<usize>,
    #[arg(long = "out-dir", global = true)]
    pub out_dir: Option<PathBuf>,
    /// Comma-separated subset of {json, csv}.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<String>>,
    /// Omit timestamps so reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a circuit into a Feynman-Kitaev Hamiltonian.
    Compile(CompileCmd),
    /// Ground energy and spectral gap of a compiled Hamiltonian.
    Spectrum(SpectrumCmd),
    /// Run the amplitude-profile checks on a history state.
    CheckAmplitudes(AmplitudeCmd),
    /// Reduce a generalized history-state instance to standard form.
    Reduce(ReduceCmd),
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Evaluate closed-form bounds.
    Bounds(BoundsCmd),
}

#[derive(Debug, Args, Clone)]
pub struct CircuitArgs {
    /// Circuit JSON file; otherwise a seeded local random circuit is sampled.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Use identity gates instead of random ones.
    #[arg(long)]
    pub identity: bool,
}

#[derive(Debug, Args, Clone)]
pub struct CompileArgs {
    #[arg(long, value_parser = parse_enum::<ClockKind>)]
    pub clock: Option<ClockKind>,
    #[arg(long = "no-input-penalty")]
    pub no_input_penalty: bool,
    #[arg(long, value_parser = parse_enum::<Rescale>)]
    pub rescale: Option<Rescale>,
    /// Computational qudits exempt from the input penalty (0-based).
    #[arg(long = "witness", value_delimiter = ',')]
    pub witness: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct CompileCmd {
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[command(flatten)]
    pub compile: CompileArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumCmd {
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[command(flatten)]
    pub compile: CompileArgs,
    #[arg(long, value_parser = parse_enum::<Method>)]
    pub method: Option<Method>,
    /// Also write the eigenvalue CSV.
    #[arg(long = "eigen-csv")]
    pub eigen_csv: bool,
    /// Keep the ground vector in the JSON output.
    #[arg(long = "ground-vector")]
    pub ground_vector: bool,
}

#[derive(Debug, Args)]
pub struct AmplitudeCmd {
    /// `uniform`, `geometric:RATE` or `zero-window:START:WIDTH`.
    #[arg(long)]
    pub profile: Option<String>,
    /// History-state JSON used instead of a named profile.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub r1: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "ratio-constant")]
    pub ratio_constant: Option<f64>,
    #[arg(long = "exponent-c")]
    pub exponent_c: Option<f64>,
    #[arg(long = "constant-scale")]
    pub constant_scale: Option<f64>,
    #[arg(long)]
    pub x0: Option<usize>,
    /// `1`, `2` or `both`.
    #[arg(long = "case")]
    pub case: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReduceCmd {
    /// Instance seed; defaults to the master seed.
    #[arg(long = "instance-seed")]
    pub instance_seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Gap and orthogonal-witness energies over a (T, seed) grid.
    Gap(GapCmd),
    /// Energy split of a history state at a cut.
    Split(SplitCmd),
    /// Decay of the local distinguishability of two trajectories.
    Fh(FhCmd),
    /// Frame potentials of Haar or local random circuit ensembles.
    Design(DesignCmd),
    /// Cross overlaps of independent Haar states.
    HaarOverlap(HaarOverlapCmd),
}

#[derive(Debug, Args)]
pub struct GapCmd {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "T", value_delimiter = ',')]
    pub t: Option<Vec<usize>>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub r1: Option<usize>,
    /// Seeds per T.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long, value_parser = parse_enum::<CircuitFamily>)]
    pub circuits: Option<CircuitFamily>,
    #[command(flatten)]
    pub compile: CompileArgs,
    #[arg(long, value_parser = parse_enum::<Method>)]
    pub method: Option<Method>,
    /// A number or `plugin`.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long = "energy-constant")]
    pub energy_constant: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SplitCmd {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub x0: Option<usize>,
    /// `uniform` or `geometric:RATE`.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[command(flatten)]
    pub compile: CompileArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "remark2-c")]
    pub remark2_c: Option<f64>,
    #[arg(long = "remark2-states")]
    pub remark2_states: Option<usize>,
    #[arg(long = "remark2-r")]
    pub remark2_r: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FhCmd {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long = "by-depth")]
    pub by_depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DesignCmd {
    #[arg(long, value_parser = parse_enum::<EnsembleKind>)]
    pub ensemble: Option<EnsembleKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<u32>>,
}

#[derive(Debug, Args)]
pub struct HaarOverlapCmd {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundsCmd {
    /// `lemmas`, `design-order`, `bhh`, `net` or `low-tail`.
    #[arg(long)]
    pub eval: Option<String>,
    /// Restrict the lemma output to `7` or `9`.
    #[arg(long)]
    pub lemma: Option<u32>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long = "T")]
    pub t: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub q1: Option<u64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    /// A number or `plugin`.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "cross-sum")]
    pub cross_sum: Option<f64>,
    #[arg(long)]
    pub prefactor: Option<f64>,
    #[arg(long, value_parser = parse_enum::<DesignOrderVariant>)]
    pub variant: Option<DesignOrderVariant>,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "r-circ")]
    pub r_circ: Option<u64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long = "alpha-poly")]
    pub alpha_poly: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "m-half")]
    pub m_half: Option<u64>,
}

/// Flag, then config file, then default.
struct Resolver {
    file: toml::Table,
}

impl Resolver {
    fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Validation(format!("config file {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        Ok(Self { file })
    }

    fn opt<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| Error::Validation(format!("config key `{key}`: {e}"))),
            None => Ok(None),
        }
    }

    fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.opt::<bool>(None, key)?.unwrap_or(false))
    }

    fn need<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.opt(flag, key)?
            .ok_or_else(|| Error::InvalidParameter(format!("missing required value `--{key}`")))
    }
}

struct Context {
    res: Resolver,
    seed: u64,
    memory_cap: Option<usize>,
    out_dir: PathBuf,
    json: bool,
    csv: bool,
    deterministic: bool,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
    config: Value,
    result: Value,
}

impl Context {
    fn envelope(&self, command: &str, config: Value, result: Value) -> Value {
        let generated_at = if self.deterministic {
            None
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs())
        };
        serde_json::to_value(Envelope {
            tool: TOOL,
            version: VERSION,
            command,
            generated_at,
            config,
            result,
        })
        .expect("envelope serializes")
    }

    fn compile_options(&self, a: &CompileArgs) -> Result<CompileOptions> {
        let mut o = CompileOptions {
            clock: self.res.get(a.clock, "clock", ClockKind::Register)?,
            include_input_penalty: !self.res.flag(a.no_input_penalty, "no-input-penalty")?,
            rescale: self.res.get(a.rescale, "rescale", Rescale::None)?,
            ..CompileOptions::default()
        };
        if let Some(w) = self.res.opt(a.witness.clone(), "witness")? {
            let n = w.iter().max().map_or(0, |m| m + 1);
            o.witness_mask = vec![false; n];
            for j in w {
                o.witness_mask[j] = true;
            }
        }
        if let Some(cap) = self.memory_cap {
            o.memory_cap = cap;
        }
        Ok(o)
    }

    fn circuit(&self, a: &CircuitArgs, witness: &mut Vec<bool>) -> Result<(Circuit, Value)> {
        if let Some(p) = self.res.opt(a.circuit.clone(), "circuit")? {
            let c = Circuit::from_json(&std::fs::read_to_string(&p)?)?;
            let cfg = json!({"circuit": p, "n": c.register.n, "d": c.register.d, "T": c.len()});
            if !witness.is_empty() {
                witness.resize(c.register.n, false);
            }
            return Ok((c, cfg));
        }
        let n = self.res.need(a.n, "n")?;
        let d = self.res.get(a.d, "d", 2)?;
        let t = self.res.need(a.t, "T")?;
        let identity = self.res.flag(a.identity, "identity")?;
        let reg = QuditRegister::new(n, d)?;
        let c = if identity {
            Circuit::identity(reg, t)
        } else {
            sample_seeded_circuit(reg, t, self.seed)?
        };
        if !witness.is_empty() {
            witness.resize(n, false);
        }
        Ok((
            c,
            json!({"n": n, "d": d, "T": t, "identity": identity, "seed": self.seed}),
        ))
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir)?;
        let p = self.out_dir.join(name);
        std::fs::write(&p, text)?;
        Ok(p)
    }
}

fn delta_choice(s: &str) -> Result<DeltaChoice> {
    if s.eq_ignore_ascii_case("plugin") {
        return Ok(DeltaChoice::ProofPlugIn);
    }
    s.parse::<f64>().map(DeltaChoice::Value).map_err(|_| {
        Error::InvalidParameter(format!("delta must be a number or `plugin`, got `{s}`"))
    })
}

fn named_profile(spec: &str, t_len: usize) -> Result<(crate::history::TimePoset, Vec<C64>)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidParameter(format!("malformed profile `{spec}`")))
    };
    match parts[0] {
        "uniform" => Ok(profiles::uniform(t_len)),
        "geometric" => Ok(profiles::geometric(t_len, num(1)?)),
        "zero-window" | "zero_window" => Ok(profiles::zero_window(
            t_len,
            num(1)? as usize,
            num(2)? as usize,
        )),
        other => Err(Error::InvalidParameter(format!(
            "unknown profile `{other}`"
        ))),
    }
}

fn split_profile(spec: &str) -> Result<ProfileKind> {
    match spec.split_once(':') {
        None if spec == "uniform" => Ok(ProfileKind::Uniform),
        Some(("geometric", rate)) => rate
            .parse()
            .map(|rate| ProfileKind::Geometric { rate })
            .map_err(|_| Error::InvalidParameter(format!("malformed rate in `{spec}`"))),
        _ => Err(Error::InvalidParameter(format!("unknown profile `{spec}`"))),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn run_compile(ctx: &Context, cmd: &CompileCmd) -> Result<Value> {
    let mut opts = ctx.compile_options(&cmd.compile)?;
    let (circuit, ccfg) = ctx.circuit(&cmd.circuit, &mut opts.witness_mask)?;
    let fk = compile_feynman_kitaev(&circuit, &opts)?;
    let norm = gamma_norm(&fk.hamiltonian)?;
    let mut files = Vec::new();
    if ctx.json {
        files.push(ctx.write("hamiltonian.json", &(fk.hamiltonian.to_json()? + "\n"))?);
    }
    if ctx.csv {
        let mut buf = Vec::new();
        norm.write_csv(&mut buf)?;
        files.push(ctx.write("normalization.csv", &String::from_utf8_lossy(&buf))?);
    }
    let result = json!({
        "dims": fk.hamiltonian.dims(),
        "terms": fk.hamiltonian.terms().len(),
        "locality": fk.hamiltonian.locality(),
        "total_dim": fk.total_dim(),
        "clock_qudits": fk.clock_qudits,
        "scale": fk.scale,
        "gamma": norm.gamma,
        "warnings": fk.warnings,
        "files": files,
    });
    Ok(ctx.envelope("compile", json!({"circuit": ccfg, "compile": opts}), result))
}

fn run_spectrum(ctx: &Context, cmd: &SpectrumCmd) -> Result<Value> {
    let mut opts = ctx.compile_options(&cmd.compile)?;
    let (circuit, ccfg) = ctx.circuit(&cmd.circuit, &mut opts.witness_mask)?;
    let method = ctx.res.get(cmd.method, "method", Method::Auto)?;
    let fk = compile_feynman_kitaev(&circuit, &opts)?;
    let spec = ground_and_gap(
        &assemble(&fk.hamiltonian)?,
        method,
        &SolverOptions::default(),
    )?;
    let mut result = to_value(&spec);
    if !ctx.res.flag(cmd.ground_vector, "ground-vector")? {
        result
            .as_object_mut()
            .expect("object")
            .remove("ground_vector");
    }
    if ctx.json {
        ctx.write(
            "spectrum.json",
            &(serde_json::to_string_pretty(&result)? + "\n"),
        )?;
    }
    if ctx.csv && ctx.res.flag(cmd.eigen_csv, "eigen-csv")? {
        let mut buf = Vec::new();
        spec.write_eigen_csv(&mut buf)?;
        ctx.write("eigenvalues.csv", &String::from_utf8_lossy(&buf))?;
    }
    Ok(ctx.envelope(
        "spectrum",
        json!({"circuit": ccfg, "compile": opts, "method": method}),
        result,
    ))
}

fn run_amplitudes(ctx: &Context, cmd: &AmplitudeCmd) -> Result<Value> {
    let (poset, amps) = match ctx.res.opt(cmd.history.clone(), "history")? {
        Some(p) => {
            let hs = HistoryState::from_json(&std::fs::read_to_string(p)?)?;
            (hs.poset.clone(), hs.amplitudes.clone())
        }
        None => {
            let spec = ctx
                .res
                .get(cmd.profile.clone(), "profile", "uniform".to_string())?;
            named_profile(&spec, ctx.res.need(cmd.t, "T")?)?
        }
    };
    let t_len = poset.t_len();
    let r = ctx.res.get(cmd.r, "r", (t_len / 10).max(1))?;
    let mut p = AmplitudeCheckParams::new(
        ctx.res.get(cmd.n, "n", 4)?,
        ctx.res.get(cmd.d, "d", 2)?,
        r,
        0,
    );
    p.r1 = ctx.res.get(cmd.r1, "r1", r)?;
    p.q = ctx.res.get(cmd.q, "q", p.q)?;
    p.theta = ctx.res.get(cmd.theta, "theta", p.theta)?;
    p.ratio_constant = ctx
        .res
        .get(cmd.ratio_constant, "ratio-constant", p.ratio_constant)?;
    p.exponent_c = ctx.res.get(cmd.exponent_c, "exponent-c", p.exponent_c)?;
    p.constant_scale = ctx.res.opt(cmd.constant_scale, "constant-scale")?;
    p.x0 = ctx.res.opt(cmd.x0, "x0")?;
    let case = ctx.res.get(cmd.case.clone(), "case", "both".to_string())?;
    let profile = AmplitudeProfile {
        poset: &poset,
        amplitudes: &amps,
    };
    let mut result = serde_json::Map::new();
    if case == "1" || case == "both" {
        result.insert(
            "case1".into(),
            to_value(&check_amplitudes_case1(profile, &p)?),
        );
    }
    if case == "2" || case == "both" {
        result.insert(
            "case2".into(),
            to_value(&check_amplitudes_case2(profile, &p)?),
        );
    }
    if result.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "--case must be 1, 2 or both, got `{case}`"
        )));
    }
    Ok(ctx.envelope(
        "check-amplitudes",
        json!({"T": t_len, "params": p}),
        Value::Object(result),
    ))
}

fn run_reduce(ctx: &Context, cmd: &ReduceCmd) -> Result<Value> {
    let seed = ctx.res.get(cmd.instance_seed, "instance-seed", ctx.seed)?;
    let inst = random_instance(seed)?;
    let red = reduce_to_standard(&inst.state, &inst.hamiltonian)?;
    let opts = SolverOptions::default();
    let a = ground_and_gap(&assemble(&inst.hamiltonian)?, Method::Dense, &opts)?;
    let b = ground_and_gap(&assemble(&red.hamiltonian)?, Method::Dense, &opts)?;
    let result = json!({
        "site_dims": inst.state.site_dims(),
        "reduced_dims": red.hamiltonian.dims(),
        "k": red.k,
        "k_prime": red.k_prime,
        "penalty": red.penalty,
        "isomorphic": red.isomorphic,
        "sites": red.sites,
        "e0": a.e0,
        "e0_reduced": b.e0,
        "gap": a.gap,
        "gap_reduced": b.gap,
        "gap_inequality_holds": a.gap <= b.gap + 1e-10,
    });
    Ok(ctx.envelope("reduce", json!({"instance_seed": seed}), result))
}

fn emit<C: Serialize, R: Serialize + crate::report::CsvRow, A: Serialize>(
    ctx: &Context,
    command: &str,
    mut report: crate::report::ExperimentReport<C, R, A>,
) -> Result<Value> {
    if !ctx.deterministic {
        report.stamp_now();
    }
    let files = report.write_files(&ctx.out_dir, &report.experiment.clone(), ctx.json, ctx.csv)?;
    Ok(ctx.envelope(
        command,
        to_value(&report.config),
        json!({"rows": report.rows.len(), "aggregates": report.aggregates, "files": files}),
    ))
}

fn run_experiment(ctx: &Context, cmd: &ExperimentCmd) -> Result<Value> {
    let r = &ctx.res;
    match cmd {
        ExperimentCmd::Gap(g) => {
            let mut cfg = GapConfig::new(
                r.get(g.n, "n", 4)?,
                r.get(g.d, "d", 2)?,
                r.get(g.t.clone(), "T", vec![8, 16, 32])?,
                r.get(g.seeds, "seeds", 5)?,
                ctx.seed,
            );
            cfg.r = r.opt(g.r, "r")?;
            cfg.r1 = r.opt(g.r1, "r1")?;
            cfg.circuits = r.get(g.circuits, "circuits", CircuitFamily::LocalRandom)?;
            cfg.compile = ctx.compile_options(&g.compile)?;
            cfg.method = r.get(g.method, "method", Method::Auto)?;
            if let Some(dl) = r.opt(g.delta.clone(), "delta")? {
                cfg.delta = delta_choice(&dl)?;
            }
            cfg.energy_constant = r.get(g.energy_constant, "energy-constant", 1.0)?;
            emit(ctx, "experiment gap", experiment::gap_experiment(&cfg)?)
        }
        ExperimentCmd::Split(s) => {
            let mut cfg = SplitConfig::new(
                r.get(s.n, "n", 3)?,
                r.get(s.d, "d", 2)?,
                r.get(s.t, "T", 16)?,
                r.get(s.seeds, "seeds", 5)?,
                ctx.seed,
            );
            cfg.r = r.get(s.r, "r", 1)?;
            cfg.x0 = r.opt(s.x0, "x0")?;
            if let Some(p) = r.opt(s.profile.clone(), "profile")? {
                cfg.profile = split_profile(&p)?;
            }
            cfg.compile = ctx.compile_options(&s.compile)?;
            cfg.delta = r.get(s.delta, "delta", 0.0)?;
            cfg.remark2_c = r.get(s.remark2_c, "remark2-c", cfg.remark2_c)?;
            cfg.remark2_states = r.get(s.remark2_states, "remark2-states", cfg.remark2_states)?;
            cfg.remark2_r = r.opt(s.remark2_r, "remark2-r")?;
            emit(ctx, "experiment split", experiment::split_experiment(&cfg)?)
        }
        ExperimentCmd::Fh(f) => {
            let mut cfg = FhConfig::new(
                r.get(f.n, "n", 6)?,
                r.get(f.d, "d", 2)?,
                r.get(f.k, "k", 1)?,
                r.get(
                    f.checkpoints.clone(),
                    "checkpoints",
                    vec![0, 25, 50, 100, 200],
                )?,
                r.get(f.seeds, "seeds", 20)?,
                ctx.seed,
            );
            cfg.grid = r.get(f.grid, "grid", cfg.grid)?;
            cfg.threshold = r.get(f.threshold, "threshold", cfg.threshold)?;
            cfg.by_depth = r.get(f.by_depth, "by-depth", cfg.by_depth)?;
            emit(ctx, "experiment fh", experiment::fh_experiment(&cfg)?)
        }
        ExperimentCmd::Design(dz) => {
            let cfg = DesignConfig {
                ensemble: DesignEnsembleSpec {
                    kind: r.get(dz.ensemble, "ensemble", EnsembleKind::LocalRandomCircuit)?,
                    n: r.get(dz.n, "n", 4)?,
                    d: r.get(dz.d, "d", 2)?,
                    depth: r.get(dz.depth, "depth", 500)?,
                    samples: r.get(dz.samples, "samples", 2000)?,
                    seed: ctx.seed,
                },
                s: r.get(dz.s.clone(), "s", vec![2])?,
            };
            emit(
                ctx,
                "experiment design",
                experiment::design_experiment(&cfg)?,
            )
        }
        ExperimentCmd::HaarOverlap(h) => {
            let cfg = HaarOverlapConfig {
                n: r.get(h.n, "n", 6)?,
                d: r.get(h.d, "d", 2)?,
                k: r.get(h.k, "k", 1)?,
                samples: r.get(h.samples, "samples", 50)?,
                seed: ctx.seed,
                grid: r.get(h.grid, "grid", crate::analysis::DEFAULT_THETA_GRID)?,
            };
            emit(
                ctx,
                "experiment haar-overlap",
                experiment::haar_overlap_experiment(&cfg)?,
            )
        }
    }
}

fn run_bounds(ctx: &Context, b: &BoundsCmd) -> Result<Value> {
    let r = &ctx.res;
    let eval = r.get(b.eval.clone(), "eval", "lemmas".to_string())?;
    let (config, result) = match eval.as_str() {
        "lemmas" => {
            let t_len = r.need(b.t, "T")?;
            let mut p = BoundParams::new(
                r.need(b.n, "n")?,
                r.get(b.d, "d", 2)?,
                r.get(b.k, "k", 2)?,
                r.need(b.m, "m")?,
                t_len,
            );
            p.q = r.get(b.q, "q", p.q)?;
            p.q1 = r.get(b.q1, "q1", p.q1)?;
            p.r = r.get(b.r, "r", p.r)?;
            p.r1 = r.get(b.r1, "r1", p.r1)?;
            if let Some(dl) = r.opt(b.delta.clone(), "delta")? {
                p.delta = delta_choice(&dl)?;
            }
            p.gamma = r.get(b.gamma, "gamma", p.gamma)?;
            p.alpha_mass = r.get(b.alpha, "alpha", p.alpha_mass)?;
            p.cross_sum = r.get(b.cross_sum, "cross-sum", p.cross_sum)?;
            p.lemma7_prefactor = r.get(b.prefactor, "prefactor", p.lemma7_prefactor)?;
            p.s_variant = r.get(b.variant, "variant", p.s_variant)?;
            let lb = bounds::lemma_failure_bounds(&p)?;
            let mut v = to_value(&lb);
            if let Some(which) = r.opt(b.lemma, "lemma")? {
                let drop = match which {
                    7 => "lemma9",
                    9 => "lemma7",
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "--lemma must be 7 or 9, got {other}"
                        )))
                    }
                };
                let obj = v.as_object_mut().expect("object");
                obj.retain(|key, _| !key.starts_with(drop) && key != "combined_energy_rhs");
            }
            (to_value(&p), v)
        }
        "design-order" => {
            let n = r.need(b.n, "n")?;
            let d = r.get(b.d, "d", 2)?;
            let rv = r.need(b.r, "r")?;
            let variant = r.get(b.variant, "variant", DesignOrderVariant::SAppendix)?;
            (
                json!({"n": n, "d": d, "r": rv, "variant": variant}),
                json!({"s": bounds::design_order(rv, n, d, variant)}),
            )
        }
        "bhh" => {
            let (n, d, s, eps) = (
                r.need(b.n, "n")?,
                r.get(b.d, "d", 2)?,
                r.need(b.s, "s")?,
                r.need(b.eps, "eps")?,
            );
            let v = bounds::bhh_design_length(n, d, s, eps)?;
            (
                json!({"n": n, "d": d, "s": s, "eps": eps}),
                json!({"length": v.to_string(), "log10": bounds::log10_biguint(&v)}),
            )
        }
        "net" => {
            let (m, k, d, eps, n, rc) = (
                r.need(b.m, "m")?,
                r.need(b.k, "k")?,
                r.get(b.d, "d", 2)?,
                r.need(b.eps, "eps")?,
                r.need(b.n, "n")?,
                r.need(b.r_circ, "r-circ")?,
            );
            (
                json!({"m": m, "k": k, "d": d, "eps": eps, "n": n, "r_circ": rc}),
                to_value(&bounds::net_sizes(m, k, d, eps, n, rc)?),
            )
        }
        "low-tail" => {
            let c = r.need(b.c, "c")?;
            let a = r.need(b.a, "a")?;
            let ap = r.need(b.alpha_poly, "alpha-poly")?;
            let mu = r.get(b.mu, "mu", 0.0)?;
            let eps = r.get(b.eps, "eps", 0.0)?;
            let mh = r.need(b.m_half, "m-half")?;
            let dl: f64 = r
                .need(b.delta.clone(), "delta")?
                .parse()
                .map_err(|_| Error::InvalidParameter("delta must be a number".into()))?;
            (
                json!({"c": c, "a": a, "alpha_poly": ap, "mu": mu, "eps": eps, "m_half": mh, "delta": dl}),
                to_value(&bounds::low_tail_bound(c, a, ap, mu, eps, mh, dl)?),
            )
        }
        other => return Err(Error::InvalidParameter(format!("unknown --eval `{other}`"))),
    };
    Ok(ctx.envelope("bounds", json!({"eval": eval, "params": config}), result))
}

fn dispatch(cli: &Cli) -> Result<Value> {
    let g = &cli.global;
    let res = Resolver::load(g.config.as_deref())?;
    let seed = res.get(g.seed, "seed", 0)?;
    let formats = res.get(
        g.format.clone(),
        "format",
        vec!["json".to_string(), "csv".to_string()],
    )?;
    for f in &formats {
        if f != "json" && f != "csv" {
            return Err(Error::InvalidParameter(format!(
                "unknown output format `{f}`"
            )));
        }
    }
    let ctx = Context {
        seed,
        memory_cap: res.opt(g.memory_cap, "memory-cap")?,
        out_dir: res.get(g.out_dir.clone(), "out-dir", PathBuf::from(DEFAULT_OUT_DIR))?,
        json: formats.iter().any(|f| f == "json"),
        csv: formats.iter().any(|f| f == "csv"),
        deterministic: res.flag(g.deterministic, "deterministic")?,
        res,
    };
    let env_threads = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok());
    let threads = ctx
        .res
        .opt(g.threads, "threads")?
        .or(env_threads)
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Compile(c) => run_compile(&ctx, c),
        Command::Spectrum(c) => run_spectrum(&ctx, c),
        Command::CheckAmplitudes(c) => run_amplitudes(&ctx, c),
        Command::Reduce(c) => run_reduce(&ctx, c),
        Command::Experiment(c) => run_experiment(&ctx, c),
        Command::Bounds(c) => run_bounds(&ctx, c),
    })
}

/// Parses `argv`, runs the command and writes its JSON to `out` (errors go
/// to `err`). Returns the process exit code.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("json");
            let _ = writeln!(out, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
