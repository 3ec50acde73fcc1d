// Copyright 2026 The polydiff Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. A single JSON spec file describes the state space,
//! the coefficients and an optional pricing block; flags override spec fields.
//!
//! Exit codes: 0 success, 1 domain-negative verdict, 2 input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::generator::{generator_matrix, ModelCoefficients, PolyDiffusion};
use crate::poly::Polynomial;
use crate::pricing::{
    constituent_option_price, constituent_option_price_mc, variance_swap_rate, BlackScholesPricer,
    IndexCallPricer, McConfig, PricingModel, SimplexIndexModel, TabulatedPricer,
};
use crate::simulate::{
    boundary_stats, default_threshold, mc_moment, simulate_paths, SimulationSpec,
};
use crate::statespace::{
    assemble_model, boundary_classify, check_necessary, check_sufficient, uniqueness_report,
    validate, BoundaryVerdict, BoxOrthantParams, Family, ModelParams, QuadricParams, SampleConfig,
    SimplexParams, StateSpace, Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// A polynomial given either as text (`"x1^2 - 2*x2"`) or in the structured
/// `{"dim": .., "terms": [{"e": [..], "c": ..}]}` form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyInput {
    Text(String),
    Structured(Polynomial),
}

impl PolyInput {
    pub fn resolve(&self, dim: usize) -> Result<Polynomial> {
        let p = match self {
            PolyInput::Text(s) => Polynomial::parse(s, dim)?,
            PolyInput::Structured(p) => p.clone(),
        };
        if p.dim() != dim {
            return Err(Error::InvalidInput(format!(
                "polynomial {p} has dimension {}, expected {dim}",
                p.dim()
            )));
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSpec {
    pub a: Vec<Vec<PolyInput>>,
    pub b: Vec<PolyInput>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSpec {
    /// State price density polynomial, positive on `E`.
    pub p: PolyInput,
    #[serde(default)]
    pub alpha_rate: f64,
    #[serde(default)]
    pub degree: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    #[serde(default)]
    pub dimension: Option<usize>,
    pub state_space: Family,
    /// Family parameters; exactly one of `params` and `coefficients`.
    #[serde(default)]
    pub params: Option<Value>,
    #[serde(default)]
    pub coefficients: Option<CoefficientsSpec>,
    /// Default basis degree.
    #[serde(default)]
    pub degree: Option<u32>,
    /// Default initial state.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub pricing: Option<PricingSpec>,
}

/// A parsed and checked spec file.
#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub file: ModelSpecFile,
    pub state_space: StateSpace,
    pub params: Option<ModelParams>,
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::InvalidInput(format!("{what}: at `{path}`: {inner}"))
    })
}

fn parse_value<T: DeserializeOwned>(v: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::InvalidInput(format!("at `{prefix}.{path}`: {inner}"))
    })
}

impl LoadedSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ModelSpecFile = parse_json(text, "spec")?;
        let state_space = StateSpace::new(file.state_space.clone())?;
        let d = state_space.dim();
        if let Some(dim) = file.dimension {
            if dim != d {
                return Err(Error::InvalidInput(format!(
                    "dimension {dim} does not match the state space dimension {d}"
                )));
            }
        }
        let params = match (&file.params, &file.coefficients) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(Error::InvalidInput(
                    "give exactly one of `params` and `coefficients`".into(),
                ))
            }
            (Some(v), None) => Some(match state_space.family() {
                Family::Quadric { .. } => {
                    ModelParams::Quadric(parse_value::<QuadricParams>(v, "params")?)
                }
                Family::BoxOrthant { .. } => {
                    ModelParams::BoxOrthant(parse_value::<BoxOrthantParams>(v, "params")?)
                }
                Family::Simplex { .. } => {
                    ModelParams::Simplex(parse_value::<SimplexParams>(v, "params")?)
                }
                Family::Euclidean { .. } => {
                    return Err(Error::InvalidInput(
                        "the euclidean family has no parameter form; use `coefficients`".into(),
                    ))
                }
            }),
            (None, Some(_)) => None,
        };
        if let Some(x0) = &file.x0 {
            if x0.len() != d {
                return Err(Error::InvalidInput(format!(
                    "x0 has length {}, expected {d}",
                    x0.len()
                )));
            }
        }
        Ok(LoadedSpec {
            file,
            state_space,
            params,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn dim(&self) -> usize {
        self.state_space.dim()
    }

    pub fn model(&self) -> Result<ModelCoefficients> {
        if let Some(p) = &self.params {
            return assemble_model(&self.state_space, p);
        }
        let c = self
            .file
            .coefficients
            .as_ref()
            .expect("coefficients present");
        let d = self.dim();
        let a =
            c.a.iter()
                .map(|row| row.iter().map(|p| p.resolve(d)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
        let b =
            c.b.iter()
                .map(|p| p.resolve(d))
                .collect::<Result<Vec<_>>>()?;
        ModelCoefficients::new(a, b)
    }

    fn x0(&self, flag: Option<Vec<f64>>) -> Result<Vec<f64>> {
        let x = flag.or_else(|| self.file.x0.clone()).ok_or_else(|| {
            Error::InvalidInput("no initial state: pass --x0 or set `x0` in the spec".into())
        })?;
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "state has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PricerSpec {
    BlackScholes {
        spot: f64,
        vol: f64,
        #[serde(default)]
        rate: f64,
    },
    Tabulated {
        strikes: Vec<f64>,
        prices: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Instrument {
    Bond {
        #[serde(default)]
        t: f64,
        maturity: f64,
        #[serde(default)]
        x: Option<Vec<f64>>,
    },
    Vswap {
        #[serde(default)]
        t: f64,
        maturity: f64,
        #[serde(default)]
        x: Option<Vec<f64>>,
        /// Spot variance polynomial; defaults to the pricing density `p`.
        #[serde(default)]
        variance: Option<PolyInput>,
    },
    Swaption {
        expiry: f64,
        /// `(c_i, T_i)` pairs.
        coupons: Vec<(f64, f64)>,
        #[serde(default)]
        x: Option<Vec<f64>>,
        #[serde(default)]
        mc: Option<McConfig>,
    },
    EquityOption {
        constituent: usize,
        maturity: f64,
        strike: f64,
        horizon: f64,
        pricer: PricerSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        #[serde(default)]
        grid_size: Option<usize>,
        #[serde(default)]
        cheb_degree: Option<usize>,
        #[serde(default)]
        mc: Option<McConfig>,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "polydiff",
    version,
    about = "Polynomial diffusion models: moments, validation, simulation and pricing"
)]
pub struct Cli {
    /// Write the report (or the path CSV for `simulate`) to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Samples per stratum for sampled checks.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Random seed for simulation-based commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Add independent cross-checks to the report.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Print nothing to stdout and only errors to stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check parameter admissibility, invariance conditions and uniqueness.
    Validate {
        /// Model spec file (JSON).
        spec: PathBuf,
    },
    /// Closed-form conditional moment E[p(X_{t+tau}) | X_t = x].
    Moments {
        /// Model spec file (JSON).
        spec: PathBuf,
        /// Polynomial p, e.g. "x1^2 - 2*x1*x2".
        #[arg(long)]
        poly: String,
        /// Conditioning state, comma separated; defaults to the spec's `x0`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        /// Horizon tau >= 0.
        #[arg(long)]
        tau: f64,
        /// Basis degree, raised to at least deg p; defaults to the spec's degree.
        #[arg(long)]
        degree: Option<u32>,
        /// Monte Carlo paths for the `--verify` cross-check (0 disables it).
        #[arg(long, default_value_t = 0)]
        mc_paths: usize,
        /// Time step for the Monte Carlo cross-check.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Euler–Maruyama paths with projection onto the state space.
    Simulate {
        /// Model spec file (JSON).
        spec: PathBuf,
        /// Number of paths.
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        /// Time step.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Horizon.
        #[arg(long = "T", visible_alias = "horizon", default_value_t = 1.0)]
        t_end: f64,
        /// Initial state, comma separated; defaults to the spec's `x0`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        /// Store every k-th step.
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Gzip the path CSV.
        #[arg(long)]
        gzip: bool,
        /// Boundary-hit threshold (default 1e-6 times the diameter of E).
        #[arg(long)]
        threshold: Option<f64>,
        /// Also write the JSON summary here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Boundary attainment verdict for every inequality generator.
    Boundary {
        /// Model spec file (JSON).
        spec: PathBuf,
    },
    /// Price an instrument under the spec's pricing block.
    Price {
        /// Model spec file (JSON) with a `pricing` block.
        spec: PathBuf,
        /// Instrument file (JSON).
        instrument: PathBuf,
    },
    /// Basis monomials (or the generator matrix) as CSV.
    BasisDump {
        /// Model spec file (JSON).
        spec: PathBuf,
        /// Basis degree; defaults to the spec's degree, else 2.
        #[arg(long)]
        degree: Option<u32>,
        /// Dump the generator matrix instead of the exponents.
        #[arg(long)]
        generator: bool,
    },
}

struct Ctx<'a> {
    out: Option<PathBuf>,
    samples: SampleConfig,
    seed: u64,
    verify: bool,
    quiet: bool,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit_json(&mut self, v: &Value) -> Result<()> {
        let text = serde_json::to_string_pretty(v)? + "\n";
        self.emit_text(&text)
    }

    fn emit_text(&mut self, text: &str) -> Result<()> {
        if let Some(path) = &self.out {
            fs::write(path, text)?;
        } else if !self.quiet {
            self.stdout.write_all(text.as_bytes())?;
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `stdout`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut ctx = Ctx {
        out: cli.out.clone(),
        samples: cli.samples.map(SampleConfig::new).unwrap_or_default(),
        seed: cli.seed.unwrap_or(0),
        verify: cli.verify,
        quiet: cli.quiet,
        stdout,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx) -> Result<i32> {
    match cmd {
        Command::Validate { spec } => cmd_validate(&LoadedSpec::load(&spec)?, ctx),
        Command::Moments {
            spec,
            poly,
            x,
            tau,
            degree,
            mc_paths,
            dt,
        } => cmd_moments(
            &LoadedSpec::load(&spec)?,
            &poly,
            x,
            tau,
            degree,
            mc_paths,
            dt,
            ctx,
        ),
        Command::Simulate {
            spec,
            paths,
            dt,
            t_end,
            x0,
            record_every,
            gzip,
            threshold,
            summary,
        } => {
            let loaded = LoadedSpec::load(&spec)?;
            let sim = SimulationSpec::new(t_end, dt, paths, ctx.seed).record_every(record_every);
            cmd_simulate(&loaded, x0, &sim, gzip, threshold, summary.as_deref(), ctx)
        }
        Command::Boundary { spec } => cmd_boundary(&LoadedSpec::load(&spec)?, ctx),
        Command::Price { spec, instrument } => {
            let text = fs::read_to_string(&instrument).map_err(|e| {
                Error::InvalidInput(format!("cannot read {}: {e}", instrument.display()))
            })?;
            let inst: Instrument = parse_json(&text, "instrument")?;
            cmd_price(&LoadedSpec::load(&spec)?, &inst, ctx)
        }
        Command::BasisDump {
            spec,
            degree,
            generator,
        } => {
            let loaded = LoadedSpec::load(&spec)?;
            let degree = degree.or(loaded.file.degree).unwrap_or(2);
            let basis = Basis::new(&loaded.state_space, degree);
            let text = if generator {
                generator_matrix(&loaded.model()?, basis.into())?.to_csv()
            } else {
                basis.dump_csv()
            };
            ctx.emit_text(&text)?;
            Ok(EXIT_OK)
        }
    }
}

fn verdict_code(v: Verdict) -> i32 {
    if v == Verdict::Valid {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

/// With family parameters the verdict is that of the parameter conditions
/// together with the sampled necessary conditions; for raw coefficients it is
/// the necessary and sufficient invariance checks together.
pub fn cmd_validate_report(spec: &LoadedSpec, cfg: &SampleConfig) -> Result<(Verdict, Value)> {
    let ss = &spec.state_space;
    let params_report = spec
        .params
        .as_ref()
        .map(|p| validate(ss, p, cfg))
        .transpose()?;
    let model = match spec.model() {
        Ok(m) => m,
        Err(e) => match &params_report {
            Some(r) if !r.is_valid() => {
                let v = json!({
                    "command": "validate",
                    "verdict": r.verdict,
                    "family": ss.family(),
                    "params": r,
                    "model_error": e.to_string(),
                });
                return Ok((r.verdict, v));
            }
            _ => return Err(e),
        },
    };
    let necessary = check_necessary(&model, ss, cfg)?;
    let sufficient = check_sufficient(&model, ss, cfg)?;
    let uniqueness = uniqueness_report(&model, ss, cfg);
    let mut overall = necessary.clone();
    match &params_report {
        Some(r) => overall.merge(r.clone()),
        None => overall.merge(sufficient.clone()),
    }
    let v = json!({
        "command": "validate",
        "verdict": overall.verdict,
        "family": ss.family(),
        "violations": overall.violations,
        "params": params_report,
        "necessary": necessary,
        "sufficient": sufficient,
        "uniqueness": uniqueness,
    });
    Ok((overall.verdict, v))
}

fn cmd_validate(spec: &LoadedSpec, ctx: &mut Ctx) -> Result<i32> {
    let (verdict, report) = cmd_validate_report(spec, &ctx.samples)?;
    ctx.emit_json(&report)?;
    Ok(verdict_code(verdict))
}

#[allow(clippy::too_many_arguments)]
fn cmd_moments(
    spec: &LoadedSpec,
    poly: &str,
    x: Option<Vec<f64>>,
    tau: f64,
    degree: Option<u32>,
    mc_paths: usize,
    dt: f64,
    ctx: &mut Ctx,
) -> Result<i32> {
    let d = spec.dim();
    let p = Polynomial::parse(poly, d)?;
    let x = spec.x0(x)?;
    let degree = degree
        .or(spec.file.degree)
        .unwrap_or(0)
        .max(p.degree().max(0) as u32);
    let pd = PolyDiffusion::new(spec.model()?, spec.state_space.clone(), degree)?;
    let moment = pd.conditional_moment(&p, &x, tau)?;
    let mut report = json!({
        "command": "moments",
        "poly": p.to_string(),
        "x": x,
        "tau": tau,
        "degree": degree,
        "moment": moment,
    });
    if ctx.verify {
        let ode = pd.moment_ode_oracle(&p, &x, tau)?;
        let mut verify = json!({ "ode": ode, "abs_diff_ode": (moment - ode).abs() });
        if mc_paths > 0 {
            let sim = SimulationSpec::new(tau, dt, mc_paths, ctx.seed).endpoints_only();
            let paths = simulate_paths(pd.model(), pd.state_space(), &x, &sim)?;
            let (est, se) = mc_moment(&paths, &p, tau)?;
            verify["mc"] = json!({
                "estimate": est,
                "standard_error": se,
                "abs_diff": (moment - est).abs(),
                "n_paths": mc_paths,
                "dt": paths.dt(),
                "seed": ctx.seed,
            });
        }
        report["verify"] = verify;
    }
    ctx.emit_json(&report)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(
    spec: &LoadedSpec,
    x0: Option<Vec<f64>>,
    sim: &SimulationSpec,
    gzip: bool,
    threshold: Option<f64>,
    summary_path: Option<&Path>,
    ctx: &mut Ctx,
) -> Result<i32> {
    let ss = &spec.state_space;
    let x0 = spec.x0(x0)?;
    if let Some(p) = &spec.params {
        let r = validate(ss, p, &ctx.samples)?;
        if !r.is_valid() {
            log::warn!(
                "parameters are not validated ({:?}); simulating anyway",
                r.verdict
            );
        }
    }
    let model = spec.model()?;
    let paths = simulate_paths(&model, ss, &x0, sim)?;
    if let Some(out) = &ctx.out {
        paths.write_csv_file(out, gzip)?;
    }
    let threshold = threshold.unwrap_or_else(|| default_threshold(ss));
    let stats = ss
        .inequalities()
        .iter()
        .map(|p| boundary_stats(&paths, p, threshold))
        .collect::<Result<Vec<_>>>()?;
    let t_end = paths.n_steps() as f64 * paths.dt();
    let mean_final = (0..ss.dim())
        .map(|i| mc_moment(&paths, &Polynomial::variable(ss.dim(), i), t_end).map(|m| m.0))
        .collect::<Result<Vec<_>>>()
        .ok();
    let summary = json!({
        "command": "simulate",
        "seed": paths.seed(),
        "dt": paths.dt(),
        "t_end": t_end,
        "n_steps": paths.n_steps(),
        "n_paths": paths.n_paths(),
        "projection": paths.projection(),
        "max_refinement": paths.max_refinement(),
        "x0": x0,
        "csv": ctx.out.as_ref().map(|p| p.display().to_string()),
        "gzip": gzip,
        "mean_final": mean_final,
        "boundary": stats,
    });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    if let Some(path) = summary_path {
        fs::write(path, &text)?;
    }
    if !ctx.quiet {
        ctx.stdout.write_all(text.as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn cmd_boundary(spec: &LoadedSpec, ctx: &mut Ctx) -> Result<i32> {
    let model = spec.model()?;
    let ss = &spec.state_space;
    let strata: Vec<_> = ss
        .inequalities()
        .iter()
        .map(|p| boundary_classify(&model, ss, p, &ctx.samples))
        .collect();
    let inconclusive = strata
        .iter()
        .any(|s| matches!(s.verdict, BoundaryVerdict::Inconclusive { .. }));
    ctx.emit_json(&json!({ "command": "boundary", "strata": strata }))?;
    Ok(if inconclusive { EXIT_NEGATIVE } else { EXIT_OK })
}

fn pricing_model(spec: &LoadedSpec, extra_degree: i32, ctx: &Ctx) -> Result<PricingModel> {
    let pricing = spec
        .file
        .pricing
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("the spec has no `pricing` block".into()))?;
    let d = spec.dim();
    let p = pricing.p.resolve(d)?;
    let needed = (p.degree().max(0) + extra_degree.max(0)) as u32;
    let degree = pricing
        .degree
        .or(spec.file.degree)
        .unwrap_or(needed)
        .max(needed);
    let pd = PolyDiffusion::new(spec.model()?, spec.state_space.clone(), degree)?;
    PricingModel::new(pd, p, pricing.alpha_rate, &ctx.samples)
}

fn cmd_price(spec: &LoadedSpec, inst: &Instrument, ctx: &mut Ctx) -> Result<i32> {
    let report = match inst {
        Instrument::Bond { t, maturity, x } => {
            let pm = pricing_model(spec, 0, ctx)?;
            let x = spec.x0(x.clone())?;
            let price = pm.bond_price(&x, *t, *maturity)?;
            let mut diag = json!({
                "short_rate": pm.short_rate(&x).ok(),
                "density_at_x": pm.density().eval(&x),
                "positivity": pm.positivity(),
            });
            if ctx.verify {
                let pd = pm.diffusion();
                let ode = pd.moment_ode_oracle(pm.density(), &x, maturity - t)?;
                let oracle = (-pm.alpha() * (maturity - t)).exp() * ode / pm.density().eval(&x);
                diag["ode_price"] = json!(oracle);
                diag["abs_diff_ode"] = json!((price - oracle).abs());
            }
            json!({ "command": "price", "kind": "bond", "price": price, "standard_error": null, "diagnostics": diag })
        }
        Instrument::Vswap {
            t,
            maturity,
            x,
            variance,
        } => {
            let d = spec.dim();
            let v = match variance {
                Some(v) => Some(v.resolve(d)?),
                None => None,
            };
            let pm = pricing_model(spec, v.as_ref().map_or(0, |v| v.degree()), ctx)?;
            let v = v.unwrap_or_else(|| pm.density().clone());
            let x = spec.x0(x.clone())?;
            let price = variance_swap_rate(pm.diffusion(), &v, &x, *t, *maturity)?;
            json!({
                "command": "price",
                "kind": "vswap",
                "price": price,
                "standard_error": null,
                "diagnostics": { "spot_variance": v.eval(&x), "variance_poly": v.to_string() },
            })
        }
        Instrument::Swaption {
            expiry,
            coupons,
            x,
            mc,
        } => {
            let pm = pricing_model(spec, 0, ctx)?;
            let x = spec.x0(x.clone())?;
            let mc = mc.clone().unwrap_or(McConfig {
                seed: ctx.seed,
                ..McConfig::default()
            });
            let (price, se) = pm.swaption_price_mc(coupons, *expiry, &x, &mc)?;
            let w = pm.swaption_payoff_vector(coupons, *expiry)?;
            json!({
                "command": "price",
                "kind": "swaption",
                "price": price,
                "standard_error": se,
                "diagnostics": {
                    "payoff_poly": w.to_polynomial().to_string(),
                    "density_at_x": pm.density().eval(&x),
                    "mc": mc,
                },
            })
        }
        Instrument::EquityOption {
            constituent,
            maturity,
            strike,
            horizon,
            pricer,
            x,
            grid_size,
            cheb_degree,
            mc,
        } => {
            let Some(ModelParams::Simplex(params)) = &spec.params else {
                return Err(Error::InvalidInput(
                    "equity_option needs a simplex spec with family `params`".into(),
                ));
            };
            let pricing_degree = spec.file.pricing.as_ref().and_then(|p| p.degree);
            let degree = pricing_degree.or(spec.file.degree).unwrap_or(10);
            let cheb = cheb_degree.unwrap_or((degree as usize).min(10));
            let sim = SimplexIndexModel::new(params, degree, *horizon)?;
            let pricer: Box<dyn IndexCallPricer> = match pricer {
                PricerSpec::BlackScholes { spot, vol, rate } => Box::new(BlackScholesPricer {
                    spot: *spot,
                    vol: *vol,
                    rate: *rate,
                }),
                PricerSpec::Tabulated { strikes, prices } => Box::new(TabulatedPricer::new(
                    *maturity,
                    strikes.clone(),
                    prices.clone(),
                )?),
            };
            let x = spec.x0(x.clone())?;
            let r = constituent_option_price(
                &sim,
                pricer.as_ref(),
                *constituent,
                *maturity,
                *strike,
                &x,
                grid_size.unwrap_or(64),
                cheb,
            )?;
            let mut diag = json!({
                "fit_residual": r.fit_residual,
                "cheb_degree": r.cheb_degree,
                "grid_size": r.grid_size,
                "basis_degree": degree,
            });
            if ctx.verify {
                let mc = mc.clone().unwrap_or(McConfig {
                    seed: ctx.seed,
                    ..McConfig::default()
                });
                let (est, se) = constituent_option_price_mc(
                    &sim,
                    pricer.as_ref(),
                    *constituent,
                    *maturity,
                    *strike,
                    &x,
                    &mc,
                )?;
                let tol = (3.0 * se).max(r.fit_residual);
                diag["mc"] = json!({
                    "estimate": est,
                    "standard_error": se,
                    "abs_diff": (r.price - est).abs(),
                    "within_tolerance": (r.price - est).abs() <= tol,
                    "config": mc,
                });
            }
            json!({ "command": "price", "kind": "equity_option", "price": r.price, "standard_error": null, "diagnostics": diag })
        }
    };
    ctx.emit_json(&report)?;
    Ok(EXIT_OK)
}
