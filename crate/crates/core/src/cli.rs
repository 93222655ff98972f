//! Command-line front end.
//!
//! Every command takes its settings from flags, optionally layered over a
//! JSON config file (`--config`); flags win. `--emit-config` writes the fully
//! resolved settings, which reproduce the run when fed back through
//! `--config`. Exit codes: 0 on success or PASS, 1 on domain errors and FAIL
//! verdicts, 2 on usage and I/O errors.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::emden::{closed_form_gamma2, energy_drift, integrate, IntegrationConfig, Trajectory};
use crate::error::{Error, Result};
use crate::fv::{self, FvConfig, Gas};
use crate::presets::{self, Preset, PRESETS};
use crate::regimes::{certify, classify, integrated_return_time, period_quadrature, RegimeKind};
use crate::residual::{
    conjecture3d_residual_ladder, euler_residual_2d, euler_residual_3d, integrate_scales_3d,
    mass_residual_generic_g, navier_stokes_residual_2d, ns_viscous_term, polynomial_g,
    random_poly_coeffs, residual_convergence, zz_direct_residual, Conjecture3DParams,
    GenericRotationField, Grid3Spec, GridSpec, Order, Region, ResidualReport, ScaleSource, Verdict,
    ZzForm, VISCOUS_STEP,
};
use crate::solution::{
    eval_flow, validate_params, zhang_zheng_embedding, zhang_zheng_field, QueryPoint, RawParams,
    ScaleState, SolutionParams,
};

#[derive(Parser)]
#[command(
    name = "vortical",
    version,
    about = "Exact vortical self-similar Euler flows: evaluate, integrate, classify, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample rho, u and p on a box grid at one time (CSV x,y,rho,u1,u2,p).
    #[command(allow_negative_numbers = true)]
    Eval(EvalArgs),
    /// Integrate the scale equation (CSV t,a,adot,E,F_kin,F_pot).
    #[command(allow_negative_numbers = true)]
    Integrate(IntegrateArgs),
    /// Classify the long-time behaviour of the scale.
    #[command(allow_negative_numbers = true)]
    Classify(ClassifyArgs),
    /// Period of a bound orbit by quadrature.
    #[command(allow_negative_numbers = true)]
    Period(PeriodArgs),
    /// Finite-difference residuals of an exact field.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// PASS/FAIL check of the 3D anisotropic family.
    #[command(name = "verify3d", allow_negative_numbers = true)]
    Verify3d(Verify3dArgs),
    /// Finite-volume solver against an exact field: error and order table.
    #[command(allow_negative_numbers = true)]
    Fvbench(FvbenchArgs),
    /// List the named parameter presets as JSON.
    Presets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file with settings; flags given on the command line override it.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Write the resolved settings as JSON to this file.
    #[arg(long)]
    #[serde(skip)]
    emit_config: Option<PathBuf>,
}

impl OutArgs {
    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn format(&self) -> Format {
        self.format.expect("format resolved before use")
    }
}

/// Parameter set: a preset, individual values, or a preset with overrides.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct ParamArgs {
    /// Named parameter set (see `vortical presets`); individual flags override it.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    k: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
}

impl ParamArgs {
    fn slots(&mut self) -> [(&'static str, &mut Option<f64>); 7] {
        [
            ("gamma", &mut self.gamma),
            ("K", &mut self.k),
            ("xi", &mut self.xi),
            ("lambda", &mut self.lambda),
            ("alpha", &mut self.alpha),
            ("a0", &mut self.a0),
            ("a1", &mut self.a1),
        ]
    }

    /// Fill unset values from the preset (or `fallback` when nothing at all
    /// was given) and return the preset used.
    fn resolve(&mut self, fallback: Option<&str>) -> Result<Option<&'static Preset>> {
        if self.preset.is_none() && self.slots().iter().all(|(_, v)| v.is_none()) {
            self.preset = fallback.map(str::to_string);
        }
        let preset = self.preset.as_deref().map(presets::preset).transpose()?;
        if let Some(p) = preset {
            for ((_, slot), v) in self.slots().into_iter().zip(p.values) {
                slot.get_or_insert(v);
            }
        }
        Ok(preset)
    }

    fn params(&mut self) -> Result<SolutionParams> {
        let missing: Vec<&str> = self
            .slots()
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(n, _)| *n)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Usage(format!(
                "missing parameters {}; give --preset or set them",
                missing.join(", ")
            )));
        }
        let v = |o: Option<f64>| o.expect("checked above");
        validate_params(RawParams {
            gamma: v(self.gamma),
            k: v(self.k),
            xi: v(self.xi),
            lambda: v(self.lambda),
            alpha: v(self.alpha),
            a0: v(self.a0),
            a1: v(self.a1),
        })
    }
}

/// Scale-equation solver settings.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct IntegArgs {
    /// Time at which a0 and a1 hold; defaults to the preset's anchor or 0.
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Largest solver step; unbounded when absent.
    #[arg(long)]
    max_step: Option<f64>,
    /// The scale counts as collapsed below this value.
    #[arg(long)]
    collapse_eps: Option<f64>,
}

impl IntegArgs {
    fn resolve(&mut self, preset: Option<&Preset>) {
        let d = IntegrationConfig::default();
        self.t0.get_or_insert(preset.map_or(0.0, |p| p.t0));
        self.rtol.get_or_insert(d.rel_tol);
        self.atol.get_or_insert(d.abs_tol);
        self.collapse_eps.get_or_insert(d.collapse_epsilon);
    }

    fn config(&self, t_end: f64) -> IntegrationConfig {
        let d = IntegrationConfig::default();
        IntegrationConfig {
            rel_tol: self.rtol.unwrap_or(d.rel_tol),
            abs_tol: self.atol.unwrap_or(d.abs_tol),
            max_step: self.max_step.unwrap_or(d.max_step),
            collapse_epsilon: self.collapse_eps.unwrap_or(d.collapse_epsilon),
            t_end,
            t0: self.t0.unwrap_or(d.t0),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    integ: IntegArgs,
    /// Evaluation time; defaults to t0.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    x_lo: Option<f64>,
    #[arg(long)]
    x_hi: Option<f64>,
    #[arg(long)]
    y_lo: Option<f64>,
    #[arg(long)]
    y_hi: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct IntegrateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    integ: IntegArgs,
    /// End time; defaults to t0 + 10.
    #[arg(long)]
    t_end: Option<f64>,
    /// Resample to this many equal intervals instead of the solver's own nodes.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    /// Confirm the classification by direct integration.
    #[arg(long)]
    #[serde(default)]
    certify: bool,
    /// Integration horizon used by --certify.
    #[arg(long)]
    horizon: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct PeriodArgs {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    /// Compare with the first return time found by integration.
    #[arg(long)]
    #[serde(default)]
    check_return: bool,
    /// Integration horizon used by --check-return; defaults to 4 periods + 10.
    #[arg(long)]
    horizon: Option<f64>,
    /// Relative tolerance for --check-return.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum VerifyCase {
    /// A family member driven by the integrated scale.
    Family,
    /// The closed-form gamma = 2 field.
    Zz,
    /// Radial density with random polynomial swirl profiles.
    Swirl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FormArg {
    Printed,
    Reflected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OrderArg {
    Second,
    Fourth,
}

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Order {
        match o {
            OrderArg::Second => Order::Second,
            OrderArg::Fourth => Order::Fourth,
        }
    }
}

/// Annulus sampling plan and stencil steps.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
struct GridArgs {
    #[arg(long)]
    r_lo: Option<f64>,
    /// Outer radius; for finite support defaults to the largest radius the
    /// support margin allows (at most 2).
    #[arg(long)]
    r_hi: Option<f64>,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_theta: Option<usize>,
    /// Space step.
    #[arg(long)]
    h: Option<f64>,
    /// Time step; defaults to h / 4.
    #[arg(long)]
    h_t: Option<f64>,
    #[arg(long, value_enum)]
    space_order: Option<OrderArg>,
    #[arg(long, value_enum)]
    time_order: Option<OrderArg>,
    #[arg(long)]
    support_margin: Option<f64>,
}

impl GridArgs {
    fn resolve(&mut self, r_lo: f64, r_hi: f64) {
        let d = GridSpec::default();
        self.r_lo.get_or_insert(r_lo);
        self.r_hi.get_or_insert(r_hi);
        if let Region::Annulus { n_r, n_theta, .. } = d.region {
            self.n_r.get_or_insert(n_r);
            self.n_theta.get_or_insert(n_theta);
        }
        let h = *self.h.get_or_insert(d.h);
        self.h_t.get_or_insert(crate::residual::TIME_STEP_RATIO * h);
        self.space_order.get_or_insert(OrderArg::Fourth);
        self.time_order.get_or_insert(OrderArg::Second);
        self.support_margin.get_or_insert(d.support_margin);
    }

    fn spec(&self) -> GridSpec {
        let d = GridSpec::default();
        let (n_r0, n_t0) = match d.region {
            Region::Annulus { n_r, n_theta, .. } => (n_r, n_theta),
            Region::Box { nx, ny, .. } => (nx, ny),
        };
        let h = self.h.unwrap_or(d.h);
        GridSpec {
            region: Region::Annulus {
                r_lo: self.r_lo.unwrap_or(0.1),
                r_hi: self.r_hi.unwrap_or(2.0),
                n_r: self.n_r.unwrap_or(n_r0),
                n_theta: self.n_theta.unwrap_or(n_t0),
            },
            h,
            h_t: self.h_t.unwrap_or(crate::residual::TIME_STEP_RATIO * h),
            support_margin: self.support_margin.unwrap_or(d.support_margin),
            space_order: self.space_order.map_or(d.space_order, Order::from),
            time_order: self.time_order.map_or(d.time_order, Order::from),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    case: Option<VerifyCase>,
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    integ: IntegArgs,
    /// Time of the check.
    #[arg(long)]
    t: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    /// PASS threshold on the worst normalized residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated decreasing space steps for an observed-order fit.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<f64>>,
    /// Viscosities for the Navier-Stokes comparison (family case).
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    /// Laplacian step for the viscous term.
    #[arg(long)]
    visc_h: Option<f64>,
    /// Which version of the closed-form field to test (zz case).
    #[arg(long, value_enum)]
    form: Option<FormArg>,
    /// Random seed (zz sample points, swirl coefficients).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random samples (zz points, swirl fields).
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Case3 {
    Isotropic,
    Drift,
    Anisotropic,
}

impl Case3 {
    fn name(self) -> &'static str {
        match self {
            Case3::Isotropic => "isotropic",
            Case3::Drift => "drift",
            Case3::Anisotropic => "anisotropic",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct Verify3dArgs {
    #[arg(long, value_enum)]
    case: Option<Case3>,
    /// JSON file with a full 3D parameter set; replaces --case.
    #[arg(long)]
    params3d: Option<PathBuf>,
    #[arg(long)]
    t: Option<f64>,
    /// Lattice points per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Radius of the sampled ball in similarity coordinates.
    #[arg(long)]
    z_radius: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    h_t: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated decreasing space steps for an observed-order fit.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct FvbenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    integ: IntegArgs,
    /// End of the run; defaults to t0 + 0.2.
    #[arg(long)]
    t_end: Option<f64>,
    /// Comma-separated grid sizes (cells per side).
    #[arg(long, value_delimiter = ',')]
    resolutions: Option<Vec<usize>>,
    #[arg(long)]
    x_lo: Option<f64>,
    #[arg(long)]
    x_hi: Option<f64>,
    #[arg(long)]
    y_lo: Option<f64>,
    #[arg(long)]
    y_hi: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    rho_floor: Option<f64>,
    /// Write the final cell values of one run as CSV.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Resolution of the dumped run; defaults to the first one.
    #[arg(long)]
    dump_resolution: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

/// Success, or a completed check whose verdict is FAIL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn of(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
        }
    }
}

/// Parse `args` (program name first), run the command and return the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Eval(a) => cmd_eval(a),
        Command::Integrate(a) => cmd_integrate(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Period(a) => cmd_period(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Verify3d(a) => cmd_verify3d(a),
        Command::Fvbench(a) => cmd_fvbench(a),
        Command::Presets => {
            let cases: Vec<Value> = presets::CONJECTURE3D_CASES
                .iter()
                .map(|n| Ok(json!({ "name": n, "params": presets::conjecture3d_case(n)? })))
                .collect::<Result<_>>()?;
            write_json(
                &mut io::stdout().lock(),
                &json!({ "presets": PRESETS, "conjecture3d_cases": cases }),
            )?;
            Ok(Outcome::Pass)
        }
    }
}

/// Layer the command-line values over the config file, if any. `null` and
/// `false` on the command line mean "not given".
fn with_config<T: Serialize + DeserializeOwned>(cli: T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else { return Ok(cli) };
    let text = std::fs::read_to_string(path)?;
    let Value::Object(mut merged) = serde_json::from_str(&text)? else {
        return Err(Error::Usage(format!(
            "{}: config must be a JSON object",
            path.display()
        )));
    };
    let Value::Object(flags) = serde_json::to_value(&cli)? else {
        unreachable!("argument structs serialize to objects")
    };
    let known: HashSet<&String> = flags.keys().collect();
    if let Some(key) = merged.keys().find(|k| !known.contains(k)) {
        return Err(Error::Usage(format!(
            "{}: unknown config key '{key}'",
            path.display()
        )));
    }
    for (k, v) in flags {
        if !(v.is_null() || v == Value::Bool(false)) {
            merged.insert(k, v);
        }
    }
    Ok(serde_json::from_value(Value::Object(merged))?)
}

fn emit_config<T: Serialize>(args: &T, out: &OutArgs) -> Result<()> {
    if let Some(path) = &out.emit_config {
        let mut w = BufWriter::new(File::create(path)?);
        write_json(&mut w, args)?;
        w.flush()?;
    }
    Ok(())
}

fn write_json<W: Write + ?Sized, T: Serialize + ?Sized>(w: &mut W, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)?;
    Ok(())
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// Scale at `t` from the anchor `(t0, a0, a1)`.
fn scale_at(params: &SolutionParams, integ: &IntegArgs, t: f64) -> Result<ScaleState> {
    let cfg = integ.config(t);
    if t == cfg.t0 {
        return Ok(ScaleState::new(t, params.a0(), params.a1()));
    }
    if t < cfg.t0 {
        return Err(Error::InvalidConfig(format!(
            "time {t} precedes the anchor t0 = {}",
            cfg.t0
        )));
    }
    integrate(params, &cfg)?.scale_at(t)
}

fn cmd_eval(a: EvalArgs) -> Result<Outcome> {
    let config = a.out.config.clone();
    let mut a = with_config(a, config.as_deref())?;
    let preset = a.params.resolve(None)?;
    a.integ.resolve(preset);
    let t = *a.t.get_or_insert(a.integ.t0.expect("resolved"));
    let (x_lo, x_hi) = (*a.x_lo.get_or_insert(-1.0), *a.x_hi.get_or_insert(1.0));
    let (y_lo, y_hi) = (*a.y_lo.get_or_insert(-1.0), *a.y_hi.get_or_insert(1.0));
    let (nx, ny) = (*a.nx.get_or_insert(21), *a.ny.get_or_insert(21));
    a.out.format.get_or_insert(Format::Csv);
    emit_config(&a, &a.out)?;

    let params = a.params.params()?;
    if nx == 0 || ny == 0 || !(x_hi >= x_lo && y_hi >= y_lo) {
        return Err(Error::InvalidGrid(
            "eval box needs ordered extents and positive counts".into(),
        ));
    }
    let state = scale_at(&params, &a.integ, t)?;
    let lin = |lo: f64, hi: f64, n: usize, i: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut rows = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (lin(x_lo, x_hi, nx, i), lin(y_lo, y_hi, ny, j));
            rows.push((x, y, eval_flow(&params, &state, &QueryPoint::new(x, y))?));
        }
    }
    let mut w = a.out.sink()?;
    match a.out.format() {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record(["x", "y", "rho", "u1", "u2", "p"])?;
            for (x, y, f) in &rows {
                c.write_record([x, y, &f.rho, &f.u1, &f.u2, &f.p].map(|v| v.to_string()))?;
            }
            c.flush()?;
        }
        Format::Json => {
            let samples: Vec<Value> =
                rows.iter().map(|(x, y, f)| json!({ "x": x, "y": y, "rho": f.rho, "u1": f.u1, "u2": f.u2, "p": f.p })).collect();
            write_json(
                &mut w,
                &json!({ "params": params, "state": state, "samples": samples }),
            )?;
        }
    }
    finish(w)?;
    Ok(Outcome::Pass)
}

/// Largest `|a - a_exact|` over the nodes for `gamma = 2`, where the scale is
/// known in closed form.
fn closed_form_error(params: &SolutionParams, traj: &Trajectory, t0: f64) -> Option<f64> {
    if params.gamma() != 2.0 {
        return None;
    }
    let mut worst = 0.0f64;
    for n in traj.nodes() {
        // autonomous equation: shift the anchor to t = 0
        let exact = closed_form_gamma2(params, n.state.t - t0).ok()?;
        worst = worst.max((n.state.a - exact.a).abs());
    }
    Some(worst)
}

fn cmd_integrate(a: IntegrateArgs) -> Result<Outcome> {
    let config = a.out.config.clone();
    let mut a = with_config(a, config.as_deref())?;
    let preset = a.params.resolve(None)?;
    a.integ.resolve(preset);
    let t_end = *a.t_end.get_or_insert(a.integ.t0.expect("resolved") + 10.0);
    a.out.format.get_or_insert(Format::Csv);
    emit_config(&a, &a.out)?;

    let params = a.params.params()?;
    let cfg = a.integ.config(t_end);
    let traj = integrate(&params, &cfg)?;
    let nodes = match a.samples {
        Some(n) => traj.sample_uniform(n),
        None => traj.nodes().to_vec(),
    };
    let mut w = a.out.sink()?;
    match a.out.format() {
        Format::Csv => Trajectory::write_csv(&nodes, &mut w)?,
        Format::Json => {
            let (accepted, rejected) = traj.steps();
            write_json(
                &mut w,
                &json!({
                    "params": params,
                    "config": cfg,
                    "event": traj.event(),
                    "t_start": traj.t_start(),
                    "t_end": traj.t_end(),
                    "accepted_steps": accepted,
                    "rejected_steps": rejected,
                    "energy_drift": energy_drift(&traj),
                    "closed_form_max_error": closed_form_error(&params, &traj, cfg.t0),
                    "nodes": nodes,
                }),
            )?;
        }
    }
    finish(w)?;
    Ok(Outcome::Pass)
}

fn regime_fields(kind: &RegimeKind) -> [String; 2] {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    match kind {
        RegimeKind::TimePeriodic { period } => [opt(Some(*period)), String::new()],
        RegimeKind::FiniteTimeBlowup { t_star, .. } => [String::new(), opt(Some(*t_star))],
        _ => [String::new(), String::new()],
    }
}

fn cmd_classify(a: ClassifyArgs) -> Result<Outcome> {
    let config = a.out.config.clone();
    let mut a = with_config(a, config.as_deref())?;
    a.params.resolve(None)?;
    let horizon = *a.horizon.get_or_insert(100.0);
    a.out.format.get_or_insert(Format::Json);
    emit_config(&a, &a.out)?;

    let params = a.params.params()?;
    let regime = classify(&params)?;
    let cert = if a.certify {
        Some(certify(&params, &regime, horizon)?)
    } else {
        None
    };
    let mut w = a.out.sink()?;
    match a.out.format() {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record(["branch", "kind", "period", "t_star", "certified"])?;
            let [period, t_star] = regime_fields(&regime.kind);
            let certified = if cert.is_some() { "true" } else { "" };
            c.write_record([
                regime.branch.label(),
                regime.kind.name(),
                &period,
                &t_star,
                certified,
            ])?;
            c.flush()?;
        }
        Format::Json => write_json(
            &mut w,
            &json!({ "params": params, "branch": regime.branch, "regime": regime, "certification": cert }),
        )?,
    }
    finish(w)?;
    Ok(Outcome::Pass)
}

fn cmd_period(a: PeriodArgs) -> Result<Outcome> {
    let config = a.out.config.clone();
    let mut a = with_config(a, config.as_deref())?;
    a.params.resolve(None)?;
    let tol = *a.tol.get_or_insert(1e-5);
    a.out.format.get_or_insert(Format::Json);
    let params = a.params.params();
    // the default horizon depends on the period, so resolve it when possible
    let quad = params.as_ref().ok().map(period_quadrature);
    if let Some(Ok(q)) = &quad {
        a.horizon.get_or_insert(4.0 * q.period + 10.0);
    }
    emit_config(&a, &a.out)?;

    let params = params?;
    let q = quad.expect("params valid")?;
    let mut outcome = Outcome::Pass;
    let mut check = Value::Null;
    if a.check_return {
        let horizon = a.horizon.expect("resolved");
        let t_ret = integrated_return_time(&params, horizon)?
            .ok_or_else(|| Error::InvalidConfig(format!("no return within horizon {horizon}")))?;
        let dev = (q.period - t_ret).abs() / t_ret;
        outcome = Outcome::of(dev <= tol);
        check = json!({ "return_time": t_ret, "relative_deviation": dev, "tolerance": tol, "verdict": outcome.label() });
    }
    let mut w = a.out.sink()?;
    match a.out.format() {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record([
                "period",
                "error_estimate",
                "a_min",
                "a_max",
                "return_time",
                "relative_deviation",
            ])?;
            let cell = |k: &str| check.get(k).map(|v| v.to_string()).unwrap_or_default();
            c.write_record(&[
                q.period.to_string(),
                q.error_estimate.to_string(),
                q.a_min.to_string(),
                q.a_max.to_string(),
                cell("return_time"),
                cell("relative_deviation"),
            ])?;
            c.flush()?;
        }
        Format::Json => write_json(
            &mut w,
            &json!({ "params": params, "period": q, "check": check }),
        )?,
    }
    finish(w)?;
    report_outcome(outcome, "period round trip");
    Ok(outcome)
}

fn report_outcome(outcome: Outcome, what: &str) {
    if outcome == Outcome::Fail {
        eprintln!("FAIL: {what}");
    }
}

/// Widest annulus that keeps every stencil inside the support margin.
fn default_r_hi(params: &SolutionParams, traj: &Trajectory, t: f64, grid: &GridSpec) -> f64 {
    let Some(s_star) = params.support_s() else {
        return 2.0;
    };
    let reach = grid.steps().time_reach();
    let a_min = [t - reach, t, t + reach]
        .iter()
        .filter_map(|&s| traj.state_at(s))
        .map(|st| st.a)
        .fold(f64::INFINITY, f64::min);
    if !a_min.is_finite() {
        return 2.0;
    }
    (0.95 * a_min * (grid.support_margin * s_star).sqrt() - grid.steps().space_reach()).min(2.0)
}

fn convergence_json(
    ladder: Option<&[f64]>,
    op: impl Fn(f64) -> Result<ResidualReport>,
) -> Result<Value> {
    Ok(match ladder {
        Some(l) => serde_json::to_value(residual_convergence(l, op)?)?,
        None => Value::Null,
    })
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    let config = a.out.config.clone();
    let mut a = with_config(a, config.as_deref())?;
    let case = *a.case.get_or_insert(VerifyCase::Family);
    a.out.format.get_or_insert(Format::Json);
    match case {
        VerifyCase::Family => verify_family(a),
        VerifyCase::Zz => verify_zz(a),
        VerifyCase::Swirl => verify_swirl(a),
    }
}

fn write_report(out: &OutArgs, report: &ResidualReport, summary: Value) -> Result<()> {
    let mut w = out.sink()?;
    match out.format() {
        Format::Csv => report.write_csv(&mut w)?,
        Format::Json => write_json(&mut w, &summary)?,
    }
    finish(w)
}

fn verify_family(mut a: VerifyArgs) -> Result<Outcome> {
    let preset = a.params.resolve(Some("generic"))?;
    a.integ.resolve(preset);
    let t0 = a.integ.t0.expect("resolved");
    let t = *a.t.get_or_insert(t0 + 0.5);
    let tol = *a.tol.get_or_insert(1e-6);
    let visc_h = *a.visc_h.get_or_insert(VISCOUS_STEP);
    let params = a.params.params();
    // the scale is needed to size the annulus
    let traj = params
        .as_ref()
        .ok()
        .map(|p| integrate(p, &a.integ.config(t + 1.0)));
    let mut probe = a.grid.clone();
    probe.resolve(0.1, 2.0);
    let r_hi = match (&params, &traj) {
        (Ok(p), Some(Ok(tr))) => default_r_hi(
            p,
            tr,
            t,
            &GridArgs {
                r_hi: None,
                ..probe
            }
            .spec(),
        ),
        _ => 2.0,
    };
    a.grid.resolve(0.1, r_hi);
    emit_config(&a, &a.out)?;

    let params = params?;
    let traj = traj.expect("params valid")?;
    let grid = a.grid.spec();
    let report = euler_residual_2d(&params, &traj, t, &grid)?;
    let worst = report.max_normalized();
    let mut pass = worst <= tol;

    let mut viscous = Vec::new();
    if let Some(mus) = &a.mu {
        let state = traj.scale_at(t)?;
        for &mu in mus {
            let ns = navier_stokes_residual_2d(&params, &traj, t, &grid, mu, visc_h)?;
            let difference = report
                .equations
                .iter()
                .zip(&ns.equations)
                .map(|(e, n)| (e.max_normalized - n.max_normalized).abs())
                .fold(0.0, f64::max);
            let scale = report.equations[1..]
                .iter()
                .map(|e| e.scale)
                .fold(0.0, f64::max);
            let mut term = 0.0f64;
            for x in grid.points() {
                let v = ns_viscous_term(&params, &state, &QueryPoint::new(x[0], x[1]), mu, visc_h)?;
                term = term.max(v[0].hypot(v[1]));
            }
            let term_normalized = if scale > 0.0 { term / scale } else { term };
            pass &= difference <= 1e-10 && term_normalized <= 1e-10;
            viscous.push(json!({
                "mu": mu,
                "viscous_term_max": term,
                "viscous_term_normalized": term_normalized,
                "euler_ns_difference": difference,
            }));
        }
    }
    let convergence = convergence_json(a.ladder.as_deref(), |h| {
        euler_residual_2d(&params, &traj, t, &grid.with_h(h))
    })?;
    let outcome = Outcome::of(pass);
    let summary = json!({
        "case": "family",
        "params": params,
        "t": t,
        "grid": grid,
        "tolerance": tol,
        "max_normalized": worst,
        "verdict": outcome.label(),
        "residual": report,
        "viscous": viscous,
        "convergence": convergence,
    });
    write_report(&a.out, &report, summary)?;
    report_outcome(outcome, "family residual");
    Ok(outcome)
}

fn verify_zz(mut a: VerifyArgs) -> Result<Outcome> {
    let k = *a.params.k.get_or_insert(1.0);
    let t = *a.t.get_or_insert(1.0);
    let tol = *a.tol.get_or_insert(1e-7);
    let form = *a.form.get_or_insert(FormArg::Reflected);
    let seed = *a.seed.get_or_insert(0);
    let samples = *a.samples.get_or_insert(100);
    a.grid.resolve(0.1, 2.0);
    emit_config(&a, &a.out)?;

    let grid = a.grid.spec();
    let form = match form {
        FormArg::Printed => ZzForm::Printed,
        FormArg::Reflected => ZzForm::Reflected,
    };
    let report = zz_direct_residual(t, k, &grid, form)?;
    let worst = report.max_normalized();

    // the embedded family member against the printed formulas: density and
    // speed agree pointwise, the sense of rotation is mirrored
    let emb = zhang_zheng_embedding(k)?;
    let state = emb.state_at(t)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut deviation = 0.0f64;
    for _ in 0..samples {
        let q = QueryPoint::new(rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let fam = eval_flow(&emb.params, &state, &q)?;
        let zz = zhang_zheng_field(t, &q, k)?;
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        deviation = deviation
            .max(rel(fam.rho, zz.rho))
            .max(rel(fam.speed(), zz.speed()));
    }
    let convergence = convergence_json(a.ladder.as_deref(), |h| {
        zz_direct_residual(t, k, &grid.with_h(h), form)
    })?;
    let outcome = Outcome::of(worst <= tol && deviation <= 1e-12);
    let summary = json!({
        "case": "zz",
        "form": form,
        "K": k,
        "t": t,
        "grid": grid,
        "tolerance": tol,
        "max_normalized": worst,
        "embedding": { "chirality": emb.chirality, "samples": samples, "seed": seed, "max_deviation": deviation },
        "verdict": outcome.label(),
        "residual": report,
        "convergence": convergence,
    });
    write_report(&a.out, &report, summary)?;
    report_outcome(outcome, "closed-form residual");
    Ok(outcome)
}

fn verify_swirl(mut a: VerifyArgs) -> Result<Outcome> {
    let t = *a.t.get_or_insert(0.5);
    let tol = *a.tol.get_or_insert(1e-6);
    let seed = *a.seed.get_or_insert(0);
    let samples = *a.samples.get_or_insert(5);
    a.grid.resolve(0.2, 2.0);
    emit_config(&a, &a.out)?;

    let grid = a.grid.spec();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut fields = Vec::with_capacity(samples);
    let mut worst = 0.0f64;
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let coeffs = random_poly_coeffs(&mut rng);
        let m = mass_residual_generic_g(
            &GenericRotationField::gaussian(polynomial_g(coeffs)),
            t,
            &grid,
        )?;
        worst = worst.max(m.max_normalized);
        best = best.min(m.max_normalized);
        fields.push(json!({ "coefficients": coeffs, "mass": m }));
    }
    let outcome = Outcome::of(worst <= tol);
    let summary = json!({
        "case": "swirl",
        "t": t,
        "grid": grid,
        "seed": seed,
        "tolerance": tol,
        "max_normalized": worst,
        "min_normalized": best,
        "sweep_ratio": worst / best,
        "verdict": outcome.label(),
        "fields": fields,
    });
    let mut w = a.out.sink()?;
    match a.out.format() {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record([
                "field",
                "max_abs",
                "mean_abs",
                "scale",
                "max_normalized",
                "mean_normalized",
            ])?;
            for (i, f) in fields.iter().enumerate() {
                let m = &f["mass"];
                let cell = |k: &str| m[k].to_string();
                c.write_record(&[
                    i.to_string(),
                    cell("max_abs"),
                    cell("mean_abs"),
                    cell("scale"),
                    cell("max_normalized"),
                    cell("mean_normalized"),
                ])?;
            }
            c.flush()?;
        }
        Format::Json => write_json(&mut w, &summary)?,
    }
    finish(w)?;
    report_outcome(outcome, "generic swirl mass balance");
    Ok(outcome)
}

fn cmd_verify3d(a: Verify3dArgs) -> Result<Outcome> {
    let config = a.out.config.clone();
    let mut a = with_config(a, config.as_deref())?;
    if a.params3d.is_none() {
        a.case.get_or_insert(Case3::Anisotropic);
    }
    let d = Grid3Spec::default();
    let t = *a.t.get_or_insert(0.5);
    let tol = *a.tol.get_or_insert(1e-6);
    a.n.get_or_insert(d.n);
    let h = *a.h.get_or_insert(d.h);
    a.h_t.get_or_insert(crate::residual::TIME_STEP_RATIO * h);
    a.out.format.get_or_insert(Format::Json);
    emit_config(&a, &a.out)?;

    let c3: Conjecture3DParams = match (&a.params3d, a.case) {
        (Some(path), _) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        (None, Some(case)) => presets::conjecture3d_case(case.name())?,
        (None, None) => unreachable!("case defaulted above"),
    };
    c3.validate()?;
    let scales = integrate_scales_3d(&c3, &IntegrationConfig::until(t + 1.0))?;
    let grid = Grid3Spec {
        n: a.n.expect("resolved"),
        z_radius: a.z_radius,
        h,
        h_t: a.h_t.expect("resolved"),
        ..d
    };
    let mut report = euler_residual_3d(&c3, &scales, t, &grid, tol)?;
    if let Some(ladder) = &a.ladder {
        report.convergence = Some(conjecture3d_residual_ladder(
            &c3, &scales, t, &grid, ladder,
        )?);
    }
    let outcome = Outcome::of(report.verdict == Verdict::Pass);
    let mut w = a.out.sink()?;
    match a.out.format() {
        Format::Csv => report.residual.write_csv(&mut w)?,
        Format::Json => write_json(&mut w, &report)?,
    }
    finish(w)?;
    report_outcome(outcome, "3D residual");
    Ok(outcome)
}

fn cmd_fvbench(a: FvbenchArgs) -> Result<Outcome> {
    let config = a.out.config.clone();
    let mut a = with_config(a, config.as_deref())?;
    let preset = a.params.resolve(Some("generic"))?;
    a.integ.resolve(preset);
    let d = FvConfig::default();
    let t0 = a.integ.t0.expect("resolved");
    let t_end = *a.t_end.get_or_insert(t0 + (d.t_end - d.t0));
    let resolutions = a
        .resolutions
        .get_or_insert_with(|| vec![64, 128, 256])
        .clone();
    let cfg = FvConfig {
        x_lo: *a.x_lo.get_or_insert(d.x_lo),
        x_hi: *a.x_hi.get_or_insert(d.x_hi),
        y_lo: *a.y_lo.get_or_insert(d.y_lo),
        y_hi: *a.y_hi.get_or_insert(d.y_hi),
        cfl: *a.cfl.get_or_insert(d.cfl),
        rho_floor: *a.rho_floor.get_or_insert(d.rho_floor),
        t0,
        t_end,
        ..d
    };
    if a.dump.is_some() {
        a.dump_resolution
            .get_or_insert(resolutions.first().copied().unwrap_or(d.nx));
    }
    a.out.format.get_or_insert(Format::Csv);
    emit_config(&a, &a.out)?;

    let params = a.params.params()?;
    let traj = integrate(&params, &a.integ.config(t_end + 0.5))?;
    traj.require_span(t0, t_end)?;
    let report = fv::run_and_compare(&params, &traj, &cfg, &resolutions)?;
    if let (Some(path), Some(n)) = (&a.dump, a.dump_resolution) {
        let c = cfg.with_resolution(n);
        let mut field = fv::init_from_exact(&params, &traj, &c)?;
        let exact = crate::residual::FamilyField {
            params: &params,
            scales: &traj,
        };
        fv::run(&mut field, &c, &Gas::of(&params), Some(&exact))?;
        field.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let mut w = a.out.sink()?;
    match a.out.format() {
        Format::Csv => report.write_csv(&mut w)?,
        Format::Json => write_json(&mut w, &report)?,
    }
    finish(w)?;
    Ok(Outcome::Pass)
}
