//! Command-line front end. Every command writes CSV: `#` lines recording the
//! command and its resolved flags, a `#` line naming the columns, then rows.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::closedform::{ea_polar, ea_rescaled, nea_qfi, phase_bound};
use crate::error::Error;
use crate::optimize::{
    ea_envelope, maximize_ea, maximize_nea, minimize_1d, nea_envelope, NeaGrid, OptResult,
    DEFAULT_OMEGA_BRACKET, DEFAULT_TOL,
};
use crate::qfi::{cr_bound, Basis, BoundTarget, Jacobian, QfiMatrix};
use crate::scatter::DetectionMode;
use crate::states::{BlochVector, PolarCoords};
use crate::strategy::{closed_qfi, nea_pair, numeric_qfi, Strategy, Target};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "qscatter", version, about = "Fisher information of a qubit probed by spin scattering")]
pub struct RunConfig {
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<std::path::PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fisher matrix, numeric and closed form side by side.
    Qfi {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum, default_value_t = BasisArg::Cartesian)]
        basis: BasisArg,
    },
    /// Cramér-Rao bound on one parameter, a function of them, or the full covariance.
    Bound {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum, default_value_t = ParamArg::R)]
        param: ParamArg,
        /// Number of repetitions M.
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Treat the other parameters as known.
        #[arg(long)]
        single: bool,
    },
    /// Sweep Ω, θ_A or v_z and print closed-form information.
    Scan {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_enum, default_value_t = ScanParam::Omega)]
        param: ScanParam,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Logarithmic spacing (default for Ω).
        #[arg(long, conflicts_with = "linear")]
        log: bool,
        #[arg(long)]
        linear: bool,
        #[arg(long, value_enum, default_value_t = BasisArg::Polar)]
        basis: BasisArg,
    },
    /// Best probe momentum (and orientation for NEA).
    Optimize {
        #[arg(long, value_parser = parse_strategy, default_value = "ea")]
        strategy: Strategy,
        #[arg(long, value_parser = parse_mode, default_value = "both")]
        mode: DetectionMode,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        vz: f64,
        #[arg(long, value_enum, default_value_t = Objective::Qfi)]
        objective: Objective,
        #[arg(long, default_value_t = DEFAULT_OMEGA_BRACKET.0)]
        omega_min: f64,
        #[arg(long, default_value_t = DEFAULT_OMEGA_BRACKET.1)]
        omega_max: f64,
    },
    /// CSV data behind figure N (3 to 8).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(3..=8))]
        n: u8,
        /// Override the default number of grid points.
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Setup {
    #[arg(long, value_parser = parse_strategy, default_value = "ea")]
    pub strategy: Strategy,
    #[arg(long, value_parser = parse_mode, default_value = "both")]
    pub mode: DetectionMode,
    /// Dimensionless coupling Ω = mg/ħ|k|; ignored for direct.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// NEA probe polar angle in radians; ignored otherwise.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_a: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    #[arg(long, conflicts_with_all = ["vx", "vy", "vz"])]
    pub r: Option<f64>,
    #[arg(long, requires = "r", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, requires = "r", allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vy: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub vz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Cartesian,
    Polar,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Cartesian => Basis::Cartesian,
            BasisArg::Polar => Basis::Polar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    X,
    Y,
    Z,
    R,
    Theta,
    Phi,
    /// Purity (1 + r²)/2.
    Purity,
    /// Full covariance bound in Cartesian components.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanParam {
    Omega,
    ThetaA,
    Vz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    /// Maximize the information on v_z (or r for EA).
    Qfi,
    /// Minimize the EA phase bound.
    Phase,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<DetectionMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence(_) => EXIT_CONVERGENCE,
            Error::DegenerateBracket(..) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// `%.12g`.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct Csv<'a> {
    out: &'a mut dyn Write,
}

impl<'a> Csv<'a> {
    fn header(out: &'a mut dyn Write, command: &str, flags: &[(&str, String)], columns: &[&str]) -> CliResult<Self> {
        let mut line = format!("# qscatter {command}");
        for (k, v) in flags {
            line.push_str(&format!(" --{k} {v}"));
        }
        writeln!(out, "{line}")?;
        writeln!(out, "# {}", columns.join(","))?;
        Ok(Self { out })
    }

    fn row(&mut self, cells: &[String]) -> CliResult {
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    fn nums(&mut self, xs: &[f64]) -> CliResult {
        self.row(&xs.iter().map(|&x| fmt_g(x)).collect::<Vec<_>>())
    }
}

const DEFAULT_OMEGA: f64 = 0.616;

impl Setup {
    fn omega(&self) -> CliResult<f64> {
        match self.strategy {
            Strategy::Direct => Ok(self.omega.unwrap_or(DEFAULT_OMEGA)),
            _ => self
                .omega
                .ok_or_else(|| CliError::usage(format!("--omega is required for {}", self.strategy))),
        }
    }

    fn theta_a(&self) -> CliResult<f64> {
        match self.strategy {
            Strategy::Nea => self
                .theta_a
                .ok_or_else(|| CliError::usage("--theta-a is required for nea")),
            _ => Ok(0.0),
        }
    }

    fn flags(&self) -> Vec<(&'static str, String)> {
        let mut f = vec![("strategy", self.strategy.to_string())];
        if self.strategy != Strategy::Direct {
            f.push(("mode", self.mode.to_string()));
            if let Some(w) = self.omega {
                f.push(("omega", fmt_g(w)));
            }
        }
        if self.strategy == Strategy::Nea {
            if let Some(t) = self.theta_a {
                f.push(("theta-a", fmt_g(t)));
            }
        }
        f
    }
}

impl TargetArgs {
    fn resolve(&self) -> CliResult<Target> {
        if let Some(r) = self.r {
            let p = PolarCoords::new(r, self.theta.unwrap_or(0.0), self.phi.unwrap_or(0.0))?;
            return Ok(Target::Polar(p));
        }
        if self.vx.is_none() && self.vy.is_none() && self.vz.is_none() {
            return Err(CliError::usage("give the target with --r/--theta/--phi or --vx/--vy/--vz"));
        }
        let v = BlochVector::new(
            self.vx.unwrap_or(0.0),
            self.vy.unwrap_or(0.0),
            self.vz.unwrap_or(0.0),
        )?;
        Ok(Target::Cartesian(v))
    }

    fn flags(&self, target: &Target) -> Vec<(&'static str, String)> {
        match target {
            Target::Polar(p) => vec![("r", fmt_g(p.r)), ("theta", fmt_g(p.theta)), ("phi", fmt_g(p.phi))],
            Target::Cartesian(v) => vec![("vx", fmt_g(v.x)), ("vy", fmt_g(v.y)), ("vz", fmt_g(v.z))],
        }
    }
}

fn basis_name(b: BasisArg) -> &'static str {
    match b {
        BasisArg::Cartesian => "cartesian",
        BasisArg::Polar => "polar",
    }
}

/// Executes one command, writing CSV to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult {
    match &cfg.command {
        Command::Qfi { setup, target, basis } => cmd_qfi(setup, target, *basis, out),
        Command::Bound {
            setup,
            target,
            param,
            m,
            single,
        } => cmd_bound(setup, target, *param, *m, *single, out),
        Command::Scan {
            setup,
            target,
            param,
            from,
            to,
            n,
            log,
            linear,
            basis,
        } => {
            let log = if *log {
                true
            } else if *linear {
                false
            } else {
                *param == ScanParam::Omega
            };
            cmd_scan(setup, target, *param, (*from, *to), *n, log, *basis, out)
        }
        Command::Optimize {
            strategy,
            mode,
            vz,
            objective,
            omega_min,
            omega_max,
        } => cmd_optimize(*strategy, *mode, *vz, *objective, (*omega_min, *omega_max), out),
        Command::Figure { n, points } => cmd_figure(*n, *points, out),
    }
}

fn cmd_qfi(setup: &Setup, targs: &TargetArgs, basis: BasisArg, out: &mut dyn Write) -> CliResult {
    let target = targs.resolve()?;
    let omega = setup.omega()?;
    let theta_a = setup.theta_a()?;
    let mut flags = setup.flags();
    flags.extend(targs.flags(&target));
    flags.push(("basis", basis_name(basis).into()));
    let cols = ["row", "col", "numeric", "closed_form", "abs_diff"];

    if setup.strategy == Strategy::Nea {
        let (n, c) = nea_pair(&target.bloch(), theta_a, omega, setup.mode)?;
        let mut csv = Csv::header(out, "qfi", &flags, &cols)?;
        csv.row(&["2".into(), "2".into(), fmt_g(n), fmt_g(c), fmt_g((n - c).abs())])?;
        csv.row(&["max_abs_diff".into(), fmt_g((n - c).abs())])?;
        return Ok(());
    }

    let b: Basis = basis.into();
    let numeric = numeric_qfi(setup.strategy, &target, theta_a, omega, setup.mode, b)?;
    let closed = closed_qfi(setup.strategy, &target, omega, setup.mode, b)?;
    let mut csv = Csv::header(out, "qfi", &flags, &cols)?;
    for i in 0..3 {
        for j in 0..3 {
            let (a, c) = (numeric.h[i][j], closed.h[i][j]);
            csv.row(&[i.to_string(), j.to_string(), fmt_g(a), fmt_g(c), fmt_g((a - c).abs())])?;
        }
    }
    csv.row(&["max_abs_diff".into(), fmt_g(numeric.max_abs_diff(&closed))])?;
    Ok(())
}

fn param_name(p: ParamArg) -> &'static str {
    match p {
        ParamArg::X => "x",
        ParamArg::Y => "y",
        ParamArg::Z => "z",
        ParamArg::R => "r",
        ParamArg::Theta => "theta",
        ParamArg::Phi => "phi",
        ParamArg::Purity => "purity",
        ParamArg::All => "all",
    }
}

fn bound_of(h: &QfiMatrix, target: &Target, param: ParamArg, m: u32, single: bool) -> CliResult<Vec<f64>> {
    let scalar = |h: &QfiMatrix, j: usize| -> CliResult<Vec<f64>> {
        let t = if single {
            BoundTarget::SingleParameter(j)
        } else {
            BoundTarget::Component(j)
        };
        Ok(vec![cr_bound(h, m, t)?.scalar().expect("scalar bound")])
    };
    match param {
        ParamArg::X => scalar(h, 0),
        ParamArg::Y => scalar(h, 1),
        ParamArg::Z => scalar(h, 2),
        ParamArg::R => scalar(h, 0),
        ParamArg::Theta => scalar(h, 1),
        ParamArg::Phi => scalar(h, 2),
        ParamArg::Purity => {
            // Parameters (P, θ, φ) with P = (1 + r²)/2, so ∂v/∂P = (∂v/∂r)/r.
            let p = target.polar();
            if p.r <= 0.0 {
                return Err(Error::OutOfDomain("purity parameterization needs r > 0".into()).into());
            }
            let mut jac = Jacobian::spherical(&p);
            jac.b[0].iter_mut().for_each(|x| *x /= p.r);
            jac.target = Basis::Custom;
            Ok(vec![cr_bound(h, m, BoundTarget::Function(jac))?
                .scalar()
                .expect("scalar bound")])
        }
        ParamArg::All => match cr_bound(h, m, BoundTarget::Matrix)? {
            crate::qfi::CrBound::Matrix { cov, .. } => Ok(cov.iter().flatten().copied().collect()),
            crate::qfi::CrBound::Scalar { .. } => unreachable!("matrix target"),
        },
    }
}

fn cmd_bound(
    setup: &Setup,
    targs: &TargetArgs,
    param: ParamArg,
    m: u32,
    single: bool,
    out: &mut dyn Write,
) -> CliResult {
    let target = targs.resolve()?;
    let omega = setup.omega()?;
    let theta_a = setup.theta_a()?;
    let mut flags = setup.flags();
    flags.extend(targs.flags(&target));
    flags.push(("param", param_name(param).into()));
    flags.push(("m", m.to_string()));
    if single {
        flags.push(("single", "true".into()));
    }
    if m == 0 {
        return Err(CliError::usage("--m must be positive"));
    }

    let (numeric, closed): (Vec<f64>, Vec<f64>) = if setup.strategy == Strategy::Nea {
        if param != ParamArg::Z {
            return Err(CliError::usage("nea bounds are available for --param z only"));
        }
        let (n, c) = nea_pair(&target.bloch(), theta_a, omega, setup.mode)?;
        (vec![1.0 / (m as f64 * n)], vec![1.0 / (m as f64 * c)])
    } else {
        let basis = match param {
            ParamArg::X | ParamArg::Y | ParamArg::Z | ParamArg::All | ParamArg::Purity => Basis::Cartesian,
            _ => Basis::Polar,
        };
        let hn = numeric_qfi(setup.strategy, &target, theta_a, omega, setup.mode, basis)?;
        let hc = closed_qfi(setup.strategy, &target, omega, setup.mode, basis)?;
        (
            bound_of(&hn, &target, param, m, single)?,
            bound_of(&hc, &target, param, m, single)?,
        )
    };

    let mut csv = Csv::header(out, "bound", &flags, &["entry", "variance_numeric", "variance_closed_form"])?;
    let labels: Vec<String> = if param == ParamArg::All {
        let names = ["x", "y", "z"];
        names
            .iter()
            .flat_map(|a| names.iter().map(move |b| format!("{a}{b}")))
            .collect()
    } else {
        vec![param_name(param).to_string()]
    };
    for (label, (n, c)) in labels.into_iter().zip(numeric.into_iter().zip(closed)) {
        csv.row(&[label, fmt_g(n), fmt_g(c)])?;
    }
    Ok(())
}

fn grid(lo: f64, hi: f64, n: usize, log: bool) -> CliResult<Vec<f64>> {
    if n < 2 {
        return Err(CliError::usage("grids need at least 2 points"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::usage(format!("empty grid range [{lo}, {hi}]")));
    }
    if log && lo <= 0.0 {
        return Err(CliError::usage("logarithmic grids need a positive lower end"));
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else if log {
                (lo.ln() + (hi.ln() - lo.ln()) * step(i)).exp()
            } else {
                lo + (hi - lo) * step(i)
            }
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    setup: &Setup,
    targs: &TargetArgs,
    param: ScanParam,
    range: (Option<f64>, Option<f64>),
    n: usize,
    log: bool,
    basis: BasisArg,
    out: &mut dyn Write,
) -> CliResult {
    let (default_lo, default_hi) = match param {
        ScanParam::Omega => DEFAULT_OMEGA_BRACKET,
        ScanParam::ThetaA => (0.0, PI),
        ScanParam::Vz => (-0.99, 0.99),
    };
    let xs = grid(range.0.unwrap_or(default_lo), range.1.unwrap_or(default_hi), n, log)?;
    let strategy = setup.strategy;
    if param == ScanParam::ThetaA && strategy != Strategy::Nea {
        return Err(CliError::usage("theta-a scans need --strategy nea"));
    }
    if param == ScanParam::Omega && strategy == Strategy::Direct {
        return Err(CliError::usage("direct estimation does not depend on omega"));
    }
    let target = match param {
        ScanParam::Vz => None,
        _ => Some(targs.resolve()?),
    };
    let omega = match param {
        ScanParam::Omega => 0.0,
        _ => setup.omega()?,
    };
    let theta_a = match param {
        ScanParam::ThetaA => 0.0,
        _ => setup.theta_a()?,
    };

    let pname = match param {
        ScanParam::Omega => "omega",
        ScanParam::ThetaA => "theta_a",
        ScanParam::Vz => "vz",
    };
    let mut flags = setup.flags();
    if let Some(t) = &target {
        flags.extend(targs.flags(t));
    }
    flags.push(("param", pname.into()));
    flags.push(("from", fmt_g(xs[0])));
    flags.push(("to", fmt_g(xs[n - 1])));
    flags.push(("n", n.to_string()));
    flags.push(("spacing", if log { "log" } else { "linear" }.into()));

    let b: Basis = basis.into();
    let mut columns = vec![pname];
    if strategy == Strategy::Nea {
        columns.push("h_zz");
    } else {
        flags.push(("basis", basis_name(basis).into()));
        columns.extend(match b {
            Basis::Polar => ["h_rr", "h_tt", "h_pp"].as_slice(),
            _ => ["h_xx", "h_xy", "h_xz", "h_yy", "h_yz", "h_zz"].as_slice(),
        });
    }
    let mut csv = Csv::header(out, "scan", &flags, &columns)?;
    for &x in &xs {
        let (t, w, ta) = match param {
            ScanParam::Omega => (target.unwrap(), x, theta_a),
            ScanParam::ThetaA => (target.unwrap(), omega, x),
            ScanParam::Vz => (Target::Cartesian(BlochVector::on_z(x)?), omega, theta_a),
        };
        let mut row = vec![x];
        if strategy == Strategy::Nea {
            let v = t.bloch();
            if v.x != 0.0 || v.y != 0.0 {
                return Err(Error::OutOfDomain("NEA scans need a target on the z axis".into()).into());
            }
            row.push(nea_qfi(v.z, ta, w, setup.mode)?);
        } else {
            let h = closed_qfi(strategy, &t, w, setup.mode, b)?;
            match b {
                Basis::Polar => row.extend([h.h[0][0], h.h[1][1], h.h[2][2]]),
                _ => row.extend([h.h[0][0], h.h[0][1], h.h[0][2], h.h[1][1], h.h[1][2], h.h[2][2]]),
            }
        }
        csv.nums(&row)?;
    }
    Ok(())
}

fn require_converged(r: OptResult, what: &str) -> CliResult<OptResult> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NoConvergence(what.to_string()).into())
    }
}

fn cmd_optimize(
    strategy: Strategy,
    mode: DetectionMode,
    vz: f64,
    objective: Objective,
    bracket: (f64, f64),
    out: &mut dyn Write,
) -> CliResult {
    if !(bracket.0 > 0.0 && bracket.0 < bracket.1 && bracket.1.is_finite()) {
        return Err(CliError::usage(format!(
            "need 0 < --omega-min < --omega-max, got [{}, {}]",
            bracket.0, bracket.1
        )));
    }
    let mut flags = vec![("strategy", strategy.to_string())];
    let result = match objective {
        Objective::Phase => {
            if strategy != Strategy::Ea {
                return Err(CliError::usage("the phase objective is defined for --strategy ea"));
            }
            flags.push(("objective", "phase".into()));
            let mut r = minimize_1d(|w| phase_bound(w, 1).unwrap_or(f64::NAN), bracket, DEFAULT_TOL)?;
            r.argmax[0].0 = "omega".into();
            r
        }
        Objective::Qfi => {
            flags.push(("mode", mode.to_string()));
            flags.push(("vz", fmt_g(vz)));
            flags.push(("objective", "qfi".into()));
            match strategy {
                Strategy::Ea => maximize_ea(vz, bracket, mode)?,
                Strategy::Nea => maximize_nea(vz, bracket, mode, NeaGrid::default())?,
                Strategy::Direct => {
                    return Err(CliError::usage("direct estimation has nothing to optimize"));
                }
            }
        }
    };
    flags.push(("omega-min", fmt_g(bracket.0)));
    flags.push(("omega-max", fmt_g(bracket.1)));
    let result = require_converged(result, "optimizer did not reach tolerance")?;
    let mut csv = Csv::header(out, "optimize", &flags, &["name", "value"])?;
    for (name, x) in &result.argmax {
        csv.row(&[name.clone(), fmt_g(*x)])?;
    }
    csv.row(&["value".into(), fmt_g(result.value)])?;
    csv.row(&["iterations".into(), result.iterations.to_string()])?;
    csv.row(&["converged".into(), result.converged.to_string()])?;
    Ok(())
}

fn r_grid(n: usize) -> CliResult<Vec<f64>> {
    grid(0.0, 0.99, n, false)
}

fn cmd_figure(n: u8, points: Option<usize>, out: &mut dyn Write) -> CliResult {
    let mut flags = vec![];
    if let Some(p) = points {
        flags.push(("points", p.to_string()));
    }
    let label = format!("figure {n}");
    match n {
        3 => {
            let omegas = grid(0.05, 10.0, points.unwrap_or(801), true)?;
            let mut csv = Csv::header(out, &label, &flags, &["omega", "rescaled_qfi", "bound_ratio"])?;
            for w in omegas {
                let q = ea_rescaled(0.0, w, DetectionMode::Both)?;
                csv.nums(&[w, q, 1.0 / q])?;
            }
        }
        4 | 5 => {
            let mode = if n == 4 {
                DetectionMode::Transmission
            } else {
                DetectionMode::Reflection
            };
            let k = points.unwrap_or(100);
            let rs = r_grid(k)?;
            let omegas = grid(0.05, 10.0, k, true)?;
            let mut csv = Csv::header(out, &label, &flags, &["r", "omega", "rescaled_qfi"])?;
            for &r in &rs {
                for &w in &omegas {
                    csv.nums(&[r, w, ea_rescaled(r, w, mode)?])?;
                }
            }
        }
        6 => {
            let rs = r_grid(points.unwrap_or(100))?;
            let cols = [
                "r",
                "direct",
                "both",
                "transmission",
                "reflection",
                "omega_both",
                "omega_transmission",
                "omega_reflection",
            ];
            let mut csv = Csv::header(out, &label, &flags, &cols)?;
            for &r in &rs {
                let mut vars = vec![r, 1.0 - r * r];
                let mut omegas = vec![];
                for mode in [DetectionMode::Both, DetectionMode::Transmission, DetectionMode::Reflection] {
                    let opt = require_converged(maximize_ea(r, DEFAULT_OMEGA_BRACKET, mode)?, "figure 6")?;
                    let w = opt.get("omega").expect("omega");
                    vars.push(1.0 / ea_polar(r, w, mode)?.c_r);
                    omegas.push(w);
                }
                vars.extend(omegas);
                csv.nums(&vars)?;
            }
        }
        7 => {
            let vzs = grid(-0.99, 0.99, points.unwrap_or(101), false)?;
            let env = nea_envelope(&vzs, DEFAULT_OMEGA_BRACKET, DetectionMode::Transmission, NeaGrid::default())?;
            let mut csv = Csv::header(out, &label, &flags, &["vz", "qfi", "omega", "theta_a"])?;
            for p in env {
                csv.nums(&[p.v_z, p.best_qfi, p.omega_star, p.theta_a_star.unwrap_or(f64::NAN)])?;
            }
        }
        8 => {
            let vzs = grid(-0.99, 0.99, points.unwrap_or(101), false)?;
            let modes = [DetectionMode::Transmission, DetectionMode::Reflection, DetectionMode::Both];
            let mut nea = vec![];
            let mut ea = vec![];
            for mode in modes {
                nea.push(nea_envelope(&vzs, DEFAULT_OMEGA_BRACKET, mode, NeaGrid::default())?);
                ea.push(ea_envelope(&vzs, DEFAULT_OMEGA_BRACKET, mode)?);
            }
            let cols = [
                "vz",
                "nea_transmission",
                "nea_reflection",
                "nea_both",
                "omega_transmission",
                "omega_reflection",
                "omega_both",
                "ea_transmission",
                "ea_reflection",
                "ea_both",
            ];
            let mut csv = Csv::header(out, &label, &flags, &cols)?;
            for (i, &vz) in vzs.iter().enumerate() {
                let mut row = vec![vz];
                row.extend(nea.iter().map(|e| e[i].best_qfi));
                row.extend(nea.iter().map(|e| e[i].omega_star));
                row.extend(ea.iter().map(|e| e[i].best_qfi));
                csv.nums(&row)?;
            }
        }
        _ => return Err(CliError::usage(format!("no figure {n}; choose 3 to 8"))),
    }
    Ok(())
}

/// Entry point for the binary: parses `args`, runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let result = match &cfg.output {
        Some(path) => {
            let mut buf = Vec::new();
            run(&cfg, &mut buf).and_then(|_| std::fs::write(path, &buf).map_err(CliError::from))
        }
        None => run(&cfg, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "qscatter: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(0.1 + 0.2), "0.3");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_g(1.5e-5), "1.5e-05");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
        assert_eq!(fmt_g(f64::NAN), "nan");
        assert_eq!(fmt_g(9.9999999999999e-5), "0.0001");
    }

    #[test]
    fn grids() {
        let g = grid(1.0, 100.0, 3, true).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && g[2] == 100.0);
        assert!(grid(0.0, 1.0, 1, false).is_err());
        assert!(grid(0.0, 1.0, 5, true).is_err());
        assert!(grid(1.0, 1.0, 5, false).is_err());
    }
}
