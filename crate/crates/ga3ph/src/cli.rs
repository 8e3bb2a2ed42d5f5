//! The `ga3ph` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ga3ph_core::analysis::analyze;
use ga3ph_core::circuits::{clarke_project, mna_transfer, parse_netlist};
use ga3ph_core::ga::Mv4;
use ga3ph_core::models::{build_rl_model, real_to_ga, CircuitParams, GaSiso, RealMimo2};
use ga3ph_core::sim::{
    amplitude_ratio, decoupling_metric_against, realize_ga_controller, simulate,
    step_time_constant, LoopMode, SimConfig, Source, Step, ENTRY_NAMES,
};
use ga3ph_core::synthesis::{check_plant_stable, design_decoupling};
use ga3ph_core::{Complex64, GaTf, RatFun};

use crate::config::{ControllerKind, RunConfig};
use crate::error::{exit, CliError};
use crate::io::{trace_to_csv, trace_to_svg};
use crate::text::{fmt_gatf, fmt_num, fmt_ratfun, parse_model, parse_ratfun, Format, Model};

/// Closed-loop residual below which `design-decouple` succeeds.
pub const DECOUPLE_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(
    name = "ga3ph",
    version,
    about = "Three-phase systems as geometric-algebra transfer functions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct PlantArgs {
    /// INI run configuration (sections circuit, source, sim, controller).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Equal line inductances (overrides the config).
    #[arg(long, conflicts_with = "unbalanced")]
    balanced: bool,
    /// Phase b carries Lu (overrides the config).
    #[arg(long)]
    unbalanced: bool,
    /// Build the plant from a netlist by nodal analysis instead.
    #[arg(long, conflicts_with_all = ["balanced", "unbalanced"])]
    netlist: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CtrlChoice {
    Identity,
    Proportional,
    Decoupling,
    Custom,
}

#[derive(Args, Debug, Clone, Default)]
struct CtrlArgs {
    /// Controller family; `--k` alone implies proportional, `--coeff` alone custom.
    #[arg(long, value_enum)]
    controller: Option<CtrlChoice>,
    /// Gain of the proportional controller k(e0 + e1).
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Custom coefficient, e.g. `--coeff "e1=(1 + p)/(2 + p)"`; repeatable.
    #[arg(long = "coeff", value_name = "eX=RATFUN")]
    coeff: Vec<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    /// Real 2×2 matrix Ga, Gb, Gc, Gd.
    Rv,
    /// Complex pair G1, G2 (real and imaginary parts).
    Cv,
    /// Multivector coefficients e0, e1, e2, e12.
    Ga,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Rv => Format::Rv,
            FormatArg::Cv => Format::Cv,
            FormatArg::Ga => Format::Ga,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the plant in one representation.
    Model {
        #[command(flatten)]
        plant: PlantArgs,
        #[arg(long, value_enum, default_value = "ga")]
        format: FormatArg,
    },
    /// Read a printed model (file or stdin) and print it in another representation.
    Convert {
        #[arg(long, value_enum)]
        to: FormatArg,
        input: Option<PathBuf>,
    },
    /// Closed-loop characteristic polynomial, roots and minimal poles as CSV.
    Stability {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        ctrl: CtrlArgs,
        /// Proportional gains on a log grid, both ends included.
        #[arg(long, num_args = 3, value_names = ["KMIN", "KMAX", "PER_DECADE"], conflicts_with_all = ["k", "controller", "coeff"])]
        sweep: Option<Vec<f64>>,
    },
    /// Synthesize the decoupling controller and report the closed loop.
    DesignDecouple {
        #[command(flatten)]
        plant: PlantArgs,
    },
    /// Run the sampled-data loop and write the trace.
    ///
    /// Default step: 0.1·V on beta at 0.05 s (a chosen protocol, see [sim] in the config).
    Simulate {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        ctrl: CtrlArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Feed the reference straight into the controller, no feedback.
        #[arg(long)]
        open_loop: bool,
    },
    /// Tustin coefficients of the controller's 2×2 filter bank.
    Discretize {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        ctrl: CtrlArgs,
        #[arg(long = "Ts")]
        ts: Option<f64>,
        #[arg(long = "prewarp-hz")]
        prewarp_hz: Option<f64>,
    },
    /// Parse a netlist, solve it and print its alpha-beta model.
    NetlistCheck { path: PathBuf },
}

/// Runs the CLI with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return e.exit_code();
        }
    };
    match dispatch(cli.cmd, stdin, out, err) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new(exit::PARSE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, data: &str) -> Result<(), CliError> {
    std::fs::write(path, data)
        .map_err(|e| CliError::new(exit::FAILURE, format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, s: &str) -> Result<(), CliError> {
    out.write_all(s.as_bytes())
        .map_err(|e| CliError::new(exit::FAILURE, format!("writing output: {e}")))
}

fn load_config(args: &PlantArgs) -> Result<RunConfig, CliError> {
    match &args.config {
        Some(p) => {
            let text = read_file(p)?;
            RunConfig::parse(&text)
                .map_err(|e| CliError::new(exit::PARSE, format!("{}: {e}", p.display())))
        }
        None => Ok(RunConfig::default()),
    }
}

fn build_plant(args: &PlantArgs, cfg: &RunConfig) -> Result<RealMimo2, CliError> {
    if let Some(path) = &args.netlist {
        let net = parse_netlist(&read_file(path)?)?;
        return Ok(clarke_project(&mna_transfer(&net)?));
    }
    let c = &cfg.circuit;
    let params = CircuitParams::new(c.l, c.lu, c.r)?;
    let balanced = args.balanced || (c.balanced && !args.unbalanced);
    Ok(build_rl_model(&params, balanced))
}

fn build_controller(args: &CtrlArgs, cfg: &RunConfig, plant: &GaTf) -> Result<GaTf, CliError> {
    let kind = match args.controller {
        Some(CtrlChoice::Identity) => ControllerKind::Identity,
        Some(CtrlChoice::Proportional) => ControllerKind::Proportional,
        Some(CtrlChoice::Decoupling) => ControllerKind::Decoupling,
        Some(CtrlChoice::Custom) => ControllerKind::Custom,
        None if args.k.is_some() => ControllerKind::Proportional,
        None if !args.coeff.is_empty() => ControllerKind::Custom,
        None => cfg.controller.kind,
    };
    let k = args.k.unwrap_or(cfg.controller.k);
    if !k.is_finite() {
        return Err(CliError::new(
            exit::PARSE,
            format!("gain k = {k} is not finite"),
        ));
    }
    Ok(match kind {
        ControllerKind::Identity => GaTf::e0(),
        ControllerKind::Proportional => GaTf::from_mv(Mv4::new(k, k, 0.0, 0.0)),
        ControllerKind::Decoupling => {
            check_plant_stable(plant)?;
            design_decoupling(plant)?.controller
        }
        ControllerKind::Custom => {
            let mut c = cfg.controller.custom.clone();
            for spec in &args.coeff {
                let (name, f) = spec.split_once('=').ok_or_else(|| {
                    CliError::new(exit::PARSE, format!("--coeff '{spec}' is not eX=RATFUN"))
                })?;
                let i = ["e0", "e1", "e2", "e12"]
                    .iter()
                    .position(|x| *x == name.trim())
                    .ok_or_else(|| {
                        CliError::new(exit::PARSE, format!("unknown coefficient '{name}'"))
                    })?;
                c[i] = Some(parse_ratfun(f)?);
            }
            let [a, b, d, e] = c.map(|x| x.unwrap_or_else(RatFun::zero));
            GaTf::from_ratfuns(&Mv4::new(a, b, d, e))
        }
    })
}

fn dispatch(
    cmd: Command,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    match cmd {
        Command::Model { plant, format } => {
            let cfg = load_config(&plant)?;
            let m = Model::Rv(build_plant(&plant, &cfg)?);
            emit(out, &m.convert(format.into()).to_string())
        }
        Command::Convert { to, input } => {
            let text = match input {
                Some(p) => read_file(&p)?,
                None => {
                    let mut s = String::new();
                    stdin
                        .read_to_string(&mut s)
                        .map_err(|e| CliError::new(exit::PARSE, format!("reading stdin: {e}")))?;
                    s
                }
            };
            emit(out, &parse_model(&text)?.convert(to.into()).to_string())
        }
        Command::Stability { plant, ctrl, sweep } => {
            let cfg = load_config(&plant)?;
            let g = real_to_ga(&build_plant(&plant, &cfg)?).g;
            emit(out, &stability(&g, &ctrl, &cfg, sweep.as_deref())?)
        }
        Command::DesignDecouple { plant } => {
            let cfg = load_config(&plant)?;
            let g = real_to_ga(&build_plant(&plant, &cfg)?).g;
            let (report, residual) = decouple_report(&g)?;
            emit(out, &report)?;
            if residual < DECOUPLE_TOL {
                Ok(())
            } else {
                Err(CliError::new(
                    exit::REJECTED,
                    format!("off-diagonal residual {residual:e} is not below {DECOUPLE_TOL:e}"),
                ))
            }
        }
        Command::Simulate {
            plant,
            ctrl,
            out: out_path,
            svg,
            open_loop,
        } => {
            let cfg = load_config(&plant)?;
            let m = build_plant(&plant, &cfg)?;
            let c = build_controller(&ctrl, &cfg, &real_to_ga(&m).g)?;
            let sc = sim_config(&cfg, m, c, open_loop);
            run_simulation(&sc, &out_path, svg.as_deref(), err)
        }
        Command::Discretize {
            plant,
            ctrl,
            ts,
            prewarp_hz,
        } => {
            let cfg = load_config(&plant)?;
            let g = real_to_ga(&build_plant(&plant, &cfg)?).g;
            let c = build_controller(&ctrl, &cfg, &g)?;
            let ts = ts.unwrap_or(cfg.sim.ts);
            let hz = prewarp_hz.unwrap_or(cfg.source.freq_hz);
            emit(out, &discretize_table(&c, ts, hz)?)
        }
        Command::NetlistCheck { path } => {
            let net = parse_netlist(&read_file(&path)?)?;
            let m3 = mna_transfer(&net)?;
            let mut s = String::new();
            let _ = writeln!(s, "elements: {}", net.elements.len());
            let _ = writeln!(s, "inputs: {}", net.inputs.join(" "));
            let _ = writeln!(s, "outputs: {}", net.outputs.join(" "));
            let _ = writeln!(s, "ground: {}", net.ground.as_deref().unwrap_or("0"));
            s.push_str("# phase-domain transfer matrix, row = output, column = input\n");
            for (i, row) in m3.iter().enumerate() {
                for (j, f) in row.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{} <- {}: {}",
                        net.outputs[i],
                        net.inputs[j],
                        fmt_ratfun(f)
                    );
                }
            }
            s.push_str("# alpha-beta model\n");
            s.push_str(&Model::Rv(clarke_project(&m3)).to_string());
            emit(out, &s)
        }
    }
}

/// Full-precision complex as `re+imj`.
fn full_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() && z.im != 0.0 {
        '-'
    } else {
        '+'
    };
    format!("{}{sign}{}j", z.re, z.im.abs())
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    v
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(" ")
}

pub const STABILITY_HEADER: &str = "k,stable,slowest_root,d_cl,roots,minimal_poles";

/// Log grid from `kmin` to `kmax` with `per_decade` points per decade.
pub fn sweep_grid(kmin: f64, kmax: f64, per_decade: f64) -> Result<Vec<f64>, CliError> {
    if !(kmin > 0.0 && kmax >= kmin && kmax.is_finite()) {
        return Err(CliError::new(
            exit::PARSE,
            format!("sweep needs 0 < KMIN <= KMAX, got {kmin} {kmax}"),
        ));
    }
    if !(per_decade >= 1.0 && per_decade.fract() == 0.0) {
        return Err(CliError::new(
            exit::PARSE,
            format!("PER_DECADE must be a positive integer, got {per_decade}"),
        ));
    }
    let n = ((kmax / kmin).log10() * per_decade).round() as i32;
    Ok((0..=n)
        .map(|i| kmin * 10f64.powf(i as f64 / per_decade))
        .collect())
}

fn stability_row(g: &GaTf, c: &GaTf, k: Option<f64>) -> Result<String, CliError> {
    let rep = analyze(g, c)?;
    let roots = match rep.d_cl.degree() {
        Some(d) if d > 0 => sorted(rep.d_cl.roots()?),
        _ => Vec::new(),
    };
    let slowest = roots.first().map(|z| z.re.to_string()).unwrap_or_default();
    Ok(format!(
        "{},{},{},{},{},{}",
        k.map(|k| k.to_string()).unwrap_or_default(),
        rep.stable,
        slowest,
        join(rep.d_cl.coeffs(), |x| x.to_string()),
        join(&roots, |z| full_complex(*z)),
        join(&sorted(rep.minimal_poles), |z| full_complex(*z)),
    ))
}

fn stability(
    g: &GaTf,
    ctrl: &CtrlArgs,
    cfg: &RunConfig,
    sweep: Option<&[f64]>,
) -> Result<String, CliError> {
    let rows: Vec<String> = match sweep {
        Some(&[kmin, kmax, per]) => {
            let ks = sweep_grid(kmin, kmax, per)?;
            ks.par_iter()
                .map(|&k| stability_row(g, &GaTf::from_mv(Mv4::new(k, k, 0.0, 0.0)), Some(k)))
                .collect::<Result<_, _>>()?
        }
        Some(_) => unreachable!("clap enforces three sweep values"),
        None => {
            let c = build_controller(ctrl, cfg, g)?;
            let proportional = match ctrl.controller {
                Some(CtrlChoice::Proportional) => true,
                None => {
                    ctrl.k.is_some()
                        || (ctrl.coeff.is_empty()
                            && cfg.controller.kind == ControllerKind::Proportional)
                }
                _ => false,
            };
            let k = proportional.then(|| ctrl.k.unwrap_or(cfg.controller.k));
            vec![stability_row(g, &c, k)?]
        }
    };
    let mut s = String::from(STABILITY_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    Ok(s)
}

fn indent(block: &str) -> String {
    block.lines().map(|l| format!("  {l}\n")).collect()
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Text report of the decoupling design and its off-diagonal residual.
pub fn decouple_report(g: &GaTf) -> Result<(String, f64), CliError> {
    check_plant_stable(g)?;
    let d = design_decoupling(g)?;
    let mut s = String::new();
    s.push_str("plant:\n");
    s.push_str(&indent(&fmt_gatf(g)));
    let _ = writeln!(s, "q0: {} ({})", fmt_num(d.q.q0), d.q.q0_reason);
    s.push_str("Q:\n");
    s.push_str(&indent(&fmt_gatf(&d.q.q.q)));
    let _ = writeln!(s, "admissibility: {}", d.admissibility.describe());
    s.push_str("controller:\n");
    s.push_str(&indent(&fmt_gatf(&d.controller)));
    let _ = writeln!(
        s,
        "controller proper: {}{}",
        yes(d.controller_proper),
        if d.controller.den().eval(0.0) == 0.0 {
            " (integral action)"
        } else {
            ""
        }
    );
    s.push_str("closed loop (real 2x2):\n");
    s.push_str(&indent(
        &Model::Ga(GaSiso::new(d.closed_loop.clone()))
            .convert(Format::Rv)
            .to_string(),
    ));
    let diag = d
        .check
        .diag
        .as_ref()
        .map(fmt_ratfun)
        .unwrap_or_else(|| "entries differ".into());
    let _ = writeln!(s, "diagonal: {diag}");
    if let Some(dc) = d.closed_loop.dc_gain() {
        let _ = writeln!(s, "dc gain: {}", fmt_num(dc.c0));
    }
    let _ = writeln!(s, "offdiag_residual: {:e}", d.check.offdiag_residual);
    Ok((s, d.check.offdiag_residual))
}

pub fn discretize_table(c: &GaTf, ts: f64, prewarp_hz: f64) -> Result<String, CliError> {
    if !(prewarp_hz >= 0.0 && prewarp_hz.is_finite()) {
        return Err(CliError::new(
            exit::PARSE,
            format!("prewarp frequency {prewarp_hz} Hz is invalid"),
        ));
    }
    let bank = realize_ga_controller(c, ts, 2.0 * std::f64::consts::PI * prewarp_hz)?;
    let mut s = String::new();
    let _ = writeln!(s, "# Ts = {ts} s, prewarp = {prewarp_hz} Hz");
    s.push_str("# H(z) = (b0 + b1 z^-1 + ...)/(a0 + a1 z^-1 + ...), u = F e\n");
    s.push_str("# order: ");
    s.push_str(&ENTRY_NAMES.join(", "));
    s.push('\n');
    let keys = ["Ga", "Gb", "Gc", "Gd"];
    for (f, key) in bank.f.iter().flatten().zip(keys) {
        let _ = writeln!(s, "{key}.b: {}", join(&f.b, |x| x.to_string()));
        let _ = writeln!(s, "{key}.a: {}", join(&f.a, |x| x.to_string()));
    }
    Ok(s)
}

fn sim_config(cfg: &RunConfig, plant: RealMimo2, ctrl: GaTf, open_loop: bool) -> SimConfig {
    let omega = 2.0 * std::f64::consts::PI * cfg.source.freq_hz;
    let mut sc = SimConfig::new(plant, ctrl);
    sc.ts = cfg.sim.ts;
    sc.substeps = cfg.sim.substeps;
    sc.duration = cfg.sim.duration;
    sc.source = Source {
        v: cfg.source.v,
        omega,
    };
    sc.prewarp_omega = omega;
    sc.step = cfg.sim.step_channel.map(|channel| Step {
        time: cfg.sim.step_time,
        channel,
        magnitude: cfg.sim.step_magnitude.unwrap_or(0.1 * cfg.source.v),
    });
    sc.mode = if open_loop {
        LoopMode::Open
    } else {
        LoopMode::Closed
    };
    sc
}

fn run_simulation(
    sc: &SimConfig,
    out: &Path,
    svg: Option<&Path>,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let tr = simulate(sc)?;
    write_file(out, &trace_to_csv(&tr))?;
    if let Some(p) = svg {
        write_file(p, &trace_to_svg(&tr))?;
    }
    let mut s = String::new();
    let _ = writeln!(s, "samples: {}", tr.len());
    if let Some(t) = tr.diverged_at {
        let _ = writeln!(s, "diverged: yes (t = {t} s)");
        emit(err, &s)?;
        return Err(CliError::new(
            exit::DIVERGED,
            format!(
                "simulation diverged at t = {t} s; partial trace written to {}",
                out.display()
            ),
        ));
    }
    s.push_str("diverged: no\n");
    let periods = 3;
    let _ = writeln!(
        s,
        "amplitude_ratio_{}hz: {}",
        fmt_num(sc.source.omega / (2.0 * std::f64::consts::PI)),
        amplitude_ratio(&tr, sc.source.omega, periods)
    );
    if let Some(step) = sc.step {
        let mut quiet = sc.clone();
        quiet.step = None;
        let base = simulate(&quiet)?;
        if base.diverged_at.is_none() {
            let m = decoupling_metric_against(&tr, &base, sc)?;
            let _ = writeln!(s, "decoupling_metric: {m:e}");
            match step_time_constant(&tr, &base, sc) {
                Ok(tau) => {
                    let _ = writeln!(s, "step_time_constant: {tau:e} s");
                }
                Err(e) => {
                    let _ = writeln!(s, "step_time_constant: n/a ({e})");
                }
            }
        }
        let _ = writeln!(
            s,
            "step: {} on {:?} at {} s",
            fmt_num(step.magnitude),
            step.channel,
            fmt_num(step.time)
        );
    }
    emit(err, &s)
}
