//! `opa-noise`: spectra, parameter sweeps, GW projections, threshold report
//! and Monte-Carlo check for the photothermal OPA model.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use opa_photothermal::config::{derive_rates, load_params};
use opa_photothermal::gw::{self, IfoParams, SqueezeAngle};
use opa_photothermal::oracle::{sde_oracle_model, OracleSettings, DEFAULT_MAX_SEGMENTS};
use opa_photothermal::report::{self, GwRow, SweepRow};
use opa_photothermal::spectra::FrequencyGrid;
use opa_photothermal::{Error, Model, Params, Point};

#[derive(Parser, Debug)]
#[command(name = "opa-noise", version, about = "Photothermal noise in OPA squeezed-light sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Output quadrature variance spectra.
    Spectrum {
        #[command(flatten)]
        op: OperatingPoint,
        #[command(flatten)]
        grid: GridArgs,
        /// Draw one labelled curve per value of this parameter.
        #[arg(long, requires = "values")]
        vary: Option<Axis>,
        /// Comma list or `start:stop:count` (linear; prefix `log:` for log spacing).
        #[arg(long)]
        values: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Variances at fixed frequencies against pump or seed power.
    Sweep {
        #[command(flatten)]
        op: OperatingPoint,
        #[arg(long)]
        axis: Axis,
        /// Comma list or `start:stop:count` (linear; prefix `log:` for log spacing).
        #[arg(long)]
        values: String,
        /// Sideband frequencies (Hz), comma separated.
        #[arg(long, default_value = "10,100,1000,10000")]
        freqs_hz: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// GW interferometer noise normalized to the SQL.
    Gw {
        #[command(flatten)]
        op: OperatingPoint,
        #[command(flatten)]
        grid: GwGridArgs,
        #[arg(long, value_enum, default_value_t = Scheme::All)]
        scheme: Scheme,
        /// Fixed injection angle θ (rad); π/2 puts V1 on the shot-noise term.
        #[arg(long, default_value_t = PI / 2.0)]
        theta: f64,
        /// Amplitude-filter linewidth (Hz).
        #[arg(long, default_value_t = 400.0)]
        gamma_f_hz: f64,
        #[arg(long, default_value_t = 40.0)]
        mass_kg: f64,
        #[arg(long, default_value_t = 4000.0)]
        arm_length_m: f64,
        /// Arm-cavity linewidth (Hz).
        #[arg(long, default_value_t = 100.0)]
        arm_linewidth_hz: f64,
        /// I0 / I_SQL.
        #[arg(long, default_value_t = 1.0)]
        power_ratio: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Threshold power, coupling and damping rates at the operating point.
    Threshold {
        #[command(flatten)]
        op: OperatingPoint,
    },
    /// Monte-Carlo estimate of the variances at probe frequencies.
    Oracle {
        #[command(flatten)]
        op: OperatingPoint,
        /// Probe frequencies (Hz), comma separated.
        #[arg(long, default_value = "20,1000,100000")]
        probes_hz: String,
        /// Simulated time per probe (s), clamped to the segment limits.
        #[arg(long, default_value_t = 1e6)]
        duration: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_SEGMENTS)]
        max_segments: usize,
        #[arg(long, default_value_t = 1)]
        rng_seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct OperatingPoint {
    /// Parameter file; Table I defaults fill unspecified keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed_mw: Option<f64>,
    /// Pump power as a fraction of threshold.
    #[arg(long, conflicts_with = "pump_w")]
    pump_frac: Option<f64>,
    /// Absolute pump power (W).
    #[arg(long)]
    pump_w: Option<f64>,
    /// Pump phase 0: phase quadrature squeezed.
    #[arg(long, conflicts_with = "amp_squeeze")]
    phase_squeeze: bool,
    /// Pump phase π: amplitude quadrature squeezed.
    #[arg(long)]
    amp_squeeze: bool,
    /// Pump amplitude-quadrature noise V¹_B,in.
    #[arg(long)]
    pump_noise: Option<f64>,
    /// Remove crystal absorption (and with it the photothermal noise).
    #[arg(long)]
    no_photothermal: bool,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 1.0)]
    f_min: f64,
    #[arg(long, default_value_t = 1e8)]
    f_max: f64,
    /// Points per decade.
    #[arg(long, default_value_t = 400)]
    ppd: usize,
}

#[derive(Args, Debug, Clone)]
struct GwGridArgs {
    #[arg(long, default_value_t = 1.0)]
    f_min: f64,
    #[arg(long, default_value_t = 1e4)]
    f_max: f64,
    #[arg(long, default_value_t = 400)]
    ppd: usize,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// CSV destination; stdout when absent. A `.meta.json` sidecar is
    /// written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a matplotlib script next to the CSV.
    #[arg(long, requires = "out")]
    plot: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Axis {
    /// Seed power (mW).
    SeedMw,
    /// Pump power as a fraction of threshold.
    PumpFrac,
    /// Pump amplitude-quadrature noise V¹_B,in.
    PumpNoise,
    /// `amplitude` or `phase` squeezing.
    Squeeze,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Scheme {
    Unsqueezed,
    FrequencyIndependent,
    FrequencyDependent,
    AmplitudeFilter,
    /// The five curves of the comparison figure.
    All,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(String),
    Usage(String),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn resolve(op: &OperatingPoint) -> Result<Params> {
    let mut p = match &op.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            load_params(&text)?
        }
        None => Params::table1(),
    };
    if let Some(s) = op.seed_mw {
        p = p.with_seed_power(s * 1e-3);
    }
    if let Some(f) = op.pump_frac {
        p = p.with_pump_fraction(f);
    }
    if let Some(w) = op.pump_w {
        p.pump = opa_photothermal::PumpSetting::Watts(w);
    }
    if op.phase_squeeze {
        p = p.with_pump_phase(0.0);
    }
    if op.amp_squeeze {
        p = p.with_pump_phase(PI);
    }
    if let Some(v) = op.pump_noise {
        p = p.with_pump_noise(v);
    }
    if op.no_photothermal {
        p = p.without_absorption();
    }
    p.validate()?;
    Ok(p)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("cannot parse value list {s:?}"));
    let (log, body) = match s.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let v: Vec<f64> = if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if n < 2 || (log && !(lo > 0.0 && hi > 0.0)) {
            return Err(bad());
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if log {
                    (lo.ln() + (hi.ln() - lo.ln()) * t).exp()
                } else {
                    lo + (hi - lo) * t
                }
            })
            .collect()
    } else {
        body.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if v.is_empty() {
        return Err(CliError::Usage("value list is empty".into()));
    }
    Ok(v)
}

fn apply_axis(p: &Params, axis: Axis, raw: &str) -> Result<(Params, String)> {
    let num = || {
        raw.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("{raw:?} is not a number")))
    };
    let q = match axis {
        Axis::SeedMw => p.clone().with_seed_power(num()? * 1e-3),
        Axis::PumpFrac => p.clone().with_pump_fraction(num()?),
        Axis::PumpNoise => p.clone().with_pump_noise(num()?),
        Axis::Squeeze => match raw {
            "amplitude" => p.clone().with_pump_phase(PI),
            "phase" => p.clone().with_pump_phase(0.0),
            _ => return Err(CliError::Usage(format!("squeeze values are amplitude|phase, got {raw:?}"))),
        },
    };
    q.validate()?;
    let label = match axis {
        Axis::SeedMw => format!("seed_mW={raw}"),
        Axis::PumpFrac => format!("pump_frac={raw}"),
        Axis::PumpNoise => format!("V_B1_in={raw}"),
        Axis::Squeeze => raw.to_string(),
    };
    Ok((q, label))
}

fn axis_values(axis: Axis, values: &str) -> Result<Vec<String>> {
    if axis == Axis::Squeeze {
        let v: Vec<String> = values.split(',').map(|s| s.trim().to_string()).collect();
        if v.iter().any(|s| s.is_empty()) {
            return Err(CliError::Usage("empty squeeze value".into()));
        }
        return Ok(v);
    }
    Ok(parse_list(values)?.iter().map(|x| format!("{x}")).collect())
}

fn grid(f_min: f64, f_max: f64, ppd: usize) -> Result<FrequencyGrid> {
    Ok(FrequencyGrid::new(f_min, f_max, ppd)?)
}

fn grid_json(g: &FrequencyGrid) -> serde_json::Value {
    json!({ "f_min_hz": g.f_min_hz, "f_max_hz": g.f_max_hz, "points_per_decade": g.points_per_decade })
}

fn write_outputs(out: &OutArgs, csv: &str, meta: serde_json::Value, title: &str, logx: bool) -> Result<()> {
    let Some(path) = &out.out else {
        print!("{csv}");
        return Ok(());
    };
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::write(path, csv).map_err(|e| io(path, e))?;
    let meta_path = sidecar(path, "meta.json");
    let mut text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&meta_path, text).map_err(|e| io(&meta_path, e))?;
    if out.plot {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let script = sidecar(path, "py");
        fs::write(&script, report::plot_script(&name, title, logx)).map_err(|e| io(&script, e))?;
    }
    Ok(())
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn meta(command: &str, p: &Params, extra: serde_json::Value) -> serde_json::Value {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    json!({
        "tool": "opa-noise",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "argv": argv,
        "params": p,
        "params_config_text": p.to_config_text(),
        "run": extra,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum { op, grid: g, vary, values, out } => {
            let p = resolve(&op)?;
            let g = grid(g.f_min, g.f_max, g.ppd)?;
            let omegas = g.omegas::<f64>();
            let mut series = Vec::new();
            match vary {
                Some(axis) => {
                    for raw in axis_values(axis, values.as_deref().unwrap_or_default())? {
                        let (q, label) = apply_axis(&p, axis, &raw)?;
                        series.push((Some(label), Model::new(&q)?.spectrum(&omegas)?));
                    }
                }
                None => series.push((None, Model::new(&p)?.spectrum(&omegas)?)),
            }
            let csv = report::spectrum_csv(&series);
            let extra = json!({ "grid": grid_json(&g), "vary": vary.map(|a| format!("{a:?}")), "values": values });
            write_outputs(&out, &csv, meta("spectrum", &p, extra), "Quadrature variance (dB)", true)
        }
        Command::Sweep { op, axis, values, freqs_hz, out } => {
            let p = resolve(&op)?;
            let freqs = parse_list(&freqs_hz)?;
            let mut rows = Vec::new();
            for raw in axis_values(axis, &values)? {
                let (q, _) = apply_axis(&p, axis, &raw)?;
                let m = Model::new(&q)?;
                let x = match axis {
                    Axis::SeedMw => q.p_seed,
                    Axis::PumpFrac => m.steady.p_pump,
                    Axis::PumpNoise => q.v_b1_in,
                    Axis::Squeeze => {
                        return Err(CliError::Usage("sweep axis must be numeric".into()));
                    }
                };
                for &f in &freqs {
                    let s = m.point(TAU * f)?;
                    rows.push(SweepRow { x, freq_hz: f, v1: s.v1, v2: s.v2 });
                }
            }
            let header = match axis {
                Axis::SeedMw => "seed_watts",
                Axis::PumpFrac => "pump_watts",
                _ => "V_B1_in",
            };
            let csv = report::sweep_csv(header, &rows);
            let extra = json!({ "axis": header, "values": values, "freqs_hz": freqs });
            write_outputs(&out, &csv, meta("sweep", &p, extra), "Quadrature variance (dB)", header == "seed_watts")
        }
        Command::Gw {
            op,
            grid: g,
            scheme,
            theta,
            gamma_f_hz,
            mass_kg,
            arm_length_m,
            arm_linewidth_hz,
            power_ratio,
            out,
        } => {
            let p = resolve(&op)?;
            let g = grid(g.f_min, g.f_max, g.ppd)?;
            let omegas = g.omegas::<f64>();
            let ifo = IfoParams {
                m: mass_kg,
                l: arm_length_m,
                gamma_arm: TAU * arm_linewidth_hz,
                power_ratio,
                theta: SqueezeAngle::Fixed(theta),
                gamma_f: Some(TAU * gamma_f_hz),
            };
            ifo.validate()?;
            let with_pt = Model::new(&p)?.spectrum(&omegas)?;
            let suffix = if op.no_photothermal { "" } else { "_photothermal" };
            let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
            let mut curve = |name: String, pts: &[Point], kind: Scheme| -> Result<()> {
                let vals = pts
                    .iter()
                    .map(|s| gw_value(kind, s, &ifo))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                curves.push((name, vals));
                Ok(())
            };
            match scheme {
                Scheme::All => {
                    let without = Model::new(&p.clone().without_absorption())?.spectrum(&omegas)?;
                    curve("unsqueezed".into(), &with_pt, Scheme::Unsqueezed)?;
                    curve("frequency_independent".into(), &without, Scheme::FrequencyIndependent)?;
                    curve("frequency_dependent_photothermal".into(), &with_pt, Scheme::FrequencyDependent)?;
                    curve("frequency_independent_photothermal".into(), &with_pt, Scheme::FrequencyIndependent)?;
                    curve("amplitude_filter_photothermal".into(), &with_pt, Scheme::AmplitudeFilter)?;
                }
                Scheme::Unsqueezed => curve("unsqueezed".into(), &with_pt, scheme)?,
                Scheme::FrequencyIndependent => curve(format!("frequency_independent{suffix}"), &with_pt, scheme)?,
                Scheme::FrequencyDependent => curve(format!("frequency_dependent{suffix}"), &with_pt, scheme)?,
                Scheme::AmplitudeFilter => curve(format!("amplitude_filter{suffix}"), &with_pt, scheme)?,
            }
            let rows: Vec<GwRow> = curves
                .into_iter()
                .flat_map(|(name, vals)| {
                    with_pt.iter().zip(vals).map(move |(s, v)| GwRow {
                        freq_hz: s.freq_hz(),
                        s_over_hsql2: v,
                        scheme: name.clone(),
                    })
                })
                .collect();
            let csv = report::gw_csv(&rows);
            let extra = json!({
                "grid": grid_json(&g),
                "scheme": format!("{scheme:?}"),
                "ifo": { "m_kg": mass_kg, "L_m": arm_length_m, "gamma_arm_rad_s": ifo.gamma_arm,
                         "power_ratio": power_ratio, "theta_rad": theta, "gamma_f_rad_s": ifo.gamma_f },
            });
            write_outputs(&out, &csv, meta("gw", &p, extra), "S / h_SQL^2 (dB)", true)
        }
        Command::Threshold { op } => {
            let p = resolve(&op)?;
            let m = Model::new(&p)?;
            let r = derive_rates(&p);
            let e = m.coupling.eps_bar;
            println!("P_th_W = {:.16e}", m.steady.p_th);
            println!("P_pump_W = {:.16e}", m.steady.p_pump);
            println!("eps_bar_re = {:.16e}", e.re);
            println!("eps_bar_im = {:.16e}", e.im);
            println!("eps_bar_abs = {:.16e}", e.norm());
            println!("tau_rt_s = {:.16e}", r.tau_rt);
            for (name, c) in [("a", &r.a), ("b", &r.b)] {
                println!("gamma_{name}_in = {:.16e}", c.input);
                println!("gamma_{name}_out = {:.16e}", c.output);
                println!("gamma_{name}_sc = {:.16e}", c.scatter);
                println!("gamma_{name}_abs = {:.16e}", c.absorb);
                println!("gamma_{name}_tot = {:.16e}", c.total);
            }
            println!("Omega_T_rad_s = {:.16e}", m.thermal.omega_t);
            println!("a_bar_abs = {:.16e}", m.steady.a_bar.norm());
            println!("b_bar_abs = {:.16e}", m.steady.b_bar.norm());
            println!("seed_gain = {:.16e}", m.steady.gain);
            Ok(())
        }
        Command::Oracle {
            op,
            probes_hz,
            duration,
            max_segments,
            rng_seed,
            out,
        } => {
            let p = resolve(&op)?;
            let m = Model::new(&p)?;
            let probes: Vec<f64> = parse_list(&probes_hz)?.iter().map(|f| TAU * f).collect();
            let settings = OracleSettings { duration, max_segments, rng_seed };
            let est = sde_oracle_model(&m, &probes, &settings)?;
            let mut csv = String::from("freq_hz,V1,V1_se,V2,V2_se,V1_model,V2_model,segments,duration_s\n");
            for e in &est {
                let s = m.point(e.omega)?;
                let f = report::fmt_num;
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    f(e.omega / TAU),
                    f(e.v1),
                    f(e.se1),
                    f(e.v2),
                    f(e.se2),
                    f(s.v1),
                    f(s.v2),
                    e.segments,
                    f(e.duration)
                ));
            }
            let extra = json!({ "probes_hz": probes_hz, "duration_s": duration, "max_segments": max_segments, "rng_seed": rng_seed });
            write_outputs(&out, &csv, meta("oracle", &p, extra), "Monte-Carlo variances", true)
        }
    }
}

fn gw_value(kind: Scheme, s: &Point, ifo: &IfoParams<f64>) -> std::result::Result<f64, gw::GwError> {
    match kind {
        Scheme::Unsqueezed => Ok(gw::gw_noise_normalized(s.omega, 1.0, 1.0, ifo)),
        Scheme::FrequencyIndependent => Ok(gw::gw_noise_normalized(s.omega, s.v1, s.v2, ifo)),
        Scheme::FrequencyDependent => {
            let fd = IfoParams { theta: SqueezeAngle::FrequencyDependent, ..*ifo };
            Ok(gw::gw_noise_normalized(s.omega, s.v1, s.v2, &fd))
        }
        Scheme::AmplitudeFilter | Scheme::All => gw::filtered_noise_normalized(s.omega, s.v1, s.v2, ifo),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("error[usage]: {}", e.to_string().trim_end());
                return ExitCode::from(2);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
