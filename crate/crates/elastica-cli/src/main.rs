//! Command-line surface over the library: regime constants, closed-form
//! curve construction, energy tables, constrained minimization, lambda
//! sweeps, and the free-elastica stability diagnostics.
//!
//! Exit codes: 0 success, 2 domain or i/o error (the violated precondition
//! is printed), 3 when a minimization ends Indeterminate (the report is
//! still written). All emitted floats pass through 12-significant-digit
//! rounding (10 for the thresholds table) so identical invocations produce
//! byte-identical artifacts.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elastica::geometry::{smooth_bump, vi_pairing, Obstacle};
use elastica::moduli;
use elastica::round_sig;
use elastica::solver::{
    drop_minimality_check, lambda_sweep, minimize, scf_stability_probe, CurveClass,
    MultistartConfig, ProbeConfig, SolverConfig, SolverReport, Verdict,
};
use elastica::zoo::{make_pinned, make_scf, Family};

#[derive(Parser)]
#[command(name = "elastica", version, about = "Pinned elastica under an obstacle: constants, closed forms, and the discrete minimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the four regime thresholds as JSON (10 significant digits).
    Thresholds {
        /// Also write the JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample a closed-form curve to CSV rows `s,x,y,theta,k`.
    Construct {
        /// sarc | larc | loop | leaf | rect | segment
        #[arg(long)]
        family: Family,
        /// Length penalty; rect requires 0.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Arc/lobe count.
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Reflect through the pinned chord.
        #[arg(long)]
        reflected: bool,
        /// Number of sample intervals.
        #[arg(long, default_value_t = 256)]
        segments: usize,
        /// CSV destination (stdout when omitted and no figure is requested).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Render an SVG figure; the CSV is still written (sibling .csv when
        /// --out is omitted).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Obstacle overlay for the figure: `cone:<height>[:<slope>]` or a
        /// JSON file path.
        #[arg(long)]
        obstacle: Option<String>,
    },
    /// Closed-form energy table over a lambda grid, CSV.
    EnergyTable {
        /// Grid `start:step:end` or a single value.
        #[arg(long)]
        lambdas: String,
        /// Largest arc/lobe count per family.
        #[arg(long, default_value_t = 4)]
        max_n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize E = B + lambda L over the admissible class.
    Minimize {
        /// `cone:<height>[:<slope>]` (default slope 4*height) or a JSON file.
        #[arg(long)]
        obstacle: String,
        #[arg(long)]
        lambda: f64,
        /// sym | rhomb
        #[arg(long, default_value = "sym", value_parser = parse_class)]
        class: CurveClass,
        #[command(flatten)]
        opts: SolveOpts,
        /// Write the JSON report here (always printed to stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the minimizer curve as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Render the minimizer over the obstacle; implies a CSV sibling
        /// when --csv is omitted.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Minimize across a lambda grid and report the transition zone.
    Sweep {
        #[arg(long)]
        obstacle: String,
        /// Grid `start:step:end` or a single value.
        #[arg(long)]
        lambdas: String,
        #[arg(long, default_value = "sym", value_parser = parse_class)]
        class: CurveClass,
        #[command(flatten)]
        opts: SolveOpts,
        /// Per-lambda rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Perturbation-ray stability probe of the cut-and-glued fan.
    ScfProbe {
        /// Cone tip height.
        #[arg(long)]
        height: f64,
        #[arg(long, default_value_t = 512)]
        segments: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// First-variation pairing of the fan against a midpoint bump.
    ViCheck {
        /// Cone tip height.
        #[arg(long)]
        height: f64,
        #[arg(long, default_value_t = 512)]
        segments: usize,
        /// Length penalty in the pairing (the fan itself is lambda = 0).
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Bump halfwidth as a fraction of curve length.
        #[arg(long, default_value_t = 0.25)]
        halfwidth: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Random-restart search below the figure-eight drop energy.
    DropCheck {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[command(flatten)]
        opts: SolveOpts,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveOpts {
    /// Discrete segment count (even, >= 16).
    #[arg(long, default_value_t = 256)]
    segments: usize,
    /// Multistart pool size.
    #[arg(long, default_value_t = 6)]
    starts: usize,
    /// Perturbation amplitude of the seeded starts.
    #[arg(long, default_value_t = 0.3)]
    amplitude: f64,
    /// RNG seed; falls back to ELASTICA_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Inner iteration cap per penalty round.
    #[arg(long, default_value_t = 5000)]
    max_inner: usize,
}

impl SolveOpts {
    fn config(&self) -> Result<SolverConfig, String> {
        Ok(SolverConfig {
            segments: self.segments,
            seed: resolve_seed(self.seed)?,
            multistart: MultistartConfig { count: self.starts, amplitude: self.amplitude },
            max_inner: self.max_inner,
            ..SolverConfig::default()
        })
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("ELASTICA_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("ELASTICA_SEED must be a nonnegative integer, got '{v}'")),
        Err(_) => Ok(0),
    }
}

fn parse_class(s: &str) -> Result<CurveClass, String> {
    match s {
        "sym" => Ok(CurveClass::Sym),
        "rhomb" => Ok(CurveClass::RhombSym),
        _ => Err(format!("unknown class '{s}' (sym|rhomb)")),
    }
}

fn class_name(c: CurveClass) -> &'static str {
    match c {
        CurveClass::Sym => "sym",
        CurveClass::RhombSym => "rhomb",
    }
}

fn parse_obstacle(s: &str) -> Result<Obstacle, String> {
    if let Some(rest) = s.strip_prefix("cone:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let height: f64 = parts[0]
            .parse()
            .map_err(|_| format!("cone height '{}' is not a number", parts[0]))?;
        let slope = match parts.len() {
            1 => 4.0 * height, // legs cross zero at x = 1/4, 3/4
            2 => parts[1]
                .parse()
                .map_err(|_| format!("cone slope '{}' is not a number", parts[1]))?,
            _ => return Err(format!("obstacle spec '{s}' (want cone:<height>[:<slope>])")),
        };
        Obstacle::cone(height, slope).map_err(|e| e.to_string())
    } else {
        let text = fs::read_to_string(s).map_err(|e| format!("obstacle file '{s}': {e}"))?;
        Obstacle::from_json(&text).map_err(|e| e.to_string())
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let bad = |m: &str| format!("lambda grid '{s}': {m}");
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| bad(&format!("'{p}' is not a number"))))
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [v] => Ok(vec![v]),
        [start, step, end] => {
            if !(step > 0.0 && end >= start) {
                return Err(bad("want start:step:end with step > 0 and end >= start"));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| (start + i as f64 * step).min(end)).collect())
        }
        _ => Err(bad("want a single value or start:step:end")),
    }
}

/// 12 significant digits, the report-wide contract; JSON has no infinities,
/// so non-finite diagnostics serialize as null.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{}", round_sig(x, 12))
    } else {
        "null".into()
    }
}

fn num10(x: f64) -> String {
    format!("{}", round_sig(x, 10))
}

fn write_out(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
}

/// Print to stdout and optionally persist the same bytes.
fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), String> {
    print!("{text}");
    if let Some(p) = path {
        write_out(p, text)?;
    }
    Ok(())
}

fn report_json(
    lambda: f64,
    class: CurveClass,
    config: &SolverConfig,
    obstacle: &Obstacle,
    r: &SolverReport,
) -> String {
    let nodes: Vec<String> = r.coincidence.touch_nodes.iter().map(|i| i.to_string()).collect();
    let matched = match &r.matched_family {
        Some((fam, d)) => format!("{{\"family\": \"{fam}\", \"distance\": {}}}", num(*d)),
        None => "null".into(),
    };
    let end = r.curve.endpoint();
    format!(
        "{{\n  \"lambda\": {},\n  \"class\": \"{}\",\n  \"segments\": {},\n  \"seed\": {},\n  \
         \"obstacle\": {},\n  \"verdict\": \"{:?}\",\n  \
         \"energy\": {{\"bending\": {}, \"length\": {}, \"total\": {}}},\n  \
         \"stationarity\": {},\n  \"endpoint_gap\": {},\n  \
         \"coincidence\": {{\"touching\": {}, \"touch_nodes\": [{}], \"min_gap\": {}}},\n  \
         \"matched_family\": {},\n  \"start_label\": \"{}\",\n  \
         \"curve\": {{\"segments\": {}, \"length\": {}, \"endpoint\": [{}, {}]}}\n}}\n",
        num(lambda),
        class_name(class),
        config.segments,
        config.seed,
        obstacle.to_json(),
        r.verdict,
        num(r.energy.bending),
        num(r.energy.length),
        num(r.energy.total),
        num(r.stationarity),
        num(r.endpoint_gap),
        r.coincidence.touching,
        nodes.join(","),
        num(r.coincidence.min_gap),
        matched,
        r.start_label,
        r.curve.segment_count(),
        num(r.curve.total_length()),
        num(end[0]),
        num(end[1]),
    )
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Thresholds { report } => {
            let t = moduli::thresholds();
            let text = format!(
                "{{\n  \"q_hat\": {},\n  \"q_star\": {},\n  \"lambda_hat\": {},\n  \"h_star\": {}\n}}\n",
                num10(t.q_hat),
                num10(t.q_star),
                num10(t.lambda_hat),
                num10(t.h_star)
            );
            emit(&text, report.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Construct { family, lambda, n, reflected, segments, out, svg, obstacle } => {
            if segments < 2 {
                return Err(format!("segment count {segments} is too small to sample"));
            }
            let obstacle = obstacle.as_deref().map(parse_obstacle).transpose()?;
            let spec = make_pinned(family, lambda, n).map_err(|e| e.to_string())?;
            let spec = if reflected { spec.reflected() } else { spec };

            let mut csv = String::from("s,x,y,theta,k\n");
            let mut points = Vec::with_capacity(segments + 1);
            for i in 0..=segments {
                let s = spec.length * i as f64 / segments as f64;
                let p = spec.sample(s);
                points.push(p);
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    num(s),
                    num(p[0]),
                    num(p[1]),
                    num(spec.tangent_angle(s)),
                    num(spec.signed_curvature(s)),
                ));
            }

            match (&out, &svg) {
                (Some(p), _) => write_out(p, &csv)?,
                // a figure is a view; the data still lands next to it
                (None, Some(fig)) => write_out(&fig.with_extension("csv"), &csv)?,
                (None, None) => print!("{csv}"),
            }
            if let Some(fig) = &svg {
                let rendered = svg::render(&svg::Figure {
                    curves: vec![points],
                    obstacle,
                    mirrored: false,
                });
                write_out(fig, &rendered)?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::EnergyTable { lambdas, max_n, out } => {
            let grid = parse_grid(&lambdas)?;
            let mut csv = String::from("lambda,family,n,q,alpha,length,bending,total\n");
            for &lambda in &grid {
                for family in [Family::Sarc, Family::Larc, Family::Loop, Family::Leaf] {
                    for n in 1..=max_n {
                        // silently skip inadmissible (family, lambda, n) combos
                        let Ok(spec) = make_pinned(family, lambda, n) else { continue };
                        let e = spec.closed_form_energy();
                        csv.push_str(&format!(
                            "{},{},{},{},{},{},{},{}\n",
                            num(lambda),
                            family,
                            n,
                            num(spec.q),
                            num(spec.alpha),
                            num(spec.length),
                            num(e.bending),
                            num(e.total),
                        ));
                    }
                }
            }
            match &out {
                Some(p) => write_out(p, &csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Minimize { obstacle, lambda, class, opts, report, csv, svg } => {
            let obs = parse_obstacle(&obstacle)?;
            let config = opts.config()?;
            let r = minimize(&obs, lambda, &config, class).map_err(|e| e.to_string())?;

            emit(&report_json(lambda, class, &config, &obs, &r), report.as_ref())?;
            let mut curve_csv = Vec::new();
            r.curve.write_csv(&mut curve_csv).map_err(|e| e.to_string())?;
            let curve_csv = String::from_utf8(curve_csv).expect("csv is ascii");
            match (&csv, &svg) {
                (Some(p), _) => write_out(p, &curve_csv)?,
                (None, Some(fig)) => write_out(&fig.with_extension("csv"), &curve_csv)?,
                (None, None) => {}
            }
            if let Some(fig) = &svg {
                let rendered = svg::render(&svg::Figure {
                    curves: vec![r.curve.positions()],
                    obstacle: Some(obs),
                    mirrored: class == CurveClass::RhombSym,
                });
                write_out(fig, &rendered)?;
            }
            Ok(if r.verdict == Verdict::Indeterminate { ExitCode::from(3) } else { ExitCode::SUCCESS })
        }

        Command::Sweep { obstacle, lambdas, class, opts, out, report } => {
            let obs = parse_obstacle(&obstacle)?;
            let grid = parse_grid(&lambdas)?;
            let config = opts.config()?;
            let summary = lambda_sweep(&obs, &grid, &config, class).map_err(|e| e.to_string())?;

            let mut csv = String::from(
                "lambda,verdict,bending,length,total,stationarity,endpoint_gap,min_gap,touch_count,matched_family,matched_distance,start_label\n",
            );
            let mut rows_json = Vec::new();
            for row in &summary.rows {
                let r = &row.report;
                let (mf, md) = match &r.matched_family {
                    Some((fam, d)) => (fam.to_string(), num(*d)),
                    None => (String::new(), String::new()),
                };
                csv.push_str(&format!(
                    "{},{:?},{},{},{},{},{},{},{},{},{},{}\n",
                    num(row.lambda),
                    r.verdict,
                    num(r.energy.bending),
                    num(r.energy.length),
                    num(r.energy.total),
                    num(r.stationarity),
                    num(r.endpoint_gap),
                    num(r.coincidence.min_gap),
                    r.coincidence.touch_nodes.len(),
                    mf,
                    md,
                    r.start_label,
                ));
                rows_json.push(format!(
                    "    {{\"lambda\": {}, \"verdict\": \"{:?}\", \"total\": {}, \"min_gap\": {}}}",
                    num(row.lambda),
                    r.verdict,
                    num(r.energy.total),
                    num(r.coincidence.min_gap)
                ));
            }
            let zone = |v: Option<f64>| v.map_or("null".into(), num);
            let text = format!(
                "{{\n  \"class\": \"{}\",\n  \"segments\": {},\n  \"seed\": {},\n  \"obstacle\": {},\n  \
                 \"largest_nontouching\": {},\n  \"smallest_touching\": {},\n  \"rows\": [\n{}\n  ]\n}}\n",
                class_name(class),
                config.segments,
                config.seed,
                obs.to_json(),
                zone(summary.largest_nontouching),
                zone(summary.smallest_touching),
                rows_json.join(",\n"),
            );
            emit(&text, report.as_ref())?;
            if let Some(p) = &out {
                write_out(p, &csv)?;
            }
            let stuck = summary.rows.iter().any(|r| r.report.verdict == Verdict::Indeterminate);
            Ok(if stuck { ExitCode::from(3) } else { ExitCode::SUCCESS })
        }

        Command::ScfProbe { height, segments, report } => {
            let config = ProbeConfig { segments, ..ProbeConfig::default() };
            let r = scf_stability_probe(height, &config).map_err(|e| e.to_string())?;
            let rays: Vec<String> = r
                .rays
                .iter()
                .map(|ray| {
                    format!(
                        "    {{\"label\": \"{}\", \"eps\": {}, \"delta_bending\": {}, \"admissible\": {}}}",
                        ray.label,
                        num(ray.eps),
                        num(ray.delta_bending),
                        ray.admissible
                    )
                })
                .collect();
            let text = format!(
                "{{\n  \"tip_height\": {},\n  \"segments\": {},\n  \"curvature_slope\": {},\n  \
                 \"baseline_bending\": {},\n  \"noise_floor\": {},\n  \"best_drop\": {},\n  \
                 \"verdict\": \"{:?}\",\n  \"rays\": [\n{}\n  ]\n}}\n",
                num(r.tip_height),
                segments,
                num(r.curvature_slope),
                num(r.baseline_bending),
                num(r.noise_floor),
                num(r.best_drop),
                r.verdict,
                rays.join(",\n"),
            );
            emit(&text, report.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }

        Command::ViCheck { height, segments, lambda, halfwidth, report } => {
            if !(halfwidth > 0.0 && halfwidth <= 0.5) {
                return Err(format!("bump halfwidth {halfwidth} must lie in (0, 0.5]"));
            }
            let scf = make_scf(height).map_err(|e| e.to_string())?;
            let curve = scf.export(segments);
            let l = curve.total_length();
            let bump = smooth_bump(segments, l, 0.5 * l, halfwidth * l);
            let pairing = vi_pairing(&curve, lambda, &bump).map_err(|e| e.to_string())?;
            let sign = if pairing > 0.0 { "+" } else if pairing < 0.0 { "-" } else { "0" };
            let text = format!(
                "{{\n  \"tip_height\": {},\n  \"segments\": {},\n  \"lambda\": {},\n  \
                 \"halfwidth\": {},\n  \"pairing\": {},\n  \"sign\": \"{}\",\n  \
                 \"curvature_slope\": {}\n}}\n",
                num(height),
                segments,
                num(lambda),
                num(halfwidth),
                num(pairing),
                sign,
                num(scf.curvature_slope_at_tip()),
            );
            emit(&text, report.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }

        Command::DropCheck { lambda, trials, opts, report } => {
            let config = opts.config()?;
            let r = drop_minimality_check(lambda, trials, &config).map_err(|e| e.to_string())?;
            let text = format!(
                "{{\n  \"lambda\": {},\n  \"trials\": {},\n  \"segments\": {},\n  \"seed\": {},\n  \
                 \"leaf_energy\": {},\n  \"best_trial_energy\": {},\n  \"leaf_start_energy\": {},\n  \
                 \"all_above_floor\": {},\n  \"leaf_is_stationary\": {},\n  \"ok\": {}\n}}\n",
                num(r.lambda),
                r.trials,
                config.segments,
                config.seed,
                num(r.leaf_energy),
                num(r.best_trial_energy),
                num(r.leaf_start_energy),
                r.all_above_floor,
                r.leaf_is_stationary,
                r.ok,
            );
            emit(&text, report.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
