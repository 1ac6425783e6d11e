use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use super::config::{parse_config, RunConfig};
use super::csv::{drift_csv, error_csv, read_slow_series, trajectory_csv, write_atomic};
use super::report::ErrorReport;
use crate::error::Error;
use crate::field::{check_field, random_probes};
use crate::harness::{
    convergence_study, error_between, observables, run_boris, run_drift, run_reference,
    theorem1_suite, ErrorSeries, ExperimentSpec, ReferencePolicy, SlowSeries, StudyMode,
    DEFAULT_REF_H_FACTOR,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_GATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "boris-drift", version, about = "Boris pushers and guiding-center drift in toroidal fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ReferenceArgs {
    /// Reference step as a multiple of epsilon.
    #[arg(long, default_value_t = DEFAULT_REF_H_FACTOR)]
    ref_h_factor: f64,
    /// Start the reference from the filtered velocity.
    #[arg(long)]
    ref_filtered_init: bool,
}

impl ReferenceArgs {
    fn policy(&self) -> ReferencePolicy {
        ReferencePolicy {
            ref_h_factor: self.ref_h_factor,
            ref_filtered_init: self.ref_filtered_init,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Boris run, written as a trajectory CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.path`; stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Steps between nondegeneracy checks (0 disables).
        #[arg(long, default_value_t = 0)]
        sigma_stride: usize,
    },
    /// Drift solution on the run's output grid.
    Drift {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pointwise errors of a run against a second run, the reference or the drift.
    Compare {
        /// Trajectory CSV or config JSON.
        run: PathBuf,
        /// Comparator CSV or config JSON.
        against: Option<PathBuf>,
        /// Compare against the fine reference of `run` (config input only).
        #[arg(long, conflicts_with_all = ["against", "drift"])]
        reference: bool,
        /// Compare against the drift solution of `run` (config input only).
        #[arg(long, conflicts_with = "against")]
        drift: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        refs: ReferenceArgs,
    },
    /// Convergence study of the modified pusher.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Scaled `(eps:h)` pairs, e.g. `1e-3:0.04,2.5e-4:0.02`.
        #[arg(long, value_delimiter = ',', value_parser = parse_pair, conflicts_with = "h_list")]
        pairs: Vec<(f64, f64)>,
        /// Step sizes at the config's epsilon, compared to the fine reference.
        #[arg(long, value_delimiter = ',')]
        h_list: Vec<f64>,
        /// Directory for per-run error CSVs.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        refs: ReferenceArgs,
    },
    /// Fine reference against the drift solution for several epsilon.
    Theorem1 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Horizon constant; defaults to the config's `c`.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        refs: ReferenceArgs,
    },
    /// Consistency checks of the configured field.
    CheckField {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 50)]
        probes: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        delta: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (e, h) = s
        .split_once(':')
        .ok_or_else(|| format!("expected eps:h, got \"{s}\""))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("\"{t}\": {e}"));
    Ok((num(e)?, num(h)?))
}

struct Failure {
    code: i32,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Schema { .. } | Error::InvalidInput(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Self { code, error }
    }
}

type CmdResult = Result<i32, Failure>;

fn diagnostic(error: &Error) -> String {
    let mut v = json!({ "error": error.kind(), "message": error.to_string() });
    if let Error::Schema { path, .. } = error {
        v["path"] = json!(path);
    }
    v.to_string()
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_CONFIG,
        error: Error::Io(format!("{}: {e}", path.display())),
    })?;
    Ok(parse_config(&text)?)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(Error::from)?;
            out.flush().map_err(Error::from)?;
        }
    }
    Ok(())
}

fn is_config(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn slow_of_run(path: &Path, refs: ReferencePolicy) -> Result<(SlowSeries, Option<ExperimentSpec>), Failure> {
    if is_config(path) {
        let spec = load_config(path)?.to_spec(refs);
        let traj = run_boris(&spec)?;
        let obs = observables(&traj, &spec.model()?, spec.r_min)?;
        Ok((obs.slow, Some(spec)))
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Failure {
            code: EXIT_CONFIG,
            error: Error::Io(format!("{}: {e}", path.display())),
        })?;
        Ok((read_slow_series(&text, &path.display().to_string())?, None))
    }
}

fn write_series(dir: &Path, name: &str, series: &ErrorSeries) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(Error::from)?;
    write_atomic(&dir.join(name), &error_csv(series))?;
    Ok(())
}

fn gate(report: &ErrorReport, path: Option<&Path>) -> CmdResult {
    emit(path, &(report.to_json() + "\n"))?;
    if report.pass {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "{}",
            json!({ "error": "GateFailure", "message": format!("{} failed its acceptance gate", report.command) })
        );
        Ok(EXIT_GATE)
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Simulate {
            config,
            out,
            sigma_stride,
        } => {
            let cfg = load_config(&config)?;
            let mut spec = cfg.to_spec(ReferencePolicy::default());
            spec.sigma_stride = sigma_stride;
            let traj = run_boris(&spec)?;
            let obs = observables(&traj, &spec.model()?, spec.r_min)?;
            for w in &traj.warnings {
                eprintln!(
                    "{}",
                    json!({ "warning": "Nondegeneracy", "step": w.step, "t": w.t, "sigma": w.sigma })
                );
            }
            let target = out.or(cfg.output.path.map(PathBuf::from));
            emit(target.as_deref(), &trajectory_csv(&traj, &obs))?;
            Ok(EXIT_OK)
        }
        Command::Drift { config, out } => {
            let cfg = load_config(&config)?;
            let spec = cfg.to_spec(ReferencePolicy::default());
            let d = run_drift(&spec)?;
            emit(out.as_deref(), &drift_csv(&d))?;
            Ok(EXIT_OK)
        }
        Command::Compare {
            run: run_path,
            against,
            reference,
            drift,
            out,
            summary,
            refs,
        } => {
            let policy = refs.policy();
            let (slow, spec) = slow_of_run(&run_path, policy)?;
            let comparator = match against {
                Some(p) => slow_of_run(&p, policy)?.0,
                None => {
                    let spec = spec.as_ref().ok_or_else(|| {
                        Failure::from(Error::InvalidInput(
                            "--reference/--drift need a config as the run input".into(),
                        ))
                    })?;
                    if reference {
                        let r = run_reference(spec)?;
                        observables(&r, &spec.model()?, spec.r_min)?.slow
                    } else if drift {
                        SlowSeries::from(&run_drift(spec)?)
                    } else {
                        return Err(Error::InvalidInput(
                            "compare needs a second input, --reference or --drift".into(),
                        )
                        .into());
                    }
                }
            };
            let series = error_between(&slow, &comparator)?;
            let (eps, h) = (spec.as_ref().map(|s| s.epsilon), spec.as_ref().map(|s| s.h));
            let steps = spec.as_ref().map_or(0, |s| (s.grid().samples * s.sample_every()) as u64);
            let report = ErrorReport::from_compare(&series, eps, h, steps);
            emit(out.as_deref(), &error_csv(&series))?;
            match summary {
                Some(p) => write_atomic(&p, &(report.to_json() + "\n"))?,
                None => eprintln!("{}", serde_json::to_string(&report).expect("report serializes")),
            }
            Ok(EXIT_OK)
        }
        Command::Converge {
            config,
            pairs,
            h_list,
            out_dir,
            report,
            refs,
        } => {
            let base = load_config(&config)?.to_spec(refs.policy());
            let mode = if !pairs.is_empty() {
                StudyMode::ScaledPairs { pairs }
            } else if !h_list.is_empty() {
                StudyMode::FixedEps { h_list }
            } else {
                return Err(Error::InvalidInput("converge needs --pairs or --h-list".into()).into());
            };
            let study = convergence_study(&base, &mode)?;
            if let Some(dir) = &out_dir {
                for (i, p) in study.points.iter().enumerate() {
                    write_series(dir, &format!("converge_{i}.csv"), &p.series)?;
                }
            }
            gate(&ErrorReport::from(&study), report.as_deref())
        }
        Command::Theorem1 {
            config,
            eps,
            c,
            out_dir,
            report,
            refs,
        } => {
            let base = load_config(&config)?.to_spec(refs.policy());
            let c = c.unwrap_or(base.c);
            let suite = theorem1_suite(&base, &eps, c)?;
            if let Some(dir) = &out_dir {
                for (i, e) in suite.entries.iter().enumerate() {
                    write_series(dir, &format!("theorem1_{i}.csv"), &e.series)?;
                }
            }
            gate(&ErrorReport::from(&suite), report.as_deref())
        }
        Command::CheckField {
            config,
            probes,
            seed,
            delta,
            report,
        } => {
            let spec = load_config(&config)?.to_spec(ReferencePolicy::default());
            let model = spec.model()?;
            let pts = random_probes(probes, seed, (0.3, 1.5), (-1.0, 1.0));
            let r = check_field(&model, &pts, delta);
            emit(
                report.as_deref(),
                &(serde_json::to_string_pretty(&r).expect("report serializes") + "\n"),
            )?;
            Ok(if r.pass { EXIT_OK } else { EXIT_GATE })
        }
    }
}

/// Entry point of the command-line tool. Returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", json!({ "error": "UsageError", "message": first }));
            return EXIT_CONFIG;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", diagnostic(&f.error));
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_parse() {
        assert_eq!(parse_pair("1e-3:0.04"), Ok((1e-3, 0.04)));
        assert!(parse_pair("1e-3").is_err());
    }

    #[test]
    fn diagnostics_are_single_line_json() {
        let d = diagnostic(&Error::schema("/variant", "expected \"standard\"\nor \"modified\""));
        assert!(!d.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&d).unwrap();
        assert_eq!(v["error"], "SchemaError");
        assert_eq!(v["path"], "/variant");
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(Failure::from(Error::schema("/h", "x")).code, EXIT_CONFIG);
        assert_eq!(Failure::from(Error::AxisSingularity { r: 0.0, r_min: 1e-9 }).code, EXIT_RUNTIME);
        assert_eq!(Failure::from(Error::BudgetExceeded { steps: 2, budget: 1 }).code, EXIT_RUNTIME);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(cli_main(["boris-drift", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(cli_main(["boris-drift", "--help"]), EXIT_OK);
    }
}
