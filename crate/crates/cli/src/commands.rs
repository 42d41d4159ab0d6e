//! Argument definitions and the subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use spin7_core::flow::{
    entropy, initial_data, parabolic_rescale, run_flow, soliton_residual, soliton_schedule, theta,
    type_one_fit, EntropyOptions, HaltReason, RunObserver,
};
use spin7_core::identities::run_identity_suite;
use spin7_core::{DiagRecord, FlowConfig, FlowState, LatticeField, OctonionTable, Spin7Error, Vec8};

use crate::checkpoint::{checkpoint_name, read_checkpoint, write_checkpoint};
use crate::error::{CliError, CliResult};
use crate::io::{
    atomic_write, csv_table, ensure_dir, fmt_f64, unix_now, ResumeInfo, RunManifest, SeriesWriter,
};

#[derive(Debug, Parser)]
#[command(
    name = "spin7",
    version,
    about = "Harmonic Spin(7)-flow laboratory on flat tori"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pointwise identity suite.
    Verify(VerifyArgs),
    /// Run or resume a flow.
    #[command(subcommand)]
    Flow(FlowCommand),
    /// Θ_(x0,t0) for one or more checkpoints.
    Theta(ThetaArgs),
    /// The sampled entropy λ(Φ, σ) of a checkpoint.
    Entropy(EntropyArgs),
    /// Parabolically rescale a checkpoint and verify the scaling identities.
    Rescale(RescaleArgs),
    /// Soliton residual of a checkpoint and/or the invariants of a schedule.
    SolitonCheck(SolitonArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Emit one JSON record per identity instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Build the structure form from a deliberately corrupted octonion
    /// table (negative control).
    #[arg(long, hide = true)]
    pub corrupt_table: bool,
}

#[derive(Debug, Subcommand)]
pub enum FlowCommand {
    /// Start a run from a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Continue a run from a checkpoint; the configuration is read from
    /// `config.json` next to the checkpoint.
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    /// Checkpoints, in any order.
    #[arg(long, required = true, num_args = 1..)]
    pub checkpoint: Vec<PathBuf>,
    /// Kernel centre: one coordinate per active axis, or all eight.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    /// Kernel time; must exceed every checkpoint time.
    #[arg(long, allow_negative_numbers = true)]
    pub t0: f64,
    /// CSV destination (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 16)]
    pub t_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub x_stride: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RescaleArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Scale factor c > 0.
    #[arg(long)]
    pub c: f64,
    /// Where to write the rescaled checkpoint (Euclidean coordinates: the
    /// period becomes c·L and time c²t).
    #[arg(long)]
    pub out: PathBuf,
    /// CSV destination for the verification report (default: standard output).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolitonArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Constant vector field X (eight components); zero by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Schedule constant c ∈ {-1, 0, 1}; requires --schedule-p.
    #[arg(long, allow_negative_numbers = true, requires = "schedule_p")]
    pub schedule_c: Option<i32>,
    #[arg(long, requires = "schedule_c")]
    pub schedule_p: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Execute a parsed command, writing human-readable output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Verify(a) => verify(&a, stdout),
        Command::Flow(FlowCommand::Run { config, out }) => flow_run(&config, &out, stdout),
        Command::Flow(FlowCommand::Resume { checkpoint, out }) => flow_resume(&checkpoint, &out, stdout),
        Command::Theta(a) => cmd_theta(&a, stdout),
        Command::Entropy(a) => cmd_entropy(&a, stdout),
        Command::Rescale(a) => cmd_rescale(&a, stdout),
        Command::SolitonCheck(a) => cmd_soliton(&a, stdout),
    }
}

fn say(stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("cannot write to standard output: {e}")))
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => atomic_write(p, text.as_bytes()),
        None => say(stdout, text),
    }
}

fn verify(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let table = if args.corrupt_table {
        OctonionTable::standard().with_entry(1, 2, 4, -1.0)
    } else {
        OctonionTable::standard()
    };
    let checks = run_identity_suite(&table);
    if args.json {
        let json = serde_json::to_string_pretty(&checks).expect("checks serialize");
        say(stdout, &format!("{json}\n"))?;
    } else {
        let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(8);
        let mut text = format!(
            "{:<width$}  {:>12}  {:>9}  status\n",
            "identity", "max error", "tolerance"
        );
        for c in &checks {
            text.push_str(&format!(
                "{:<width$}  {:>12.3e}  {:>9.0e}  {}\n",
                c.name,
                c.max_error,
                c.tolerance,
                if c.passed { "ok" } else { "FAILED" }
            ));
        }
        say(stdout, &text)?;
    }
    match checks.iter().find(|c| !c.passed) {
        Some(c) => Err(CliError::Verification(format!(
            "identity '{}' has max error {:e} (tolerance {:e})",
            c.name, c.max_error, c.tolerance
        ))),
        None => Ok(()),
    }
}

pub const CONFIG_COPY: &str = "config.json";

/// Parse a configuration file; unknown keys and range violations are errors.
pub fn load_config(path: &Path) -> CliResult<FlowConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config: FlowConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(config)
}

/// Records fed to the Type-I fit at the end of a run.
const TYPE_I_WINDOW: usize = 20;

struct DirObserver<'a> {
    dir: &'a Path,
    series: SeriesWriter,
    manifest: RunManifest,
    max_t: Vec<(f64, f64)>,
}

impl RunObserver for DirObserver<'_> {
    fn record(&mut self, r: &DiagRecord) -> spin7_core::Result<()> {
        self.series.push(r);
        self.manifest.records += 1;
        self.max_t.push((r.t, r.max_t));
        Ok(())
    }

    fn checkpoint(&mut self, state: &FlowState) -> spin7_core::Result<()> {
        let name = checkpoint_name(state.step);
        let io = |e: CliError| Spin7Error::Observer(e.to_string());
        write_checkpoint(&self.dir.join(&name), state).map_err(io)?;
        if !self.manifest.checkpoints.contains(&name) {
            self.manifest.checkpoints.push(name);
        }
        self.series.flush().map_err(io)?;
        self.manifest.write(self.dir).map_err(io)
    }
}

fn drive(
    config: &FlowConfig,
    start: FlowState,
    out: &Path,
    resumed_from: Option<ResumeInfo>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    ensure_dir(out)?;
    let json = serde_json::to_vec_pretty(config).expect("config serializes");
    atomic_write(&out.join(CONFIG_COPY), &json)?;
    let manifest = RunManifest::start(config, resumed_from);
    manifest.write(out)?;
    let mut obs = DirObserver {
        dir: out,
        series: SeriesWriter::new(out),
        manifest,
        max_t: Vec::new(),
    };
    let result = run_flow(config, start, &mut obs);
    let DirObserver {
        series,
        mut manifest,
        max_t,
        ..
    } = obs;
    manifest.finished_at = Some(unix_now());
    manifest.type_i_fit = type_one_fit(&max_t, TYPE_I_WINDOW);
    let outcome = match result {
        Ok(summary) => {
            manifest.exit_reason = serde_json::to_value(summary.halt)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            manifest.final_step = Some(summary.final_state.step);
            manifest.final_t = Some(summary.final_state.t);
            manifest.final_generator_max = Some(summary.final_generator_max);
            say(
                stdout,
                &format!(
                    "halted ({}) at step {} t = {} with max|Div T| = {:e}; {} records\n",
                    manifest.exit_reason,
                    summary.final_state.step,
                    summary.final_state.t,
                    summary.final_generator_max,
                    manifest.records
                ),
            )?;
            if summary.halt == HaltReason::BlowUp {
                Err(CliError::Runtime(format!(
                    "blow-up guard tripped at step {}",
                    summary.final_state.step
                )))
            } else {
                Ok(())
            }
        }
        Err(e) => {
            manifest.exit_reason = format!("error: {e}");
            Err(CliError::from_run(e))
        }
    };
    series.flush()?;
    manifest.write(out)?;
    outcome
}

fn flow_run(config_path: &Path, out: &Path, stdout: &mut dyn Write) -> CliResult<()> {
    let config = load_config(config_path)?;
    let start = initial_data(&config).map_err(CliError::from_input)?;
    drive(&config, start, out, None, stdout)
}

fn flow_resume(checkpoint: &Path, out: &Path, stdout: &mut dyn Write) -> CliResult<()> {
    let state = read_checkpoint(checkpoint)?;
    let dir = checkpoint.parent().unwrap_or(Path::new("."));
    let config = load_config(&dir.join(CONFIG_COPY))?;
    if !state.field.spec.same_grid(&config.lattice) {
        return Err(CliError::Config(format!(
            "{} does not match the lattice of {}",
            checkpoint.display(),
            dir.join(CONFIG_COPY).display()
        )));
    }
    let info = ResumeInfo {
        checkpoint: checkpoint.to_path_buf(),
        step: state.step,
    };
    drive(&config, state, out, Some(info), stdout)
}

/// Expand a point given on the active axes (or all eight) to R⁸.
fn point_in_r8(state: &FlowState, coords: &[f64]) -> CliResult<Vec8> {
    let spec = &state.field.spec;
    let mut x = Vec8::zero();
    if coords.len() == 8 {
        x.0.copy_from_slice(coords);
    } else if coords.len() == spec.dims() {
        for (a, c) in coords.iter().enumerate() {
            x.0[spec.axis(a)] = *c;
        }
    } else {
        return Err(CliError::Config(format!(
            "expected {} or 8 coordinates, got {}",
            spec.dims(),
            coords.len()
        )));
    }
    Ok(x)
}

fn cmd_theta(args: &ThetaArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut states = args
        .checkpoint
        .iter()
        .map(|p| read_checkpoint(p))
        .collect::<CliResult<Vec<_>>>()?;
    let first = &states[0].field.spec;
    if let Some((i, _)) = states
        .iter()
        .enumerate()
        .find(|(_, s)| !s.field.spec.same_grid(first))
    {
        return Err(CliError::Config(format!(
            "{} is on a different lattice than {}",
            args.checkpoint[i].display(),
            args.checkpoint[0].display()
        )));
    }
    states.sort_by(|a, b| a.t.total_cmp(&b.t));
    let x0 = point_in_r8(&states[0], &args.x0)?;
    let rows = states
        .iter()
        .map(|s| {
            let th = theta(s, &x0, args.t0).map_err(CliError::from_input)?;
            Ok(vec![s.step.to_string(), fmt_f64(s.t), fmt_f64(th)])
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit(&args.out, &csv_table("step,t,theta", rows), stdout)
}

fn cmd_entropy(args: &EntropyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let s = read_checkpoint(&args.checkpoint)?;
    let opts = EntropyOptions {
        t_samples: args.t_samples,
        x_stride: args.x_stride,
    };
    let lambda = entropy(&s, args.sigma, opts).map_err(CliError::from_input)?;
    let row = vec![
        s.step.to_string(),
        fmt_f64(s.t),
        fmt_f64(args.sigma),
        args.t_samples.to_string(),
        args.x_stride.to_string(),
        fmt_f64(lambda),
    ];
    emit(
        &args.out,
        &csv_table("step,t,sigma,t_samples,x_stride,entropy", [row]),
        stdout,
    )
}

/// Tolerance for the exact rescaling identities.
pub const RESCALE_TOL: f64 = 1e-12;

fn cmd_rescale(args: &RescaleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let s = read_checkpoint(&args.checkpoint)?;
    let (scaled, report) = parabolic_rescale(&s, args.c).map_err(CliError::from_input)?;
    write_checkpoint(&args.out, &scaled)?;
    let row = vec![
        fmt_f64(report.c),
        fmt_f64(report.torsion),
        fmt_f64(report.divergence),
        fmt_f64(report.norms[0]),
        fmt_f64(report.norms[1]),
    ];
    emit(
        &args.report,
        &csv_table("c,torsion,divergence,norm_j0,norm_j1", [row]),
        stdout,
    )?;
    if report.max_error() < RESCALE_TOL {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "rescaling identities off by {:e}",
            report.max_error()
        )))
    }
}

fn cmd_soliton(args: &SolitonArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut text = String::new();
    if let Some(path) = &args.checkpoint {
        let s = read_checkpoint(path)?;
        let mut x = Vec8::zero();
        match args.x.len() {
            0 => {}
            8 => x.0.copy_from_slice(&args.x),
            n => return Err(CliError::Config(format!("--x needs 8 components, got {n}"))),
        }
        let field = LatticeField::constant(&s.field.spec, x);
        let r = soliton_residual(&s, &field).map_err(CliError::from_input)?;
        text.push_str(&csv_table(
            "step,t,residual",
            [vec![s.step.to_string(), fmt_f64(s.t), fmt_f64(r)]],
        ));
    }
    if let (Some(c), Some(p)) = (args.schedule_c, args.schedule_p) {
        let power = soliton_schedule(c, p).map_err(CliError::from_input)?;
        let rows = [power, power.anchored()].map(|s| {
            let chk = s.check();
            vec![
                format!("{:?}", s.kind).to_lowercase(),
                c.to_string(),
                fmt_f64(p),
                fmt_f64(s.t_hat),
                fmt_f64(chk.rho_at_zero),
                fmt_f64(chk.alpha_at_anchor),
                fmt_f64(chk.log_derivative),
            ]
        });
        text.push_str(&csv_table(
            "schedule,c,p,t_hat,rho0_minus_1,alpha_that_minus_1,log_derivative_defect",
            rows,
        ));
    }
    if text.is_empty() {
        return Err(CliError::Config(
            "nothing to check: give --checkpoint and/or --schedule-c/--schedule-p".into(),
        ));
    }
    emit(&args.out, &text, stdout)
}
