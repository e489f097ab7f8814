//! Command-line front end: `sweep`, `crb`, `trial` and `drift`.
//!
//! Exit status is 0 on success, 1 for an unusable config or invocation and
//! 2 for failures while running or writing results.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use beamsync_core::config::{db_to_linear, ExperimentConfig};
use beamsync_core::crb::{crb_closed_form, crb_numerical};
use beamsync_core::montecarlo::{
    run_sweep_detailed, run_trial, simulate_drift_timeline, trial_channel, TrialStatus,
};
use beamsync_core::protocol::{genie_beam_direction, Scheme};
use beamsync_core::signal::make_sync_signal_with;
use beamsync_core::Error;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "beamsync",
    version,
    about = "Over-the-air carrier synchronization link simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RMSE-versus-SNR sweep; writes rmse.csv, summary.txt and manifest.cfg.
    Sweep {
        config: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Worker threads; 0 uses every core. Results do not depend on it.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-form and numerical CRB over the SNR grid, for the genie beam on
    /// the channel of trial 0.
    Crb { config: PathBuf },
    /// One protocol round, printed as key=value lines.
    Trial {
        config: PathBuf,
        #[arg(long)]
        scheme: Scheme,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Drift and resynchronization timeline; writes drift.csv and manifest.cfg.
    Drift {
        config: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn runtime(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> Failure {
    move |e| Failure::Runtime(format!("{context}: {e}"))
}

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

/// Files of one run. Each is written to a temporary name and renamed into
/// place; if anything fails, everything already placed is removed.
struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputSet {
    fn new(dir: &Path) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    fn commit(self) -> Result<Vec<PathBuf>, Failure> {
        fs::create_dir_all(&self.dir).map_err(runtime(self.dir.display()))?;
        let mut temps = Vec::new();
        let mut placed = Vec::new();
        let result = (|| {
            for (name, contents) in &self.files {
                let tmp = self.dir.join(format!(".{name}.tmp"));
                temps.push(tmp.clone());
                let mut f = fs::File::create(&tmp).map_err(runtime(tmp.display()))?;
                f.write_all(contents.as_bytes())
                    .map_err(runtime(tmp.display()))?;
                f.sync_all().map_err(runtime(tmp.display()))?;
            }
            for ((name, _), tmp) in self.files.iter().zip(&temps) {
                let dest = self.dir.join(name);
                fs::rename(tmp, &dest).map_err(runtime(dest.display()))?;
                placed.push(dest);
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(placed),
            Err(e) => {
                for p in temps.iter().chain(&placed) {
                    let _ = fs::remove_file(p);
                }
                Err(e)
            }
        }
    }
}

/// Config snapshot followed by a `[manifest]` section the parser ignores,
/// so the file can be fed back as a config.
fn manifest(cfg: &ExperimentConfig, command: &str, seconds: f64, outputs: &[&str]) -> String {
    let mut s = cfg.render();
    let _ = write!(
        s,
        "\n[manifest]\ncommand = {command}\ntool_version = {}\nfingerprint = {}\nmaster_seed = {}\n\
         wall_clock_seconds = {seconds:.3}\noutputs = {}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.fingerprint(),
        cfg.master_seed,
        outputs.join(", ")
    );
    s
}

pub fn cmd_sweep(
    config: &Path,
    out: &Path,
    workers: usize,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let cfg = load_config(config, seed)?;
    let start = Instant::now();
    let result = run_sweep_detailed(&cfg, workers)?;
    let seconds = start.elapsed().as_secs_f64();

    let mut summary = format!(
        "config {}\nfingerprint {}\ntrials per point {}\n",
        config.display(),
        result.curve.fingerprint,
        cfg.trials
    );
    for &scheme in &cfg.schemes {
        let _ = writeln!(summary, "\n[{scheme}]");
        for p in result.curve.series(scheme) {
            let _ = writeln!(
                summary,
                "snr {:>7.2} dB  rmse {:.4e}  sqrt(crb) {:.4e}  ratio {:>8.3}  failed {}",
                p.snr_db,
                p.rmse,
                p.crb_sqrt_avg,
                p.rmse / p.crb_sqrt_avg,
                p.failures
            );
        }
    }

    let mut set = OutputSet::new(out);
    set.add("rmse.csv", result.curve.to_csv());
    set.add("summary.txt", summary);
    let mut names: Vec<&str> = set.names();
    names.push("manifest.cfg");
    let m = manifest(&cfg, "sweep", seconds, &names);
    set.add("manifest.cfg", m);
    let placed = set.commit()?;
    for p in placed {
        println!("wrote {}", p.display());
    }
    Ok(())
}

pub fn cmd_crb(config: &Path) -> Result<(), Failure> {
    let cfg = load_config(config, None)?;
    let x = make_sync_signal_with(cfg.n, cfg.cycles, cfg.shape)?;
    let g = trial_channel(&cfg, 0)?;
    let a = genie_beam_direction(&g)?;
    let b = g.entries().transpose() * a.weights();
    println!(
        "n={} ms={} b_norm_sqr={:e}",
        cfg.n,
        cfg.ms,
        b.norm_squared()
    );
    let mut worst = 0.0f64;
    for &snr_db in &cfg.snr_grid_db {
        let rho = db_to_linear(snr_db);
        let closed = crb_closed_form(&x, &b, rho)?;
        let numerical = crb_numerical(&x, &b, rho)?;
        let dev = (numerical - closed).abs() / closed;
        worst = worst.max(dev);
        println!("snr_db={snr_db} crb_closed_form={closed:e} crb_numerical={numerical:e} rel_deviation={dev:e}");
    }
    println!("max_rel_deviation={worst:e}");
    Ok(())
}

pub fn cmd_trial(
    config: &Path,
    scheme: Scheme,
    snr_db: f64,
    seed: Option<u64>,
    index: u64,
) -> Result<(), Failure> {
    let cfg = load_config(config, seed)?;
    let r = run_trial(&cfg, scheme, snr_db, index)?;
    let status = match &r.status {
        TrialStatus::Ok => "ok".to_string(),
        TrialStatus::Failed(m) => format!("failed: {m}"),
    };
    println!("scheme={}", r.scheme);
    println!("snr_db={}", r.snr_db);
    println!("master_seed={}", cfg.master_seed);
    println!("trial_index={}", r.trial_index);
    println!("delta_true={:e}", r.delta_true);
    println!("delta_hat={:e}", r.delta_hat);
    println!("abs_error={:e}", r.squared_error.sqrt());
    println!("beam_alignment={}", r.beam_alignment);
    println!("objective={:e}", r.objective_value);
    println!("crb={:e}", r.crb);
    println!("status={status}");
    Ok(())
}

pub fn cmd_drift(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let cfg = load_config(config, seed)?;
    let start = Instant::now();
    let timeline = simulate_drift_timeline(&cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let mut set = OutputSet::new(out);
    set.add("drift.csv", timeline.to_csv());
    set.add(
        "manifest.cfg",
        manifest(&cfg, "drift", seconds, &["drift.csv", "manifest.cfg"]),
    );
    set.commit()?;
    println!("sync_events={}", timeline.sync_slots().len());
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            workers,
            seed,
        } => cmd_sweep(&config, &out, workers, seed),
        Command::Crb { config } => cmd_crb(&config),
        Command::Trial {
            config,
            scheme,
            snr_db,
            seed,
            index,
        } => cmd_trial(&config, scheme, snr_db, seed, index),
        Command::Drift { config, out, seed } => cmd_drift(&config, &out, seed),
    }
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_kinds_map_to_exit_codes() {
        let config: Failure = ExperimentConfig::parse("[array]\nmp = x\n")
            .unwrap_err()
            .into();
        assert_eq!(config.exit_code(), 1);
        let runtime: Failure = Error::Degenerate("empty".into()).into();
        assert_eq!(runtime.exit_code(), 2);
    }

    #[test]
    fn manifest_replays_as_config() {
        let cfg = ExperimentConfig {
            master_seed: 42,
            trials: 7,
            ..ExperimentConfig::default()
        };
        let text = manifest(&cfg, "sweep", 1.25, &["rmse.csv", "manifest.cfg"]);
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
        assert!(text.contains(&format!("fingerprint = {}", cfg.fingerprint())));
    }

    #[test]
    fn output_set_places_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("nested");
        let mut set = OutputSet::new(&target);
        set.add("a.txt", "alpha".into());
        set.add("b.txt", "beta".into());
        let placed = set.commit().unwrap();
        assert_eq!(placed.len(), 2);
        assert_eq!(fs::read_to_string(target.join("b.txt")).unwrap(), "beta");
        assert_eq!(fs::read_dir(&target).unwrap().count(), 2);
    }

    #[test]
    fn negative_snr_argument_parses() {
        let cli = Cli::try_parse_from([
            "beamsync", "trial", "x.cfg", "--scheme", "analog", "--snr-db", "-12.5",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Trial { snr_db, .. } if snr_db == -12.5));
    }
}
