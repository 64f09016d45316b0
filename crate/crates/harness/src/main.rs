//! Command-line driver for the GPSM security-capacity simulator.

use clap::{Args, Parser, Subcommand};
use gpsm_harness::config::{ExperimentConfig, ModeArg, parse_list, parse_snr_spec};
use gpsm_harness::output::{persist_outage, persist_record, value_suffix, write_json};
use gpsm_harness::scatter::{run_scatter, scatter_stats, write_scatter_csv};
use gpsm_harness::sweep::{run_capacity, run_outage, run_sweep_corr, run_sweep_csit, run_sweep_eve};
use gpsm_harness::{HarnessError, Result, oracle};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gpsm-sim",
    version,
    about = "Security-capacity simulator for pre-coded spatial modulation with antenna scrambling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Payload mode: gpsm, cas or gas.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    n_tx: Option<usize>,
    #[arg(long)]
    n_rx: Option<usize>,
    #[arg(long)]
    n_active: Option<usize>,
    #[arg(long)]
    n_eve: Option<usize>,
    /// Constellation order for gpsm mode.
    #[arg(long)]
    m_ary: Option<usize>,
    /// SNR grid as start:stop:step in dB.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    csit_sigma_i: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    n_channels: Option<usize>,
    #[arg(long)]
    n_noise: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = machine default).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Base name for output files (defaults to the subcommand name).
    #[arg(long)]
    name: Option<String>,
}

impl CommonArgs {
    fn merge(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(mode) = self.mode {
            cfg.mode = mode;
        }
        if let Some(v) = self.n_tx {
            cfg.dims.n_tx = v;
        }
        if let Some(v) = self.n_rx {
            cfg.dims.n_rx = v;
        }
        if let Some(v) = self.n_active {
            cfg.dims.n_active = v;
        }
        if let Some(v) = self.n_eve {
            cfg.dims.n_eve = v;
        }
        if let Some(v) = self.m_ary {
            cfg.m_ary = v;
        }
        if let Some(spec) = &self.snr {
            cfg.snr_grid_db = parse_snr_spec(spec)?;
        }
        if let Some(v) = self.csit_sigma_i {
            cfg.csit_sigma_i = v;
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = self.n_channels {
            cfg.budget.n_channels = v;
        }
        if let Some(v) = self.n_noise {
            cfg.budget.n_noise = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        Ok(cfg)
    }

    fn name(&self, default: &str) -> String {
        self.name.clone().unwrap_or_else(|| default.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// One security-capacity sweep over the SNR grid.
    Capacity(CommonArgs),
    /// Per-antenna received-signal samples on one fixed channel.
    Scatter {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1000)]
        n_samples: usize,
        /// SNR of the sampled transmissions in dB.
        #[arg(long, default_value_t = 30.0)]
        snr_point: f64,
    },
    /// Capacity sweeps across transmitter CSI error levels (gas mode).
    SweepCsit {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0.3,0.4,0.5")]
        sigma_list: String,
    },
    /// Capacity sweeps across antenna correlation levels (gas mode).
    SweepCorr {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0.3,0.4,0.5")]
        rho_list: String,
    },
    /// Capacity sweeps across eavesdropper array sizes, with outage CDFs.
    SweepEve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "16,18,20,22,24")]
        n_eve_list: String,
        /// SNR at which outage statistics are collected, in dB.
        #[arg(long, default_value_t = 10.0)]
        outage_snr: f64,
    },
    /// Outage CDF of the per-channel security capacity at one SNR.
    Outage {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 10.0)]
        snr_point: f64,
    },
    /// Run the Monte Carlo/quadrature and property self-checks.
    OracleCheck {
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Capacity(common) => {
            let cfg = common.merge()?;
            let record = run_capacity(&cfg)?;
            let name = common.name("capacity");
            persist_record(&common.out, &name, &record)?;
            println!(
                "wrote {}/{name}.csv and .json ({} rows, {:.1}s)",
                common.out.display(),
                record.rows.len(),
                record.wall_clock_secs
            );
        }
        Command::Scatter {
            common,
            n_samples,
            snr_point,
        } => {
            let cfg = common.merge()?;
            let data = run_scatter(&cfg, n_samples, snr_point)?;
            let name = common.name("scatter");
            std::fs::create_dir_all(&common.out)?;
            let mut file = std::fs::File::create(common.out.join(format!("{name}.csv")))?;
            write_scatter_csv(&mut file, &data)?;
            let stats = scatter_stats(&data);
            write_json(&common.out, &format!("{name}_stats"), &stats)?;
            println!(
                "wrote {}/{name}.csv ({} rows); stats: {stats:?}",
                common.out.display(),
                data.rows.len()
            );
        }
        Command::SweepCsit { common, sigma_list } => {
            let cfg = common.merge()?;
            let sigmas: Vec<f64> = parse_list(&sigma_list)?;
            let name = common.name("sweep_csit");
            for (sigma, record) in run_sweep_csit(&cfg, &sigmas)? {
                let file = format!("{name}_sigma{}", value_suffix(sigma));
                persist_record(&common.out, &file, &record)?;
                println!("wrote {}/{file}.csv and .json", common.out.display());
            }
        }
        Command::SweepCorr { common, rho_list } => {
            let cfg = common.merge()?;
            let rhos: Vec<f64> = parse_list(&rho_list)?;
            let name = common.name("sweep_corr");
            for (rho, record) in run_sweep_corr(&cfg, &rhos)? {
                let file = format!("{name}_rho{}", value_suffix(rho));
                persist_record(&common.out, &file, &record)?;
                println!("wrote {}/{file}.csv and .json", common.out.display());
            }
        }
        Command::SweepEve {
            common,
            n_eve_list,
            outage_snr,
        } => {
            let cfg = common.merge()?;
            let sizes: Vec<usize> = parse_list(&n_eve_list)?;
            let name = common.name("sweep_eve");
            for entry in run_sweep_eve(&cfg, &sizes, outage_snr)? {
                let file = format!("{name}_ne{}", entry.n_eve);
                persist_record(&common.out, &file, &entry.record)?;
                let mut outage_file = std::fs::File::create(
                    common.out.join(format!("{file}_outage.csv")),
                )?;
                gpsm_harness::output::write_outage_csv(&mut outage_file, &entry.outage_cdf)?;
                write_json(&common.out, &format!("{file}_outage"), &entry)?;
                println!(
                    "wrote {}/{file}.csv, .json and outage files",
                    common.out.display()
                );
            }
        }
        Command::Outage { common, snr_point } => {
            let cfg = common.merge()?;
            let record = run_outage(&cfg, snr_point)?;
            let name = common.name("outage");
            persist_outage(&common.out, &name, &record)?;
            println!("wrote {}/{name}.csv and .json", common.out.display());
        }
        Command::OracleCheck { out } => {
            let report = oracle::run_oracle_check()?;
            print!("{}", oracle::render_report(&report));
            if !report.all_pass() {
                write_json(&out, "oracle_failures", &report.failures())?;
                return Err(HarnessError::CheckFailure(format!(
                    "{} of {} checks failed (failures serialized to {}/oracle_failures.json)",
                    report.failures().len(),
                    report.checks.len(),
                    out.display()
                )));
            }
            println!("all {} checks passed", report.checks.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                HarnessError::CheckFailure(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
