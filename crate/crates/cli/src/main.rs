use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rsaccr_core::curves::{sample_usd_curve, Curve, MarketData};
use rsaccr_core::gmm::{Grid, ModelChoice};
use rsaccr_core::report::{
    builtin_scenario, compute_report, portfolio_rows, DiscountingChoice, Methods, Report,
    ReportSettings, SCENARIO_NAMES,
};
use rsaccr_core::rsaccr::{contributions_csv, portfolio_contributions, DecompositionSettings};
use rsaccr_core::trades::parse_portfolio;
use rsaccr_core::Error;

#[derive(Parser)]
#[command(
    name = "rsaccr",
    version,
    about = "SA-CCR, RSA-CCR and Monte Carlo add-on comparison"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a portfolio file, one row per trade plus the netting set.
    Run {
        #[arg(long)]
        portfolio: PathBuf,
        #[command(flatten)]
        opts: Options,
        /// Write per-cashflow RSA-CCR contributions (market discounting) as CSV.
        #[arg(long)]
        contributions: Option<PathBuf>,
        /// Write the netting-set EPE profile as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Evaluate a builtin scenario (`zero_addon:T=<years>` sets the package maturity).
    Scenario {
        name: Option<String>,
        /// List the builtin scenario names.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Pretty,
    Csv,
    Json,
}

#[derive(Args)]
struct Options {
    /// Curve directory, `FLAT0`, `FLAT:<rate>`, or `SAMPLE` for the builtin USD curve.
    #[arg(long, default_value = "FLAT0")]
    curves: String,
    /// Comma-separated subset of saccr,rsaccr,mc.
    #[arg(long, default_value = "saccr,rsaccr,mc")]
    method: Methods,
    /// market, none or both.
    #[arg(long, default_value = "both")]
    discounting: DiscountingChoice,
    #[arg(long)]
    stochastic_basis: bool,
    #[arg(long)]
    include_fx: bool,
    #[arg(long, default_value = "USD")]
    domestic_ccy: String,
    #[arg(long, default_value_t = 20_000)]
    mc_paths: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// hw1f or gmm3f.
    #[arg(long, default_value = "gmm3f")]
    model: ModelChoice,
    /// weekly or daily.
    #[arg(long, default_value = "weekly")]
    grid: Grid,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sf_ir: Option<f64>,
    #[arg(long)]
    mf_floor_days: Option<u32>,
    #[arg(long)]
    multiplier_floor: Option<f64>,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

impl Options {
    fn market(&self) -> Result<MarketData, Error> {
        match self.curves.as_str() {
            "SAMPLE" => Ok(MarketData::single_curve(sample_usd_curve())),
            flat if flat.starts_with("FLAT:") => {
                let r: f64 = flat[5..]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad flat rate in '{flat}'")))?;
                Ok(MarketData::single_curve(Curve::flat(r)))
            }
            dir => MarketData::load(Path::new(dir)),
        }
    }

    fn settings(&self) -> Result<ReportSettings, Error> {
        let mut s = ReportSettings {
            methods: self.method,
            discounting: self.discounting,
            decomposition: DecompositionSettings {
                stochastic_basis: self.stochastic_basis,
                include_fx: self.include_fx,
                domestic_ccy: self.domestic_ccy.clone(),
                ..Default::default()
            },
            ..Default::default()
        };
        let cfg = &mut s.supervisory;
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.sf_ir {
            cfg.sf_ir = v;
            cfg.sf_basis = 0.5 * v;
        }
        if let Some(v) = self.mf_floor_days {
            cfg.mf_floor_business_days = v;
        }
        if let Some(v) = self.multiplier_floor {
            cfg.multiplier_floor = v;
        }
        cfg.validate()?;
        s.mc = rsaccr_core::gmm::McSettings {
            model: self.model,
            paths: self.mc_paths,
            seed: self.seed,
            grid: self.grid,
            ..rsaccr_core::gmm::McSettings::supervisory(cfg)
        };
        if s.methods.mc && s.mc.paths == 0 {
            return Err(Error::Config("--mc-paths must be positive".into()));
        }
        Ok(s)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or_else(|| {
            match Path::new(&self.out).extension().and_then(|e| e.to_str()) {
                Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                _ => Format::Pretty,
            }
        })
    }

    fn emit(&self, report: &Report) -> Result<(), Error> {
        let text = match self.format() {
            Format::Pretty => report.to_pretty(),
            Format::Csv => report.to_csv()?,
            Format::Json => report.to_json()?,
        };
        write_out(&self.out, &text)
    }
}

fn write_out(target: &str, text: &str) -> Result<(), Error> {
    if target == "-" {
        std::io::stdout().lock().write_all(text.as_bytes())?;
    } else {
        fs::write(target, text)?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            portfolio,
            opts,
            contributions,
            profile,
        } => {
            let text = fs::read_to_string(&portfolio)
                .map_err(|e| Error::Data(format!("cannot read {}: {e}", portfolio.display())))?;
            let trades = parse_portfolio(&text)?;
            let market = opts.market()?;
            let settings = opts.settings()?;
            let name = portfolio.display().to_string();
            let (report, profiles) =
                compute_report(&name, &portfolio_rows(&trades), &market, &settings)?;
            opts.emit(&report)?;
            if let Some(path) = contributions {
                let tagged = portfolio_contributions(
                    &trades,
                    &market,
                    &settings.decomposition,
                    &settings.supervisory,
                )?;
                fs::write(path, contributions_csv(&tagged))?;
            }
            if let Some(path) = profile {
                let p = profiles
                    .last()
                    .ok_or_else(|| Error::Config("--profile needs the mc method".into()))?;
                fs::write(path, p.to_csv())?;
            }
            Ok(())
        }
        Command::Scenario { name, list, opts } => {
            if list {
                return write_out(&opts.out, &(SCENARIO_NAMES.join("\n") + "\n"));
            }
            let name =
                name.ok_or_else(|| Error::Config("scenario name required (see --list)".into()))?;
            let market = opts.market()?;
            let settings = opts.settings()?;
            let scenario = builtin_scenario(&name, &market)?;
            let (report, _) = compute_report(&scenario.name, &scenario.rows, &market, &settings)?;
            opts.emit(&report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rsaccr: {e}");
            match e {
                Error::Unsupported(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
