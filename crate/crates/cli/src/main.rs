//! `spectral-lab`: construct spectra, verify them, estimate their density and
//! dimension, and sweep `(t, s)` grids.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spectral_lab::completeness::{default_grid, jp_check_points, verify_family, MAX_GRAM_WINDOW};
use spectral_lab::density::{
    beurling_dimension, sup_profile, upper_beurling_density, CountingProfile, DensityEstimate,
    DimensionEstimate,
};
use spectral_lab::report::{parse_window_csv, write_reports, write_window_csv};
use spectral_lab::sweep::{self, SweepConfig};
use spectral_lab::tolerances::{GRAM_WINDOW, Q_TERMS};
use spectral_lab::{
    BetaFamily, CenterPolicy, Error, RadiusSchedule, SelfAffineSystem, VerificationReport,
};

use config::ConfigFile;

const EXIT_VERIFICATION: u8 = 1;
const EXIT_PARAMETER: u8 = 2;
const EXIT_RANGE: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

const THREADS_ENV: &str = "SPECTRAL_LAB_THREADS";
const DEFAULT_WINDOW: u64 = 100;
const MIN_SWEEP_STEPS: usize = 8;

#[derive(Parser)]
#[command(
    name = "spectral-lab",
    version,
    about = "Spectra of the self-affine measure R=[[2,1],[0,2]], B={(0,0),(1,0)}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the spectrum window `n,beta` for |n| <= window.
    Construct(RunArgs),
    /// Orthogonality and completeness checks for a family or a points file.
    Verify(RunArgs),
    /// Dimension estimate (slope fit and bisection).
    Dimension(RunArgs),
    /// Upper r-density estimate.
    Density(RunArgs),
    /// Density-calibrated (t, s) grid.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// zero | linear | power-law | power-law-scaled | exponential | power-log | density-calibrated
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Index window |n| <= window (construct, Gram check).
    #[arg(long)]
    window: Option<u64>,
    /// Terms |n| <= N in the truncated completeness sum.
    #[arg(long = "q-terms")]
    q_terms: Option<usize>,
    #[arg(long = "h-min")]
    h_min: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// origin | random:M | lattice:W
    #[arg(long)]
    centers: Option<String>,
    /// Exponent of the density (defaults to the family's t).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | tsv
    #[arg(long)]
    format: Option<String>,
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the counting profile `h,count,center_x1,center_x2`.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Verify an explicit `n,beta` point list instead of a family.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated t values.
    #[arg(long = "t-grid")]
    t_grid: Option<String>,
    /// Comma-separated s values.
    #[arg(long = "s-grid")]
    s_grid: Option<String>,
    /// Directory for per-cell `log_h,log_count` files.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Write a line chart of all cells.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn param(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PARAMETER,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Range(_) => EXIT_RANGE,
            Error::DegenerateProfile(_) => EXIT_DEGENERATE,
            _ => EXIT_PARAMETER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

/// Flags merged over the optional config file.
struct Settings {
    args: RunArgs,
    file: ConfigFile,
}

impl Settings {
    fn load(args: RunArgs) -> Result<Self, Failure> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Failure::param(format!("cannot read config {}: {}", path.display(), e))
                })?;
                ConfigFile::parse(&text).map_err(Failure::param)?
            }
            None => ConfigFile::default(),
        };
        Ok(Settings { args, file })
    }

    fn pick<T: std::str::FromStr + Copy>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, Failure> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key).map_err(Failure::param),
        }
    }

    fn family_name(&self) -> Option<String> {
        self.args
            .family
            .clone()
            .or_else(|| self.file.get_str("family").map(str::to_string))
    }

    fn family(&self) -> Result<BetaFamily, Failure> {
        let name = self
            .family_name()
            .ok_or_else(|| Failure::param("--family is required"))?;
        let t = self.pick(self.args.t, "t")?;
        let s = self.pick(self.args.s, "s")?;
        let a = self.pick(self.args.a, "a")?;
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Failure::param(format!("family {} needs --{}", name, flag)))
        };
        let family = match name.as_str() {
            "zero" => BetaFamily::Zero,
            "linear" => BetaFamily::Linear,
            "power-law" => BetaFamily::power_law(need(t, "t")?)?,
            "power-law-scaled" => BetaFamily::power_law_scaled(need(t, "t")?, need(a, "a")?)?,
            "exponential" => BetaFamily::exponential(need(a, "a")?)?,
            "power-log" => BetaFamily::power_log(need(t, "t")?)?,
            "density-calibrated" => BetaFamily::density_calibrated(need(t, "t")?, need(s, "s")?)?,
            other => return Err(Failure::param(format!("unknown family '{}'", other))),
        };
        Ok(family)
    }

    fn window(&self, default: u64) -> Result<u64, Failure> {
        Ok(self.pick(self.args.window, "window")?.unwrap_or(default))
    }

    fn q_terms(&self) -> Result<usize, Failure> {
        let n = self.pick(self.args.q_terms, "N")?.unwrap_or(Q_TERMS);
        if n < 2 {
            return Err(Failure::param(format!("N = {} must be >= 2", n)));
        }
        Ok(n)
    }

    fn seed(&self) -> Result<u64, Failure> {
        Ok(self.pick(self.args.seed, "seed")?.unwrap_or(0))
    }

    fn schedule(&self, family: &BetaFamily) -> Result<RadiusSchedule, Failure> {
        let base = RadiusSchedule::default_for(family);
        let h_min = self.pick(self.args.h_min, "h_min")?.unwrap_or(base.h_min());
        let ratio = self.pick(self.args.ratio, "ratio")?.unwrap_or(base.ratio());
        let steps = self.pick(self.args.steps, "steps")?.unwrap_or(base.steps());
        Ok(RadiusSchedule::new(h_min, ratio, steps)?)
    }

    fn centers(&self, family: &BetaFamily) -> Result<CenterPolicy, Failure> {
        let seed = self.seed()?;
        let spec = match self
            .args
            .centers
            .clone()
            .or_else(|| self.file.get_str("centers").map(str::to_string))
        {
            None => return Ok(CenterPolicy::default_for(family, seed)),
            Some(spec) => spec,
        };
        let bad = || {
            Failure::param(format!(
                "--centers '{}': expected origin, random:M or lattice:W",
                spec
            ))
        };
        if spec == "origin" {
            return Ok(CenterPolicy::Origin);
        }
        let (kind, n) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "random" => Ok(CenterPolicy::Randomized {
                count: n.parse().map_err(|_| bad())?,
                seed,
            }),
            "lattice" => Ok(CenterPolicy::LatticeWindow {
                half_width: n.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }

    fn format(&self) -> Result<Format, Failure> {
        let name = self
            .args
            .format
            .clone()
            .or_else(|| self.file.get_str("format").map(str::to_string))
            .unwrap_or_else(|| "csv".to_string());
        match name.as_str() {
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            other => Err(Failure::param(format!("unknown format '{}'", other))),
        }
    }

    fn out_path(&self) -> Option<PathBuf> {
        self.args
            .out
            .clone()
            .or_else(|| self.file.get_str("out_path").map(PathBuf::from))
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        let text = self.format()?.convert(text);
        write_text(self.out_path().as_deref(), &text)
    }
}

#[derive(Clone, Copy)]
enum Format {
    Csv,
    Tsv,
}

impl Format {
    fn convert(self, csv: &str) -> String {
        match self {
            Format::Csv => csv.to_string(),
            Format::Tsv => {
                let mut out = String::with_capacity(csv.len());
                let mut quoted = false;
                for ch in csv.chars() {
                    match ch {
                        '"' => {
                            quoted = !quoted;
                            out.push(ch);
                        }
                        ',' if !quoted => out.push('\t'),
                        _ => out.push(ch),
                    }
                }
                out
            }
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::param(format!("cannot write {}: {}", p.display(), e))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::param(format!("cannot write output: {}", e))),
    }
}

fn reports_csv(reports: &[VerificationReport]) -> String {
    let mut buf = Vec::new();
    write_reports(&mut buf, reports).expect("writing to memory");
    String::from_utf8(buf).expect("reports are UTF-8")
}

fn verdict(reports: &[VerificationReport]) -> u8 {
    if reports.iter().all(|r| r.passed) {
        0
    } else {
        EXIT_VERIFICATION
    }
}

fn cmd_construct(settings: &Settings) -> Outcome {
    let family = settings.family()?;
    let window = settings.window(DEFAULT_WINDOW)?;
    let points = spectral_lab::spectrum_window(&family, window)?;
    let mut buf = Vec::new();
    write_window_csv(&mut buf, &points).expect("writing to memory");
    settings.emit(&String::from_utf8(buf).expect("CSV is UTF-8"))?;
    Ok(0)
}

fn cmd_verify(settings: &Settings) -> Outcome {
    let sys = SelfAffineSystem::standard();
    let grid = default_grid();
    let reports = match &settings.args.points {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::param(format!("cannot read {}: {}", path.display(), e)))?;
            let points = parse_window_csv(&text).map_err(Failure::param)?;
            if points.len() > (2 * MAX_GRAM_WINDOW + 1) as usize {
                return Err(Failure::param(format!(
                    "points file has {} rows; at most {} are checked",
                    points.len(),
                    2 * MAX_GRAM_WINDOW + 1
                )));
            }
            jp_check_points(&sys, &points, &grid)?
        }
        None => {
            let family = settings.family()?;
            let window = settings.window(GRAM_WINDOW)?;
            verify_family(&sys, &family, window, &grid, settings.q_terms()?)?
        }
    };
    settings.emit(&reports_csv(&reports))?;
    for r in reports.iter().filter(|r| !r.passed) {
        match r.colliding_pair {
            Some((p, q)) => eprintln!(
                "{} failed: ({}, {}) and ({}, {}) collide",
                r.check, p.x1, p.x2, q.x1, q.x2
            ),
            None => eprintln!("{} failed: {}", r.check, r.detail),
        }
    }
    Ok(verdict(&reports))
}

fn profile_csv(profile: &CountingProfile) -> String {
    let mut out = format!("{}\n", CountingProfile::CSV_HEADER);
    for row in profile.csv_rows() {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn write_profile(settings: &Settings, profile: &CountingProfile) -> Result<(), Failure> {
    if let Some(path) = &settings.args.profile {
        write_text(
            Some(path),
            &settings.format()?.convert(&profile_csv(profile)),
        )?;
    }
    Ok(())
}

fn cmd_dimension(settings: &Settings) -> Outcome {
    let family = settings.family()?;
    let sched = settings.schedule(&family)?;
    let centers = settings.centers(&family)?;
    let estimate = beurling_dimension(&family, &sched, &centers)?;
    if settings.args.profile.is_some() {
        write_profile(settings, &sup_profile(&family, &sched, &centers)?)?;
    }
    settings.emit(&format!(
        "{}\n{}\n",
        DimensionEstimate::CSV_HEADER,
        estimate.csv_row(&family)
    ))?;
    Ok(0)
}

fn cmd_density(settings: &Settings) -> Outcome {
    let family = settings.family()?;
    let r = match settings.pick(settings.args.r, "r")? {
        Some(r) => r,
        None => match family.t() {
            Some(t) if t > 0.0 => t,
            _ => return Err(Failure::param(format!("family {} needs --r", family))),
        },
    };
    if !(r > 0.0) {
        return Err(Failure::param(format!("r = {} must be > 0", r)));
    }
    let sched = settings.schedule(&family)?;
    let centers = settings.centers(&family)?;
    let estimate = upper_beurling_density(&family, r, &sched, &centers)?;
    if settings.args.profile.is_some() {
        write_profile(settings, &sup_profile(&family, &sched, &centers)?)?;
    }
    settings.emit(&format!(
        "{}\n{}\n",
        DensityEstimate::CSV_HEADER,
        estimate.csv_row(&family)
    ))?;
    Ok(0)
}

fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::param(format!("--{}: cannot parse '{}'", what, v.trim())))
        })
        .collect()
}

fn cmd_sweep(args: &SweepArgs) -> Outcome {
    let settings = Settings::load(args.run.clone())?;
    let mut config = SweepConfig::default();
    if let Some(g) = &args.t_grid {
        config.t_grid = parse_grid(g, "t-grid")?;
    }
    if let Some(g) = &args.s_grid {
        config.s_grid = parse_grid(g, "s-grid")?;
    }
    for &t in &config.t_grid {
        for &s in &config.s_grid {
            BetaFamily::density_calibrated(t, s)?;
        }
    }
    config.steps = settings
        .pick(settings.args.steps, "steps")?
        .unwrap_or(config.steps);
    config.ratio = settings
        .pick(settings.args.ratio, "ratio")?
        .unwrap_or(config.ratio);
    if config.steps < MIN_SWEEP_STEPS {
        return Err(Failure::param(format!(
            "--steps {} is too short for the dimension fit (need >= {})",
            config.steps, MIN_SWEEP_STEPS
        )));
    }
    if !(config.ratio > 1.0) {
        return Err(Failure::param(format!(
            "ratio = {} must be > 1",
            config.ratio
        )));
    }
    if let Some(h_min) = settings.pick(settings.args.h_min, "h_min")? {
        config.schedule = Some(RadiusSchedule::new(h_min, config.ratio, config.steps)?);
    }
    config.gram_window = settings.window(config.gram_window)?;
    if config.gram_window == 0 || config.gram_window > MAX_GRAM_WINDOW {
        return Err(Failure::param(format!(
            "Gram window {} must lie in 1..={}",
            config.gram_window, MAX_GRAM_WINDOW
        )));
    }
    config.q_terms = settings.q_terms()?;

    let cells = sweep::run_sweep(&config);
    settings.emit(&sweep::table_csv(&cells))?;
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::param(format!("cannot create {}: {}", dir.display(), e)))?;
        for cell in cells.iter().flatten() {
            let path = dir.join(format!("{}.csv", sweep::cell_stem(cell.t, cell.s)));
            write_text(Some(&path), &sweep::plot_data_csv(&cell.profile))?;
        }
    }
    if let Some(path) = &args.svg {
        write_text(Some(path), &sweep::render_svg(&cells))?;
    }

    let mut code = 0;
    for cell in &cells {
        match cell {
            Err((t, s, e)) => {
                eprintln!("cell t={} s={}: {}", t, s, e);
                if code == 0 || code == EXIT_VERIFICATION {
                    code = Failure::from(e.clone()).code;
                }
            }
            Ok(c) if !c.passed => {
                eprintln!(
                    "cell t={} s={} failed: dim_est={} density_est={} verified={}",
                    c.t, c.s, c.dimension.slope_fit, c.density.value, c.verified
                );
                if code == 0 {
                    code = EXIT_VERIFICATION;
                }
            }
            Ok(_) => {}
        }
    }
    Ok(code)
}

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| {
        Failure::param(format!(
            "{} = '{}' is not a thread count",
            THREADS_ENV, value
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::param(format!("cannot configure thread pool: {}", e)))
}

fn run(cli: Cli) -> Outcome {
    init_threads()?;
    match cli.command {
        Command::Construct(args) => cmd_construct(&Settings::load(args)?),
        Command::Verify(args) => cmd_verify(&Settings::load(args)?),
        Command::Dimension(args) => cmd_dimension(&Settings::load(args)?),
        Command::Density(args) => cmd_density(&Settings::load(args)?),
        Command::Sweep(args) => cmd_sweep(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARAMETER } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
