//! The `(t, s)` sweep: for each cell, build the density-calibrated spectrum,
//! estimate its dimension and `t`-density, verify it, and judge the cell.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::completeness::verify_family;
use crate::density::{
    counting_profile, density_from_profile, dimension_from_profile, CountingProfile,
    DensityEstimate, DimensionEstimate, RadiusSchedule, DEFAULT_WINDOW_FRACTION,
};
use crate::error::{Error, Result};
use crate::measure::{Point2, SelfAffineSystem};
use crate::numeric::fmt_g17;
use crate::spectra::BetaFamily;
use crate::tolerances::{DENSITY_REL, DIMENSION_ABS, GRAM_WINDOW, Q_TERMS};

/// Smallest `N(h)/2` wanted at the start of the fit window.
const MIN_HALF_COUNT: f64 = 1000.0;

/// Largest `N(h) / (2h)` wanted at the start of the fit window, so the `n^2`
/// term inside `n^2 + beta(n)^2 < h^2` is a small correction.
const MAX_HORIZONTAL_FRACTION: f64 = 0.15;

pub const DEFAULT_T_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const DEFAULT_S_GRID: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// Schedule whose fit window starts where the density-calibrated counts are
/// both large and dominated by the vertical coordinate.
///
/// With `beta(n) = (2n/s)^(1/t)` the origin count is about `s h^t`; the window
/// start is the smallest `h` with `s h^t / 2 >= 1000` and (for `t < 1`)
/// `(s/2) h^(t-1) <= 0.15`.
pub fn calibrated_schedule(t: f64, s: f64, steps: usize, ratio: f64) -> Result<RadiusSchedule> {
    BetaFamily::density_calibrated(t, s)?;
    if steps == 0 || !(ratio > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "schedule needs steps >= 1 and ratio > 1 (got {}, {})",
            steps, ratio
        )));
    }
    let mut ln_start = (2.0 * MIN_HALF_COUNT / s).ln() / t;
    if t < 1.0 {
        ln_start = ln_start.max((s / (2.0 * MAX_HORIZONTAL_FRACTION)).ln() / (1.0 - t));
    }
    let below = steps - ((steps as f64) * DEFAULT_WINDOW_FRACTION).ceil() as usize;
    let ln_h_min = (ln_start - below as f64 * ratio.ln()).max(100f64.ln());
    RadiusSchedule::new(ln_h_min.exp(), ratio, steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub steps: usize,
    pub ratio: f64,
    /// Fixed schedule for every cell instead of the calibrated one.
    pub schedule: Option<RadiusSchedule>,
    pub gram_window: u64,
    pub q_terms: usize,
    pub grid: Vec<Point2>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_grid: DEFAULT_T_GRID.to_vec(),
            s_grid: DEFAULT_S_GRID.to_vec(),
            steps: 20,
            ratio: 2.0,
            schedule: None,
            gram_window: GRAM_WINDOW,
            q_terms: Q_TERMS,
            grid: crate::completeness::default_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub t: f64,
    pub s: f64,
    pub schedule: RadiusSchedule,
    pub profile: CountingProfile,
    pub dimension: DimensionEstimate,
    pub density: DensityEstimate,
    pub q_worst_dev: f64,
    pub verified: bool,
    pub passed: bool,
}

impl SweepCell {
    pub fn dimension_error(&self) -> f64 {
        (self.dimension.slope_fit - self.t).abs()
    }

    pub fn density_relative_error(&self) -> f64 {
        (self.density.value - self.s).abs() / self.s
    }
}

/// Outcome of one cell; errors keep their place in the table.
pub type CellResult = std::result::Result<SweepCell, (f64, f64, Error)>;

pub fn run_cell(t: f64, s: f64, config: &SweepConfig) -> Result<SweepCell> {
    let family = BetaFamily::density_calibrated(t, s)?;
    let schedule = match config.schedule {
        Some(sched) => sched,
        None => calibrated_schedule(t, s, config.steps, config.ratio)?,
    };
    let profile = counting_profile(&family, Point2::ORIGIN, &schedule)?;
    let dimension = dimension_from_profile(&profile)?;
    let density = density_from_profile(&profile, t, DEFAULT_WINDOW_FRACTION);
    let sys = SelfAffineSystem::standard();
    let reports = verify_family(
        &sys,
        &family,
        config.gram_window,
        &config.grid,
        config.q_terms,
    )?;
    let verified = reports.iter().all(|r| r.passed);
    let q_worst_dev = reports
        .iter()
        .find(|r| r.check == "completeness-q")
        .map_or(f64::NAN, |r| r.worst_deviation);
    let mut cell = SweepCell {
        t,
        s,
        schedule,
        profile,
        dimension,
        density,
        q_worst_dev,
        verified,
        passed: false,
    };
    cell.passed = verified
        && cell.dimension_error() <= DIMENSION_ABS
        && cell.density_relative_error() <= DENSITY_REL;
    Ok(cell)
}

/// All cells in `(t, s)` order, evaluated in parallel.
pub fn run_sweep(config: &SweepConfig) -> Vec<CellResult> {
    let pairs: Vec<(f64, f64)> = config
        .t_grid
        .iter()
        .flat_map(|&t| config.s_grid.iter().map(move |&s| (t, s)))
        .collect();
    pairs
        .par_iter()
        .map(|&(t, s)| run_cell(t, s, config).map_err(|e| (t, s, e)))
        .collect()
}

pub const TABLE_HEADER: &str = "t,s,dim_est,density_est,q_worst_dev,verdict";

pub fn table_csv(cells: &[CellResult]) -> String {
    let mut out = String::new();
    writeln!(out, "{}", TABLE_HEADER).unwrap();
    for cell in cells {
        match cell {
            Ok(c) => writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_g17(c.t),
                fmt_g17(c.s),
                fmt_g17(c.dimension.slope_fit),
                fmt_g17(c.density.value),
                fmt_g17(c.q_worst_dev),
                if c.passed { "pass" } else { "fail" }
            ),
            Err((t, s, _)) => writeln!(out, "{},{},nan,nan,nan,error", fmt_g17(*t), fmt_g17(*s)),
        }
        .unwrap();
    }
    out
}

pub const PLOT_HEADER: &str = "log_h,log_count";

/// `ln h, ln N(h)` columns for one cell.
pub fn plot_data_csv(profile: &CountingProfile) -> String {
    let mut out = String::new();
    writeln!(out, "{}", PLOT_HEADER).unwrap();
    for s in &profile.samples {
        writeln!(
            out,
            "{},{}",
            fmt_g17(s.ln_h),
            fmt_g17((s.count as f64).ln())
        )
        .unwrap();
    }
    out
}

/// File stem for a cell's plot data, e.g. `cell_t0.5_s2`.
pub fn cell_stem(t: f64, s: f64) -> String {
    format!("cell_t{}_s{}", t, s)
}

/// Self-contained SVG of `ln N(h) / ln h` curves, one polyline per cell.
pub fn render_svg(cells: &[CellResult]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let ok: Vec<&SweepCell> = cells.iter().filter_map(|c| c.as_ref().ok()).collect();
    let pts = ok.iter().flat_map(|c| {
        c.profile
            .samples
            .iter()
            .map(|s| (s.ln_h, (s.count as f64).ln()))
    });
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<path d="M{p} {q} H{r} M{p} {q} V{PAD}" stroke="black" fill="none"/>"#,
        p = PAD,
        q = H - PAD,
        r = W - PAD
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12">ln h</text>"#,
        W / 2.0,
        H - 10.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="4" y="{}" font-size="12">ln N</text>"#,
        PAD - 10.0
    )
    .unwrap();
    for (i, c) in ok.iter().enumerate() {
        let hue = (i * 360 / ok.len().max(1)) % 360;
        let coords: Vec<String> = c
            .profile
            .samples
            .iter()
            .map(|s| format!("{:.2},{:.2}", sx(s.ln_h), sy((s.count as f64).ln())))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" stroke="hsl({},70%,40%)" fill="none"><title>t={} s={}</title></polyline>"#,
            coords.join(" "),
            hue,
            c.t,
            c.s
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Density of `PowerLog{t}` at `r = t` along a schedule, against the bound
/// `2 / (ln h_max)^t + slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLogTrend {
    pub t: f64,
    pub values: Vec<f64>,
    pub decreasing: bool,
    pub final_value: f64,
    pub bound: f64,
}

impl PowerLogTrend {
    pub fn passed(&self) -> bool {
        self.decreasing && self.final_value <= self.bound
    }
}

pub fn power_log_trend(t: f64, sched: &RadiusSchedule, slack: f64) -> Result<PowerLogTrend> {
    let family = BetaFamily::power_log(t)?;
    let values = crate::density::density_curve(&family, t, sched)?;
    let decreasing = values.windows(2).all(|w| w[1] <= w[0]);
    let final_value = *values.last().expect("schedule has at least one step");
    Ok(PowerLogTrend {
        t,
        values,
        decreasing,
        final_value,
        bound: 2.0 / sched.h_max().ln().powf(t) + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibrated_schedule_window_start() {
        let sched = calibrated_schedule(0.5, 3.0, 20, 2.0).unwrap();
        let start = sched.radius(sched.window_start(DEFAULT_WINDOW_FRACTION));
        // s h^t / 2 >= 1000 and (s/2) h^(t-1) <= 0.15
        assert!(3.0 * start.sqrt() / 2.0 >= 1000.0 * (1.0 - 1e-12));
        assert!(1.5 / start.sqrt() <= 0.15);
        assert!(calibrated_schedule(1.0, 5.0, 20, 2.0).unwrap().h_min() >= 100.0);
        assert!(calibrated_schedule(0.0, 1.0, 20, 2.0).is_err());
    }

    #[test]
    fn single_cell_linear_reduction() {
        let config = SweepConfig {
            t_grid: vec![1.0],
            s_grid: vec![2.0],
            ..SweepConfig::default()
        };
        let cells = run_sweep(&config);
        let cell = cells[0].as_ref().unwrap();
        assert!((cell.dimension.slope_fit - 1.0).abs() <= 0.02);
        // beta(n) = n here: N(h) = 2 floor(h / sqrt 2) + 1 up to boundary ties
        assert!(
            (cell.density.value - 2f64.sqrt()).abs() <= 0.01,
            "{}",
            cell.density.value
        );
        assert!(cell.verified);
    }

    #[test]
    fn table_and_plot_headers() {
        let config = SweepConfig {
            t_grid: vec![0.5],
            s_grid: vec![3.0],
            q_terms: 100,
            ..SweepConfig::default()
        };
        let cells = run_sweep(&config);
        let table = table_csv(&cells);
        assert!(table.starts_with("t,s,dim_est,density_est,q_worst_dev,verdict\n0.5,3,"));
        let plot = plot_data_csv(&cells[0].as_ref().unwrap().profile);
        assert_eq!(plot.lines().count(), 21);
        let svg = render_svg(&cells);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
