//! Completeness via `Q(xi) = sum_lambda |mu^(xi + lambda)|^2 == 1`.
//!
//! For this measure `|mu^(xi)|^2 = sinc^2(pi xi_1)`, so every summand depends
//! on `xi_1 + n` alone and `Q` is the same for every family. Truncated sums
//! come with an integral-comparison tail bound, making each verdict
//! self-certifying.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{closed_form_norm_sqr, Point2, SelfAffineSystem};
use crate::numeric::{fmt_g17, pairwise_sum, sin_pi};
use crate::report::VerificationReport;
use crate::spectra::{check_orthogonal_combinatorial, gram_matrix, spectrum_window, BetaFamily};

/// Radius around integer `xi_1` where the criterion is not evaluated.
pub const EXCLUDED_RADIUS: f64 = 1e-9;

/// Slack allowed above 1 for a finite orthogonal set (Bessel inequality).
pub const BESSEL_SLACK: f64 = 1e-12;

/// Largest Gram window accepted by the verification suites.
pub const MAX_GRAM_WINDOW: u64 = 512;

/// Truncated `Q` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QReport {
    pub xi: Point2,
    pub n_terms: usize,
    pub partial_sum: f64,
    /// Rigorous majorant of the omitted terms `|n| > n_terms`.
    pub tail_bound: f64,
    pub passed: bool,
}

impl QReport {
    pub const CSV_HEADER: &'static str = "xi1,xi2,N,partial_sum,tail_bound,verdict";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_g17(self.xi.x1),
            fmt_g17(self.xi.x2),
            self.n_terms,
            fmt_g17(self.partial_sum),
            fmt_g17(self.tail_bound),
            if self.passed { "pass" } else { "fail" }
        )
    }

    /// `1 - partial_sum`.
    pub fn deficit(&self) -> f64 {
        1.0 - self.partial_sum
    }
}

fn excluded(xi1: f64) -> Result<f64> {
    if !xi1.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "xi_1 = {} is not finite",
            xi1
        )));
    }
    let frac = (xi1 - xi1.round()).abs();
    if frac < EXCLUDED_RADIUS {
        return Err(Error::ExcludedPoint {
            xi1,
            radius: EXCLUDED_RADIUS,
        });
    }
    Ok(frac)
}

/// Bound on `sum_{|n| > big_n} 1 / (pi (n + xi_1))^2`.
///
/// Each omitted term satisfies `|n + xi_1| >= |n| - |xi_1|`; comparing the two
/// one-sided sums with `int u^-2` gives `(2/pi^2) / (N - 1 - frac - shift)`,
/// where `shift = max(0, |round(xi_1)| - 1)` covers frequencies outside `(-1.5, 1.5)`.
pub fn tail_bound(xi1: f64, big_n: usize) -> Result<f64> {
    let frac = excluded(xi1)?;
    let shift = (xi1.round().abs() - 1.0).max(0.0);
    let denom = big_n as f64 - 1.0 - frac - shift;
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "N = {} is too small for a tail bound at xi_1 = {}",
            big_n, xi1
        )));
    }
    Ok(2.0 / (PI * PI) / denom)
}

/// `sum_{|n| <= N} |mu^(xi + (n, beta(n)))|^2` with its tail bound and verdict.
pub fn q_lambda_truncated(
    sys: &SelfAffineSystem,
    family: &BetaFamily,
    xi: Point2,
    big_n: usize,
) -> Result<QReport> {
    if !sys.is_standard() {
        return Err(Error::UnsupportedSystem("the closed-form completeness sum"));
    }
    family.validate()?;
    if big_n < 2 {
        return Err(Error::InvalidParameter(format!(
            "N = {} must be >= 2",
            big_n
        )));
    }
    if !xi.x2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "xi_2 = {} is not finite",
            xi.x2
        )));
    }
    let tail = tail_bound(xi.x1, big_n)?;
    let n = big_n as i64;
    if !family.is_builtin() {
        for k in -n..=n {
            family.eval_saturating(k)?;
        }
    }
    let terms: Vec<f64> = (-n..=n)
        .map(|k| closed_form_norm_sqr(xi.x1 + k as f64))
        .collect();
    let partial_sum = pairwise_sum(&terms);
    let passed = (partial_sum + 0.5 * tail - 1.0).abs() <= tail;
    Ok(QReport {
        xi,
        n_terms: big_n,
        partial_sum,
        tail_bound: tail,
        passed,
    })
}

/// `|sum_{|n| <= N} (n + xi_1)^-2 - pi^2 / sin^2(pi xi_1)|`.
pub fn summation_identity_residual(xi1: f64, big_n: usize) -> Result<f64> {
    excluded(xi1)?;
    let n = big_n as i64;
    let terms: Vec<f64> = (-n..=n)
        .map(|k| {
            let u = xi1 + k as f64;
            1.0 / (u * u)
        })
        .collect();
    let s = sin_pi(xi1);
    Ok((pairwise_sum(&terms) - PI * PI / (s * s)).abs())
}

/// Deterministic 10x10 grid over `(0,1) x [-5,5]`: `xi_1 = (i + 1/2)/10 + 1/64`
/// avoids integers and small-denominator rationals, `xi_2` follows a
/// golden-ratio sequence.
pub fn default_grid() -> Vec<Point2> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut grid = Vec::with_capacity(100);
    for i in 0..10 {
        let xi1 = (i as f64 + 0.5) / 10.0 + 1.0 / 64.0;
        for j in 0..10 {
            let u = (0.5 + j as f64 * golden).fract();
            grid.push(Point2::new(xi1, -5.0 + 10.0 * u));
        }
    }
    grid
}

pub const DEFAULT_GRID_SPEC: &str =
    "10x10 grid xi1=(i+0.5)/10+1/64, xi2=-5+10*frac(0.5+j*(sqrt5-1)/2)";

/// `Q` reports for every grid point, in grid order.
pub fn q_reports(
    sys: &SelfAffineSystem,
    family: &BetaFamily,
    grid: &[Point2],
    big_n: usize,
) -> Result<Vec<QReport>> {
    grid.par_iter()
        .map(|&xi| q_lambda_truncated(sys, family, xi, big_n))
        .collect()
}

/// Summary of `Q` reports: passes iff every point passes. The worst deviation
/// is `max |1 - partial_sum|`, the tolerance the largest tail bound.
pub fn summarize_q(reports: &[QReport], grid_spec: &str) -> VerificationReport {
    let worst = reports
        .iter()
        .map(|r| r.deficit().abs())
        .fold(0.0, f64::max);
    let tol = reports.iter().map(|r| r.tail_bound).fold(0.0, f64::max);
    let failures = reports.iter().filter(|r| !r.passed).count();
    let n = reports.first().map_or(0, |r| r.n_terms);
    let detail = format!(
        "{} points, N={}, {} failing; {}",
        reports.len(),
        n,
        failures,
        grid_spec
    );
    if failures == 0 && !reports.is_empty() {
        VerificationReport::pass("completeness-q", worst, tol, detail)
    } else {
        VerificationReport::fail("completeness-q", worst, tol, detail)
    }
}

/// Runs the truncated criterion on every grid point.
pub fn jp_spectrum_check(
    sys: &SelfAffineSystem,
    family: &BetaFamily,
    grid: &[Point2],
    big_n: usize,
) -> Result<VerificationReport> {
    let reports = q_reports(sys, family, grid, big_n)?;
    Ok(summarize_q(
        &reports,
        &format!("grid of {} points", grid.len()),
    ))
}

/// Orthogonality (combinatorial and Gram on `|n| <= gram_window`) followed by
/// the completeness check. All reports are returned, failing or not.
pub fn verify_family(
    sys: &SelfAffineSystem,
    family: &BetaFamily,
    gram_window: u64,
    grid: &[Point2],
    big_n: usize,
) -> Result<Vec<VerificationReport>> {
    if gram_window == 0 || gram_window > MAX_GRAM_WINDOW {
        return Err(Error::InvalidParameter(format!(
            "Gram window {} must lie in 1..={}",
            gram_window, MAX_GRAM_WINDOW
        )));
    }
    let points = spectrum_window(family, gram_window)?;
    let mut reports = vec![check_orthogonal_combinatorial(&points)?];
    reports.push(gram_matrix(sys, &points)?.identity_report());
    let mut jp = jp_spectrum_check(sys, family, grid, big_n)?;
    if grid == default_grid().as_slice() {
        jp.detail = format!("{}; {}", jp.detail, DEFAULT_GRID_SPEC);
    }
    reports.push(jp);
    Ok(reports)
}

/// Verification of an explicit finite point list.
///
/// Checks distinct integer first coordinates, the Gram matrix, the Bessel
/// bound `Q <= 1`, and that the deficit `1 - Q` is covered by the tail bound
/// of the largest symmetric run `{-M, ..., M}` of first coordinates. Stops at
/// the first failing check.
pub fn jp_check_points(
    sys: &SelfAffineSystem,
    points: &[Point2],
    grid: &[Point2],
) -> Result<Vec<VerificationReport>> {
    if !sys.is_standard() {
        return Err(Error::UnsupportedSystem("the closed-form completeness sum"));
    }
    let combinatorial = check_orthogonal_combinatorial(points)?;
    if !combinatorial.passed {
        return Ok(vec![combinatorial]);
    }
    let mut reports = vec![combinatorial];
    let gram = gram_matrix(sys, points)?.identity_report();
    let gram_ok = gram.passed;
    reports.push(gram);
    if !gram_ok {
        return Ok(reports);
    }

    let firsts: std::collections::BTreeSet<i64> = points.iter().map(|p| p.x1 as i64).collect();
    let mut run = 0usize;
    while firsts.contains(&(run as i64 + 1)) && firsts.contains(&-(run as i64 + 1)) {
        run += 1;
    }
    let mut worst_excess = 0.0f64;
    let mut worst_deficit = 0.0f64;
    let mut max_tail = 0.0f64;
    for xi in grid {
        let terms: Vec<f64> = points
            .iter()
            .map(|p| closed_form_norm_sqr(xi.x1 + p.x1))
            .collect();
        let q = pairwise_sum(&terms);
        worst_excess = worst_excess.max(q - 1.0);
        worst_deficit = worst_deficit.max(1.0 - q);
        if run >= 2 && firsts.contains(&0) {
            max_tail = max_tail.max(tail_bound(xi.x1, run)?);
        } else {
            excluded(xi.x1)?;
        }
    }
    let bessel_detail = format!("{} points on {} frequencies", points.len(), grid.len());
    if worst_excess > BESSEL_SLACK {
        reports.push(VerificationReport::fail(
            "bessel-q",
            worst_excess,
            BESSEL_SLACK,
            bessel_detail,
        ));
        return Ok(reports);
    }
    reports.push(VerificationReport::pass(
        "bessel-q",
        worst_excess.max(0.0),
        BESSEL_SLACK,
        bessel_detail,
    ));

    let detail = format!("symmetric run |n| <= {}", run);
    if run >= 2 && firsts.contains(&0) && worst_deficit <= max_tail {
        reports.push(VerificationReport::pass(
            "completeness-window",
            worst_deficit,
            max_tail,
            detail,
        ));
    } else {
        reports.push(VerificationReport::fail(
            "completeness-window",
            worst_deficit,
            max_tail,
            detail,
        ));
    }
    Ok(reports)
}
