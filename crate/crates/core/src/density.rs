//! Exact counting of spectrum points in open balls, and the density and
//! dimension estimators built on top of it.
//!
//! Counting never enumerates the whole ball for built-in families: at the
//! origin `n^2 + beta(n)^2` is monotone in `|n|`, so a binary search finds the
//! last index inside; for other centres a branch-and-bound over index
//! intervals uses the fact that every built-in `beta` is nondecreasing, so the
//! points with indices in `[u, v]` lie in the box `[u, v] x [beta(u), beta(v)]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{Point2, SelfAffineSystem};
use crate::numeric::least_squares_slope;
use crate::spectra::{BetaFamily, INDEX_LIMIT};

/// Indices re-examined on each side of a binary-search boundary.
const BOUNDARY_BAND: i64 = 2;

/// Largest index range a `Custom` beta is enumerated over.
const CUSTOM_ENUMERATION_LIMIT: i64 = 100_000_000;

/// Minimum schedule length accepted by the dimension estimators.
pub const MIN_DIMENSION_STEPS: usize = 8;

/// Fraction of the schedule (largest radii) used as the limsup proxy.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;

/// Density level at which the bisection estimate locates the transition.
pub const BISECTION_THRESHOLD: f64 = 1.0;
pub const BISECTION_ITERATIONS: usize = 20;

/// Geometric radii `h_k = h_min * ratio^k`, `k = 0..steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusSchedule {
    h_min: f64,
    ratio: f64,
    steps: usize,
}

impl Default for RadiusSchedule {
    /// `h_min = 100`, `ratio = 2`, 20 steps (`h_max ~ 5.2e7`).
    fn default() -> Self {
        RadiusSchedule {
            h_min: 100.0,
            ratio: 2.0,
            steps: 20,
        }
    }
}

impl RadiusSchedule {
    pub fn new(h_min: f64, ratio: f64, steps: usize) -> Result<Self> {
        if !(h_min > 1.0) || !h_min.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "h_min = {} must be > 1",
                h_min
            )));
        }
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ratio = {} must be > 1",
                ratio
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter(
                "schedule needs at least one step".into(),
            ));
        }
        let sched = RadiusSchedule {
            h_min,
            ratio,
            steps,
        };
        if !sched.radius(steps - 1).is_finite() {
            return Err(Error::Range(format!(
                "h_max = {} * {}^{} is not representable",
                h_min,
                ratio,
                steps - 1
            )));
        }
        Ok(sched)
    }

    /// Schedule given by base-2 logarithms: `h_k = 2^(log2_h_min + k log2_ratio)`.
    pub fn log2(log2_h_min: f64, log2_ratio: f64, steps: usize) -> Result<Self> {
        Self::new(log2_h_min.exp2(), log2_ratio.exp2(), steps)
    }

    /// `h` from `2^10` to `2^200` in 20 steps: exponential families need
    /// astronomically large radii before `log N / log h` flattens out.
    pub fn exponential_default() -> Self {
        RadiusSchedule {
            h_min: 1024.0,
            ratio: 1024.0,
            steps: 20,
        }
    }

    pub fn default_for(family: &BetaFamily) -> Self {
        match family {
            BetaFamily::Exponential { .. } => Self::exponential_default(),
            _ => Self::default(),
        }
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn radius(&self, k: usize) -> f64 {
        self.h_min * self.ratio.powi(k as i32)
    }

    pub fn ln_radius(&self, k: usize) -> f64 {
        self.h_min.ln() + k as f64 * self.ratio.ln()
    }

    pub fn h_max(&self) -> f64 {
        self.radius(self.steps - 1)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.radius(k)).collect()
    }

    /// First index of the top `fraction` of the schedule.
    pub fn window_start(&self, fraction: f64) -> usize {
        let kept = ((self.steps as f64) * fraction).ceil() as usize;
        self.steps - kept.clamp(1, self.steps)
    }
}

/// How the supremum over ball centres is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterPolicy {
    /// Only the origin.
    Origin,
    /// The origin plus `count` seeded random centres near the densest part of
    /// the spectrum: half uniform in the disc `B(0, h)`, half jittered
    /// spectrum points with indices inside `B(0, h)`.
    Randomized { count: usize, seed: u64 },
    /// Integer lattice points `(i, j)`, `|i|, |j| <= half_width`.
    LatticeWindow { half_width: u32 },
}

impl CenterPolicy {
    pub const DEFAULT_RANDOM_CENTERS: usize = 100;

    /// Origin-only for built-in families, randomized otherwise.
    pub fn default_for(family: &BetaFamily, seed: u64) -> Self {
        if family.is_builtin() {
            CenterPolicy::Origin
        } else {
            CenterPolicy::Randomized {
                count: Self::DEFAULT_RANDOM_CENTERS,
                seed,
            }
        }
    }
}

/// The candidate centres for radius `h`; the origin always comes first.
pub fn centers_for(policy: &CenterPolicy, family: &BetaFamily, h: f64) -> Result<Vec<Point2>> {
    let mut centers = vec![Point2::ORIGIN];
    match *policy {
        CenterPolicy::Origin => {}
        CenterPolicy::Randomized { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h.to_bits());
            let reach = if family.is_builtin() {
                ((count_in_ball(family, Point2::ORIGIN, h)? - 1) / 2) as i64
            } else {
                (h.ceil() as i64).min(CUSTOM_ENUMERATION_LIMIT / 2)
            };
            for i in 0..count {
                let c = if i % 2 == 0 {
                    let rho = h * rng.gen::<f64>().sqrt();
                    let theta = std::f64::consts::TAU * rng.gen::<f64>();
                    Point2::new(rho * theta.cos(), rho * theta.sin())
                } else {
                    let n = rng.gen_range(-reach..=reach);
                    let base = Point2::new(n as f64, family.eval_saturating(n)?);
                    base + Point2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
                };
                if c.is_finite() {
                    centers.push(c);
                }
            }
        }
        CenterPolicy::LatticeWindow { half_width } => {
            let w = half_width as i64;
            for i in -w..=w {
                for j in -w..=w {
                    if i != 0 || j != 0 {
                        centers.push(Point2::new(i as f64, j as f64));
                    }
                }
            }
        }
    }
    Ok(centers)
}

/// Strict open-ball test on a displacement. Squares are compared when
/// representable, otherwise `hypot` avoids overflow for huge radii.
#[inline]
fn inside(dx: f64, dy: f64, h: f64) -> bool {
    let d2 = dx * dx + dy * dy;
    let h2 = h * h;
    if d2.is_finite() && h2.is_finite() {
        d2 < h2
    } else {
        dx.hypot(dy) < h
    }
}

#[inline]
fn point_inside(family: &BetaFamily, n: i64, center: Point2, h: f64) -> Result<bool> {
    let beta = family.eval_saturating(n)?;
    Ok(inside(n as f64 - center.x1, beta - center.x2, h))
}

fn check_ball(center: Point2, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius h = {} must be finite and > 0",
            h
        )));
    }
    if !center.is_finite() {
        return Err(Error::InvalidParameter("ball centre must be finite".into()));
    }
    Ok(())
}

/// `#(Lambda_beta ∩ B(center, h))` for the open ball, exactly.
pub fn count_in_ball(family: &BetaFamily, center: Point2, h: f64) -> Result<u128> {
    family.validate()?;
    check_ball(center, h)?;
    if !family.is_builtin() {
        return count_by_enumeration(family, center, h);
    }
    if center == Point2::ORIGIN {
        let right = count_origin_side(family, h, 1)?;
        let left = count_origin_side(family, h, -1)?;
        return Ok(1 + right + left);
    }
    count_monotone(family, center, h)
}

/// Number of `m >= 1` with `(sign * m, beta(sign * m))` in `B(0, h)`.
fn count_origin_side(family: &BetaFamily, h: f64, sign: i64) -> Result<u128> {
    // |n| >= h is outside whatever beta is
    let hi = if h >= INDEX_LIMIT as f64 {
        INDEX_LIMIT
    } else {
        h.ceil() as i64
    };
    let test = |m: i64| point_inside(family, sign * m, Point2::ORIGIN, h);
    if test(hi)? {
        return Err(Error::Range(format!(
            "ball of radius {} reaches index limit 2^53 for {}",
            h, family
        )));
    }
    // invariant: test(lo) holds (lo = 0 is the origin), test(hi) fails
    let (mut lo, mut hi) = (0i64, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if test(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let band_start = (lo - BOUNDARY_BAND + 1).max(1);
    let mut count = (band_start - 1) as u128;
    for m in band_start..=(lo + BOUNDARY_BAND) {
        if test(m)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Integer indices with `|n - c1| < h`, clipped to the index limit.
fn index_range(center: Point2, h: f64) -> (i64, i64, bool) {
    let limit = INDEX_LIMIT as f64;
    let lo = (center.x1 - h).floor() + 1.0;
    let hi = (center.x1 + h).ceil() - 1.0;
    let clipped = lo < -limit || hi > limit;
    (lo.max(-limit) as i64, hi.min(limit) as i64, clipped)
}

fn count_by_enumeration(family: &BetaFamily, center: Point2, h: f64) -> Result<u128> {
    let (lo, hi, clipped) = index_range(center, h);
    if clipped || hi - lo > CUSTOM_ENUMERATION_LIMIT {
        return Err(Error::Range(format!(
            "custom beta would be enumerated over more than {} indices",
            CUSTOM_ENUMERATION_LIMIT
        )));
    }
    let mut count = 0u128;
    for n in lo..=hi {
        if point_inside(family, n, center, h)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Counting for nondecreasing beta and an arbitrary centre.
fn count_monotone(family: &BetaFamily, center: Point2, h: f64) -> Result<u128> {
    let (mut lo, mut hi, clipped) = index_range(center, h);
    let beta = |n: i64| family.eval_saturating(n);
    // shrink to indices with beta(n) in (c2 - h, c2 + h)
    let y_lo = center.x2 - h;
    let y_hi = center.x2 + h;
    if lo > hi || beta(hi)? <= y_lo || beta(lo)? >= y_hi {
        return Ok(0);
    }
    if beta(lo)? <= y_lo {
        // first index with beta > y_lo
        let (mut a, mut b) = (lo, hi);
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            if beta(mid)? > y_lo {
                b = mid;
            } else {
                a = mid;
            }
        }
        lo = b;
    }
    if beta(hi)? >= y_hi {
        // last index with beta < y_hi
        let (mut a, mut b) = (lo, hi);
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            if beta(mid)? < y_hi {
                a = mid;
            } else {
                b = mid;
            }
        }
        hi = a;
    }
    if clipped && (lo == -INDEX_LIMIT || hi == INDEX_LIMIT) {
        return Err(Error::Range(format!(
            "ball of radius {} reaches index limit 2^53 for {}",
            h, family
        )));
    }
    if lo > hi {
        return Ok(0);
    }

    let mut total = 0u128;
    let mut stack = vec![(lo, hi, beta(lo)?, beta(hi)?)];
    while let Some((u, v, bu, bv)) = stack.pop() {
        let (xu, xv) = (u as f64 - center.x1, v as f64 - center.x1);
        let (yu, yv) = (bu - center.x2, bv - center.x2);
        let dx_min = xu.max(-xv).max(0.0);
        let dy_min = yu.max(-yv).max(0.0);
        if !inside(dx_min, dy_min, h) {
            continue;
        }
        let dx_max = xu.abs().max(xv.abs());
        let dy_max = yu.abs().max(yv.abs());
        if inside(dx_max, dy_max, h) {
            total += (v - u + 1) as u128;
            continue;
        }
        if u == v {
            continue;
        }
        let mid = u + (v - u) / 2;
        let (bm, bm1) = (beta(mid)?, beta(mid + 1)?);
        stack.push((mid + 1, v, bm1, bv));
        stack.push((u, mid, bu, bm));
    }
    Ok(total)
}

/// Definition-level oracle: enumerate `|n| <= n_cap` and test each point.
///
/// The cap must provably cover the ball: either `|n - c1| >= h` beyond it, or
/// (for built-in families) the point just past the cap is outside and moving
/// away from the centre in both coordinates.
pub fn brute_force_count(family: &BetaFamily, center: Point2, h: f64, n_cap: u64) -> Result<u128> {
    family.validate()?;
    check_ball(center, h)?;
    if n_cap >= INDEX_LIMIT as u64 {
        return Err(Error::Range(format!(
            "n_cap = {} exceeds index limit",
            n_cap
        )));
    }
    let edge = n_cap as i64 + 1;
    let right_ok = (edge as f64 - center.x1 >= h)
        || (family.is_builtin()
            && edge as f64 >= center.x1
            && family.eval_saturating(edge)? >= center.x2
            && !point_inside(family, edge, center, h)?);
    let left_ok = (edge as f64 + center.x1 >= h)
        || (family.is_builtin()
            && -(edge as f64) <= center.x1
            && family.eval_saturating(-edge)? <= center.x2
            && !point_inside(family, -edge, center, h)?);
    if !(right_ok && left_ok) {
        return Err(Error::OracleIncomplete(format!(
            "n_cap = {} does not cover B(({}, {}), {}) for {}",
            n_cap, center.x1, center.x2, h, family
        )));
    }
    let mut count = 0u128;
    for n in -(n_cap as i64)..=(n_cap as i64) {
        if point_inside(family, n, center, h)? {
            count += 1;
        }
    }
    Ok(count)
}

/// One row of a counting profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub h: f64,
    pub ln_h: f64,
    pub count: u128,
    /// Centre that realised `count`.
    pub center: Point2,
}

/// Counts along a radius schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingProfile {
    pub samples: Vec<ProfileSample>,
}

impl CountingProfile {
    pub const CSV_HEADER: &'static str = "h,count,center_x1,center_x2";

    pub fn csv_rows(&self) -> impl Iterator<Item = String> + '_ {
        use crate::numeric::fmt_g17;
        self.samples.iter().map(|s| {
            format!(
                "{},{},{},{}",
                fmt_g17(s.h),
                s.count,
                fmt_g17(s.center.x1),
                fmt_g17(s.center.x2)
            )
        })
    }
}

/// Counts at a single fixed centre.
pub fn counting_profile(
    family: &BetaFamily,
    center: Point2,
    sched: &RadiusSchedule,
) -> Result<CountingProfile> {
    let samples = (0..sched.steps())
        .into_par_iter()
        .map(|k| {
            let h = sched.radius(k);
            Ok(ProfileSample {
                h,
                ln_h: sched.ln_radius(k),
                count: count_in_ball(family, center, h)?,
                center,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountingProfile { samples })
}

/// For each radius, the largest count over the centres of `policy`.
pub fn sup_profile(
    family: &BetaFamily,
    sched: &RadiusSchedule,
    policy: &CenterPolicy,
) -> Result<CountingProfile> {
    let samples = (0..sched.steps())
        .into_par_iter()
        .map(|k| {
            let h = sched.radius(k);
            let mut best = (0u128, Point2::ORIGIN);
            for c in centers_for(policy, family, h)? {
                let n = count_in_ball(family, c, h)?;
                if n > best.0 {
                    best = (n, c);
                }
            }
            Ok(ProfileSample {
                h,
                ln_h: sched.ln_radius(k),
                count: best.0,
                center: best.1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountingProfile { samples })
}

/// limsup proxy for `#(Lambda ∩ B(x, h)) / h^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub r: f64,
    pub value: f64,
    pub window_fraction: f64,
}

impl DensityEstimate {
    pub const CSV_HEADER: &'static str = "family,r,value,window_fraction";

    pub fn csv_row(&self, family: &BetaFamily) -> String {
        use crate::numeric::fmt_g17;
        format!(
            "{},{},{},{}",
            family,
            fmt_g17(self.r),
            fmt_g17(self.value),
            fmt_g17(self.window_fraction)
        )
    }
}

fn density_over(profile: &CountingProfile, r: f64, start: usize) -> f64 {
    profile.samples[start..]
        .iter()
        .map(|s| s.count as f64 * (-r * s.ln_h).exp())
        .fold(0.0, f64::max)
}

/// Upper `r`-Beurling density: max over the top half of the schedule of the
/// supremum over searched centres of `count / h^r`.
pub fn upper_beurling_density(
    family: &BetaFamily,
    r: f64,
    sched: &RadiusSchedule,
    centers: &CenterPolicy,
) -> Result<DensityEstimate> {
    upper_beurling_density_with_fraction(family, r, sched, centers, DEFAULT_WINDOW_FRACTION)
}

pub fn upper_beurling_density_with_fraction(
    family: &BetaFamily,
    r: f64,
    sched: &RadiusSchedule,
    centers: &CenterPolicy,
    window_fraction: f64,
) -> Result<DensityEstimate> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("r = {} must be >= 0", r)));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fraction {} must lie in (0, 1]",
            window_fraction
        )));
    }
    let profile = sup_profile(family, sched, centers)?;
    Ok(DensityEstimate {
        r,
        value: density_over(&profile, r, sched.window_start(window_fraction)),
        window_fraction,
    })
}

/// Density estimate from an already computed profile.
pub fn density_from_profile(
    profile: &CountingProfile,
    r: f64,
    window_fraction: f64,
) -> DensityEstimate {
    let steps = profile.samples.len();
    let kept = ((steps as f64) * window_fraction).ceil() as usize;
    DensityEstimate {
        r,
        value: density_over(profile, r, steps - kept.clamp(1, steps)),
        window_fraction,
    }
}

/// Upper `r`-density with the centre fixed at the origin.
pub fn banach_density(
    family: &BetaFamily,
    r: f64,
    sched: &RadiusSchedule,
) -> Result<DensityEstimate> {
    upper_beurling_density(family, r, sched, &CenterPolicy::Origin)
}

/// `N(h)/h^r` along the whole schedule at the origin.
pub fn density_curve(family: &BetaFamily, r: f64, sched: &RadiusSchedule) -> Result<Vec<f64>> {
    let profile = counting_profile(family, Point2::ORIGIN, sched)?;
    Ok(profile
        .samples
        .iter()
        .map(|s| s.count as f64 * (-r * s.ln_h).exp())
        .collect())
}

/// Two estimates of the critical exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionEstimate {
    /// Least-squares slope of `log N(h)` against `log h` over the top half.
    pub slope_fit: f64,
    /// Exponent at which the density proxy crosses [`BISECTION_THRESHOLD`].
    pub bisection: f64,
    /// `|slope_fit - bisection|`
    pub agreement: f64,
}

impl DimensionEstimate {
    pub const CSV_HEADER: &'static str = "family,slope_fit,bisection,agreement";

    pub fn csv_row(&self, family: &BetaFamily) -> String {
        use crate::numeric::fmt_g17;
        format!(
            "{},{},{},{}",
            family,
            fmt_g17(self.slope_fit),
            fmt_g17(self.bisection),
            fmt_g17(self.agreement)
        )
    }
}

/// Slope fit and bisection on an already computed profile.
pub fn dimension_from_profile(profile: &CountingProfile) -> Result<DimensionEstimate> {
    let steps = profile.samples.len();
    if steps < MIN_DIMENSION_STEPS {
        return Err(Error::InvalidParameter(format!(
            "dimension fit needs at least {} schedule steps, got {}",
            MIN_DIMENSION_STEPS, steps
        )));
    }
    let start = steps - ((steps as f64 * DEFAULT_WINDOW_FRACTION).ceil() as usize);
    let window = &profile.samples[start..];
    if let Some(s) = window.iter().find(|s| s.count == 0) {
        return Err(Error::DegenerateProfile(format!(
            "zero count at h = {}",
            s.h
        )));
    }
    let xs: Vec<f64> = window.iter().map(|s| s.ln_h).collect();
    let ys: Vec<f64> = window.iter().map(|s| (s.count as f64).ln()).collect();
    let slope_fit = least_squares_slope(&xs, &ys)
        .ok_or_else(|| Error::DegenerateProfile("radii in the fit window coincide".into()))?;

    let ln_threshold = BISECTION_THRESHOLD.ln();
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if density_over(profile, mid, start).ln() > ln_threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let bisection = 0.5 * (lo + hi);
    Ok(DimensionEstimate {
        slope_fit,
        bisection,
        agreement: (slope_fit - bisection).abs(),
    })
}

fn check_steps(sched: &RadiusSchedule) -> Result<()> {
    if sched.steps() < MIN_DIMENSION_STEPS {
        return Err(Error::InvalidParameter(format!(
            "dimension fit needs at least {} schedule steps, got {}",
            MIN_DIMENSION_STEPS,
            sched.steps()
        )));
    }
    Ok(())
}

/// Beurling dimension from the supremum-over-centres profile.
pub fn beurling_dimension(
    family: &BetaFamily,
    sched: &RadiusSchedule,
    centers: &CenterPolicy,
) -> Result<DimensionEstimate> {
    check_steps(sched)?;
    dimension_from_profile(&sup_profile(family, sched, centers)?)
}

/// Banach dimension: origin-centred counts only.
pub fn banach_dimension(family: &BetaFamily, sched: &RadiusSchedule) -> Result<DimensionEstimate> {
    check_steps(sched)?;
    dimension_from_profile(&counting_profile(family, Point2::ORIGIN, sched)?)
}

/// `ln #B / ln lambda_min`, the dimension of the support bounding the
/// Beurling dimension of every orthogonal set. Equals 1 for the standard system.
pub fn dimension_upper_bound(sys: &SelfAffineSystem) -> Result<f64> {
    if !sys.is_standard() {
        return Err(Error::UnsupportedSystem(
            "the Beurling dimension upper bound",
        ));
    }
    Ok(pseudo_dimension_formula(
        sys.digits().len(),
        sys.min_eigenvalue_modulus(),
    ))
}

/// The bare formula `ln(num_digits) / ln(lambda_min)`; no spectral claim.
pub fn pseudo_dimension_formula(num_digits: usize, lambda_min: f64) -> f64 {
    (num_digits as f64).ln() / lambda_min.ln()
}
