//! Candidate spectra `{(n, beta(n)) : n in Z}` built from the beta families,
//! and the two orthogonality checks (integer first coordinates, Gram matrix).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{closed_form, Point2, SelfAffineSystem};
use crate::report::VerificationReport;

/// Largest |n| for which a first coordinate is handled; beyond 2^53 an `i64`
/// index no longer round-trips through `f64`.
pub const INDEX_LIMIT: i64 = 1 << 53;

/// Gram entries of an orthogonal window must be this small off the diagonal.
pub const GRAM_OFF_DIAGONAL_TOL: f64 = 1e-12;

/// A user supplied beta. `None` means "undefined at this index".
#[derive(Clone)]
pub struct CustomBeta {
    name: String,
    map: Arc<dyn Fn(i64) -> Option<f64> + Send + Sync>,
}

impl CustomBeta {
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(i64) -> f64 + Send + Sync + 'static,
    {
        CustomBeta {
            name: name.into(),
            map: Arc::new(move |n| Some(f(n))),
        }
    }

    /// A beta known only on the keys of `table`.
    pub fn from_table(name: impl Into<String>, table: BTreeMap<i64, f64>) -> Self {
        CustomBeta {
            name: name.into(),
            map: Arc::new(move |n| table.get(&n).copied()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn get(&self, n: i64) -> Result<f64> {
        let value = (self.map)(n).ok_or_else(|| {
            Error::MalformedSpectrum(format!(
                "custom beta '{}' undefined at n = {}",
                self.name, n
            ))
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedSpectrum(format!(
                "custom beta '{}' is not finite at n = {}",
                self.name, n
            )));
        }
        if n == 0 && value != 0.0 {
            return Err(Error::MalformedSpectrum(format!(
                "custom beta '{}' has beta(0) = {} (must be 0)",
                self.name, value
            )));
        }
        Ok(value)
    }
}

impl fmt::Debug for CustomBeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomBeta")
            .field("name", &self.name)
            .finish()
    }
}

/// The second coordinate `beta: Z -> R` of a spectrum.
#[derive(Debug, Clone)]
pub enum BetaFamily {
    /// `beta = 0`
    Zero,
    /// `beta(n) = n`
    Linear,
    /// `sgn(n) |n|^(1/t)`, `0 < t < 1`
    PowerLaw {
        t: f64,
    },
    /// `sgn(n) |a n|^(1/t)`, `0 < t <= 1`, `a > 1`
    PowerLawScaled {
        t: f64,
        a: f64,
    },
    /// `sgn(n) a^|n|`, `a > 1`
    Exponential {
        a: f64,
    },
    /// `sgn(n) |n|^(1/t) ln|n|`, `0 < t <= 1`
    PowerLog {
        t: f64,
    },
    /// `sgn(n) (2|n|/s)^(1/t)`, `0 < t <= 1`, `s > 0`
    DensityCalibrated {
        t: f64,
        s: f64,
    },
    Custom(CustomBeta),
}

fn check_range(name: &str, value: f64, ok: bool, expected: &str) -> Result<()> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{} = {} must satisfy {}",
            name, value, expected
        )))
    }
}

impl BetaFamily {
    pub fn power_law(t: f64) -> Result<Self> {
        let f = BetaFamily::PowerLaw { t };
        f.validate()?;
        Ok(f)
    }

    pub fn power_law_scaled(t: f64, a: f64) -> Result<Self> {
        let f = BetaFamily::PowerLawScaled { t, a };
        f.validate()?;
        Ok(f)
    }

    pub fn exponential(a: f64) -> Result<Self> {
        let f = BetaFamily::Exponential { a };
        f.validate()?;
        Ok(f)
    }

    pub fn power_log(t: f64) -> Result<Self> {
        let f = BetaFamily::PowerLog { t };
        f.validate()?;
        Ok(f)
    }

    pub fn density_calibrated(t: f64, s: f64) -> Result<Self> {
        let f = BetaFamily::DensityCalibrated { t, s };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaFamily::Zero | BetaFamily::Linear | BetaFamily::Custom(_) => Ok(()),
            BetaFamily::PowerLaw { t } => check_range("t", t, t > 0.0 && t < 1.0, "0 < t < 1"),
            BetaFamily::PowerLawScaled { t, a } => {
                check_range("t", t, t > 0.0 && t <= 1.0, "0 < t <= 1")?;
                check_range("a", a, a > 1.0, "a > 1")
            }
            BetaFamily::Exponential { a } => check_range("a", a, a > 1.0, "a > 1"),
            BetaFamily::PowerLog { t } => check_range("t", t, t > 0.0 && t <= 1.0, "0 < t <= 1"),
            BetaFamily::DensityCalibrated { t, s } => {
                check_range("t", t, t > 0.0 && t <= 1.0, "0 < t <= 1")?;
                check_range("s", s, s > 0.0, "s > 0")
            }
        }
    }

    /// True for every family except `Custom`: odd, with `|beta|`
    /// nondecreasing on `n >= 1`, hence `beta` nondecreasing on `Z`.
    pub fn is_builtin(&self) -> bool {
        !matches!(self, BetaFamily::Custom(_))
    }

    /// The intended dimension parameter, when the family has one.
    pub fn t(&self) -> Option<f64> {
        match *self {
            BetaFamily::Linear => Some(1.0),
            BetaFamily::PowerLaw { t }
            | BetaFamily::PowerLawScaled { t, .. }
            | BetaFamily::PowerLog { t }
            | BetaFamily::DensityCalibrated { t, .. } => Some(t),
            BetaFamily::Exponential { .. } => Some(0.0),
            BetaFamily::Zero | BetaFamily::Custom(_) => None,
        }
    }

    /// `beta(n)`. Errors when the value is not representable as a finite double
    /// (or, for `Custom`, undefined or malformed).
    pub fn eval(&self, n: i64) -> Result<f64> {
        if let BetaFamily::Custom(c) = self {
            return c.get(n);
        }
        let v = self.eval_unchecked(n);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Range(format!("beta({}) overflows for {}", n, self)))
        }
    }

    /// Like [`eval`](Self::eval) but unrepresentable magnitudes of built-in
    /// families come back as signed infinity: such points are farther than
    /// any finite radius.
    pub(crate) fn eval_saturating(&self, n: i64) -> Result<f64> {
        match self {
            BetaFamily::Custom(c) => c.get(n),
            _ => Ok(self.eval_unchecked(n)),
        }
    }

    fn eval_unchecked(&self, n: i64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let m = n.unsigned_abs() as f64;
        let magnitude = match *self {
            BetaFamily::Zero => 0.0,
            BetaFamily::Linear => m,
            BetaFamily::PowerLaw { t } => m.powf(1.0 / t),
            BetaFamily::PowerLawScaled { t, a } => (a * m).powf(1.0 / t),
            BetaFamily::Exponential { a } => {
                if n.unsigned_abs() > exponential_index_limit(a) as u64 {
                    f64::INFINITY
                } else {
                    a.powf(m)
                }
            }
            BetaFamily::PowerLog { t } => m.powf(1.0 / t) * m.ln(),
            BetaFamily::DensityCalibrated { t, s } => (2.0 * m / s).powf(1.0 / t),
            BetaFamily::Custom(_) => unreachable!("custom beta handled by caller"),
        };
        if n < 0 {
            -magnitude
        } else {
            magnitude
        }
    }
}

impl fmt::Display for BetaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaFamily::Zero => write!(f, "zero"),
            BetaFamily::Linear => write!(f, "linear"),
            BetaFamily::PowerLaw { t } => write!(f, "power-law(t={})", t),
            BetaFamily::PowerLawScaled { t, a } => write!(f, "power-law-scaled(t={};a={})", t, a),
            BetaFamily::Exponential { a } => write!(f, "exponential(a={})", a),
            BetaFamily::PowerLog { t } => write!(f, "power-log(t={})", t),
            BetaFamily::DensityCalibrated { t, s } => {
                write!(f, "density-calibrated(t={};s={})", t, s)
            }
            BetaFamily::Custom(c) => write!(f, "custom({})", c.name()),
        }
    }
}

/// `floor(1023 ln 2 / ln a)`: the largest `|n|` with `a^|n|` below the
/// double-precision overflow threshold.
pub fn exponential_index_limit(a: f64) -> i64 {
    (1023.0 * std::f64::consts::LN_2 / a.ln()).floor() as i64
}

/// Which indices a [`Spectrum`] ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSet {
    All,
    /// `{-N, ..., N}`
    Window(u64),
}

/// `Lambda_beta = {(n, beta(n)) : n in index set}`, evaluated lazily.
#[derive(Debug, Clone)]
pub struct Spectrum {
    family: BetaFamily,
    index_set: IndexSet,
}

impl Spectrum {
    pub fn new(family: BetaFamily) -> Self {
        Spectrum {
            family,
            index_set: IndexSet::All,
        }
    }

    pub fn with_window(family: BetaFamily, n: u64) -> Self {
        Spectrum {
            family,
            index_set: IndexSet::Window(n),
        }
    }

    pub fn family(&self) -> &BetaFamily {
        &self.family
    }

    pub fn index_set(&self) -> IndexSet {
        self.index_set
    }

    pub fn point(&self, n: i64) -> Result<Point2> {
        if let IndexSet::Window(w) = self.index_set {
            if n.unsigned_abs() > w {
                return Err(Error::InvalidParameter(format!(
                    "n = {} outside window {}",
                    n, w
                )));
            }
        }
        Ok(Point2::new(n as f64, self.family.eval(n)?))
    }

    /// Materialises the window, or the first `n` on each side for `All`.
    pub fn points(&self, n: u64) -> Result<Vec<Point2>> {
        let n = match self.index_set {
            IndexSet::All => n,
            IndexSet::Window(w) => w.min(n),
        };
        spectrum_window(&self.family, n)
    }
}

/// The `2N + 1` points `(n, beta(n))`, `|n| <= N`, in increasing `n`.
pub fn spectrum_window(family: &BetaFamily, n: u64) -> Result<Vec<Point2>> {
    family.validate()?;
    if n > INDEX_LIMIT as u64 {
        return Err(Error::Range(format!(
            "window {} exceeds index limit 2^53",
            n
        )));
    }
    let n = n as i64;
    (-n..=n)
        .map(|k| Ok(Point2::new(k as f64, family.eval(k)?)))
        .collect()
}

/// Orthogonality via the zero set: a set with integer first coordinates is
/// orthogonal iff those coordinates are pairwise distinct.
pub fn check_orthogonal_combinatorial(points: &[Point2]) -> Result<VerificationReport> {
    let mut seen: HashMap<i64, usize> = HashMap::with_capacity(points.len());
    let mut collision = None;
    for (idx, p) in points.iter().enumerate() {
        if !p.is_finite() || p.x1.fract() != 0.0 || p.x1.abs() > INDEX_LIMIT as f64 {
            return Err(Error::MalformedSpectrum(format!(
                "point #{} = ({}, {}) does not have a finite integer first coordinate",
                idx, p.x1, p.x2
            )));
        }
        if let Some(&first) = seen.get(&(p.x1 as i64)) {
            if collision.is_none() {
                collision = Some((first, idx));
            }
        } else {
            seen.insert(p.x1 as i64, idx);
        }
    }
    Ok(match collision {
        None => VerificationReport::pass(
            "orthogonality-combinatorial",
            0.0,
            0.0,
            format!(
                "{} points with distinct integer first coordinates",
                points.len()
            ),
        ),
        Some((i, j)) => {
            let (a, b) = (points[i], points[j]);
            let mut report = VerificationReport::fail(
                "orthogonality-combinatorial",
                1.0,
                0.0,
                format!(
                    "points #{} ({}, {}) and #{} ({}, {}) share first coordinate",
                    i, a.x1, a.x2, j, b.x1, b.x2
                ),
            );
            report.colliding_pair = Some((a, b));
            report
        }
    })
}

/// Dense complex Gram matrix `G[j][k] = mu^(lambda_k - lambda_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    size: usize,
    entries: Vec<Complex64>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.size + col]
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.size {
            for k in 0..self.size {
                if j != k {
                    worst = worst.max(self.get(j, k).norm());
                }
            }
        }
        worst
    }

    pub fn max_diagonal_deviation(&self) -> f64 {
        (0..self.size)
            .map(|j| (self.get(j, j) - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// Passes when the matrix is the identity to [`GRAM_OFF_DIAGONAL_TOL`].
    pub fn identity_report(&self) -> VerificationReport {
        let worst = self.max_off_diagonal().max(self.max_diagonal_deviation());
        let detail = format!("{}x{} Gram matrix", self.size, self.size);
        if worst <= GRAM_OFF_DIAGONAL_TOL {
            VerificationReport::pass("orthogonality-gram", worst, GRAM_OFF_DIAGONAL_TOL, detail)
        } else {
            VerificationReport::fail("orthogonality-gram", worst, GRAM_OFF_DIAGONAL_TOL, detail)
        }
    }
}

/// Inner products `<e_j, e_k>` in `L^2(mu)` for the standard measure.
pub fn gram_matrix(sys: &SelfAffineSystem, points: &[Point2]) -> Result<GramMatrix> {
    if !sys.is_standard() {
        return Err(Error::UnsupportedSystem("the Gram matrix"));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::MalformedSpectrum(format!(
            "non-finite point ({}, {})",
            p.x1, p.x2
        )));
    }
    let size = points.len();
    let mut entries = Vec::with_capacity(size * size);
    for pj in points {
        for pk in points {
            entries.push(closed_form(pk.x1 - pj.x1));
        }
    }
    Ok(GramMatrix { size, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_examples() {
        assert_eq!(BetaFamily::Linear.eval(7).unwrap(), 7.0);
        assert_eq!(BetaFamily::power_law(0.5).unwrap().eval(3).unwrap(), 9.0);
        assert_eq!(
            BetaFamily::density_calibrated(1.0, 2.0)
                .unwrap()
                .eval(5)
                .unwrap(),
            5.0
        );
        assert_eq!(
            BetaFamily::exponential(2.0).unwrap().eval(-4).unwrap(),
            -16.0
        );
        let plog = BetaFamily::power_log(1.0).unwrap();
        assert_eq!(plog.eval(1).unwrap(), 0.0);
        assert_eq!(plog.eval(-1).unwrap(), 0.0);
        assert_eq!(plog.eval(0).unwrap(), 0.0);
        assert_eq!(
            BetaFamily::power_law_scaled(1.0, 3.0)
                .unwrap()
                .eval(-2)
                .unwrap(),
            -6.0
        );
    }

    #[test]
    fn parameter_validation() {
        assert!(BetaFamily::power_law(0.0).is_err());
        assert!(BetaFamily::power_law(1.0).is_err());
        assert!(BetaFamily::power_law(f64::NAN).is_err());
        assert!(BetaFamily::power_law_scaled(0.5, 1.0).is_err());
        assert!(BetaFamily::power_law_scaled(1.0, 1.5).is_ok());
        assert!(BetaFamily::exponential(1.0).is_err());
        assert!(BetaFamily::power_log(1.2).is_err());
        assert!(BetaFamily::density_calibrated(0.5, 0.0).is_err());
        assert!(BetaFamily::density_calibrated(0.0, 1.0).is_err());
    }

    #[test]
    fn exponential_range() {
        assert_eq!(exponential_index_limit(2.0), 1023);
        let e = BetaFamily::exponential(2.0).unwrap();
        assert_eq!(e.eval(1023).unwrap(), 2f64.powi(1023));
        assert!(matches!(e.eval(1024), Err(Error::Range(_))));
        assert_eq!(e.eval_saturating(-5000).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(spectrum_window(&e, 2000), Err(Error::Range(_))));
        for a in [1.01, 1.5, 3.0, 10.0, 1e6] {
            let fam = BetaFamily::exponential(a).unwrap();
            assert!(fam.eval(exponential_index_limit(a)).is_ok(), "a = {}", a);
        }
    }

    #[test]
    fn window_examples() {
        let w = spectrum_window(&BetaFamily::Linear, 1).unwrap();
        assert_eq!(
            w,
            vec![
                Point2::new(-1.0, -1.0),
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0)
            ]
        );
        let l2 = 2.0 * 2f64.ln();
        let w = spectrum_window(&BetaFamily::power_log(1.0).unwrap(), 2).unwrap();
        assert_eq!(
            w,
            vec![
                Point2::new(-2.0, -l2),
                Point2::new(-1.0, 0.0),
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(2.0, l2)
            ]
        );
        let w = spectrum_window(&BetaFamily::exponential(2.0).unwrap(), 2).unwrap();
        let ys: Vec<f64> = w.iter().map(|p| p.x2).collect();
        assert_eq!(ys, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
    }

    #[test]
    fn spectrum_type() {
        let s = Spectrum::new(BetaFamily::Linear);
        assert_eq!(s.point(-3).unwrap(), Point2::new(-3.0, -3.0));
        assert_eq!(s.points(2).unwrap().len(), 5);
        let w = Spectrum::with_window(BetaFamily::Zero, 3);
        assert_eq!(w.points(100).unwrap().len(), 7);
        assert!(w.point(4).is_err());
        assert!(w.points(3).unwrap().contains(&Point2::ORIGIN));
    }

    #[test]
    fn custom_beta_validation() {
        let table: BTreeMap<i64, f64> = [(-1, -0.5), (0, 0.0), (1, 2.0)].into_iter().collect();
        let fam = BetaFamily::Custom(CustomBeta::from_table("t", table));
        assert_eq!(spectrum_window(&fam, 1).unwrap().len(), 3);
        assert!(matches!(
            spectrum_window(&fam, 2),
            Err(Error::MalformedSpectrum(_))
        ));
        let shifted = BetaFamily::Custom(CustomBeta::from_fn("shift", |n| n as f64 + 1.0));
        assert!(matches!(shifted.eval(0), Err(Error::MalformedSpectrum(_))));
        let nan = BetaFamily::Custom(CustomBeta::from_fn("nan", |n| {
            if n == 3 {
                f64::NAN
            } else {
                0.0
            }
        }));
        assert!(nan.eval(3).is_err());
        assert!(!nan.is_builtin());
    }

    #[test]
    fn combinatorial_examples() {
        let w = spectrum_window(&BetaFamily::Linear, 100).unwrap();
        assert!(check_orthogonal_combinatorial(&w).unwrap().passed);
        let bad = [Point2::new(0.0, 0.0), Point2::new(0.0, 1.0)];
        let r = check_orthogonal_combinatorial(&bad).unwrap();
        assert!(!r.passed);
        assert_eq!(r.colliding_pair, Some((bad[0], bad[1])));
        let ok = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, std::f64::consts::PI),
            Point2::new(5.0, -1.1),
        ];
        assert!(check_orthogonal_combinatorial(&ok).unwrap().passed);
        let frac = [Point2::new(0.5, 0.0)];
        assert!(matches!(
            check_orthogonal_combinatorial(&frac),
            Err(Error::MalformedSpectrum(_))
        ));
    }

    #[test]
    fn gram_examples() {
        let sys = SelfAffineSystem::standard();
        let w = spectrum_window(&BetaFamily::power_law(0.5).unwrap(), 5).unwrap();
        let g = gram_matrix(&sys, &w).unwrap();
        assert_eq!(g.size(), 11);
        assert!(g.max_off_diagonal() <= 1e-12);
        assert_eq!(g.max_diagonal_deviation(), 0.0);
        assert!(g.identity_report().passed);

        let g = gram_matrix(&sys, &[Point2::ORIGIN]).unwrap();
        assert_eq!(g.get(0, 0), Complex64::new(1.0, 0.0));

        let g = gram_matrix(&sys, &[Point2::ORIGIN, Point2::new(0.5, 0.0)]).unwrap();
        assert!((g.max_off_diagonal() - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!(!g.identity_report().passed);

        let other = SelfAffineSystem::new([[4, 0], [0, 4]], vec![[0, 0], [1, 0]]).unwrap();
        assert!(gram_matrix(&other, &w).is_err());
    }
}
