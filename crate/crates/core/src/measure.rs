//! The self-affine measure generated by an expanding integer matrix `R` and a
//! digit set `B`, with equal weights on the maps `x -> R^{-1}(x + b)`.
//!
//! Everything here is generic in `(R, B)` except [`SelfAffineSystem::fourier_closed_form`]
//! and [`SelfAffineSystem::in_zero_set`], which encode facts proved only for
//! the standard system `R = [[2,1],[0,2]]`, `B = {(0,0), (1,0)}`.

use std::ops::{Add, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::{sin_pi, sinc_pi};

/// Values of the mask and of the Fourier transform.
pub type ComplexValue = Complex64;

/// 2x2 integer matrix, row major. Entries are 128-bit so that powers of the
/// standard matrix up to the 62nd fit without overflow.
pub type IntMatrix2 = [[i128; 2]; 2];

/// Largest supported exponent in [`SelfAffineSystem::transpose_power`].
pub const MAX_TRANSPOSE_POWER: u32 = 62;

/// Iterations discarded before the chaos game starts emitting samples.
pub const CHAOS_GAME_BURN_IN: usize = 64;

/// Default tolerance of the zero-set membership tests.
pub const ZERO_SET_TOL: f64 = 1e-9;

/// A conservative box `[0,1] x [-1,1]` containing the attractor of the
/// standard system. Used only as a sanity bound on samples.
pub const ATTRACTOR_BOX: ([f64; 2], [f64; 2]) = ([0.0, 1.0], [-1.0, 1.0]);

/// A point (or frequency) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn dot(&self, other: &Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

/// `cos(pi x)` with exact argument reduction.
fn cos_pi(x: f64) -> f64 {
    let k = x.round();
    let c = (std::f64::consts::PI * (x - k)).cos();
    if (k * 0.5).fract() == 0.0 {
        c
    } else {
        -c
    }
}

/// `exp(-2 pi i t)`
fn unit_phase(t: f64) -> Complex64 {
    Complex64::new(cos_pi(2.0 * t), -sin_pi(2.0 * t))
}

type RealMatrix2 = [[f64; 2]; 2];

fn apply(m: &RealMatrix2, p: Point2) -> Point2 {
    Point2::new(
        m[0][0] * p.x1 + m[0][1] * p.x2,
        m[1][0] * p.x1 + m[1][1] * p.x2,
    )
}

/// The pair `(R, B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfAffineSystem {
    matrix: [[i64; 2]; 2],
    digits: Vec<[i64; 2]>,
}

impl Default for SelfAffineSystem {
    fn default() -> Self {
        Self::standard()
    }
}

impl SelfAffineSystem {
    pub const STANDARD_MATRIX: [[i64; 2]; 2] = [[2, 1], [0, 2]];
    pub const STANDARD_DIGITS: [[i64; 2]; 2] = [[0, 0], [1, 0]];

    /// Builds a system, checking that `R` is expanding and that `B` is a set
    /// of distinct digits containing the origin.
    pub fn new(matrix: [[i64; 2]; 2], digits: Vec<[i64; 2]>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidSystem("digit set is empty".into()));
        }
        if !digits.contains(&[0, 0]) {
            return Err(Error::InvalidSystem("digit set must contain 0".into()));
        }
        for (i, a) in digits.iter().enumerate() {
            if digits[i + 1..].contains(a) {
                return Err(Error::InvalidSystem(format!("repeated digit {:?}", a)));
            }
        }
        let sys = SelfAffineSystem { matrix, digits };
        let min_modulus = sys.min_eigenvalue_modulus();
        if !(min_modulus > 1.0 + 1e-12) {
            return Err(Error::InvalidSystem(format!(
                "matrix {:?} is not expanding (smallest eigenvalue modulus {})",
                matrix, min_modulus
            )));
        }
        Ok(sys)
    }

    /// `R = [[2,1],[0,2]]`, `B = {(0,0), (1,0)}`.
    pub fn standard() -> Self {
        SelfAffineSystem {
            matrix: Self::STANDARD_MATRIX,
            digits: Self::STANDARD_DIGITS.to_vec(),
        }
    }

    pub fn is_standard(&self) -> bool {
        self.matrix == Self::STANDARD_MATRIX && self.has_standard_digits()
    }

    fn has_standard_digits(&self) -> bool {
        self.digits.len() == 2
            && Self::STANDARD_DIGITS
                .iter()
                .all(|d| self.digits.contains(d))
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    pub fn digits(&self) -> &[[i64; 2]] {
        &self.digits
    }

    pub fn determinant(&self) -> i128 {
        let m = self.matrix.map(|row| row.map(i128::from));
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Moduli of the two eigenvalues of `R`, in increasing order.
    pub fn eigenvalue_moduli(&self) -> [f64; 2] {
        let m = self.matrix;
        let trace = m[0][0] as f64 + m[1][1] as f64;
        let det = self.determinant() as f64;
        let disc = trace * trace - 4.0 * det;
        if disc >= 0.0 {
            let root = disc.sqrt();
            let a = ((trace - root) / 2.0).abs();
            let b = ((trace + root) / 2.0).abs();
            if a <= b {
                [a, b]
            } else {
                [b, a]
            }
        } else {
            let modulus = det.sqrt();
            [modulus, modulus]
        }
    }

    pub fn min_eigenvalue_modulus(&self) -> f64 {
        self.eigenvalue_moduli()[0]
    }

    fn inverse(&self) -> RealMatrix2 {
        let m = self.matrix;
        let det = self.determinant() as f64;
        [
            [m[1][1] as f64 / det, -m[0][1] as f64 / det],
            [-m[1][0] as f64 / det, m[0][0] as f64 / det],
        ]
    }

    fn inverse_transpose(&self) -> RealMatrix2 {
        let inv = self.inverse();
        [[inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]]
    }

    /// `m_B(x) = (1/#B) sum_b exp(-2 pi i <b, x>)`.
    pub fn mask(&self, x: Point2) -> ComplexValue {
        let sum: Complex64 = self
            .digits
            .iter()
            .map(|b| unit_phase(b[0] as f64 * x.x1 + b[1] as f64 * x.x2))
            .sum();
        sum / self.digits.len() as f64
    }

    /// `(R^t)^k` with exact integer arithmetic, `1 <= k <= 62`.
    pub fn transpose_power(&self, k: u32) -> Result<IntMatrix2> {
        if k == 0 || k > MAX_TRANSPOSE_POWER {
            return Err(Error::Range(format!(
                "transpose power k = {} outside 1..={}",
                k, MAX_TRANSPOSE_POWER
            )));
        }
        let m = self.matrix;
        let rt: IntMatrix2 = [
            [m[0][0] as i128, m[1][0] as i128],
            [m[0][1] as i128, m[1][1] as i128],
        ];
        let mut acc = rt;
        for _ in 1..k {
            acc = mul_checked(&acc, &rt)
                .ok_or_else(|| Error::Range(format!("(R^t)^{} overflows 128-bit entries", k)))?;
        }
        Ok(acc)
    }

    /// Truncated infinite product `prod_{j=1}^{depth} m_B((R^t)^{-j} xi)`.
    pub fn fourier_product(&self, xi: Point2, depth: usize) -> Result<ComplexValue> {
        if depth == 0 {
            return Err(Error::InvalidParameter("product depth must be >= 1".into()));
        }
        let step = self.inverse_transpose();
        let mut y = xi;
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..depth {
            y = apply(&step, y);
            acc *= self.mask(y);
        }
        Ok(acc)
    }

    /// `exp(-pi i xi_1) sin(pi xi_1) / (pi xi_1)`, valid for the standard system.
    pub fn fourier_closed_form(&self, xi: Point2) -> Result<ComplexValue> {
        if !self.is_standard() {
            return Err(Error::UnsupportedSystem(
                "the closed-form Fourier transform",
            ));
        }
        Ok(closed_form(xi.x1))
    }

    /// Membership in `Z(mu^) = {xi : xi_1 in Z \ {0}}` with tolerance `tol` on
    /// the distance of `xi_1` to the nearest integer.
    pub fn in_zero_set(&self, xi: Point2, tol: f64) -> Result<bool> {
        if !self.is_standard() {
            return Err(Error::UnsupportedSystem("the zero-set characterisation"));
        }
        let nearest = xi.x1.round();
        Ok(nearest != 0.0 && (xi.x1 - nearest).abs() <= tol)
    }

    /// Brute-force union test: is `(R^t)^{-k} xi` a zero of the mask for some
    /// `1 <= k <= kmax`?
    ///
    /// For the standard digit set the mask vanishes exactly on first
    /// coordinates in `(2Z+1)/2`, and `tol` is a distance to that set. For
    /// other digit sets `tol` bounds `|m_B|`.
    pub fn zero_set_union_member(&self, xi: Point2, kmax: u32, tol: f64) -> bool {
        let step = self.inverse_transpose();
        let standard_digits = self.has_standard_digits();
        let mut y = xi;
        for _ in 0..kmax {
            y = apply(&step, y);
            let hit = if standard_digits {
                let shifted = y.x1 - 0.5;
                (shifted - shifted.round()).abs() <= tol
            } else {
                self.mask(y).norm() <= tol
            };
            if hit {
                return true;
            }
        }
        false
    }

    /// Chaos-game samples of the invariant measure: `x <- R^{-1}(x + b)` with
    /// `b` uniform over `B`, started at the origin, after a fixed burn-in.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Point2> {
        let inv = self.inverse();
        let digits: Vec<Point2> = self
            .digits
            .iter()
            .map(|b| Point2::new(b[0] as f64, b[1] as f64))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Point2::ORIGIN;
        let step = |x: Point2, rng: &mut ChaCha8Rng| {
            let b = digits[rng.gen_range(0..digits.len())];
            apply(&inv, x + b)
        };
        for _ in 0..CHAOS_GAME_BURN_IN {
            x = step(x, &mut rng);
        }
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            x = step(x, &mut rng);
            out.push(x);
        }
        out
    }
}

/// Closed form of the Fourier transform of the standard measure as a
/// function of the first coordinate.
pub(crate) fn closed_form(xi1: f64) -> Complex64 {
    Complex64::new(cos_pi(xi1), -sin_pi(xi1)) * sinc_pi(xi1)
}

/// `|mu^(xi)|^2` for the standard measure.
pub(crate) fn closed_form_norm_sqr(xi1: f64) -> f64 {
    let s = sinc_pi(xi1);
    s * s
}

fn mul_checked(a: &IntMatrix2, b: &IntMatrix2) -> Option<IntMatrix2> {
    let mut out = [[0i128; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let p = a[i][0].checked_mul(b[0][j])?;
            let q = a[i][1].checked_mul(b[1][j])?;
            *cell = p.checked_add(q)?;
        }
    }
    Some(out)
}

/// Empirical characteristic function `(1/n) sum exp(-2 pi i <xi, x>)`.
pub fn empirical_fourier(samples: &[Point2], xi: Point2) -> ComplexValue {
    let re: Vec<f64> = samples.iter().map(|x| cos_pi(2.0 * xi.dot(x))).collect();
    let im: Vec<f64> = samples.iter().map(|x| -sin_pi(2.0 * xi.dot(x))).collect();
    let n = samples.len().max(1) as f64;
    Complex64::new(
        crate::numeric::pairwise_sum(&re) / n,
        crate::numeric::pairwise_sum(&im) / n,
    )
}
