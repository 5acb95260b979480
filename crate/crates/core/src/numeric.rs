//! Small numerical kernels shared by the estimators.

use std::f64::consts::PI;

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, and rounding error grows like O(log n) instead of O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `sin(pi * x)` with exact argument reduction, so integers map to exactly 0.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let k = x.round();
    // exact for all finite doubles
    let f = x - k;
    let s = (PI * f).sin();
    if (k * 0.5).fract() == 0.0 {
        s
    } else {
        -s
    }
}

/// `sin(pi x) / (pi x)` with the removable singularity filled in.
pub fn sinc_pi(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
///
/// Centred sums are accumulated pairwise. Returns `None` when fewer than two
/// points are given or the abscissae are all equal.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mean_x = pairwise_sum(xs) / n as f64;
    let mean_y = pairwise_sum(ys) / n as f64;
    let sxy: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).collect();
    let sxx = pairwise_sum(&sxx);
    if sxx <= 0.0 {
        return None;
    }
    Some(pairwise_sum(&sxy) / sxx)
}

/// Formats a double like C's `%.17g`: 17 significant digits, trailing zeros
/// removed, scientific notation outside `1e-5 <= |x| < 1e17`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_vanishes_on_integers() {
        for k in -1000..=1000 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(-0.5) + 1.0).abs() < 1e-16);
        assert!((sin_pi(1.5) + 1.0).abs() < 1e-16);
        assert!((sin_pi(2.25) - (PI * 0.25).sin()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_matches_naive_on_small_inputs() {
        let v: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn slope_of_exact_line() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.75 * x - 2.0).collect();
        assert!((least_squares_slope(&xs, &ys).unwrap() - 0.75).abs() < 1e-14);
        assert_eq!(least_squares_slope(&[1.0], &[2.0]), None);
        assert_eq!(least_squares_slope(&[1.0, 1.0], &[2.0, 3.0]), None);
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(3.0), "3");
        assert_eq!(fmt_g17(-16.0), "-16");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(2.0f64.ln() * 2.0), "1.3862943611198906");
        assert_eq!(fmt_g17(1e300), "1.0000000000000001e+300");
        assert_eq!(fmt_g17(2.0f64.powi(100)), "1.2676506002282294e+30");
        assert_eq!(fmt_g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(fmt_g17(0.0), "0");
        for &x in &[
            0.1,
            1.0 / 3.0,
            2.0f64.sqrt(),
            6.02e23,
            -4.5e-300,
            123456.789,
        ] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
