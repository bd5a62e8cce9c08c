//! Complementary error function.
//!
//! Self-contained implementation so the inverse used by the finite-size
//! estimators does not depend on the rounding behaviour of any particular
//! special-function library. Maclaurin series for small arguments, Lentz
//! continued fraction for the tail; relative accuracy is well below 1e-12
//! over the range exercised here (see the quadrature cross-check in the
//! tests).

const FRAC_2_SQRT_PI: f64 = 1.128_379_167_095_512_6;

/// erfc(x) = 1 - erf(x).
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 1.5 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// Maclaurin series for erf, accurate for |x| < ~3.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        // t_{n} = t_{n-1} * (-x^2) * (2n-1) / (n * (2n+1))
        term *= -x2 * (2 * n - 1) as f64 / (n as f64 * (2 * n + 1) as f64);
        let next = sum + term;
        if next == sum || n > 200 {
            return FRAC_2_SQRT_PI * next;
        }
        sum = next;
    }
}

/// Lentz evaluation of the tail continued fraction
/// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
/// for x >= 1.5.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0_f64;
    for k in 1..300 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}
