//! Real gamma function and the Hurwitz (generalized Riemann) zeta function
//! `ζ(z, q)` for real `z < 1` and complex `q` with positive real part.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for real `x` away from the poles at `0, −1, −2, …`.
///
/// Uses the reflection formula below `x = 1/2`. Positive integers up to 25
/// are returned as exact factorials.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("gamma argument must be finite, got {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(domain(format!("gamma has a pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x == x.floor() && (1.0..=25.0).contains(&x) {
        return (1..x as u32).fold(1.0, |acc, k| acc * f64::from(k));
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let series =
        LANCZOS_COEFFS[1..].iter().enumerate().fold(LANCZOS_COEFFS[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64));
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * series
}

/// `sin(πx)` with argument reduction that keeps zeros at the integers exact.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    let r = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * r).sin()
}

/// `B_{2k}/(2k)!` for `k = 1..=30`, i.e. Bernoulli numbers through `B_60`.
fn bernoulli_over_factorial() -> &'static [f64; 30] {
    static TABLE: OnceLock<[f64; 30]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_{2k}/(2k)! = (-1)^{k+1} 2 ζ(2k) / (2π)^{2k}
        let mut table = [0.0; 30];
        for (idx, slot) in table.iter_mut().enumerate() {
            let k = idx as i32 + 1;
            let zeta_2k = match k {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                _ => {
                    let p = 2 * k;
                    let n_max = 2000.0_f64;
                    let head: f64 = (1..2000).rev().map(|n| f64::from(n).powi(-p)).sum();
                    // Euler-Maclaurin remainder of the sum from n_max on
                    head + n_max.powi(1 - p) / f64::from(p - 1) + 0.5 * n_max.powi(-p)
                }
            };
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *slot = sign * 2.0 * zeta_2k / (2.0 * PI).powi(2 * k);
        }
        table
    })
}

/// Result of a Hurwitz zeta evaluation together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaEvaluation {
    pub value: Complex64,
    /// Truncation estimate of the asymptotic tail plus a rounding bound on
    /// the direct sum.
    pub error_estimate: f64,
    /// Number of leading terms summed directly before the asymptotic tail.
    pub shift: usize,
    /// Number of Bernoulli correction terms used.
    pub corrections: usize,
}

/// Relative accuracy below which the Euler-Maclaurin tail is declared failed.
const ZETA_ACCURACY: f64 = 1e-10;

/// `ζ(z, q) = Σ_{n≥0} (n + q)^{−z}`, analytically continued to `z < 1`.
pub fn hurwitz_zeta(z: f64, q: Complex64) -> Result<Complex64> {
    hurwitz_zeta_eval(z, q, None).map(|e| e.value)
}

/// Like [`hurwitz_zeta`], with diagnostics. `shift` forces the number of
/// directly summed terms; by default it is the smallest `N` with
/// `|q + N| ≥ max(10, |z|)`.
pub fn hurwitz_zeta_eval(z: f64, q: Complex64, shift: Option<usize>) -> Result<ZetaEvaluation> {
    if !z.is_finite() || !q.re.is_finite() || !q.im.is_finite() {
        return Err(domain(format!("zeta arguments must be finite: z={z}, q={q}")));
    }
    if z >= 1.0 {
        return Err(domain(format!("hurwitz_zeta requires z < 1, got {z}")));
    }
    if q.re <= 0.0 {
        return Err(domain(format!("hurwitz_zeta requires Re(q) > 0, got {q}")));
    }

    let min_modulus = 10.0_f64.max(z.abs());
    let mut direct = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut n = 0usize;
    loop {
        let w = q + n as f64;
        let done = match shift {
            Some(s) => n >= s,
            None => w.norm() >= min_modulus,
        };
        if done {
            break;
        }
        let term = w.powf(-z);
        direct += term;
        magnitude += term.norm();
        n += 1;
    }

    let w = q + n as f64;
    let w_neg_z = w.powf(-z);
    let mut tail = w * w_neg_z / (z - 1.0) + 0.5 * w_neg_z;
    magnitude += tail.norm();

    let inv_w = w.inv();
    let inv_w2 = inv_w * inv_w;
    let mut power = w_neg_z * inv_w; // w^{-z-2k+1} for k = 1
    let mut pochhammer = z; // (z)_{2k-1} for k = 1
    let coeffs = bernoulli_over_factorial();
    let mut last = f64::INFINITY;
    let mut used = 0;
    for (k, c) in coeffs.iter().enumerate() {
        let term = power * (c * pochhammer);
        tail += term;
        used = k + 1;
        last = term.norm();
        if last <= 1e-17 * (direct + tail).norm() || last == 0.0 {
            break;
        }
        let m = (2 * k + 2) as f64; // next (z)_{2k+1} = (z)_{2k-1} (z+2k-1)(z+2k)
        pochhammer *= (z + m - 1.0) * (z + m);
        power *= inv_w2;
    }

    let value = direct + tail;
    let error_estimate = last + 8.0 * f64::EPSILON * magnitude;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Accuracy { what: format!("hurwitz_zeta({z}, {q}) overflowed"), estimate: f64::INFINITY });
    }
    if last > ZETA_ACCURACY * value.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Accuracy {
            what: format!("hurwitz_zeta({z}, {q}) tail did not converge"),
            estimate: error_estimate,
        });
    }
    Ok(ZetaEvaluation { value, error_estimate, shift: n, corrections: used })
}
