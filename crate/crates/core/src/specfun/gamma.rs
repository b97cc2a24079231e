//! Gamma function via a 14-term Lanczos series, with reflection for
//! arguments left of 0.5. Relative error is below 1e-13 on |x| <= 30,
//! which dominates the error budget of every constant built on top.

use super::SpecFunError;

/// Lanczos coefficients for g = 671/128, paired with the series
/// constant 0.999999999999997092. Full f64 accuracy for positive
/// arguments.
const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_SER0: f64 = 0.999_999_999_999_997_092;
const LANCZOS_COF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_502_4;

/// ln Gamma(x) for x > 0.
fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let tmp = x + LANCZOS_G;
    let mut ser = LANCZOS_SER0;
    let mut y = x;
    for c in LANCZOS_COF {
        y += 1.0;
        ser += c / y;
    }
    (x + 0.5) * tmp.ln() - tmp + (SQRT_TWO_PI * ser / x).ln()
}

/// sin(pi * x) with exact range reduction; `x - round(x)` is exact in
/// f64, so the argument of `sin` stays small and accurate near the
/// zeros where the reflection formula is most sensitive.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (std::f64::consts::PI * r).sin();
    if (n as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma(x) for real non-pole arguments.
pub fn gamma_fn(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() || is_non_positive_integer(x) {
        return Err(SpecFunError::GammaPole(x));
    }
    if x >= 0.5 {
        Ok(ln_gamma_pos(x).exp())
    } else {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        let denom = sin_pi(x) * ln_gamma_pos(1.0 - x).exp();
        Ok(std::f64::consts::PI / denom)
    }
}
