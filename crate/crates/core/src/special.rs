// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Special functions.

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Scaled complementary error function `exp(z^2) erfc(z)`.
pub fn erfcx(z: f64) -> f64 {
    if z < 25.0 {
        libm::exp(z * z) * libm::erfc(z)
    } else {
        let r = 1.0 / (z * z);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..7 {
            term *= -(2 * k - 1) as f64 * 0.5 * r;
            sum += term;
        }
        sum * FRAC_1_SQRT_PI / z
    }
}

/// `exp(-tau^2 / (2 s^2)) * erfcx(z)` with `z = (k s^2 / 2 - tau) / (sqrt(2) s)`,
/// evaluated without overflow for either sign of `z`.
pub(crate) fn gauss_erfcx(tau: f64, s: f64, k: f64) -> f64 {
    let z = (0.5 * k * s * s - tau) / (core::f64::consts::SQRT_2 * s);
    if z >= 0.0 {
        erfcx(z) * libm::exp(-tau * tau / (2.0 * s * s))
    } else {
        libm::exp(k * k * s * s / 8.0 - 0.5 * k * tau) * libm::erfc(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfcx_is_continuous_at_switch() {
        let a = erfcx(25.0 - 1e-9);
        let b = erfcx(25.0 + 1e-9);
        assert!((a - b).abs() / a < 1e-10);
    }

    #[test]
    fn erfcx_reference_values() {
        assert!((erfcx(0.0) - 1.0).abs() < 1e-15);
        // exp(1) erfc(1)
        assert!((erfcx(1.0) - 0.427_583_576_155_807).abs() < 1e-14);
        assert!((erfcx(30.0) - 0.018_795_888_861_416_75).abs() < 1e-15);
    }

    #[test]
    fn gauss_erfcx_branches_agree() {
        for &tau in &[-0.3, 0.0, 0.2, 0.5] {
            let (s, k) = (0.2, 3.0);
            let z: f64 = (0.5 * k * s * s - tau) / (core::f64::consts::SQRT_2 * s);
            let direct = libm::exp(z * z - tau * tau / (2.0 * s * s)) * libm::erfc(z);
            assert!((gauss_erfcx(tau, s, k) - direct).abs() < 1e-13 * direct.abs().max(1.0));
        }
    }
}
