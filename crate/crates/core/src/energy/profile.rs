//! The cutoff profile `φ`: `1` on `(−∞, 2]`, `0` on `[2 + WIDTH, ∞)`,
//! monotone and `C²` in between, with `(φ′)² ≤ 9φ`.
//!
//! Writing `v = (2 + WIDTH − s)/WIDTH ∈ [0, 1]`, `φ = q(v)²` where `q′` ramps
//! up over `[0, RAMP]` with a cubic smoothstep, stays at `SLOPE`, and ramps
//! back down over `[1 − RAMP, 1]`. Then `(φ′)²/φ = 4q′²/WIDTH²`.

/// Length of the transition interval.
pub const WIDTH: f64 = 0.9;
const RAMP: f64 = 0.2;
const SLOPE: f64 = 1.0 / (1.0 - RAMP);

/// Upper bound of `(φ′)²/φ`, attained on the plateau of `q′`.
pub const RATIO_BOUND: f64 = 4.0 * SLOPE * SLOPE / (WIDTH * WIDTH);

// ∫₀ˣ (3u² − 2u³) du
fn ramp_integral(x: f64) -> f64 {
    x * x * x - 0.5 * x * x * x * x
}

fn ramp(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

fn q(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if v < RAMP {
        SLOPE * RAMP * ramp_integral(v / RAMP)
    } else if v <= 1.0 - RAMP {
        SLOPE * (0.5 * RAMP + (v - RAMP))
    } else if v < 1.0 {
        1.0 - SLOPE * RAMP * ramp_integral((1.0 - v) / RAMP)
    } else {
        1.0
    }
}

fn dq(v: f64) -> f64 {
    if v <= 0.0 || v >= 1.0 {
        0.0
    } else if v < RAMP {
        SLOPE * ramp(v / RAMP)
    } else if v <= 1.0 - RAMP {
        SLOPE
    } else {
        SLOPE * ramp((1.0 - v) / RAMP)
    }
}

fn v_of(s: f64) -> f64 {
    (2.0 + WIDTH - s) / WIDTH
}

pub fn phi(s: f64) -> f64 {
    q(v_of(s)).powi(2)
}

pub fn dphi(s: f64) -> f64 {
    let v = v_of(s);
    -2.0 * q(v) * dq(v) / WIDTH
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> impl Iterator<Item = f64> {
        (0..=40_000).map(|i| 1.5 + 2.0 * i as f64 / 40_000.0)
    }

    #[test]
    fn shape() {
        assert_eq!(phi(1.0), 1.0);
        assert_eq!(phi(2.0), 1.0);
        assert_eq!(phi(2.0 + WIDTH), 0.0);
        assert_eq!(phi(3.0), 0.0);
        assert!(phi(2.0 + WIDTH - 1e-6) > 0.0);
        let mut prev = 1.0;
        for s in samples() {
            assert!(phi(s) <= prev && (0.0..=1.0).contains(&phi(s)));
            prev = phi(s);
        }
    }

    #[test]
    fn derivative_bound_with_margin() {
        assert!(RATIO_BOUND <= 9.0);
        for s in samples() {
            assert!(dphi(s).powi(2) <= RATIO_BOUND * phi(s) * (1.0 + 1e-12) + 1e-300, "{s}");
        }
    }

    #[test]
    fn derivative_matches_difference_quotient_and_is_c2() {
        let h = 1e-5;
        for s in samples() {
            let fd = (phi(s + h) - phi(s - h)) / (2.0 * h);
            assert!((fd - dphi(s)).abs() < 1e-8, "{s}");
        }
        // Second derivative continuous: difference quotients of φ′ agree on
        // both sides of every junction.
        let h = 1e-6;
        let joints = [2.0, 2.0 + RAMP * WIDTH, 2.0 + (1.0 - RAMP) * WIDTH, 2.0 + WIDTH];
        for j in joints {
            let left = (dphi(j) - dphi(j - h)) / h;
            let right = (dphi(j + h) - dphi(j)) / h;
            assert!((left - right).abs() < 1e-3, "{j}: {left} {right}");
        }
    }
}
