//! Fresnel integrals `C(x) = ∫₀ˣ cos(πt²/2) dt`, `S(x) = ∫₀ˣ sin(πt²/2) dt`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

const SERIES_MAX: f64 = 1.5;

/// `(C(x), S(x))`, odd in `x`, absolute accuracy about 1e-15.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax < SERIES_MAX {
        series(ax)
    } else {
        continued_fraction(ax)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

fn series(x: f64) -> (f64, f64) {
    // C = Σ (-1)^n (π/2)^{2n} x^{4n+1} / ((2n)! (4n+1))
    // S = Σ (-1)^n (π/2)^{2n+1} x^{4n+3} / ((2n+1)! (4n+3))
    let t = FRAC_PI_2 * x * x;
    let mut term = x; // t^k x / k!
    let (mut c, mut s) = (0.0, 0.0);
    for k in 0..60 {
        let contrib = term / (2 * k + 1) as f64;
        match k % 4 {
            0 => c += contrib,
            1 => s += contrib,
            2 => c -= contrib,
            _ => s -= contrib,
        }
        term *= t / (k + 1) as f64;
        if term.abs() < 1e-18 * c.abs().max(1e-300) {
            break;
        }
    }
    (c, s)
}

/// Modified Lentz evaluation of the complementary error-function continued
/// fraction, valid for x ≥ 1.5.
fn continued_fraction(x: f64) -> (f64, f64) {
    const TINY: f64 = 1e-300;
    let pix2 = PI * x * x;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..200 {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = (a * d + b).inv();
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let phase = Complex64::new((0.5 * pix2).cos(), (0.5 * pix2).sin());
    let cs = Complex64::new(0.5, 0.5) * (Complex64::new(1.0, 0.0) - phase * h);
    (cs.re, cs.im)
}

/// `∫₀ᵁ (C(u) + S(u) - 1) du` in closed form.
pub fn fresnel_sum_antiderivative(u: f64) -> f64 {
    let (c, s) = fresnel(u);
    let arg = FRAC_PI_2 * u * u;
    u * (c + s - 1.0) + (arg.cos() - arg.sin()) / PI - 1.0 / PI
}
