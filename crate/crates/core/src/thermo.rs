//! Anyon energetics: chemical potential from the mediated couplings, the
//! thermal energy of the code, spin-boson error rates and the logarithmic
//! potential of the longitudinal coupling.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::magnon::{chi_zz_r, CouplingMatrix, FMParams};
use crate::numeric::pairwise_sum;

/// μ = Σ_{p′≠p} 2|J_pp′|: the energy cost of flipping plaquette `p` in the
/// anyon-free state.
pub fn chemical_potential(cm: &CouplingMatrix, p: usize) -> f64 {
    let row: Vec<f64> = (0..cm.len())
        .filter(|&q| q != p)
        .map(|q| 2.0 * cm.values[(p, q)].abs())
        .collect();
    pairwise_sum(&row)
}

/// Disk estimate A²L/(4J) of the central-plaquette μ for unscreened couplings.
pub fn disk_chemical_potential(a: f64, l: usize, j: f64) -> f64 {
    a * a * l as f64 / (4.0 * j)
}

/// L² μ / (e^{βμ} + 1).
pub fn thermal_energy(l: usize, mu: f64, beta: f64) -> Result<f64> {
    if mu < 0.0 {
        return Err(Error::Domain(format!(
            "chemical potential must be >= 0, got {mu}"
        )));
    }
    let x = beta * mu;
    // e^{-x}/(1 + e^{-x}) avoids overflow for large x.
    let occ = if x > 0.0 {
        (-x).exp() / (1.0 + (-x).exp())
    } else {
        1.0 / (x.exp() + 1.0)
    };
    Ok((l * l) as f64 * mu * occ)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub kappa_n: f64,
    pub n: u32,
    pub beta: f64,
    pub omega_c: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa_n < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa_n must be >= 0, got {}",
                self.kappa_n
            )));
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter(
                "bath exponent n must be >= 1".into(),
            ));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if !(self.omega_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega_c must be > 0, got {}",
                self.omega_c
            )));
        }
        Ok(())
    }
}

/// γ(ω) = κ_n |ωⁿ / (1 − e^{−βω})| e^{−ω/ω_c}; the removable point ω = 0
/// gives κ₁/β for n = 1 and 0 for n ≥ 2.
pub fn error_rate(omega: f64, np: &NoiseParams) -> f64 {
    if omega == 0.0 {
        return if np.n == 1 { np.kappa_n / np.beta } else { 0.0 };
    }
    let denom = -(-np.beta * omega).exp_m1();
    np.kappa_n * (omega.powi(np.n as i32) / denom).abs() * (-omega / np.omega_c).exp()
}

/// Ratio γ(−A)/A and whether it is below `threshold`.
pub fn adiabaticity_margin(a: f64, np: &NoiseParams, threshold: f64) -> Result<(f64, bool)> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("A must be > 0, got {a}")));
    }
    let ratio = error_rate(-a, np) / a;
    Ok((ratio, ratio < threshold))
}

pub const ADIABATIC_THRESHOLD: f64 = 0.1;

/// Inputs of the longitudinal-coupling chemical potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Longitudinal {
    pub l: usize,
    pub t: f64,
    /// D = 2JS.
    pub d: f64,
    pub a: f64,
    pub s: f64,
    /// Adds the constant 2SA from the −SA Σ W_p term.
    pub include_2sa: bool,
}

impl Longitudinal {
    fn fm(&self) -> FMParams {
        FMParams {
            j: self.d / (2.0 * self.s),
            s: self.s,
            t: self.t,
            ..Default::default()
        }
    }
}

/// Result of the direct lattice evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongitudinalMu {
    pub mu: f64,
    /// Part of μ from the χ_zz couplings (no 2SA offset).
    pub log_part: f64,
    /// c_L = log_part / (A² T / D² · ln(L/2)); tends to 1/(4π) slowly.
    pub c: f64,
}

/// μ for the longitudinal coupling: the central plaquette of an L×L code
/// summed against J_pp′ = −A² χ_zz(r) = −A² T / (16π² D² r²), plus the
/// optional 2SA. The sum grows as (A² T / 4π D²) ln(L/2) + const.
pub fn longitudinal_mu(x: &Longitudinal) -> Result<LongitudinalMu> {
    if x.l < 4 {
        return Err(Error::InvalidParameter(format!(
            "L must be >= 4, got {}",
            x.l
        )));
    }
    if !(x.d > 0.0) || !(x.s > 0.0) || x.t < 0.0 {
        return Err(Error::InvalidParameter("need D > 0, S > 0, T >= 0".into()));
    }
    let fm = x.fm();
    let c0 = (x.l / 2) as i64;
    let mut terms = Vec::with_capacity(x.l * x.l);
    for i in 0..x.l as i64 {
        for j in 0..x.l as i64 {
            let (dx, dy) = (i - c0, j - c0);
            if dx == 0 && dy == 0 {
                continue;
            }
            let r = ((dx * dx + dy * dy) as f64).sqrt();
            terms.push(2.0 * x.a * x.a * chi_zz_r(r, &fm)?);
        }
    }
    let log_part = pairwise_sum(&terms);
    let scale = x.a * x.a * x.t / (x.d * x.d) * (x.l as f64 / 2.0).ln();
    let offset = if x.include_2sa { 2.0 * x.s * x.a } else { 0.0 };
    Ok(LongitudinalMu {
        mu: log_part + offset,
        log_part,
        c: if scale > 0.0 { log_part / scale } else { 0.0 },
    })
}

/// Continuum value of the logarithmic constant.
pub const LONGITUDINAL_C: f64 = 1.0 / (4.0 * PI);
