//! Tilt ⟨S^x_i(t)⟩ of the ferromagnet spins under the code's transverse
//! field after a sudden switch-on, in the one-magnon approximation.
//!
//! Three evaluations are provided: the Brillouin-zone lattice sum, the
//! continuum Fresnel-integral form, and its asymptotic regimes (infinite
//! code, distant spin).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::magnon::FMParams;
use crate::numeric::pairwise_sum;
use crate::special::{fresnel, fresnel_sum_antiderivative};

/// Plaquettes coupled to the ferromagnet, all in the plane z = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeGeometry {
    /// `side × side` plaquettes at integer positions, centred on the origin
    /// (the origin is a plaquette).
    Square { side: usize },
    /// Continuum disk of unit plaquette density; only spins on its axis.
    Disk { radius: f64 },
    /// Explicit plaquette positions.
    Plaquettes(Vec<[f64; 3]>),
}

impl CodeGeometry {
    /// Discrete plaquette positions; `None` for the continuum disk.
    pub fn positions(&self) -> Option<Vec<[f64; 3]>> {
        match self {
            CodeGeometry::Square { side } => {
                let c = (*side / 2) as f64;
                Some(
                    (0..*side)
                        .flat_map(|i| (0..*side).map(move |j| [i as f64 - c, j as f64 - c, 0.0]))
                        .collect(),
                )
            }
            CodeGeometry::Disk { .. } => None,
            CodeGeometry::Plaquettes(p) => Some(p.clone()),
        }
    }
}

/// The spin one lattice unit above the plaquette at the origin.
pub const ADJACENT_SPIN: [f64; 3] = [0.0, 0.0, 1.0];

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Continuum form
/// (A/πJ) Σ_p [C(u_p) + S(u_p) − 1] / r_p, u_p = r_p / √(4πJSt).
///
/// For the disk the sum becomes 2π ∫ (C + S − 1) dr between the spin height
/// and the rim distance, evaluated in closed form.
pub fn sx_fresnel(
    site: [f64; 3],
    t: f64,
    a: f64,
    code: &CodeGeometry,
    p: &FMParams,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("sx_fresnel needs t > 0, got {t}")));
    }
    let ell = (4.0 * PI * p.j * p.s * t).sqrt();
    let pref = a / (PI * p.j);
    match code {
        CodeGeometry::Disk { radius } => {
            if site[0] != 0.0 || site[1] != 0.0 {
                return Err(Error::Domain(
                    "disk geometry supports spins on its axis only".into(),
                ));
            }
            let h = site[2].abs();
            let rim = (radius * radius + h * h).sqrt();
            let inner = fresnel_sum_antiderivative(h / ell);
            let outer = fresnel_sum_antiderivative(rim / ell);
            Ok(pref * 2.0 * PI * ell * (outer - inner))
        }
        _ => {
            let pos = code.positions().expect("discrete geometry");
            let mut terms = Vec::with_capacity(pos.len());
            for q in pos {
                let r = dist(site, q);
                if r == 0.0 {
                    return Err(Error::Domain(format!(
                        "spin {site:?} coincides with a plaquette"
                    )));
                }
                let (c, s) = fresnel(r / ell);
                terms.push((c + s - 1.0) / r);
            }
            Ok(pref * pairwise_sum(&terms))
        }
    }
}

/// Brillouin-zone evaluations of
/// (4SA/N_s) Σ_p Σ_k (1/ε_k)[cos(k·Δ_p − ε_k t) − cos(k·Δ_p)], Δ_p = R_i − R_p,
/// for several times at once.
pub fn sx_lattice_series(
    site: [i64; 3],
    times: &[f64],
    a: f64,
    plaquettes: &[[i64; 3]],
    p: &FMParams,
) -> Result<Vec<f64>> {
    p.validate()?;
    if p.h_z <= 0.0 {
        return Err(Error::GaplessDivergence(
            "the lattice backaction sum includes k = 0 and needs h_z > 0".into(),
        ));
    }
    if let Some(t) = times.iter().find(|t| **t < 0.0) {
        return Err(Error::Domain(format!("times must be >= 0, got {t}")));
    }
    let lam = p.lambda;
    let step = 2.0 * PI / lam as f64;
    let cos_k: Vec<f64> = (0..lam).map(|n| (step * n as f64).cos()).collect();
    let deltas: Vec<[f64; 3]> = plaquettes
        .iter()
        .map(|q| [0, 1, 2].map(|d| (site[d] - q[d]) as f64))
        .collect();
    let js4 = 4.0 * p.j * p.s;
    let slabs: Vec<Vec<f64>> = (0..lam)
        .into_par_iter()
        .map(|i| {
            let mut acc: Vec<Vec<f64>> = vec![Vec::with_capacity(lam * lam); times.len()];
            for j in 0..lam {
                for k in 0..lam {
                    let kv = [step * i as f64, step * j as f64, step * k as f64];
                    let eps = js4 * (3.0 - cos_k[i] - cos_k[j] - cos_k[k]) + p.h_z;
                    let f: Complex64 = deltas
                        .iter()
                        .map(|d| {
                            Complex64::from_polar(1.0, kv[0] * d[0] + kv[1] * d[1] + kv[2] * d[2])
                        })
                        .sum();
                    for (n, &t) in times.iter().enumerate() {
                        let rot = Complex64::from_polar(1.0, -eps * t);
                        acc[n].push(((f * rot).re - f.re) / eps);
                    }
                }
            }
            acc.iter().map(|v| pairwise_sum(v)).collect()
        })
        .collect();
    let norm = 4.0 * p.s * a / p.sites() as f64;
    Ok((0..times.len())
        .map(|n| {
            let per: Vec<f64> = slabs.iter().map(|s| s[n]).collect();
            norm * pairwise_sum(&per)
        })
        .collect())
}

/// Single-time convenience wrapper of [`sx_lattice_series`].
pub fn sx_lattice_sum(
    site: [i64; 3],
    t: f64,
    a: f64,
    plaquettes: &[[i64; 3]],
    p: &FMParams,
) -> Result<f64> {
    Ok(sx_lattice_series(site, &[t], a, plaquettes, p)?[0])
}

/// Integer plaquette positions of a square code (see [`CodeGeometry::Square`]).
pub fn square_plaquettes(side: usize) -> Vec<[i64; 3]> {
    let c = (side / 2) as i64;
    (0..side as i64)
        .flat_map(|i| (0..side as i64).map(move |j| [i - c, j - c, 0]))
        .collect()
}

/// Infinite code, adjacent spin: −4A √(St / (πJ)).
pub fn sx_infinite_code(t: f64, a: f64, p: &FMParams) -> f64 {
    -4.0 * a * (p.s * t / (PI * p.j)).sqrt()
}

/// Spin at distance d from an infinite code, leading order in 1/d:
/// (16A/d²) √(JS³t³/π) [cos(d²/8JSt) + sin(d²/8JSt)].
pub fn sx_distance(t: f64, d: f64, a: f64, p: &FMParams) -> Result<f64> {
    if !(t > 0.0) || !(d > 0.0) {
        return Err(Error::Domain(format!(
            "sx_distance needs t > 0 and d > 0, got t = {t}, d = {d}"
        )));
    }
    let x = d * d / (8.0 * p.j * p.s * t);
    Ok(distance_envelope(t, d, a, p) * (x.cos() + x.sin()))
}

/// Amplitude (16A/d²) √(JS³t³/π) of [`sx_distance`].
pub fn distance_envelope(t: f64, d: f64, a: f64, p: &FMParams) -> f64 {
    16.0 * a / (d * d) * (p.j * p.s.powi(3) * t.powi(3) / PI).sqrt()
}

/// t_r = πJS / (16A²), where the infinite-code tilt reaches S.
pub fn refresh_time(a: f64, p: &FMParams) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("A must be > 0, got {a}")));
    }
    Ok(PI * p.j * p.s / (16.0 * a * a))
}

/// Order-of-magnitude refresh time JS/A².
pub fn refresh_time_scale(a: f64, p: &FMParams) -> f64 {
    p.j * p.s / (a * a)
}

/// ⟨S^x⟩ against time with a one-magnon validity flag per point.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// False where |value| > S.
    pub valid: Vec<bool>,
    pub meta: Vec<(String, String)>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, s: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptySeries("time series has no points".into()));
        }
        if times.len() != values.len() {
            return Err(Error::InvalidParameter(
                "times and values differ in length".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "times must be strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value {v} in time series"
            )));
        }
        let valid = values.iter().map(|v| v.abs() <= s).collect();
        Ok(Self {
            times,
            values,
            valid,
            meta: Vec::new(),
        })
    }

    /// Points that satisfy the one-magnon bound.
    pub fn valid_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.values)
            .zip(&self.valid)
            .filter(|(_, ok)| **ok)
            .map(|((t, v), _)| (*t, *v))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,sx,valid\n");
        for ((t, v), ok) in self.times.iter().zip(&self.values).zip(&self.valid) {
            out.push_str(&format!("{t:.12e},{v:.12e},{}\n", *ok as u8));
        }
        out
    }
}

/// `n` equally spaced positive times ending at `t_max`.
pub fn time_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || n == 0 {
        return Err(Error::EmptySeries(format!(
            "no positive times up to t_max = {t_max} with {n} points"
        )));
    }
    Ok((1..=n).map(|k| t_max * k as f64 / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(h_z: f64, lambda: usize) -> FMParams {
        FMParams {
            h_z,
            lambda,
            ..Default::default()
        }
    }

    #[test]
    fn lattice_sum_vanishes_at_zero_time_and_is_negative() {
        let p = fm(1e-4, 12);
        let code = [[0, 0, 0]];
        assert_eq!(sx_lattice_sum([0, 0, 1], 0.0, 0.1, &code, &p).unwrap(), 0.0);
        let v = sx_lattice_series([0, 0, 1], &[0.5, 1.0, 2.0, 4.0], 0.1, &code, &p).unwrap();
        assert!(v.iter().all(|x| *x < 0.0), "{v:?}");
        assert!(matches!(
            sx_lattice_sum([0, 0, 1], 1.0, 0.1, &code, &fm(0.0, 12)),
            Err(Error::GaplessDivergence(_))
        ));
    }

    #[test]
    fn lattice_sum_is_linear_in_plaquettes() {
        let p = fm(1e-3, 10);
        let a = sx_lattice_sum([0, 0, 1], 2.0, 0.1, &[[0, 0, 0]], &p).unwrap();
        let b = sx_lattice_sum([0, 0, 1], 2.0, 0.1, &[[1, 0, 0]], &p).unwrap();
        let ab = sx_lattice_sum([0, 0, 1], 2.0, 0.1, &[[0, 0, 0], [1, 0, 0]], &p).unwrap();
        assert!((ab - a - b).abs() < 1e-14);
    }

    #[test]
    fn fresnel_limits() {
        let p = fm(0.0, 8);
        let code = CodeGeometry::Square { side: 4 };
        let pos = code.positions().unwrap();
        assert!(sx_fresnel(ADJACENT_SPIN, 0.0, 0.1, &code, &p).is_err());
        assert!(sx_fresnel([0.0, 0.0, 0.0], 1.0, 0.1, &code, &p).is_err());
        let long = sx_fresnel(ADJACENT_SPIN, 1e12, 0.1, &code, &p).unwrap();
        let static_sum: f64 = pos.iter().map(|q| 1.0 / dist(ADJACENT_SPIN, *q)).sum();
        let expected = -0.1 / PI * static_sum;
        assert!(((long - expected) / expected).abs() < 1e-4);
    }

    #[test]
    fn disk_reproduces_infinite_code_law() {
        let p = fm(0.0, 8);
        let a = 0.01;
        for t in [1.0, 5.0, 20.0] {
            let ell = (4.0 * PI * p.j * p.s * t).sqrt();
            let disk = CodeGeometry::Disk { radius: 20.0 * ell };
            let v = sx_fresnel([0.0, 0.0, 0.0], t, a, &disk, &p).unwrap();
            let target = sx_infinite_code(t, a, &p);
            assert!(
                ((v - target) / target).abs() < 0.02,
                "t={t}: {v} vs {target}"
            );
        }
        assert!(sx_fresnel(
            [1.0, 0.0, 0.0],
            1.0,
            a,
            &CodeGeometry::Disk { radius: 5.0 },
            &p
        )
        .is_err());
    }

    #[test]
    fn infinite_code_examples() {
        let p = fm(0.0, 8);
        let v = sx_infinite_code(100.0, 0.01, &p);
        assert!((v + 0.159_576_912_160_573_1).abs() < 1e-12);
        assert!((sx_infinite_code(400.0, 0.01, &p) / v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let p = fm(0.0, 8);
        let (t, a) = (2.0, 0.1);
        let e1 = distance_envelope(t, 3.0, a, &p);
        let e2 = distance_envelope(t, 6.0, a, &p);
        assert!((e1 / e2 - 4.0).abs() < 1e-12);
        // d²/(8JSt) = π/4 gives the extremal bracket √2.
        let d = (PI / 4.0 * 8.0 * p.j * p.s * t).sqrt();
        let v = sx_distance(t, d, a, &p).unwrap();
        assert!((v / distance_envelope(t, d, a, &p) - 2f64.sqrt()).abs() < 1e-12);
        assert!(sx_distance(0.0, 1.0, a, &p).is_err());
    }

    #[test]
    fn distance_asymptote_matches_disk() {
        let p = fm(0.0, 8);
        let (t, a) = (1.0, 0.1);
        let scale = (8.0 * p.j * p.s * t).sqrt();
        for k in 0..20 {
            let d = 4.0 * scale + 0.37 * k as f64;
            let ell = (4.0 * PI * p.j * p.s * t).sqrt();
            let disk = CodeGeometry::Disk {
                radius: 400.0 * ell + 20.0 * d,
            };
            let full = sx_fresnel([0.0, 0.0, d], t, a, &disk, &p).unwrap();
            let asym = sx_distance(t, d, a, &p).unwrap();
            let env = distance_envelope(t, d, a, &p) * 2f64.sqrt();
            assert!((full - asym).abs() < 0.1 * env, "d={d}: {full} vs {asym}");
        }
    }

    #[test]
    fn refresh_time_examples() {
        let p = fm(0.0, 8);
        let tr = refresh_time(0.1, &p).unwrap();
        assert!((tr - 9.817_477_042_468_104).abs() < 1e-12);
        assert!((refresh_time(0.05, &p).unwrap() / tr - 4.0).abs() < 1e-12);
        assert!((sx_infinite_code(tr, 0.1, &p) + p.s).abs() < 1e-12);
        assert!(refresh_time(0.0, &p).is_err());
        assert!(refresh_time_scale(0.1, &p) > tr);
    }

    #[test]
    fn time_series_flags_and_errors() {
        let ts = TimeSeries::new(vec![1.0, 2.0, 3.0], vec![-0.1, -0.4, -0.7], 0.5).unwrap();
        assert_eq!(ts.valid, vec![true, true, false]);
        assert_eq!(ts.valid_points().count(), 2);
        assert_eq!(ts.to_csv().lines().count(), 4);
        assert!(matches!(
            TimeSeries::new(vec![], vec![], 0.5),
            Err(Error::EmptySeries(_))
        ));
        assert!(TimeSeries::new(vec![1.0, 1.0], vec![0.0, 0.0], 0.5).is_err());
        assert!(TimeSeries::new(vec![1.0], vec![f64::NAN], 0.5).is_err());
        assert!(matches!(time_grid(0.0, 10), Err(Error::EmptySeries(_))));
        assert_eq!(time_grid(2.0, 4).unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
    }
}
