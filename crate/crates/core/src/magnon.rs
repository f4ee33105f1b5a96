//! Magnons of the cubic-lattice Heisenberg ferromagnet: dispersion,
//! static susceptibilities and the Yukawa coupling they mediate between
//! plaquettes.
//!
//! Units: k_B = ħ = 1, lattice constant 1. The ordered moment points along
//! −z (`S^z = −S + n`), which is what a positive `h_z Σ S^z` selects.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct FMParams {
    pub j: f64,
    pub s: f64,
    pub h_z: f64,
    pub lambda: usize,
    pub a: f64,
    pub t: f64,
    /// Spin stiffness override; `None` means the one-magnon 2JS².
    pub rho: Option<f64>,
}

impl Default for FMParams {
    fn default() -> Self {
        Self {
            j: 1.0,
            s: 0.5,
            h_z: 1e-3,
            lambda: 64,
            a: 1.0,
            t: 0.0,
            rho: None,
        }
    }
}

impl FMParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "J must be > 0, got {}",
                self.j
            )));
        }
        if !(self.s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "S must be > 0, got {}",
                self.s
            )));
        }
        if self.h_z < 0.0 || !self.h_z.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "h_z must be >= 0, got {}",
                self.h_z
            )));
        }
        if self.lambda < 2 {
            return Err(Error::InvalidParameter(format!(
                "Lambda must be >= 2, got {}",
                self.lambda
            )));
        }
        if self.t < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "T must be >= 0, got {}",
                self.t
            )));
        }
        Ok(())
    }

    /// ρ, defaulting to 2JS².
    pub fn stiffness(&self) -> f64 {
        self.rho.unwrap_or(2.0 * self.j * self.s * self.s)
    }

    /// D = 2JS.
    pub fn diffusion(&self) -> f64 {
        2.0 * self.j * self.s
    }

    /// Number of sites Λ³.
    pub fn sites(&self) -> usize {
        self.lambda.pow(3)
    }
}

/// ω_k = 4JS(3 − Σ cos k_i).
pub fn dispersion(k: [f64; 3], p: &FMParams) -> f64 {
    4.0 * p.j * p.s * (3.0 - k.iter().map(|x| x.cos()).sum::<f64>())
}

/// ε_k = ω_k + h_z.
pub fn gapped_dispersion(k: [f64; 3], p: &FMParams) -> f64 {
    dispersion(k, p) + p.h_z
}

fn norm2(q: [f64; 3]) -> f64 {
    q.iter().map(|x| x * x).sum()
}

/// χ_xx(q) = S / ((ρ/S)|q|² + h_z); with ρ = 2JS² this is S/(2JS q² + h_z).
pub fn chi_xx_q(q: [f64; 3], p: &FMParams) -> f64 {
    p.s / (p.stiffness() / p.s * norm2(q) + p.h_z)
}

/// L_h = √(ρ / (S h_z)).
pub fn magnetic_length(p: &FMParams) -> Result<f64> {
    if !(p.h_z > 0.0) {
        return Err(Error::Domain(format!(
            "magnetic length needs h_z > 0, got {}",
            p.h_z
        )));
    }
    Ok((p.stiffness() / (p.s * p.h_z)).sqrt())
}

/// Screening length, infinite at h_z = 0.
fn screening_length(p: &FMParams) -> f64 {
    magnetic_length(p).unwrap_or(f64::INFINITY)
}

/// Continuum transform of [`chi_xx_q`]: S² e^{−r/L_h} / (4πρ r), i.e.
/// e^{−r/L_h}/(8πJ r) at one-magnon order.
pub fn chi_xx_r(r: f64, p: &FMParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("chi_xx_r needs r > 0, got {r}")));
    }
    Ok(p.s * p.s * (-r / screening_length(p)).exp() / (4.0 * PI * p.stiffness() * r))
}

/// [`chi_xx_r`] summed over the periodic images r + Λn of a Λ³ box, the
/// continuum counterpart of [`chi_xx_r_lattice`].
pub fn chi_xx_r_periodic(r_vec: [f64; 3], p: &FMParams) -> Result<f64> {
    let lh = magnetic_length(p)?;
    let lam = p.lambda as f64;
    // Images beyond n·Λ are suppressed by e^{−nΛ/L_h} < 1e-12.
    let n = (28.0 * lh / lam).ceil() as i64 + 1;
    let mut terms = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                let d = [
                    r_vec[0] + lam * i as f64,
                    r_vec[1] + lam * j as f64,
                    r_vec[2] + lam * k as f64,
                ];
                let r = norm2(d).sqrt();
                if r > 0.0 {
                    terms.push(chi_xx_r(r, p)?);
                }
            }
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Per-axis table of `cos(2πn r / Λ)` and `cos(2πn/Λ)`.
fn axis_tables(lambda: usize, r: i64) -> (Vec<f64>, Vec<f64>) {
    let step = 2.0 * PI / lambda as f64;
    let cos_kr = (0..lambda)
        .map(|n| (step * n as f64 * r as f64).cos())
        .collect();
    let cos_k = (0..lambda).map(|n| (step * n as f64).cos()).collect();
    (cos_kr, cos_k)
}

/// Brillouin-zone sum (1/Λ³) Σ_k S/ε_k · cos(k·r) on the Λ³ lattice with the
/// full cosine dispersion.
///
/// The k = 0 term is S/h_z, so h_z = 0 is rejected.
pub fn chi_xx_r_lattice(r_vec: [i64; 3], p: &FMParams) -> Result<f64> {
    p.validate()?;
    if p.h_z <= 0.0 {
        return Err(Error::GaplessDivergence(
            "the k = 0 term of the lattice susceptibility diverges at h_z = 0".into(),
        ));
    }
    let lam = p.lambda;
    let tables: Vec<(Vec<f64>, Vec<f64>)> = r_vec.iter().map(|&r| axis_tables(lam, r)).collect();
    let (cx, kx) = &tables[0];
    let (cy, ky) = &tables[1];
    let (cz, kz) = &tables[2];
    let js4 = 4.0 * p.j * p.s;
    let slabs: Vec<f64> = (0..lam)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(lam * lam);
            for j in 0..lam {
                let cij = cx[i] * cy[j];
                let kij = kx[i] + ky[j];
                for k in 0..lam {
                    let eps = js4 * (3.0 - kij - kz[k]) + p.h_z;
                    row.push(p.s / eps * cij * cz[k]);
                }
            }
            pairwise_sum(&row)
        })
        .collect();
    Ok(pairwise_sum(&slabs) / p.sites() as f64)
}

/// Plaquette positions and their mediated couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub positions: Vec<[f64; 2]>,
    pub values: DMatrix<f64>,
}

impl CouplingMatrix {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the plaquette nearest the geometric centre.
    pub fn central_index(&self) -> usize {
        let n = self.positions.len() as f64;
        let cx = self.positions.iter().map(|p| p[0]).sum::<f64>() / n;
        let cy = self.positions.iter().map(|p| p[1]).sum::<f64>() / n;
        let d = |p: &[f64; 2]| (p[0] - cx).powi(2) + (p[1] - cy).powi(2);
        (0..self.positions.len())
            .min_by(|&a, &b| d(&self.positions[a]).total_cmp(&d(&self.positions[b])))
            .unwrap_or(0)
    }

    /// (row, col, value) rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,x_row,y_row,x_col,y_col,value\n");
        for i in 0..self.len() {
            for j in 0..self.len() {
                let (a, b) = (self.positions[i], self.positions[j]);
                out.push_str(&format!(
                    "{i},{j},{},{},{},{},{:.12e}\n",
                    a[0],
                    a[1],
                    b[0],
                    b[1],
                    self.values[(i, j)]
                ));
            }
        }
        out
    }
}

/// J_pp′ = −A² χ_xx(|R_p − R_p′|) = −(A²/8πJ) e^{−r/L_h}/r for plaquettes on
/// an L×L grid; h_z = 0 means no screening.
pub fn coupling_matrix(a: f64, l: usize, p: &FMParams) -> Result<CouplingMatrix> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!(
            "code size L must be >= 2, got {l}"
        )));
    }
    let positions: Vec<[f64; 2]> = (0..l)
        .flat_map(|i| (0..l).map(move |j| [i as f64, j as f64]))
        .collect();
    let n = positions.len();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = ((positions[i][0] - positions[j][0]).powi(2)
                + (positions[i][1] - positions[j][1]).powi(2))
            .sqrt();
            let v = -a * a * chi_xx_r(r, p)?;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(CouplingMatrix { positions, values })
}

/// A value with an optional validity warning.
#[derive(Debug, Clone, PartialEq)]
pub struct Checked {
    pub value: f64,
    pub warning: Option<String>,
}

/// χ_zz(q) = T / (8 D² |q|), D = 2JS, valid for h_z ≪ D q² ≪ T.
pub fn chi_zz_q(q: [f64; 3], p: &FMParams) -> Result<Checked> {
    let qn = norm2(q).sqrt();
    if !(qn > 0.0) {
        return Err(Error::Domain("chi_zz_q is singular at q = 0".into()));
    }
    let d = p.diffusion();
    let dq2 = d * qn * qn;
    let warning = if !(p.h_z < dq2 && dq2 < p.t) {
        Some(format!(
            "outside validity window h_z << D q^2 << T (h_z = {:e}, D q^2 = {:e}, T = {:e})",
            p.h_z, dq2, p.t
        ))
    } else {
        None
    };
    Ok(Checked {
        value: p.t / (8.0 * d * d * qn),
        warning,
    })
}

/// Real-space transform of [`chi_zz_q`]: T / (16π² D² r²).
pub fn chi_zz_r(r: f64, p: &FMParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("chi_zz_r needs r > 0, got {r}")));
    }
    let d = p.diffusion();
    Ok(p.t / (16.0 * PI * PI * d * d * r * r))
}

/// Magnon gap increase h_z′ − h_z = A L² / Λ³ from the longitudinal coupling.
pub fn gap_shift(a: f64, l: usize, p: &FMParams) -> f64 {
    a * (l * l) as f64 / p.sites() as f64
}

/// Table rows `|q|, chi_xx(q)` along the x axis.
pub fn chi_q_table(q_values: &[f64], p: &FMParams) -> Vec<(f64, f64)> {
    q_values
        .iter()
        .map(|&q| (q, chi_xx_q([q, 0.0, 0.0], p)))
        .collect()
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
    fn dispersion_examples() {
        let p = fm(0.0, 8);
        assert_eq!(dispersion([0.0; 3], &p), 0.0);
        assert!((dispersion([PI; 3], &p) - 12.0).abs() < 1e-12);
        for i in 1..=20 {
            let k = 0.01 * i as f64;
            let q = [k / 3f64.sqrt(); 3];
            let rel = dispersion(q, &p) / (2.0 * p.j * p.s * k * k) - 1.0;
            assert!(rel.abs() < 0.01);
        }
    }

    #[test]
    fn chi_xx_q_examples() {
        assert!((chi_xx_q([0.0; 3], &fm(0.01, 8)) - 50.0).abs() < 1e-12);
        assert!((chi_xx_q([0.1, 0.0, 0.0], &fm(0.0, 8)) - 50.0).abs() < 1e-10);
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let v = chi_xx_q([0.05 * i as f64, 0.0, 0.0], &fm(0.01, 8));
            assert!(v < prev);
            prev = v;
        }
        assert!(chi_xx_q([0.1, 0.0, 0.0], &fm(0.02, 8)) < chi_xx_q([0.1, 0.0, 0.0], &fm(0.01, 8)));
    }

    #[test]
    fn magnetic_length_examples() {
        assert!((magnetic_length(&fm(0.01, 8)).unwrap() - 10.0).abs() < 1e-12);
        assert!((magnetic_length(&fm(0.04, 8)).unwrap() - 5.0).abs() < 1e-12);
        assert!(magnetic_length(&fm(0.0, 8)).is_err());
        // h_z ∝ 1/L⁴ gives L_h ∝ L².
        let lh = |l: f64| magnetic_length(&fm(1.0 / l.powi(4), 8)).unwrap();
        assert!((lh(4.0) / lh(2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn chi_xx_r_examples() {
        let v = chi_xx_r(2.0, &fm(0.0, 8)).unwrap();
        assert!((v - 1.989_436_788_648_691_7e-2).abs() < 1e-15);
        let p = fm(0.01, 8);
        let lh = magnetic_length(&p).unwrap();
        let ratio = chi_xx_r(lh, &p).unwrap() * 8.0 * PI * lh;
        assert!((ratio - (-1f64).exp()).abs() < 1e-14);
        assert!(chi_xx_r(0.0, &p).is_err());
    }

    #[test]
    fn lattice_sum_basics() {
        let p = fm(1e-3, 8);
        assert!(matches!(
            chi_xx_r_lattice([1, 0, 0], &fm(0.0, 8)),
            Err(Error::GaplessDivergence(_))
        ));
        let r0 = chi_xx_r_lattice([0, 0, 0], &p).unwrap();
        assert!(r0.is_finite() && r0 > 0.0);
        // Periodic translation invariance.
        let a = chi_xx_r_lattice([3, 1, 0], &p).unwrap();
        let b = chi_xx_r_lattice([3 - 8, 1 + 8, 0], &p).unwrap();
        let c = chi_xx_r_lattice([1, 0, 3], &p).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs());
        assert!((a - c).abs() < 1e-13 * a.abs());
    }

    #[test]
    fn lattice_sum_at_lambda_32() {
        let p = fm(1e-3, 32);
        let lat = chi_xx_r_lattice([4, 0, 0], &p).unwrap();
        let per = chi_xx_r_periodic([4.0, 0.0, 0.0], &p).unwrap();
        assert!(((lat - per) / per).abs() < 0.10, "{lat} vs {per}");
    }

    #[test]
    fn coupling_matrix_properties() {
        let p = fm(0.0, 8);
        let cm = coupling_matrix(0.1, 4, &p).unwrap();
        let nn = cm.values[(0, 1)];
        assert!((nn + 0.01 / (8.0 * PI)).abs() < 1e-16);
        assert!((nn + 3.978_873_577_297_384e-4).abs() < 1e-12);
        for i in 0..cm.len() {
            assert_eq!(cm.values[(i, i)], 0.0);
            for j in 0..cm.len() {
                assert_eq!(cm.values[(i, j)], cm.values[(j, i)]);
                if i != j {
                    assert!(cm.values[(i, j)] < 0.0);
                }
            }
        }
        let cm2 = coupling_matrix(0.2, 4, &p).unwrap();
        assert!((&cm2.values - cm.values.scale(4.0)).amax() < 1e-18);
    }

    #[test]
    fn yukawa_identity() {
        let p = fm(0.003, 8);
        let lh = magnetic_length(&p).unwrap();
        let a = 0.07;
        let cm = coupling_matrix(a, 5, &p).unwrap();
        for i in 0..cm.len() {
            for j in 0..cm.len() {
                if i == j {
                    continue;
                }
                let (x, y) = (cm.positions[i], cm.positions[j]);
                let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
                let id = -cm.values[(i, j)] * 8.0 * PI * p.j / (a * a) * r * (r / lh).exp();
                assert!((id - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chi_zz_examples() {
        let mut p = fm(0.0, 8);
        p.t = 0.1;
        let v = chi_zz_q([0.1, 0.0, 0.0], &p).unwrap();
        assert!((v.value - 0.125).abs() < 1e-14);
        let v2 = chi_zz_q([0.2, 0.0, 0.0], &p).unwrap();
        assert!((v2.value - 0.0625).abs() < 1e-14);
        p.t = 0.0;
        let z = chi_zz_q([0.3, 0.0, 0.0], &p).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(z.warning.is_some());
        assert!(chi_zz_q([0.0; 3], &p).is_err());
        p.t = 1.0;
        p.h_z = 1e-4;
        assert!(chi_zz_q([0.1, 0.0, 0.0], &p).unwrap().warning.is_none());
    }

    #[test]
    fn gap_shift_examples() {
        let p = fm(0.0, 64);
        assert!((gap_shift(0.1, 4, &p) - 6.103_515_625e-6).abs() < 1e-18);
        assert!(gap_shift(0.1, 4, &fm(0.0, 1024)) < 1e-8);
        // h_z ∝ 1/L⁴ and Λ ∝ L³: shift/h_z ∝ 1/L³.
        let ratio = |l: usize| gap_shift(0.1, l, &fm(0.0, l * l * l)) * (l as f64).powi(4);
        assert!((ratio(2) / ratio(4) - 8.0).abs() < 1e-9);
    }
}
