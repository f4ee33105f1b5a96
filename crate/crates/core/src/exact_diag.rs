//! Exact diagonalization oracle for the plaquette gadget.
//!
//! Every code-qubit operator in the gadget is a σ^x, so the four code
//! eigenvalues are conserved. Each sector leaves an 8×8 problem on the
//! mediators f, g, u, with `S_p^x` replaced by a classical number `s`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::least_squares;
use crate::pauli::{to_dense, DenseOperator, OperatorSum, Pauli, PauliTerm};
use crate::sw::{gadget_hamiltonian, EffectiveCoefficients, FmSpin, GadgetSpec};

/// Gap below which a sector ground state counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

pub const DEFAULT_S_VALUES: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// σ^x eigenvalues of the code qubits plus the classical `S_p^x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorKey {
    pub s_a: i8,
    pub s_b: i8,
    pub s_c: i8,
    pub s_d: i8,
    pub s: f64,
}

impl SectorKey {
    pub fn new(signs: [i8; 4], s: f64) -> Result<Self> {
        if signs.iter().any(|v| v.abs() != 1) {
            return Err(Error::InvalidParameter(format!(
                "sector signs must be ±1, got {signs:?}"
            )));
        }
        Ok(Self {
            s_a: signs[0],
            s_b: signs[1],
            s_c: signs[2],
            s_d: signs[3],
            s,
        })
    }

    /// All sixteen sign patterns at fixed `s`.
    pub fn all(s: f64) -> Vec<SectorKey> {
        (0..16u8)
            .map(|m| {
                let bit = |k: u8| if m >> k & 1 == 1 { -1 } else { 1 };
                SectorKey {
                    s_a: bit(3),
                    s_b: bit(2),
                    s_c: bit(1),
                    s_d: bit(0),
                    s,
                }
            })
            .collect()
    }

    pub fn u(&self) -> f64 {
        (self.s_a * self.s_b) as f64
    }

    pub fn v(&self) -> f64 {
        (self.s_c * self.s_d) as f64
    }

    pub fn r(&self) -> f64 {
        self.u() + self.v()
    }

    pub fn w(&self) -> f64 {
        self.u() * self.v()
    }
}

impl fmt::Display for SectorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:+},{:+},{:+},{:+}; s={})",
            self.s_a, self.s_b, self.s_c, self.s_d, self.s
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpectrum {
    pub key: SectorKey,
    pub ground_energy: f64,
    pub gap_to_excited: f64,
}

/// Eigendecomposition of a real symmetric matrix together with the
/// reconstruction residual max |M - VΛVᵀ| / ‖M‖.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub reconstruction_residual: f64,
}

pub fn symmetric_eigen(m: &DMatrix<f64>) -> Eigen {
    let eig = m.clone().symmetric_eigen();
    let recon = eig.recompose();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let residual = (&recon - m).amax() / scale;
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    Eigen {
        values,
        vectors,
        reconstruction_residual: residual,
    }
}

/// Real part of a dense operator; the gadget Hamiltonians are real.
pub fn real_part(d: &DenseOperator) -> DMatrix<f64> {
    d.matrix.map(|z| z.re)
}

/// Replaces `X_site` by the eigenvalue `value` in every term.
fn fix_x(h: &OperatorSum, site: &str, value: f64) -> OperatorSum {
    let terms = h
        .terms()
        .iter()
        .map(|t| match t.letter(site) {
            Some(Pauli::X) => t.without_site(site).mul(&PauliTerm::identity(value)),
            Some(_) => panic!("gadget carries a non-X letter on code site {site}"),
            None => t.clone(),
        })
        .collect();
    OperatorSum::from_terms_raw(terms).simplify()
}

/// 8×8 mediator block (tensor order f, g, u) of the gadget in one sector.
pub fn sector_hamiltonian(spec: &GadgetSpec, key: &SectorKey) -> DenseOperator {
    let s = &spec.sites;
    let mut h = gadget_hamiltonian(spec, FmSpin::Scalar(key.s));
    for (site, v) in [
        (&s.a, key.s_a),
        (&s.b, key.s_b),
        (&s.c, key.s_c),
        (&s.d, key.s_d),
    ] {
        h = fix_x(&h, site, v as f64);
    }
    to_dense(&h, &[&s.f, &s.g, &s.u]).expect("mediator sites cover the sector Hamiltonian")
}

pub fn sector_spectrum(spec: &GadgetSpec, key: &SectorKey) -> SectorSpectrum {
    let m = real_part(&sector_hamiltonian(spec, key));
    let e = m.symmetric_eigenvalues();
    let mut v: Vec<f64> = e.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    SectorSpectrum {
        key: *key,
        ground_energy: v[0],
        gap_to_excited: v[1] - v[0],
    }
}

/// Least-squares fit of the sector ground energies.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: EffectiveCoefficients,
    /// max |E - fit| over all (sector, s) points.
    pub max_residual: f64,
    /// max of |coeff(u) - coeff(v)| and |coeff(us) - coeff(vs)|.
    pub asymmetry: f64,
    /// Largest s² coefficient of a per-(u, v) quadratic fit; `None` with
    /// fewer than three distinct s values.
    pub quadratic_s: Option<f64>,
    pub spectra: Vec<SectorSpectrum>,
}

/// Fits the exact ground energies on `{1, u, v, uv, s, us, vs, uvs}` with
/// `u = s_a s_b`, `v = s_c s_d` and regroups them into the effective basis.
pub fn fit_effective(spec: &GadgetSpec, s_values: &[f64]) -> Result<FitResult> {
    spec.validate()?;
    let mut distinct: Vec<f64> = s_values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InvalidParameter(
            "fit needs at least two distinct s values".into(),
        ));
    }
    let keys: Vec<SectorKey> = s_values.iter().flat_map(|&s| SectorKey::all(s)).collect();
    let spectra: Vec<SectorSpectrum> = keys.par_iter().map(|k| sector_spectrum(spec, k)).collect();
    if let Some(bad) = spectra.iter().find(|sp| sp.gap_to_excited < DEGENERACY_GAP) {
        return Err(Error::Degenerate {
            sector: bad.key.to_string(),
            gap: bad.gap_to_excited,
        });
    }

    let n = spectra.len();
    let a = DMatrix::from_fn(n, 8, |i, j| {
        let k = &spectra[i].key;
        let (u, v, s) = (k.u(), k.v(), k.s);
        [1.0, u, v, u * v, s, u * s, v * s, u * v * s][j]
    });
    let b = DVector::from_iterator(n, spectra.iter().map(|sp| sp.ground_energy));
    let (c, max_residual) = least_squares(&a, &b);
    let coefficients = EffectiveCoefficients {
        c_const: c[0],
        c_r: 0.5 * (c[1] + c[2]),
        c_w: c[3],
        c_sx: c[4],
        c_rsx: 0.5 * (c[5] + c[6]),
        c_wsx: c[7],
    };
    let asymmetry = (c[1] - c[2]).abs().max((c[5] - c[6]).abs());

    let quadratic_s = if distinct.len() >= 3 {
        let mut worst: f64 = 0.0;
        for (u, v) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let pts: Vec<&SectorSpectrum> = spectra
                .iter()
                .filter(|sp| sp.key.u() == u && sp.key.v() == v)
                .collect();
            let m = DMatrix::from_fn(pts.len(), 3, |i, j| pts[i].key.s.powi(j as i32));
            let y = DVector::from_iterator(pts.len(), pts.iter().map(|sp| sp.ground_energy));
            let (q, _) = least_squares(&m, &y);
            worst = worst.max(q[2].abs());
        }
        Some(worst)
    } else {
        None
    };

    Ok(FitResult {
        coefficients,
        max_residual,
        asymmetry,
        quadratic_s,
        spectra,
    })
}

/// Full gadget with the ferromagnet spin as a quantum spin-1/2 (`S^x = s·X_p`)
/// on eight sites. Returns the ascending spectrum of the 256×256 matrix and
/// the ascending union of the sector spectra at `s = ±s_mag`; the two agree
/// because `X_p` commutes with everything.
pub fn quantum_crosscheck(spec: &GadgetSpec, s_mag: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let st = &spec.sites;
    let h = gadget_hamiltonian(spec, FmSpin::Qubit { s: s_mag });
    let order = [&st.a, &st.b, &st.c, &st.d, &st.f, &st.g, &st.u, &st.p].map(|s| s.as_str());
    let full = real_part(&to_dense(&h, &order)?);
    let mut full_ev: Vec<f64> = full.symmetric_eigenvalues().iter().copied().collect();
    full_ev.sort_by(f64::total_cmp);

    let mut union = Vec::with_capacity(full_ev.len());
    for s in [s_mag, -s_mag] {
        for k in SectorKey::all(s) {
            let m = real_part(&sector_hamiltonian(spec, &k));
            union.extend(m.symmetric_eigenvalues().iter().copied());
        }
    }
    union.sort_by(f64::total_cmp);
    Ok((full_ev, union))
}

/// One CSV row per (sector, s).
pub fn spectra_csv(spectra: &[SectorSpectrum]) -> String {
    let mut out = String::from("s_a,s_b,s_c,s_d,s,ground_energy,gap_to_excited\n");
    for sp in spectra {
        let k = &sp.key;
        out.push_str(&format!(
            "{},{},{},{},{:.6e},{:.15e},{:.15e}\n",
            k.s_a, k.s_b, k.s_c, k.s_d, k.s, sp.ground_energy, sp.gap_to_excited
        ));
    }
    out
}
