//! Schrieffer-Wolff elimination of gapped mediator qubits.
//!
//! A mediator `m` with `H0 = -(Δ/2) Z_m` is removed by the low-order
//! effective-Hamiltonian formulas
//!
//! ```text
//! H1 = P V_d P
//! H2 = 1/2 P [L⁻¹ V_od, V_od] P
//! H3 = 1/2 P [L⁻¹ [L⁻¹ V_od, V_d], V_od] P
//! ```
//!
//! where `P` projects on `Z_m = +1` and `L⁻¹` is the inverse Liouvillian of
//! `H0`. The five-body gadget is then reduced by eliminating `f`, `g` and `u`
//! in sequence, keeping the ferromagnet spin `S_p^x` as a formal commuting
//! symbol.

use std::fmt;

use num_complex::Complex64;

use crate::config;
use crate::error::{Error, Result};
use crate::pauli::{commutator_with, OperatorSum, Pauli, PauliTerm};

/// Relative pruning threshold inside the elimination. Coefficients of
/// interest span twelve orders of magnitude, so the default 1e-14 is too
/// aggressive here.
pub const SW_PRUNE: f64 = 1e-22;

/// Site labels of one plaquette gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetSites {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub f: String,
    pub g: String,
    pub u: String,
    pub p: String,
}

impl Default for GadgetSites {
    fn default() -> Self {
        Self {
            a: "a".into(),
            b: "b".into(),
            c: "c".into(),
            d: "d".into(),
            f: "f".into(),
            g: "g".into(),
            u: "u".into(),
            p: "p".into(),
        }
    }
}

impl GadgetSites {
    pub fn code(&self) -> [&str; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn mediators(&self) -> [&str; 3] {
        [&self.f, &self.g, &self.u]
    }
}

/// Coupling constants of the plaquette gadget.
///
/// `delta` is the mediator gap Δ; `delta_pair` is the direct code-pair
/// coupling δ.
#[derive(Debug, Clone, PartialEq)]
pub struct GadgetSpec {
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta_pair: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub sites: GadgetSites,
}

impl Default for GadgetSpec {
    fn default() -> Self {
        Self {
            delta: 1.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            delta_pair: 0.0,
            epsilon: 0.0,
            tau: 0.0,
            sites: GadgetSites::default(),
        }
    }
}

/// Configuration keys accepted by [`GadgetSpec::from_config`].
pub const SPEC_KEYS: [&str; 7] = [
    "delta",
    "alpha",
    "beta",
    "gamma",
    "delta_pair",
    "epsilon",
    "tau",
];

impl GadgetSpec {
    /// ξ = 2ε/Δ.
    pub fn xi(&self) -> f64 {
        2.0 * self.epsilon / self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        let half = self.delta / 2.0;
        for (name, v) in self.couplings() {
            if !v.is_finite() || v.abs() >= half {
                return Err(Error::InvalidParameter(format!(
                    "|{name}| = {} must be below delta/2 = {half}",
                    v.abs()
                )));
            }
        }
        Ok(())
    }

    fn couplings(&self) -> [(&'static str, f64); 6] {
        [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta_pair", self.delta_pair),
            ("epsilon", self.epsilon),
            ("tau", self.tau),
        ]
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "delta" => self.delta,
            "alpha" => self.alpha,
            "beta" => self.beta,
            "gamma" => self.gamma,
            "delta_pair" => self.delta_pair,
            "epsilon" => self.epsilon,
            "tau" => self.tau,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, v: f64) -> Result<()> {
        match key {
            "delta" => self.delta = v,
            "alpha" => self.alpha = v,
            "beta" => self.beta = v,
            "gamma" => self.gamma = v,
            "delta_pair" => self.delta_pair = v,
            "epsilon" => self.epsilon = v,
            "tau" => self.tau = v,
            _ => return Err(Error::Parse(format!("unknown gadget key `{key}`"))),
        }
        Ok(())
    }

    /// Reads `key = value` text; absent keys keep their defaults
    /// (Δ = 1, every coupling 0).
    pub fn from_config(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for e in config::parse(text)? {
            if !SPEC_KEYS.contains(&e.key.as_str()) {
                return Err(Error::Parse(format!(
                    "line {}: unknown gadget key `{}`",
                    e.line, e.key
                )));
            }
            spec.set(&e.key, config::parse_f64(&e)?)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_config(&self) -> String {
        SPEC_KEYS
            .iter()
            .map(|k| format!("{k} = {:e}\n", self.get(k).unwrap()))
            .collect()
    }
}

/// How the ferromagnet spin `S_p^x` enters the gadget Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FmSpin {
    /// Formal commuting symbol on site `p`.
    Formal,
    /// Classical number substituted for `S_p^x`.
    Scalar(f64),
    /// Quantum spin-1/2 on site `p`, `S_p^x = s·X_p`.
    Qubit { s: f64 },
}

/// The plaquette gadget Hamiltonian
///
/// ```text
/// H = -(Δ/2)(Z_f + Z_g + Z_u) + γ S Z_u + τ S (Z_f + Z_g)
///     + ε X_f (X_a + X_b) + ε X_g (X_c + X_d)
///     + α X_u (Z_f + Z_g) + β Z_f Z_g + δ (X_a X_b + X_c X_d)
/// ```
pub fn gadget_hamiltonian(spec: &GadgetSpec, fm: FmSpin) -> OperatorSum {
    use Pauli::*;
    let s = &spec.sites;
    let t = |c: f64, letters: &[(&str, Pauli)]| PauliTerm::new(c, letters.iter().copied());
    // Multiplies a term by S_p^x in the requested representation.
    let with_s = |term: PauliTerm| -> PauliTerm {
        match fm {
            FmSpin::Formal => term.with_formal(s.p.as_str(), 1),
            FmSpin::Scalar(v) => term.mul(&PauliTerm::identity(v)),
            FmSpin::Qubit { s: mag } => term.mul(&PauliTerm::new(mag, [(s.p.as_str(), X)])),
        }
    };
    let half = -spec.delta / 2.0;
    let terms = vec![
        t(half, &[(&s.f, Z)]),
        t(half, &[(&s.g, Z)]),
        t(half, &[(&s.u, Z)]),
        with_s(t(spec.gamma, &[(&s.u, Z)])),
        with_s(t(spec.tau, &[(&s.f, Z)])),
        with_s(t(spec.tau, &[(&s.g, Z)])),
        t(spec.epsilon, &[(&s.f, X), (&s.a, X)]),
        t(spec.epsilon, &[(&s.f, X), (&s.b, X)]),
        t(spec.epsilon, &[(&s.g, X), (&s.c, X)]),
        t(spec.epsilon, &[(&s.g, X), (&s.d, X)]),
        t(spec.alpha, &[(&s.u, X), (&s.f, Z)]),
        t(spec.alpha, &[(&s.u, X), (&s.g, Z)]),
        t(spec.beta, &[(&s.f, Z), (&s.g, Z)]),
        t(spec.delta_pair, &[(&s.a, X), (&s.b, X)]),
        t(spec.delta_pair, &[(&s.c, X), (&s.d, X)]),
    ];
    OperatorSum::from_terms(terms)
}

/// Inverse Liouvillian of `H0 = -(Δ/2) Z_m` on a block-off-diagonal operator:
/// `X_m → -(i/Δ) Y_m`, `Y_m → (i/Δ) X_m`.
pub fn liouvillian_inverse(op: &OperatorSum, mediator: &str, delta: f64) -> Result<OperatorSum> {
    let mut out = Vec::with_capacity(op.len());
    for t in op.terms() {
        let (factor, letter) = match t.letter(mediator) {
            Some(Pauli::X) => (Complex64::new(0.0, -1.0 / delta), Pauli::Y),
            Some(Pauli::Y) => (Complex64::new(0.0, 1.0 / delta), Pauli::X),
            _ => {
                return Err(Error::NotOffDiagonal {
                    mediator: mediator.to_string(),
                    term: t.to_string(),
                })
            }
        };
        out.push(
            t.without_site(mediator)
                .mul(&PauliTerm::new(factor, [(mediator, letter)])),
        );
    }
    Ok(OperatorSum::from_terms_raw(out).simplify_with(SW_PRUNE))
}

/// `P · P` for the mediator ground state `Z_m = +1`; the mediator is dropped.
fn project_ground(op: &OperatorSum, mediator: &str) -> OperatorSum {
    let terms = op
        .terms()
        .iter()
        .filter_map(|t| match t.letter(mediator) {
            None => Some(t.clone()),
            Some(Pauli::Z) => Some(t.without_site(mediator)),
            Some(_) => None,
        })
        .collect();
    OperatorSum::from_terms_raw(terms).simplify_with(SW_PRUNE)
}

/// Eliminates `mediator` from `h = -(Δ/2) Z_m + V` to the given order
/// (2 or 3) and returns the effective Hamiltonian on the remaining sites.
///
/// The perturbation size is bounded by the sum of absolute coefficients of
/// the terms of `V` acting on the mediator; formal symbols count with unit
/// norm. Spectator terms commute with `H0` and do not enter the gate.
pub fn integrate_out(
    h: &OperatorSum,
    mediator: &str,
    delta: f64,
    order: u8,
) -> Result<OperatorSum> {
    if !(2..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "order must be 2 or 3, got {order}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be > 0, got {delta}"
        )));
    }
    let h0 = OperatorSum::single(PauliTerm::new(-delta / 2.0, [(mediator, Pauli::Z)]));
    let v = (h - &h0).simplify_with(SW_PRUNE);

    let mut vd = Vec::new();
    let mut vod = Vec::new();
    let mut norm = 0.0;
    for t in v.terms() {
        match t.letter(mediator) {
            None => vd.push(t.clone()),
            Some(Pauli::Z) => {
                norm += t.coeff.norm();
                vd.push(t.clone());
            }
            Some(Pauli::X) => {
                norm += t.coeff.norm();
                vod.push(t.clone());
            }
            Some(Pauli::Y) => {
                return Err(Error::YTermPresent {
                    mediator: mediator.to_string(),
                    term: t.to_string(),
                })
            }
        }
    }
    if norm >= delta / 2.0 {
        return Err(Error::TooStrong {
            mediator: mediator.to_string(),
            norm,
            half_gap: delta / 2.0,
        });
    }
    let vd = OperatorSum::from_terms_raw(vd);
    let vod = OperatorSum::from_terms_raw(vod);

    let mut heff = OperatorSum::identity(-delta / 2.0);
    heff = &heff + &project_ground(&vd, mediator);
    if !vod.is_empty() {
        let s1 = liouvillian_inverse(&vod, mediator, delta)?;
        let h2 = project_ground(&commutator_with(&s1, &vod, SW_PRUNE), mediator).scale(0.5);
        heff = &heff + &h2;
        if order >= 3 {
            let inner = commutator_with(&s1, &vd, SW_PRUNE);
            if !inner.is_empty() {
                let s2 = liouvillian_inverse(&inner, mediator, delta)?;
                let h3 = project_ground(&commutator_with(&s2, &vod, SW_PRUNE), mediator).scale(0.5);
                heff = &heff + &h3;
            }
        }
    }
    Ok(heff.simplify_with(SW_PRUNE))
}

/// Coefficients of {1, S, R, R·S, W, W·S} with `R = X_aX_b + X_cX_d` and
/// `W = X_aX_bX_cX_d`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EffectiveCoefficients {
    pub c_const: f64,
    pub c_sx: f64,
    pub c_r: f64,
    pub c_rsx: f64,
    pub c_w: f64,
    pub c_wsx: f64,
}

impl EffectiveCoefficients {
    pub const NAMES: [&'static str; 6] = ["c_const", "c_sx", "c_r", "c_rsx", "c_w", "c_wsx"];

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.c_const,
            self.c_sx,
            self.c_r,
            self.c_rsx,
            self.c_w,
            self.c_wsx,
        ]
    }

    pub fn csv_header() -> String {
        Self::NAMES.join(",")
    }

    pub fn csv_row(&self) -> String {
        self.as_array()
            .iter()
            .map(|v| format!("{v:.12e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// The effective operator on the code sites with `S_p^x` as a formal
    /// symbol.
    pub fn operator(&self, sites: &GadgetSites) -> OperatorSum {
        use Pauli::X;
        let p = sites.p.as_str();
        let ab = [(sites.a.as_str(), X), (sites.b.as_str(), X)];
        let cd = [(sites.c.as_str(), X), (sites.d.as_str(), X)];
        let w = [ab[0], ab[1], cd[0], cd[1]];
        OperatorSum::from_terms(vec![
            PauliTerm::identity(self.c_const),
            PauliTerm::identity(self.c_sx).with_formal(p, 1),
            PauliTerm::new(self.c_r, ab),
            PauliTerm::new(self.c_r, cd),
            PauliTerm::new(self.c_rsx, ab).with_formal(p, 1),
            PauliTerm::new(self.c_rsx, cd).with_formal(p, 1),
            PauliTerm::new(self.c_w, w),
            PauliTerm::new(self.c_wsx, w).with_formal(p, 1),
        ])
    }
}

impl fmt::Display for EffectiveCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in Self::NAMES.iter().zip(self.as_array()) {
            writeln!(f, "{n:8} = {v:+.6e}")?;
        }
        Ok(())
    }
}

/// Leading-order closed form of the effective coefficients. The constant has
/// no closed form here and is returned as zero.
///
/// The `S` coefficient is `γ + 2τ - 8γα²/Δ²`.
pub fn closed_form(spec: &GadgetSpec) -> EffectiveCoefficients {
    let (d, a, b, g, t) = (spec.delta, spec.alpha, spec.beta, spec.gamma, spec.tau);
    let xi2 = spec.xi().powi(2);
    EffectiveCoefficients {
        c_const: 0.0,
        c_sx: g + 2.0 * t - 8.0 * g * a * a / (d * d),
        c_rsx: -xi2 * (t - 8.0 * a * a * g / (d * d)),
        c_r: spec.delta_pair - xi2 * (d / 2.0 - b + 4.0 * a * a / d),
        c_w: xi2 * xi2 * (b - 2.0 * a * a / d),
        c_wsx: -4.0 * xi2 * xi2 * a * a * g / (d * d),
    }
}

/// Closed form of the simplified gadget (α = γ = τ = 0).
pub fn simplified_closed_form(spec: &GadgetSpec) -> (f64, f64) {
    let (d, b, e) = (spec.delta, spec.beta, spec.epsilon);
    let c_r = spec.delta_pair - 2.0 * e * e / d - 4.0 * b * e * e / (d * d);
    let c_w = 16.0 * b * e.powi(4) / d.powi(4);
    (c_r, c_w)
}

/// Terms of an effective operator that fall outside the six-element basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coefficients: EffectiveCoefficients,
    /// |coeff(X_aX_b) - coeff(X_cX_d)| (and likewise with S), max of both.
    pub asymmetry: f64,
    /// Largest coefficient outside the span of the basis strings.
    pub max_residual: f64,
    pub residual_terms: Vec<PauliTerm>,
}

/// Splits an operator on the code sites (plus formal `p`) into the basis.
pub fn project_onto_basis(h: &OperatorSum, sites: &GadgetSites) -> Projection {
    let code = sites.code();
    let mut c = EffectiveCoefficients::default();
    let (mut r_ab, mut r_cd, mut rs_ab, mut rs_cd) = (0.0, 0.0, 0.0, 0.0);
    let mut residual_terms = Vec::new();
    let mut max_residual: f64 = 0.0;
    for t in h.terms() {
        let all_x = t.letters().values().all(|&p| p == Pauli::X);
        let on_code = t.letters().keys().all(|k| code.contains(&k.as_str()));
        let power = match (t.formal().len(), t.formal().get(&sites.p)) {
            (0, _) => Some(0),
            (1, Some(&1)) => Some(1),
            _ => None,
        };
        let mask: Vec<bool> = code.iter().map(|s| t.letters().contains_key(*s)).collect();
        let slot = match (all_x && on_code, power, mask.as_slice()) {
            (true, Some(k), [false, false, false, false]) => Some((0, k)),
            (true, Some(k), [true, true, false, false]) => Some((1, k)),
            (true, Some(k), [false, false, true, true]) => Some((2, k)),
            (true, Some(k), [true, true, true, true]) => Some((3, k)),
            _ => None,
        };
        let v = t.coeff.re;
        max_residual = max_residual.max(t.coeff.im.abs());
        match slot {
            Some((0, 0)) => c.c_const += v,
            Some((0, _)) => c.c_sx += v,
            Some((1, 0)) => r_ab += v,
            Some((1, _)) => rs_ab += v,
            Some((2, 0)) => r_cd += v,
            Some((2, _)) => rs_cd += v,
            Some((3, 0)) => c.c_w += v,
            Some((3, _)) => c.c_wsx += v,
            _ => {
                max_residual = max_residual.max(t.coeff.norm());
                residual_terms.push(t.clone());
            }
        }
    }
    c.c_r = 0.5 * (r_ab + r_cd);
    c.c_rsx = 0.5 * (rs_ab + rs_cd);
    let asymmetry = (r_ab - r_cd).abs().max((rs_ab - rs_cd).abs());
    Projection {
        coefficients: c,
        asymmetry,
        max_residual,
        residual_terms,
    }
}

/// Residual tolerance for the basis projection: ξ⁶·Δ, floored at 1e-12·Δ.
pub fn leak_tolerance(spec: &GadgetSpec) -> f64 {
    spec.xi().powi(6).max(1e-12) * spec.delta
}

/// Eliminates the mediators in the given order to third order each and
/// returns the raw effective operator.
pub fn effective_operator(spec: &GadgetSpec, order: &[&str]) -> Result<OperatorSum> {
    spec.validate()?;
    let mut h = gadget_hamiltonian(spec, FmSpin::Formal);
    for m in order {
        h = integrate_out(&h, m, spec.delta, 3)?;
    }
    Ok(h)
}

/// Effective coefficients with the mediators eliminated in `order`.
///
/// The `R` coefficients are the mean of the `X_aX_b` and `X_cX_d` parts;
/// orders that treat the two pairs differently leave a higher-order
/// asymmetry, reported by [`project_onto_basis`].
pub fn gadget_effective_with_order(
    spec: &GadgetSpec,
    order: &[&str],
) -> Result<EffectiveCoefficients> {
    let h = effective_operator(spec, order)?;
    let proj = project_onto_basis(&h, &spec.sites);
    let tol = leak_tolerance(spec);
    if proj.max_residual > tol {
        let terms: Vec<String> = proj
            .residual_terms
            .iter()
            .map(|t| t.to_string().trim().to_string())
            .collect();
        return Err(Error::BasisLeak {
            tolerance: tol,
            terms: terms.join("; "),
        });
    }
    Ok(proj.coefficients)
}

/// Effective coefficients with the mediators eliminated in the order f, g, u.
pub fn gadget_effective(spec: &GadgetSpec) -> Result<EffectiveCoefficients> {
    let s = &spec.sites;
    gadget_effective_with_order(spec, &[&s.f, &s.g, &s.u])
}

/// `(δ*, τ*)`: the pair coupling zeroing `c_r` and the `τ` zeroing `c_rsx`,
/// both evaluated with the engine at third order.
///
/// `c_r` is exactly affine in δ with unit slope, so `δ*` needs one call.
/// `c_rsx` is affine in τ to this order; two secant steps are taken anyway.
pub fn tuning_values(spec: &GadgetSpec) -> Result<(f64, f64)> {
    let mut s = spec.clone();
    s.delta_pair = 0.0;
    let delta_star = -gadget_effective(&s)?.c_r;

    let mut s = spec.clone();
    let mut c_rsx = |tau: f64| -> Result<f64> {
        s.tau = tau;
        Ok(gadget_effective(&s)?.c_rsx)
    };
    let guess = 8.0 * spec.alpha.powi(2) * spec.gamma / spec.delta.powi(2);
    let (mut t0, mut f0) = (0.0, c_rsx(0.0)?);
    if f0 == 0.0 {
        return Ok((delta_star, 0.0));
    }
    let mut t1 = if guess != 0.0 {
        guess
    } else {
        1e-3 * spec.delta
    };
    let mut f1 = c_rsx(t1)?;
    for _ in 0..2 {
        if f1 == f0 {
            break;
        }
        let t2 = t1 - f1 * (t1 - t0) / (f1 - f0);
        (t0, f0) = (t1, f1);
        t1 = t2;
        f1 = c_rsx(t1)?;
    }
    Ok((delta_star, t1))
}
