//! Pauli-string algebra on labelled spin-1/2 sites.
//!
//! An [`OperatorSum`] is a complex-weighted sum of [`PauliTerm`]s. Sites are
//! opaque string labels; a tensor order only exists once an operator is
//! densified with an explicit `site_order`.
//!
//! Besides the qubit letters X, Y, Z a term may carry *formal symbols*:
//! commuting scalars attached to a site label with an integer power. They
//! stand in for a classical or conserved operator (the ferromagnet spin
//! `S^x` in the gadget) that commutes with every Pauli letter and must be
//! substituted before densification.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default relative pruning threshold used by [`OperatorSum::simplify`].
pub const DEFAULT_PRUNE: f64 = 1e-14;

/// Largest number of sites [`to_dense`] accepts.
pub const DENSE_SITE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Product of two single-site letters as `i^k · letter` (None = identity).
    pub fn mul(self, rhs: Pauli) -> (Phase, Option<Pauli>) {
        use Pauli::*;
        match (self, rhs) {
            (X, X) | (Y, Y) | (Z, Z) => (Phase::ONE, None),
            (X, Y) => (Phase::I, Some(Z)),
            (Y, X) => (Phase::MINUS_I, Some(Z)),
            (Y, Z) => (Phase::I, Some(X)),
            (Z, Y) => (Phase::MINUS_I, Some(X)),
            (Z, X) => (Phase::I, Some(Y)),
            (X, Z) => (Phase::MINUS_I, Some(Y)),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_symbol(c: &str) -> Option<Self> {
        match c {
            "X" | "x" => Some(Pauli::X),
            "Y" | "y" => Some(Pauli::Y),
            "Z" | "z" => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Exact phase `i^k`, k mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn compose(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn value(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Multiplies `z` by the phase without any rounding.
    pub fn apply(self, z: Complex64) -> Complex64 {
        match self.0 {
            0 => z,
            1 => Complex64::new(-z.im, z.re),
            2 => -z,
            _ => Complex64::new(z.im, -z.re),
        }
    }
}

type Letters = BTreeMap<String, Pauli>;
type Formal = BTreeMap<String, u32>;

/// Canonical merge key of a term: its letters plus its formal powers.
pub type TermKey = (Letters, Formal);

/// A single weighted Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    letters: Letters,
    formal: Formal,
}

impl PauliTerm {
    pub fn identity(coeff: impl Into<Complex64>) -> Self {
        Self {
            coeff: coeff.into(),
            letters: Letters::new(),
            formal: Formal::new(),
        }
    }

    /// Builds a term from `(site, letter)` pairs. Repeated sites are
    /// multiplied together in the given order.
    pub fn new<S: Into<String>>(
        coeff: impl Into<Complex64>,
        letters: impl IntoIterator<Item = (S, Pauli)>,
    ) -> Self {
        let mut term = Self::identity(coeff);
        for (site, p) in letters {
            let single = PauliTerm {
                coeff: Complex64::new(1.0, 0.0),
                letters: Letters::from([(site.into(), p)]),
                formal: Formal::new(),
            };
            term = term.mul(&single);
        }
        term
    }

    /// Attaches a formal commuting symbol `site^power`.
    pub fn with_formal(mut self, site: impl Into<String>, power: u32) -> Self {
        if power > 0 {
            *self.formal.entry(site.into()).or_insert(0) += power;
        }
        self
    }

    pub fn letters(&self) -> &BTreeMap<String, Pauli> {
        &self.letters
    }

    pub fn formal(&self) -> &BTreeMap<String, u32> {
        &self.formal
    }

    pub fn letter(&self, site: &str) -> Option<Pauli> {
        self.letters.get(site).copied()
    }

    pub fn key(&self) -> TermKey {
        (self.letters.clone(), self.formal.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty() && self.formal.is_empty()
    }

    /// Exact product; phases are accumulated as `i^k` and applied once.
    pub fn mul(&self, rhs: &PauliTerm) -> PauliTerm {
        let mut letters = self.letters.clone();
        let mut phase = Phase::ONE;
        for (site, &p) in &rhs.letters {
            match letters.get(site).copied() {
                None => {
                    letters.insert(site.clone(), p);
                }
                Some(q) => {
                    let (ph, r) = q.mul(p);
                    phase = phase.compose(ph);
                    match r {
                        Some(r) => {
                            letters.insert(site.clone(), r);
                        }
                        None => {
                            letters.remove(site);
                        }
                    }
                }
            }
        }
        let mut formal = self.formal.clone();
        for (site, &k) in &rhs.formal {
            *formal.entry(site.clone()).or_insert(0) += k;
        }
        PauliTerm {
            coeff: phase.apply(self.coeff * rhs.coeff),
            letters,
            formal,
        }
    }

    /// Hermitian adjoint: Pauli strings and formal symbols are self-adjoint.
    pub fn adjoint(&self) -> PauliTerm {
        PauliTerm {
            coeff: self.coeff.conj(),
            ..self.clone()
        }
    }

    /// Same term with the letter on `site` removed.
    pub fn without_site(&self, site: &str) -> PauliTerm {
        let mut t = self.clone();
        t.letters.remove(site);
        t
    }

    fn fmt_body(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (site, p) in &self.letters {
            write!(f, " {}:{}", site, p.symbol())?;
        }
        for (site, k) in &self.formal {
            if *k == 1 {
                write!(f, " {}:S", site)?;
            } else {
                write!(f, " {}:S^{}", site, k)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for PauliTerm {
    /// One line of the plain-text operator format:
    /// `coeff_re coeff_im site:letter site:letter ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {:e}", self.coeff.re, self.coeff.im)?;
        self.fmt_body(f)
    }
}

/// A sum of Pauli terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorSum {
    terms: Vec<PauliTerm>,
}

impl OperatorSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: impl Into<Complex64>) -> Self {
        Self::from_terms(vec![PauliTerm::identity(coeff)])
    }

    /// Collects terms and simplifies with the default threshold.
    pub fn from_terms(terms: Vec<PauliTerm>) -> Self {
        Self { terms }.simplify()
    }

    /// Wraps terms without merging; mostly for tests of `simplify` itself.
    pub fn from_terms_raw(terms: Vec<PauliTerm>) -> Self {
        Self { terms }
    }

    pub fn single(term: PauliTerm) -> Self {
        Self::from_terms(vec![term])
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn simplify(&self) -> Self {
        self.simplify_with(DEFAULT_PRUNE)
    }

    /// Merges terms with equal letters and formal powers, sorts them in
    /// canonical order and drops coefficients below `rel_threshold` times the
    /// largest magnitude.
    pub fn simplify_with(&self, rel_threshold: f64) -> Self {
        let mut acc: BTreeMap<TermKey, Complex64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.key()).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
        }
        let max = acc.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = rel_threshold * max;
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() > cut && c.norm() > 0.0)
            .map(|((letters, formal), coeff)| PauliTerm {
                coeff,
                letters,
                formal,
            })
            .collect();
        Self { terms }
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coeff: t.coeff * s,
                    ..t.clone()
                })
                .collect(),
        }
        .simplify()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self.terms.iter().map(PauliTerm::adjoint).collect(),
        }
    }

    /// True when the sum equals its adjoint term by term within `tol`
    /// (absolute, on the imaginary parts of simplified coefficients).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.simplify()
            .terms
            .iter()
            .all(|t| t.coeff.im.abs() <= tol)
    }

    /// Sum of absolute coefficients, a triangle-inequality bound on the
    /// operator norm when formal symbols have unit norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Coefficient of the term with exactly this key (zero if absent).
    pub fn coefficient(&self, key: &TermKey) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| &t.key() == key)
            .map(|t| t.coeff)
            .sum()
    }

    /// All qubit sites carrying a letter, sorted.
    pub fn sites(&self) -> Vec<String> {
        let mut s: Vec<String> = self
            .terms
            .iter()
            .flat_map(|t| t.letters.keys().cloned())
            .collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn formal_sites(&self) -> Vec<String> {
        let mut s: Vec<String> = self
            .terms
            .iter()
            .flat_map(|t| t.formal.keys().cloned())
            .collect();
        s.sort();
        s.dedup();
        s
    }

    /// Replaces the formal symbol on `site` by the scalar `value`.
    pub fn substitute(&self, site: &str, value: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                if let Some(k) = t.formal.remove(site) {
                    t.coeff *= value.powi(k as i32);
                }
                t
            })
            .collect();
        Self { terms }.simplify()
    }

    /// Replaces every qubit letter on `site` by `map(letter)`.
    pub fn relabel(&self, site: &str, map: impl Fn(Pauli) -> Pauli) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                if let Some(p) = t.letters.get_mut(site) {
                    *p = map(*p);
                }
                t
            })
            .collect();
        Self { terms }.simplify()
    }

    /// Parses the plain-text format written by `Display`: one term per line,
    /// `coeff_re coeff_im site:letter ...`, `#` comments and blank lines
    /// ignored. Formal symbols are written `site:S` or `site:S^k`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {}: `{}`", lineno + 1, msg, raw));
            let mut fields = line.split_whitespace();
            let re: f64 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad real part"))?;
            let im: f64 = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("bad imaginary part"))?;
            let mut term = PauliTerm::identity(Complex64::new(re, im));
            for f in fields {
                let (site, letter) = f
                    .split_once(':')
                    .ok_or_else(|| err("expected site:letter"))?;
                if site.is_empty() {
                    return Err(err("empty site label"));
                }
                if let Some(p) = Pauli::from_symbol(letter) {
                    term = term.mul(&PauliTerm::new(1.0, [(site, p)]));
                } else if letter == "S" {
                    term = term.with_formal(site, 1);
                } else if let Some(k) = letter.strip_prefix("S^") {
                    let k: u32 = k.parse().map_err(|_| err("bad formal power"))?;
                    term = term.with_formal(site, k);
                } else {
                    return Err(err("unknown letter"));
                }
            }
            terms.push(term);
        }
        Ok(Self::from_terms(terms))
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{}", t)?;
        }
        Ok(())
    }
}

impl From<PauliTerm> for OperatorSum {
    fn from(t: PauliTerm) -> Self {
        OperatorSum::single(t)
    }
}

impl Add for &OperatorSum {
    type Output = OperatorSum;
    fn add(self, rhs: &OperatorSum) -> OperatorSum {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        OperatorSum { terms }.simplify()
    }
}

impl Add for OperatorSum {
    type Output = OperatorSum;
    fn add(self, rhs: OperatorSum) -> OperatorSum {
        &self + &rhs
    }
}

impl Neg for &OperatorSum {
    type Output = OperatorSum;
    fn neg(self) -> OperatorSum {
        self.scale(-1.0)
    }
}

impl Sub for &OperatorSum {
    type Output = OperatorSum;
    fn sub(self, rhs: &OperatorSum) -> OperatorSum {
        self + &(-rhs)
    }
}

impl Sub for OperatorSum {
    type Output = OperatorSum;
    fn sub(self, rhs: OperatorSum) -> OperatorSum {
        &self - &rhs
    }
}

impl Mul for &OperatorSum {
    type Output = OperatorSum;
    fn mul(self, rhs: &OperatorSum) -> OperatorSum {
        multiply(self, rhs)
    }
}

impl Mul for OperatorSum {
    type Output = OperatorSum;
    fn mul(self, rhs: OperatorSum) -> OperatorSum {
        multiply(&self, &rhs)
    }
}

/// Exact product `a·b`, simplified.
pub fn multiply(a: &OperatorSum, b: &OperatorSum) -> OperatorSum {
    multiply_with(a, b, DEFAULT_PRUNE)
}

pub fn multiply_with(a: &OperatorSum, b: &OperatorSum, rel_threshold: f64) -> OperatorSum {
    let mut terms = Vec::with_capacity(a.terms.len() * b.terms.len());
    for x in &a.terms {
        for y in &b.terms {
            terms.push(x.mul(y));
        }
    }
    OperatorSum { terms }.simplify_with(rel_threshold)
}

/// `ab - ba`, simplified.
pub fn commutator(a: &OperatorSum, b: &OperatorSum) -> OperatorSum {
    commutator_with(a, b, DEFAULT_PRUNE)
}

pub fn commutator_with(a: &OperatorSum, b: &OperatorSum, rel_threshold: f64) -> OperatorSum {
    let mut terms = Vec::new();
    for x in &a.terms {
        for y in &b.terms {
            let xy = x.mul(y);
            let yx = y.mul(x);
            // Pauli strings either commute or anticommute.
            if xy.coeff != yx.coeff {
                let mut t = xy;
                t.coeff -= yx.coeff;
                terms.push(t);
            }
        }
    }
    OperatorSum { terms }.simplify_with(rel_threshold)
}

/// Dense matrix of an operator in an explicit tensor order.
///
/// `site_order[0]` is the most significant tensor factor; the single-site
/// basis is `|0> = Z=+1`, `|1> = Z=-1`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub site_order: Vec<String>,
    pub matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// max |M - M^dagger|.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// Kronecker-product matrix of `h` with tensor order `site_order`.
pub fn to_dense(h: &OperatorSum, site_order: &[&str]) -> Result<DenseOperator> {
    if let Some(site) = h.formal_sites().into_iter().next() {
        return Err(Error::FormalSymbol(site));
    }
    let n = site_order.len();
    if n > DENSE_SITE_CAP {
        return Err(Error::DimensionCap {
            sites: n,
            cap: DENSE_SITE_CAP,
        });
    }
    let position: BTreeMap<&str, usize> = site_order
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, n - 1 - i))
        .collect();
    for site in h.sites() {
        if !position.contains_key(site.as_str()) {
            return Err(Error::UnknownSite(site));
        }
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for t in h.terms() {
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ymask = 0usize;
        for (site, p) in t.letters() {
            let bit = 1usize << position[site.as_str()];
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    ymask |= bit;
                }
                Pauli::Z => zmask |= bit,
            }
        }
        for col in 0..dim {
            let row = col ^ flip;
            // Z|1> = -|1>;  Y|0> = i|1>, Y|1> = -i|0>.
            let mut phase = Phase::ONE;
            if (col & zmask).count_ones() % 2 == 1 {
                phase = phase.compose(Phase::MINUS_ONE);
            }
            let ys = ymask.count_ones();
            let ys_set = (col & ymask).count_ones();
            for _ in 0..(ys - ys_set) {
                phase = phase.compose(Phase::I);
            }
            for _ in 0..ys_set {
                phase = phase.compose(Phase::MINUS_I);
            }
            m[(row, col)] += phase.apply(t.coeff);
        }
    }
    Ok(DenseOperator {
        site_order: site_order.iter().map(|s| s.to_string()).collect(),
        matrix: m,
    })
}

/// Convenience constructor: `coeff · P_site`.
pub fn op(coeff: f64, site: &str, p: Pauli) -> OperatorSum {
    OperatorSum::single(PauliTerm::new(coeff, [(site, p)]))
}

/// Convenience constructor: `coeff · P1_s1 P2_s2 ...`.
pub fn string(coeff: f64, letters: &[(&str, Pauli)]) -> OperatorSum {
    OperatorSum::single(PauliTerm::new(coeff, letters.iter().copied()))
}
