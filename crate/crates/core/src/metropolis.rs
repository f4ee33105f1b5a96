//! Metropolis simulation of the classical Heisenberg ferromagnet on a
//! periodic Λ³ lattice with the code's transverse forcing in one layer.
//!
//! ```text
//! E = −J Σ_<ij> S_i·S_j + h_z Σ_i S_i^z + A Σ_{p ∈ code} S_p^x
//! ```
//!
//! Spins are unit vectors; the ordered state points along −z.
//!
//! Sweeps use a two-colour checkerboard: all sites of one colour are
//! proposed against the frozen other colour, then written back. Random
//! numbers come from ChaCha8 with stream `2·sweep + colour` and word position
//! `8·rank`, where `rank` is the site's index within its colour, so every
//! site draws the same four 64-bit words whether the sweep runs serially or
//! in parallel.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::magnon::{chi_xx_r_lattice, FMParams};
use crate::numeric::linear_fit;

/// Default memory budget for [`run_fig4`], in spins (Λ = 72 fits).
pub const DEFAULT_MAX_SPINS: usize = 400_000;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinLattice {
    lambda: usize,
    spins: Vec<[f64; 3]>,
}

impl SpinLattice {
    /// All spins along `dir` (normalized).
    pub fn uniform(lambda: usize, dir: [f64; 3]) -> Self {
        let d = normalize(dir);
        Self {
            lambda,
            spins: vec![d; lambda.pow(3)],
        }
    }

    /// The saturated state along −z.
    pub fn saturated(lambda: usize) -> Self {
        Self::uniform(lambda, [0.0, 0.0, -1.0])
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.lambda + y) * self.lambda + z
    }

    pub fn coords(&self, i: usize) -> (usize, usize, usize) {
        let l = self.lambda;
        (i / (l * l), (i / l) % l, i % l)
    }

    pub fn spin(&self, i: usize) -> [f64; 3] {
        self.spins[i]
    }

    pub fn set_spin(&mut self, i: usize, s: [f64; 3]) {
        self.spins[i] = normalize(s);
    }

    pub fn spins(&self) -> &[[f64; 3]] {
        &self.spins
    }

    /// Mean spin vector.
    pub fn magnetization(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for s in &self.spins {
            for d in 0..3 {
                m[d] += s[d];
            }
        }
        m.map(|v| v / self.spins.len() as f64)
    }

    /// max | |S_i| − 1 |.
    pub fn max_norm_deviation(&self) -> f64 {
        self.spins
            .iter()
            .map(|s| (dot(*s, *s).sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Rotates every spin by `phi` about ẑ.
    pub fn rotate_z(&mut self, phi: f64) {
        let (s, c) = phi.sin_cos();
        for v in &mut self.spins {
            *v = [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
        }
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proposal {
    /// Uniform on the spherical cap of this half-angle around the current spin.
    Cone { half_angle: f64 },
    /// Uniform on the sphere, independent of the current spin.
    Sphere,
}

/// L×L code sites in layer `plane_z`, centred on (Λ/2, Λ/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeCoupling {
    pub a: f64,
    pub l: usize,
    pub plane_z: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCConfig {
    pub temperature: f64,
    pub sweeps_thermalize: usize,
    pub sweeps_measure: usize,
    pub seed: u64,
    pub proposal: Proposal,
    pub code: CodeCoupling,
    /// Adjust the cone angle toward 50% acceptance while thermalizing.
    pub auto_tune: bool,
    pub parallel: bool,
    /// Measure the centre spin through its conditional mean given the
    /// neighbours (Langevin function of the local field).
    pub improved_estimator: bool,
    /// Over-relaxation sweeps after each Metropolis sweep. They conserve
    /// energy and speed up the long-wavelength modes.
    pub overrelax: usize,
    pub max_spins: usize,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            temperature: 0.05,
            sweeps_thermalize: 300,
            sweeps_measure: 1000,
            seed: 1,
            proposal: Proposal::Cone { half_angle: 0.5 },
            code: CodeCoupling {
                a: 0.05,
                l: 3,
                plane_z: 0,
            },
            auto_tune: true,
            parallel: true,
            improved_estimator: true,
            overrelax: 0,
            max_spins: DEFAULT_MAX_SPINS,
        }
    }
}

impl MCConfig {
    pub fn validate(&self, lambda: usize) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if self.sweeps_measure < 1 {
            return Err(Error::InvalidParameter(
                "need at least one measurement sweep".into(),
            ));
        }
        if self.code.l > lambda {
            return Err(Error::InvalidParameter(format!(
                "code size {} exceeds Lambda {lambda}",
                self.code.l
            )));
        }
        if self.code.plane_z >= lambda {
            return Err(Error::InvalidParameter(format!(
                "plane_z {} outside the lattice",
                self.code.plane_z
            )));
        }
        if lambda < 2 || lambda % 2 == 1 {
            return Err(Error::InvalidParameter(format!(
                "checkerboard sweeps need an even Lambda >= 2, got {lambda}"
            )));
        }
        if let Proposal::Cone { half_angle } = self.proposal {
            if !(half_angle > 0.0 && half_angle <= PI) {
                return Err(Error::InvalidParameter(format!(
                    "cone half-angle must lie in (0, π], got {half_angle}"
                )));
            }
        }
        Ok(())
    }
}

/// Exchange and field of the classical model (spins of unit length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalParams {
    pub j: f64,
    pub h_z: f64,
}

/// Precomputed neighbour table, colour classes and per-site x field.
#[derive(Debug, Clone)]
pub struct Geometry {
    lambda: usize,
    neighbors: Vec<[u32; 6]>,
    colors: [Vec<u32>; 2],
    field_x: Vec<f64>,
    code_sites: Vec<usize>,
    center: usize,
}

impl Geometry {
    pub fn new(lambda: usize, code: &CodeCoupling) -> Self {
        let l = lambda;
        let idx = |x: usize, y: usize, z: usize| ((x % l) * l + (y % l)) * l + (z % l);
        let mut neighbors = Vec::with_capacity(l * l * l);
        let mut colors: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for x in 0..l {
            for y in 0..l {
                for z in 0..l {
                    neighbors.push(
                        [
                            idx(x + 1, y, z),
                            idx(x + l - 1, y, z),
                            idx(x, y + 1, z),
                            idx(x, y + l - 1, z),
                            idx(x, y, z + 1),
                            idx(x, y, z + l - 1),
                        ]
                        .map(|v| v as u32),
                    );
                    colors[(x + y + z) % 2].push(idx(x, y, z) as u32);
                }
            }
        }
        let c = l / 2;
        let lo = c - code.l / 2;
        let mut field_x = vec![0.0; l * l * l];
        let mut code_sites = Vec::with_capacity(code.l * code.l);
        for x in lo..lo + code.l {
            for y in lo..lo + code.l {
                let i = idx(x, y, code.plane_z);
                field_x[i] = code.a;
                code_sites.push(i);
            }
        }
        Self {
            lambda,
            neighbors,
            colors,
            field_x,
            code_sites,
            center: idx(c, c, code.plane_z),
        }
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn code_sites(&self) -> &[usize] {
        &self.code_sites
    }

    /// Effective field h_i = J Σ_nb S_j − h_z ẑ − A_i x̂, so E_i = −h_i·S_i.
    fn local_field(&self, lat: &SpinLattice, i: usize, p: &ClassicalParams) -> [f64; 3] {
        let mut h = [0.0; 3];
        for &n in &self.neighbors[i] {
            let s = lat.spins[n as usize];
            h[0] += s[0];
            h[1] += s[1];
            h[2] += s[2];
        }
        [p.j * h[0] - self.field_x[i], p.j * h[1], p.j * h[2] - p.h_z]
    }
}

/// Total energy.
pub fn energy(lat: &SpinLattice, geo: &Geometry, p: &ClassicalParams) -> f64 {
    let mut bonds = 0.0;
    let mut field = 0.0;
    for (i, s) in lat.spins.iter().enumerate() {
        let nb = &geo.neighbors[i];
        // +x, +y, +z neighbours count each bond once.
        for k in [0, 2, 4] {
            bonds += dot(*s, lat.spins[nb[k] as usize]);
        }
        field += p.h_z * s[2] + geo.field_x[i] * s[0];
    }
    -p.j * bonds + field
}

/// Maps four uniform words to a proposal and an acceptance variate.
fn propose(old: [f64; 3], proposal: Proposal, r: [u64; 4]) -> ([f64; 3], f64) {
    let u = |w: u64| (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let phi = 2.0 * PI * u(r[1]);
    let accept = u(r[2]);
    match proposal {
        Proposal::Sphere => {
            let cz = 2.0 * u(r[0]) - 1.0;
            let st = (1.0 - cz * cz).max(0.0).sqrt();
            ([st * phi.cos(), st * phi.sin(), cz], accept)
        }
        Proposal::Cone { half_angle } => {
            let cmin = half_angle.cos();
            let ct = 1.0 - u(r[0]) * (1.0 - cmin);
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            // Orthonormal frame (e1, e2, old).
            let helper = if old[0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            let d = dot(helper, old);
            let e1 = normalize([
                helper[0] - d * old[0],
                helper[1] - d * old[1],
                helper[2] - d * old[2],
            ]);
            let e2 = [
                old[1] * e1[2] - old[2] * e1[1],
                old[2] * e1[0] - old[0] * e1[2],
                old[0] * e1[1] - old[1] * e1[0],
            ];
            let (sp, cp) = phi.sin_cos();
            let v = [0, 1, 2].map(|k| ct * old[k] + st * (cp * e1[k] + sp * e2[k]));
            (normalize(v), accept)
        }
    }
}

/// Outcome of one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    pub acceptance: f64,
    /// Sum of accepted energy changes.
    pub delta_energy: f64,
}

/// One checkerboard sweep (Λ³ attempts). `sweep_index` selects the random
/// stream.
pub fn metropolis_sweep(
    lat: &mut SpinLattice,
    geo: &Geometry,
    cfg: &MCConfig,
    proposal: Proposal,
    p: &ClassicalParams,
    sweep_index: u64,
) -> SweepStats {
    let beta = 1.0 / cfg.temperature;
    let mut accepted = 0usize;
    let mut delta_energy = 0.0;
    for color in 0..2 {
        let sites = &geo.colors[color];
        let stream = 2 * sweep_index + color as u64;
        let work = |(chunk_no, chunk): (usize, &[u32])| -> (Vec<(u32, [f64; 3])>, f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream);
            rng.set_word_pos((chunk_no * CHUNK * 8) as u128);
            let mut out = Vec::new();
            let mut de_sum = 0.0;
            for &site in chunk {
                let i = site as usize;
                let r = [
                    rng.next_u64(),
                    rng.next_u64(),
                    rng.next_u64(),
                    rng.next_u64(),
                ];
                let old = lat.spins[i];
                let (new, acc) = propose(old, proposal, r);
                let h = geo.local_field(lat, i, p);
                let de = -dot(h, [new[0] - old[0], new[1] - old[1], new[2] - old[2]]);
                if de <= 0.0 || acc < (-beta * de).exp() {
                    out.push((site, new));
                    de_sum += de;
                }
            }
            (out, de_sum)
        };
        let results: Vec<(Vec<(u32, [f64; 3])>, f64)> = if cfg.parallel {
            sites.par_chunks(CHUNK).enumerate().map(work).collect()
        } else {
            sites.chunks(CHUNK).enumerate().map(work).collect()
        };
        for (moves, de) in results {
            accepted += moves.len();
            delta_energy += de;
            for (i, s) in moves {
                lat.spins[i as usize] = s;
            }
        }
    }
    SweepStats {
        acceptance: accepted as f64 / lat.len() as f64,
        delta_energy,
    }
}

/// Reflects every spin about its local field, colour by colour. The move is
/// deterministic, energy-conserving and its own inverse.
pub fn overrelax_sweep(lat: &mut SpinLattice, geo: &Geometry, p: &ClassicalParams, parallel: bool) {
    for color in 0..2 {
        let sites = &geo.colors[color];
        let work = |chunk: &[u32]| -> Vec<[f64; 3]> {
            chunk
                .iter()
                .map(|&site| {
                    let i = site as usize;
                    let s = lat.spins[i];
                    let h = geo.local_field(lat, i, p);
                    let hh = dot(h, h);
                    if hh == 0.0 {
                        return s;
                    }
                    let k = 2.0 * dot(s, h) / hh;
                    normalize([k * h[0] - s[0], k * h[1] - s[1], k * h[2] - s[2]])
                })
                .collect()
        };
        let results: Vec<Vec<[f64; 3]>> = if parallel {
            sites.par_chunks(CHUNK).map(work).collect()
        } else {
            sites.chunks(CHUNK).map(work).collect()
        };
        for (chunk, new) in sites.chunks(CHUNK).zip(results) {
            for (&i, s) in chunk.iter().zip(new) {
                lat.spins[i as usize] = s;
            }
        }
    }
}

/// Langevin function coth(x) − 1/x.
fn langevin(x: f64) -> f64 {
    if x < 1e-4 {
        x / 3.0 - x.powi(3) / 45.0
    } else {
        1.0 / x.tanh() - 1.0 / x
    }
}

/// Thermal mean of S_i given its neighbours: L(β|h|) ĥ.
fn conditional_mean(
    lat: &SpinLattice,
    geo: &Geometry,
    i: usize,
    p: &ClassicalParams,
    beta: f64,
) -> [f64; 3] {
    let h = geo.local_field(lat, i, p);
    let n = dot(h, h).sqrt();
    if n == 0.0 {
        return [0.0; 3];
    }
    let l = langevin(beta * n);
    h.map(|v| l * v / n)
}

/// Mean and standard error from 20 blocks.
fn block_stats(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let blocks = 20.min(n);
    if blocks < 2 {
        return (mean, f64::NAN);
    }
    let size = n / blocks;
    let bm: Vec<f64> = (0..blocks)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = bm.iter().sum::<f64>() / blocks as f64;
    let var = bm.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (blocks - 1) as f64;
    (mean, (var / blocks as f64).sqrt())
}

/// Measurements of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub sx_center: f64,
    pub sx_center_err: f64,
    pub m_z: f64,
    pub m_z_err: f64,
    pub acceptance: f64,
    pub cone_half_angle: Option<f64>,
    /// ⟨S^x⟩ on the centre column at distance d = 0.. from the code plane
    /// (averaged over ±d).
    pub profile: Vec<f64>,
    pub final_energy: f64,
}

/// Thermalizes from the saturated state and measures.
pub fn simulate(
    lambda: usize,
    p: &ClassicalParams,
    cfg: &MCConfig,
) -> Result<(SpinLattice, Measurement)> {
    cfg.validate(lambda)?;
    if lambda.pow(3) > cfg.max_spins {
        return Err(Error::ResourceCap(format!(
            "Lambda^3 = {} spins exceeds the budget of {}",
            lambda.pow(3),
            cfg.max_spins
        )));
    }
    let geo = Geometry::new(lambda, &cfg.code);
    let mut lat = SpinLattice::saturated(lambda);
    let mut proposal = cfg.proposal;
    let mut sweep = 0u64;
    let mut acc_window = 0.0;
    for k in 0..cfg.sweeps_thermalize {
        let st = metropolis_sweep(&mut lat, &geo, cfg, proposal, p, sweep);
        for _ in 0..cfg.overrelax {
            overrelax_sweep(&mut lat, &geo, p, cfg.parallel);
        }
        sweep += 1;
        acc_window += st.acceptance;
        if cfg.auto_tune && (k + 1) % 10 == 0 {
            if let Proposal::Cone { half_angle } = proposal {
                let rate = acc_window / 10.0;
                let next = (half_angle * (rate / 0.5).clamp(0.5, 2.0)).clamp(1e-3, PI);
                proposal = Proposal::Cone { half_angle: next };
            }
            acc_window = 0.0;
        }
    }

    let beta = 1.0 / cfg.temperature;
    let half = lambda / 2;
    let (cx, cy, cz) = lat.coords(geo.center);
    let column: Vec<Vec<usize>> = (0..=half)
        .map(|d| {
            let mut v = vec![lat.index(cx, cy, (cz + d) % lambda)];
            if d > 0 && d < half {
                v.push(lat.index(cx, cy, (cz + lambda - d) % lambda));
            }
            v
        })
        .collect();
    let mut sx = Vec::with_capacity(cfg.sweeps_measure);
    let mut mz = Vec::with_capacity(cfg.sweeps_measure);
    let mut profile = vec![0.0; column.len()];
    let mut acc = 0.0;
    for _ in 0..cfg.sweeps_measure {
        let st = metropolis_sweep(&mut lat, &geo, cfg, proposal, p, sweep);
        for _ in 0..cfg.overrelax {
            overrelax_sweep(&mut lat, &geo, p, cfg.parallel);
        }
        sweep += 1;
        acc += st.acceptance;
        let probe = |i: usize| {
            if cfg.improved_estimator {
                conditional_mean(&lat, &geo, i, p, beta)[0]
            } else {
                lat.spins[i][0]
            }
        };
        sx.push(probe(geo.center));
        mz.push(lat.magnetization()[2]);
        for (d, sites) in column.iter().enumerate() {
            profile[d] += sites.iter().map(|&i| probe(i)).sum::<f64>() / sites.len() as f64;
        }
    }
    let n = cfg.sweeps_measure as f64;
    let (sx_center, sx_center_err) = block_stats(&sx);
    let (m_z, m_z_err) = block_stats(&mz);
    let final_energy = energy(&lat, &geo, p);
    Ok((
        lat,
        Measurement {
            sx_center,
            sx_center_err,
            m_z,
            m_z_err,
            acceptance: acc / n,
            cone_half_angle: match proposal {
                Proposal::Cone { half_angle } => Some(half_angle),
                Proposal::Sphere => None,
            },
            profile: profile.into_iter().map(|v| v / n).collect(),
            final_energy,
        },
    ))
}

/// Lattice parameters of one code size in the L sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig4Scaling {
    pub l: usize,
    pub l_h: f64,
    pub lambda: usize,
    pub h_z: f64,
}

/// Sweep scaling L_h = L², Λ = 2L_h, h_z = 2J/L_h² (classical S = 1).
pub fn fig4_scaling(l: usize, j: f64) -> Fig4Scaling {
    let l_h = (l * l) as f64;
    Fig4Scaling {
        l,
        l_h,
        lambda: 2 * l * l,
        h_z: 2.0 * j / (l_h * l_h),
    }
}

/// Alternative scaling: h_z ∝ 1/L⁴ with L_h = L², Λ = L³.
pub fn main_text_scaling(l: usize, j: f64) -> Fig4Scaling {
    let l_h = (l * l) as f64;
    let lambda = l.pow(3) + l.pow(3) % 2;
    Fig4Scaling {
        l,
        l_h,
        lambda,
        h_z: 2.0 * j / (l_h * l_h),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Row {
    pub scaling: Fig4Scaling,
    pub measurement: Measurement,
}

/// Runs the L sweep: one simulation per code size. `template.code.l` and
/// `plane_z` are overwritten per L; the seed is offset by L.
pub fn run_fig4(
    l_values: &[usize],
    j: f64,
    template: &MCConfig,
    scaling: fn(usize, f64) -> Fig4Scaling,
) -> Result<Vec<Fig4Row>> {
    for &l in l_values {
        let sc = scaling(l, j);
        if sc.lambda.pow(3) > template.max_spins {
            return Err(Error::ResourceCap(format!(
                "L = {l} needs Lambda^3 = {} spins, budget {}",
                sc.lambda.pow(3),
                template.max_spins
            )));
        }
    }
    l_values
        .iter()
        .map(|&l| {
            let sc = scaling(l, j);
            let mut cfg = template.clone();
            cfg.code.l = l;
            cfg.code.plane_z = sc.lambda / 2;
            cfg.seed = template.seed.wrapping_add(l as u64);
            let p = ClassicalParams { j, h_z: sc.h_z };
            let (_, m) = simulate(sc.lambda, &p, &cfg)?;
            Ok(Fig4Row {
                scaling: sc,
                measurement: m,
            })
        })
        .collect()
}

/// T = 0 linear response of the centre spin, −A Σ_code G(r), with the
/// lattice Green's function of 2J(3 − Σcos k) + h_z on the periodic Λ³
/// lattice. This equals the magnon χ_xx lattice sum at J/2 and S = 1.
pub fn linear_response_center(sc: &Fig4Scaling, a: f64, j: f64) -> Result<f64> {
    let fm = FMParams {
        j: j / 2.0,
        s: 1.0,
        h_z: sc.h_z,
        lambda: sc.lambda,
        ..Default::default()
    };
    let lo = (sc.l / 2) as i64;
    let mut total = 0.0;
    for dx in -lo..sc.l as i64 - lo {
        for dy in -lo..sc.l as i64 - lo {
            total += chi_xx_r_lattice([dx, dy, 0], &fm)?;
        }
    }
    Ok(-a * total)
}

/// Linear fit of |⟨S^x_center⟩| against L·A/J.
pub fn fig4_fit(rows: &[Fig4Row], a: f64, j: f64) -> crate::numeric::LinearFit {
    let x: Vec<f64> = rows.iter().map(|r| r.scaling.l as f64 * a / j).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.measurement.sx_center.abs()).collect();
    linear_fit(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(a: f64, l: usize) -> MCConfig {
        MCConfig {
            code: CodeCoupling { a, l, plane_z: 0 },
            ..Default::default()
        }
    }

    #[test]
    fn saturated_energy_and_single_flip() {
        let p = ClassicalParams { j: 1.0, h_z: 0.3 };
        let lam = 4;
        let geo = Geometry::new(
            lam,
            &CodeCoupling {
                a: 0.0,
                l: 2,
                plane_z: 0,
            },
        );
        let mut lat = SpinLattice::saturated(lam);
        let n = 64.0;
        assert!((energy(&lat, &geo, &p) - (-3.0 * n - 0.3 * n)).abs() < 1e-12);
        let p0 = ClassicalParams { j: 1.0, h_z: 0.0 };
        let e0 = energy(&lat, &geo, &p0);
        lat.set_spin(5, [0.0, 0.0, 1.0]);
        assert!((energy(&lat, &geo, &p0) - e0 - 12.0).abs() < 1e-12);
    }

    #[test]
    fn energy_rotation_invariance_without_code_field() {
        let p = ClassicalParams { j: 1.0, h_z: 0.2 };
        let c = MCConfig {
            temperature: 2.0,
            sweeps_thermalize: 0,
            ..cfg(0.0, 2)
        };
        let geo = Geometry::new(6, &c.code);
        let mut lat = SpinLattice::saturated(6);
        for s in 0..5 {
            metropolis_sweep(&mut lat, &geo, &c, Proposal::Sphere, &p, s);
        }
        let e = energy(&lat, &geo, &p);
        lat.rotate_z(0.83);
        assert!((energy(&lat, &geo, &p) - e).abs() < 1e-10 * e.abs());
    }

    #[test]
    fn zero_temperature_rejects_uphill_moves() {
        let p = ClassicalParams { j: 1.0, h_z: 0.01 };
        let c = MCConfig {
            temperature: 1e-9,
            ..cfg(0.0, 2)
        };
        let geo = Geometry::new(6, &c.code);
        let mut lat = SpinLattice::saturated(6);
        let st = metropolis_sweep(
            &mut lat,
            &geo,
            &c,
            Proposal::Cone { half_angle: 0.3 },
            &p,
            0,
        );
        assert_eq!(st.acceptance, 0.0);
    }

    #[test]
    fn serial_and_parallel_are_bit_identical() {
        let p = ClassicalParams { j: 1.0, h_z: 0.05 };
        let mut c = MCConfig {
            temperature: 0.7,
            ..cfg(0.1, 4)
        };
        let lam = 20; // more than one chunk per colour
        let geo = Geometry::new(lam, &c.code);
        let mut a = SpinLattice::saturated(lam);
        let mut b = SpinLattice::saturated(lam);
        for s in 0..4 {
            c.parallel = true;
            metropolis_sweep(&mut a, &geo, &c, c.proposal, &p, s);
            c.parallel = false;
            metropolis_sweep(&mut b, &geo, &c, c.proposal, &p, s);
        }
        assert_eq!(a, b);
        let mut again = SpinLattice::saturated(lam);
        for s in 0..4 {
            metropolis_sweep(&mut again, &geo, &c, c.proposal, &p, s);
        }
        assert_eq!(a, again);
    }

    #[test]
    fn infinite_temperature_magnetization_is_random_walk() {
        let p = ClassicalParams { j: 1.0, h_z: 0.0 };
        let c = MCConfig {
            temperature: f64::INFINITY,
            ..cfg(0.0, 2)
        };
        let lam = 16;
        let geo = Geometry::new(lam, &c.code);
        let mut lat = SpinLattice::saturated(lam);
        let mut sum = 0.0;
        let trials = 20;
        for s in 0..trials {
            let st = metropolis_sweep(&mut lat, &geo, &c, Proposal::Sphere, &p, s);
            assert_eq!(st.acceptance, 1.0);
            let m = lat.magnetization();
            sum += dot(m, m);
        }
        // E|m|² = 1/N for N independent unit vectors.
        let n = lat.len() as f64;
        let ratio = sum / trials as f64 * n;
        assert!(ratio > 0.5 && ratio < 1.5, "{ratio}");
        assert!(lat.max_norm_deviation() < 1e-12);
    }

    #[test]
    fn incremental_energy_matches_recomputation() {
        let p = ClassicalParams { j: 1.0, h_z: 0.02 };
        let c = MCConfig {
            temperature: 0.4,
            ..cfg(0.2, 4)
        };
        let geo = Geometry::new(8, &c.code);
        let mut lat = SpinLattice::saturated(8);
        let mut e = energy(&lat, &geo, &p);
        for s in 0..100 {
            e += metropolis_sweep(&mut lat, &geo, &c, c.proposal, &p, s).delta_energy;
        }
        let full = energy(&lat, &geo, &p);
        assert!(((e - full) / full).abs() < 1e-8);
        assert!(lat.max_norm_deviation() < 1e-12);
    }

    #[test]
    fn detailed_balance_histogram() {
        // With J = 0 each spin is independent in the field H = h_z ẑ + A x̂
        // (E = H·S), so cos θ relative to −Ĥ follows e^{β|H| cos θ}.
        let p = ClassicalParams { j: 0.0, h_z: 0.6 };
        let c = MCConfig {
            temperature: 0.5,
            proposal: Proposal::Cone { half_angle: 1.2 },
            ..cfg(0.8, 2)
        };
        let geo = Geometry::new(2, &c.code);
        let site = geo.code_sites()[0];
        let hvec = [0.8, 0.0, 0.6];
        let hn = 1.0;
        let beta = 1.0 / c.temperature;
        let mut lat = SpinLattice::saturated(2);
        let bins = 10;
        let mut hist = vec![0usize; bins];
        let samples = 40_000;
        for s in 0..(samples * 3) as u64 {
            metropolis_sweep(&mut lat, &geo, &c, c.proposal, &p, s);
            if s % 3 == 0 {
                let ct = -dot(lat.spin(site), hvec) / hn;
                let b = (((ct + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
                hist[b] += 1;
            }
        }
        let z = (beta * hn).exp() - (-beta * hn).exp();
        for (b, &count) in hist.iter().enumerate() {
            let lo = -1.0 + 2.0 * b as f64 / bins as f64;
            let hi = lo + 2.0 / bins as f64;
            let prob = ((beta * hn * hi).exp() - (beta * hn * lo).exp()) / z;
            let expected = prob * samples as f64;
            let sigma = (samples as f64 * prob * (1.0 - prob)).sqrt();
            // Residual autocorrelation of the chain inflates the variance;
            // allow 3σ of a chain with integrated time ≲ 2.
            assert!(
                ((count as f64) - expected).abs() < 3.0 * sigma * 2f64.sqrt(),
                "bin {b}: {count} vs {expected}"
            );
        }
    }

    #[test]
    fn overrelaxation_conserves_energy_and_is_an_involution() {
        let p = ClassicalParams { j: 1.0, h_z: 0.07 };
        let c = MCConfig {
            temperature: 0.8,
            ..cfg(0.3, 4)
        };
        let geo = Geometry::new(8, &c.code);
        let mut lat = SpinLattice::saturated(8);
        for s in 0..5 {
            metropolis_sweep(&mut lat, &geo, &c, Proposal::Sphere, &p, s);
        }
        let e0 = energy(&lat, &geo, &p);
        let mut a = lat.clone();
        overrelax_sweep(&mut a, &geo, &p, true);
        assert!((energy(&a, &geo, &p) - e0).abs() < 1e-10 * e0.abs());
        assert_ne!(a, lat);
        let mut b = lat.clone();
        overrelax_sweep(&mut b, &geo, &p, false);
        assert_eq!(a, b);
    }

    #[test]
    fn zero_coupling_gives_zero_tilt() {
        let c = MCConfig {
            temperature: 0.1,
            sweeps_thermalize: 100,
            sweeps_measure: 400,
            ..cfg(0.0, 2)
        };
        let rows = run_fig4(&[2], 1.0, &c, fig4_scaling).unwrap();
        let m = &rows[0].measurement;
        assert!(
            m.sx_center.abs() < 3.0 * m.sx_center_err,
            "{} ± {}",
            m.sx_center,
            m.sx_center_err
        );
        assert!(m.m_z < -0.9);
    }

    #[test]
    fn static_tilt_decays_away_from_the_code() {
        // Near T = 0 the chain relaxes to the static response.
        let c = MCConfig {
            temperature: 1e-4,
            sweeps_thermalize: 600,
            sweeps_measure: 50,
            ..cfg(0.05, 4)
        };
        let p = ClassicalParams { j: 1.0, h_z: 0.01 };
        let mut c2 = c.clone();
        c2.code.plane_z = 6;
        let (_, m) = simulate(12, &p, &c2).unwrap();
        assert!(m.sx_center < 0.0);
        // Beyond Λ/4 the periodic image of the code takes over.
        for w in m.profile[..=3].windows(2) {
            assert!(w[1].abs() < w[0].abs(), "{:?}", m.profile);
        }
    }

    #[test]
    fn low_temperature_matches_linear_response() {
        let c = MCConfig {
            temperature: 0.002,
            sweeps_thermalize: 200,
            sweeps_measure: 400,
            overrelax: 4,
            ..cfg(0.05, 2)
        };
        let rows = run_fig4(&[2], 1.0, &c, fig4_scaling).unwrap();
        let exact = linear_response_center(&rows[0].scaling, 0.05, 1.0).unwrap();
        let m = &rows[0].measurement;
        assert!(
            ((m.sx_center - exact) / exact).abs() < 0.05,
            "{} vs {exact}",
            m.sx_center
        );
    }

    #[test]
    fn resource_cap_and_validation() {
        let c = MCConfig {
            max_spins: 1000,
            ..cfg(0.05, 3)
        };
        assert!(matches!(
            run_fig4(&[3], 1.0, &c, fig4_scaling),
            Err(Error::ResourceCap(_))
        ));
        assert!(simulate(5, &ClassicalParams { j: 1.0, h_z: 0.0 }, &cfg(0.0, 2)).is_err());
        let sc = fig4_scaling(3, 1.0);
        assert_eq!(sc.lambda, 18);
        assert!((sc.h_z - 2.0 / 81.0).abs() < 1e-15);
    }
}
