use gadgetlab::backaction::{
    square_plaquettes, sx_distance, sx_fresnel, sx_infinite_code, sx_lattice_series, time_grid,
    CodeGeometry, TimeSeries,
};
use gadgetlab::exact_diag::{fit_effective, spectra_csv};
use gadgetlab::magnon::{
    chi_xx_r, chi_xx_r_lattice, chi_xx_r_periodic, coupling_matrix, magnetic_length, FMParams,
};
use gadgetlab::metropolis::{
    fig4_fit, fig4_scaling, linear_response_center, main_text_scaling, run_fig4, CodeCoupling,
    MCConfig, Proposal,
};
use gadgetlab::sw::{closed_form, gadget_effective, EffectiveCoefficients, GadgetSpec, SPEC_KEYS};
use gadgetlab::thermo::{
    adiabaticity_margin, chemical_potential, disk_chemical_potential, error_rate, longitudinal_mu,
    thermal_energy, Longitudinal, NoiseParams, ADIABATIC_THRESHOLD,
};

use crate::output::{sci, Writer};
use crate::schema::Params;
use crate::CliError;

fn gadget_spec(p: &Params) -> Result<GadgetSpec, CliError> {
    let mut spec = GadgetSpec::default();
    for k in SPEC_KEYS {
        spec.set(k, p.f64(k)?)?;
    }
    Ok(spec)
}

fn fm_params(p: &Params) -> Result<FMParams, CliError> {
    let fm = FMParams {
        j: p.f64("j")?,
        s: p.f64("s")?,
        h_z: p.f64("h_z")?,
        lambda: p.usize("lambda")?,
        ..Default::default()
    };
    fm.validate()?;
    Ok(fm)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b) / b
    }
}

pub fn gadget_verify(p: &Params, out: &mut Writer) -> Result<(), CliError> {
    let spec = gadget_spec(p)?;
    let fit = fit_effective(&spec, &p.f64_list("s_values")?)?;
    let engine = gadget_effective(&spec)?;
    let closed = closed_form(&spec);
    let mut csv =
        String::from("coefficient,closed_form,engine,exact_fit,rel_dev_closed,rel_dev_engine\n");
    for (i, name) in EffectiveCoefficients::NAMES.iter().enumerate() {
        let (c, e, x) = (
            closed.as_array()[i],
            engine.as_array()[i],
            fit.coefficients.as_array()[i],
        );
        csv.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            sci(c),
            sci(e),
            sci(x),
            sci(rel(c, x)),
            sci(rel(e, x))
        ));
    }
    out.csv("gadget_verify.csv", &csv)?;
    out.csv("gadget_spectra.csv", &spectra_csv(&fit.spectra))?;
    println!(
        "fit residual {:e}, u/v asymmetry {:e}",
        fit.max_residual, fit.asymmetry
    );
    Ok(())
}

pub fn gadget_sweep(p: &Params, out: &mut Writer) -> Result<(), CliError> {
    let base = gadget_spec(p)?;
    let key = p.choice("sweep_key")?;
    let s_values = p.f64_list("s_values")?;
    let mut csv = format!("{key},source,{}\n", EffectiveCoefficients::csv_header());
    for v in p.f64_list("sweep_values")? {
        let mut spec = base.clone();
        spec.set(key, v)?;
        spec.validate()?;
        let fit = fit_effective(&spec, &s_values)?;
        for (source, c) in [
            ("exact_fit", fit.coefficients),
            ("engine", gadget_effective(&spec)?),
            ("closed_form", closed_form(&spec)),
        ] {
            let row: Vec<String> = c.as_array().iter().map(|x| sci(*x)).collect();
            csv.push_str(&format!("{},{source},{}\n", sci(v), row.join(",")));
        }
    }
    out.csv("gadget_sweep.csv", &csv)
}

pub fn susceptibility(p: &Params, out: &mut Writer) -> Result<(), CliError> {
    let fm = fm_params(p)?;
    let (r_min, r_max) = (p.usize("r_min")?, p.usize("r_max")?);
    if r_min < 1 || r_max < r_min {
        return Err(CliError::Run(gadgetlab::Error::InvalidParameter(format!(
            "need 1 <= r_min <= r_max, got {r_min}..{r_max}"
        ))));
    }
    println!("magnetic length L_h = {:e}", magnetic_length(&fm)?);
    let mut csv = String::from("r,chi_continuum,chi_periodic,chi_lattice\n");
    for r in r_min..=r_max {
        let rf = r as f64;
        csv.push_str(&format!(
            "{r},{},{},{}\n",
            sci(chi_xx_r(rf, &fm)?),
            sci(chi_xx_r_periodic([rf, 0.0, 0.0], &fm)?),
            sci(chi_xx_r_lattice([r as i64, 0, 0], &fm)?)
        ));
    }
    out.csv("susceptibility.csv", &csv)
}

pub fn coupling(p: &Params, out: &mut Writer) -> Result<(), CliError> {
    let fm = fm_params(p)?;
    let (a, l) = (p.f64("a")?, p.usize("l")?);
    let cm = coupling_matrix(a, l, &fm)?;
    let mu = chemical_potential(&cm, cm.central_index());
    println!(
        "central-plaquette chemical potential {mu:e} (disk estimate {:e})",
        disk_chemical_potential(a, l, fm.j)
    );
    out.csv("coupling_matrix.csv", &cm.to_csv())
}

pub fn thermo(p: &Params, out: &mut Writer) -> Result<(), CliError> {
    let fm = fm_params(p)?;
    let a = p.f64("a")?;
    let beta = p.f64("beta")?;
    let n = u32::try_from(p.usize("n")?)
        .map_err(|_| CliError::Config("key `n` is out of range".into()))?;
    let np = NoiseParams {
        kappa_n: p.f64("kappa")?,
        n,
        beta,
        omega_c: p.f64("omega_c")?,
    };
    np.validate()?;
    let (ratio, adiabatic) = adiabaticity_margin(a, &np, ADIABATIC_THRESHOLD)?;
    println!(
        "gamma(-A) = {:e}, gamma(-A)/A = {ratio:e}, adiabatic (< {ADIABATIC_THRESHOLD}) = {adiabatic}",
        error_rate(-a, &np)
    );
    let include_2sa = p.bool("include_2sa")?;
    let t = p.f64("t")?;
    let mut csv = String::from("l,mu,mu_disk,thermal_energy,mu_longitudinal\n");
    for l in p.usize_list("l_values")? {
        let cm = coupling_matrix(a, l, &fm)?;
        let mu = chemical_potential(&cm, cm.central_index());
        let long = longitudinal_mu(&Longitudinal {
            l,
            t,
            d: fm.diffusion(),
            a,
            s: fm.s,
            include_2sa,
        })?;
        csv.push_str(&format!(
            "{l},{},{},{},{}\n",
            sci(mu),
            sci(disk_chemical_potential(a, l, fm.j)),
            sci(thermal_energy(l, mu, beta)?),
            sci(long.mu)
        ));
    }
    out.csv("thermo.csv", &csv)
}

pub fn metropolis(p: &Params, out: &mut Writer) -> Result<(), CliError> {
    let (j, a) = (p.f64("j")?, p.f64("a")?);
    let cfg = MCConfig {
        temperature: p.f64("temperature")?,
        sweeps_thermalize: p.usize("sweeps_thermalize")?,
        sweeps_measure: p.usize("sweeps_measure")?,
        seed: p.u64("seed")?,
        proposal: Proposal::Cone {
            half_angle: p.f64("cone")?,
        },
        code: CodeCoupling {
            a,
            l: 1,
            plane_z: 0,
        },
        auto_tune: p.bool("auto_tune")?,
        parallel: p.bool("parallel")?,
        improved_estimator: true,
        overrelax: p.usize("overrelax")?,
        max_spins: p.usize("max_spins")?,
    };
    let scaling = match p.choice("scaling")? {
        "main" => main_text_scaling,
        _ => fig4_scaling,
    };
    let rows = run_fig4(&p.usize_list("l_values")?, j, &cfg, scaling)?;
    let mut csv = String::from(
        "l,lambda,l_h,h_z,sx_center,sx_center_err,m_z,m_z_err,acceptance,cone_half_angle,linear_response\n",
    );
    let mut profile = String::from("l,d,sx\n");
    for row in &rows {
        let (sc, m) = (&row.scaling, &row.measurement);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            sc.l,
            sc.lambda,
            sci(sc.l_h),
            sci(sc.h_z),
            sci(m.sx_center),
            sci(m.sx_center_err),
            sci(m.m_z),
            sci(m.m_z_err),
            sci(m.acceptance),
            sci(m.cone_half_angle.unwrap_or(f64::NAN)),
            sci(linear_response_center(sc, a, j)?)
        ));
        for (d, v) in m.profile.iter().enumerate() {
            profile.push_str(&format!("{},{d},{}\n", sc.l, sci(*v)));
        }
    }
    if rows.len() >= 2 {
        let fit = fig4_fit(&rows, a, j);
        println!(
            "|<S_x>| vs LA/J: slope {:e}, R^2 {:.4}",
            fit.slope, fit.r_squared
        );
    }
    out.csv("metropolis_fig4.csv", &csv)?;
    out.csv("metropolis_profile.csv", &profile)
}

pub fn backaction(p: &Params, out: &mut Writer) -> Result<(), CliError> {
    let fm = fm_params(p)?;
    let a = p.f64("a")?;
    let times = time_grid(p.f64("t_max")?, p.usize("n_times")?)?;
    let side = p.usize("code_side")?;
    let height = p.usize("height")?;
    let site = [0.0, 0.0, height as f64];
    let values: Vec<f64> = match p.choice("regime")? {
        "fresnel" => times
            .iter()
            .map(|&t| sx_fresnel(site, t, a, &CodeGeometry::Square { side }, &fm))
            .collect::<Result<_, _>>()?,
        "disk" => {
            let radius = p.f64("radius")?;
            times
                .iter()
                .map(|&t| sx_fresnel(site, t, a, &CodeGeometry::Disk { radius }, &fm))
                .collect::<Result<_, _>>()?
        }
        "lattice" => sx_lattice_series(
            [0, 0, height as i64],
            &times,
            a,
            &square_plaquettes(side),
            &fm,
        )?,
        "infinite" => times.iter().map(|&t| sx_infinite_code(t, a, &fm)).collect(),
        _ => times
            .iter()
            .map(|&t| sx_distance(t, height as f64, a, &fm))
            .collect::<Result<_, _>>()?,
    };
    let series = TimeSeries::new(times, values, fm.s)?;
    out.csv("backaction.csv", &series.to_csv())
}
