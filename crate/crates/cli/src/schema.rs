//! Per-subcommand key tables and value resolution
//! (defaults, then config file, then command-line overrides).

use std::collections::BTreeMap;

use gadgetlab::config;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    F64,
    Usize,
    U64,
    Bool,
    Choice(&'static [&'static str]),
    F64List,
    UsizeList,
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub unit: &'static str,
    pub default: &'static str,
    pub help: &'static str,
    pub kind: Kind,
}

const fn key(
    name: &'static str,
    unit: &'static str,
    default: &'static str,
    help: &'static str,
    kind: Kind,
) -> Key {
    Key {
        name,
        unit,
        default,
        help,
        kind,
    }
}

pub struct Subcommand {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
}

const GADGET: [Key; 7] = [
    key("delta", "energy", "1.0", "mediator gap Δ", Kind::F64),
    key(
        "alpha",
        "energy",
        "0.02",
        "mediator-mediator coupling α",
        Kind::F64,
    ),
    key(
        "beta",
        "energy",
        "0.0",
        "ZZ coupling β between the f and g mediators",
        Kind::F64,
    ),
    key(
        "gamma",
        "energy",
        "0.02",
        "coupling γ of the u mediator to the FM spin",
        Kind::F64,
    ),
    key(
        "delta_pair",
        "energy",
        "0.0",
        "direct code-pair coupling δ",
        Kind::F64,
    ),
    key(
        "epsilon",
        "energy",
        "0.02",
        "code-mediator coupling ε",
        Kind::F64,
    ),
    key(
        "tau",
        "energy",
        "0.0",
        "direct code-FM coupling τ",
        Kind::F64,
    ),
];

const S_VALUES: Key = key(
    "s_values",
    "dimensionless",
    "-1,-0.5,0,0.5,1",
    "FM spin values S_p^x used by the exact fit",
    Kind::F64List,
);

const FM: [Key; 4] = [
    key("j", "energy", "1.0", "exchange J", Kind::F64),
    key("s", "dimensionless", "0.5", "spin length S", Kind::F64),
    key("h_z", "energy", "1e-3", "Zeeman field h_z", Kind::F64),
    key(
        "lambda",
        "sites",
        "64",
        "linear lattice size Λ",
        Kind::Usize,
    ),
];

macro_rules! keys {
    ($($part:expr),* $(,)?) => {{
        const N: usize = 0 $(+ $part.len())*;
        const fn build() -> [Key; N] {
            let mut out = [key("", "", "", "", Kind::F64); N];
            let mut i = 0;
            $(
                let part = $part;
                let mut k = 0;
                while k < part.len() {
                    out[i] = part[k];
                    i += 1;
                    k += 1;
                }
            )*
            out
        }
        const KEYS: [Key; N] = build();
        &KEYS
    }};
}

pub fn subcommands() -> Vec<Subcommand> {
    vec![
        Subcommand {
            name: "gadget-verify",
            about: "Compare the closed-form effective coefficients with the SW engine and the exact-diagonalization fit",
            keys: keys!(GADGET, [S_VALUES]),
        },
        Subcommand {
            name: "gadget-sweep",
            about: "Sweep one gadget coupling and tabulate exact and closed-form coefficients",
            keys: keys!(
                GADGET,
                [
                    S_VALUES,
                    key(
                        "sweep_key",
                        "choice",
                        "epsilon",
                        "coupling to sweep",
                        Kind::Choice(&["delta", "alpha", "beta", "gamma", "delta_pair", "epsilon", "tau"])
                    ),
                    key("sweep_values", "energy", "0.01,0.02,0.04", "values of the swept coupling", Kind::F64List),
                ]
            ),
        },
        Subcommand {
            name: "susceptibility",
            about: "Transverse susceptibility chi_xx(r): continuum, periodic images and lattice sum",
            keys: keys!(
                FM,
                [
                    key("r_min", "lattice units", "1", "smallest separation", Kind::Usize),
                    key("r_max", "lattice units", "16", "largest separation", Kind::Usize),
                ]
            ),
        },
        Subcommand {
            name: "coupling-matrix",
            about: "Mediated plaquette couplings J_pp' = -A^2 chi_xx(r) on an L x L code",
            keys: keys!(
                FM,
                [
                    key("a", "energy", "0.1", "code-FM coupling A", Kind::F64),
                    key("l", "plaquettes", "8", "code linear size L", Kind::Usize),
                ]
            ),
        },
        Subcommand {
            name: "thermo",
            about: "Chemical potential, thermal energy, error rate and the longitudinal logarithmic potential versus L",
            keys: keys!(
                FM,
                [
                    key("a", "energy", "0.1", "code-FM coupling A", Kind::F64),
                    key("l_values", "plaquettes", "8,16,24,32", "code sizes L", Kind::UsizeList),
                    key("beta", "1/energy", "10.0", "inverse temperature β of the code bath", Kind::F64),
                    key("kappa", "energy^(1-n)", "0.01", "bath coupling κ_n", Kind::F64),
                    key("n", "dimensionless", "1", "bath spectral exponent n", Kind::Usize),
                    key("omega_c", "energy", "10.0", "bath cutoff ω_c", Kind::F64),
                    key("t", "energy", "0.1", "FM temperature T (longitudinal coupling)", Kind::F64),
                    key("include_2sa", "bool", "true", "add 2SA to the longitudinal μ", Kind::Bool),
                ]
            ),
        },
        Subcommand {
            name: "metropolis-fig4",
            about: "Classical Heisenberg Metropolis runs of <S_center^x> against code size L",
            keys: keys!([
                key("j", "energy", "1.0", "exchange J", Kind::F64),
                key("a", "energy", "0.05", "code-FM coupling A", Kind::F64),
                key("l_values", "plaquettes", "3,4,5,6", "code sizes L", Kind::UsizeList),
                key("scaling", "choice", "fig4", "lattice scaling: fig4 (Λ=2L²) or main (Λ≈L³)", Kind::Choice(&["fig4", "main"])),
                key("temperature", "energy", "0.002", "temperature T", Kind::F64),
                key("sweeps_thermalize", "sweeps", "300", "thermalization sweeps", Kind::Usize),
                key("sweeps_measure", "sweeps", "1000", "measurement sweeps", Kind::Usize),
                key("overrelax", "sweeps", "4", "over-relaxation sweeps per Metropolis sweep", Kind::Usize),
                key("cone", "rad", "0.5", "initial cone half-angle", Kind::F64),
                key("auto_tune", "bool", "true", "tune the cone to 50% acceptance while thermalizing", Kind::Bool),
                key("seed", "integer", "2024", "RNG seed", Kind::U64),
                key("parallel", "bool", "true", "parallel checkerboard sweeps", Kind::Bool),
                key("max_spins", "spins", "400000", "memory budget Λ³", Kind::Usize),
            ]),
        },
        Subcommand {
            name: "backaction",
            about: "Time-dependent FM tilt <S^x(t)> induced by the code",
            keys: keys!(
                FM,
                [
                    key(
                        "regime",
                        "choice",
                        "fresnel",
                        "fresnel (square code), disk, lattice, infinite or distance",
                        Kind::Choice(&["fresnel", "disk", "lattice", "infinite", "distance"])
                    ),
                    key("a", "energy", "0.01", "code-FM coupling A", Kind::F64),
                    key("t_max", "1/energy", "40.0", "final time", Kind::F64),
                    key("n_times", "points", "40", "number of equally spaced times", Kind::Usize),
                    key("code_side", "plaquettes", "8", "square code side (fresnel, lattice)", Kind::Usize),
                    key("radius", "lattice units", "50.0", "disk radius (disk)", Kind::F64),
                    key("height", "lattice units", "1", "spin height above the code plane", Kind::Usize),
                ]
            ),
        },
    ]
}

/// Resolved values with their origin.
pub struct Params {
    values: BTreeMap<&'static str, (String, String)>,
    keys: &'static [Key],
}

impl Params {
    /// `file` is (path, text); `overrides` are (key, value) from the command line.
    pub fn resolve(
        keys: &'static [Key],
        file: Option<(&str, &str)>,
        overrides: &[(&'static str, String)],
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<&'static str, (String, String)> = keys
            .iter()
            .map(|k| (k.name, (k.default.to_string(), "default".to_string())))
            .collect();
        if let Some((path, text)) = file {
            let entries =
                config::parse(text).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            for e in entries {
                let k = keys.iter().find(|k| k.name == e.key).ok_or_else(|| {
                    CliError::Config(format!("{path}: line {}: unknown key `{}`", e.line, e.key))
                })?;
                values.insert(k.name, (e.value, format!("{path}:{}", e.line)));
            }
        }
        for (name, v) in overrides {
            values.insert(name, (v.clone(), "command line".to_string()));
        }
        let p = Self { values, keys };
        for k in keys {
            p.check(k)?;
        }
        Ok(p)
    }

    fn check(&self, k: &Key) -> Result<(), CliError> {
        match k.kind {
            Kind::F64 => self.f64(k.name).map(drop),
            Kind::Usize => self.usize(k.name).map(drop),
            Kind::U64 => self.u64(k.name).map(drop),
            Kind::Bool => self.bool(k.name).map(drop),
            Kind::Choice(_) => self.choice(k.name).map(drop),
            Kind::F64List => self.f64_list(k.name).map(drop),
            Kind::UsizeList => self.usize_list(k.name).map(drop),
        }
    }

    fn raw(&self, name: &str) -> (&str, &str) {
        let (v, src) = self
            .values
            .get(name)
            .unwrap_or_else(|| panic!("key `{name}` not in schema"));
        (v.trim(), src)
    }

    fn mismatch(&self, name: &str, expected: &str) -> CliError {
        let (v, src) = self.raw(name);
        CliError::Config(format!("{src}: key `{name}` expects {expected}, got `{v}`"))
    }

    fn parse<T: std::str::FromStr>(&self, name: &str, expected: &str) -> Result<T, CliError> {
        self.raw(name)
            .0
            .parse()
            .map_err(|_| self.mismatch(name, expected))
    }

    pub fn f64(&self, name: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(name, "a number")?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.mismatch(name, "a finite number"))
        }
    }

    pub fn usize(&self, name: &str) -> Result<usize, CliError> {
        self.parse(name, "a non-negative integer")
    }

    pub fn u64(&self, name: &str) -> Result<u64, CliError> {
        self.parse(name, "a non-negative integer")
    }

    pub fn bool(&self, name: &str) -> Result<bool, CliError> {
        self.parse(name, "true or false")
    }

    pub fn choice(&self, name: &str) -> Result<&str, CliError> {
        let k = self
            .keys
            .iter()
            .find(|k| k.name == name)
            .expect("schema key");
        let Kind::Choice(options) = k.kind else {
            panic!("`{name}` is not a choice key")
        };
        let v = self.raw(name).0;
        if options.contains(&v) {
            Ok(v)
        } else {
            Err(self.mismatch(name, &format!("one of {}", options.join("|"))))
        }
    }

    fn list<T: std::str::FromStr>(&self, name: &str, expected: &str) -> Result<Vec<T>, CliError> {
        let v = self.raw(name).0;
        if v.is_empty() {
            return Err(self.mismatch(name, expected));
        }
        v.split(',')
            .map(|x| x.trim().parse().map_err(|_| self.mismatch(name, expected)))
            .collect()
    }

    pub fn f64_list(&self, name: &str) -> Result<Vec<f64>, CliError> {
        self.list(name, "a comma-separated list of numbers")
    }

    pub fn usize_list(&self, name: &str) -> Result<Vec<usize>, CliError> {
        self.list(name, "a comma-separated list of integers")
    }

    /// (key, value) pairs in schema order.
    pub fn record(&self) -> Vec<(String, String)> {
        self.keys
            .iter()
            .map(|k| (k.name.to_string(), self.raw(k.name).0.to_string()))
            .collect()
    }
}
