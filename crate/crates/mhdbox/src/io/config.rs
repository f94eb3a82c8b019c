//! Flat `key = value` run configuration with `#` comments.
//!
//! Every malformed input produces a diagnostic naming the offending key.

use crate::dynamics::{Form, InitialData, SolverConfig};
use crate::error::{MhdError, Result};
use crate::grid::Grid;
use crate::monitors::{CriterionKind, CriterionSpec};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid_n: [usize; 3],
    pub box_length: f64,
    pub dt: f64,
    pub t_end: f64,
    pub nu: f64,
    pub eta: f64,
    pub dealias: bool,
    pub form: Form,
    pub init: InitialData,
    pub seed: u64,
    pub criteria: Vec<CriterionSpec>,
    pub sample_every: usize,
    pub checkpoint_every: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_n, self.box_length)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            nu: self.nu,
            eta: self.eta,
            dealias: self.dealias,
            form: self.form,
        }
    }

    /// First velocity_z spec of the criteria list (falls back to the
    /// Theorem boundary pair (3, ∞)); feeds the norm_uz_alpha/M_t columns.
    pub fn velocity_spec(&self) -> CriterionSpec {
        self.criteria
            .iter()
            .find(|c| c.kind == CriterionKind::VelocityZ)
            .copied()
            .unwrap_or(CriterionSpec {
                kind: CriterionKind::VelocityZ,
                alpha: 3.0,
                beta: f64::INFINITY,
            })
    }

    /// First pressure_z spec (falls back to (12/7, ∞)).
    pub fn pressure_spec(&self) -> CriterionSpec {
        self.criteria
            .iter()
            .find(|c| c.kind == CriterionKind::PressureZ)
            .copied()
            .unwrap_or(CriterionSpec {
                kind: CriterionKind::PressureZ,
                alpha: 12.0 / 7.0,
                beta: f64::INFINITY,
            })
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| MhdError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                MhdError::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(MhdError::Config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            map.insert(key, value.trim().to_string());
        }

        let grid_n = match map.get("grid_n") {
            None => return Err(MhdError::Config("missing required key `grid_n`".into())),
            Some(v) => parse_grid_n(v)?,
        };
        let dt = required_f64(&map, "dt")?;
        let t_end = required_f64(&map, "t_end")?;
        let box_length = optional_f64(&map, "box_length", std::f64::consts::TAU)?;
        let nu = optional_f64(&map, "nu", 1.0)?;
        let eta = optional_f64(&map, "eta", 1.0)?;
        let dealias = optional_bool(&map, "dealias", true)?;
        let seed = optional_u64(&map, "seed", 0)?;
        let sample_every = optional_usize(&map, "sample_every", 1)?;
        let checkpoint_every = optional_usize(&map, "checkpoint_every", 0)?;
        let out_dir = PathBuf::from(map.get("out_dir").cloned().unwrap_or_else(|| "out".into()));
        let form = match map.get("form").map(|s| s.as_str()) {
            None | Some("primitive") => Form::Primitive,
            Some("elsasser") => Form::Elsasser,
            Some(other) => {
                return Err(MhdError::Config(format!(
                    "key `form`: expected primitive or elsasser, got `{other}`"
                )))
            }
        };
        let init = parse_init(&map)?;
        let criteria = match map.get("criteria") {
            None => Vec::new(),
            Some(v) => parse_criteria(v)?,
        };

        if !(dt > 0.0) {
            return Err(MhdError::Config(format!("key `dt`: must be positive, got {dt}")));
        }
        if nu < 0.0 {
            return Err(MhdError::Config(format!("key `nu`: must be nonnegative, got {nu}")));
        }
        if eta < 0.0 {
            return Err(MhdError::Config(format!("key `eta`: must be nonnegative, got {eta}")));
        }
        if sample_every == 0 {
            return Err(MhdError::Config("key `sample_every`: must be >= 1".into()));
        }

        let cfg = RunConfig {
            grid_n,
            box_length,
            dt,
            t_end,
            nu,
            eta,
            dealias,
            form,
            init,
            seed,
            criteria,
            sample_every,
            checkpoint_every,
            out_dir,
        };
        cfg.grid()?;
        Ok(cfg)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "grid_n",
    "box_length",
    "dt",
    "t_end",
    "nu",
    "eta",
    "dealias",
    "form",
    "init",
    "init_amplitude",
    "init_epsilon",
    "init_kmax",
    "init_energy_u",
    "init_energy_b",
    "init_checkpoint",
    "seed",
    "criteria",
    "sample_every",
    "checkpoint_every",
    "out_dir",
];

fn parse_grid_n(v: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = v.split('x').collect();
    let bad = || MhdError::Config(format!("key `grid_n`: expected N or NXxNYxNZ, got `{v}`"));
    match parts.len() {
        1 => {
            let n: usize = parts[0].trim().parse().map_err(|_| bad())?;
            Ok([n, n, n])
        }
        3 => {
            let mut n = [0usize; 3];
            for (slot, p) in n.iter_mut().zip(&parts) {
                *slot = p.trim().parse().map_err(|_| bad())?;
            }
            Ok(n)
        }
        _ => Err(bad()),
    }
}

fn parse_f64_key(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| MhdError::Config(format!("key `{key}`: expected a number, got `{v}`")))
}

fn required_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    match map.get(key) {
        None => Err(MhdError::Config(format!("missing required key `{key}`"))),
        Some(v) => parse_f64_key(key, v),
    }
}

fn optional_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => parse_f64_key(key, v),
    }
}

fn optional_u64(map: &BTreeMap<String, String>, key: &str, default: u64) -> Result<u64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| MhdError::Config(format!("key `{key}`: expected an integer, got `{v}`"))),
    }
}

fn optional_usize(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| MhdError::Config(format!("key `{key}`: expected an integer, got `{v}`"))),
    }
}

fn optional_bool(map: &BTreeMap<String, String>, key: &str, default: bool) -> Result<bool> {
    match map.get(key).map(|s| s.as_str()) {
        None => Ok(default),
        Some("true") | Some("on") | Some("1") => Ok(true),
        Some("false") | Some("off") | Some("0") => Ok(false),
        Some(v) => Err(MhdError::Config(format!(
            "key `{key}`: expected true/false, got `{v}`"
        ))),
    }
}

fn parse_init(map: &BTreeMap<String, String>) -> Result<InitialData> {
    let kind = map
        .get("init")
        .ok_or_else(|| MhdError::Config("missing required key `init`".into()))?;
    match kind.as_str() {
        "taylor_green" => Ok(InitialData::TaylorGreen {
            amplitude: optional_f64(map, "init_amplitude", 1.0)?,
        }),
        "orszag_tang" | "orszag_tang_3d" => Ok(InitialData::OrszagTang {
            epsilon: optional_f64(map, "init_epsilon", 0.1)?,
        }),
        "shear_decay" => Ok(InitialData::ShearDecay {
            amplitude: optional_f64(map, "init_amplitude", 1.0)?,
        }),
        "random" | "random_bandlimited" => Ok(InitialData::RandomBandlimited {
            k_max: optional_usize(map, "init_kmax", 4)?,
            energy_u: optional_f64(map, "init_energy_u", 1.0)?,
            energy_b: optional_f64(map, "init_energy_b", 1.0)?,
        }),
        "checkpoint" => {
            let path = map.get("init_checkpoint").ok_or_else(|| {
                MhdError::Config("init = checkpoint requires `init_checkpoint = <path>`".into())
            })?;
            Ok(InitialData::Checkpoint {
                path: PathBuf::from(path),
            })
        }
        other => Err(MhdError::Config(format!(
            "key `init`: unknown kind `{other}` (expected taylor_green, orszag_tang, shear_decay, random_bandlimited or checkpoint)"
        ))),
    }
}

/// Parse "kind:alpha:beta" with beta possibly "inf".
pub fn parse_criterion(text: &str) -> Result<CriterionSpec> {
    let parts: Vec<&str> = text.split(':').map(|s| s.trim()).collect();
    if parts.len() != 3 {
        return Err(MhdError::Config(format!(
            "key `criteria`: expected kind:alpha:beta, got `{text}`"
        )));
    }
    let kind = parse_kind(parts[0])?;
    let alpha = parse_f64_key("criteria", parts[1])?;
    let beta = parse_f64_key("criteria", parts[2])?;
    if !(alpha >= 1.0) || !(beta >= 1.0) {
        return Err(MhdError::Config(format!(
            "key `criteria`: exponents must be >= 1 in `{text}`"
        )));
    }
    Ok(CriterionSpec { kind, alpha, beta })
}

pub fn parse_kind(text: &str) -> Result<CriterionKind> {
    match text {
        "velocity" | "velocity_z" => Ok(CriterionKind::VelocityZ),
        "pressure" | "pressure_z" => Ok(CriterionKind::PressureZ),
        "gradient" | "gradient_velocity" => Ok(CriterionKind::GradientVelocity),
        other => Err(MhdError::Config(format!(
            "unknown criterion kind `{other}` (expected velocity, pressure or gradient)"
        ))),
    }
}

fn parse_criteria(v: &str) -> Result<Vec<CriterionSpec>> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(parse_criterion)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# trajectory
grid_n = 16
box_length = 6.283185307179586
dt = 1e-2          # step
t_end = 0.5
nu = 1.0
eta = 0.5
dealias = true
form = primitive
init = orszag_tang
init_epsilon = 0.2
seed = 7
criteria = velocity:6:4, pressure:4:2, gradient:3:2
sample_every = 5
checkpoint_every = 10
out_dir = /tmp/run
";

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::parse(FULL).unwrap();
        assert_eq!(cfg.grid_n, [16, 16, 16]);
        assert_eq!(cfg.eta, 0.5);
        assert_eq!(cfg.init, InitialData::OrszagTang { epsilon: 0.2 });
        assert_eq!(cfg.criteria.len(), 3);
        assert_eq!(cfg.velocity_spec().alpha, 6.0);
        assert_eq!(cfg.pressure_spec().beta, 2.0);
        assert_eq!(cfg.sample_every, 5);
    }

    #[test]
    fn defaults_are_applied() {
        let cfg = RunConfig::parse("grid_n = 8\ndt = 0.1\nt_end = 1\ninit = taylor_green\n").unwrap();
        assert_eq!(cfg.nu, 1.0);
        assert!(cfg.dealias);
        assert_eq!(cfg.form, Form::Primitive);
        assert_eq!(cfg.sample_every, 1);
        // fallback monitor specs are the theorem boundary pairs
        assert_eq!(cfg.velocity_spec().alpha, 3.0);
        assert!(cfg.velocity_spec().beta.is_infinite());
        assert!((cfg.pressure_spec().alpha - 12.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_name_the_offending_key() {
        let err = RunConfig::parse("grid_n = 8\ndt = fast\nt_end = 1\ninit = taylor_green\n")
            .unwrap_err();
        assert!(err.to_string().contains("`dt`"), "{err}");
        let err = RunConfig::parse("grid_n = 8\ndt = 0.1\nt_end = 1\ninit = warp\n").unwrap_err();
        assert!(err.to_string().contains("`init`"), "{err}");
        let err = RunConfig::parse("gridn = 8\n").unwrap_err();
        assert!(err.to_string().contains("`gridn`"), "{err}");
        let err = RunConfig::parse("grid_n = 8\ndt = 0.1\nt_end = 1\n").unwrap_err();
        assert!(err.to_string().contains("`init`"), "{err}");
        let err =
            RunConfig::parse("grid_n = 9\ndt = 0.1\nt_end = 1\ninit = taylor_green\n").unwrap_err();
        assert!(matches!(err, MhdError::UnsupportedGrid(_)));
    }

    #[test]
    fn criteria_parse_inf_beta() {
        let spec = parse_criterion("velocity:3:inf").unwrap();
        assert!(spec.beta.is_infinite());
        assert!(parse_criterion("velocity:3").is_err());
        assert!(parse_criterion("vorticity:3:2").is_err());
        assert!(parse_criterion("velocity:0.5:2").is_err());
    }
}
