use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::fock::FockDim;
use crate::models::{DispersiveForm, ModelParams};
use crate::propagation::{max_timedep_step, InitialState, ModelTag, TimeGrid};

/// Keys accepted in config files; identical to the long flag names.
pub const CONFIG_KEYS: [&str; 16] = [
    "nu",
    "omega",
    "eta",
    "k",
    "delta",
    "omega-a",
    "omega-l",
    "dim",
    "guard",
    "init",
    "models",
    "tmax",
    "samples",
    "step",
    "out",
    "dispersive-form",
];

const LOW_INTENSITY_N_MAX: usize = 40;
const HIGH_INTENSITY_N_MAX: usize = 60;
const DEFAULT_GUARD: usize = 4;
const DEFAULT_SAMPLES: usize = 2000;
const DEFAULT_OUT: &str = "pe.csv";

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub dim: FockDim,
    pub initial_state: InitialState,
    pub models: Vec<ModelTag>,
    pub t_max: f64,
    pub n_samples: usize,
    /// Step of the stepped evolver; `None` picks the largest allowed step.
    pub step: Option<f64>,
    pub dispersive_form: DispersiveForm,
    pub output_path: PathBuf,
}

fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-")
}

/// Reads a flat `key = value` file. Blank lines and lines starting with `#`
/// are skipped.
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                "config",
                format!("{}:{}: expected `key = value`", path.display(), lineno + 1),
            )
        })?;
        pairs.push((normalize_key(key), value.trim().to_string()));
    }
    Ok(pairs)
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(key, format!("cannot parse `{v}`"))),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::config(key, "missing required value"))
    }
}

fn parse_models(list: &str) -> Result<Vec<ModelTag>> {
    let mut models = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let tag: ModelTag = item.parse()?;
        if !models.contains(&tag) {
            models.push(tag);
        }
    }
    if models.is_empty() {
        return Err(Error::config("models", "at least one model is required"));
    }
    Ok(models)
}

fn parse_form(s: &str) -> Result<DispersiveForm> {
    match s.trim() {
        "second-order" => Ok(DispersiveForm::SecondOrder),
        "direct" => Ok(DispersiveForm::Direct),
        other => Err(Error::config(
            "dispersive-form",
            format!("expected second-order or direct, got `{other}`"),
        )),
    }
}

impl ScenarioConfig {
    /// Builds a config from `(key, value)` pairs; later pairs override
    /// earlier ones, so file entries followed by flag entries gives flags
    /// precedence.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut map = BTreeMap::new();
        for (key, value) in pairs {
            let key = normalize_key(&key);
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::config(key, "unknown key"));
            }
            map.insert(key, value);
        }
        Self::from_fields(&Fields(map))
    }

    fn from_fields(f: &Fields) -> Result<Self> {
        let nu: f64 = f.require("nu")?;
        let omega: f64 = f.require("omega")?;
        let eta: f64 = f.require("eta")?;
        let mut params = ModelParams::new(nu, omega, eta)?;

        let k: Option<i32> = f.get("k")?;
        let delta: Option<f64> = f.get("delta")?;
        let omega_a: Option<f64> = f.get("omega-a")?;
        let omega_l: Option<f64> = f.get("omega-l")?;
        let lasers = match (omega_a, omega_l) {
            (Some(a), Some(l)) => Some((a, l)),
            (None, None) => None,
            (Some(_), None) => return Err(Error::config("omega-l", "required together with omega-a")),
            (None, Some(_)) => return Err(Error::config("omega-a", "required together with omega-l")),
        };
        params = match (k, delta, lasers) {
            (Some(_), Some(_), _) => {
                return Err(Error::config("k", "give either k or delta, not both"))
            }
            (Some(k), None, _) => params.with_harmonic_detuning(k)?,
            (None, Some(d), _) => params.with_detuning(d)?,
            (None, None, Some((a, l))) => params.with_detuning(a - l)?,
            (None, None, None) => params,
        };
        if let Some((a, l)) = lasers {
            params = params.with_laser_frequencies(a, l)?;
        }

        let models = match f.0.get("models") {
            Some(list) => parse_models(list)?,
            None => vec![ModelTag::ExactEq2],
        };
        if models.contains(&ModelTag::FullEq1) && lasers.is_none() {
            return Err(Error::config("omega-a", "full_eq1 needs omega-a and omega-l"));
        }

        let n_max = match f.get("dim")? {
            Some(n) => n,
            None if params.is_low_intensity() => LOW_INTENSITY_N_MAX,
            None => HIGH_INTENSITY_N_MAX,
        };
        let guard = f.get("guard")?.unwrap_or(DEFAULT_GUARD);
        let dim = FockDim::new(n_max, guard)?;

        let initial_state: InitialState = f.get("init")?.unwrap_or_default();
        if let InitialState::ExcitedFock(n) | InitialState::GroundFock(n) = initial_state {
            if n > n_max {
                return Err(Error::config("init", format!("Fock level {n} exceeds n_max = {n_max}")));
            }
        }

        let t_max = match f.get("tmax")? {
            Some(t) => t,
            None if params.is_low_intensity() => 100.0 / nu,
            None => 100.0 / omega,
        };
        let n_samples = f.get("samples")?.unwrap_or(DEFAULT_SAMPLES);
        TimeGrid::uniform(t_max, n_samples)?;

        let step: Option<f64> = f.get("step")?;
        if let Some(s) = step {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::config("step", format!("must be finite and > 0, got {s}")));
            }
            if !models.contains(&ModelTag::FullEq1) {
                warn!("step only affects full_eq1, which was not requested");
            }
        }

        let dispersive_form = match f.0.get("dispersive-form") {
            Some(s) => parse_form(s)?,
            None => DispersiveForm::default(),
        };

        if models.contains(&ModelTag::LirEq5) && !params.is_low_intensity() {
            warn!(
                "lir_eq5 requested with Ω = {omega} ≥ ν = {nu}; the low-intensity model is outside its regime"
            );
        }

        Ok(ScenarioConfig {
            params,
            dim,
            initial_state,
            models,
            t_max,
            n_samples,
            step,
            dispersive_form,
            output_path: f.get("out")?.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.t_max, self.n_samples)
    }

    /// Step used for `full_eq1`.
    pub fn resolved_step(&self) -> Result<f64> {
        match self.step {
            Some(s) => Ok(s),
            None => max_timedep_step(&self.params, self.dim),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn fig1_defaults() {
        let cfg = ScenarioConfig::from_pairs(pairs(&[
            ("nu", "1"),
            ("omega", "0.2"),
            ("eta", "0.1"),
            ("k", "0"),
            ("models", "exact_eq2,lir_eq5,dispersive_eq10"),
        ]))
        .unwrap();
        assert_eq!(cfg.dim.n_max(), 40);
        assert_eq!(cfg.dim.guard(), 4);
        assert_eq!(cfg.t_max, 100.0);
        assert_eq!(cfg.n_samples, 2000);
        assert_eq!(cfg.models.len(), 3);
        assert_eq!(cfg.initial_state, InitialState::ExcitedFock(0));
    }

    #[test]
    fn fig2_defaults() {
        let cfg = ScenarioConfig::from_pairs(pairs(&[
            ("nu", "0.2"),
            ("omega", "1"),
            ("eta", "0.1"),
            ("k", "0"),
            ("models", "exact_eq2,dispersive_eq10"),
        ]))
        .unwrap();
        assert_eq!(cfg.dim.n_max(), 60);
        assert_eq!(cfg.t_max, 100.0);
    }

    #[test]
    fn errors_name_the_field() {
        let base = [("nu", "1"), ("omega", "0.2"), ("eta", "0.1")];
        let with = |extra: &[(&str, &str)]| {
            let mut v = pairs(&base);
            v.extend(pairs(extra));
            ScenarioConfig::from_pairs(v).unwrap_err()
        };
        assert_eq!(field_of(with(&[("k", "1"), ("delta", "1")])), "k");
        assert_eq!(field_of(with(&[("samples", "1")])), "samples");
        assert_eq!(field_of(with(&[("tmax", "-3")])), "tmax");
        assert_eq!(field_of(with(&[("models", "exact_eq2,eq9")])), "models");
        assert_eq!(field_of(with(&[("models", " , ")])), "models");
        assert_eq!(field_of(with(&[("init", "e:99")])), "init");
        assert_eq!(field_of(with(&[("omega-a", "10")])), "omega-l");
        assert_eq!(field_of(with(&[("models", "full_eq1")])), "omega-a");
        assert_eq!(field_of(with(&[("colour", "blue")])), "colour");
        assert_eq!(field_of(with(&[("eta", "abc")])), "eta");
        assert_eq!(field_of(ScenarioConfig::from_pairs(pairs(&[("nu", "1"), ("eta", "0")])).unwrap_err()), "omega");
    }

    #[test]
    fn later_pairs_override() {
        let cfg = ScenarioConfig::from_pairs(pairs(&[
            ("nu", "1"),
            ("omega", "0.2"),
            ("eta", "0.1"),
            ("samples", "10"),
            ("samples", "20"),
        ]))
        .unwrap();
        assert_eq!(cfg.n_samples, 20);
    }

    #[test]
    fn detuning_from_laser_frequencies() {
        let cfg = ScenarioConfig::from_pairs(pairs(&[
            ("nu", "1"),
            ("omega", "0.2"),
            ("eta", "0.1"),
            ("omega_a", "51"),
            ("omega-l", "50"),
            ("models", "full_eq1"),
        ]))
        .unwrap();
        assert_eq!(cfg.params.delta(), 1.0);
        assert_eq!(cfg.params.harmonic_order().unwrap(), 1);
        assert!(cfg.resolved_step().unwrap() > 0.0);
    }

    #[test]
    fn reads_flat_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.conf");
        fs::write(&path, "# fig 1\nnu = 1\nomega=0.2\n\neta = 0.1\n--samples = 50\n").unwrap();
        let cfg = ScenarioConfig::from_pairs(parse_config_file(&path).unwrap()).unwrap();
        assert_eq!(cfg.n_samples, 50);
        fs::write(&path, "nu 1\n").unwrap();
        assert!(parse_config_file(&path).is_err());
    }
}
