use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cascade::CascadeConfig;
use crate::corpus::CorpusConfig;
use crate::diffusion::DiffusionConfig;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::genealogy::KlDirection;
use crate::topic_model::LdaHyperParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Directory of `.txt` files.
    pub corpus: PathBuf,
    /// Optional CSV with columns `id,country,year,filename`. Relative to the working directory.
    pub manifest: Option<PathBuf>,
    /// Where every stage reads and writes its artifacts.
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaSection {
    /// Topic count. `None` takes the count chosen by the `select-k` stage.
    pub k: Option<usize>,
    /// `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub eta: f64,
    pub iters: usize,
    /// `None` means 20% of `iters`.
    pub burn_in: Option<usize>,
    pub sample_lag: usize,
    /// Tokens per topic in `beta.csv`; 0 writes the full distribution.
    pub beta_top_n: usize,
}

impl Default for LdaSection {
    fn default() -> Self {
        let h = LdaHyperParams::new(1);
        Self {
            k: Some(10),
            alpha: h.alpha,
            eta: h.eta,
            iters: h.iters,
            burn_in: h.burn_in,
            sample_lag: h.sample_lag,
            beta_top_n: 20,
        }
    }
}

impl LdaSection {
    pub fn hyper(&self, k: usize, seed: u64) -> LdaHyperParams {
        LdaHyperParams {
            k,
            alpha: self.alpha,
            eta: self.eta,
            iters: self.iters,
            burn_in: self.burn_in,
            sample_lag: self.sample_lag,
            seed,
            stream: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectKSection {
    /// Candidate topic counts. Empty skips the stage inside `all`.
    pub candidates: Vec<usize>,
    pub folds: usize,
    /// Particles of the held-out estimator.
    pub particles: usize,
    /// Gibbs sweeps per cross-validation chain; `None` reuses `lda.iters`.
    pub iters: Option<usize>,
}

impl Default for SelectKSection {
    fn default() -> Self {
        Self {
            candidates: Vec::new(),
            folds: 5,
            particles: 20,
            iters: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Cascade thresholds to re-infer the network at. Empty skips the stage inside `all`.
    pub tau_grid: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            tau_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSection {
    pub direction: KlDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YuleSection {
    pub lambda_rate: f64,
    pub n0: u64,
    pub t: f64,
    pub trials: usize,
}

impl Default for YuleSection {
    fn default() -> Self {
        Self {
            lambda_rate: 0.1,
            n0: 1,
            t: 5.0,
            trials: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsSection {
    /// Number of Girvan-Newman communities.
    pub gn_target: usize,
    /// Largest number of segments tried for the growth curve.
    pub growth_n_max: usize,
    pub yule: YuleSection,
}

impl Default for StatsSection {
    fn default() -> Self {
        Self {
            gn_target: 3,
            growth_n_max: 4,
            yule: YuleSection::default(),
        }
    }
}

/// Everything a pipeline run depends on besides the corpus itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    /// Master seed for every random stream.
    pub seed: u64,
    /// Worker threads; 0 uses one per core. Results do not depend on this.
    pub threads: usize,
    pub corpus: CorpusConfig,
    pub lda: LdaSection,
    pub select_k: SelectKSection,
    pub cascade: CascadeConfig,
    pub diffusion: DiffusionConfig<f64>,
    pub sweep: SweepSection,
    pub tree: TreeSection,
    pub stats: StatsSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: Paths {
                corpus: PathBuf::from("corpus"),
                manifest: None,
                out: PathBuf::from("out"),
            },
            seed: 0,
            threads: 0,
            corpus: CorpusConfig::default(),
            lda: LdaSection::default(),
            select_k: SelectKSection::default(),
            cascade: CascadeConfig::default(),
            diffusion: DiffusionConfig::default(),
            sweep: SweepSection::default(),
            tree: TreeSection::default(),
            stats: StatsSection::default(),
        }
    }
}

impl PipelineConfig {
    /// Defaults, overlaid with the JSON document at `path` if given, then with `overrides`
    /// (`dotted.key`, value) pairs. Override values are parsed as JSON and fall back to a
    /// plain string. Unknown keys are rejected by name.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut doc = serde_json::to_value(Self::default())?;
        if let Some(path) = path {
            let text = fsutil::read_string(path)?;
            let file: Value = serde_json::from_str(&text)
                .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
            merge(&mut doc, file, "")?;
        }
        for (key, raw) in overrides {
            set_dotted(&mut doc, key, parse_value(raw))?;
        }
        let cfg: Self = serde_path_to_error::deserialize(doc).map_err(|e| {
            let key = e.path().to_string();
            Error::config(key, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.corpus.validate()?;
        if let Some(k) = self.lda.k {
            self.lda
                .hyper(k, self.seed)
                .validate()
                .map_err(as_config("lda"))?;
        }
        if self.select_k.candidates.contains(&0) {
            return Err(Error::config(
                "select_k.candidates",
                "topic counts must be positive",
            ));
        }
        if self.select_k.particles == 0 {
            return Err(Error::config("select_k.particles", "must be at least 1"));
        }
        self.cascade.validate()?;
        self.diffusion.validate()?;
        if self.stats.gn_target == 0 {
            return Err(Error::config("stats.gn_target", "must be at least 1"));
        }
        if self.stats.growth_n_max == 0 {
            return Err(Error::config("stats.growth_n_max", "must be at least 1"));
        }
        if self.stats.yule.trials == 0 {
            return Err(Error::config("stats.yule.trials", "must be at least 1"));
        }
        crate::netstats::YuleParams::new(
            self.stats.yule.lambda_rate,
            self.stats.yule.n0,
            self.stats.yule.t,
        )
        .map_err(as_config("stats.yule"))?;
        Ok(())
    }
}

fn as_config(section: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(section, other.to_string()),
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Overlays `patch` onto `base`, recursing into objects. Keys absent from `base` are errors.
fn merge(base: &mut Value, patch: Value, prefix: &str) -> Result<()> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let key = join(prefix, &k);
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v, &key)?,
                    Some(slot) => *slot = v,
                    None => return Err(Error::config(key, "unknown key")),
                }
            }
            Ok(())
        }
        (_, _) => Err(Error::config(prefix, "expected an object")),
    }
}

fn set_dotted(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj: &mut Map<String, Value> = node
            .as_object_mut()
            .ok_or_else(|| Error::config(key, "path descends into a non-object value"))?;
        let slot = obj
            .get_mut(*part)
            .ok_or_else(|| Error::config(key, "unknown key"))?;
        if i + 1 == parts.len() {
            *slot = value;
            return Ok(());
        }
        node = slot;
    }
    Err(Error::config(key, "empty key"))
}
