//! Staged, file-based pipeline from raw texts to network statistics.
//!
//! Every stage reads only artifacts written by earlier stages into the output directory and
//! records what it read and wrote, with SHA-256 hashes and timings, in `run.json`.

mod config;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{
    LdaSection, Paths, PipelineConfig, SelectKSection, StatsSection, SweepSection, TreeSection,
    YuleSection,
};

use crate::cascade::{
    constitution_mixture, extract_cascades, read_cascades, read_mixtures, write_cascades,
    write_mixtures,
};
use crate::corpus::{
    load_corpus, prepare_corpus, read_constitutions, read_documents, read_vocabulary,
    write_constitutions, write_documents, write_vocabulary, ConstitutionMeta,
};
use crate::diffusion::{
    greedy_infer_traced, read_network, tau_sweep, write_network_csv, write_network_dot,
    write_sweep, Node, StopReason,
};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::genealogy::{build_family_tree, write_family_tree_csv, write_family_tree_dot};
use crate::netstats::{self, UndirectedGraph, YuleParams};
use crate::topic_model::{
    cross_validate, gibbs_train, read_theta, write_beta, write_model_json, write_theta, CvConfig,
    CvResult, HeldOutConfig, ModelMeta,
};

pub const VOCAB: &str = "vocab.txt";
pub const DOCUMENTS: &str = "documents.jsonl";
pub const CONSTITUTIONS: &str = "constitutions.csv";
pub const SELECT_K: &str = "select_k.json";
pub const BETA: &str = "beta.csv";
pub const THETA: &str = "theta.csv";
pub const MODEL: &str = "model.json";
pub const MIXTURES: &str = "mixtures.csv";
pub const CASCADES: &str = "cascades.json";
pub const NETWORK: &str = "network.csv";
pub const NETWORK_DOT: &str = "network.dot";
pub const INFERENCE: &str = "inference.json";
pub const FAMILY_TREE: &str = "family_tree.csv";
pub const FAMILY_TREE_DOT: &str = "family_tree.dot";
pub const RUN_MANIFEST: &str = "run.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Prepare,
    SelectK,
    Train,
    Cascades,
    Infer,
    Sweep,
    Tree,
    Stats,
    All,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Prepare,
        Stage::SelectK,
        Stage::Train,
        Stage::Cascades,
        Stage::Infer,
        Stage::Sweep,
        Stage::Tree,
        Stage::Stats,
        Stage::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Prepare => "prepare",
            Stage::SelectK => "select-k",
            Stage::Train => "train",
            Stage::Cascades => "cascades",
            Stage::Infer => "infer",
            Stage::Sweep => "sweep",
            Stage::Tree => "tree",
            Stage::Stats => "stats",
            Stage::All => "all",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::config("stage", format!("unknown stage `{s}`")))
    }
}

/// What one stage read and wrote.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: PipelineConfig,
    pub seed: u64,
    pub stages: BTreeMap<String, StageRecord>,
}

struct StageCtx<'a> {
    cfg: &'a PipelineConfig,
    out: &'a Path,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    extra_inputs: BTreeMap<String, String>,
}

impl<'a> StageCtx<'a> {
    fn new(cfg: &'a PipelineConfig) -> Self {
        Self {
            cfg,
            out: &cfg.paths.out,
            inputs: Vec::new(),
            outputs: Vec::new(),
            extra_inputs: BTreeMap::new(),
        }
    }

    /// Path of a prior-stage artifact, which must exist.
    fn input(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.out.join(name);
        if !p.is_file() {
            return Err(Error::MissingArtifact(p));
        }
        self.inputs.push(p.clone());
        Ok(p)
    }

    fn output(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outputs.push(p.clone());
        p
    }

    fn record(self, seconds: f64) -> Result<StageRecord> {
        let hash_all = |paths: &[PathBuf]| -> Result<BTreeMap<String, String>> {
            paths
                .iter()
                .map(|p| {
                    let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
                    Ok((p.display().to_string(), fsutil::sha256_hex(&bytes)))
                })
                .collect()
        };
        let mut inputs = hash_all(&self.inputs)?;
        inputs.extend(self.extra_inputs);
        Ok(StageRecord {
            inputs,
            outputs: hash_all(&self.outputs)?,
            seconds,
        })
    }
}

/// Stages that `all` runs, in order. Model selection runs when candidates are configured or
/// the topic count is left to it; the sweep runs when its grid is non-empty.
pub fn plan(stage: Stage, cfg: &PipelineConfig) -> Vec<Stage> {
    if stage != Stage::All {
        return vec![stage];
    }
    let mut stages = vec![Stage::Prepare];
    if !cfg.select_k.candidates.is_empty() || cfg.lda.k.is_none() {
        stages.push(Stage::SelectK);
    }
    stages.extend([Stage::Train, Stage::Cascades, Stage::Infer]);
    if !cfg.sweep.tau_grid.is_empty() {
        stages.push(Stage::Sweep);
    }
    stages.extend([Stage::Tree, Stage::Stats]);
    stages
}

/// Runs `stage` (or the whole chain for [`Stage::All`]) on a thread pool of `cfg.threads`
/// workers and updates `run.json` after each stage.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<RunManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.paths.out).map_err(|e| Error::io(&cfg.paths.out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let manifest_path = cfg.paths.out.join(RUN_MANIFEST);
    let mut manifest = RunManifest {
        config: cfg.clone(),
        seed: cfg.seed,
        stages: if manifest_path.is_file() {
            fsutil::read_json::<RunManifest>(&manifest_path)
                .map(|m| m.stages)
                .unwrap_or_default()
        } else {
            BTreeMap::new()
        },
    };
    pool.install(|| {
        for st in plan(stage, cfg) {
            let start = Instant::now();
            let mut ctx = StageCtx::new(cfg);
            run_one(st, &mut ctx)?;
            let record = ctx.record(start.elapsed().as_secs_f64())?;
            manifest.stages.insert(st.as_str().to_string(), record);
            fsutil::write_json(&manifest_path, &manifest)?;
        }
        Ok(manifest)
    })
}

fn run_one(stage: Stage, ctx: &mut StageCtx) -> Result<()> {
    match stage {
        Stage::Prepare => prepare(ctx),
        Stage::SelectK => select_k(ctx),
        Stage::Train => train(ctx),
        Stage::Cascades => cascades(ctx),
        Stage::Infer => infer(ctx),
        Stage::Sweep => sweep(ctx),
        Stage::Tree => tree(ctx),
        Stage::Stats => stats(ctx),
        Stage::All => unreachable!("expanded by plan"),
    }
}

fn prepare(ctx: &mut StageCtx) -> Result<()> {
    let paths = &ctx.cfg.paths;
    let raws = load_corpus(&paths.corpus, paths.manifest.as_deref())?;
    if let Some(m) = &paths.manifest {
        ctx.inputs.push(m.clone());
    }
    let mut ordered: Vec<_> = raws.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    for r in ordered {
        ctx.extra_inputs.insert(
            format!("text:{}", r.id),
            fsutil::sha256_hex(r.text.as_bytes()),
        );
    }
    let prepared = prepare_corpus(&raws, &ctx.cfg.corpus)?;
    write_vocabulary(&ctx.output(VOCAB), &prepared.vocabulary)?;
    write_documents(&ctx.output(DOCUMENTS), &prepared.documents)?;
    write_constitutions(&ctx.output(CONSTITUTIONS), &prepared.constitutions)
}

fn select_k(ctx: &mut StageCtx) -> Result<()> {
    let vocab = read_vocabulary(&ctx.input(VOCAB)?)?;
    let docs = read_documents(&ctx.input(DOCUMENTS)?)?;
    let cfg = ctx.cfg;
    let candidates = &cfg.select_k.candidates;
    if candidates.is_empty() {
        return Err(Error::config("select_k.candidates", "no candidate K given"));
    }
    let mut template = cfg.lda.hyper(candidates[0], cfg.seed);
    if let Some(iters) = cfg.select_k.iters {
        template.iters = iters;
    }
    let cv = CvConfig {
        folds: cfg.select_k.folds,
        heldout: HeldOutConfig {
            particles: cfg.select_k.particles,
            seed: cfg.seed,
            ..HeldOutConfig::default()
        },
    };
    let result = cross_validate(&docs, vocab.len(), candidates, &template, &cv)?;
    fsutil::write_json(&ctx.output(SELECT_K), &result)
}

fn train(ctx: &mut StageCtx) -> Result<()> {
    let vocab = read_vocabulary(&ctx.input(VOCAB)?)?;
    let docs = read_documents(&ctx.input(DOCUMENTS)?)?;
    let k = match ctx.cfg.lda.k {
        Some(k) => k,
        None => fsutil::read_json::<CvResult>(&ctx.input(SELECT_K)?)?.selected_k,
    };
    let hyper = ctx.cfg.lda.hyper(k, ctx.cfg.seed);
    let model = gibbs_train(&docs, vocab.len(), &hyper)?;
    write_beta(&ctx.output(BETA), &model, &vocab, ctx.cfg.lda.beta_top_n)?;
    write_theta(&ctx.output(THETA), &model, &docs)?;
    write_model_json(&ctx.output(MODEL), &ModelMeta::new(&model, &vocab))
}

fn years_of(constitutions: &[ConstitutionMeta]) -> HashMap<String, i32> {
    constitutions
        .iter()
        .map(|c| (c.id.clone(), c.year))
        .collect()
}

fn nodes_of(constitutions: &[ConstitutionMeta]) -> Vec<Node> {
    constitutions
        .iter()
        .map(|c| Node {
            id: c.id.clone(),
            year: c.year,
        })
        .collect()
}

fn cascades(ctx: &mut StageCtx) -> Result<()> {
    let theta = read_theta(&ctx.input(THETA)?)?;
    let docs = read_documents(&ctx.input(DOCUMENTS)?)?;
    let constitutions = read_constitutions(&ctx.input(CONSTITUTIONS)?)?;
    let owner: HashMap<&str, &str> = docs
        .iter()
        .map(|d| (d.id.as_str(), d.constitution_id.as_str()))
        .collect();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    let mut current: Option<&str> = None;
    for r in &theta {
        if current != Some(r.document_id.as_str()) {
            let cid = owner.get(r.document_id.as_str()).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "{THETA} names unknown document `{}`",
                    r.document_id
                ))
            })?;
            rows.push((cid.to_string(), Vec::new()));
            current = Some(&r.document_id);
        }
        let weights = &mut rows.last_mut().expect("pushed above").1;
        if r.topic != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{THETA} rows of `{}` are out of order",
                r.document_id
            )));
        }
        weights.push(r.proportion);
    }
    let mixtures = constitution_mixture(&rows, &years_of(&constitutions))?;
    let cascades = extract_cascades(&mixtures, &ctx.cfg.cascade)?;
    write_mixtures(&ctx.output(MIXTURES), &mixtures)?;
    write_cascades(&ctx.output(CASCADES), &cascades)
}

#[derive(Serialize)]
struct InferenceSummary {
    n_nodes: usize,
    n_edges: usize,
    base_objective: f64,
    objective: f64,
    stop: StopReason,
    improvements: Vec<f64>,
}

fn infer(ctx: &mut StageCtx) -> Result<()> {
    let cascades = read_cascades(&ctx.input(CASCADES)?)?;
    let constitutions = read_constitutions(&ctx.input(CONSTITUTIONS)?)?;
    let outcome = greedy_infer_traced(nodes_of(&constitutions), &cascades, &ctx.cfg.diffusion)?;
    let g = &outcome.network;
    let countries: HashMap<String, String> = constitutions
        .iter()
        .map(|c| (c.id.clone(), c.country.clone()))
        .collect();
    write_network_csv(&ctx.output(NETWORK), g)?;
    write_network_dot(&ctx.output(NETWORK_DOT), g, &countries)?;
    let summary = InferenceSummary {
        n_nodes: g.n_nodes(),
        n_edges: g.n_edges(),
        base_objective: outcome.base_objective,
        objective: outcome.objective(),
        stop: outcome.stop,
        improvements: outcome.improvements.clone(),
    };
    fsutil::write_json(&ctx.output(INFERENCE), &summary)
}

fn sweep(ctx: &mut StageCtx) -> Result<()> {
    let mixtures = read_mixtures::<f64>(&ctx.input(MIXTURES)?)?;
    let result = tau_sweep(&mixtures, &ctx.cfg.sweep.tau_grid, &ctx.cfg.diffusion)?;
    for name in ["sweep.csv", "sweep_corr_in.csv", "sweep_corr_out.csv"] {
        ctx.output(name);
    }
    write_sweep(ctx.out, &result)
}

fn tree(ctx: &mut StageCtx) -> Result<()> {
    let mixtures = read_mixtures::<f64>(&ctx.input(MIXTURES)?)?;
    let constitutions = read_constitutions(&ctx.input(CONSTITUTIONS)?)?;
    let tree = build_family_tree(&mixtures, ctx.cfg.tree.direction)?;
    let labels: HashMap<String, String> = constitutions
        .iter()
        .map(|c| (c.id.clone(), format!("{} {}", c.country, c.year)))
        .collect();
    write_family_tree_csv(&ctx.output(FAMILY_TREE), &tree)?;
    write_family_tree_dot(&ctx.output(FAMILY_TREE_DOT), &tree, &labels)
}

fn stats(ctx: &mut StageCtx) -> Result<()> {
    let constitutions = read_constitutions(&ctx.input(CONSTITUTIONS)?)?;
    let g = read_network::<f64>(&ctx.input(NETWORK)?, nodes_of(&constitutions))?;
    let cfg = &ctx.cfg.stats;

    netstats::write_degrees(&ctx.output("degrees.csv"), &g)?;
    let (din, dout) = netstats::degree_sequences(&g);
    let mut fits = netstats::fit_all::<f64>("indegree", &din);
    fits.extend(netstats::fit_all("outdegree", &dout));
    netstats::write_fits(&ctx.output("fits.json"), &fits)?;

    let ug = UndirectedGraph::from_network(&g);
    let gn = netstats::girvan_newman(&ug, cfg.gn_target);
    let spectral = netstats::spectral_modularity(&ug);
    netstats::write_communities(&ctx.output("communities.csv"), &g, &gn, &spectral.labels)?;
    netstats::write_motifs(&ctx.output("motifs.csv"), &netstats::motifs(&g))?;
    netstats::write_lifespans(&ctx.output("lifespans.csv"), &netstats::lifespans(&g))?;

    let years: Vec<i32> = constitutions.iter().map(|c| c.year).collect();
    let counts = netstats::cumulative_counts(&years);
    let points: Vec<(f64, f64)> = counts.iter().map(|&(y, c)| (y as f64, c as f64)).collect();
    // Short year ranges cap the number of segments a fit can support.
    let n_max = cfg.growth_n_max.min((points.len() / 2).saturating_sub(1));
    if n_max == 0 {
        return Err(Error::DegenerateSample(format!(
            "{} distinct years are too few for a growth fit",
            points.len()
        )));
    }
    let growth = netstats::piecewise_growth(&points, n_max)?;
    let x_end = points.last().map_or(0.0, |p| p.0);
    netstats::write_growth(&ctx.output("growth.csv"), &growth, x_end)?;

    let y = &cfg.yule;
    let params = YuleParams::new(y.lambda_rate, y.n0, y.t)?;
    let sim = netstats::simulate_yule(&params, y.trials, ctx.cfg.seed)?;
    netstats::write_yule_check(&ctx.output("yule_check.csv"), &params, &sim)
}
