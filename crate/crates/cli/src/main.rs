use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ideaflow::pipeline::{run_stage, PipelineConfig, Stage};
use ideaflow::Error;

/// Topic cascades, diffusion-network inference and network statistics for a dated corpus.
#[derive(Debug, Parser)]
#[command(name = "ideaflow", version)]
struct Args {
    /// JSON configuration; unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// prepare, select-k, train, cascades, infer, sweep, tree, stats or all.
    #[arg(long, default_value = "all")]
    stage: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    doc_len: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha_hat: Option<f64>,
    #[arg(long)]
    stop_frac: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any other configuration key, as `dotted.key=value`. Values are parsed as JSON.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Args {
    fn overrides(&self) -> Result<Vec<(String, String)>, Error> {
        let mut o = Vec::new();
        let mut push = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((key.to_string(), v));
            }
        };
        push("lda.k", self.k.map(|v| v.to_string()));
        push("lda.alpha", self.alpha.map(|v| v.to_string()));
        push("lda.eta", self.eta.map(|v| v.to_string()));
        push("lda.iters", self.iters.map(|v| v.to_string()));
        push("corpus.doc_len", self.doc_len.map(|v| v.to_string()));
        push("cascade.tau", self.tau.map(|v| v.to_string()));
        push("diffusion.alpha_hat", self.alpha_hat.map(|v| v.to_string()));
        push("diffusion.stop_frac", self.stop_frac.map(|v| v.to_string()));
        push("diffusion.k_max", self.k_max.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("threads", self.threads.map(|v| v.to_string()));
        push(
            "paths.out",
            self.out.as_ref().map(|p| serde_json::to_string(p).expect("paths serialize")),
        );
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config {
                    key: kv.clone(),
                    message: "expected KEY=VALUE".into(),
                })?;
            o.push((k.to_string(), v.to_string()));
        }
        Ok(o)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidHyper(_) => 2,
        Error::MissingArtifact(_) => 3,
        Error::DegenerateSample(_) | Error::EmptyVocabulary => 4,
        _ => 1,
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let stage: Stage = args.stage.parse()?;
    let cfg = PipelineConfig::load(args.config.as_deref(), &args.overrides()?)?;
    let manifest = run_stage(stage, &cfg)?;
    for (name, rec) in &manifest.stages {
        eprintln!("{name}: {} outputs, {:.2}s", rec.outputs.len(), rec.seconds);
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
