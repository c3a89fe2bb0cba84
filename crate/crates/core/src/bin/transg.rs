use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use transg::analyze::{self, DEFAULT_EFFECTIVE_THRESHOLD};
use transg::checkpoint::load_with_manifest;
use transg::config::{Preset, RunConfig};
use transg::eval::{self, Slot};
use transg::store::{load_dataset, TripleStore};
use transg::trainer::{self, CheckpointEvery, EpochStats, TrainObserver};
use transg::{CheckpointError, DataError, ModelParams, TrainError};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_DIVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "transg", version, about = "Mixture translation embeddings for knowledge graphs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Dataset directory with train/valid/test files.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// One of wn18, fb15k, wn11, fb13.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    lr: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long = "reg-c", global = true)]
    reg_c: Option<f64>,
    #[arg(long = "variance-sum", global = true)]
    variance_sum: Option<f64>,
    /// unif or bern.
    #[arg(long, global = true)]
    sampling: Option<String>,
    /// hrt or htr.
    #[arg(long, global = true)]
    columns: Option<String>,
    /// Validation and test files carry a label column.
    #[arg(long, global = true)]
    labeled: Option<bool>,
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    /// Output directory (default ./runs/<unix time>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Evaluation workers; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set)]
    filtered: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset and print its statistics.
    Prepare,
    /// Train a model and write checkpoints.
    Train,
    /// Link prediction: mean rank and HITS@10.
    #[command(name = "eval-lp")]
    EvalLp,
    /// Triple classification with per-relation thresholds.
    #[command(name = "eval-tc")]
    EvalTc,
    /// Component census and cluster assignments.
    Analyze {
        /// Restrict assignments to one relation.
        #[arg(long)]
        relation: Option<String>,
        #[arg(long = "effective-threshold", default_value_t = DEFAULT_EFFECTIVE_THRESHOLD)]
        effective_threshold: f64,
    },
    /// Tail-minus-head vectors of one relation, raw or PCA-projected.
    #[command(name = "export-plot")]
    ExportPlot {
        #[arg(long)]
        relation: String,
        #[arg(long)]
        project: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Diverged(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Data(_) => EXIT_DATA,
            Failure::Diverged(_) => EXIT_DIVERGED,
            Failure::Other(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Data(e) | Failure::Diverged(e) | Failure::Other(e) => e,
        }
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        match e {
            DataError::MissingFile { .. } | DataError::UnknownRelation(_) => Failure::Config(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

impl From<CheckpointError> for Failure {
    fn from(e: CheckpointError) -> Self {
        Failure::Data(e.into())
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Diverged { .. } => Failure::Diverged(e.into()),
            TrainError::Config(_) => Failure::Config(e.into()),
            TrainError::Checkpoint(_) => Failure::Other(e.into()),
            TrainError::Model(_) => Failure::Data(e.into()),
        }
    }
}

impl From<transg::ModelError> for Failure {
    fn from(e: transg::ModelError) -> Self {
        Failure::Data(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn resolve_config(g: &GlobalArgs) -> Result<RunConfig, Failure> {
    let preset = g
        .preset
        .as_deref()
        .map(str::parse::<Preset>)
        .transpose()
        .map_err(|e| Failure::Config(e.into()))?;
    let file = match &g.config {
        Some(p) => Some(
            fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))
                .map_err(Failure::Config)?,
        ),
        None => None,
    };
    let mut flags: Vec<(String, String)> = Vec::new();
    let mut flag = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            flags.push((k.to_owned(), v));
        }
    };
    flag("data", g.data.as_ref().map(|p| p.display().to_string()));
    flag("seed", g.seed.map(|v| v.to_string()));
    flag("epochs", g.epochs.map(|v| v.to_string()));
    flag("dim", g.dim.map(|v| v.to_string()));
    flag("learning_rate", g.lr.map(|v| v.to_string()));
    flag("margin", g.gamma.map(|v| v.to_string()));
    flag("crp_beta", g.beta.map(|v| v.to_string()));
    flag("reg_c", g.reg_c.map(|v| v.to_string()));
    flag("variance_sum", g.variance_sum.map(|v| v.to_string()));
    flag("sampling", g.sampling.clone());
    flag("columns", g.columns.clone());
    flag("labeled", g.labeled.map(|v| v.to_string()));
    RunConfig::resolve(preset, file.as_deref(), &flags).map_err(|e| Failure::Config(e.into()))
}

fn load_store(cfg: &RunConfig) -> Result<TripleStore, Failure> {
    let dir = cfg
        .data
        .as_ref()
        .ok_or_else(|| Failure::Config(anyhow!("--data is required")))?;
    if !dir.is_dir() {
        return Err(Failure::Config(anyhow!("data directory {} not found", dir.display())));
    }
    let store = load_dataset(dir, cfg.columns, cfg.labeled)?;
    println!("{}", store.summary());
    Ok(store)
}

fn out_dir(g: &GlobalArgs) -> Result<PathBuf, Failure> {
    let dir = match &g.out {
        Some(p) => p.clone(),
        None => {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            PathBuf::from("runs").join(secs.to_string())
        }
    };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn require_checkpoint(g: &GlobalArgs) -> Result<&Path, Failure> {
    let p = g
        .checkpoint
        .as_deref()
        .ok_or_else(|| Failure::Config(anyhow!("--checkpoint is required")))?;
    if !p.is_file() {
        return Err(Failure::Config(anyhow!("checkpoint {} not found", p.display())));
    }
    Ok(p)
}

fn load_model(g: &GlobalArgs, store: &TripleStore) -> Result<ModelParams, Failure> {
    let path = require_checkpoint(g)?;
    let (model, manifest) = load_with_manifest(path)?;
    manifest.check_vocab(path, store)?;
    eval::check_compatible(&model, store)?;
    Ok(model)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

struct EpochLog {
    file: fs::File,
}

impl TrainObserver for EpochLog {
    fn on_epoch(&mut self, stats: &EpochStats, _model: &ModelParams) -> Result<(), TrainError> {
        let line = serde_json::to_string(stats).expect("stats serialize");
        println!("{line}");
        writeln!(self.file, "{line}")
            .map_err(|e| TrainError::Checkpoint(CheckpointError::Io(e)))
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let cfg = resolve_config(g)?;
    print!("{}", cfg.render());

    match cli.command {
        Command::Prepare => {
            let store = load_store(&cfg)?;
            let mut census = [0usize; 4];
            for r in 0..store.num_relations() {
                census[store.relation_category(r).index()] += 1;
            }
            println!(
                "relation categories: 1-1 {} / 1-N {} / N-1 {} / N-N {}",
                census[0], census[1], census[2], census[3]
            );
        }
        Command::Train => {
            let store = load_store(&cfg)?;
            let out = out_dir(g)?;
            fs::write(out.join("config.txt"), cfg.render())?;
            let path = out.join("model.bin");
            let log = EpochLog {
                file: fs::File::create(out.join("train_log.jsonl"))?,
            };
            let ckpt = CheckpointEvery {
                every: cfg.checkpoint_every,
                total_epochs: cfg.train.epochs,
                path: path.clone(),
                entities: store.entities.clone(),
                relations: store.relations.clone(),
                config: cfg.pairs(),
            };
            let mut observer = (log, ckpt);
            let (model, report) = match &g.checkpoint {
                Some(_) => {
                    let init = load_model(g, &store)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
                    trainer::train_model(init, &store, &cfg.train, &mut observer, &mut rng)?
                }
                None => trainer::train(&store, &cfg.train, &mut observer)?,
            };
            let census = analyze::component_census(&model, &store.relations, DEFAULT_EFFECTIVE_THRESHOLD);
            println!("components: {:?}", report.census);
            println!("effective components (average): {:.2}", census.average);
            println!("checkpoint: {}", path.display());
        }
        Command::EvalLp => {
            let store = load_store(&cfg)?;
            if store.test.is_empty() {
                return Err(Failure::Data(anyhow!("test split has no positive triples")));
            }
            let model = load_model(g, &store)?;
            let out = out_dir(g)?;
            let report = eval::link_prediction_eval(&model, &store, g.threads)?;
            let table = report.render_table();
            print!("{table}");
            let o = &report.overall;
            if g.filtered {
                println!("filtered: MR {:.1} HITS@10 {:.1}", o.mean_rank_filtered, o.hits10_filtered);
            } else {
                println!("raw: MR {:.1} HITS@10 {:.1}", o.mean_rank_raw, o.hits10_raw);
            }
            fs::write(out.join("link_prediction.txt"), table)?;
            fs::write(out.join("link_prediction.csv"), report.to_csv())?;
            let mut ranks = String::from("head,relation,tail,slot,raw,filtered\n");
            for q in &report.queries {
                ranks.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    q.triple.head,
                    q.triple.relation,
                    q.triple.tail,
                    if q.slot == Slot::Head { "head" } else { "tail" },
                    q.raw,
                    q.filtered
                ));
            }
            fs::write(out.join("ranks.csv"), ranks)?;
        }
        Command::EvalTc => {
            let store = load_store(&cfg)?;
            if store.valid_labeled.is_empty() || store.test_labeled.is_empty() {
                return Err(Failure::Config(anyhow!(
                    "triple classification needs labeled valid/test splits (--labeled true or a wn11/fb13 preset)"
                )));
            }
            let model = load_model(g, &store)?;
            let out = out_dir(g)?;
            let thresholds = eval::tune_thresholds(&model, &store.valid_labeled)?;
            let report = eval::classify(&model, &thresholds, &store.test_labeled, &store.relations)?;
            let table = report.render_table();
            print!("{table}");
            fs::write(out.join("classification.txt"), table)?;
            fs::write(out.join("classification.csv"), report.to_csv())?;
            let mut th = String::from("relation,threshold\n");
            for (r, t) in &thresholds.per_relation {
                th.push_str(&format!("{},{t}\n", store.relations.name(*r).unwrap_or("?")));
            }
            th.push_str(&format!("*fallback*,{}\n", thresholds.fallback));
            fs::write(out.join("thresholds.csv"), th)?;
        }
        Command::Analyze {
            relation,
            effective_threshold,
        } => {
            let store = load_store(&cfg)?;
            let model = load_model(g, &store)?;
            let out = out_dir(g)?;
            let census = analyze::component_census(&model, &store.relations, effective_threshold);
            print!("{}", census.render_table());
            fs::write(out.join("census.csv"), census.to_csv())?;
            let relations: Vec<String> = match relation {
                Some(r) => vec![r],
                None => store.relations.names().to_vec(),
            };
            for r in relations {
                let assignments = analyze::assign_clusters(&model, &store, &r)?;
                let path = out.join(format!("clusters_{}.csv", file_stem(&r)));
                fs::write(&path, analyze::assignments_csv(&assignments, &store.entities))?;
            }
            println!("assignments written to {}", out.display());
        }
        Command::ExportPlot { relation, project } => {
            let store = load_store(&cfg)?;
            let model = load_model(g, &store)?;
            let out = out_dir(g)?;
            let table = analyze::export_difference_vectors(&model, &store, &relation, project)?;
            let suffix = if project { "pca" } else { "raw" };
            let path = out.join(format!("diff_{}_{suffix}.csv", file_stem(&relation)));
            fs::write(&path, table.to_csv())?;
            println!("{} rows written to {}", table.rows.len(), path.display());
        }
    }
    Ok(())
}

