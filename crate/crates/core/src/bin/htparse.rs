use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use htparse::config::ModelConfig;
use htparse::corpus::{load_pretrained_embeddings, read_conll_file, write_conll, PosColumn, Sentence, Vocab, VocabOptions, WriteOptions};
use htparse::eval::{evaluate, PunctPolicy};
use htparse::training::{train, TrainConfig};
use htparse::{sample, Error, Model};

#[derive(Parser)]
#[command(name = "htparse", version, about = "Easy-first dependency parser with hierarchical tree-LSTM features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a CoNLL treebank
    Train(TrainArgs),
    /// Parse a CoNLL file with a trained model
    Parse(ParseArgs),
    /// Score predicted trees against gold trees
    Eval(EvalArgs),
    /// Write a synthetic treebank
    Sample(SampleArgs),
}

/// Every setting a run can take, from flags or a TOML file. Unset fields keep
/// their defaults.
#[derive(Args, Deserialize, Default, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct Settings {
    #[arg(long)]
    word_dim: Option<usize>,
    #[arg(long)]
    pos_dim: Option<usize>,
    #[arg(long)]
    rel_dim: Option<usize>,
    #[arg(long)]
    proj_dim: Option<usize>,
    #[arg(long)]
    tree_hidden: Option<usize>,
    #[arg(long)]
    tree_layers: Option<usize>,
    #[arg(long)]
    bilstm_hidden: Option<usize>,
    #[arg(long)]
    bilstm_layers: Option<usize>,
    #[arg(long)]
    unlabeled_hidden: Option<usize>,
    #[arg(long)]
    labeled_hidden: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    use_bilstm: Option<bool>,
    #[arg(long)]
    use_pos: Option<bool>,
    #[arg(long)]
    use_tree: Option<bool>,

    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    explore: Option<bool>,
    #[arg(long)]
    dynamic_oracle: Option<bool>,
    #[arg(long)]
    p_aug: Option<f64>,
    #[arg(long)]
    flip_margin_branch: Option<bool>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    word_dropout: Option<f64>,
    #[arg(long)]
    batch_errors: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    shuffle: Option<bool>,

    /// Which column feeds the tag embeddings: cpos or pos
    #[arg(long)]
    pos_column: Option<String>,
    #[arg(long)]
    lowercase: Option<bool>,
    /// Predict relation labels
    #[arg(long)]
    labeled: Option<bool>,
    /// Pretrained word vectors, one "word v1 .. vd" row per line
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

macro_rules! overlay {
    ($a:expr, $b:expr; $($f:ident),*) => {
        Settings { $($f: $a.$f.or($b.$f),)* }
    };
}

macro_rules! apply {
    ($src:expr, $dst:expr; $($f:ident),*) => {
        $(if let Some(v) = $src.$f.clone() { $dst.$f = v; })*
    };
}

macro_rules! mismatches {
    ($src:expr, $cfg:expr; $($f:ident),*) => {{
        let mut out = Vec::new();
        $(if let Some(v) = $src.$f {
            if v != $cfg.$f {
                out.push(format!("{} is {} in the model but {} was requested", stringify!($f), $cfg.$f, v));
            }
        })*
        out
    }};
}

impl Settings {
    /// Fields set in `self` win over those in `base`.
    fn over(self, base: Settings) -> Settings {
        overlay!(self, base;
            word_dim, pos_dim, rel_dim, proj_dim, tree_hidden, tree_layers, bilstm_hidden,
            bilstm_layers, unlabeled_hidden, labeled_hidden, window, use_bilstm, use_pos, use_tree,
            epochs, seed, explore, dynamic_oracle, p_aug, flip_margin_branch, margin, word_dropout,
            batch_errors, learning_rate, shuffle, pos_column, lowercase, labeled, embeddings)
    }

    fn model_config(&self) -> ModelConfig {
        let mut c = ModelConfig::default();
        apply!(self, c;
            word_dim, pos_dim, rel_dim, proj_dim, tree_hidden, tree_layers, bilstm_hidden,
            bilstm_layers, unlabeled_hidden, labeled_hidden, window, use_bilstm, use_pos, use_tree);
        c
    }

    fn train_config(&self) -> TrainConfig {
        let mut c = TrainConfig::default();
        apply!(self, c;
            epochs, seed, explore, dynamic_oracle, p_aug, flip_margin_branch, margin, word_dropout,
            batch_errors, learning_rate, shuffle);
        c
    }

    fn vocab_options(&self) -> Result<VocabOptions, Failure> {
        let mut o = VocabOptions::default();
        o.pos_column = match self.pos_column.as_deref() {
            None | Some("cpos") => PosColumn::Coarse,
            Some("pos") => PosColumn::Fine,
            Some(other) => return Err(Failure::Config(format!("pos_column must be cpos or pos, got {other:?}"))),
        };
        apply!(self, o; lowercase, labeled);
        Ok(o)
    }

    /// Requested model dimensions that disagree with `cfg`.
    fn conflicts(&self, cfg: &ModelConfig) -> Vec<String> {
        mismatches!(self, cfg;
            word_dim, pos_dim, rel_dim, proj_dim, tree_hidden, tree_layers, bilstm_hidden,
            bilstm_layers, unlabeled_hidden, labeled_hidden, window, use_bilstm, use_pos, use_tree)
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training treebank
    #[arg(long)]
    train: PathBuf,
    /// Development treebank for model selection
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Where to write the model
    #[arg(long)]
    model: PathBuf,
    /// TOML file with settings; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct ParseArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when absent
    #[arg(long)]
    output: Option<PathBuf>,
    /// Copy of the input's gold trees. Defaults to OUTPUT.gold when the input
    /// has trees and an output file is given.
    #[arg(long)]
    gold_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Score punctuation tokens too
    #[arg(long)]
    keep_punct: bool,
    /// Comma-separated gold tags treated as punctuation
    #[arg(long, value_delimiter = ',')]
    punct_tags: Option<Vec<String>>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Training sentences
    #[arg(long, default_value_t = 500)]
    size: usize,
    #[arg(long, default_value_t = 100)]
    dev_size: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

enum Failure {
    Input(String),
    Config(String),
    Alignment(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Input(_) => 2,
            Failure::Config(_) => 3,
            Failure::Alignment(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Config(m) | Failure::Alignment(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::ModelMismatch(_) => Failure::Config(e.to_string()),
            Error::Alignment { .. } => Failure::Alignment(e.to_string()),
            Error::Io(_) | Error::Corpus(_) => Failure::Input(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn unreadable(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn read_treebank(path: &Path) -> Result<Vec<Sentence>, Failure> {
    read_conll_file(path).map_err(|e| unreadable(path, e))
}

fn read_settings(path: Option<&Path>) -> Result<Settings, Failure> {
    let Some(path) = path else {
        return Ok(Settings::default());
    };
    let text = fs::read_to_string(path).map_err(|e| unreadable(path, e))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_treebank(path: Option<&Path>, sentences: &[Sentence]) -> Result<(), Failure> {
    let io_err = |e: &dyn std::fmt::Display| {
        Failure::Other(format!("{}: {e}", path.map_or("<stdout>".into(), |p| p.display().to_string())))
    };
    let opts = WriteOptions::default();
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| io_err(&e))?);
            write_conll(&mut w, sentences, &opts).map_err(|e| io_err(&e))?;
            w.flush().map_err(|e| io_err(&e))
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_conll(&mut w, sentences, &opts).map_err(|e| io_err(&e))?;
            w.flush().map_err(|e| io_err(&e))
        }
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), Failure> {
    let settings = args.settings.over(read_settings(args.config.as_deref())?);
    let model_cfg = settings.model_config();
    let train_cfg = settings.train_config();
    model_cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    train_cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let opts = settings.vocab_options()?;

    let sentences = read_treebank(&args.train)?;
    let dev = args.dev.as_deref().map(read_treebank).transpose()?;
    let vocab = Vocab::build(&sentences, &opts).map_err(|e| unreadable(&args.train, e))?;
    log::info!(
        "vocabulary: words={} tags={} labels={}",
        vocab.num_words(),
        vocab.num_tags(),
        vocab.num_labels()
    );
    let mut model = Model::new(model_cfg.clone(), vocab, train_cfg.seed)?;
    if let Some(path) = &settings.embeddings {
        let file = File::open(path).map_err(|e| unreadable(path, e))?;
        let overlay = load_pretrained_embeddings(BufReader::new(file), model.vocab(), model_cfg.word_dim)
            .map_err(|e| unreadable(path, e))?;
        let n = model.apply_pretrained(&overlay)?;
        log::info!("pretrained vectors applied: {n}");
    }

    let summary = train(&mut model, &sentences, dev.as_deref(), &train_cfg, |r| {
        let mut line = format!(
            "epoch={} mean_loss={:.6} losses={} steps={} updates={}",
            r.epoch, r.mean_loss, r.losses, r.steps, r.updates
        );
        if let (Some(u), Some(l)) = (r.dev_uas, r.dev_las) {
            line.push_str(&format!(" dev_uas={u:.4} dev_las={l:.4}"));
        }
        line.push_str(&format!(" seconds={:.2}", r.seconds));
        println!("{line}");
    })?;
    if summary.skipped > 0 {
        log::warn!("skipped {} sentences without projective gold trees", summary.skipped);
    }
    if let Some(best) = summary.best_epoch {
        log::info!("kept parameters of epoch {best}");
    }
    model
        .save(&args.model)
        .map_err(|e| Failure::Other(format!("{}: {e}", args.model.display())))?;
    Ok(())
}

fn cmd_parse(args: ParseArgs) -> Result<(), Failure> {
    let settings = args.settings.over(read_settings(args.config.as_deref())?);
    let model = Model::load(&args.model).map_err(|e| match e {
        Error::Io(_) => unreadable(&args.model, e),
        other => Failure::Config(format!("{}: {other}", args.model.display())),
    })?;
    let conflicts = settings.conflicts(model.config());
    if !conflicts.is_empty() {
        return Err(Failure::Config(conflicts.join("; ")));
    }
    let input = read_treebank(&args.input)?;
    let parsed = model.parse_all(&input)?;
    write_treebank(args.output.as_deref(), &parsed)?;

    let has_gold = input.iter().any(|s| s.arcs.is_some());
    let side = args.gold_out.clone().or_else(|| {
        args.output
            .as_ref()
            .filter(|_| has_gold)
            .map(|p| PathBuf::from(format!("{}.gold", p.display())))
    });
    if let Some(side) = side {
        write_treebank(Some(&side), &input)?;
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let gold = read_treebank(&args.gold)?;
    let pred = read_treebank(&args.pred)?;
    let policy = if args.keep_punct {
        PunctPolicy::None
    } else if let Some(tags) = args.punct_tags {
        PunctPolicy::from_tags(tags)
    } else {
        PunctPolicy::default()
    };
    let report = evaluate(&gold, &pred, &policy)?;
    println!("{report}");
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), Failure> {
    fs::create_dir_all(&args.out_dir).map_err(|e| Failure::Other(format!("{}: {e}", args.out_dir.display())))?;
    let (train, dev) = sample::generate_split(args.size, args.dev_size, args.seed);
    write_treebank(Some(&args.out_dir.join("train.conll")), &train)?;
    write_treebank(Some(&args.out_dir.join("dev.conll")), &dev)?;
    log::info!("wrote {} training and {} dev sentences", train.len(), dev.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HTPARSE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Parse(a) => cmd_parse(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
