use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use negforge::output::{
    diag_file, read_jsonl, read_tagged, write_jsonl, write_staged, DiagSide, OutputRecord,
    TaggedLine,
};
use negforge::pipeline::{
    augment_sparse, build_corpus, write_outputs, LazyLexicon, PipelineConfig,
};
use negforge::stats::recount_output_dir;
use negforge::{
    ingest_pairs, par, split_diagnostics, tag_corpus, undersample, DiagRecord, Error, NegCategory,
    StatsReport,
};

#[derive(Parser, Debug)]
#[command(
    name = "negforge",
    version,
    about = "Build developmental negation diagnostic corpora from parsed NLI pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Input file or directory (repeatable)
    #[arg(long = "input", global = true)]
    inputs: Vec<PathBuf>,

    /// WordNet database directory
    #[arg(long, global = true, env = "NEGFORGE_WORDNET")]
    wordnet: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Fraction of each category held out as diagnostic test, e.g. 1/3 or 0.25
    #[arg(long, global = true, default_value = "1/3", value_parser = parse_fraction)]
    test_frac: f64,

    /// Size of the label-balanced NLI dev set (divisible by 3)
    #[arg(long, global = true, default_value_t = 9000)]
    dev_size: usize,

    /// Categories with fewer extracted pairs than this are augmented
    #[arg(long, global = true, default_value_t = 1000)]
    augment_threshold: usize,

    /// Record count augmentation aims for in a sparse category
    #[arg(long, global = true, default_value_t = 1500)]
    augment_target: usize,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify parsed pairs and write tagged.jsonl
    Tag,
    /// Augment sparse categories of tagged.jsonl and write augmented.jsonl
    Augment,
    /// Split tagged (and augmented) pairs into per-category train/test files
    Split,
    /// Reduce every {CAT}_train.jsonl of a directory to the smallest category size
    Undersample,
    /// Print the statistics of an output directory
    Stats,
    /// Run tag, augment, split and dev carve-out end to end
    Pipeline,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Table,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in {s:?}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in {s:?}"))?;
            num / den
        }
        None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(format!("{s} is not strictly between 0 and 1"))
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

impl Opts {
    fn inputs(&self, what: &str) -> CliResult<&[PathBuf]> {
        if self.inputs.is_empty() {
            return Err(CliError::Usage(format!("--input is required ({what})")));
        }
        for path in &self.inputs {
            if !path.exists() {
                return Err(CliError::Usage(format!(
                    "input {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(&self.inputs)
    }

    fn single_input_dir(&self) -> CliResult<&Path> {
        match self.inputs("an output directory")? {
            [dir] if dir.is_dir() => Ok(dir),
            [other] => Err(CliError::Usage(format!(
                "{} is not a directory",
                other.display()
            ))),
            _ => Err(CliError::Usage(
                "expected exactly one --input directory".into(),
            )),
        }
    }

    fn out(&self) -> CliResult<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--out is required".into()))
    }

    fn pipeline_config(&self) -> CliResult<PipelineConfig> {
        let config = PipelineConfig {
            seed: self.seed,
            test_frac: self.test_frac,
            dev_size: self.dev_size,
            augment_threshold: self.augment_threshold,
            augment_target: self.augment_target,
            wordnet: self.wordnet.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn print_counts(records: &[DiagRecord]) {
    for c in NegCategory::ALL {
        let n = records.iter().filter(|r| r.category() == c).count();
        eprintln!("{:<3} {n}", c.code());
    }
}

fn print_report(report: &StatsReport, format: Format) -> CliResult {
    match format {
        Format::Table => print!("{}", report.to_table()),
        Format::Json => print!("{}", report.to_json()?),
    }
    Ok(())
}

fn cmd_tag(opts: &Opts) -> CliResult {
    let inputs = opts.inputs("parsed-pairs JSONL")?;
    let out = opts.out()?;
    let ingested = ingest_pairs(inputs)?;
    let dropped = ingested.dropped();
    let corpus = tag_corpus(ingested.pairs);
    write_staged(out, |dir| {
        write_jsonl(
            &dir.join("tagged.jsonl"),
            corpus.tagged.iter().map(TaggedLine::from),
        )
    })?;
    print_counts(&corpus.tagged);
    eprintln!("negation-free {}", corpus.negation_free.len());
    eprintln!("negated-unmatched {}", corpus.negated_unmatched.len());
    eprintln!("dropped {dropped}");
    Ok(())
}

fn cmd_augment(opts: &Opts) -> CliResult {
    let inputs = opts.inputs("tagged JSONL")?;
    let out = opts.out()?;
    let config = opts.pipeline_config()?;
    let tagged = read_tagged(inputs)?;
    let mut lexicon = LazyLexicon::new(config.wordnet.clone());
    let augmentation = augment_sparse(
        &tagged,
        &mut lexicon,
        config.augment_threshold,
        config.augment_target,
    )?;
    let records: Vec<DiagRecord> = augmentation.variants.into_iter().map(Into::into).collect();
    write_staged(out, |dir| {
        write_jsonl(
            &dir.join("augmented.jsonl"),
            records.iter().map(TaggedLine::from),
        )
    })?;
    print_counts(&records);
    for c in augmentation.target_unreachable {
        eprintln!(
            "{c}: augmentation target {} not reached",
            config.augment_target
        );
    }
    Ok(())
}

fn cmd_split(opts: &Opts) -> CliResult {
    let inputs = opts.inputs("tagged JSONL")?;
    let out = opts.out()?;
    let records = read_tagged(inputs)?;
    let splits = split_diagnostics(records, opts.test_frac, opts.seed)?;
    write_staged(out, |dir| {
        for (category, split) in &splits {
            for (side, records) in [
                (DiagSide::Train, &split.train),
                (DiagSide::Test, &split.test),
            ] {
                write_jsonl(
                    &dir.join(diag_file(*category, side)),
                    records.iter().map(|r| OutputRecord::diagnostic(r, side)),
                )?;
            }
        }
        Ok(())
    })?;
    for (category, split) in &splits {
        eprintln!(
            "{:<3} train {} test {}",
            category.code(),
            split.train.len(),
            split.test.len()
        );
    }
    Ok(())
}

fn cmd_undersample(opts: &Opts) -> CliResult {
    let input = opts.single_input_dir()?;
    let out = opts.out()?;
    let mut sets = BTreeMap::new();
    for c in NegCategory::ALL {
        let path = input.join(diag_file(c, DiagSide::Train));
        if path.is_file() {
            sets.insert(c, read_jsonl::<OutputRecord>(&path)?);
        }
    }
    if sets.is_empty() {
        return Err(CliError::Usage(format!(
            "no *_train.jsonl files in {}",
            input.display()
        )));
    }
    let reduced = undersample(sets, opts.seed);
    write_staged(out, |dir| {
        for (category, records) in &reduced {
            write_jsonl(&dir.join(diag_file(*category, DiagSide::Train)), records)?;
        }
        Ok(())
    })?;
    for (category, records) in &reduced {
        eprintln!("{:<3} {}", category.code(), records.len());
    }
    Ok(())
}

fn cmd_stats(opts: &Opts) -> CliResult {
    let report = recount_output_dir(opts.single_input_dir()?)?;
    print_report(&report, opts.format)
}

fn cmd_pipeline(opts: &Opts) -> CliResult {
    let inputs = opts.inputs("parsed-pairs JSONL")?;
    let out = opts.out()?;
    let config = opts.pipeline_config()?;
    let ingested = ingest_pairs(inputs)?;
    let mut lexicon = LazyLexicon::new(config.wordnet.clone());
    let result = build_corpus(ingested, &config, &mut lexicon)?;
    write_outputs(out, &result)?;
    print_report(&result.report, opts.format)
}

fn run(cli: Cli) -> CliResult {
    let opts = cli.opts;
    if opts.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    par::with_threads(opts.threads, || match cli.command {
        Command::Tag => cmd_tag(&opts),
        Command::Augment => cmd_augment(&opts),
        Command::Split => cmd_split(&opts),
        Command::Undersample => cmd_undersample(&opts),
        Command::Stats => cmd_stats(&opts),
        Command::Pipeline => cmd_pipeline(&opts),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let level = match cli.opts.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CliError::Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(CliError::Run(err))) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_user_error() { 1 } else { 2 })
        }
        Err(_) => ExitCode::from(2),
    }
}
