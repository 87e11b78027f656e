use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use errforge::config::ProviderKind;
use errforge::corpus::{read_lines, write_tagged_sentence};
use errforge::pipeline::{self, CombineOutputs, FilterOutputs, RunDir, RunInputs};
use errforge::{Aligner, ErrorDistribution, PipelineConfig, ReferenceSource, Tagger};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PROVIDER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "errforge",
    version,
    about = "Synthetic grammatical-error data factory"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Never changes outputs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    keep_ratio: Option<f64>,
    #[arg(long, global = true)]
    mean_len: Option<f64>,
    #[arg(long, global = true)]
    n_best: Option<usize>,
    #[arg(long, global = true)]
    num_outputs: Option<usize>,
    #[arg(long, global = true, value_parser = parse_provider)]
    provider: Option<ProviderKind>,
    /// Recorded n-best JSONL served by the replay provider.
    #[arg(long, global = true)]
    replay: Option<PathBuf>,
    #[arg(long, global = true, env = "ERRFORGE_PROVIDER_URL")]
    provider_url: Option<String>,
}

fn parse_provider(s: &str) -> Result<ProviderKind, String> {
    match s {
        "mock" => Ok(ProviderKind::Mock),
        "replay" => Ok(ProviderKind::Replay),
        "remote" => Ok(ProviderKind::Remote),
        _ => Err(format!("unknown provider {s:?} (mock, replay, remote)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage into a run directory.
    Run {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        reference: ReferenceArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split source sentences into chunks; writes skeleton JSONL.
    Chunk {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fill skeleton records with n-best hypotheses.
    Translate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to `<out>.failures.jsonl`.
        #[arg(long)]
        failures: Option<PathBuf>,
    },
    /// Sample candidate sentences from n-best records.
    Combine {
        #[arg(long)]
        input: PathBuf,
        /// Writes `<prefix>.src`, `<prefix>.tgt` and `<prefix>.jsonl`.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Tag a plain one-sentence-per-line file.
    Tag {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replacement `surface<TAB>tag` lexicon.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Align two tagged corpora and print one alignment per line.
    Align {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aligns plain candidate files with the built-in tagger.
    AlignCandidates {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the correction-trigram distribution of a reference corpus.
    EstimateDist {
        #[command(flatten)]
        reference: ReferenceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Keep the candidates that best match a reference distribution.
    Filter {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        alignments: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Compute F-beta from edit counts.
    ScoreFbeta {
        #[arg(long)]
        tp: u64,
        #[arg(long)]
        fp: u64,
        #[arg(long = "fn")]
        fn_: u64,
        #[arg(long, default_value_t = errforge::error_model::DEFAULT_BETA)]
        beta: f64,
    },
    /// Re-derive the report of a finished run directory.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = true)]
struct ReferenceArgs {
    /// Reference distribution TSV.
    #[arg(long, conflicts_with_all = ["reference_alignments", "reference_source", "reference_target"])]
    reference_dist: Option<PathBuf>,
    /// Rendered reference alignments, one per line.
    #[arg(long, conflicts_with_all = ["reference_source", "reference_target"])]
    reference_alignments: Option<PathBuf>,
    /// Tagged learner sentences.
    #[arg(long, requires = "reference_target")]
    reference_source: Option<PathBuf>,
    /// Tagged corrections of `--reference-source`.
    #[arg(long, requires = "reference_source")]
    reference_target: Option<PathBuf>,
}

impl ReferenceArgs {
    fn source(&self) -> ReferenceSource {
        if let Some(path) = &self.reference_dist {
            ReferenceSource::Distribution { path: path.clone() }
        } else if let Some(path) = &self.reference_alignments {
            ReferenceSource::Alignments { path: path.clone() }
        } else {
            ReferenceSource::Tagged {
                source: self.reference_source.clone().expect("clap group"),
                target: self.reference_target.clone().expect("clap group"),
            }
        }
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn load_config(g: &GlobalArgs) -> errforge::Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.keep_ratio {
        cfg.keep_ratio = v;
    }
    if let Some(v) = g.mean_len {
        cfg.mean_len = v;
    }
    if let Some(v) = g.n_best {
        cfg.n_best = v;
    }
    if let Some(v) = g.num_outputs {
        cfg.num_outputs = v;
    }
    if let Some(v) = &g.replay {
        cfg.provider_replay_path = Some(v.clone());
        cfg.provider = ProviderKind::Replay;
    }
    if let Some(v) = &g.provider_url {
        cfg.provider_url = Some(v.clone());
    }
    if let Some(v) = g.provider {
        cfg.provider = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Provider failures that left nothing translated are fatal.
fn check_translated(translated: u64, failed_provider: u64) -> anyhow::Result<()> {
    if translated == 0 && failed_provider > 0 {
        return Err(
            errforge::Error::Provider(errforge::translate::ProviderError::Transport(format!(
                "all {failed_provider} records failed at the provider"
            )))
            .into(),
        );
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Run {
            source,
            target,
            reference,
            out,
        } => {
            let provider = cfg.build_provider()?;
            let inputs = RunInputs {
                source,
                target,
                reference: reference.source(),
            };
            let report = pipeline::run(&cfg, &inputs, provider.as_ref(), &RunDir::new(out))?;
            check_translated(report.records_translated, report.records_failed_provider)?;
            for t in &report.timings {
                eprintln!("{:<10} {:>8.3}s", t.stage, t.seconds);
            }
            print_json(&report)
        }
        Command::Chunk { source, target, out } => {
            let stats = pipeline::chunk_stage(&source, &target, &out, &cfg)?;
            print_json(&stats)
        }
        Command::Translate { input, out, failures } => {
            let failures = failures.unwrap_or_else(|| with_ext(&out, "failures.jsonl"));
            let provider = cfg.build_provider()?;
            let stats = pipeline::translate_stage(
                &input,
                &out,
                &failures,
                provider.as_ref(),
                &cfg.translate_options(),
            )?;
            check_translated(stats.translated, stats.failed_provider)?;
            print_json(&stats)
        }
        Command::Combine { input, out_prefix } => {
            let (src, tgt, meta) = (
                with_ext(&out_prefix, "src"),
                with_ext(&out_prefix, "tgt"),
                with_ext(&out_prefix, "jsonl"),
            );
            let stats = pipeline::combine_stage(
                &input,
                &CombineOutputs {
                    source: &src,
                    target: &tgt,
                    meta: &meta,
                },
                &cfg,
            )?;
            print_json(&stats)
        }
        Command::Tag { input, out, lexicon } => {
            let tagger = match lexicon {
                Some(p) => Tagger::from_file(&p)?,
                None => Tagger::default(),
            };
            let mut w = output(out.as_deref())?;
            for tokens in read_lines(&input)? {
                write_tagged_sentence(&mut w, &tagger.tag(&tokens))?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Align { source, target, out } => {
            let aligned = pipeline::align_tagged_files(&source, &target, &Aligner::default())?;
            let mut w = output(out.as_deref())?;
            for a in &aligned {
                writeln!(w, "{}", a.render())?;
            }
            w.flush()?;
            Ok(())
        }
        Command::AlignCandidates { source, target, out } => {
            let stats = pipeline::align_candidates_stage(
                &source,
                &target,
                &out,
                &Tagger::default(),
                &Aligner::default(),
            )?;
            print_json(&stats)
        }
        Command::EstimateDist { reference, out } => {
            let dist = pipeline::load_reference(&reference.source(), cfg.smoothing_k, &Aligner::default())?;
            let mut w = output(out.as_deref())?;
            dist.write_tsv(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Filter {
            source,
            target,
            alignments,
            dist,
            out_prefix,
        } => {
            let dist = ErrorDistribution::load(&dist)?;
            let report = pipeline::filter_stage(
                &source,
                &target,
                &alignments,
                &dist,
                cfg.keep_ratio,
                &FilterOutputs {
                    source: &with_ext(&out_prefix, "src"),
                    target: &with_ext(&out_prefix, "tgt"),
                },
            )?;
            print_json(&report)
        }
        Command::ScoreFbeta { tp, fp, fn_, beta } => {
            let f = errforge::f_beta(tp, fp, fn_, beta)?;
            println!("{f}");
            Ok(())
        }
        Command::Report { run_dir } => {
            let report = pipeline::report(&RunDir::new(run_dir))?;
            if !report.is_consistent() {
                bail!("run directory artifacts are inconsistent");
            }
            print_json(&report)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<errforge::Error>() {
        Some(e) if e.is_provider_error() => EXIT_PROVIDER,
        Some(errforge::Error::Config(_)) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let jobs = cli.global.jobs;
    let result = pipeline::with_workers(jobs, || execute(cli)).map_err(anyhow::Error::from);
    match result.and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("errforge: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
