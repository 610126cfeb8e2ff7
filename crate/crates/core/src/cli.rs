//! Command-line front end.

use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::evaluation::{score, sweep, write_sweep_report, Metrics, SortKey, ThresholdGrid};
use crate::parse::read_parse_file;
use crate::pipeline::{decide, extract_all, DecideOptions};
use crate::records::{read_decisions, read_gold, read_pairs, write_candidates, write_decisions, write_pairs};

#[derive(Debug, Parser)]
#[command(
    name = "unithood",
    version,
    about = "Extract noun phrase candidates and decide which adjacent pairs form units"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Count cache file; overrides the config.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Threshold override, e.g. `--threshold mi_plus=0.9`. Repeatable.
    #[arg(long = "threshold", global = true, value_name = "NAME=VALUE")]
    pub thresholds: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract candidates and candidate pairs from a parse file.
    Extract {
        parse_file: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Decide merges for a pairs file.
    Decide {
        pairs_file: PathBuf,
        /// Decision TSV (stdout when omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also write the first-pass pairs with their counts, for `sweep`.
        #[arg(long)]
        decorated: Option<PathBuf>,
    },
    /// Score decisions against gold labels.
    Eval {
        decisions_file: PathBuf,
        gold_file: PathBuf,
    },
    /// Evaluate a grid of thresholds over pairs with counts.
    Sweep {
        decorated_pairs_file: PathBuf,
        gold_file: PathBuf,
        /// Grid such as `id_t=3,6,9;mi_plus=0.9,1.2`.
        #[arg(long)]
        grid: String,
        /// f1, paper_f, precision, recall, accuracy or grid.
        #[arg(long, default_value = "f1")]
        sort: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Count cache maintenance.
    Counts {
        #[command(subcommand)]
        action: CountsAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CountsAction {
    /// Fetch every count `decide` would need for a pairs file into the cache.
    Warm { pairs_file: PathBuf },
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_config(global: &GlobalOpts) -> Result<PipelineConfig> {
    let mut cfg = match &global.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(c) = &global.cache {
        cfg.cache_path = Some(c.clone());
    }
    for t in &global.thresholds {
        cfg.apply_override(t)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_extract(parse_file: &Path, out_candidates: &Path, out_pairs: &Path) -> Result<()> {
    let file = std::fs::File::open(parse_file).with_context(|| format!("opening {}", parse_file.display()))?;
    let sentences =
        read_parse_file(BufReader::new(file)).with_context(|| format!("parsing {}", parse_file.display()))?;
    let ex = extract_all(&sentences);
    write_text(out_candidates, &write_candidates(&ex.candidates))?;
    write_text(out_pairs, &write_pairs(&ex.pairs))?;
    eprintln!(
        "{} sentence(s), {} candidate(s), {} pair(s)",
        sentences.len(),
        ex.candidates.len(),
        ex.pairs.len()
    );
    Ok(())
}

pub fn cmd_decide(
    pairs_file: &Path,
    cfg: &PipelineConfig,
    output: Option<&Path>,
    decorated: Option<&Path>,
) -> Result<()> {
    let records = read_pairs(&read_text(pairs_file)?)?;
    let provider = cfg.build_provider()?;
    let opts = DecideOptions {
        thresholds: cfg.thresholds,
        provider: provider.as_deref(),
        max_merge_passes: cfg.max_merge_passes,
    };
    let out = decide(&records, &opts)?;
    emit(output, &write_decisions(&out.decisions))?;
    if let Some(p) = decorated {
        write_text(p, &write_pairs(&out.decorated))?;
    }
    let merged = out.decisions.iter().filter(|d| d.scores.uh).count();
    eprintln!(
        "{} decision(s) over {} pass(es), {} merged",
        out.decisions.len(),
        out.passes,
        merged
    );
    Ok(())
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{:.2}%", v * 100.0))
}

pub fn format_eval(table: &crate::evaluation::ContingencyTable, m: &Metrics) -> String {
    format!(
        "tp\t{}\nfp\t{}\nfn\t{}\ntn\t{}\ntotal\t{}\nprecision\t{}\nrecall\t{}\nf1\t{}\npaper_f\t{}\naccuracy\t{}\n",
        table.tp,
        table.fp,
        table.fn_,
        table.tn,
        table.total(),
        pct(m.precision),
        pct(m.recall),
        pct(m.f1),
        pct(m.paper_f),
        pct(m.accuracy)
    )
}

pub fn cmd_eval(decisions_file: &Path, gold_file: &Path) -> Result<String> {
    let decisions = read_decisions(&read_text(decisions_file)?)?;
    let gold = read_gold(&read_text(gold_file)?)?;
    let s = score(&decisions, &gold)?;
    if !s.unused_gold.is_empty() {
        eprintln!("warning: {} gold label(s) have no decision", s.unused_gold.len());
    }
    Ok(format_eval(&s.table, &s.table.metrics()))
}

pub fn cmd_sweep(pairs_file: &Path, gold_file: &Path, grid: &str, sort: &str, cfg: &PipelineConfig) -> Result<String> {
    let records = read_pairs(&read_text(pairs_file)?)?;
    let pairs = records
        .iter()
        .map(|r| match r.evidence {
            Some(e) => Ok((r.pair_id.clone(), e)),
            None => bail!("pair `{}` has no n_s/n_ax/n_ay counts", r.pair_id),
        })
        .collect::<Result<Vec<_>>>()?;
    let gold = read_gold(&read_text(gold_file)?)?;
    let grid = ThresholdGrid::parse(grid, cfg.thresholds)?;
    let sort: SortKey = sort.parse().map_err(anyhow::Error::msg)?;
    let report = sweep(&pairs, &gold, &grid, sort)?;
    for (t, why) in &report.skipped {
        eprintln!("skipped {t:?}: {why}");
    }
    Ok(write_sweep_report(&report))
}

pub fn cmd_counts_warm(pairs_file: &Path, cfg: &PipelineConfig) -> Result<()> {
    if cfg.cache_path.is_none() {
        bail!("`counts warm` needs a cache path (--cache or cache_path in the config)");
    }
    let Some(provider) = cfg.build_provider()? else {
        bail!("no count provider configured");
    };
    let mut records = read_pairs(&read_text(pairs_file)?)?;
    for r in &mut records {
        r.evidence = None;
        r.measures = None;
    }
    let opts = DecideOptions {
        thresholds: cfg.thresholds,
        provider: Some(provider.as_ref()),
        max_merge_passes: cfg.max_merge_passes,
    };
    let out = decide(&records, &opts)?;
    eprintln!("warmed counts for {} pair(s)", out.decisions.len());
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build()?;
    pool.install(|| match &cli.command {
        Command::Extract {
            parse_file,
            candidates,
            pairs,
        } => cmd_extract(parse_file, candidates, pairs),
        Command::Decide {
            pairs_file,
            output,
            decorated,
        } => cmd_decide(
            pairs_file,
            &load_config(&cli.global)?,
            output.as_deref(),
            decorated.as_deref(),
        ),
        Command::Eval {
            decisions_file,
            gold_file,
        } => emit(None, &cmd_eval(decisions_file, gold_file)?),
        Command::Sweep {
            decorated_pairs_file,
            gold_file,
            grid,
            sort,
            output,
        } => {
            let cfg = load_config(&cli.global)?;
            let report = cmd_sweep(decorated_pairs_file, gold_file, grid, sort, &cfg)?;
            emit(output.as_deref(), &report)
        }
        Command::Counts {
            action: CountsAction::Warm { pairs_file },
        } => cmd_counts_warm(pairs_file, &load_config(&cli.global)?),
    })
}
