mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use confsweep::incidence::verify_lines;
use confsweep::oracle::{enumerate_combinatorial, verify_realization, Homogeneous};
use confsweep::reduce::reduce_with_jobs;
use confsweep::sweep::{self, Checkpoint, SearchCounters, SweepOptions};
use confsweep::wiring::wiring_svg;
use confsweep::{Configuration, DrawError, PartitionTable, SweepError};

use io::{read_records, records, Manifest, Output};

#[derive(Parser)]
#[command(name = "confsweep", version, about = "Enumerate and classify topological (n_k) configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep for candidate configurations and write them as JSONL.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Worker threads (0: one per core).
        #[arg(long, env = "CONFSWEEP_JOBS", default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Resume from, and periodically save to, this file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Report explored nodes and emitted closures on stderr.
        #[arg(long)]
        progress: bool,
        /// History length at which the search tree is cut into tasks.
        #[arg(long, default_value_t = 3)]
        split_depth: usize,
        /// Keep search nodes that repeat an earlier node's state.
        #[arg(long)]
        no_dedup: bool,
        /// Omit event histories from the records.
        #[arg(long)]
        no_history: bool,
        /// Search at most this many tasks, save the checkpoint and stop.
        #[arg(long, requires = "checkpoint")]
        max_tasks: Option<usize>,
    },
    /// Collapse configurations into combinatorial equivalence classes.
    Reduce {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "CONFSWEEP_JOBS", default_value_t = 1)]
        jobs: usize,
        /// Write per-level bucket statistics and self-dual counts here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check every record; exits with status 1 if any record is invalid.
    Verify {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count combinatorial configurations by exhaustive search (small cases only).
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Also write one representative per class.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the ordered table of base-line segment tuples.
    Partitions {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Render one SVG wiring diagram per record.
    Draw {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Check rational coordinates against a configuration; exits with status 1
    /// if they do not realize it.
    VerifyReal {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        coords: PathBuf,
    },
}

/// Bad parameters from the user: reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Enumerate { n, k, jobs, out, checkpoint, progress, split_depth, no_dedup, no_history, max_tasks } => {
            let opts = SweepOptions { jobs, split_depth, dedup: !no_dedup, counters: Arc::new(SearchCounters::default()) };
            enumerate(n, k, &opts, out.as_deref(), checkpoint.as_deref(), progress, no_history, max_tasks)?;
        }
        Command::Reduce { input, out, jobs, report } => reduce(input.as_deref(), out.as_deref(), jobs, report.as_deref())?,
        Command::Verify { input, out } => return verify(input.as_deref(), out.as_deref()),
        Command::Oracle { n, k, out } => {
            let reps = enumerate_combinatorial(n, k).map_err(|e| Usage(e.to_string()))?;
            println!("{}", reps.len());
            if let Some(path) = out {
                let manifest = Manifest::new("oracle").params(n, k).output(Some(&path));
                let mut w = Output::create(Some(&path), &manifest)?;
                for c in &reps {
                    w.record(&c.to_record())?;
                }
                w.finish()?;
            }
        }
        Command::Partitions { n, k } => {
            if k == 0 {
                return Err(Usage("k must be positive".into()).into());
            }
            let table = PartitionTable::new(n, k).map_err(|e| Usage(e.to_string()))?;
            for t in table.tuples() {
                println!("{t}");
            }
        }
        Command::Draw { input, out_dir } => draw(input.as_deref(), &out_dir)?,
        Command::VerifyReal { config, coords } => return verify_real(&config, &coords),
    }
    Ok(ExitCode::SUCCESS)
}

fn usage_or_internal(e: SweepError) -> anyhow::Error {
    match e {
        SweepError::BadParameters { .. } | SweepError::Partition(_) => Usage(e.to_string()).into(),
        other => other.into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    n: usize,
    k: usize,
    opts: &SweepOptions,
    out: Option<&Path>,
    checkpoint: Option<&Path>,
    progress: bool,
    no_history: bool,
    max_tasks: Option<usize>,
) -> Result<()> {
    let started = Instant::now();
    let (tasks, mut ckpt) = match checkpoint {
        Some(path) if path.exists() => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let ckpt: Checkpoint = serde_json::from_str(&text).context("parsing checkpoint")?;
            if (ckpt.n, ckpt.k, ckpt.split_depth, ckpt.dedup) != (n, k, opts.split_depth, opts.dedup) {
                return Err(Usage(format!("checkpoint {} was written for different parameters", path.display())).into());
            }
            (ckpt.task_states()?, ckpt)
        }
        _ => {
            if k < 3 {
                return Err(Usage("k must be at least 3".into()).into());
            }
            let tasks = sweep::plan_tasks(n, k, opts.split_depth, opts.dedup).map_err(usage_or_internal)?;
            let ckpt = Checkpoint::new(n, k, opts.split_depth, opts.dedup, &tasks);
            (tasks, ckpt)
        }
    };
    let resumed: Vec<usize> = ckpt.done.keys().copied().collect();
    let mut todo = ckpt.todo();
    if let Some(limit) = max_tasks {
        todo.truncate(limit);
    }

    let manifest = Manifest::new("enumerate")
        .params(n, k)
        .flag("split_depth", json!(opts.split_depth))
        .flag("dedup", json!(opts.dedup))
        .flag("history", json!(!no_history))
        .output(out);
    let mut writer = Output::create(out, &manifest)?;

    let stop = Arc::new(AtomicBool::new(false));
    let reporter = progress.then(|| spawn_progress(opts.counters.clone(), tasks.len(), resumed.len(), stop.clone()));

    let mut failure: Option<anyhow::Error> = None;
    let mut pending_resumed = resumed.iter().copied().peekable();
    let mut last_save = Instant::now();
    let mut completed = resumed.len();
    let write_task = |writer: &mut Output, result: &sweep::TaskResult| -> Result<()> {
        for record in &result.outputs {
            if no_history {
                writer.record(&confsweep::SweepRecord { config: record.config.clone(), history: None })?;
            } else {
                writer.record(record)?;
            }
        }
        Ok(())
    };
    sweep::run_tasks(&tasks, &todo, opts, |i, result| {
        if failure.is_some() {
            return;
        }
        let mut step = || -> Result<()> {
            while let Some(&j) = pending_resumed.peek().filter(|&&j| j < i) {
                write_task(&mut writer, &ckpt.done[&j])?;
                pending_resumed.next();
            }
            write_task(&mut writer, &result)?;
            completed += 1;
            if let Some(path) = checkpoint {
                ckpt.done.insert(i, result.clone());
                if last_save.elapsed() > Duration::from_secs(5) {
                    save_checkpoint(path, &ckpt)?;
                    last_save = Instant::now();
                }
            }
            Ok(())
        };
        if let Err(e) = step() {
            failure = Some(e);
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    for j in pending_resumed {
        write_task(&mut writer, &ckpt.done[&j])?;
    }
    writer.finish()?;
    if let Some(path) = checkpoint {
        save_checkpoint(path, &ckpt)?;
    }
    stop.store(true, Ordering::Relaxed);
    if let Some(handle) = reporter {
        let _ = handle.join();
    }
    let remaining = tasks.len() - completed;
    if progress || remaining > 0 {
        eprintln!(
            "enumerate n={n} k={k}: {} nodes, {} closures, {} of {} tasks done, {:.1}s",
            opts.counters.nodes(),
            opts.counters.emitted(),
            tasks.len() - remaining,
            tasks.len(),
            started.elapsed().as_secs_f64()
        );
    }
    if remaining > 0 {
        eprintln!("stopped early; rerun with the same --checkpoint to finish");
    }
    Ok(())
}

fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec(ckpt)?).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn spawn_progress(
    counters: Arc<SearchCounters>,
    total: usize,
    resumed: usize,
    stop: Arc<AtomicBool>,
) -> std::thread::JoinHandle<()> {
    std::thread::spawn(move || {
        let started = Instant::now();
        let mut tick = Instant::now();
        while !stop.load(Ordering::Relaxed) {
            std::thread::sleep(Duration::from_millis(100));
            if tick.elapsed() >= Duration::from_secs(2) {
                tick = Instant::now();
                eprintln!(
                    "progress: {} nodes, {} closures, {}/{} tasks, {:.0}s",
                    counters.nodes(),
                    counters.emitted(),
                    counters.tasks_done() as usize + resumed,
                    total,
                    started.elapsed().as_secs_f64()
                );
            }
        }
    })
}

fn reduce(input: Option<&Path>, out: Option<&Path>, jobs: usize, report: Option<&Path>) -> Result<()> {
    // Streamed: histories are dropped as soon as each record is parsed.
    let mut failure = None;
    let configs = records(input)?.enumerate().map_while(|(i, r)| {
        match r.and_then(|r| Configuration::from_record(&r.config).with_context(|| format!("record {}", i + 1))) {
            Ok(c) => Some(c),
            Err(e) => {
                failure = Some(e);
                None
            }
        }
    });
    let reduction = reduce_with_jobs(configs, jobs)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let manifest = Manifest::new("reduce").input(input).output(out);
    let mut w = Output::create(out, &manifest)?;
    for class in &reduction.classes {
        w.record(&class.to_record())?;
    }
    w.finish()?;
    if let Some(path) = report {
        let body = json!({ "manifest": manifest, "report": reduction.report });
        std::fs::write(path, serde_json::to_string_pretty(&body)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn verify(input: Option<&Path>, out: Option<&Path>) -> Result<ExitCode> {
    let manifest = Manifest::new("verify").input(input).output(out);
    let mut w = Output::create(out, &manifest)?;
    let (mut seen, mut invalid) = (0, 0);
    for (i, r) in records(input)?.enumerate() {
        let r = r?;
        seen += 1;
        let report = verify_lines(r.config.n, r.config.k, &r.config.lines);
        let replay = r.history.as_ref().map(|h| {
            let replayed = sweep::replay_closed(r.config.n, r.config.k, h).ok().map(|o| o.config);
            let given = Configuration::from_record(&r.config).ok().map(|c| c.canonical());
            replayed.is_some() && replayed == given
        });
        let ok = report.is_valid() && replay != Some(false);
        if !ok {
            invalid += 1;
        }
        let mut line = BTreeMap::new();
        line.insert("index", json!(i));
        line.insert("valid", json!(ok));
        line.insert("violations", json!(report.violations.iter().map(ToString::to_string).collect::<Vec<_>>()));
        line.insert("two_crossings_per_line", json!(report.two_crossings_per_line));
        line.insert("two_crossings_total", json!(report.two_crossings_total));
        if let Some(replay) = replay {
            line.insert("history_replays", json!(replay));
        }
        w.record(&line)?;
    }
    w.finish()?;
    eprintln!("verified {seen} records, {invalid} invalid");
    Ok(if invalid == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn draw(input: Option<&Path>, out_dir: &Path) -> Result<()> {
    for (i, r) in records(input)?.enumerate() {
        let r = r?;
        if i == 0 {
            std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        }
        let history = r.history.as_ref().ok_or(DrawError::MissingHistory).with_context(|| format!("record {}", i + 1))?;
        let svg = wiring_svg(r.config.n, r.config.k, history).with_context(|| format!("record {}", i + 1))?;
        let path = out_dir.join(format!("config_{:05}.svg", i + 1));
        std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct Coordinates {
    points: Vec<Vec<serde_json::Value>>,
    /// When absent, each line is taken through its first two points.
    #[serde(default)]
    lines: Option<Vec<Vec<serde_json::Value>>>,
}

fn parse_vectors(values: &[Vec<serde_json::Value>], what: &str) -> Result<Vec<Homogeneous>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let parts: Vec<String> = v
                .iter()
                .map(|c| match c {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            Homogeneous::parse(&parts).with_context(|| format!("{what} {i}: expected three rationals like \"3/4\""))
        })
        .collect()
}

fn verify_real(config: &Path, coords: &Path) -> Result<ExitCode> {
    let records = read_records(Some(config))?;
    let Some(record) = records.first() else {
        bail!("{} holds no configuration", config.display());
    };
    let c = Configuration::from_record(&record.config)?;
    let text = std::fs::read_to_string(coords).with_context(|| format!("reading {}", coords.display()))?;
    let coords: Coordinates = serde_json::from_str(&text).context("parsing coordinates")?;
    let points = parse_vectors(&coords.points, "point")?;
    let lines = match &coords.lines {
        Some(lines) => parse_vectors(lines, "line")?,
        None if points.len() != c.n() => bail!("expected {} points, found {}", c.n(), points.len()),
        None => c.lines().iter().map(|l| points[l[0]].cross(&points[l[1]])).collect(),
    };
    let realized = verify_realization(&points, &lines, &c)?;
    println!("{}", if realized { "realized" } else { "not realized" });
    Ok(if realized { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
