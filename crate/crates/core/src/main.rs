use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evofs::config::RunConfig;
use evofs::dataset::Dataset;
use evofs::error::{Error, Result};
use evofs::ga::EvolutionLog;
use evofs::harness::{
    nested_validate, rfe_select, sweep, ExperimentReport, Method, NestedOutcome, Progress, ReportRow, Selector,
    SweepPlan,
};
use evofs::seed::{self, stream};

#[derive(Parser)]
#[command(name = "evofs", version, about = "GA wrapper feature selection with nested cross-validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class counts and majority-class accuracy.
    Baseline(Common),
    /// Nested validation of a fixed or RFE-selected feature list.
    ReproduceRfe(Common),
    /// GA selection swept over classifiers, penalties and variance flags.
    Ga(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV, overriding the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Label column name (default: last column).
    #[arg(long)]
    label_column: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism). Results do not
    /// depend on this value.
    #[arg(long)]
    workers: Option<usize>,
    /// Validate the configuration, print it with defaults filled in, and stop.
    #[arg(long)]
    dry_run: bool,
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &common.dataset {
        cfg.dataset = Some(std::path::absolute(d).map_err(|e| Error::Io { path: d.clone(), source: e })?);
    }
    if let Some(l) = &common.label_column {
        cfg.label_column = Some(l.clone());
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    let checked = cfg.validate();
    match &common.config {
        Some(p) => checked.map_err(|e| e.context(p.display().to_string()))?,
        None => checked?,
    }
    Ok(cfg)
}

struct Output<'a> {
    dir: PathBuf,
    cfg: &'a RunConfig,
    stamp: String,
}

impl<'a> Output<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("evofs-out"));
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
        let stamp = format!("# seed={} config={}\n", cfg.seed, cfg.embedded());
        Ok(Output { dir, cfg, stamp })
    }

    fn write(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let io = |e| Error::Io { path: path.clone(), source: e };
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        body(&mut w)?;
        w.flush().map_err(io)
    }

    /// CSV preceded by a `#` line carrying the seed and resolved config.
    fn csv(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let stamp = self.stamp.clone();
        let path = self.dir.join(name);
        self.write(name, |w| {
            w.write_all(stamp.as_bytes()).map_err(|e| Error::Io { path, source: e })?;
            body(w)
        })
    }

    fn text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        self.write(name, |w| w.write_all(text.as_bytes()).map_err(|e| Error::Io { path, source: e }))
    }

    fn report(&self, report: &ExperimentReport) -> Result<()> {
        let mut report = report.clone();
        report.meta.config = self.cfg.embedded();
        report.validate()?;
        self.text("report.json", &(report.to_json()? + "\n"))?;
        self.csv("report.csv", |w| report.write_csv(w))?;
        if report.rows.iter().any(|r| r.method != Method::Baseline) {
            self.csv("comparison.csv", |w| report.write_comparison_csv(w))?;
        }
        let mut resolved = self.cfg.clone();
        resolved.out = None;
        self.text("config.resolved.toml", &resolved.to_toml()?)
    }

    fn fold_plans(&self, d: &Dataset) -> Result<()> {
        let spec = self.cfg.nested_spec();
        for rep in 0..spec.repetitions {
            let plan = spec.outer_plan(d, rep)?;
            self.csv(&format!("foldplan_r{rep}.csv"), |w| plan.write_csv(w))?;
        }
        Ok(())
    }

    fn evolution(&self, tag: &str, log: &EvolutionLog) -> Result<()> {
        self.csv(&format!("evolution_{tag}.csv"), |w| log.write_csv(w))
    }
}

fn cmd_baseline(cfg: &RunConfig) -> Result<()> {
    let d = cfg.load_dataset()?;
    let counts = d.class_counts();
    let names = d.class_names();
    let mut report = ExperimentReport::new(&d, cfg.seed);
    report.rows.push(ReportRow::baseline(&d));
    println!("instances: {}", d.n_instances());
    println!("features: {}", d.n_features());
    println!("class counts: {}={} {}={}", names[0], counts[0], names[1], counts[1]);
    println!("majority baseline: {:.7}", report.rows[0].validation);
    Output::new(cfg)?.report(&report)
}

fn read_feature_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn cmd_reproduce_rfe(cfg: &RunConfig) -> Result<()> {
    let d = cfg.load_dataset()?;
    let out = Output::new(cfg)?;
    let spec = cfg.nested_spec();
    let ranking = cfg.classifier_spec(cfg.rfe.ranking);

    let (selector, method, listed) = if let Some(file) = &cfg.rfe.features_file {
        let names = read_feature_list(file)?;
        let idx = d.feature_indices(&names).map_err(|e| e.context(file.display().to_string()))?;
        (Selector::Fixed(idx.clone()), Method::Fixed, Some(idx))
    } else if cfg.rfe.inside_cv {
        let sel = Selector::Rfe {
            target: cfg.rfe.target,
            ranking,
        };
        (sel, Method::Rfe, None)
    } else {
        let idx = rfe_select(&d, cfg.rfe.target, &ranking, seed::derive(cfg.seed, &[stream::FINAL]))?;
        (Selector::Fixed(idx.clone()), Method::Rfe, Some(idx))
    };
    if let Some(idx) = &listed {
        let names: Vec<&str> = idx.iter().map(|&j| d.feature_names()[j].as_str()).collect();
        out.text("selected_features.txt", &(names.join("\n") + "\n"))?;
    }

    let mut report = ExperimentReport::new(&d, cfg.seed);
    report.rows.push(ReportRow::baseline(&d));
    let n_selected = listed.as_ref().map_or(cfg.rfe.target, Vec::len);
    for clf in cfg.classifier_specs() {
        let grid = cfg.rfe.grid_search.then(|| cfg.grid_for(clf.kind, n_selected));
        let mut row = nested_validate(&d, &selector, &spec, &clf, grid.as_ref(), None)
            .map_err(|e| e.context(clf.kind.to_string()))?
            .row;
        row.method = method;
        eprintln!(
            "{}: noF={} avg_test={:.4} validation={:.4}",
            clf.kind, row.num_features, row.avg_test, row.validation
        );
        report.rows.push(row);
    }
    out.fold_plans(&d)?;
    out.report(&report)
}

fn run_tag(run: &NestedOutcome) -> String {
    format!(
        "{}_a{}_v{}",
        run.row.classifier,
        run.row.alpha.unwrap_or_default(),
        u8::from(run.row.variance_penalty.unwrap_or_default())
    )
}

fn cmd_ga(cfg: &RunConfig) -> Result<()> {
    let d = cfg.load_dataset()?;
    let out = Output::new(cfg)?;
    let plan = SweepPlan {
        classifiers: cfg.classifier_specs(),
        alphas: cfg.fitness.penalty.clone(),
        variance_flags: cfg.fitness.var_penalty.clone(),
        ga: cfg.ga_config(),
        nested: cfg.nested_spec(),
    };
    let progress = |p: &Progress<'_>| {
        let at = match (p.repetition, p.fold) {
            (Some(r), Some(f)) => format!("r{r} f{f}"),
            _ => "final".into(),
        };
        let s = p.stats;
        eprintln!(
            "{} a={} v={} {at} gen {}: best={:.6} mean={:.6} acc={:.4} noF={}",
            p.classifier,
            p.alpha,
            u8::from(p.variance_penalty),
            s.generation,
            s.best_fitness,
            s.mean_fitness,
            s.best_accuracy,
            s.best_num_features
        );
    };
    let result = sweep(&d, &plan, Some(&progress))?;
    for run in &result.runs {
        let tag = run_tag(run);
        for f in &run.folds {
            if let Some(log) = &f.evolution {
                out.evolution(&format!("{tag}_r{}_f{}", f.repetition, f.fold), log)?;
            }
        }
        if let Some(log) = &run.final_evolution {
            out.evolution(&format!("{tag}_final"), log)?;
        }
    }
    out.fold_plans(&d)?;
    out.report(&result.report)
}

fn run(cli: Cli) -> Result<()> {
    let (common, f): (&Common, fn(&RunConfig) -> Result<()>) = match &cli.command {
        Command::Baseline(c) => (c, cmd_baseline),
        Command::ReproduceRfe(c) => (c, cmd_reproduce_rfe),
        Command::Ga(c) => (c, cmd_ga),
    };
    let cfg = resolve(common)?;
    if common.dry_run {
        let mut shown = cfg.clone();
        shown.out = Some(cfg.out.clone().unwrap_or_else(|| PathBuf::from("evofs-out")));
        print!("{}", shown.to_toml()?);
        return Ok(());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(Error::InvalidArgument("--workers must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| f(&cfg))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.category());
            ExitCode::FAILURE
        }
    }
}
