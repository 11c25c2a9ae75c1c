//! Command implementations behind the `ebco` binary.
//!
//! Each command reads one JSON [`RunConfig`], computes everything in memory,
//! and only then writes its output files, `report.json` last. A failed run
//! leaves the output directory untouched.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMethod;
use crate::dataset::{generate_synthetic, load_csv, Dataset, FeatureSchema, PlantedTruth, SyntheticSpec};
use crate::error::Error;
use crate::model::{train, MlpModel, TrainMeta};
use crate::pipeline::{compare_seed, explain, run_pipeline, PipelineConfig, SeedComparison, REACH_TOLERANCE};
use crate::pruning::PrunedDomain;
use crate::search::{exhaustive_oracle, kept_domains, Candidate, GammaMode, SearchTrace};
use crate::FORMAT_VERSION;

/// Largest pruned space for which `optimize` also reports the brute-force optimum.
pub const REPORT_ORACLE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Schema JSON; required with `dataset`.
    pub schema: Option<PathBuf>,
    /// Dataset CSV. Mutually exclusive with `synthetic`.
    pub dataset: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    /// Previously trained model to reuse instead of training.
    pub model: Option<PathBuf>,
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
    pub seed: Option<u64>,
    /// Number of consecutive seeds `compare` runs, starting at `seed`.
    pub compare_seeds: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: None,
            dataset: None,
            synthetic: None,
            model: None,
            pipeline: PipelineConfig::default(),
            seed: None,
            compare_seeds: 20,
            out_dir: None,
        }
    }
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.schema, &mut cfg.dataset, &mut cfg.model, &mut cfg.out_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Applies `--seed` / `--out` overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if out.is_some() {
            self.out_dir = out;
        }
        self
    }

    pub fn require_seed(&self) -> Result<u64, Error> {
        self.seed.ok_or_else(|| Error::Config("a seed is required (config \"seed\" or --seed)".into()))
    }

    pub fn require_out(&self) -> Result<&Path, Error> {
        self.out_dir
            .as_deref()
            .ok_or_else(|| Error::Config("an output directory is required (config \"out_dir\" or --out)".into()))
    }

    fn validate(&self) -> Result<(), Error> {
        self.pipeline.validate()?;
        match (&self.dataset, &self.synthetic) {
            (Some(_), Some(_)) => return Err(Error::Config("give either dataset or synthetic, not both".into())),
            (Some(_), None) if self.schema.is_none() => return Err(Error::Config("dataset requires a schema".into())),
            (None, None) => return Err(Error::Config("no dataset or synthetic spec given".into())),
            _ => {}
        }
        for p in [&self.schema, &self.dataset, &self.model].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file")));
            }
        }
        Ok(())
    }

    /// Loads the configured dataset, or draws the synthetic one for `seed`.
    pub fn load_data(&self, seed: u64) -> Result<(Dataset, Option<PlantedTruth>), Error> {
        if let Some(spec) = &self.synthetic {
            let (ds, truth) = generate_synthetic(spec, seed)?;
            return Ok((ds, Some(truth)));
        }
        let schema_path = self.schema.as_ref().ok_or_else(|| Error::Config("missing schema".into()))?;
        let data_path = self.dataset.as_ref().ok_or_else(|| Error::Config("missing dataset".into()))?;
        let schema = FeatureSchema::from_json_file(schema_path)?;
        Ok((load_csv(data_path, &schema)?, None))
    }

    fn load_model(&self) -> Result<Option<MlpModel>, Error> {
        self.model.as_deref().map(MlpModel::load_json).transpose().map_err(Error::from)
    }
}

/// Files produced by a command, written in order.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.add(name, serde_json::to_string_pretty(value).expect("serializable") + "\n");
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), Error> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub generated_unix_seconds: u64,
}

impl Metadata {
    fn now() -> Self {
        Self {
            generated_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningAudit {
    pub spec_version: String,
    pub delta: f64,
    /// How per-label relevances combine before thresholding.
    pub aggregation: String,
    pub domains: Vec<PrunedDomain>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningSummary {
    pub feature: String,
    pub kept: usize,
    pub dropped: usize,
    pub guard_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedReport {
    pub truth: PlantedTruth,
    pub recovered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeComparison {
    pub ebco_total_evaluations: usize,
    /// Best full assignment by Gamma over the pruned domains, when enumerable.
    pub oracle: Option<Candidate>,
    pub ebco_matches_oracle: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub spec_version: String,
    pub command: String,
    pub config: RunConfig,
    pub train_meta: Option<TrainMeta>,
    pub reference_rows: Vec<usize>,
    pub pruning: Vec<PruningSummary>,
    pub feature_order: Vec<String>,
    pub best: Candidate,
    pub planted: Option<PlantedReport>,
    pub comparison: OptimizeComparison,
    pub files: Vec<String>,
    pub interpretation: Vec<String>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub seeds: usize,
    pub tolerance: f64,
    pub ebco_not_slower: usize,
    pub planted_recovered: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub spec_version: String,
    pub command: String,
    pub config: RunConfig,
    pub per_seed: Vec<SeedComparison>,
    pub summary: CompareSummary,
    pub files: Vec<String>,
    pub interpretation: Vec<String>,
    pub metadata: Metadata,
}

fn interpretation(cfg: &PipelineConfig) -> Vec<String> {
    let gamma = match cfg.search.gamma_mode {
        GammaMode::AsWritten => "Gamma sums rho for every objective with gamma >= rho",
        GammaMode::Passthrough => "Gamma sums gamma for every objective with gamma >= rho",
    };
    vec![
        "upsilon = Cov(p_c, p) / Var(p) over samples, population normalisation; p_c are predictions with the assignment fixed on every sample".into(),
        gamma.into(),
        "pruning keeps a value when its maximum per-label mean |attribution| exceeds delta".into(),
        "ties rank by Gamma, then lower mean direction-adjusted lambda, then (feature name, value index)".into(),
        "one evaluation = one candidate's batch prediction over all samples".into(),
    ]
}

fn label_header(prefix: &str, labels: &[String]) -> Vec<String> {
    labels.iter().map(|l| format!("{prefix}:{l}")).collect()
}

fn csv_string(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

/// `(iteration, features assigned, feature, evaluations, running best objective, best lambda...)`.
fn plot_rows(trace: &SearchTrace, prefix: &[String]) -> Vec<Vec<String>> {
    let series = trace.objective_series();
    trace
        .iterations
        .iter()
        .zip(series)
        .map(|(r, (evals, best))| {
            let mut row = prefix.to_vec();
            row.extend([
                r.iteration.to_string(),
                r.iteration.to_string(),
                r.feature.clone(),
                evals.to_string(),
                best.to_string(),
            ]);
            row.extend(r.best_lambda.iter().map(f64::to_string));
            row
        })
        .collect()
}

fn plot_header(prefix: &[&str], labels: &[String]) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    h.extend(
        ["iteration", "features_assigned", "feature", "cumulative_evaluations", "best_objective"]
            .iter()
            .map(|s| s.to_string()),
    );
    h.extend(label_header("lambda", labels));
    h
}

/// `synth`: dataset CSV, schema and planted truth for `spec` and `seed`.
pub fn cmd_synth(spec: &SyntheticSpec, seed: u64) -> Result<Outputs, Error> {
    let (ds, truth) = generate_synthetic(spec, seed)?;
    let mut out = Outputs::default();
    out.add("dataset.csv", ds.to_csv_string());
    out.add_json("schema.json", ds.schema());
    out.add_json(
        "planted_truth.json",
        &serde_json::json!({
            "spec_version": FORMAT_VERSION,
            "seed": seed,
            "spec": spec,
            "planted": truth,
        }),
    );
    Ok(out)
}

/// `train`: fits a model and emits `model.json`.
pub fn cmd_train(cfg: &RunConfig) -> Result<Outputs, Error> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let (ds, _) = cfg.load_data(seed)?;
    let pipe = cfg.pipeline.seeded(seed);
    let model = train(&ds, &pipe.train)?;
    let mut out = Outputs::default();
    out.add("model.json", model.to_json_string());
    Ok(out)
}

/// `explain`: attributions for the configured rows as CSV and JSON.
pub fn cmd_explain(cfg: &RunConfig) -> Result<Outputs, Error> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let (ds, _) = cfg.load_data(seed)?;
    let pipe = cfg.pipeline.seeded(seed);
    let model = match cfg.load_model()? {
        Some(m) => m,
        None => train(&ds, &pipe.train)?,
    };
    let explained = explain(&ds, model, &pipe)?;
    let mut out = Outputs::default();
    out.add("attributions.csv", explained.tensor.to_csv_string());
    out.add_json("attributions.json", &explained.tensor.to_json());
    Ok(out)
}

/// `optimize`: the full pipeline on one dataset and seed.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<(OptimizeReport, Outputs), Error> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let (ds, truth) = cfg.load_data(seed)?;
    let pipe = cfg.pipeline.seeded(seed);
    let run = run_pipeline(&ds, &pipe, cfg.load_model()?)?;
    let model = &run.explained.model;
    let labels = ds.schema().labels.clone();

    let kept = kept_domains(&run.pruned);
    let space = kept.iter().try_fold(1usize, |a, d| a.checked_mul(d.len()));
    let oracle = match space {
        Some(n) if n <= REPORT_ORACLE_LIMIT => Some(exhaustive_oracle(model, &ds, &kept, &pipe.search)?),
        _ => None,
    };

    let mut out = Outputs::default();
    out.add("trace_ebco.csv", run.ebco.trace.to_csv_string());
    out.add_json("trace_ebco.json", &run.ebco.trace);
    out.add("plot_lambda.csv", csv_string(plot_header(&[], &labels), plot_rows(&run.ebco.trace, &[])));
    out.add_json(
        "pruning_audit.json",
        &PruningAudit {
            spec_version: FORMAT_VERSION.into(),
            delta: pipe.search.delta,
            aggregation: "max over labels".into(),
            domains: run.pruned.clone(),
        },
    );
    let mut files: Vec<String> = out.names().map(str::to_string).collect();
    files.push("report.json".into());

    let report = OptimizeReport {
        spec_version: FORMAT_VERSION.into(),
        command: "optimize".into(),
        config: cfg.clone(),
        train_meta: model.train_meta().cloned(),
        reference_rows: run.explained.refs.indices().to_vec(),
        pruning: run
            .pruned
            .iter()
            .map(|d| PruningSummary {
                feature: d.feature.clone(),
                kept: d.kept.len(),
                dropped: d.dropped.len(),
                guard_applied: d.guard_applied,
            })
            .collect(),
        feature_order: run.ebco.trace.feature_order.clone(),
        best: run.ebco.best.clone(),
        planted: truth.map(|t| PlantedReport {
            recovered: run.ebco.best.assignment.contains_all(&t.assignment),
            truth: t,
        }),
        comparison: OptimizeComparison {
            ebco_total_evaluations: run.ebco.trace.total_evaluations(),
            ebco_matches_oracle: oracle.as_ref().map(|o| o.assignment == run.ebco.best.assignment),
            oracle,
        },
        files,
        interpretation: interpretation(&pipe),
        metadata: Metadata::now(),
    };
    out.add_json("report.json", &report);
    Ok((report, out))
}

/// `compare`: EBCO against the DP baseline over consecutive seeds.
pub fn cmd_compare(cfg: &RunConfig) -> Result<(CompareReport, Outputs), Error> {
    cfg.validate()?;
    let first = cfg.require_seed()?;
    if cfg.compare_seeds == 0 {
        return Err(Error::Config("compare_seeds must be at least 1".into()));
    }
    if cfg.synthetic.is_none() && cfg.model.is_some() {
        log::info!("compare retrains per seed; the supplied model is ignored");
    }

    let mut per_seed = Vec::new();
    let mut plot = Vec::new();
    let mut first_traces = None;
    let mut first_pruning = None;
    let mut labels = Vec::new();
    for seed in (0..cfg.compare_seeds as u64).map(|k| first.wrapping_add(k)) {
        let (ds, truth) = cfg.load_data(seed)?;
        labels = ds.schema().labels.clone();
        let run = compare_seed(&ds, &cfg.pipeline, seed, truth.as_ref().map(|t| &t.assignment))?;
        let tag = seed.to_string();
        plot.extend(plot_rows(&run.pipeline.ebco.trace, &["ebco".into(), tag.clone()]));
        plot.extend(plot_rows(&run.dp.trace, &["dp".into(), tag]));
        if first_traces.is_none() {
            first_traces = Some((run.pipeline.ebco.trace.clone(), run.dp.trace.clone()));
            first_pruning = Some(run.pipeline.pruned.clone());
        }
        per_seed.push(run.summary);
    }
    let (ebco_trace, dp_trace) = first_traces.expect("at least one seed");

    let mut out = Outputs::default();
    out.add("trace_ebco.csv", ebco_trace.to_csv_string());
    out.add("trace_dp.csv", dp_trace.to_csv_string());
    out.add("plot_lambda.csv", csv_string(plot_header(&["method", "seed"], &labels), plot));
    out.add_json(
        "pruning_audit.json",
        &PruningAudit {
            spec_version: FORMAT_VERSION.into(),
            delta: cfg.pipeline.search.delta,
            aggregation: "max over labels".into(),
            domains: first_pruning.expect("at least one seed"),
        },
    );
    out.add("compare_seeds.csv", seed_table_csv(&per_seed));
    let mut files: Vec<String> = out.names().map(str::to_string).collect();
    files.push("report.json".into());

    let recovered: Vec<bool> = per_seed.iter().filter_map(|s| s.planted_recovered).collect();
    let report = CompareReport {
        spec_version: FORMAT_VERSION.into(),
        command: "compare".into(),
        config: cfg.clone(),
        summary: CompareSummary {
            seeds: per_seed.len(),
            tolerance: REACH_TOLERANCE,
            ebco_not_slower: per_seed.iter().filter(|s| s.ebco_not_slower()).count(),
            planted_recovered: (!recovered.is_empty()).then(|| recovered.iter().filter(|&&r| r).count()),
        },
        per_seed,
        files,
        interpretation: interpretation(&cfg.pipeline),
        metadata: Metadata::now(),
    };
    out.add_json("report.json", &report);
    Ok((report, out))
}

fn fmt_opt(v: Option<usize>) -> String {
    v.map_or_else(|| "never".into(), |n| n.to_string())
}

/// Per-seed comparison table as CSV.
pub fn seed_table_csv(rows: &[SeedComparison]) -> String {
    let header = [
        "seed",
        "target_objective",
        "ebco_objective",
        "dp_objective",
        "ebco_evaluations_to_reach",
        "dp_evaluations_to_reach",
        "ebco_total_evaluations",
        "dp_total_evaluations",
        "ebco_not_slower",
        "planted_recovered",
        "ebco_best",
    ];
    let body = rows
        .iter()
        .map(|s| {
            vec![
                s.seed.to_string(),
                s.target_objective.to_string(),
                s.ebco_best.objective.to_string(),
                s.dp_best.objective.to_string(),
                fmt_opt(s.ebco_evaluations_to_reach),
                fmt_opt(s.dp_evaluations_to_reach),
                s.ebco_total_evaluations.to_string(),
                s.dp_total_evaluations.to_string(),
                s.ebco_not_slower().to_string(),
                s.planted_recovered.map_or_else(String::new, |r| r.to_string()),
                s.ebco_best.assignment.to_string(),
            ]
        })
        .collect();
    csv_string(header.iter().map(|s| s.to_string()).collect(), body)
}

/// Human-readable per-seed table for the terminal.
pub fn seed_table_text(report: &CompareReport) -> String {
    let mut s = format!(
        "{:>6} {:>10} {:>10} {:>10} {:>8} {:>8} {:>9}\n",
        "seed", "target", "ebco", "dp", "ebco@", "dp@", "recovered"
    );
    for r in &report.per_seed {
        s.push_str(&format!(
            "{:>6} {:>10.4} {:>10.4} {:>10.4} {:>8} {:>8} {:>9}\n",
            r.seed,
            r.target_objective,
            r.ebco_best.objective,
            r.dp_best.objective,
            fmt_opt(r.ebco_evaluations_to_reach),
            fmt_opt(r.dp_evaluations_to_reach),
            r.planted_recovered.map_or_else(|| "-".into(), |b| b.to_string()),
        ));
    }
    s.push_str(&format!(
        "EBCO reached within {} of the optimum with no more evaluations than DP on {}/{} seeds",
        report.summary.tolerance, report.summary.ebco_not_slower, report.summary.seeds
    ));
    if let Some(r) = report.summary.planted_recovered {
        s.push_str(&format!("; planted assignment recovered on {r}/{} seeds", report.summary.seeds));
    }
    s.push('\n');
    s
}

/// The attribution method named on the command line.
pub fn parse_method(s: &str) -> Result<AttributionMethod, Error> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Config(format!("unknown attribution method '{s}' (exact, montecarlo, deepshap)")))
}
