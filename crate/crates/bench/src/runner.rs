use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use ascg_core::colgen::{run_colgen, CgConfig, CgResult, CgStatus};
use ascg_core::graph::{
    dual_seeded_columns, generate_random_graph, parse_dimacs, warm_start_columns, DEFAULT_WARM_START_RESTARTS,
};
use ascg_core::predict::{compute_features, predict_degree_baseline, Model, ModelKind};
use ascg_core::Graph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::methods::{Method, Predictor};

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub graph: Graph,
}

impl Instance {
    /// Reads a DIMACS file; the id is the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let graph = parse_dimacs(std::io::BufReader::new(file))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(Self { id, graph })
    }

    pub fn generated(n: usize, p: f64, seed: u64) -> Self {
        Self {
            id: format!("g{n}_p{p}_s{seed}"),
            graph: generate_random_graph(n, p, seed),
        }
    }
}

/// Trained predictors available to a run.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub ffnn: Option<Model>,
    pub gcn: Option<Model>,
}

impl Models {
    pub fn insert(&mut self, model: Model) -> Result<()> {
        match model.kind {
            ModelKind::Ffnn => self.ffnn = Some(model),
            ModelKind::Gcn => self.gcn = Some(model),
            ModelKind::DegreeBaseline => {
                return Err(BenchError::Usage("the degree baseline needs no model file".into()))
            }
        }
        Ok(())
    }

    fn get(&self, predictor: Predictor) -> Result<&Model> {
        let slot = match predictor {
            Predictor::Ffnn => &self.ffnn,
            Predictor::Gcn => &self.gcn,
            Predictor::Degree => return Err(BenchError::Usage("degree needs no model".into())),
        };
        slot.as_ref()
            .ok_or_else(|| BenchError::Usage(format!("no {predictor:?} model supplied")))
    }
}

/// Per-vertex prediction used as the stabilization reference.
pub fn prediction(g: &Graph, predictor: Predictor, models: &Models, seed: u64) -> Result<Vec<f64>> {
    Ok(match predictor {
        Predictor::Degree => predict_degree_baseline(g).0,
        Predictor::Ffnn => {
            let features = compute_features(g, seed);
            models.get(predictor)?.predict(g, Some(&features))?.0
        }
        Predictor::Gcn => models.get(predictor)?.predict(g, None)?.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// `cg.seed` is overwritten by the run seed.
    pub cg: CgConfig,
    pub epsilon0: Option<f64>,
    pub floor: f64,
    pub warm_start_restarts: usize,
    /// Extra initial columns with the smallest reduced cost against the
    /// prediction; 0 disables. Ignored by methods without a predictor.
    pub dual_seeded: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            cg: CgConfig::default(),
            epsilon0: None,
            floor: ascg_core::colgen::DEFAULT_FLOOR,
            warm_start_restarts: DEFAULT_WARM_START_RESTARTS,
            dual_seeded: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub method: String,
    pub seed: u64,
    pub status: String,
    pub iterations: usize,
    pub objective: f64,
    pub wall_s: f64,
    pub pricing_s: f64,
}

impl RunRecord {
    /// Everything except the timing columns.
    pub fn reproducible_part(&self) -> (String, String, u64, String, usize, u64) {
        (
            self.instance.clone(),
            self.method.clone(),
            self.seed,
            self.status.clone(),
            self.iterations,
            self.objective.to_bits(),
        )
    }
}

pub const RECORDS_CSV_HEADER: &str = "instance,method,seed,status,iterations,objective,wall_s,pricing_s";

/// Solves one instance with one method. Wall time covers prediction, warm
/// start and column generation.
pub fn solve(
    instance: &Instance,
    method: Method,
    models: &Models,
    seed: u64,
    options: &SolveOptions,
) -> Result<(RunRecord, CgResult<f64>)> {
    let start = Instant::now();
    let g = &instance.graph;
    let yhat = method
        .predictor()
        .map(|p| prediction(g, p, models, seed))
        .transpose()?;
    let mut init = warm_start_columns(g, options.warm_start_restarts.max(1), seed);
    if let (Some(y), true) = (&yhat, options.dual_seeded > 0) {
        for col in dual_seeded_columns(g, y, options.dual_seeded, seed) {
            if !init.contains(&col) {
                init.push(col);
            }
        }
    }
    let config = CgConfig {
        seed,
        ..options.cg.clone()
    };
    let policy = method.policy(options.epsilon0, options.floor);
    let result = run_colgen(g, policy, &config, &init, yhat.as_deref())?;
    let wall = start.elapsed().as_secs_f64();
    let record = RunRecord {
        instance: instance.id.clone(),
        method: method.to_string(),
        seed,
        status: result.status.as_str().to_owned(),
        iterations: result.iterations,
        objective: result.objective,
        // unsolved runs are charged the full limit
        wall_s: if result.status == CgStatus::TimeLimit {
            wall.max(config.time_limit.as_secs_f64())
        } else {
            wall
        },
        pricing_s: result.pricing_seconds,
    };
    Ok((record, result))
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub instances: Vec<Instance>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub options: SolveOptions,
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() || self.methods.is_empty() || self.seeds.is_empty() {
            return Err(BenchError::Usage(
                "benchmark needs at least one instance, method and seed".into(),
            ));
        }
        Ok(())
    }
}

/// Runs every (instance, method, seed) cell in parallel. Cells that fail are
/// recorded with status `error`. Output order follows the configuration.
pub fn run_benchmark(config: &BenchmarkConfig, models: &Models) -> Result<Vec<RunRecord>> {
    config.validate()?;
    for m in &config.methods {
        if let Some(p) = m.predictor().filter(|_| m.needs_model()) {
            models.get(p)?;
        }
    }
    let cells: Vec<(usize, usize, usize)> = (0..config.instances.len())
        .flat_map(|i| {
            (0..config.methods.len()).flat_map(move |m| (0..config.seeds.len()).map(move |s| (i, m, s)))
        })
        .collect();
    let records = cells
        .par_iter()
        .map(|&(i, m, s)| {
            let (inst, method, seed) = (&config.instances[i], config.methods[m], config.seeds[s]);
            match solve(inst, method, models, seed, &config.options) {
                Ok((record, _)) => record,
                Err(e) => {
                    log::warn!("{} / {method} / seed {seed} failed: {e}", inst.id);
                    RunRecord {
                        instance: inst.id.clone(),
                        method: method.to_string(),
                        seed,
                        status: "error".into(),
                        iterations: 0,
                        objective: f64::NAN,
                        wall_s: 0.0,
                        pricing_s: 0.0,
                    }
                }
            }
        })
        .collect();
    Ok(records)
}

pub fn write_records(records: &[RunRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(RECORDS_CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(input: impl Read) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<RunRecord>, _>>()?)
}
