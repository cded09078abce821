use std::collections::HashMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::model::{gcn_inputs, propagation, Gradient, Model, ModelKind, GCN_INPUT_WIDTH};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub l2_coefficient: f64,
    pub hidden: usize,
    pub ffnn_layers: usize,
    pub gcn_layers: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            max_epochs: 1000,
            patience: 100,
            l2_coefficient: 1e-4,
            hidden: 32,
            ffnn_layers: 3,
            gcn_layers: 20,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.learning_rate > 0.0
            && self.max_epochs > 0
            && self.patience > 0
            && self.l2_coefficient >= 0.0
            && self.hidden > 0
            && self.ffnn_layers > 0
            && self.gcn_layers > 0;
        if !positive || self.patience > self.max_epochs {
            return Err(Error::Contract(format!("invalid training configuration {self:?}")));
        }
        Ok(())
    }
}

/// All labelled vertices of one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceData {
    pub id: String,
    pub vertices: Vec<usize>,
    pub features: Vec<FeatureVector>,
    pub targets: Vec<f64>,
    /// Needed for GCN training; vertices must then be exactly `0..n`.
    pub graph: Option<Graph>,
}

impl InstanceData {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub instances: Vec<InstanceData>,
}

pub const TRAINING_CSV_HEADER: [&str; 12] = [
    "instance_id", "vertex", "f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8", "f9", "target",
];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    instance_id: String,
    vertex: usize,
    f1: f64,
    f2: f64,
    f3: f64,
    f4: f64,
    f5: f64,
    f6: f64,
    f7: f64,
    f8: f64,
    f9: f64,
    target: f64,
}

impl TrainingSet {
    pub fn num_examples(&self) -> usize {
        self.instances.iter().map(InstanceData::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for inst in &self.instances {
            if inst.is_empty() {
                return Err(Error::Contract(format!("instance {} has no examples", inst.id)));
            }
            if inst.features.len() != inst.len() || inst.vertices.len() != inst.len() {
                return Err(Error::DimensionMismatch {
                    expected: inst.len(),
                    actual: inst.features.len(),
                    context: "instance features",
                });
            }
            if let Some(t) = inst.targets.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return Err(Error::Contract(format!("target {t} of {} outside [0, 1]", inst.id)));
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRAINING_CSV_HEADER).map_err(csv_error)?;
        for inst in &self.instances {
            for ((v, f), t) in inst.vertices.iter().zip(&inst.features).zip(&inst.targets) {
                let mut record = vec![inst.id.clone(), v.to_string()];
                record.extend(f.0.iter().map(|x| x.to_string()));
                record.push(t.to_string());
                w.write_record(&record).map_err(csv_error)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Groups rows by `instance_id` in order of first appearance.
    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
        if header != TRAINING_CSV_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected header {header:?}"),
            });
        }
        let mut set = TrainingSet::default();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (k, row) in r.deserialize::<CsvRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: k + 2,
                message: e.to_string(),
            })?;
            let slot = *index.entry(row.instance_id.clone()).or_insert_with(|| {
                set.instances.push(InstanceData {
                    id: row.instance_id.clone(),
                    vertices: Vec::new(),
                    features: Vec::new(),
                    targets: Vec::new(),
                    graph: None,
                });
                set.instances.len() - 1
            });
            let inst = &mut set.instances[slot];
            inst.vertices.push(row.vertex);
            inst.features.push(FeatureVector([
                row.f1, row.f2, row.f3, row.f4, row.f5, row.f6, row.f7, row.f8, row.f9,
            ]));
            inst.targets.push(row.target);
        }
        set.validate()?;
        Ok(set)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

/// Per-instance data prepared for one model kind.
enum Prepared<'a> {
    Ffnn(&'a InstanceData),
    Gcn {
        inst: &'a InstanceData,
        p: Vec<Vec<(usize, f64)>>,
        h0: Vec<[f64; GCN_INPUT_WIDTH]>,
    },
}

impl<'a> Prepared<'a> {
    fn new(kind: ModelKind, inst: &'a InstanceData) -> Result<Self> {
        match kind {
            ModelKind::Ffnn => Ok(Prepared::Ffnn(inst)),
            ModelKind::Gcn => {
                let g = inst
                    .graph
                    .as_ref()
                    .ok_or_else(|| Error::Model(format!("GCN training needs the graph of {}", inst.id)))?;
                if inst.vertices.iter().copied().ne(0..g.n()) {
                    return Err(Error::Contract(format!(
                        "instance {} must label vertices 0..{} in order for GCN training",
                        inst.id,
                        g.n()
                    )));
                }
                Ok(Prepared::Gcn {
                    inst,
                    p: propagation(g),
                    h0: gcn_inputs(g),
                })
            }
            ModelKind::DegreeBaseline => Err(Error::Model("the degree baseline has no parameters".into())),
        }
    }

    fn inst(&self) -> &InstanceData {
        match self {
            Prepared::Ffnn(inst) | Prepared::Gcn { inst, .. } => inst,
        }
    }

    /// `scale · Σ (f(x) - y)²` and its gradient.
    fn accumulate(&self, model: &Model, scale: f64, grad: &mut Gradient) -> Result<f64> {
        match self {
            Prepared::Ffnn(inst) => Ok(model.ffnn_accumulate(&inst.features, &inst.targets, scale, grad)),
            Prepared::Gcn { inst, p, h0 } => model.gcn_accumulate(p, h0, &inst.targets, scale, grad),
        }
    }

    fn squared_error(&self, model: &Model) -> Result<f64> {
        let inst = self.inst();
        let raw: Vec<f64> = match self {
            Prepared::Ffnn(_) => inst
                .features
                .iter()
                .map(|x| model.ffnn_raw(x))
                .collect::<Result<_>>()?,
            Prepared::Gcn { inst, h0, .. } => {
                model.gcn_raw_with(inst.graph.as_ref().expect("checked in new"), h0)?
            }
        };
        Ok(raw.iter().zip(&inst.targets).map(|(p, y)| (p - y) * (p - y)).sum())
    }
}

/// Mean squared error of one instance (unclipped outputs) and its gradient,
/// flattened in the order of [`Model::parameters`].
pub fn instance_loss_gradient(model: &Model, inst: &InstanceData) -> Result<(f64, Vec<f64>)> {
    if inst.is_empty() {
        return Err(Error::Contract(format!("instance {} has no examples", inst.id)));
    }
    let p = Prepared::new(model.kind, inst)?;
    let mut grad = model.zero_gradient();
    let loss = p.accumulate(model, 1.0 / inst.len() as f64, &mut grad)?;
    Ok((loss, super::model::flatten(&grad)))
}

/// Mean squared error over every example of every instance (unclipped outputs).
pub fn dataset_mse(model: &Model, data: &TrainingSet) -> Result<f64> {
    let prepared = data
        .instances
        .iter()
        .map(|i| Prepared::new(model.kind, i))
        .collect::<Result<Vec<_>>>()?;
    flat_mse(model, &prepared)
}

fn flat_mse(model: &Model, prepared: &[Prepared]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for p in prepared {
        total += p.squared_error(model)?;
        count += p.inst().len();
    }
    Ok(total / count.max(1) as f64)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, model: &mut Model, grad: &Gradient, lr: f64, l2: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let g_flat = super::model::flatten(grad);
        for (((theta, g), m), v) in model
            .params_mut()
            .zip(g_flat)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            let g = g + 2.0 * l2 * *theta;
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *theta -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Snapshot with the best validation loss.
    pub model: Model,
    /// Flat MSE over the training set after each epoch.
    pub train_losses: Vec<f64>,
    pub val_losses: Vec<f64>,
}

/// Adam on per-instance MSE plus `l2 · ‖θ‖²`, one step per training instance
/// per epoch in seeded shuffled order, with early stopping on validation MSE.
pub fn train(kind: ModelKind, data: &TrainingSet, val: &TrainingSet, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    data.validate()?;
    val.validate()?;
    if data.instances.is_empty() || val.instances.is_empty() {
        return Err(Error::Contract("training and validation sets must be non-empty".into()));
    }
    let mut model = match kind {
        ModelKind::Ffnn => Model::new_ffnn(config.hidden, config.ffnn_layers, config.seed)?,
        ModelKind::Gcn => Model::new_gcn(config.hidden, config.gcn_layers, config.seed)?,
        ModelKind::DegreeBaseline => return Err(Error::Model("the degree baseline is not trained".into())),
    };
    let train_set = data
        .instances
        .iter()
        .map(|i| Prepared::new(kind, i))
        .collect::<Result<Vec<_>>>()?;
    let val_set = val
        .instances
        .iter()
        .map(|i| Prepared::new(kind, i))
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(model.num_params());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best: Option<(f64, Model, usize, f64)> = None;
    let mut since_best = 0;
    let (mut train_losses, mut val_losses) = (Vec::new(), Vec::new());

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let p = &train_set[k];
            let mut grad = model.zero_gradient();
            let loss = p.accumulate(&model, 1.0 / p.inst().len() as f64, &mut grad)?;
            if !loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    message: format!("non-finite loss on instance {}", p.inst().id),
                });
            }
            adam.step(&mut model, &grad, config.learning_rate, config.l2_coefficient);
        }
        let train_loss = flat_mse(&model, &train_set)?;
        let val_loss = flat_mse(&model, &val_set)?;
        if !train_loss.is_finite() || !val_loss.is_finite() || model.params().any(|p| !p.is_finite()) {
            return Err(Error::Training {
                epoch,
                message: "loss diverged".into(),
            });
        }
        train_losses.push(train_loss);
        val_losses.push(val_loss);
        log::debug!("epoch {epoch}: train {train_loss:.6} val {val_loss:.6}");
        if best.as_ref().map_or(true, |(b, ..)| val_loss < *b) {
            best = Some((val_loss, model.clone(), epoch, train_loss));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }

    let (val_loss, mut model, best_epoch, train_loss) = best.expect("at least one epoch ran");
    model.metadata.seed = config.seed;
    model.metadata.epochs = train_losses.len();
    model.metadata.best_epoch = best_epoch;
    model.metadata.val_loss = val_loss;
    model.metadata.train_loss = train_loss;
    Ok(TrainOutcome {
        model,
        train_losses,
        val_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_random_graph;
    use crate::predict::compute_features;

    fn instance(id: &str, seed: u64, target: impl Fn(&Graph, usize) -> f64) -> InstanceData {
        let g = generate_random_graph(10, 0.4, seed);
        InstanceData {
            id: id.into(),
            vertices: (0..10).collect(),
            features: compute_features(&g, seed),
            targets: (0..10).map(|v| target(&g, v)).collect(),
            graph: Some(g),
        }
    }

    fn set(range: std::ops::Range<u64>, target: impl Fn(&Graph, usize) -> f64 + Copy) -> TrainingSet {
        TrainingSet {
            instances: range.map(|s| instance(&format!("g{s}"), s, target)).collect(),
        }
    }

    #[test]
    fn learns_constant_target() {
        let data = set(0..16, |_, _| 0.4);
        let val = set(20..22, |_, _| 0.4);
        let out = train(ModelKind::Ffnn, &data, &val, &TrainConfig::default()).unwrap();
        assert!(out.model.metadata.val_loss < 1e-4, "{}", out.model.metadata.val_loss);
        assert!(dataset_mse(&out.model, &val).unwrap() < 1e-4);
    }

    #[test]
    fn epoch_loss_matches_flat_mean() {
        let data = set(0..3, |g, v| g.degree(v) as f64 / 9.0);
        let config = TrainConfig {
            max_epochs: 3,
            patience: 3,
            ..TrainConfig::default()
        };
        let out = train(ModelKind::Ffnn, &data, &data, &config).unwrap();
        let mut sum = 0.0;
        let mut count = 0;
        for inst in &data.instances {
            for (x, y) in inst.features.iter().zip(&inst.targets) {
                let r = out.model.ffnn_raw(x).unwrap() - y;
                sum += r * r;
                count += 1;
            }
        }
        let best = out.model.metadata.best_epoch - 1;
        assert!((out.train_losses[best] - sum / count as f64).abs() < 1e-10);
    }

    #[test]
    fn early_stop_keeps_best_snapshot() {
        let data = set(0..1, |_, _| 0.5);
        // a huge step overshoots after the first epoch
        let config = TrainConfig {
            learning_rate: 0.5,
            max_epochs: 50,
            patience: 1,
            ..TrainConfig::default()
        };
        let out = train(ModelKind::Ffnn, &data, &data, &config).unwrap();
        let first = train(ModelKind::Ffnn, &data, &data, &TrainConfig { max_epochs: 1, ..config.clone() })
            .unwrap();
        if out.val_losses[1] >= out.val_losses[0] {
            assert_eq!(out.model.metadata.best_epoch, 1);
            assert_eq!(out.model.layers, first.model.layers);
            assert_eq!(out.train_losses.len(), 2);
        }
    }

    #[test]
    fn gcn_training_reduces_loss() {
        let data = set(0..3, |g, v| g.degree(v) as f64 / 9.0);
        let config = TrainConfig {
            gcn_layers: 4,
            hidden: 8,
            max_epochs: 40,
            patience: 40,
            learning_rate: 1e-2,
            ..TrainConfig::default()
        };
        let out = train(ModelKind::Gcn, &data, &data, &config).unwrap();
        assert!(out.train_losses.last().unwrap() < &out.train_losses[0]);
    }

    #[test]
    fn csv_round_trip() {
        let mut data = set(0..2, |_, _| 0.25);
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("instance_id,vertex,f1,f2,f3,f4,f5,f6,f7,f8,f9,target\n"));
        let back = TrainingSet::read_csv(&buf[..]).unwrap();
        for inst in &mut data.instances {
            inst.graph = None;
        }
        assert_eq!(back, data);
        assert!(TrainingSet::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_bad_sets() {
        let data = set(0..1, |_, _| 0.5);
        let mut bad = data.clone();
        bad.instances[0].targets[0] = 1.5;
        assert!(train(ModelKind::Ffnn, &bad, &data, &TrainConfig::default()).is_err());
        assert!(train(ModelKind::Ffnn, &data, &TrainingSet::default(), &TrainConfig::default()).is_err());
        let mut no_graph = data.clone();
        no_graph.instances[0].graph = None;
        assert!(train(ModelKind::Gcn, &no_graph, &data, &TrainConfig::default()).is_err());
    }
}
