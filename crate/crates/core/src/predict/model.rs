use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, NUM_FEATURES};
use super::predict_degree_baseline;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lp::DualVector;

/// Width of the per-vertex GCN input: normalized degree, density, constant 1.
pub const GCN_INPUT_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ffnn,
    Gcn,
    #[serde(rename = "degree")]
    DegreeBaseline,
}

/// Dense map `y = W x + b`; `weights` is `output × input`, row-major. GCN
/// propagation layers carry no bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub input: usize,
    pub output: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn init(input: usize, output: usize, bias: bool, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let a = scale * (6.0 / (input + output) as f64).sqrt();
        Self {
            input,
            output,
            weights: (0..input * output).map(|_| rng.gen_range(-a..a)).collect(),
            bias: if bias { vec![0.0; output] } else { Vec::new() },
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            input: self.input,
            output: self.output,
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.bias.len()],
        }
    }

    /// `out = W x (+ b)`.
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.weights.chunks_exact(self.input)) {
            *o = row.iter().zip(x).map(|(w, v)| w * v).sum();
        }
        for (o, b) in out.iter_mut().zip(&self.bias) {
            *o += b;
        }
    }

    /// Accumulates `dW += g xᵀ`, `db += g` and returns nothing; `dx` gets `Wᵀ g`.
    fn backward(&self, x: &[f64], g: &[f64], grad: &mut Layer, dx: Option<&mut [f64]>) {
        for (k, gk) in g.iter().enumerate() {
            if *gk == 0.0 {
                continue;
            }
            let row = &mut grad.weights[k * self.input..(k + 1) * self.input];
            for (r, v) in row.iter_mut().zip(x) {
                *r += gk * v;
            }
            if let Some(b) = grad.bias.get_mut(k) {
                *b += gk;
            }
        }
        if let Some(dx) = dx {
            dx.iter_mut().for_each(|d| *d = 0.0);
            for (k, gk) in g.iter().enumerate() {
                if *gk == 0.0 {
                    continue;
                }
                let row = &self.weights[k * self.input..(k + 1) * self.input];
                for (d, w) in dx.iter_mut().zip(row) {
                    *d += gk * w;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub epochs: usize,
    pub best_epoch: usize,
    pub val_loss: f64,
    pub train_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    /// Widths from input to the scalar output.
    pub dims: Vec<usize>,
    pub layers: Vec<Layer>,
    pub normalization: String,
    pub metadata: ModelMetadata,
}

/// Parameter gradients laid out like `Model::layers`.
pub type Gradient = Vec<Layer>;

/// Symmetric normalized adjacency with self loops, as per-row `(j, weight)`.
pub(crate) fn propagation(g: &Graph) -> Vec<Vec<(usize, f64)>> {
    let inv_sqrt: Vec<f64> = (0..g.n()).map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt()).collect();
    (0..g.n())
        .map(|i| {
            let mut row: Vec<(usize, f64)> = g
                .neighbors(i)
                .iter()
                .map(|&j| (j, inv_sqrt[i] * inv_sqrt[j]))
                .collect();
            row.push((i, inv_sqrt[i] * inv_sqrt[i]));
            row.sort_by_key(|&(j, _)| j);
            row
        })
        .collect()
}

fn propagate(p: &[Vec<(usize, f64)>], h: &[f64], width: usize) -> Vec<f64> {
    let mut out = vec![0.0; h.len()];
    for (i, row) in p.iter().enumerate() {
        let dst = &mut out[i * width..(i + 1) * width];
        for &(j, w) in row {
            for (d, s) in dst.iter_mut().zip(&h[j * width..(j + 1) * width]) {
                *d += w * s;
            }
        }
    }
    out
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

fn clip01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// GCN input rows `(degree / max_degree, density, 1)`.
pub fn gcn_inputs(g: &Graph) -> Vec<[f64; GCN_INPUT_WIDTH]> {
    let max = g.max_degree().max(1) as f64;
    (0..g.n())
        .map(|v| [g.degree(v) as f64 / max, g.density(), 1.0])
        .collect()
}

struct GcnCache {
    /// `P H` per propagation layer (input side).
    mixed: Vec<Vec<f64>>,
    /// Pre-activations per propagation layer.
    pre: Vec<Vec<f64>>,
    /// Output of the last propagation layer.
    last: Vec<f64>,
}

impl Model {
    pub fn new_ffnn(hidden: usize, num_layers: usize, seed: u64) -> Result<Self> {
        if num_layers < 1 || hidden < 1 {
            return Err(Error::Model("FFNN needs at least one layer and width".into()));
        }
        let mut dims = vec![NUM_FEATURES];
        dims.extend(std::iter::repeat(hidden).take(num_layers - 1));
        dims.push(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|w| Layer::init(w[0], w[1], true, 1.0, &mut rng))
            .collect();
        Ok(Self {
            kind: ModelKind::Ffnn,
            dims,
            layers,
            normalization: "features min-max scaled per instance".into(),
            metadata: ModelMetadata {
                seed,
                ..Default::default()
            },
        })
    }

    /// `num_layers` propagation layers of width `hidden`, then a linear head.
    pub fn new_gcn(hidden: usize, num_layers: usize, seed: u64) -> Result<Self> {
        if num_layers < 1 || hidden < 1 {
            return Err(Error::Model("GCN needs at least one layer and width".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![GCN_INPUT_WIDTH];
        let mut layers = vec![Layer::init(GCN_INPUT_WIDTH, hidden, false, 1.0, &mut rng)];
        dims.push(hidden);
        // residual layers start small so depth does not blow activations up
        let scale = 1.0 / num_layers as f64;
        for _ in 1..num_layers {
            layers.push(Layer::init(hidden, hidden, false, scale, &mut rng));
            dims.push(hidden);
        }
        layers.push(Layer::init(hidden, 1, true, 1.0, &mut rng));
        dims.push(1);
        Ok(Self {
            kind: ModelKind::Gcn,
            dims,
            layers,
            normalization: "inputs (degree/max degree, density, 1)".into(),
            metadata: ModelMetadata {
                seed,
                ..Default::default()
            },
        })
    }

    pub fn degree_baseline() -> Self {
        Self {
            kind: ModelKind::DegreeBaseline,
            dims: Vec::new(),
            layers: Vec::new(),
            normalization: "degree / max degree".into(),
            metadata: ModelMetadata::default(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn zero_gradient(&self) -> Gradient {
        self.layers.iter().map(Layer::zeros_like).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ModelKind::DegreeBaseline {
            return Ok(());
        }
        if self.dims.len() != self.layers.len() + 1 || self.dims.last() != Some(&1) {
            return Err(Error::Model(format!("dims {:?} do not fit {} layers", self.dims, self.layers.len())));
        }
        let first = match self.kind {
            ModelKind::Ffnn => NUM_FEATURES,
            _ => GCN_INPUT_WIDTH,
        };
        if self.dims[0] != first {
            return Err(Error::Model(format!("input width {} != {first}", self.dims[0])));
        }
        for (i, l) in self.layers.iter().enumerate() {
            let bias_ok = match self.kind {
                ModelKind::Gcn if i + 1 < self.layers.len() => l.bias.is_empty(),
                _ => l.bias.len() == l.output,
            };
            if l.input != self.dims[i] || l.output != self.dims[i + 1] || l.weights.len() != l.input * l.output || !bias_ok {
                return Err(Error::Model(format!("layer {i} has inconsistent shape")));
            }
        }
        Ok(())
    }

    fn expect(&self, kind: ModelKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Model(format!("expected a {kind:?} model, got {:?}", self.kind)));
        }
        Ok(())
    }

    /// Unclipped FFNN output.
    pub fn ffnn_raw(&self, x: &FeatureVector) -> Result<f64> {
        self.expect(ModelKind::Ffnn)?;
        let mut a = x.0.to_vec();
        if a.len() != self.dims[0] {
            return Err(Error::DimensionMismatch {
                expected: self.dims[0],
                actual: a.len(),
                context: "FFNN input",
            });
        }
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.output];
            layer.apply(&a, &mut z);
            if i < last {
                z.iter_mut().for_each(|v| *v = relu(*v));
            }
            a = z;
        }
        Ok(a[0])
    }

    /// FFNN prediction clipped into `[0, 1]`.
    pub fn ffnn_forward(&self, x: &FeatureVector) -> Result<f64> {
        self.ffnn_raw(x).map(clip01)
    }

    /// Sum over the examples of `scale · (f(x) - y)²`, accumulating its gradient.
    pub(crate) fn ffnn_accumulate(
        &self,
        xs: &[FeatureVector],
        ys: &[f64],
        scale: f64,
        grad: &mut Gradient,
    ) -> f64 {
        let last = self.layers.len() - 1;
        let mut loss = 0.0;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        for (x, y) in xs.iter().zip(ys) {
            acts.clear();
            acts.push(x.0.to_vec());
            for (i, layer) in self.layers.iter().enumerate() {
                let mut z = vec![0.0; layer.output];
                layer.apply(&acts[i], &mut z);
                if i < last {
                    z.iter_mut().for_each(|v| *v = relu(*v));
                }
                acts.push(z);
            }
            let r = acts[last + 1][0] - y;
            loss += scale * r * r;
            let mut g = vec![2.0 * scale * r];
            for i in (0..=last).rev() {
                let layer = &self.layers[i];
                if i == 0 {
                    layer.backward(&acts[0], &g, &mut grad[0], None);
                    break;
                }
                let mut dx = vec![0.0; layer.input];
                layer.backward(&acts[i], &g, &mut grad[i], Some(&mut dx));
                // acts[i] is a ReLU output; zero means the unit was inactive
                for (d, a) in dx.iter_mut().zip(&acts[i]) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
                g = dx;
            }
        }
        loss
    }

    fn gcn_run(&self, p: &[Vec<(usize, f64)>], h0: &[[f64; GCN_INPUT_WIDTH]]) -> Result<(Vec<f64>, GcnCache)> {
        self.expect(ModelKind::Gcn)?;
        if self.dims[0] != GCN_INPUT_WIDTH {
            return Err(Error::DimensionMismatch {
                expected: GCN_INPUT_WIDTH,
                actual: self.dims[0],
                context: "GCN input",
            });
        }
        let n = h0.len();
        let mut h: Vec<f64> = h0.iter().flatten().copied().collect();
        let mut width = GCN_INPUT_WIDTH;
        let props = &self.layers[..self.layers.len() - 1];
        let mut cache = GcnCache {
            mixed: Vec::with_capacity(props.len()),
            pre: Vec::with_capacity(props.len()),
            last: Vec::new(),
        };
        for (l, layer) in props.iter().enumerate() {
            let mixed = propagate(p, &h, width);
            let mut z = vec![0.0; n * layer.output];
            for i in 0..n {
                layer.apply(&mixed[i * width..(i + 1) * width], &mut z[i * layer.output..(i + 1) * layer.output]);
            }
            if l > 0 {
                for (zv, hv) in z.iter_mut().zip(&h) {
                    *zv += hv;
                }
            }
            h = z.iter().map(|v| relu(*v)).collect();
            width = layer.output;
            cache.mixed.push(mixed);
            cache.pre.push(z);
        }
        let head = self.layers.last().expect("GCN has a head");
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut o = [0.0];
            head.apply(&h[i * width..(i + 1) * width], &mut o);
            out[i] = o[0];
        }
        cache.last = h;
        Ok((out, cache))
    }

    /// Unclipped per-vertex GCN outputs.
    pub fn gcn_raw(&self, g: &Graph) -> Result<Vec<f64>> {
        self.gcn_raw_with(g, &gcn_inputs(g))
    }

    pub fn gcn_raw_with(&self, g: &Graph, h0: &[[f64; GCN_INPUT_WIDTH]]) -> Result<Vec<f64>> {
        if h0.len() != g.n() {
            return Err(Error::DimensionMismatch {
                expected: g.n(),
                actual: h0.len(),
                context: "GCN input rows",
            });
        }
        Ok(self.gcn_run(&propagation(g), h0)?.0)
    }

    /// GCN predictions clipped into `[0, 1]`.
    pub fn gcn_forward(&self, g: &Graph, h0: &[[f64; GCN_INPUT_WIDTH]]) -> Result<DualVector<f64>> {
        Ok(DualVector::new(self.gcn_raw_with(g, h0)?.into_iter().map(clip01).collect()))
    }

    /// As [`Model::ffnn_accumulate`] for one graph.
    pub(crate) fn gcn_accumulate(
        &self,
        p: &[Vec<(usize, f64)>],
        h0: &[[f64; GCN_INPUT_WIDTH]],
        ys: &[f64],
        scale: f64,
        grad: &mut Gradient,
    ) -> Result<f64> {
        let (out, cache) = self.gcn_run(p, h0)?;
        let n = out.len();
        let props = self.layers.len() - 1;
        let head = &self.layers[props];
        let width = head.input;
        let mut loss = 0.0;
        let mut dh = vec![0.0; n * width];
        for i in 0..n {
            let r = out[i] - ys[i];
            loss += scale * r * r;
            let g = [2.0 * scale * r];
            head.backward(&cache.last[i * width..(i + 1) * width], &g, &mut grad[props], Some(&mut dh[i * width..(i + 1) * width]));
        }
        for l in (0..props).rev() {
            let layer = &self.layers[l];
            let dz: Vec<f64> = dh
                .iter()
                .zip(&cache.pre[l])
                .map(|(d, z)| if *z > 0.0 { *d } else { 0.0 })
                .collect();
            let (win, wout) = (layer.input, layer.output);
            if l == 0 {
                for i in 0..n {
                    layer.backward(&cache.mixed[0][i * win..(i + 1) * win], &dz[i * wout..(i + 1) * wout], &mut grad[0], None);
                }
                break;
            }
            let mut dmixed = vec![0.0; n * win];
            for i in 0..n {
                layer.backward(
                    &cache.mixed[l][i * win..(i + 1) * win],
                    &dz[i * wout..(i + 1) * wout],
                    &mut grad[l],
                    Some(&mut dmixed[i * win..(i + 1) * win]),
                );
            }
            // P is symmetric, so the backward mix reuses it; plus the residual path
            let mut next = propagate(p, &dmixed, win);
            for (nv, d) in next.iter_mut().zip(&dz) {
                *nv += d;
            }
            dh = next;
        }
        Ok(loss)
    }

    /// Clipped per-vertex predictions. FFNN models need `features`.
    pub fn predict(&self, g: &Graph, features: Option<&[FeatureVector]>) -> Result<DualVector<f64>> {
        match self.kind {
            ModelKind::DegreeBaseline => Ok(predict_degree_baseline(g)),
            ModelKind::Gcn => self.gcn_forward(g, &gcn_inputs(g)),
            ModelKind::Ffnn => {
                let features = features.ok_or_else(|| Error::Model("FFNN prediction needs features".into()))?;
                if features.len() != g.n() {
                    return Err(Error::DimensionMismatch {
                        expected: g.n(),
                        actual: features.len(),
                        context: "feature rows",
                    });
                }
                features
                    .iter()
                    .map(|x| self.ffnn_forward(x))
                    .collect::<Result<Vec<_>>>()
                    .map(DualVector::new)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Model = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Every weight then bias, layer by layer.
    pub fn parameters(&self) -> Vec<f64> {
        self.params().copied().collect()
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                actual: values.len(),
                context: "model parameters",
            });
        }
        for (p, v) in self.params_mut().zip(values) {
            *p = *v;
        }
        Ok(())
    }

    pub(crate) fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub(crate) fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }
}

pub(crate) fn flatten(grad: &Gradient) -> Vec<f64> {
    grad.iter()
        .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
        .collect()
}
