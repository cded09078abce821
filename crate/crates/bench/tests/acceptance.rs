//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

use std::collections::HashMap;
use std::time::Instant;

use ascg_bench::dataset::build_training_set;
use ascg_bench::report::geometric_mean;
use ascg_bench::verify::{run_oracle_suite, suite_instances, OracleRun};
use ascg_bench::{solve, Instance, Method, Models, Predictor, SolveOptions};
use ascg_core::colgen::{update_epsilon_adaptive, CgConfig, CgStatus, IterationRecord};
use ascg_core::graph::generate_random_graph;
use ascg_core::predict::{
    collect_labels, compute_features, instance_loss_gradient, train, InstanceData, LabelConfig,
    Model, ModelKind, TrainConfig, TrainingSet,
};
use ascg_core::pricing::{price_exact, price_heuristic};
use ascg_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE_SEED: u64 = 1;
const SUITE_GRAPHS: usize = 50;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

/// Raw adaptive penalty without the floor.
fn raw_epsilon(c: f64) -> f64 {
    update_epsilon_adaptive(c, 0.0)
}

fn labelled(id: String, g: Graph, seed: u64, targets: Vec<f64>) -> InstanceData {
    InstanceData {
        id,
        vertices: (0..g.n()).collect(),
        features: compute_features(&g, seed),
        targets,
        graph: Some(g),
    }
}

/// Briefly trained networks for the small-graph suite.
fn small_models() -> Models {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data: Vec<InstanceData> = (0..8u64)
        .map(|s| {
            let g = generate_random_graph(10, 0.4, 500 + s);
            let targets = (0..10).map(|_| rng.gen::<f64>()).collect();
            labelled(format!("t{s}"), g, s, targets)
        })
        .collect();
    let (tr, va) = data.split_at(6);
    let cfg = TrainConfig {
        max_epochs: 20,
        patience: 20,
        ..TrainConfig::default()
    };
    let mut models = Models::default();
    for kind in [ModelKind::Ffnn, ModelKind::Gcn] {
        let out = train(
            kind,
            &TrainingSet { instances: tr.to_vec() },
            &TrainingSet { instances: va.to_vec() },
            &cfg,
        )
        .expect("small training run");
        models.insert(out.model).expect("trained kinds are storable");
    }
    models
}

fn is_adaptive(m: Method) -> bool {
    matches!(m, Method::AscgMl(_))
}

fn criterion1(runs: &[OracleRun]) -> Check {
    let bad: Vec<String> = runs
        .iter()
        .filter(|r| !r.agrees())
        .map(|r| format!("{}/{}/{:?}", r.instance, r.method, r.mode))
        .collect();
    let worst = runs
        .iter()
        .map(|r| (r.result.objective - r.oracle).abs())
        .fold(0.0, f64::max);
    check(
        bad.is_empty() && runs.len() == (SUITE_GRAPHS + 3) * Method::ALL.len() * 2,
        format!("{} runs, {} mismatches, worst |z - oracle| {worst:.2e} {:?}", runs.len(), bad.len(), bad.iter().take(5).collect::<Vec<_>>()),
    )
}

fn criterion2(runs: &[OracleRun]) -> Check {
    let (mut checked, mut violations) = (0, 0);
    for r in runs.iter().filter(|r| is_adaptive(r.method)) {
        for rec in &r.result.trace {
            if let Some(l) = rec.lagrangian_gap {
                checked += 1;
                let eps = raw_epsilon(rec.reduced_cost);
                if !(eps >= 0.0 && eps <= l + 1e-7 && rec.epsilon_next <= l + 1e-7) {
                    violations += 1;
                }
            }
        }
    }
    check(checked > 0 && violations == 0, format!("{checked} adaptive iterations, {violations} violations"))
}

fn criterion3(runs: &[OracleRun], graphs: &HashMap<String, Graph>) -> Check {
    // exact-priced iterates of the adaptive runs, spread evenly
    let pool: Vec<(&str, &IterationRecord)> = runs
        .iter()
        .filter(|r| is_adaptive(r.method))
        .flat_map(|r| r.result.trace.iter().map(move |t| (r.instance.as_str(), t)))
        .filter(|(_, t)| t.lagrangian_gap.is_some() && t.duals.is_some())
        .collect();
    if pool.len() < 200 {
        return check(false, format!("only {} sampled pairs available", pool.len()));
    }
    let effort = CgConfig::default().heuristic_effort;
    let mut violations = 0;
    for k in 0..200 {
        let (id, rec) = pool[k * pool.len() / 200];
        let g = &graphs[id];
        let pi = rec.duals.as_ref().unwrap();
        let exact = price_exact(g, pi, None).expect("exact pricing").reduced_cost;
        let heur = price_heuristic(g, pi, effort, k as u64).expect("heuristic pricing").reduced_cost;
        let l = rec.lagrangian_gap.unwrap();
        let (eps_h, eps) = (raw_epsilon(heur), raw_epsilon(exact));
        if !(heur >= exact - 1e-12 && eps_h <= eps + 1e-12 && eps <= l + 1e-7) {
            violations += 1;
        }
    }
    check(violations == 0, format!("200 pairs from {} candidates, {violations} violations", pool.len()))
}

fn criterion4(runs: &[OracleRun]) -> Check {
    let converged: Vec<&OracleRun> = runs.iter().filter(|r| r.result.status == CgStatus::Converged).collect();
    let bad = converged
        .iter()
        .filter(|r| {
            let last = r.result.trace.last().expect("converged runs have iterations");
            !(last.epsilon_used == 0.0 && last.epsilon_next == 0.0 && last.pricing_proven && last.reduced_cost >= -1e-7)
        })
        .count();
    check(!converged.is_empty() && bad == 0, format!("{} converged runs, {bad} without a final proof", converged.len()))
}

fn criterion5(runs: &[OracleRun]) -> Check {
    let (mut checked, mut violations) = (0, 0);
    for r in runs {
        let z = r.result.objective;
        for rec in &r.result.trace {
            if let (Some(lb), Some(rdp)) = (rec.lagrangian_bound, rec.rdp_objective) {
                checked += 1;
                if !(lb <= z + 1e-6 && z <= rdp + 1e-6) {
                    violations += 1;
                }
            }
        }
    }
    check(checked > 0 && violations == 0, format!("{checked} exact-priced iterations, {violations} violations"))
}

/// Maximum weight independent set by subset dynamic programming.
fn brute_force_mwis(g: &Graph, w: &[f64]) -> f64 {
    let n = g.n();
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let mut weight = vec![0.0; 1 << n];
    let mut indep = vec![true; 1 << n];
    let mut best = 0.0f64;
    for mask in 1usize..1 << n {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        indep[mask] = indep[rest] && adj[v] & rest as u32 == 0;
        weight[mask] = weight[rest] + w[v];
        if indep[mask] {
            best = best.max(weight[mask]);
        }
    }
    best
}

fn criterion6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut cases, mut bad) = (0, 0);
    for n in 1..=15 {
        for (k, p) in [0.2, 0.5, 0.8].into_iter().enumerate() {
            let g = generate_random_graph(n, p, 60 + 3 * n as u64 + k as u64);
            for _ in 0..100 {
                // dyadic weights keep every subset sum exact
                let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=256) as f64 / 256.0).collect();
                let r = price_exact(&g, &w, None).expect("exact pricing");
                let got: f64 = r.column.vertices().iter().map(|&v| w[v]).sum();
                cases += 1;
                if got != brute_force_mwis(&g, &w) || !r.proven_optimal || !g.is_maximal_independent(r.column.vertices()) {
                    bad += 1;
                }
            }
        }
    }
    check(bad == 0, format!("{cases} weight vectors on 45 graphs, {bad} disagreements"))
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Plain mean of squared residuals over all examples, from forward passes.
fn oracle_mse(model: &Model, data: &[InstanceData]) -> f64 {
    let (mut total, mut count) = (0.0, 0usize);
    for inst in data {
        let raw: Vec<f64> = match model.kind {
            ModelKind::Ffnn => inst.features.iter().map(|x| model.ffnn_raw(x).unwrap()).collect(),
            _ => model.gcn_raw(inst.graph.as_ref().unwrap()).unwrap(),
        };
        for (p, y) in raw.iter().zip(&inst.targets) {
            total += (p - y) * (p - y);
            count += 1;
        }
    }
    total / count as f64
}

fn criterion7() -> Check {
    const STEP: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: HashMap<&str, f64> = HashMap::new();
    for point in 0..20u64 {
        let g = generate_random_graph(7, 0.45, 700 + point);
        let targets: Vec<f64> = (0..7).map(|_| rng.gen()).collect();
        let inst = labelled(format!("fd{point}"), g, point, targets);
        for (name, mut model) in [
            ("ffnn", Model::new_ffnn(32, 3, point).unwrap()),
            ("gcn", Model::new_gcn(8, 20, point).unwrap()),
        ] {
            let mut theta = model.parameters();
            for t in theta.iter_mut() {
                *t += rng.gen_range(-0.1..0.1);
            }
            model.set_parameters(&theta).unwrap();
            let (_, analytic) = instance_loss_gradient(&model, &inst).unwrap();
            let mut numeric = vec![0.0; theta.len()];
            for i in 0..theta.len() {
                let mut probe = model.clone();
                let mut t = theta.clone();
                t[i] = theta[i] + STEP;
                probe.set_parameters(&t).unwrap();
                let up = oracle_mse(&probe, std::slice::from_ref(&inst));
                t[i] = theta[i] - STEP;
                probe.set_parameters(&t).unwrap();
                let down = oracle_mse(&probe, std::slice::from_ref(&inst));
                numeric[i] = (up - down) / (2.0 * STEP);
            }
            let e = relative_error(&analytic, &numeric);
            let w = worst.entry(name).or_insert(0.0);
            *w = w.max(e);
        }
    }

    // trainer loss against the flat-mean oracle
    let data: Vec<InstanceData> = (0..6u64)
        .map(|s| {
            let g = generate_random_graph(9 + s as usize, 0.4, 900 + s);
            let n = g.n();
            labelled(format!("l{s}"), g, s, (0..n).map(|_| rng.gen()).collect())
        })
        .collect();
    let (tr, va) = data.split_at(4);
    let cfg = TrainConfig {
        max_epochs: 5,
        patience: 5,
        ..TrainConfig::default()
    };
    let mut loss_gap = 0.0f64;
    for kind in [ModelKind::Ffnn, ModelKind::Gcn] {
        let out = train(kind, &TrainingSet { instances: tr.to_vec() }, &TrainingSet { instances: va.to_vec() }, &cfg).unwrap();
        let reported = out.train_losses[out.model.metadata.best_epoch - 1];
        loss_gap = loss_gap.max((reported - oracle_mse(&out.model, tr)).abs());
        loss_gap = loss_gap.max((out.model.metadata.val_loss - oracle_mse(&out.model, va)).abs());
    }
    let (f, g) = (worst["ffnn"], worst["gcn"]);
    check(
        f < 1e-4 && g < 1e-4 && loss_gap <= 1e-10,
        format!("worst relative gradient error ffnn {f:.2e} gcn {g:.2e}; trainer loss vs oracle {loss_gap:.2e}"),
    )
}

fn criterion8() -> Check {
    let start = Instant::now();
    let instances: Vec<Instance> = (0..300u64)
        .map(|i| Instance::generated(60, if i % 2 == 0 { 0.3 } else { 0.5 }, 10_000 + i))
        .collect();
    let (labelled_part, test) = instances.split_at(270);
    let (train_part, val_part) = labelled_part.split_at(240);
    let (tr, train_summary) = build_training_set(train_part, &CgConfig::default(), &LabelConfig::default(), 1);
    let (va, val_summary) = build_training_set(val_part, &CgConfig::default(), &LabelConfig::default(), 1);
    let skipped = train_summary.skipped.len() + val_summary.skipped.len();
    let out = match train(ModelKind::Ffnn, &tr, &va, &TrainConfig::default()) {
        Ok(out) => out,
        Err(e) => return check(false, format!("training failed: {e}")),
    };
    let meta = out.model.metadata.clone();
    let mut models = Models::default();
    models.insert(out.model).unwrap();

    let methods = [Method::Classic, Method::ScgMl(Predictor::Ffnn), Method::AscgMl(Predictor::Ffnn)];
    let mut geo = Vec::new();
    for m in methods {
        let mut its = Vec::new();
        for inst in test {
            for seed in 1..=3 {
                match solve(inst, m, &models, seed, &SolveOptions::default()) {
                    Ok((rec, _)) if rec.status == "converged" => its.push(rec.iterations as f64),
                    Ok((rec, _)) => return check(false, format!("{} {m} seed {seed} ended {}", inst.id, rec.status)),
                    Err(e) => return check(false, format!("{} {m} seed {seed}: {e}", inst.id)),
                }
            }
        }
        geo.push(geometric_mean(its));
    }
    let (cg, scg, ascg) = (geo[0], geo[1], geo[2]);
    let reduction = 100.0 * (1.0 - ascg / cg);
    check(
        ascg < scg && scg < cg && reduction >= 10.0,
        format!(
            "geomean iterations cg {cg:.1}, scg-ffnn {scg:.1}, ascg-ffnn {ascg:.1} ({reduction:.1}% reduction); \
             {} train / {} val instances, {} skipped, best epoch {} val mse {:.5}; {:.0}s",
            tr.instances.len(),
            va.instances.len(),
            skipped,
            meta.best_epoch,
            meta.val_loss,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion9() -> Check {
    let mut worst: (f64, f64) = (0.0, 0.0);
    for seed in 1..=5 {
        let cfg = CgConfig {
            seed,
            ..CgConfig::default()
        };
        match collect_labels(&Graph::path(3), &cfg) {
            Ok(l) => {
                worst.0 = worst.0.max((l.targets[1] - 1.0).abs());
                worst.1 = worst.1.max((l.targets[0] + l.targets[2] - 1.0).abs());
            }
            Err(e) => return check(false, format!("seed {seed}: {e}")),
        }
    }
    check(
        worst.0 <= 1e-6 && worst.1 <= 1e-3,
        format!("seeds 1..5: |y1 - 1| <= {:.1e}, |y0 + y2 - 1| <= {:.1e}", worst.0, worst.1),
    )
}

/// Trace fields that must reproduce exactly.
fn fingerprint(r: &OracleRun) -> (usize, u64, Vec<[u64; 6]>, Vec<Option<Vec<u64>>>) {
    let bits = |x: Option<f64>| x.map_or(u64::MAX, f64::to_bits);
    (
        r.result.iterations,
        r.result.objective.to_bits(),
        r.result
            .trace
            .iter()
            .map(|t| {
                [
                    t.objective.to_bits(),
                    t.reduced_cost.to_bits(),
                    t.epsilon_used.to_bits(),
                    t.epsilon_next.to_bits(),
                    bits(t.lagrangian_bound),
                    u64::from(t.column_added) << 1 | u64::from(t.pricing_proven),
                ]
            })
            .collect(),
        r.result
            .trace
            .iter()
            .map(|t| t.duals.as_ref().map(|d| d.iter().map(|x| x.to_bits()).collect()))
            .collect(),
    )
}

fn criterion10(first: &[OracleRun], instances: &[Instance], models: &Models) -> Check {
    let second = match run_oracle_suite(instances, &Method::ALL, models, SUITE_SEED, true) {
        Ok(r) => r,
        Err(e) => return check(false, format!("second run failed: {e}")),
    };
    let differing = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a.instance != b.instance || a.method != b.method || fingerprint(a) != fingerprint(b))
        .count();
    check(
        first.len() == second.len() && differing == 0,
        format!("{} runs repeated, {differing} differ", second.len()),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Check)> = Vec::new();
    let mut report = |id: u32, name: &'static str, c: Check| {
        println!("criterion {id:>2} {} {name}: {}", if c.pass { "PASS" } else { "FAIL" }, c.detail);
        results.push((id, name, c));
    };

    let instances = suite_instances(SUITE_GRAPHS, SUITE_SEED);
    let graphs: HashMap<String, Graph> = instances.iter().map(|i| (i.id.clone(), i.graph.clone())).collect();
    let models = small_models();
    let suite = run_oracle_suite(&instances, &Method::ALL, &models, SUITE_SEED, true);
    match &suite {
        Ok(runs) => {
            report(1, "oracle equivalence", criterion1(runs));
            report(2, "adaptive penalty within the Lagrangian gap", criterion2(runs));
            report(3, "heuristic pricing is conservative", criterion3(runs, &graphs));
            report(4, "termination at zero penalty with a proof", criterion4(runs));
            report(5, "Lagrangian sandwich", criterion5(runs));
        }
        Err(e) => {
            for (id, name) in [(1, "oracle equivalence"), (2, "adaptive penalty"), (3, "heuristic pricing"), (4, "termination"), (5, "sandwich")] {
                report(id, name, check(false, format!("suite failed: {e}")));
            }
        }
    }
    report(6, "exact pricing against enumeration", criterion6());
    report(7, "gradients and trainer loss", criterion7());
    report(8, "directional speedup at n = 60", criterion8());
    report(9, "degenerate path labels", criterion9());
    match &suite {
        Ok(runs) => report(10, "determinism", criterion10(runs, &instances, &models)),
        Err(e) => report(10, "determinism", check(false, format!("suite failed: {e}"))),
    }

    let failed = results.iter().filter(|(.., c)| !c.pass).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
