use std::path::Path;

use ascg_core::colgen::CgConfig;
use ascg_core::predict::{collect_labels_with, compute_features, InstanceData, LabelConfig, TrainingSet};
use rayon::prelude::*;

use crate::error::{BenchError, Result};
use crate::runner::Instance;

#[derive(Debug, Clone, Default)]
pub struct DatasetSummary {
    pub written: Vec<String>,
    /// `(instance, reason)` for every instance left out.
    pub skipped: Vec<(String, String)>,
}

/// Features and averaged labels for each instance, computed in parallel.
/// Instances whose labels cannot be collected are skipped with a warning.
/// Graphs are attached so the set can also train a GCN.
pub fn build_training_set(
    instances: &[Instance],
    config: &CgConfig,
    labels: &LabelConfig,
    seed: u64,
) -> (TrainingSet, DatasetSummary) {
    let results: Vec<std::result::Result<InstanceData, String>> = instances
        .par_iter()
        .map(|inst| {
            let g = &inst.graph;
            let cg = CgConfig {
                seed,
                ..config.clone()
            };
            let l = collect_labels_with(g, &cg, labels).map_err(|e| e.to_string())?;
            Ok(InstanceData {
                id: inst.id.clone(),
                vertices: (0..g.n()).collect(),
                features: compute_features(g, seed),
                targets: l.targets,
                graph: Some(g.clone()),
            })
        })
        .collect();
    let mut set = TrainingSet::default();
    let mut summary = DatasetSummary::default();
    for (inst, r) in instances.iter().zip(results) {
        match r {
            Ok(data) => {
                summary.written.push(inst.id.clone());
                set.instances.push(data);
            }
            Err(reason) => {
                log::warn!("skipping {}: {reason}", inst.id);
                summary.skipped.push((inst.id.clone(), reason));
            }
        }
    }
    (set, summary)
}

/// As [`build_training_set`], then writes the CSV atomically: rows go to a
/// temporary file beside `out` that is renamed into place on success.
pub fn collect_dataset(
    instances: &[Instance],
    config: &CgConfig,
    labels: &LabelConfig,
    seed: u64,
    out: &Path,
) -> Result<(TrainingSet, DatasetSummary)> {
    let (set, summary) = build_training_set(instances, config, labels, seed);
    let name = out
        .file_name()
        .ok_or_else(|| BenchError::Usage(format!("{} is not a file path", out.display())))?;
    let tmp = out.with_file_name(format!(".{}.partial", name.to_string_lossy()));
    let written = std::fs::File::create(&tmp)
        .map_err(BenchError::from)
        .and_then(|f| {
            let mut w = std::io::BufWriter::new(f);
            set.write_csv(&mut w)?;
            std::io::Write::flush(&mut w)?;
            Ok(())
        })
        .and_then(|_| std::fs::rename(&tmp, out).map_err(BenchError::from));
    if let Err(e) = written {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    Ok((set, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ascg_core::Graph;

    #[test]
    fn triangle_rows() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("data.csv");
        let k3 = Instance {
            id: "k3".into(),
            graph: Graph::complete(3),
        };
        let (set, summary) =
            collect_dataset(&[k3], &CgConfig::default(), &LabelConfig::default(), 1, &out).unwrap();
        assert_eq!(summary.written, vec!["k3".to_string()]);
        assert_eq!(set.instances[0].targets, vec![1.0; 3]);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(!dir.path().join(".data.csv.partial").exists());
    }

    #[test]
    fn empty_list_writes_header() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("empty.csv");
        collect_dataset(&[], &CgConfig::default(), &LabelConfig::default(), 1, &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.trim(), "instance_id,vertex,f1,f2,f3,f4,f5,f6,f7,f8,f9,target");
    }

    #[test]
    fn unsolvable_instance_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("d.csv");
        let cfg = CgConfig {
            max_iterations: 1,
            ..CgConfig::default()
        };
        let hard = Instance::generated(15, 0.5, 1);
        let easy = Instance {
            id: "k3".into(),
            graph: Graph::complete(3),
        };
        let (_, summary) = collect_dataset(&[hard, easy], &cfg, &LabelConfig::default(), 1, &out).unwrap();
        assert_eq!(summary.written, vec!["k3".to_string()]);
        assert_eq!(summary.skipped.len(), 1);
    }
}
