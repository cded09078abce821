use crate::error::{BenchError, Result};

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Top eigenpair of the symmetric matrix `c` by power iteration.
fn dominant(c: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let d = c.len();
    // fixed, irregular start so no eigenvector is systematically missed
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_75).fract()).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut lambda = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let mut w: Vec<f64> = c.iter().map(|row| dot(row, &v)).collect();
        let norm = dot(&w, &w).sqrt();
        if norm == 0.0 {
            return (0.0, v);
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let change = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        lambda = norm;
        if change < TOLERANCE {
            break;
        }
    }
    (lambda, v)
}

/// Principal-component coordinates of each snapshot (rows of `snapshots`).
/// Identical snapshots give all-zero coordinates.
pub fn project_trajectory(snapshots: &[Vec<f64>], components: usize) -> Result<Vec<Vec<f64>>> {
    if snapshots.len() < 2 {
        return Err(BenchError::Usage("projection needs at least two snapshots".into()));
    }
    let d = snapshots[0].len();
    if snapshots.iter().any(|s| s.len() != d) {
        return Err(BenchError::Usage("snapshots differ in length".into()));
    }
    let rows = snapshots.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| snapshots.iter().map(|s| s[j]).sum::<f64>() / rows).collect();
    let centered: Vec<Vec<f64>> = snapshots
        .iter()
        .map(|s| s.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for row in &centered {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += row[i] * row[j];
            }
        }
    }
    let scale = cov.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        log::warn!("all snapshots identical; projection is zero");
        return Ok(vec![vec![0.0; components]; snapshots.len()]);
    }
    let mut coords = vec![Vec::with_capacity(components); snapshots.len()];
    for _ in 0..components {
        let (lambda, v) = dominant(&cov);
        let keep = lambda > scale * 1e-12;
        for (c, row) in coords.iter_mut().zip(&centered) {
            c.push(if keep { dot(row, &v) } else { 0.0 });
        }
        for i in 0..d {
            for j in 0..d {
                cov[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    Ok(coords)
}

pub fn coordinates_csv(coords: &[Vec<f64>]) -> String {
    let width = coords.first().map_or(0, Vec::len);
    let mut out = String::from("iter");
    for k in 1..=width {
        out.push_str(&format!(",pc{k}"));
    }
    out.push('\n');
    for (i, c) in coords.iter().enumerate() {
        out.push_str(&(i + 1).to_string());
        for x in c {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_snapshots() {
        let coords = project_trajectory(&vec![vec![0.5, 0.2]; 4], 2).unwrap();
        assert!(coords.iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn collinear_snapshots() {
        let snaps: Vec<Vec<f64>> = (0..6).map(|t| vec![t as f64, 2.0 * t as f64, 1.0]).collect();
        let coords = project_trajectory(&snaps, 2).unwrap();
        assert!(coords.iter().all(|c| c[1].abs() < 1e-8));
        assert!(coordinates_csv(&coords).starts_with("iter,pc1,pc2\n1,"));
    }

    #[test]
    fn too_few_snapshots() {
        assert!(project_trajectory(&[vec![1.0]], 2).is_err());
    }
}
