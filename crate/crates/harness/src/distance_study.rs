//! Pairwise distance matrices of random trees and their correlations.

use std::path::Path;

use anyhow::Result;
use gpsmbo_core::distance::{distance_matrix, DistanceMatrix, Measure};
use gpsmbo_core::expr::{ramped_half_and_half, ExprTree, GeneratorParams};
use gpsmbo_core::{math, ProblemInstance};
use rand::Rng;

use crate::io::{csv_writer, fmt_g9};

/// Matrix order in the study and its files.
pub const MEASURES: [Measure; 4] = [Measure::Phd, Measure::Ted, Measure::Shd1, Measure::Shd2];

#[derive(Clone, Debug)]
pub struct DistanceStudy {
    /// Sorted by depth, then node count.
    pub trees: Vec<ExprTree>,
    pub matrices: Vec<DistanceMatrix>,
    /// Pearson correlation of lower triangles for every pair of measures.
    pub correlations: Vec<(Measure, Measure, f64)>,
}

impl DistanceStudy {
    pub fn matrix(&self, m: Measure) -> &DistanceMatrix {
        self.matrices.iter().find(|d| d.measure() == m).expect("all measures are computed")
    }

    /// Correlation between two measures, in either order.
    pub fn correlation(&self, a: Measure, b: Measure) -> f64 {
        self.correlations
            .iter()
            .find(|(x, y, _)| (*x == a && *y == b) || (*x == b && *y == a))
            .map(|c| c.2)
            .expect("all pairs are computed")
    }
}

pub fn distance_study<R: Rng + ?Sized>(
    n: usize,
    generator: &GeneratorParams,
    problem: &ProblemInstance,
    rng: &mut R,
) -> DistanceStudy {
    assert!(n >= 3, "need at least 3 trees");
    let mut trees: Vec<ExprTree> = (0..n).map(|_| ramped_half_and_half(&problem.spec.ops, generator, rng)).collect();
    trees.sort_by_key(|t| (t.depth(), t.node_count()));
    let matrices: Vec<DistanceMatrix> = MEASURES.iter().map(|&m| distance_matrix(&trees, m, &problem.data.x)).collect();
    let tri: Vec<Vec<f64>> = matrices.iter().map(|m| m.lower_triangle()).collect();
    let mut correlations = Vec::new();
    for i in 0..MEASURES.len() {
        for j in i + 1..MEASURES.len() {
            let r = math::pearson(&tri[i], &tri[j]).unwrap_or(f64::NAN);
            correlations.push((MEASURES[i], MEASURES[j], r));
        }
    }
    DistanceStudy { trees, matrices, correlations }
}

/// Writes `trees.csv`, one `<measure>.csv` matrix per measure (header row and
/// first column hold the s-expressions) and `correlations.csv`.
pub fn write_distance_study(dir: &Path, study: &DistanceStudy) -> Result<()> {
    let mut w = csv_writer(&dir.join("trees.csv"))?;
    w.write_record(["index", "depth", "nodes", "tree_sexpr"])?;
    for (i, t) in study.trees.iter().enumerate() {
        w.write_record([(i + 1).to_string(), t.depth().to_string(), t.node_count().to_string(), t.to_string()])?;
    }
    w.flush()?;

    let names: Vec<String> = study.trees.iter().map(|t| t.to_string()).collect();
    for m in &study.matrices {
        let mut w = csv_writer(&dir.join(format!("{}.csv", m.measure().name())))?;
        let mut header = vec!["tree".to_string()];
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        for (i, name) in names.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend(m.row(i).iter().map(|v| fmt_g9(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
    }

    let mut w = csv_writer(&dir.join("correlations.csv"))?;
    w.write_record(["a", "b", "pearson"])?;
    for (a, b, r) in &study.correlations {
        w.write_record([a.name(), b.name(), &fmt_g9(*r)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sorted_and_complete() {
        let p = ProblemInstance::builtin("sqr").unwrap();
        let s = distance_study(30, &GeneratorParams::default(), &p, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(s.trees.len(), 30);
        assert!(s.trees.windows(2).all(|w| (w[0].depth(), w[0].node_count()) <= (w[1].depth(), w[1].node_count())));
        assert_eq!(s.matrices.len(), 4);
        assert_eq!(s.correlations.len(), 6);
        for m in &s.matrices {
            assert!(m.is_symmetric());
        }
        let dir = tempfile::tempdir().unwrap();
        write_distance_study(dir.path(), &s).unwrap();
        let (h, rows) = crate::io::read_table(&dir.path().join("ted.csv")).unwrap();
        assert_eq!(h.len(), 31);
        assert_eq!(rows.len(), 30);
        assert_eq!(h[1], rows[0][0]);
    }
}
