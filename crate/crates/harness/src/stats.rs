//! Kruskal-Wallis tests over result tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use gpsmbo_core::math;
use gpsmbo_core::stats::{kruskal_wallis, KruskalWallis};

use crate::io::{column, fmt_g9, parse_f64, read_table};

#[derive(Clone, Debug)]
pub struct GroupTest {
    pub problem: String,
    /// Group name and its per-run values, in first-seen order.
    pub groups: Vec<(String, Vec<f64>)>,
    pub result: Option<KruskalWallis>,
}

/// Per-run values from `evaluations.csv` (best-so-far at the checkpoint,
/// default the last evaluation) or `boxplot.csv` (default the largest
/// checkpoint), grouped by problem and then by `groupby`.
pub fn grouped_values(path: &Path, groupby: &str, checkpoint: Option<usize>) -> Result<Vec<(String, Vec<(String, Vec<f64>)>)>> {
    let (h, rows) = read_table(path)?;
    let problem_col = h.iter().position(|c| c == "problem");
    let g = column(&h, groupby)?;
    // Key: (problem, group, run id) → (position, value).
    let mut per_run: Vec<(String, String, String, usize, f64)> = Vec::new();
    if h.iter().any(|c| c == "best_so_far") {
        let (ci, cb) = (column(&h, "eval_idx")?, column(&h, "best_so_far")?);
        let cr = column(&h, "rep")?;
        let cs = h.iter().position(|c| c == "strategy");
        let mut latest: BTreeMap<(String, String, String), (usize, f64, usize)> = BTreeMap::new();
        for row in &rows {
            let idx: usize = row[ci].parse()?;
            if checkpoint.is_some_and(|cp| idx > cp) {
                continue;
            }
            let problem = problem_col.map_or(String::new(), |c| row[c].clone());
            let run = format!("{}/{}", cs.map_or("", |c| row[c].as_str()), row[cr]);
            let order = latest.len();
            let e = latest.entry((problem, row[g].clone(), run)).or_insert((0, f64::NAN, order));
            if idx >= e.0 {
                e.0 = idx;
                e.1 = parse_f64(&row[cb])?;
            }
        }
        for ((p, grp, run), (_, v, order)) in latest {
            per_run.push((p, grp, run, order, v));
        }
    } else if h.iter().any(|c| c == "best") {
        let (cc, cb, cr) = (column(&h, "checkpoint")?, column(&h, "best")?, column(&h, "run")?);
        let cp = match checkpoint {
            Some(cp) => cp,
            None => rows.iter().map(|r| r[cc].parse::<usize>()).collect::<Result<Vec<_>, _>>()?.into_iter().max().unwrap_or(0),
        };
        for (order, row) in rows.iter().enumerate() {
            if row[cc].parse::<usize>()? != cp {
                continue;
            }
            let problem = problem_col.map_or(String::new(), |c| row[c].clone());
            per_run.push((problem, row[g].clone(), row[cr].clone(), order, parse_f64(&row[cb])?));
        }
    } else {
        bail!("expected a `best_so_far` or `best` column");
    }
    per_run.sort_by_key(|r| r.3);

    let mut out: Vec<(String, Vec<(String, Vec<f64>)>)> = Vec::new();
    for (problem, group, _, _, v) in per_run {
        let pi = match out.iter().position(|(p, _)| *p == problem) {
            Some(i) => i,
            None => {
                out.push((problem, Vec::new()));
                out.len() - 1
            }
        };
        let groups = &mut out[pi].1;
        match groups.iter_mut().find(|(g, _)| *g == group) {
            Some((_, vals)) => vals.push(v),
            None => groups.push((group, vec![v])),
        }
    }
    Ok(out)
}

pub fn kruskal_by_problem(path: &Path, groupby: &str, checkpoint: Option<usize>) -> Result<Vec<GroupTest>> {
    Ok(grouped_values(path, groupby, checkpoint)?
        .into_iter()
        .map(|(problem, groups)| {
            let samples: Vec<&[f64]> = groups.iter().map(|g| g.1.as_slice()).collect();
            let result = kruskal_wallis(&samples).ok();
            GroupTest { problem, groups, result }
        })
        .collect())
}

pub fn format_report(tests: &[GroupTest]) -> String {
    let mut s = String::new();
    for t in tests {
        let name = if t.problem.is_empty() { "(all)" } else { &t.problem };
        let _ = writeln!(s, "{name}");
        for (g, v) in &t.groups {
            let _ = writeln!(s, "  {g}: n={} median={}", v.len(), fmt_g9(math::median(v)));
        }
        match &t.result {
            Some(kw) => {
                let _ = writeln!(s, "  Kruskal-Wallis H={} df={} p={}", fmt_g9(kw.h), kw.df, fmt_g9(kw.p_value));
            }
            None => {
                let _ = writeln!(s, "  Kruskal-Wallis not applicable (need at least 2 nonempty groups)");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_boxplot_table() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        std::fs::write(
            &p,
            "problem,strategy,checkpoint,run,best\n\
             sqr,a,50,0,9\nsqr,a,100,0,1\nsqr,a,100,1,2\nsqr,a,100,2,3\n\
             sqr,b,100,0,4\nsqr,b,100,1,5\nsqr,b,100,2,6\n\
             sqr,c,100,0,7\nsqr,c,100,1,8\nsqr,c,100,2,9\n",
        )
        .unwrap();
        let t = kruskal_by_problem(&p, "strategy", None).unwrap();
        assert_eq!(t.len(), 1);
        let kw = t[0].result.unwrap();
        assert!((kw.h - 7.2).abs() < 1e-12);
        assert!(format_report(&t).contains("H=7.2 df=2"));
    }

    #[test]
    fn from_evaluation_log() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        let mut text = String::from("problem,strategy,rep,eval_idx,best_so_far\n");
        for (s, vals) in [("x", [3.0, 1.0]), ("y", [5.0, 4.0])] {
            for rep in 0..2 {
                text += &format!("p,{s},{rep},1,{}\np,{s},{rep},2,{}\n", vals[rep] + 1.0, vals[rep]);
            }
        }
        std::fs::write(&p, text).unwrap();
        let g = grouped_values(&p, "strategy", None).unwrap();
        assert_eq!(g[0].1, vec![("x".to_string(), vec![3.0, 1.0]), ("y".to_string(), vec![5.0, 4.0])]);
        let g = grouped_values(&p, "strategy", Some(1)).unwrap();
        assert_eq!(g[0].1[0].1, vec![4.0, 2.0]);
    }
}
