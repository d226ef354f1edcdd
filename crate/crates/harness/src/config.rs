//! Experiment configuration files.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gpsmbo_core::problem::{BuiltinTarget, ProblemInstance, ProblemSpec};
use gpsmbo_core::{SearchBudget, Strategy};
use serde::{Deserialize, Serialize};

/// A problem by built-in name or as a full specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemEntry {
    Name(String),
    Spec(ProblemSpec),
}

impl ProblemEntry {
    pub fn spec(&self) -> Result<ProblemSpec> {
        match self {
            ProblemEntry::Name(n) => Ok(ProblemSpec::builtin(n)?),
            ProblemEntry::Spec(s) => Ok(s.clone()),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            ProblemEntry::Name(n) => n,
            ProblemEntry::Spec(s) => &s.name,
        }
    }

    pub fn instance(&self) -> Result<ProblemInstance> {
        Ok(ProblemInstance::new(self.spec()?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemEntry>,
    pub strategies: Vec<Strategy>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub budget: SearchBudget,
    /// Checkpoints (evaluation counts) reported in the summary table.
    pub checkpoints: Vec<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problems: BuiltinTarget::ALL.iter().map(|b| ProblemEntry::Name(b.name().into())).collect(),
            strategies: vec![Strategy::random(), Strategy::ea(15, 1), Strategy::smbo()],
            repetitions: 20,
            master_seed: 1,
            budget: SearchBudget::default(),
            checkpoints: vec![50, 100],
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        if self.strategies.is_empty() {
            bail!("no strategies configured");
        }
        if self.problems.is_empty() {
            bail!("no problems configured");
        }
        if self.budget.total == 0 {
            bail!("budget must be at least 1 evaluation");
        }
        let mut labels = BTreeSet::new();
        for s in &self.strategies {
            if !labels.insert(s.label()) {
                bail!("strategy `{}` configured twice", s.label());
            }
            match s {
                Strategy::Smbo(_) if self.budget.initial >= self.budget.total => {
                    bail!("initial design ({}) must be smaller than the budget ({})", self.budget.initial, self.budget.total)
                }
                Strategy::Ea(p) if p.mu == 0 || p.lambda == 0 => bail!("EA needs mu >= 1 and lambda >= 1"),
                _ => {}
            }
        }
        let mut names = BTreeSet::new();
        for p in &self.problems {
            if !names.insert(p.name().to_string()) {
                bail!("problem `{}` configured twice", p.name());
            }
            p.spec()?.validate()?;
        }
        Ok(())
    }
}
