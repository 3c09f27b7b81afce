//! Arm comparison: collisions per arm and the improvement over the base arm.

use std::collections::BTreeMap;

use lanecross_dqn::Variant;
use serde::{Deserialize, Serialize};

use crate::config::Arm;
use crate::report::EvalReport;
use crate::CliError;

/// `(base - arm) / base · 100`; `None` when the base is zero.
pub fn improvement_pct(base: f64, arm: f64) -> Option<f64> {
    (base != 0.0).then(|| (base - arm) / base * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmCell {
    pub collisions: f64,
    pub improvement_pct: Option<f64>,
}

/// One row per variant and seed plus a pooled row (`seed = None`) holding
/// means over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub variant: Variant,
    pub seed: Option<u64>,
    pub base: f64,
    pub ground_truth: Option<ArmCell>,
    pub predicted: Option<ArmCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub warnings: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn compare(reports: &[EvalReport]) -> Result<Comparison, CliError> {
    let mut by: BTreeMap<Variant, BTreeMap<u64, BTreeMap<Arm, f64>>> = BTreeMap::new();
    for r in reports {
        by.entry(r.variant).or_default().entry(r.seed).or_default().insert(r.arm, r.collisions as f64);
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let cell = |base: f64, v: Option<f64>| v.map(|c| ArmCell { collisions: c, improvement_pct: improvement_pct(base, c) });
    for (variant, seeds) in &by {
        let mut pooled: BTreeMap<Arm, Vec<f64>> = BTreeMap::new();
        for (&seed, arms) in seeds {
            let base = *arms.get(&Arm::Base).ok_or_else(|| CliError::MissingBase(format!("{variant} (seed {seed})")))?;
            for (&arm, &c) in arms {
                pooled.entry(arm).or_default().push(c);
            }
            if base == 0.0 && arms.len() > 1 {
                warnings.push(format!("{variant} seed {seed}: base arm has no collisions, improvement undefined"));
            }
            rows.push(CompareRow {
                variant: *variant,
                seed: Some(seed),
                base,
                ground_truth: cell(base, arms.get(&Arm::GroundTruth).copied()),
                predicted: cell(base, arms.get(&Arm::Predicted).copied()),
            });
        }
        let base = mean(&pooled[&Arm::Base]);
        if base == 0.0 && pooled.len() > 1 {
            warnings.push(format!("{variant} pooled: base arm has no collisions, improvement undefined"));
        }
        let pooled_mean = |arm: Arm| pooled.get(&arm).map(|v| mean(v));
        rows.push(CompareRow {
            variant: *variant,
            seed: None,
            base,
            ground_truth: cell(base, pooled_mean(Arm::GroundTruth)),
            predicted: cell(base, pooled_mean(Arm::Predicted)),
        });
    }
    if rows.is_empty() {
        return Err(CliError::MissingBase("(no reports)".into()));
    }
    Ok(Comparison { rows, warnings })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub const COMPARE_HEADER: &str =
    "variant,seed,base_collisions,ground_truth_collisions,ground_truth_improvement_pct,predicted_collisions,predicted_improvement_pct";

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{COMPARE_HEADER}\n");
        for r in &self.rows {
            let seed = r.seed.map_or("pooled".to_string(), |s| s.to_string());
            let gt = r.ground_truth.as_ref();
            let pr = r.predicted.as_ref();
            s += &format!(
                "{},{},{},{},{},{},{}\n",
                r.variant,
                seed,
                r.base,
                opt(gt.map(|c| c.collisions)),
                opt(gt.and_then(|c| c.improvement_pct)),
                opt(pr.map(|c| c.collisions)),
                opt(pr.and_then(|c| c.improvement_pct)),
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes") + "\n"
    }

    /// Fixed-width table of the pooled rows.
    pub fn to_table(&self) -> String {
        let fmt_cell = |c: Option<&ArmCell>| match c {
            None => format!("{:>10} {:>9}", "-", "-"),
            Some(c) => {
                let pct = c.improvement_pct.map_or("n/a".to_string(), |p| format!("{p:.2}%"));
                format!("{:>10.2} {:>9}", c.collisions, pct)
            }
        };
        let mut s = format!(
            "{:<10} {:>10} | {:>10} {:>9} | {:>10} {:>9}\n",
            "variant", "base", "gt-ttlc", "improv", "pred-ttlc", "improv"
        );
        s += &"-".repeat(s.len() - 1);
        s.push('\n');
        for r in self.rows.iter().filter(|r| r.seed.is_none()) {
            s += &format!(
                "{:<10} {:>10.2} | {} | {}\n",
                r.variant.name(),
                r.base,
                fmt_cell(r.ground_truth.as_ref()),
                fmt_cell(r.predicted.as_ref())
            );
        }
        s
    }
}
