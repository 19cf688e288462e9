//! Problem instances: a finite outcome table, an influence matrix, and the
//! direct evaluation of both objectives.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::InfluenceMatrix;

pub const FORMAT_VERSION: u32 = 1;

/// One element `a ∈ Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub weight: f64,
    pub label: i8,
    pub preds: Vec<i8>,
}

impl Outcome {
    pub fn new(weight: f64, label: i8, preds: Vec<i8>) -> Self {
        Self { weight, label, preds }
    }

    /// True when agent `j` predicts the label.
    pub fn is_correct(&self, j: usize) -> bool {
        self.preds[j] == self.label
    }
}

/// Selected agents and improvement strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionPlan {
    pub s: Vec<usize>,
    pub phi: f64,
}

impl InterventionPlan {
    pub fn new(s: Vec<usize>, phi: f64) -> Self {
        Self { s, phi }
    }

    pub fn empty(phi: f64) -> Self {
        Self { s: Vec::new(), phi }
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "phi = {} must lie in (0, 1]",
                self.phi
            )));
        }
        if self.s.len() > n {
            return Err(Error::KOutOfRange { k: self.s.len(), n });
        }
        let mut seen = vec![false; n];
        for &j in &self.s {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, len: n });
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::AlreadySelected(j));
            }
        }
        Ok(())
    }

    pub fn membership(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &j in &self.s {
            m[j] = true;
        }
        m
    }
}

/// Innate error rates, overall and per label class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorProfile {
    pub err: Vec<f64>,
    pub err_pos: Vec<f64>,
    pub err_neg: Vec<f64>,
    pub prior_pos: f64,
    pub label_independent: bool,
}

/// Compensated (Neumaier) sum.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A validated instance. Correctness values `Z(i, a)` are cached at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    wbar: InfluenceMatrix,
    outcomes: Vec<Outcome>,
    z: Vec<Vec<f64>>,
}

impl Instance {
    pub fn new(wbar: InfluenceMatrix, outcomes: Vec<Outcome>) -> Result<Self> {
        let n = wbar.n();
        if outcomes.is_empty() {
            return Err(Error::InvalidInstance("outcome set is empty".into()));
        }
        for (a, o) in outcomes.iter().enumerate() {
            if !(o.weight.is_finite() && o.weight > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "outcome {a} has non-positive weight {}",
                    o.weight
                )));
            }
            if o.label != 1 && o.label != -1 {
                return Err(Error::InvalidInstance(format!(
                    "outcome {a} has label {} outside {{-1, +1}}",
                    o.label
                )));
            }
            if o.preds.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: o.preds.len(),
                });
            }
            if let Some(p) = o.preds.iter().find(|&&p| p != 1 && p != -1) {
                return Err(Error::InvalidInstance(format!(
                    "outcome {a} has prediction {p} outside {{-1, +1}}"
                )));
            }
        }
        let total = neumaier_sum(outcomes.iter().map(|o| o.weight));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInstance(format!(
                "outcome weights sum to {total}, expected 1"
            )));
        }
        let z = outcomes
            .iter()
            .map(|o| {
                let y = f64::from(o.label);
                (0..n)
                    .map(|i| y * (0..n).map(|j| wbar.get(i, j) * f64::from(o.preds[j])).sum::<f64>())
                    .collect()
            })
            .collect();
        Ok(Self { wbar, outcomes, z })
    }

    pub fn n(&self) -> usize {
        self.wbar.n()
    }

    pub fn wbar(&self) -> &InfluenceMatrix {
        &self.wbar
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// Replaces `W̄`, keeping the outcome table.
    pub fn with_wbar(&self, wbar: InfluenceMatrix) -> Result<Self> {
        Self::new(wbar, self.outcomes.clone())
    }

    fn outcome(&self, a: usize) -> Result<&Outcome> {
        self.outcomes.get(a).ok_or(Error::IndexOutOfRange {
            index: a,
            len: self.outcomes.len(),
        })
    }

    /// `z*(·, a) = W̄ ŷ(a)`.
    pub fn expressed(&self, a: usize) -> Result<Vec<f64>> {
        let o = self.outcome(a)?;
        let y = f64::from(o.label);
        Ok(self.z[a].iter().map(|z| z * y).collect())
    }

    /// `Z(·, a) = y(a) z*(·, a)`.
    pub fn correctness(&self, a: usize) -> Result<&[f64]> {
        self.outcome(a)?;
        Ok(&self.z[a])
    }

    /// Improved prediction table `ỹ`, one row per outcome.
    pub fn apply_intervention(&self, plan: &InterventionPlan) -> Result<Vec<Vec<f64>>> {
        plan.validate(self.n())?;
        let member = plan.membership(self.n());
        Ok(self
            .outcomes
            .iter()
            .map(|o| improved(o, &member, plan.phi))
            .collect())
    }

    /// `B_new(·, a) = y(a) W̄ ỹ(a)` for every outcome.
    pub fn improved_correctness(&self, plan: &InterventionPlan) -> Result<Vec<Vec<f64>>> {
        let n = self.n();
        let table = self.apply_intervention(plan)?;
        Ok(self
            .outcomes
            .iter()
            .zip(&table)
            .map(|(o, yt)| {
                let y = f64::from(o.label);
                (0..n)
                    .map(|i| y * (0..n).map(|j| self.wbar.get(i, j) * yt[j]).sum::<f64>())
                    .collect()
            })
            .collect())
    }

    /// Expected total increase in correctness.
    pub fn gain_agg_direct(&self, plan: &InterventionPlan) -> Result<f64> {
        let b = self.improved_correctness(plan)?;
        Ok(self
            .outcomes
            .iter()
            .enumerate()
            .map(|(a, o)| {
                o.weight
                    * b[a]
                        .iter()
                        .zip(&self.z[a])
                        .map(|(bn, z)| bn - z)
                        .sum::<f64>()
            })
            .sum())
    }

    /// Expected number of faulty agents whose correctness strictly improves.
    pub fn gain_egal_direct(&self, plan: &InterventionPlan) -> Result<f64> {
        let b = self.improved_correctness(plan)?;
        Ok(self
            .outcomes
            .iter()
            .enumerate()
            .map(|(a, o)| {
                let count = b[a]
                    .iter()
                    .zip(&self.z[a])
                    .filter(|(bn, z)| **z < 0.0 && **z < **bn)
                    .count();
                o.weight * count as f64
            })
            .sum())
    }

    /// Expected number of agents with `Z < 0`.
    pub fn faulty_mass(&self) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.z)
            .map(|(o, z)| o.weight * z.iter().filter(|v| **v < 0.0).count() as f64)
            .sum()
    }

    pub fn error_profile(&self) -> ErrorProfile {
        let n = self.n();
        let mut err = vec![0.0; n];
        let mut wrong_pos = vec![0.0; n];
        let mut wrong_neg = vec![0.0; n];
        let (mut mass_pos, mut mass_neg) = (0.0, 0.0);
        for o in &self.outcomes {
            if o.label > 0 {
                mass_pos += o.weight;
            } else {
                mass_neg += o.weight;
            }
            for j in 0..n {
                if !o.is_correct(j) {
                    err[j] += o.weight;
                    if o.label > 0 {
                        wrong_pos[j] += o.weight;
                    } else {
                        wrong_neg[j] += o.weight;
                    }
                }
            }
        }
        let rate = |wrong: Vec<f64>, mass: f64| -> Vec<f64> {
            if mass > 0.0 {
                wrong.into_iter().map(|w| w / mass).collect()
            } else {
                vec![0.0; n]
            }
        };
        let err_pos = rate(wrong_pos, mass_pos);
        let err_neg = rate(wrong_neg, mass_neg);
        let label_independent = mass_pos > 0.0
            && mass_neg > 0.0
            && err_pos.iter().zip(&err_neg).all(|(p, q)| (p - q).abs() <= 1e-9);
        ErrorProfile {
            err,
            err_pos,
            err_neg,
            prior_pos: mass_pos,
            label_independent,
        }
    }

    /// Serializes with `W̄` inlined as dense CSV text.
    pub fn to_json_inline(&self) -> Result<String> {
        self.to_json_with(self.wbar.to_dense_csv())
    }

    /// Serializes with `wbar` pointing at a CSV file (relative to the JSON).
    pub fn to_json_with_path(&self, wbar_path: &str) -> Result<String> {
        self.to_json_with(wbar_path.to_string())
    }

    fn to_json_with(&self, wbar: String) -> Result<String> {
        let file = InstanceFile {
            format_version: FORMAT_VERSION,
            n: self.n(),
            omega: self.outcomes.clone(),
            wbar,
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses instance JSON. A `wbar` string containing a comma or newline
    /// is inline CSV, otherwise a path resolved against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {}",
                file.format_version
            )));
        }
        let wbar = if file.wbar.contains(',') || file.wbar.contains('\n') {
            InfluenceMatrix::from_csv_str(&file.wbar)?
        } else {
            let p = Path::new(&file.wbar);
            let resolved = match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.to_path_buf(),
            };
            InfluenceMatrix::load(resolved)?
        };
        if wbar.n() != file.n {
            return Err(Error::DimensionMismatch {
                expected: file.n,
                found: wbar.n(),
            });
        }
        Self::new(wbar, file.omega)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path.parent())
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format_version: u32,
    n: usize,
    omega: Vec<Outcome>,
    wbar: String,
}

fn improved(o: &Outcome, member: &[bool], phi: f64) -> Vec<f64> {
    let y = f64::from(o.label);
    o.preds
        .iter()
        .zip(member)
        .map(|(&p, &m)| {
            let p = f64::from(p);
            if m && p != y {
                (1.0 - phi) * p + phi * y
            } else {
                p
            }
        })
        .collect()
}

/// Sorted, deduplicated copy of a selection, for set comparisons.
pub fn as_set(s: &[usize]) -> BTreeSet<usize> {
    s.iter().copied().collect()
}
