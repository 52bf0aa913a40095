//! Naive Bayes from securely summed statistics.
//!
//! Owners compute local class counts, per-class discrete value counts, and
//! per-class Σx (scale 2) and Σx² (scale 4) for numeric features. One secure
//! summation per statistic family gives the demander the pooled totals.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::blocks::secure_sum;
use crate::party::Session;
use crate::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

pub const FAMILY_CLASS: &str = "nb/class-count";
pub const FAMILY_DISCRETE: &str = "nb/discrete-count";
pub const FAMILY_SUM_X: &str = "nb/sum-x";
pub const FAMILY_SUM_X2: &str = "nb/sum-x2";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NbFeature {
    Numeric,
    Discrete { cardinality: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NbSchema {
    pub features: Vec<NbFeature>,
    pub n_classes: usize,
}

impl NbSchema {
    fn numeric(&self) -> usize {
        self.features.iter().filter(|f| matches!(f, NbFeature::Numeric)).count()
    }

    fn discrete_cells(&self) -> usize {
        self.features
            .iter()
            .map(|f| match f {
                NbFeature::Discrete { cardinality } => *cardinality,
                NbFeature::Numeric => 0,
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NbValue {
    /// Mantissa at scale 2.
    Numeric(i64),
    /// Index into the feature's vocabulary.
    Discrete(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NbRecord {
    pub values: Vec<NbValue>,
    pub class: usize,
}

/// Integer sufficient statistics, laid out class-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NbStats {
    pub class_counts: Vec<BigInt>,
    /// `[class][discrete feature][value]` flattened.
    pub discrete_counts: Vec<BigInt>,
    /// `[class][numeric feature]`, scale 2.
    pub sum_x: Vec<BigInt>,
    /// `[class][numeric feature]`, scale 4.
    pub sum_x2: Vec<BigInt>,
}

impl NbStats {
    pub fn zeros(schema: &NbSchema) -> Self {
        let c = schema.n_classes;
        NbStats {
            class_counts: vec![BigInt::zero(); c],
            discrete_counts: vec![BigInt::zero(); c * schema.discrete_cells()],
            sum_x: vec![BigInt::zero(); c * schema.numeric()],
            sum_x2: vec![BigInt::zero(); c * schema.numeric()],
        }
    }

    /// Statistics of one owner's records.
    pub fn local(records: &[NbRecord], schema: &NbSchema) -> Result<Self> {
        let mut s = NbStats::zeros(schema);
        let (cells, numeric) = (schema.discrete_cells(), schema.numeric());
        for (line, r) in records.iter().enumerate() {
            if r.class >= schema.n_classes || r.values.len() != schema.features.len() {
                return Err(Error::data(Some(line + 1), "record does not match the naive Bayes schema"));
            }
            s.class_counts[r.class] += 1;
            let (mut off, mut k) = (0usize, 0usize);
            for (f, v) in schema.features.iter().zip(&r.values) {
                match (f, v) {
                    (NbFeature::Discrete { cardinality }, NbValue::Discrete(i)) if i < cardinality => {
                        s.discrete_counts[r.class * cells + off + i] += 1;
                        off += cardinality;
                    }
                    (NbFeature::Numeric, NbValue::Numeric(x)) => {
                        s.sum_x[r.class * numeric + k] += *x;
                        s.sum_x2[r.class * numeric + k] += BigInt::from(*x) * *x;
                        k += 1;
                    }
                    _ => return Err(Error::data(Some(line + 1), "value kind or range does not match the schema")),
                }
            }
        }
        Ok(s)
    }

    pub fn families(&self) -> Vec<(&'static str, &Vec<BigInt>)> {
        let mut out = vec![(FAMILY_CLASS, &self.class_counts)];
        for (name, v) in [(FAMILY_DISCRETE, &self.discrete_counts), (FAMILY_SUM_X, &self.sum_x), (FAMILY_SUM_X2, &self.sum_x2)] {
            if !v.is_empty() {
                out.push((name, v));
            }
        }
        out
    }

    pub fn add(&mut self, other: &NbStats) {
        for (a, b) in [
            (&mut self.class_counts, &other.class_counts),
            (&mut self.discrete_counts, &other.discrete_counts),
            (&mut self.sum_x, &other.sum_x),
            (&mut self.sum_x2, &other.sum_x2),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub schema: NbSchema,
    pub m: u64,
    pub priors: Vec<f64>,
    /// `[class][discrete feature][value]`.
    pub discrete_cond: Vec<Vec<Vec<f64>>>,
    /// `[class][numeric feature] -> (mu, sigma_sq)`.
    pub gaussian: Vec<Vec<(f64, f64)>>,
    pub stats: NbStats,
}

impl NbModel {
    /// Conditionals and moments are normalized by the class count.
    pub fn from_stats(stats: NbStats, schema: &NbSchema, laplace: bool) -> Self {
        let to_f = |v: &BigInt| v.to_f64().unwrap_or(f64::NAN);
        let m: u64 = stats.class_counts.iter().map(|c| c.to_u64().unwrap_or(0)).sum();
        let (cells, numeric) = (schema.discrete_cells(), schema.numeric());
        let mut priors = Vec::new();
        let mut discrete_cond = Vec::new();
        let mut gaussian = Vec::new();
        for c in 0..schema.n_classes {
            let count = to_f(&stats.class_counts[c]);
            priors.push(if m == 0 { 0.0 } else { count / m as f64 });
            let mut conds = Vec::new();
            let mut off = 0;
            for f in &schema.features {
                if let NbFeature::Discrete { cardinality } = f {
                    let row = (0..*cardinality)
                        .map(|v| {
                            let k = to_f(&stats.discrete_counts[c * cells + off + v]);
                            if laplace {
                                (k + 1.0) / (count + *cardinality as f64)
                            } else if count > 0.0 {
                                k / count
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    conds.push(row);
                    off += cardinality;
                }
            }
            discrete_cond.push(conds);
            let mut g = Vec::new();
            for k in 0..numeric {
                if count > 0.0 {
                    let mu = to_f(&stats.sum_x[c * numeric + k]) / 100.0 / count;
                    let ex2 = to_f(&stats.sum_x2[c * numeric + k]) / 10_000.0 / count;
                    g.push((mu, (ex2 - mu * mu).max(VARIANCE_FLOOR)));
                } else {
                    g.push((0.0, 1.0));
                }
            }
            gaussian.push(g);
        }
        NbModel { schema: schema.clone(), m, priors, discrete_cond, gaussian, stats }
    }

    pub fn log_posterior(&self, values: &[NbValue], class: usize) -> Result<f64> {
        if values.len() != self.schema.features.len() {
            return Err(Error::DimensionMismatch { expected: self.schema.features.len(), found: values.len() });
        }
        let mut lp = self.priors[class].ln();
        let (mut d, mut k) = (0usize, 0usize);
        for (f, v) in self.schema.features.iter().zip(values) {
            match (f, v) {
                (NbFeature::Discrete { .. }, NbValue::Discrete(i)) => {
                    lp += self.discrete_cond[class][d].get(*i).copied().unwrap_or(0.0).ln();
                    d += 1;
                }
                (NbFeature::Numeric, NbValue::Numeric(x)) => {
                    let (mu, var) = self.gaussian[class][k];
                    let x = *x as f64 / 100.0;
                    lp += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mu).powi(2) / (2.0 * var);
                    k += 1;
                }
                _ => return Err(Error::protocol("value kind does not match the schema")),
            }
        }
        Ok(lp)
    }

    /// Arg-max class; ties go to the lower index.
    pub fn predict(&self, values: &[NbValue]) -> Result<usize> {
        let mut best = (0usize, f64::NEG_INFINITY);
        for c in 0..self.schema.n_classes {
            let lp = self.log_posterior(values, c)?;
            if lp > best.1 {
                best = (c, lp);
            }
        }
        Ok(best.0)
    }
}

/// Owner i computes its local statistics from `owner_records[i-1]`; the
/// demander learns only the per-family totals.
pub fn nb_train(session: &mut Session, schema: &NbSchema, owner_records: &[Vec<NbRecord>], laplace: bool) -> Result<NbModel> {
    if owner_records.len() != session.n_owners() as usize {
        return Err(Error::DimensionMismatch { expected: session.n_owners() as usize, found: owner_records.len() });
    }
    let mut families = Vec::new();
    for (i, recs) in owner_records.iter().enumerate() {
        let local = NbStats::local(recs, schema)?;
        let owner = session.owner_mut(i as u32 + 1);
        for (name, v) in local.families() {
            owner.set_sum_input(name, v.clone());
        }
        if i == 0 {
            families = local.families().iter().map(|(n, _)| *n).collect();
        }
    }
    let mut stats = NbStats::zeros(schema);
    for name in families {
        session.mark_iteration();
        let total = secure_sum(session, name)?;
        let slot = match name {
            FAMILY_CLASS => &mut stats.class_counts,
            FAMILY_DISCRETE => &mut stats.discrete_counts,
            FAMILY_SUM_X => &mut stats.sum_x,
            _ => &mut stats.sum_x2,
        };
        if total.len() != slot.len() {
            return Err(Error::DimensionMismatch { expected: slot.len(), found: total.len() });
        }
        *slot = total;
    }
    Ok(NbModel::from_stats(stats, schema, laplace))
}
