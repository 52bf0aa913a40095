use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::blocks::PrecisionProfile;
use crate::encoding::{FixedPoint, DEFAULT_SCALE};
use crate::party::{OwnerData, OwnerRecord, Session};
use crate::{Error, Result};

/// Plaintext model held by the demander: θ at scale 2 (bias last).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: Vec<FixedPoint>,
    pub iteration: u64,
}

impl ModelParams {
    pub fn zeros(dim: usize) -> Self {
        ModelParams { theta: vec![FixedPoint::zero(DEFAULT_SCALE); dim], iteration: 0 }
    }

    pub fn from_mantissas(m: Vec<BigInt>, iteration: u64) -> Self {
        ModelParams { theta: m.into_iter().map(|v| FixedPoint::new(v, DEFAULT_SCALE)).collect(), iteration }
    }

    pub fn mantissas(&self) -> Vec<BigInt> {
        self.theta.iter().map(|t| t.mantissa.clone()).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.theta.iter().map(FixedPoint::to_f64).collect()
    }

    pub fn l1(&self) -> f64 {
        self.theta.iter().map(|t| t.to_f64().abs()).sum()
    }
}

/// How θ returns to two decimals after each update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Refresh {
    Truncate,
    Round,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: FixedPoint,
    pub alpha: FixedPoint,
    pub iters: u32,
    pub batch: u32,
    pub seed: u64,
    pub key_bits: u64,
    /// Largest Σ|θ| admitted before a power-function call.
    pub theta_l1_bound: f64,
    pub refresh: Refresh,
    pub precision: PrecisionProfile,
}

impl TrainConfig {
    pub fn svm(iters: u32, seed: u64, key_bits: u64) -> Self {
        TrainConfig {
            lambda: FixedPoint::new(1, 2),
            alpha: FixedPoint::new(100, 2),
            iters,
            batch: 1,
            seed,
            key_bits,
            theta_l1_bound: 100.0,
            refresh: Refresh::Round,
            precision: PrecisionProfile::STANDARD,
        }
    }

    pub fn lr(iters: u32, seed: u64, key_bits: u64) -> Self {
        TrainConfig {
            lambda: FixedPoint::new(10, 2),
            alpha: FixedPoint::new(0, 2),
            ..TrainConfig::svm(iters, seed, key_bits)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.scale != DEFAULT_SCALE || self.alpha.scale != DEFAULT_SCALE {
            return Err(Error::Config("lambda and alpha must be given with two decimals".into()));
        }
        if !self.lambda.mantissa.is_positive() {
            return Err(Error::Config("lambda must be at least 0.01".into()));
        }
        if self.alpha.mantissa.is_negative() {
            return Err(Error::Config("alpha must be non-negative".into()));
        }
        if self.iters == 0 {
            return Err(Error::Config("at least one iteration is required".into()));
        }
        if self.batch != 1 {
            return Err(Error::Config("only single-record batches are supported".into()));
        }
        if !(self.theta_l1_bound >= 0.0) {
            return Err(Error::Config("theta_l1_bound must be non-negative".into()));
        }
        Ok(())
    }

    /// λ·α at scale 4.
    pub fn lambda_alpha(&self) -> BigInt {
        &self.lambda.mantissa * &self.alpha.mantissa
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainOutcome {
    pub model: ModelParams,
    /// θ mantissas after each iteration.
    pub trace: Vec<Vec<BigInt>>,
}

/// `θᵀx̂ ≥ 0` on scale-2 mantissas, evaluated exactly.
pub fn predict_linear(theta: &[BigInt], x_hat: &[BigInt]) -> Result<bool> {
    if theta.len() != x_hat.len() {
        return Err(Error::DimensionMismatch { expected: theta.len(), found: x_hat.len() });
    }
    let s: BigInt = theta.iter().zip(x_hat).map(|(a, b)| a * b).sum();
    Ok(!s.is_negative() || s.is_zero())
}

/// Hands each owner its records and runs the one-way encrypted upload.
/// `records[i].id` must equal `i`.
pub fn setup_linear(session: &mut Session, records: &[OwnerRecord], assignment: &[Vec<usize>]) -> Result<()> {
    if assignment.len() != session.n_owners() as usize {
        return Err(Error::DimensionMismatch { expected: session.n_owners() as usize, found: assignment.len() });
    }
    for (i, r) in records.iter().enumerate() {
        if r.id != i as u64 {
            return Err(Error::Config("record ids must be 0..m in order".into()));
        }
    }
    for (o, idx) in assignment.iter().enumerate() {
        let data = OwnerData { records: idx.iter().map(|&i| records[i].clone()).collect() };
        session.set_owner_data(o as u32 + 1, data);
    }
    session.upload_training_data()
}

pub(crate) fn refresh(v: &BigInt, from: u32, mode: Refresh) -> BigInt {
    match mode {
        Refresh::Truncate => crate::encoding::truncate_scale(v, from, DEFAULT_SCALE),
        Refresh::Round => crate::encoding::round_scale(v, from, DEFAULT_SCALE),
    }
}
