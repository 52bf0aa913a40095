//! Plaintext reference trainers and small-modulus crypto oracles.
//!
//! Quantized mode reproduces every integer step of the encrypted pipeline
//! (same schedule, same encode points, same truncations), so its θ trace is
//! comparable mantissa for mantissa. Exact mode runs the same SGD in f64.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::blocks::pow::{blind_mantissa, exp_mantissa, recover_blinded, unblind_factor};
use crate::blocks::{pow_plan, ExponentSign, PrecisionProfile};
use crate::encoding::{budget_check_lr, fx_decode, fx_encode, min_key_digits, pow10_signed, BudgetViolation};
use crate::party::OwnerRecord;
use crate::protocols::model::refresh;
use crate::protocols::nb::{NbFeature, NbModel, NbRecord, NbSchema, NbStats, NbValue};
use crate::protocols::{sigmoid_share, Schedule, TrainConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleMode {
    pub quantized: bool,
    pub scale: u32,
}

impl OracleMode {
    pub const EXACT: OracleMode = OracleMode { quantized: false, scale: 2 };
    pub const QUANTIZED: OracleMode = OracleMode { quantized: true, scale: 2 };
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleTrace {
    /// θ after each iteration.
    pub theta: Vec<Vec<f64>>,
    /// Scale-2 mantissas, quantized mode only.
    pub mantissas: Option<Vec<Vec<BigInt>>>,
}

impl OracleTrace {
    pub fn last(&self) -> Option<&Vec<f64>> {
        self.theta.last()
    }
}

fn check_records(records: &[OwnerRecord]) -> Result<usize> {
    let first = records.first().ok_or(Error::EmptyInput("training records"))?;
    let dim = first.x_hat.len();
    for (i, r) in records.iter().enumerate() {
        if r.id != i as u64 {
            return Err(Error::Config("record ids must be 0..m in order".into()));
        }
        if r.x_hat.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: r.x_hat.len() });
        }
    }
    Ok(dim)
}

fn decode_all(v: &[BigInt]) -> Vec<f64> {
    v.iter().map(|m| fx_decode(m, 2)).collect()
}

/// One hinge-loss step on scale-2 mantissas, returning θ at scale 6 before
/// the refresh.
pub fn svm_quantized_step(theta: &[BigInt], x_hat: &[BigInt], label: i64, la: &BigInt) -> Vec<BigInt> {
    let u: BigInt = theta.iter().zip(x_hat).map(|(t, x)| t * x * label).sum();
    let keep = pow10_signed(4) - la;
    if pow10_signed(4) - u > BigInt::zero() {
        theta.iter().zip(x_hat).map(|(t, x)| la * x * label + &keep * t).collect()
    } else {
        theta.iter().map(|t| &keep * t).collect()
    }
}

pub fn svm_exact_step(theta: &[f64], x: &[f64], y: f64, lambda: f64, alpha: f64) -> Vec<f64> {
    let u: f64 = y * theta.iter().zip(x).map(|(t, x)| t * x).sum::<f64>();
    if u < 1.0 {
        theta.iter().zip(x).map(|(t, x)| t - lambda * (alpha * t - alpha * y * x)).collect()
    } else {
        theta.iter().map(|t| t - lambda * alpha * t).collect()
    }
}

pub fn plain_svm_sgd(records: &[OwnerRecord], config: &TrainConfig, mode: OracleMode) -> Result<OracleTrace> {
    config.validate()?;
    let dim = check_records(records)?;
    if records.iter().any(|r| r.label != 1 && r.label != -1) {
        return Err(Error::Config("SVM labels must be -1 or +1".into()));
    }
    let mut schedule = Schedule::new(config.seed, records.len() as u64);
    let mut out = OracleTrace { theta: Vec::new(), mantissas: mode.quantized.then(Vec::new) };
    if mode.quantized {
        let la = config.lambda_alpha();
        let mut theta = vec![BigInt::zero(); dim];
        for _ in 0..config.iters {
            let r = &records[schedule.svm_step() as usize];
            let t6 = svm_quantized_step(&theta, &r.x_hat, r.label, &la);
            theta = t6.iter().map(|v| refresh(v, 6, config.refresh)).collect();
            out.theta.push(decode_all(&theta));
            out.mantissas.as_mut().expect("quantized").push(theta.clone());
        }
    } else {
        let (lambda, alpha) = (config.lambda.to_f64(), config.alpha.to_f64());
        let mut theta = vec![0.0; dim];
        for _ in 0..config.iters {
            let r = &records[schedule.svm_step() as usize];
            theta = svm_exact_step(&theta, &decode_all(&r.x_hat), r.label as f64, lambda, alpha);
            out.theta.push(theta.clone());
        }
    }
    Ok(out)
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn lr_exact_step(theta: &[f64], x: &[f64], y: f64, lambda: f64) -> Vec<f64> {
    let s = sigmoid(theta.iter().zip(x).map(|(t, x)| t * x).sum());
    theta.iter().zip(x).map(|(t, x)| t - lambda * x * (s - y)).collect()
}

/// Integer intermediates of one quantized LR step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LrStep {
    /// `(value, scale, root)` of each blinded power component.
    pub blinded: Vec<(BigUint, u32, u32)>,
    /// Owner's re-encoding of the blinded exponential.
    pub owner_value: BigInt,
    /// Unblinding multiplier at `unblind_scale`.
    pub unblind: BigInt,
    /// `e^{-θᵀx̂}` at `owner_scale + unblind_scale`.
    pub exp_neg: BigInt,
    /// Blinded sigmoid denominator.
    pub denom: BigInt,
    /// θ before the refresh, at `sigmoid_scale + blind_scale + 2`.
    pub theta_wide: Vec<BigInt>,
}

/// Plaintext view of the Cloud-RSA to Paillier conversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConversionOracle {
    pub blinded: Vec<(BigUint, u32, u32)>,
    pub owner_value: BigInt,
    pub unblind: BigInt,
    /// Result at `owner_scale + unblind_scale`.
    pub value: BigInt,
}

/// `components` are the unblinded `(value, scale, root)` power components.
pub fn rsa_to_paillier_oracle(components: &[(BigUint, u32, u32)], blind_r: i32, p: &PrecisionProfile) -> Result<ConversionOracle> {
    let b = blind_mantissa(blind_r, p.blind_scale)?;
    let blinded: Vec<(BigUint, u32, u32)> = components.iter().map(|(v, s, root)| (v * &b, s + p.blind_scale, *root)).collect();
    let owner_value = fx_encode(recover_blinded(&blinded)?, p.owner_scale)?;
    let roots: Vec<u32> = components.iter().map(|c| c.2).collect();
    let unblind = fx_encode(unblind_factor(&b, p.blind_scale, &roots), p.unblind_scale)?;
    let d = pow10_signed(p.unblind_scale);
    let value = &owner_value * (&unblind / &d) * &d + &owner_value * (&unblind % &d);
    Ok(ConversionOracle { blinded, owner_value, unblind, value })
}

/// Mirrors the encrypted LR iteration on plaintext integers.
pub fn lr_quantized_step(theta: &[BigInt], rec: &OwnerRecord, r1: i32, r2: i32, config: &TrainConfig) -> Result<LrStep> {
    let p = config.precision;
    let budget = min_key_digits(config.key_bits).ok_or(Error::UnsupportedKeySize(config.key_bits))?;
    let plan = pow_plan(theta, ExponentSign::Negative, budget, p.blind_scale)?;
    let mut bases = Vec::with_capacity(rec.x_hat.len());
    for x in &rec.x_hat {
        bases.push((exp_mantissa(x, false)?, exp_mantissa(x, true)?));
    }
    let mut components = Vec::with_capacity(plan.len());
    for chunk in &plan {
        let mut v = BigUint::one();
        for f in &chunk.factors {
            let (pos, neg) = &bases[f.feature];
            let base = if f.negative_base { neg } else { pos };
            v *= base.pow(f.exp as u32);
        }
        components.push((v, chunk.scale(), chunk.root));
    }
    let conv = rsa_to_paillier_oracle(&components, r1, &p)?;
    let (blinded, owner_value, unblind, exp_neg) = (conv.blinded, conv.owner_value, conv.unblind, conv.value);

    let s1 = p.owner_scale + p.unblind_scale;
    let b2 = BigInt::from(blind_mantissa(r2, p.blind_scale)?);
    let denom = (&exp_neg + pow10_signed(s1)) * &b2;
    let gscale = p.sigmoid_scale + p.blind_scale;
    let lambda = &config.lambda.mantissa;
    let mut theta_wide = Vec::with_capacity(theta.len());
    for (x, t) in rec.x_hat.iter().zip(theta) {
        let sig = sigmoid_share(x, &denom, s1 + p.blind_scale, p.sigmoid_scale)? * &b2;
        let xy = x * rec.label * pow10_signed(gscale - 2);
        theta_wide.push(t * pow10_signed(gscale) - lambda * (sig - xy));
    }
    Ok(LrStep { blinded, owner_value, unblind, exp_neg, denom, theta_wide })
}

fn l1_guard(theta: &[BigInt], dim: usize, config: &TrainConfig) -> Result<()> {
    let l1: f64 = theta.iter().map(|t| fx_decode(t, 2).abs()).sum();
    if l1 > config.theta_l1_bound {
        let key_digits = min_key_digits(config.key_bits).unwrap_or(0);
        return Err(BudgetViolation {
            context: format!("sum|theta| = {l1:.2} exceeds the configured bound {}", config.theta_l1_bound),
            required_digits: ((l1 + dim as f64 - 1.0) * 2.0).ceil() as u32,
            key_digits,
        }
        .into());
    }
    Ok(())
}

pub fn plain_lr_sgd(records: &[OwnerRecord], config: &TrainConfig, mode: OracleMode) -> Result<OracleTrace> {
    config.validate()?;
    let dim = check_records(records)?;
    if records.iter().any(|r| r.label != 0 && r.label != 1) {
        return Err(Error::Config("LR labels must be 0 or 1".into()));
    }
    let mut schedule = Schedule::new(config.seed, records.len() as u64);
    let mut out = OracleTrace { theta: Vec::new(), mantissas: mode.quantized.then(Vec::new) };
    if mode.quantized {
        budget_check_lr(dim, config.theta_l1_bound, config.key_bits)?;
        let wide = config.precision.sigmoid_scale + config.precision.blind_scale + 2;
        let mut theta = vec![BigInt::zero(); dim];
        for _ in 0..config.iters {
            let (t, r1, r2) = schedule.lr_step();
            l1_guard(&theta, dim, config)?;
            let step = lr_quantized_step(&theta, &records[t as usize], r1, r2, config)?;
            theta = step.theta_wide.iter().map(|v| refresh(v, wide, config.refresh)).collect();
            out.theta.push(decode_all(&theta));
            out.mantissas.as_mut().expect("quantized").push(theta.clone());
        }
    } else {
        let lambda = config.lambda.to_f64();
        let mut theta = vec![0.0; dim];
        for _ in 0..config.iters {
            let (t, _, _) = schedule.lr_step();
            let r = &records[t as usize];
            theta = lr_exact_step(&theta, &decode_all(&r.x_hat), r.label as f64, lambda);
            out.theta.push(theta.clone());
        }
    }
    Ok(out)
}

/// Mean logistic loss of θ over records with labels in {0, 1}.
pub fn logistic_loss(theta: &[f64], records: &[OwnerRecord]) -> f64 {
    let total: f64 = records
        .iter()
        .map(|r| {
            let z: f64 = theta.iter().zip(decode_all(&r.x_hat)).map(|(t, x)| t * x).sum();
            let y = r.label as f64;
            // log(1 + e^z) - y z, computed without overflow
            z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z
        })
        .sum();
    total / records.len().max(1) as f64
}

/// Pooled-data naive Bayes.
pub fn plain_nb(records: &[NbRecord], schema: &NbSchema, laplace: bool) -> Result<NbModel> {
    if records.is_empty() {
        return Err(Error::EmptyInput("naive Bayes records"));
    }
    let stats = NbStats::local(records, schema)?;
    let model = NbModel::from_stats(stats, schema, laplace);
    let direct = direct_gaussian(records, schema);
    for (c, (a, b)) in model.gaussian.iter().zip(&direct).enumerate() {
        for (k, ((mu, var), (dmu, dvar))) in a.iter().zip(b).enumerate() {
            if !close(*mu, *dmu) || !close(*var, *dvar) {
                return Err(Error::protocol(format!(
                    "variance expansion disagrees with the direct form for class {c}, feature {k}: ({mu}, {var}) vs ({dmu}, {dvar})"
                )));
            }
        }
    }
    Ok(model)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `(μ, Σ(x-μ)²/m_c)` per class and numeric feature by the two-pass formula.
pub fn direct_gaussian(records: &[NbRecord], schema: &NbSchema) -> Vec<Vec<(f64, f64)>> {
    let numeric: Vec<usize> =
        schema.features.iter().enumerate().filter(|(_, f)| matches!(f, NbFeature::Numeric)).map(|(i, _)| i).collect();
    (0..schema.n_classes)
        .map(|c| {
            let rows: Vec<&NbRecord> = records.iter().filter(|r| r.class == c).collect();
            numeric
                .iter()
                .map(|&j| {
                    if rows.is_empty() {
                        return (0.0, 1.0);
                    }
                    let xs: Vec<f64> = rows
                        .iter()
                        .map(|r| match r.values[j] {
                            NbValue::Numeric(x) => x as f64 / 100.0,
                            NbValue::Discrete(_) => f64::NAN,
                        })
                        .collect();
                    let mu = xs.iter().sum::<f64>() / xs.len() as f64;
                    let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / xs.len() as f64;
                    (mu, var.max(crate::protocols::nb::VARIANCE_FLOOR))
                })
                .collect()
        })
        .collect()
}

/// Fraction of matching predictions.
pub fn accuracy<T: PartialEq>(preds: &[T], labels: &[T]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    if preds.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: preds.len() });
    }
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Accuracy rounded to four decimals for reporting.
pub fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// `(1 + N)^m · r^N mod N²` straight from the definition.
pub fn paillier_encrypt_direct(n: &BigUint, m: &BigUint, r: &BigUint) -> BigUint {
    let n2 = n * n;
    ((BigUint::one() + n).modpow(m, &n2) * r.modpow(n, &n2)) % &n2
}

/// Decrypts under a tiny modulus by factoring it and searching for the
/// plaintext whose unblinded residue is an N-th power.
pub fn paillier_decrypt_bruteforce(n: &BigUint, c: &BigUint) -> Option<BigUint> {
    let n_u = n.to_u64()?;
    let (p, q) = factor_small(n_u)?;
    let lambda = BigUint::from(((p - 1) as u128 * (q - 1) as u128 / (p - 1).gcd(&(q - 1)) as u128) as u64);
    let n2 = n * n;
    let g = BigUint::one() + n;
    let mut gm = BigUint::one();
    for m in 0..n_u {
        // c·g^{-m} is an N-th residue iff raising it to λ gives 1.
        let inv = gm.modinv(&n2)?;
        if ((c * &inv) % &n2).modpow(&lambda, &n2).is_one() {
            return Some(BigUint::from(m));
        }
        gm = (gm * &g) % &n2;
    }
    None
}

/// Finds `m` with `m^e ≡ c (mod N)` by exhaustive search.
pub fn rsa_decrypt_bruteforce(n: &BigUint, e: &BigUint, c: &BigUint) -> Option<BigUint> {
    let n_u = n.to_u64()?;
    (0..n_u).map(BigUint::from).find(|m| &m.modpow(e, n) == c)
}

fn factor_small(n: u64) -> Option<(u64, u64)> {
    (2..).take_while(|d| d * d <= n).find(|d| n % d == 0).map(|d| (d, n / d))
}

/// Sign of a plaintext as the sign test reports it.
pub fn sign_oracle(v: &BigInt) -> bool {
    v.is_positive()
}
