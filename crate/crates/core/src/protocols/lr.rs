//! Logistic regression trained by SGD with an exact sigmoid.
//!
//! Per iteration (four interactions): fetch the record's exponential
//! vectors, evaluate `[e^{-θᵀx̂}]` under Cloud-RSA and convert it to
//! Paillier, send `(e^{-θᵀx̂}+1)·e^{r}` for the owner to divide x̂ by, then
//! key-switch the updated θ back to the demander.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::model::{refresh, ModelParams, TrainConfig, TrainOutcome};
use super::schedule::Schedule;
use crate::blocks::pow::blind_mantissa;
use crate::blocks::{convert_paillier_key, convert_rsa_to_paillier, fetch_exp_vectors, pow_plan, secure_pow, ExponentSign};
use crate::encoding::{budget_check_lr, min_key_digits, pow10_signed, rescale_ct, to_residue, Scaled};
use crate::net::{Disclosure, PartyId, Payload, Taint};
use crate::party::{disclosure, Owner, Reply, Session};
use crate::phe::PaillierCiphertext;
use crate::{Error, Result};

/// `trunc(x / D)` at `out_scale`, for a scale-2 feature and a positive
/// denominator mantissa at `in_scale`. Computed exactly in integers.
pub fn sigmoid_share(x: &BigInt, denom: &BigInt, in_scale: u32, out_scale: u32) -> Result<BigInt> {
    if !denom.is_positive() {
        return Err(Error::protocol("sigmoid denominator is not positive"));
    }
    let num = x * pow10_signed(out_scale + in_scale);
    Ok(num / (denom * BigInt::from(100)))
}

fn l1_of(theta: &[BigInt]) -> f64 {
    theta.iter().map(|t| crate::encoding::fx_decode(t, 2).abs()).sum()
}

pub fn lr_train(session: &mut Session, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let key_bits = session.config().key_bits;
    if config.key_bits != key_bits {
        return Err(Error::Config(format!("training config expects {}-bit keys, session has {key_bits}", config.key_bits)));
    }
    let n_records = session.demander.uploads.len() as u64;
    if n_records == 0 {
        return Err(Error::EmptyInput("uploaded training records"));
    }
    let dim = session.demander.uploads.values().next().map(|(_, v)| v.len()).unwrap_or(0);
    budget_check_lr(dim, config.theta_l1_bound, key_bits)?;
    let budget = min_key_digits(key_bits).ok_or(Error::UnsupportedKeySize(key_bits))?;
    let p = config.precision;
    let s1 = p.owner_scale + p.unblind_scale;
    let sq = p.sigmoid_scale;
    let lambda = config.lambda.mantissa.clone();
    let mut schedule = Schedule::new(config.seed, n_records);
    let mut theta = ModelParams::zeros(dim).mantissas();
    let mut trace = Vec::with_capacity(config.iters as usize);
    for _ in 0..config.iters {
        session.mark_iteration();
        let (t, r1, r2) = schedule.lr_step();
        let l1 = l1_of(&theta);
        if l1 > config.theta_l1_bound {
            return Err(crate::encoding::BudgetViolation {
                context: format!("sum|theta| = {l1:.2} exceeds the configured bound {}", config.theta_l1_bound),
                required_digits: ((l1 + dim as f64 - 1.0) * 2.0).ceil() as u32,
                key_digits: budget,
            }
            .into());
        }
        let (owner, xy) = session.demander.uploads.get(&t).cloned().ok_or_else(|| Error::protocol(format!("record {t} missing")))?;
        let keys = session.demander.owner_keys(owner)?.clone();
        let pk = &keys.paillier;

        let exp = fetch_exp_vectors(session, t)?;
        let plan = pow_plan(&theta, ExponentSign::Negative, budget, p.blind_scale)?;
        let pr = secure_pow(&keys.cloudrsa, &exp, &plan)?;
        let conv = convert_rsa_to_paillier(session, owner, &pr, r1, &p)?;

        let b2 = BigInt::from(blind_mantissa(r2, p.blind_scale)?);
        let denom = pk.add_plain(&conv.ct.ct, &pow10_signed(s1))?;
        let denom = pk.scalar_pow(&denom, &b2)?;
        let nonce = session.demander.next_nonce();
        let env = session.call(
            owner,
            Payload::SigmoidRequest { record: t, ct: denom, in_scale: s1 + p.blind_scale, out_scale: sq },
            s1 + p.blind_scale,
            Taint::Blinded(nonce),
        )?;
        let shares = match env.body {
            Payload::SigmoidReply { cts } if cts.len() == dim => cts,
            other => return Err(Error::protocol(format!("expected sigmoid-reply, got {}", other.kind()))),
        };

        let gscale = sq + p.blind_scale;
        let mut updated = Vec::with_capacity(dim);
        for ((s, c_xy), th) in shares.iter().zip(&xy).zip(&theta) {
            pk.validate(s)?;
            let sig = pk.scalar_pow(s, &b2)?;
            let xy_s = rescale_ct(pk, c_xy, gscale - c_xy.scale)?;
            let g = pk.sub(&sig, &xy_s.ct)?;
            let step = pk.scalar_pow(&g, &-&lambda)?;
            let ct = pk.add_plain(&step, &(th * pow10_signed(gscale)))?;
            updated.push(Scaled::new(ct, gscale + 2));
        }
        let mine = convert_paillier_key(session, owner, PartyId::DEMANDER, &updated)?;
        let sk = &session.demander.sk;
        let plain = mine.iter().map(|c| sk.decrypt_signed(&c.ct)).collect::<Result<Vec<_>>>()?;
        session.disclose(PartyId::DEMANDER, "theta", plain.clone());
        theta = plain.iter().map(|v| refresh(v, gscale + 2, config.refresh)).collect();
        trace.push(theta.clone());
    }
    Ok(TrainOutcome { model: ModelParams::from_mantissas(theta, config.iters as u64), trace })
}

pub(crate) fn owner_sigmoid(
    owner: &mut Owner,
    rt: u64,
    record: u64,
    ct: &PaillierCiphertext,
    in_scale: u32,
    out_scale: u32,
    seen: &mut Vec<Disclosure>,
) -> Result<Reply> {
    let d = owner.sk.decrypt_signed(ct)?;
    seen.push(disclosure(owner, rt, "sigmoid", vec![d.clone()]));
    let x_hat = owner.record(record)?.x_hat.clone();
    let n = owner.sk.public().n().clone();
    let mut cts = Vec::with_capacity(x_hat.len());
    for x in &x_hat {
        let q = sigmoid_share(x, &d, in_scale, out_scale)?;
        debug_assert!(!q.is_negative() || q.is_zero());
        cts.push(owner.sk.encrypt(&to_residue(&q, &n)?, &mut owner.rng)?);
    }
    Ok(Reply::cipher(Payload::SigmoidReply { cts }, out_scale))
}
