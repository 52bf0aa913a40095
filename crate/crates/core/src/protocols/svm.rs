//! Linear SVM trained by SGD on the hinge loss.
//!
//! Per iteration: the demander forms `[y θᵀx̂]` from the uploaded `[x̂y]`,
//! tests `1 - yθᵀx̂ > 0` with the sign block, and when the hinge is active
//! folds `λα·[x̂y]` into the update and key-switches it back to itself.
//! At most two interactions per iteration.

use num_bigint::BigInt;

use super::model::{refresh, ModelParams, TrainConfig, TrainOutcome};
use super::schedule::Schedule;
use crate::blocks::{convert_paillier_key, secure_dot, secure_sign};
use crate::encoding::{pow10_signed, Scaled};
use crate::net::PartyId;
use crate::party::Session;
use crate::{Error, Result};

/// Update at scale 6 when the hinge is inactive: `(10^4 - λα)·θ`.
pub fn shrink(theta: &[BigInt], la: &BigInt) -> Vec<BigInt> {
    let keep = pow10_signed(4) - la;
    theta.iter().map(|t| t * &keep).collect()
}

pub fn svm_train(session: &mut Session, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let n_records = session.demander.uploads.len() as u64;
    if n_records == 0 {
        return Err(Error::EmptyInput("uploaded training records"));
    }
    let dim = session.demander.uploads.values().next().map(|(_, v)| v.len()).unwrap_or(0);
    let mut schedule = Schedule::new(config.seed, n_records);
    let la = config.lambda_alpha();
    let mut theta = ModelParams::zeros(dim).mantissas();
    let mut trace = Vec::with_capacity(config.iters as usize);
    for _ in 0..config.iters {
        session.mark_iteration();
        let t = schedule.svm_step();
        let (owner, xy) = session.demander.uploads.get(&t).cloned().ok_or_else(|| Error::protocol(format!("record {t} missing")))?;
        let pk = session.demander.owner_keys(owner)?.paillier.clone();
        let u = secure_dot(&pk, &xy, &theta, 2)?;
        let margin = Scaled::new(pk.add_plain(&pk.neg(&u.ct)?, &pow10_signed(4))?, 4);
        let active = secure_sign(session, owner, &margin)?;
        let keep = shrink(&theta, &la);
        let updated = if active {
            let mut cts = Vec::with_capacity(dim);
            for (c, k) in xy.iter().zip(&keep) {
                let step = pk.scalar_pow(&c.ct, &la)?;
                cts.push(Scaled::new(pk.add_plain(&step, k)?, 6));
            }
            let mine = convert_paillier_key(session, owner, PartyId::DEMANDER, &cts)?;
            let sk = &session.demander.sk;
            let plain = mine.iter().map(|c| sk.decrypt_signed(&c.ct)).collect::<Result<Vec<_>>>()?;
            session.disclose(PartyId::DEMANDER, "theta", plain.clone());
            plain
        } else {
            keep
        };
        theta = updated.iter().map(|v| refresh(v, 6, config.refresh)).collect();
        trace.push(theta.clone());
    }
    Ok(TrainOutcome { model: ModelParams::from_mantissas(theta, config.iters as u64), trace })
}
