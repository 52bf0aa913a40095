//! Parties and the in-process session that connects them.
//!
//! Every message is encoded to its canonical wire form, queued on the
//! (from, to) channel and decoded by the receiver, so byte counts and the
//! exported transcript are exactly what a socket transport would carry.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::encoding::{self, Scaled, ScaledPaillier};
use crate::net::{
    Channels, DirectoryEntry, Disclosure, Envelope, NonceId, PartyId, Payload, Taint, Transcript, UploadRecord,
};
use crate::phe::{
    cloudrsa_keygen, paillier_keygen, CloudRsaKeyMaterial, CloudRsaPublic, PaillierPrivateKey, PaillierPublicKey,
};
use crate::seed;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub n_owners: u32,
    pub key_bits: u64,
    pub latency_ms: u64,
    pub seed: u64,
    /// Run owner handlers of a parallel round on worker threads.
    pub parallel: bool,
}

impl SessionConfig {
    pub fn new(n_owners: u32, key_bits: u64, seed: u64) -> Self {
        SessionConfig { n_owners, key_bits, latency_ms: 0, seed, parallel: false }
    }
}

/// Deliberate protocol deviations used to exercise the audit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    pub skip_sign_blinding: bool,
    pub reuse_nonce: bool,
    pub offline_owner: Option<u32>,
}

/// One training record as held by its owner: x̂ mantissas at scale 2
/// (bias included) and an integer label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OwnerRecord {
    pub id: u64,
    pub x_hat: Vec<BigInt>,
    pub label: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OwnerData {
    pub records: Vec<OwnerRecord>,
}

/// Key material of one party, generated outside a session so that tests
/// can reuse it.
#[derive(Clone, Debug)]
pub struct PartyKeys {
    pub paillier: PaillierPrivateKey,
    pub cloudrsa: Option<CloudRsaKeyMaterial>,
}

impl PartyKeys {
    pub fn generate(bits: u64, seed: u64, party: PartyId) -> Result<Self> {
        let mut rng = seed::stream(seed, &format!("keygen/{party}"));
        let (_, paillier) = paillier_keygen(bits, &mut rng)?;
        let cloudrsa = if party.is_owner() { Some(cloudrsa_keygen(bits, &mut rng)?) } else { None };
        Ok(PartyKeys { paillier, cloudrsa })
    }

    /// Keys for the demander and `n` owners, generated in parallel.
    pub fn generate_all(bits: u64, seed: u64, n: u32) -> Result<Vec<PartyKeys>> {
        let parties: Vec<PartyId> =
            std::iter::once(PartyId::DEMANDER).chain((1..=n).map(PartyId::owner)).collect();
        parties.par_iter().map(|&p| PartyKeys::generate(bits, seed, p)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct OwnerDirectoryEntry {
    pub paillier: PaillierPublicKey,
    pub cloudrsa: CloudRsaPublic,
}

pub struct Demander {
    pub(crate) sk: PaillierPrivateKey,
    pub(crate) owners: BTreeMap<u32, OwnerDirectoryEntry>,
    pub(crate) uploads: BTreeMap<u64, (u32, Vec<ScaledPaillier>)>,
    pub(crate) rng: ChaCha20Rng,
    nonce_counter: u64,
    pub(crate) last_sign_nonce: Option<(NonceId, BigUint)>,
}

impl Demander {
    pub fn pk(&self) -> &PaillierPublicKey {
        self.sk.public()
    }

    pub(crate) fn next_nonce(&mut self) -> NonceId {
        self.nonce_counter += 1;
        format!("A-{}", self.nonce_counter)
    }

    pub(crate) fn owner_keys(&self, owner: u32) -> Result<&OwnerDirectoryEntry> {
        self.owners.get(&owner).ok_or(Error::OwnerUnavailable(owner as usize))
    }

    pub(crate) fn record_owner(&self, record: u64) -> Result<u32> {
        self.uploads
            .get(&record)
            .map(|(o, _)| *o)
            .ok_or_else(|| Error::protocol(format!("record {record} was never uploaded")))
    }
}

pub struct Owner {
    pub(crate) id: PartyId,
    pub(crate) sk: PaillierPrivateKey,
    pub(crate) rsa: CloudRsaKeyMaterial,
    pub(crate) directory: BTreeMap<PartyId, PaillierPublicKey>,
    pub(crate) rng: ChaCha20Rng,
    nonce_counter: u64,
    pub(crate) data: OwnerData,
    pub(crate) sum_inputs: BTreeMap<String, Vec<BigInt>>,
    pub(crate) exp_cache: BTreeMap<u64, (Vec<BigUint>, Vec<BigUint>)>,
}

pub(crate) struct Reply {
    pub body: Payload,
    pub scale: u32,
    pub taint: Taint,
}

impl Reply {
    pub fn cipher(body: Payload, scale: u32) -> Self {
        Reply { body, scale, taint: Taint::Cipher }
    }
}

impl Owner {
    pub fn id(&self) -> PartyId {
        self.id
    }

    pub fn pk(&self) -> &PaillierPublicKey {
        self.sk.public()
    }

    pub fn data(&self) -> &OwnerData {
        &self.data
    }

    pub(crate) fn next_nonce(&mut self) -> NonceId {
        self.nonce_counter += 1;
        format!("O{}-{}", self.id.index, self.nonce_counter)
    }

    pub(crate) fn record(&self, record: u64) -> Result<&OwnerRecord> {
        self.data
            .records
            .iter()
            .find(|r| r.id == record)
            .ok_or_else(|| Error::protocol(format!("{} does not hold record {record}", self.id)))
    }

    /// Secret values this owner contributes to a summation family.
    pub fn set_sum_input(&mut self, family: &str, values: Vec<BigInt>) {
        self.sum_inputs.insert(family.to_string(), values);
    }

    fn handle(&mut self, env: &Envelope) -> Result<(Reply, Vec<Disclosure>)> {
        let mut seen = Vec::new();
        let reply = match &env.body {
            Payload::PowRequest { record } => crate::blocks::pow::owner_pow_vectors(self, *record)?,
            Payload::RsaConvert { components, out_scale } => {
                crate::blocks::convert::owner_rsa_convert(self, env.rt, components, *out_scale, &mut seen)?
            }
            Payload::SigmoidRequest { record, ct, in_scale, out_scale } => {
                crate::protocols::lr::owner_sigmoid(self, env.rt, *record, ct, *in_scale, *out_scale, &mut seen)?
            }
            Payload::KeySwitch { target, cts } => {
                crate::blocks::convert::owner_key_switch(self, env.rt, *target, cts, env.scale, &mut seen)?
            }
            Payload::SignRequest { ct } => crate::blocks::sign::owner_sign(self, env.rt, ct, &mut seen)?,
            Payload::SumRequest { family } => crate::blocks::sum::owner_sum_share(self, family)?,
            other => return Err(Error::protocol(format!("{} cannot handle {}", self.id, other.kind()))),
        };
        Ok((reply, seen))
    }

    /// Encrypts x̂·y for every held record under this owner's key.
    fn upload_records(&mut self) -> Result<Vec<UploadRecord>> {
        let mut jobs = Vec::new();
        for r in &self.data.records {
            for x in &r.x_hat {
                let m = encoding::to_residue(&(x * r.label), self.sk.public().n())?;
                jobs.push((m, self.sk.public().sample_nonce(&mut self.rng)));
            }
        }
        let sk = &self.sk;
        let cts: Vec<_> = jobs.par_iter().map(|(m, r)| sk.encrypt_with_nonce(m, r)).collect::<Result<_>>()?;
        let mut it = cts.into_iter();
        Ok(self
            .data
            .records
            .iter()
            .map(|r| UploadRecord { record: r.id, xy: it.by_ref().take(r.x_hat.len()).collect() })
            .collect())
    }
}

/// Aggregate wall-clock time, reported but never asserted.
#[derive(Clone, Copy, Debug, Default)]
pub struct WallClock {
    pub total: Duration,
    pub owners: Duration,
}

pub struct Session {
    pub id: String,
    config: SessionConfig,
    pub(crate) demander: Demander,
    pub(crate) owners: Vec<Owner>,
    pub(crate) transcript: Transcript,
    channels: Channels,
    pub faults: Faults,
    next_rt: u64,
    started: Instant,
    owner_time: Duration,
}

impl Session {
    /// Generates keys for every party and runs the key exchange.
    pub fn open(config: SessionConfig) -> Result<Self> {
        let keys = PartyKeys::generate_all(config.key_bits, config.seed, config.n_owners)?;
        Self::open_with_keys(config, keys)
    }

    /// `keys[0]` belongs to the demander, `keys[i]` to owner i.
    pub fn open_with_keys(config: SessionConfig, keys: Vec<PartyKeys>) -> Result<Self> {
        if config.n_owners < 1 {
            return Err(Error::Config("a session needs at least one owner".into()));
        }
        if keys.len() != config.n_owners as usize + 1 {
            return Err(Error::Config(format!("expected {} key sets, got {}", config.n_owners + 1, keys.len())));
        }
        let mut keys = keys.into_iter();
        let dk = keys.next().expect("demander keys");
        let sid = seed::derive_seed(config.seed, "session");
        let id = format!("s-{}", sid[..6].iter().map(|b| format!("{b:02x}")).collect::<String>());
        let demander = Demander {
            sk: dk.paillier,
            owners: BTreeMap::new(),
            uploads: BTreeMap::new(),
            rng: seed::stream(config.seed, "demander"),
            nonce_counter: 0,
            last_sign_nonce: None,
        };
        let mut owners = Vec::new();
        for (i, k) in keys.enumerate() {
            let id = PartyId::owner(i as u32 + 1);
            owners.push(Owner {
                id,
                sk: k.paillier,
                rsa: k.cloudrsa.ok_or_else(|| Error::Config(format!("{id} has no Cloud-RSA key")))?,
                directory: BTreeMap::new(),
                rng: seed::stream(config.seed, &format!("{id}")),
                nonce_counter: 0,
                data: OwnerData::default(),
                sum_inputs: BTreeMap::new(),
                exp_cache: BTreeMap::new(),
            });
        }
        let mut s = Session {
            id,
            transcript: Transcript::new(config.latency_ms),
            config,
            demander,
            owners,
            channels: Channels::default(),
            faults: Faults::default(),
            next_rt: 0,
            started: Instant::now(),
            owner_time: Duration::ZERO,
        };
        s.exchange_keys()?;
        Ok(s)
    }

    fn exchange_keys(&mut self) -> Result<()> {
        for i in 0..self.owners.len() {
            let o = &self.owners[i];
            let body = Payload::KeyShare { paillier_n: o.pk().n().clone(), cloudrsa: o.rsa.share() };
            let from = o.id;
            let env = self.one_way(from, PartyId::DEMANDER, body, 0, Taint::Public)?;
            if let Payload::KeyShare { paillier_n, cloudrsa } = env.body {
                let entry = OwnerDirectoryEntry { paillier: PaillierPublicKey::new(paillier_n), cloudrsa };
                self.demander.owners.insert(from.index, entry);
            }
        }
        let mut entries = vec![DirectoryEntry { party: PartyId::DEMANDER, paillier_n: self.demander.pk().n().clone() }];
        for (&i, e) in &self.demander.owners {
            entries.push(DirectoryEntry { party: PartyId::owner(i), paillier_n: e.paillier.n().clone() });
        }
        for i in 0..self.owners.len() {
            let to = self.owners[i].id;
            let env = self.one_way(PartyId::DEMANDER, to, Payload::KeyDirectory { entries: entries.clone() }, 0, Taint::Public)?;
            if let Payload::KeyDirectory { entries } = env.body {
                self.owners[i].directory =
                    entries.into_iter().map(|e| (e.party, PaillierPublicKey::new(e.paillier_n))).collect();
            }
        }
        Ok(())
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn n_owners(&self) -> u32 {
        self.owners.len() as u32
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn demander(&self) -> &Demander {
        &self.demander
    }

    pub fn demander_pk(&self) -> &PaillierPublicKey {
        self.demander.pk()
    }

    pub fn owner(&self, index: u32) -> &Owner {
        &self.owners[index as usize - 1]
    }

    pub fn owner_mut(&mut self, index: u32) -> &mut Owner {
        &mut self.owners[index as usize - 1]
    }

    /// Owner's public Paillier key as known to the demander.
    pub fn owner_pk(&self, index: u32) -> &PaillierPublicKey {
        &self.demander.owners[&index].paillier
    }

    pub fn owner_rsa(&self, index: u32) -> &CloudRsaPublic {
        &self.demander.owners[&index].cloudrsa
    }

    /// Secret keys, exposed for inspection by tests and benchmarks only.
    pub fn owner_secret(&self, index: u32) -> (&PaillierPrivateKey, &CloudRsaKeyMaterial) {
        let o = self.owner(index);
        (&o.sk, &o.rsa)
    }

    pub fn demander_secret(&self) -> &PaillierPrivateKey {
        &self.demander.sk
    }

    pub fn wall_clock(&self) -> WallClock {
        WallClock { total: self.started.elapsed(), owners: self.owner_time }
    }

    pub fn mark_iteration(&mut self) {
        self.transcript.mark_iteration();
    }

    pub fn set_owner_data(&mut self, owner: u32, data: OwnerData) {
        self.owner_mut(owner).data = data;
        self.owner_mut(owner).exp_cache.clear();
    }

    /// Every owner uploads encrypted x̂·y for its records (one-way, setup).
    pub fn upload_training_data(&mut self) -> Result<()> {
        for i in 0..self.owners.len() {
            let t = Instant::now();
            let records = self.owners[i].upload_records()?;
            self.owner_time += t.elapsed();
            let from = self.owners[i].id;
            let env = self.one_way(from, PartyId::DEMANDER, Payload::Upload { scale: 2, records }, 2, Taint::Cipher)?;
            if let Payload::Upload { records, scale } = env.body {
                let pk = self.demander.owners[&from.index].paillier.clone();
                for r in records {
                    let xy = r
                        .xy
                        .into_iter()
                        .map(|c| {
                            pk.validate(&c)?;
                            Ok(Scaled::new(c, scale))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    self.demander.uploads.insert(r.record, (from.index, xy));
                }
            }
        }
        Ok(())
    }

    fn check_open(&self, owner: Option<u32>) -> Result<()> {
        if let Some(r) = self.transcript.aborted() {
            return Err(Error::Aborted(r.to_string()));
        }
        if let Some(o) = owner {
            if o == 0 || o as usize > self.owners.len() {
                return Err(Error::protocol(format!("no owner {o}")));
            }
        }
        Ok(())
    }

    fn abort(&mut self, e: Error) -> Error {
        self.transcript.mark_aborted(&e.to_string());
        e
    }

    fn transmit(&mut self, from: PartyId, to: PartyId, rt: u64, body: Payload, scale: u32, taint: Taint) -> Result<Envelope> {
        let seq = self.channels.next_seq(from, to);
        let env = Envelope { session: self.id.clone(), seq, from, to, rt, scale, taint, body };
        let line = self.transcript.record(&env);
        self.channels.push(from, to, line.into_bytes());
        let bytes = self.channels.pop(from, to).expect("just queued");
        Envelope::from_wire(&bytes).map_err(Error::from)
    }

    fn one_way(&mut self, from: PartyId, to: PartyId, body: Payload, scale: u32, taint: Taint) -> Result<Envelope> {
        self.check_open(None)?;
        self.transmit(from, to, 0, body, scale, taint)
    }

    /// One request-reply with a single owner; one interaction.
    pub(crate) fn call(&mut self, owner: u32, body: Payload, scale: u32, taint: Taint) -> Result<Envelope> {
        let mut r = self.call_all(vec![(owner, body, scale, taint)])?;
        Ok(r.pop().expect("one reply"))
    }

    /// Requests to distinct owners answered in parallel; one interaction.
    pub(crate) fn call_all(&mut self, reqs: Vec<(u32, Payload, u32, Taint)>) -> Result<Vec<Envelope>> {
        self.check_open(None)?;
        for (o, ..) in &reqs {
            self.check_open(Some(*o))?;
            if self.faults.offline_owner == Some(*o) {
                return Err(self.abort(Error::OwnerUnavailable(*o as usize)));
            }
        }
        self.next_rt += 1;
        let rt = self.next_rt;
        let mut delivered = Vec::with_capacity(reqs.len());
        for (o, body, scale, taint) in reqs {
            let env = self.transmit(PartyId::DEMANDER, PartyId::owner(o), rt, body, scale, taint)?;
            delivered.push((o, env));
        }
        let mut by_owner: BTreeMap<u32, Envelope> = BTreeMap::new();
        for (o, env) in &delivered {
            if by_owner.insert(*o, env.clone()).is_some() {
                return Err(Error::protocol(format!("owner {o} addressed twice in one round")));
            }
        }
        let run = |owner: &mut Owner| -> Option<(u32, Duration, Result<(Reply, Vec<Disclosure>)>)> {
            let env = by_owner.get(&owner.id.index)?;
            let t = Instant::now();
            let r = owner.handle(env);
            Some((owner.id.index, t.elapsed(), r))
        };
        let results: Vec<_> = if self.config.parallel && delivered.len() > 1 {
            self.owners.par_iter_mut().filter_map(run).collect()
        } else {
            self.owners.iter_mut().filter_map(run).collect()
        };
        let mut handled: BTreeMap<u32, (Reply, Vec<Disclosure>)> = BTreeMap::new();
        for (o, dt, r) in results {
            self.owner_time += dt;
            match r {
                Ok(v) => {
                    handled.insert(o, v);
                }
                Err(e) => return Err(self.abort(e)),
            }
        }
        let mut replies = Vec::with_capacity(delivered.len());
        for (o, _) in delivered {
            let (reply, seen) = handled.remove(&o).expect("handled");
            for d in seen {
                self.transcript.disclose(d);
            }
            let env = self.transmit(PartyId::owner(o), PartyId::DEMANDER, rt, reply.body, reply.scale, reply.taint)?;
            replies.push(env);
        }
        self.transcript.complete_round_trip();
        Ok(replies)
    }

    pub(crate) fn disclose(&mut self, party: PartyId, label: &str, values: Vec<BigInt>) {
        let rt = self.next_rt;
        self.transcript.disclose(Disclosure { party, rt, label: label.to_string(), values });
    }
}

pub(crate) fn disclosure(owner: &Owner, rt: u64, label: &str, values: Vec<BigInt>) -> Disclosure {
    Disclosure { party: owner.id, rt, label: label.to_string(), values }
}
