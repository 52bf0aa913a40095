//! `heda run`: one protocol over a dataset in the simulator.

use std::path::{Path, PathBuf};
use std::time::Instant;

use heda_core::data::{
    linear_records, load_csv, nb_records, partition, split, DatasetSchema, LabelCoding, Normalizer, RawTable,
};
use heda_core::encoding::{budget_check_lr, min_key_digits, FixedPoint};
use heda_core::net::{audit_transcript, AuditReport, Transcript};
use heda_core::oracle::{accuracy, plain_lr_sgd, plain_nb, plain_svm_sgd, round4, OracleMode};
use heda_core::party::{Faults, PartyKeys, Session, SessionConfig};
use heda_core::phe::check_key_bits;
use heda_core::protocols::metrics::OracleComparison;
use heda_core::protocols::{lr_train, nb_train, predict_linear, setup_linear, svm_train, Metrics, NbModel, Protocol, TrainConfig};
use log::info;
use num_bigint::BigInt;

use crate::CliError;

pub const DEFAULT_ITERS: u32 = 1000;
pub const DEFAULT_LATENCY_MS: u64 = 30;
pub const DEFAULT_TEST_FRACTION: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub protocol: Protocol,
    pub dataset: PathBuf,
    /// Defaults to `schema.json` beside the dataset.
    pub schema: Option<PathBuf>,
    pub owners: u32,
    pub key_bits: u64,
    pub iters: u32,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub latency_ms: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub test_fraction: f64,
    pub quantized_oracle: bool,
}

impl RunSpec {
    pub fn new(protocol: Protocol, dataset: impl Into<PathBuf>) -> Self {
        RunSpec {
            protocol,
            dataset: dataset.into(),
            schema: None,
            owners: 5,
            key_bits: 2048,
            iters: DEFAULT_ITERS,
            lambda: None,
            alpha: None,
            latency_ms: DEFAULT_LATENCY_MS,
            seed: 0,
            out: None,
            test_fraction: DEFAULT_TEST_FRACTION,
            quantized_oracle: false,
        }
    }

    pub fn schema_path(&self) -> PathBuf {
        self.schema.clone().unwrap_or_else(|| self.dataset.with_file_name("schema.json"))
    }

    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let mut cfg = match self.protocol {
            Protocol::Svm => TrainConfig::svm(self.iters, self.seed, self.key_bits),
            _ => TrainConfig::lr(self.iters, self.seed, self.key_bits),
        };
        let two = |name: &str, v: f64| {
            FixedPoint::encode(v, 2).map_err(|e| CliError::Invalid(format!("--{name}: {e}")))
        };
        if let Some(l) = self.lambda {
            cfg.lambda = two("lambda", l)?;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = two("alpha", a)?;
        }
        cfg.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    /// Checks everything that can be checked before any key is generated.
    pub fn validate(&self, n_features: usize) -> Result<(), CliError> {
        if check_key_bits(self.key_bits).is_err() || min_key_digits(self.key_bits).is_none() {
            return Err(CliError::Invalid(format!(
                "unsupported --key-bits {}: the digit budget (sum|theta| + d - 1) * 2 < floor(log10 N) is only \
                 tabulated for 512, 1024, 2048 and 4096-bit moduli",
                self.key_bits
            )));
        }
        if self.owners == 0 {
            return Err(CliError::Invalid("--owners must be at least 1".into()));
        }
        if self.protocol == Protocol::Nb && self.owners < 2 {
            return Err(CliError::Invalid("naive Bayes needs at least two owners for secure summation".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CliError::Invalid(format!("--test-fraction {} outside (0, 1)", self.test_fraction)));
        }
        if self.protocol != Protocol::Nb {
            let cfg = self.train_config()?;
            if self.protocol == Protocol::Lr {
                budget_check_lr(n_features + 1, cfg.theta_l1_bound, self.key_bits)?;
            }
        }
        Ok(())
    }
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub metrics: Metrics,
    pub transcript: Transcript,
    pub audit: AuditReport,
    /// θ mantissas after each iteration (linear protocols).
    pub trace: Vec<Vec<BigInt>>,
    pub oracle_trace: Option<Vec<Vec<BigInt>>>,
    pub nb_model: Option<NbModel>,
    pub oracle_nb_model: Option<NbModel>,
}

/// Train and test tables, normalized on the training part.
pub struct Prepared {
    pub train: RawTable,
    pub test: RawTable,
    pub norm: Normalizer,
}

pub fn prepare(spec: &RunSpec) -> Result<Prepared, CliError> {
    let schema_path = spec.schema_path();
    let schema = DatasetSchema::from_json_file(&schema_path)
        .map_err(|e| CliError::Invalid(format!("schema {}: {e}", schema_path.display())))?;
    if !spec.dataset.is_file() {
        return Err(CliError::Invalid(format!("dataset {} not found", spec.dataset.display())));
    }
    let table = load_csv(&spec.dataset, &schema)?;
    info!("{}: {} rows read, {} dropped for missing values", schema.name, table.total, table.dropped);
    let (tr, te) = split(table.len(), spec.test_fraction, spec.seed)?;
    let (train, test) = (table.subset(&tr), table.subset(&te));
    let norm = Normalizer::fit(&train)?;
    Ok(Prepared { train, test, norm })
}

/// Runs the protocol and the audit. Keys may be supplied to skip keygen.
pub fn execute(spec: &RunSpec, faults: Faults, keys: Option<Vec<PartyKeys>>) -> Result<RunOutcome, CliError> {
    let data = prepare(spec)?;
    spec.validate(data.norm.ranges.len())?;
    let keys = match keys {
        Some(k) => k,
        None => PartyKeys::generate_all(spec.key_bits, spec.seed, spec.owners)?,
    };
    let mut config = SessionConfig::new(spec.owners, spec.key_bits, spec.seed);
    config.latency_ms = spec.latency_ms;
    let started = Instant::now();
    let mut session = Session::open_with_keys(config, keys)?;
    session.faults = faults;
    let owners = spec.owners as usize;
    let parts = partition(data.train.len(), owners, spec.seed, None)?;

    let mut trace = Vec::new();
    let mut oracle_trace = None;
    let (mut nb_model, mut oracle_nb_model) = (None, None);
    let (acc, oracle) = match spec.protocol {
        Protocol::Lr | Protocol::Svm => {
            let coding = if spec.protocol == Protocol::Svm { LabelCoding::Signed } else { LabelCoding::Binary };
            let recs = linear_records(&data.train, &data.norm, coding)?;
            let test = linear_records(&data.test, &data.norm, coding)?;
            let cfg = spec.train_config()?;
            setup_linear(&mut session, &recs, &parts)?;
            let out = if spec.protocol == Protocol::Svm { svm_train(&mut session, &cfg)? } else { lr_train(&mut session, &cfg)? };
            let theta = out.model.mantissas();
            let acc = linear_accuracy(&theta, &test)?;
            trace = out.trace;
            let oracle = if spec.quantized_oracle {
                let q = if spec.protocol == Protocol::Svm {
                    plain_svm_sgd(&recs, &cfg, OracleMode::QUANTIZED)?
                } else {
                    plain_lr_sgd(&recs, &cfg, OracleMode::QUANTIZED)?
                };
                let qt = q.mantissas.unwrap_or_default();
                let first_divergence = trace.iter().zip(&qt).position(|(a, b)| a != b).map(|i| i as u64 + 1);
                let identical = first_divergence.is_none() && trace.len() == qt.len();
                let oracle_acc = linear_accuracy(qt.last().map(Vec::as_slice).unwrap_or(&[]), &test)?;
                oracle_trace = Some(qt);
                Some(OracleComparison { accuracy: round4(oracle_acc), trace_identical: identical, first_divergence })
            } else {
                None
            };
            (acc, oracle)
        }
        Protocol::Nb => {
            let (schema, recs) = nb_records(&data.train, &data.norm)?;
            let (_, test) = nb_records(&data.test, &data.norm)?;
            let owner_recs: Vec<_> = parts.iter().map(|idx| idx.iter().map(|&i| recs[i].clone()).collect()).collect();
            let model = nb_train(&mut session, &schema, &owner_recs, false)?;
            let acc = nb_accuracy(&model, &test)?;
            let oracle = if spec.quantized_oracle {
                let pooled = plain_nb(&recs, &schema, false)?;
                let cmp = OracleComparison {
                    accuracy: round4(nb_accuracy(&pooled, &test)?),
                    trace_identical: pooled.stats == model.stats,
                    first_divergence: None,
                };
                oracle_nb_model = Some(pooled);
                Some(cmp)
            } else {
                None
            };
            nb_model = Some(model);
            (acc, oracle)
        }
    };
    let wall = session.wall_clock();
    let transcript = session.into_transcript();
    let audit = audit_transcript(&transcript);
    let c = transcript.counters();
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    let owner_ms = wall.owners.as_secs_f64() * 1e3;
    let metrics = Metrics {
        protocol: spec.protocol.to_string(),
        dataset: data.train.schema.name.clone(),
        n_owners: spec.owners,
        key_bits: spec.key_bits,
        iters: if spec.protocol == Protocol::Nb { 0 } else { spec.iters },
        accuracy: round4(acc),
        interactions: c.interactions,
        bytes: c.bytes,
        sim_latency_ms: c.latency_ms,
        wall_ms_demander: (total_ms - owner_ms).max(0.0),
        wall_ms_owner_total: owner_ms,
        seed: spec.seed,
        oracle,
    };
    Ok(RunOutcome { metrics, transcript, audit, trace, oracle_trace, nb_model, oracle_nb_model })
}

fn linear_accuracy(theta: &[BigInt], test: &[heda_core::party::OwnerRecord]) -> Result<f64, CliError> {
    let preds = test.iter().map(|r| predict_linear(theta, &r.x_hat)).collect::<heda_core::Result<Vec<_>>>()?;
    let labels: Vec<bool> = test.iter().map(|r| r.label == 1).collect();
    Ok(accuracy(&preds, &labels)?)
}

fn nb_accuracy(model: &NbModel, test: &[heda_core::protocols::NbRecord]) -> Result<f64, CliError> {
    let preds = test.iter().map(|r| model.predict(&r.values)).collect::<heda_core::Result<Vec<_>>>()?;
    let labels: Vec<usize> = test.iter().map(|r| r.class).collect();
    Ok(accuracy(&preds, &labels)?)
}

pub fn transcript_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".transcript.jsonl");
    PathBuf::from(s)
}

/// Runs, audits, writes the metrics and transcript, and fails on a
/// non-passing audit. The transcript is written even when the audit fails.
pub fn cmd_run(spec: &RunSpec) -> Result<RunOutcome, CliError> {
    cmd_run_with(spec, Faults::default(), None)
}

pub fn cmd_run_with(spec: &RunSpec, faults: Faults, keys: Option<Vec<PartyKeys>>) -> Result<RunOutcome, CliError> {
    let out = execute(spec, faults, keys)?;
    out.metrics.validate()?;
    if let Some(path) = &spec.out {
        out.transcript.export_jsonl(&transcript_path(path))?;
        if out.audit.passed() {
            std::fs::write(path, serde_json::to_string_pretty(&out.metrics)? + "\n")?;
        }
    }
    if !out.audit.passed() {
        return Err(CliError::Audit(out.audit.to_string()));
    }
    Ok(out)
}
