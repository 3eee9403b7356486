//! Config-driven entry points behind the `graphon-gnn` binary.
//!
//! Every subcommand reads one JSON config with a strict schema (unknown
//! keys are rejected and named), resolves the master seed (`--seed`
//! overrides the config's `seed` key), and hashes the canonicalized
//! config. Outputs land under `<out>/<command>-<hash prefix>` next to a
//! `manifest.json` describing the run. All CSV bytes are a pure function
//! of config and seed, independent of thread count; wall-clock timing
//! appears only in the manifest.

mod commands;

use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The eight subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Sweep the step-object approximation bounds across graph sizes.
    GraphonCheck,
    /// Dump eigenvalues and band summaries of sampled shift operators.
    Spectra,
    /// Teacher-student training on a growing graph sequence.
    TrainTs,
    /// Gradient-distance sweep against a large reference graph.
    GradDist,
    /// Generate an expert imitation dataset for the flocking task.
    FlockGen,
    /// Train a flocking policy by imitation while the swarm grows.
    FlockTrain,
    /// Evaluate a trained policy against the expert on shared episodes.
    FlockEval,
    /// Merge CSVs from earlier runs into one tidy long-format table.
    Report,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::GraphonCheck => "graphon-check",
            CommandKind::Spectra => "spectra",
            CommandKind::TrainTs => "train-ts",
            CommandKind::GradDist => "grad-dist",
            CommandKind::FlockGen => "flock-gen",
            CommandKind::FlockTrain => "flock-train",
            CommandKind::FlockEval => "flock-eval",
            CommandKind::Report => "report",
        }
    }
}

/// Invocation-level options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config_path: PathBuf,
    /// Overrides the config's `seed` key when set.
    pub seed: Option<u64>,
    /// Parent directory run directories are created under.
    pub out_dir: PathBuf,
    /// Worker-pool size. Affects speed only; outputs never depend on it.
    pub threads: Option<usize>,
}

/// What [`execute`] hands back on success.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub config_hash: String,
    pub seed: u64,
    /// File names written into `run_dir`, manifest excluded.
    pub outputs: Vec<String>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    code_version: &'a str,
    started_unix_ms: u128,
    ended_unix_ms: u128,
    outputs: &'a [String],
}

/// Process exit code for an error: 2 for config problems (syntax, unknown
/// keys, invalid values), 1 for everything that fails at run time.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Canonical form of a JSON config: objects with sorted keys, no
/// whitespace. Parsing the output and canonicalizing again is a fixpoint.
pub fn canonical_json(value: &Value) -> String {
    serde_json::to_string(value).expect("JSON values always serialize")
}

/// Hex SHA-256 digest of the canonical config text.
pub fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Runs one subcommand end to end: load config, resolve the seed, hash,
/// create the run directory, dispatch, write the manifest.
pub fn execute(kind: CommandKind, options: &RunOptions) -> Result<RunSummary> {
    let text = fs::read_to_string(&options.config_path)?;
    let mut value: Value = serde_json::from_str(&text)?;
    let obj =
        value.as_object_mut().ok_or_else(|| Error::config("config root must be a JSON object"))?;
    let seed = match options.seed {
        Some(s) => s,
        None => match obj.get("seed") {
            None => 0,
            Some(v) => v.as_u64().ok_or_else(|| {
                Error::config(format!("seed must be an unsigned integer, got {v}"))
            })?,
        },
    };
    // The effective seed always lands in the hashed config, so runs that
    // behave differently never share a directory.
    obj.insert("seed".to_string(), Value::from(seed));

    let canonical = canonical_json(&value);
    let hash = config_hash(&canonical);
    let run_dir = options.out_dir.join(format!("{}-{}", kind.name(), &hash[..16]));
    fs::create_dir_all(&run_dir)?;

    let started = now_ms();
    let body = || -> Result<Vec<String>> {
        match kind {
            CommandKind::GraphonCheck => commands::graphon_check(&value, &run_dir),
            CommandKind::Spectra => commands::spectra(&value, &run_dir),
            CommandKind::TrainTs => commands::train_ts(&value, &run_dir),
            CommandKind::GradDist => commands::grad_dist(&value, &run_dir),
            CommandKind::FlockGen => commands::flock_gen(&value, &run_dir),
            CommandKind::FlockTrain => commands::flock_train(&value, &run_dir),
            CommandKind::FlockEval => commands::flock_eval(&value, &run_dir),
            CommandKind::Report => commands::report(&value, &run_dir),
        }
    };
    let outputs = match options.threads {
        None => body()?,
        Some(0) => return Err(Error::config("threads must be >= 1")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::config(format!("cannot build a {t}-thread pool: {e}")))?;
            pool.install(body)?
        }
    };
    let ended = now_ms();

    let manifest = RunManifest {
        command: kind.name(),
        config_hash: &hash,
        seed,
        code_version: env!("CARGO_PKG_VERSION"),
        started_unix_ms: started,
        ended_unix_ms: ended,
        outputs: &outputs,
    };
    let mut manifest_text = serde_json::to_string_pretty(&manifest)?;
    manifest_text.push('\n');
    fs::write(run_dir.join("manifest.json"), manifest_text)?;

    Ok(RunSummary { run_dir, config_hash: hash, seed, outputs })
}
