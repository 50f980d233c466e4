//! Per-epoch wall-clock benchmarks of identity learning across qubit
//! counts, batch sizes and model kinds.

mod report;

use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};

pub use report::{emit_report, format_sci, ReportFormat};

use crate::error::{Error, Result};
use crate::model::{ModelRegistry, ModelSpec, ANSATZ, FULL_UNITARY};
use crate::optim::{train_model, IdentityTask, TrainConfig};
use crate::seed::derive_seed;

/// Caps the qubit count of matching cells; unset filters match anything.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellLimit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    pub max_qubits: usize,
}

impl CellLimit {
    fn blocks(&self, kind: &str, batch: usize, n_qubits: usize) -> bool {
        self.model_kind.as_deref().is_none_or(|k| k == kind)
            && self.batch_size.is_none_or(|b| b == batch)
            && n_qubits > self.max_qubits
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub qubit_range: Vec<usize>,
    pub epochs: usize,
    pub dataset_size: usize,
    pub batch_sizes: Vec<usize>,
    pub model_kinds: Vec<String>,
    pub seed: u64,
    pub learning_rate: f64,
    /// Cells beyond these caps are reported as skipped.
    pub limits: Vec<CellLimit>,
    /// Cells whose estimated working set exceeds this are skipped.
    pub memory_budget_mb: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            qubit_range: (1..=10).collect(),
            epochs: 10,
            dataset_size: 32,
            batch_sizes: vec![32, 1],
            model_kinds: vec![FULL_UNITARY.to_string(), ANSATZ.to_string()],
            seed: 0,
            learning_rate: 0.01,
            limits: vec![
                CellLimit {
                    model_kind: Some(ANSATZ.to_string()),
                    batch_size: None,
                    max_qubits: 8,
                },
                CellLimit {
                    model_kind: None,
                    batch_size: Some(1),
                    max_qubits: 8,
                },
            ],
            memory_budget_mb: 4096,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self, registry: &ModelRegistry) -> Result<()> {
        let bad = |what: String| Err(Error::Config(format!("bench config: {what}")));
        if self.qubit_range.is_empty() || self.qubit_range.contains(&0) {
            return bad("qubit_range must be non-empty and positive".into());
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return bad("batch_sizes must be non-empty and positive".into());
        }
        if self.epochs == 0 || self.dataset_size == 0 {
            return bad("epochs and dataset_size must be positive".into());
        }
        if self.model_kinds.is_empty() {
            return bad("model_kinds must be non-empty".into());
        }
        if let Some(k) = self.model_kinds.iter().find(|k| !registry.contains(k)) {
            return bad(format!("unknown model kind `{k}`"));
        }
        Ok(())
    }

    fn train_config(&self, batch_size: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Skipped,
    Failed,
}

/// One benchmark cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_qubits: usize,
    pub model_kind: String,
    pub batch_size: usize,
    pub dataset_size: usize,
    pub n_params: usize,
    pub status: CellStatus,
    /// Why the cell was skipped or failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Wall-clock seconds of each timed epoch.
    pub epoch_seconds: Vec<f64>,
    pub mean_epoch_seconds: Option<f64>,
    /// Unbiased sample standard deviation.
    pub std_epoch_seconds: Option<f64>,
}

impl BenchRow {
    /// `(kind, batch, dataset)` column this row belongs to.
    pub fn config_key(&self) -> (String, usize, usize) {
        (self.model_kind.clone(), self.batch_size, self.dataset_size)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub epochs: usize,
    pub threads: usize,
    pub backend: String,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn empty() -> Self {
        BenchReport {
            epochs: 0,
            threads: crate::worker_threads(),
            backend: "cpu".into(),
            rows: Vec::new(),
        }
    }

    pub fn row(&self, n_qubits: usize, kind: &str, batch_size: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.n_qubits == n_qubits && r.model_kind == kind && r.batch_size == batch_size)
    }

    /// Mean epoch time of a completed cell.
    pub fn mean(&self, n_qubits: usize, kind: &str, batch_size: usize) -> Option<f64> {
        self.row(n_qubits, kind, batch_size)?.mean_epoch_seconds
    }
}

/// Sample mean and unbiased standard deviation (0 for one sample).
pub fn mean_std(samples: &[f64]) -> Option<(f64, f64)> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// Rough peak working set of one training step in bytes.
pub fn estimated_bytes(kind: &str, n_qubits: usize, batch_size: usize) -> f64 {
    let d = (1u64 << n_qubits.min(40)) as f64;
    let states = 16.0 * batch_size as f64 * d * 8.0;
    if kind == ANSATZ {
        // gate list of 4^n entries plus a handful of state copies
        states + 48.0 * d * d
    } else {
        // matrices of the exponential and its adjoint derivative
        states + 16.0 * 40.0 * d * d
    }
}

/// Runs every `(n, kind, batch)` cell sequentially: one untimed warmup
/// epoch, then `epochs` timed ones. All kinds and batch sizes at a given
/// `n` see the same data. A failing cell is recorded and the sweep goes on.
pub fn run_bench(cfg: &BenchConfig, registry: &ModelRegistry) -> Result<BenchReport> {
    cfg.validate(registry)?;
    let mut rows = Vec::new();
    for &n in &cfg.qubit_range {
        let task = IdentityTask::generate(n, cfg.dataset_size, derive_seed(cfg.seed, "bench-data"))?;
        for kind in &cfg.model_kinds {
            for &batch in &cfg.batch_sizes {
                rows.push(run_cell(cfg, registry, &task, kind, batch));
            }
        }
    }
    Ok(BenchReport {
        epochs: cfg.epochs,
        threads: crate::worker_threads(),
        backend: "cpu".into(),
        rows,
    })
}

fn run_cell(cfg: &BenchConfig, registry: &ModelRegistry, task: &IdentityTask, kind: &str, batch: usize) -> BenchRow {
    let n = task.n_qubits;
    let mut row = BenchRow {
        n_qubits: n,
        model_kind: kind.to_string(),
        batch_size: batch,
        dataset_size: cfg.dataset_size,
        n_params: 0,
        status: CellStatus::Skipped,
        note: None,
        epoch_seconds: Vec::new(),
        mean_epoch_seconds: None,
        std_epoch_seconds: None,
    };
    if let Some(limit) = cfg.limits.iter().find(|l| l.blocks(kind, batch, n)) {
        row.note = Some(format!("above the {}-qubit limit for this cell", limit.max_qubits));
        return row;
    }
    let budget = cfg.memory_budget_mb as f64 * 1024.0 * 1024.0;
    let need = estimated_bytes(kind, n, batch);
    if need > budget {
        row.note = Some(format!("estimated {:.0} MiB exceeds the memory budget", need / 1048576.0));
        return row;
    }

    let spec = ModelSpec::new(kind, n);
    let train = cfg.train_config(batch);
    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<(usize, Vec<f64>)> {
        let mut model = registry.build(&spec, derive_seed(cfg.seed, "bench-model"))?;
        let log = train_model(model.as_mut(), task, &train, 1)?;
        Ok((model.n_params(), log.epoch_times))
    }));
    match outcome {
        Ok(Ok((n_params, samples))) => {
            let (mean, std) = mean_std(&samples).unwrap_or((0.0, 0.0));
            row.n_params = n_params;
            row.status = CellStatus::Ok;
            row.epoch_seconds = samples;
            row.mean_epoch_seconds = Some(mean);
            row.std_epoch_seconds = Some(std);
        }
        Ok(Err(e)) => {
            row.status = CellStatus::Failed;
            row.note = Some(e.to_string());
        }
        Err(panic) => {
            row.status = CellStatus::Failed;
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            row.note = Some(format!("panicked: {msg}"));
        }
    }
    row
}
