use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::Serialize;

use super::EvalReport;
use crate::error::{Error, Result};

/// One line of the metrics stream. Training lines carry only the loss.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub run_id: String,
    pub epoch: usize,
    pub split: String,
    pub loss: f64,
    pub p_id: Option<f64>,
    pub r_id: Option<f64>,
    pub f1_id: Option<f64>,
    pub p_cls: Option<f64>,
    pub r_cls: Option<f64>,
    pub f1_cls: Option<f64>,
}

impl MetricsRecord {
    pub fn loss_only(run_id: &str, epoch: usize, split: &str, loss: f64) -> Self {
        MetricsRecord {
            run_id: run_id.to_string(),
            epoch,
            split: split.to_string(),
            loss,
            p_id: None,
            r_id: None,
            f1_id: None,
            p_cls: None,
            r_cls: None,
            f1_cls: None,
        }
    }

    pub fn from_report(run_id: &str, epoch: usize, split: &str, report: &EvalReport) -> Self {
        MetricsRecord {
            p_id: Some(report.identification.precision),
            r_id: Some(report.identification.recall),
            f1_id: Some(report.identification.f1),
            p_cls: Some(report.classification.precision),
            r_cls: Some(report.classification.recall),
            f1_cls: Some(report.classification.f1),
            ..Self::loss_only(run_id, epoch, split, report.loss)
        }
    }
}

/// Serialised JSON-lines sink. Lines are kept in memory and, when opened
/// on a path, also appended to that file.
#[derive(Debug, Default)]
pub struct MetricsSink {
    inner: Mutex<SinkState>,
}

#[derive(Debug, Default)]
struct SinkState {
    lines: Vec<String>,
    file: Option<(std::path::PathBuf, BufWriter<File>)>,
}

impl MetricsSink {
    pub fn memory() -> Self {
        Self::default()
    }

    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(MetricsSink {
            inner: Mutex::new(SinkState {
                lines: Vec::new(),
                file: Some((path.to_path_buf(), BufWriter::new(file))),
            }),
        })
    }

    pub fn emit(&self, record: &MetricsRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        let mut state = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((path, w)) = &mut state.file {
            writeln!(w, "{line}").map_err(|e| Error::io(path.clone(), e))?;
        }
        state.lines.push(line);
        Ok(())
    }

    pub fn lines(&self) -> Vec<String> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner()).lines.clone()
    }

    pub fn flush(&self) -> Result<()> {
        let mut state = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((path, w)) = &mut state.file {
            w.flush().map_err(|e| Error::io(path.clone(), e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_lines_have_null_metrics() {
        let sink = MetricsSink::memory();
        sink.emit(&MetricsRecord::loss_only("run", 1, "train", 2.5)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&sink.lines()[0]).unwrap();
        for key in ["run_id", "epoch", "split", "loss", "p_id", "r_id", "f1_id", "p_cls", "r_cls", "f1_cls"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["f1_cls"].is_null());
        assert_eq!(v["loss"], 2.5);
    }

    #[test]
    fn file_sink_writes_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let sink = MetricsSink::create(&path).unwrap();
        sink.emit(&MetricsRecord::loss_only("a", 1, "train", 1.0)).unwrap();
        sink.emit(&MetricsRecord::loss_only("a", 2, "train", 0.5)).unwrap();
        sink.flush().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().map(str::to_string).collect::<Vec<_>>(), sink.lines());
    }
}
