//! Evaluation reports and their serialized forms (JSON-lines and flat CSV).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{MetricsError, Result};

/// Aggregate of one metric across seeds. `std` is present only with ≥2 seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
}

impl MetricSummary {
    /// Aggregate per-seed values; ±∞ sentinels are carried through the mean
    /// and flagged by the caller.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() >= 2 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (n - 1.0);
            Some(var.sqrt())
        } else {
            None
        };
        Self { mean, std }
    }
}

/// One evaluated (task, method, nfe) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub method: String,
    pub nfe: usize,
    /// metric name → aggregate; BTreeMap keeps emission order deterministic
    pub metrics: BTreeMap<String, MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lead_time_rmse: Option<Vec<f64>>,
    pub seeds: Vec<u64>,
}

impl EvalReport {
    pub fn to_jsonl_line(&self) -> Result<String> {
        serde_json::to_string(self)
            .map_err(|e| MetricsError::InvalidInput(format!("report encode: {e}")))
    }

    pub fn csv_header() -> &'static str {
        "task,method,nfe,metric,mean,std,seeds"
    }

    /// One CSV row per metric.
    pub fn csv_rows(&self) -> Vec<String> {
        let seeds = self
            .seeds
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";");
        self.metrics
            .iter()
            .map(|(name, m)| {
                format!(
                    "{},{},{},{},{},{},{}",
                    self.task,
                    self.method,
                    self.nfe,
                    name,
                    m.mean,
                    m.std.map(|s| s.to_string()).unwrap_or_default(),
                    seeds
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_std_only_with_two_seeds() {
        assert!(MetricSummary::from_values(&[1.0]).std.is_none());
        let m = MetricSummary::from_values(&[1.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std.unwrap() - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_and_jsonl_are_deterministic() {
        let mut metrics = BTreeMap::new();
        metrics.insert("rmse".into(), MetricSummary::from_values(&[0.5, 0.7]));
        metrics.insert("energy_score".into(), MetricSummary::from_values(&[0.1]));
        let r = EvalReport {
            task: "toy".into(),
            method: "sequential".into(),
            nfe: 1,
            metrics,
            lead_time_rmse: None,
            seeds: vec![0, 1],
        };
        assert_eq!(r.to_jsonl_line().unwrap(), r.to_jsonl_line().unwrap());
        let rows = r.csv_rows();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].starts_with("toy,sequential,1,energy_score,"));
        assert!(rows[1].starts_with("toy,sequential,1,rmse,"));
    }
}
