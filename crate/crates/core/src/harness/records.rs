use std::io::Write;

use crate::error::Result;

/// One learning trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    /// Seed that replays this trial alone.
    pub seed: u64,
    pub mu_base_digest: String,
    pub delta_digest: String,
    pub frontier_sizes: Vec<usize>,
    pub final_frontier_size: usize,
    pub fail: bool,
    /// `None` after FAIL.
    pub error: Option<f64>,
    /// `None` after FAIL or without exact evaluation.
    pub squared_loss: Option<f64>,
    /// Seconds; only recorded on request since it breaks reproducibility.
    pub wall_time: Option<f64>,
}

/// One coefficient-recovery trial.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryRecord {
    pub trial: usize,
    pub seed: u64,
    pub mu_base_digest: String,
    pub delta_digest: String,
    pub tree_size: usize,
    pub threshold: f64,
    pub tau: f64,
    pub needed_degree: f64,
    pub depth_cap: usize,
    pub heavy_size: usize,
    pub admissible_size: usize,
    pub final_frontier_size: usize,
    /// Heavy sets absent from the frontier.
    pub missing: usize,
    /// Frontier sets outside the admissible set.
    pub extra: usize,
    pub captured: bool,
    pub contained: bool,
    pub fail: bool,
    pub error: Option<f64>,
    pub squared_loss: Option<f64>,
}

/// A flat CSV row.
pub trait Record {
    fn header(&self) -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Record for TrialRecord {
    fn header(&self) -> Vec<&'static str> {
        let mut h = vec![
            "trial",
            "seed",
            "mu_base_digest",
            "delta_digest",
            "frontier_sizes",
            "final_frontier_size",
            "fail",
            "error",
            "squared_loss",
        ];
        if self.wall_time.is_some() {
            h.push("wall_time");
        }
        h
    }

    fn fields(&self) -> Vec<String> {
        let sizes: Vec<String> = self.frontier_sizes.iter().map(|s| s.to_string()).collect();
        let mut f = vec![
            self.trial.to_string(),
            self.seed.to_string(),
            self.mu_base_digest.clone(),
            self.delta_digest.clone(),
            sizes.join(";"),
            self.final_frontier_size.to_string(),
            self.fail.to_string(),
            opt(self.error),
            opt(self.squared_loss),
        ];
        if let Some(w) = self.wall_time {
            f.push(format!("{w:.6}"));
        }
        f
    }
}

impl Record for RecoveryRecord {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "trial",
            "seed",
            "mu_base_digest",
            "delta_digest",
            "tree_size",
            "threshold",
            "tau",
            "needed_degree",
            "depth_cap",
            "heavy_size",
            "admissible_size",
            "final_frontier_size",
            "missing",
            "extra",
            "captured",
            "contained",
            "fail",
            "error",
            "squared_loss",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.seed.to_string(),
            self.mu_base_digest.clone(),
            self.delta_digest.clone(),
            self.tree_size.to_string(),
            self.threshold.to_string(),
            self.tau.to_string(),
            self.needed_degree.to_string(),
            self.depth_cap.to_string(),
            self.heavy_size.to_string(),
            self.admissible_size.to_string(),
            self.final_frontier_size.to_string(),
            self.missing.to_string(),
            self.extra.to_string(),
            self.captured.to_string(),
            self.contained.to_string(),
            self.fail.to_string(),
            opt(self.error),
            opt(self.squared_loss),
        ]
    }
}

/// Writes `records` as CSV with a header row taken from the first record.
pub fn write_records<R: Record, W: Write>(records: &[R], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if let Some(first) = records.first() {
        out.write_record(first.header())?;
    }
    for r in records {
        out.write_record(r.fields())?;
    }
    out.flush()?;
    Ok(())
}
