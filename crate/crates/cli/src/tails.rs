//! The `tails` table: exact binomial tails next to their lower bounds.

use anyhow::Result;
use maxbound_core::extreme::BracketStatus;
use maxbound_core::tails::{binomial_tail, gaussian_tail, GaussianTailQuery};
use serde_json::Value;

use crate::config::SweepConfig;
use crate::report::{Cell, Table};
use crate::verify::Summary;

pub const TAILS_COLUMNS: &[&str] = &[
    "n",
    "k",
    "t",
    "x",
    "exact",
    "mckay",
    "stirling",
    "corollary",
    "gaussian_exact",
    "gaussian_lower",
    "status",
];

/// `Pr[B_n >= k]` for `k = ceil(n/2), ..., n` with each bound, and the
/// Gaussian tail at the standardized threshold `x = (2k - n) / sqrt(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub n: u64,
    pub k: u64,
    /// `k - n/2 + 1`, present when the corollary applies (`t >= 1`).
    pub t: Option<f64>,
    pub x: f64,
    pub exact: f64,
    pub mckay: f64,
    pub stirling: f64,
    pub corollary: Option<f64>,
    pub gaussian_exact: f64,
    pub gaussian_lower: f64,
    pub status: BracketStatus,
}

#[derive(Debug, Clone)]
pub struct TailsReport {
    pub rows: Vec<TailRow>,
    pub summary: Summary,
}

impl TailsReport {
    pub fn passed(&self) -> bool {
        self.summary.fail_count == 0
    }

    pub fn table(&self) -> Table {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Int(r.n),
                    Cell::Int(r.k),
                    r.t.into(),
                    Cell::Float(r.x),
                    Cell::Float(r.exact),
                    Cell::Float(r.mckay),
                    Cell::Float(r.stirling),
                    r.corollary.into(),
                    Cell::Float(r.gaussian_exact),
                    Cell::Float(r.gaussian_lower),
                    Cell::Text(r.status.as_str()),
                ]
            })
            .collect();
        Table {
            columns: TAILS_COLUMNS,
            rows,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.summary.to_json();
        v["records"] = self.table().json_records();
        v
    }
}

pub fn cmd_tails(config: &SweepConfig) -> Result<TailsReport> {
    let rel = config.tolerance.rel;
    let mut rows = Vec::new();
    for &n in &config.n_grid {
        for k in n.div_ceil(2)..=n {
            let binom = binomial_tail(n, k as i64)?;
            let t = k as f64 - 0.5 * n as f64 + 1.0;
            let x = (2.0 * k as f64 - n as f64) / (n as f64).sqrt();
            let gauss = gaussian_tail(GaussianTailQuery::new(x, 1.0)?);
            let bound = |tail: &maxbound_core::tails::TailResult, name| tail.bound(name).map(|b| config.inflate(b));
            let mckay = bound(&binom, "mckay").expect("always present");
            let stirling = bound(&binom, "stirling").expect("always present");
            let corollary = bound(&binom, "corollary");
            let gaussian_lower = bound(&gauss, "gaussian_lower").expect("always present");
            let ok = [Some(mckay), Some(stirling), corollary]
                .into_iter()
                .flatten()
                .all(|b| b <= binom.exact * (1.0 + rel))
                && gaussian_lower <= gauss.exact * (1.0 + rel);
            rows.push(TailRow {
                n,
                k,
                t: corollary.map(|_| t),
                x,
                exact: binom.exact,
                mckay,
                stirling,
                corollary,
                gaussian_exact: gauss.exact,
                gaussian_lower,
                status: if ok { BracketStatus::Pass } else { BracketStatus::Fail },
            });
        }
    }
    let summary = Summary::of(rows.iter().map(|r| r.status));
    Ok(TailsReport { rows, summary })
}
