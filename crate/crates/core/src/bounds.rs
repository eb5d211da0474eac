//! Records of checked inequalities `lhs ≤ rhs`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// The inequality holds for the recorded estimates within tolerance,
    /// and the estimates are oriented so that this implies the exact
    /// inequality.
    Pass,
    Fail,
    /// Outside the domain where the inequality is stated.
    Skipped,
    /// The estimates satisfy the inequality but their orientation does not
    /// certify it.
    Conditional,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Conditional => "conditional",
        }
    }
}

/// Family names used in reports.
pub mod family {
    pub const DPI_NONNEG: &str = "dpi_nonneg";
    pub const THM1_DIRECT: &str = "thm1_direct";
    pub const THM1_CONVERSE: &str = "thm1_converse";
    pub const MIAO: &str = "miao";
    pub const MIAO2: &str = "miao2";
    pub const THM2_DIRECT2: &str = "thm2_direct2";
    pub const CONVERSE2: &str = "converse2";
    pub const COROLLARY_GAP: &str = "corollary_gap";
    pub const HASHING_UPPER: &str = "hashing_upper";
    pub const HASHING_LOWER: &str = "hashing_lower";
    pub const MUTUALINFO_HALF: &str = "mutualinfo_half";
    pub const EOF_WOOTTERS: &str = "eof_wootters";
    pub const THM3_A: &str = "thm3_a";
    pub const THM3_B: &str = "thm3_b";
    pub const FINAL_A: &str = "final_a";
    pub const FINAL_B: &str = "final_b";
    pub const CHAIN_CONVERSE: &str = "chain_converse";
    pub const CHAIN_DIRECT: &str = "chain_direct";
}

/// One checked instance of `lhs ≤ rhs`; `slack = rhs − lhs`. Values are
/// `None` where a side is undefined (for example `g` outside its domain).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckRecord {
    pub name: String,
    pub instance: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    pub status: Status,
}

impl BoundCheckRecord {
    /// Pass iff `rhs − lhs ≥ −tol`.
    pub fn check(name: &str, instance: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        let status = if slack >= -tol { Status::Pass } else { Status::Fail };
        Self::with_status(name, instance, lhs, rhs, status)
    }

    /// Like [`check`](Self::check) but a holding inequality is only
    /// [`Status::Conditional`].
    pub fn check_conditional(name: &str, instance: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let mut r = Self::check(name, instance, lhs, rhs, tol);
        if r.status == Status::Pass {
            r.status = Status::Conditional;
        }
        r
    }

    pub fn with_status(name: &str, instance: impl Into<String>, lhs: f64, rhs: f64, status: Status) -> Self {
        Self {
            name: name.to_string(),
            instance: instance.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack: Some(rhs - lhs),
            status,
        }
    }

    pub fn skipped(name: &str, instance: impl Into<String>, lhs: Option<f64>, rhs: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            instance: instance.into(),
            lhs,
            rhs,
            slack: lhs.zip(rhs).map(|(l, r)| r - l),
            status: Status::Skipped,
        }
    }
}

/// Per-family status counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub conditional: usize,
}

impl StatusCounts {
    pub fn add(&mut self, s: Status) {
        match s {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            Status::Skipped => self.skipped += 1,
            Status::Conditional => self.conditional += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.skipped + self.conditional
    }
}

pub fn count_by_family(records: &[BoundCheckRecord]) -> BTreeMap<String, StatusCounts> {
    let mut out: BTreeMap<String, StatusCounts> = BTreeMap::new();
    for r in records {
        out.entry(r.name.clone()).or_default().add(r.status);
    }
    out
}
