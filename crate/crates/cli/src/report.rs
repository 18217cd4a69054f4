//! Checks and the JSON summary written by every run.

use std::collections::BTreeMap;

use serde::Serialize;

/// Pass condition of one measured number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    /// `measured < limit`
    Below { limit: f64 },
    /// `|measured − target| < tolerance`
    Near { target: f64, tolerance: f64 },
    /// `lo ≤ measured ≤ hi`
    Within { lo: f64, hi: f64 },
    /// `measured ≤ ceiling`
    AtMost { ceiling: f64 },
    /// `measured ≥ floor`
    AtLeast { floor: f64 },
}

impl Bound {
    pub fn holds(&self, x: f64) -> bool {
        match *self {
            Bound::Below { limit } => x < limit,
            Bound::Near { target, tolerance } => (x - target).abs() < tolerance,
            Bound::Within { lo, hi } => lo <= x && x <= hi,
            Bound::AtMost { ceiling } => x <= ceiling,
            Bound::AtLeast { floor } => x >= floor,
        }
    }

    /// Same bound with its tolerance multiplied by `s`. Ranges shrink about
    /// their centre; floors are not tolerances and stay put.
    pub fn scaled(&self, s: f64) -> Self {
        if s == 1.0 {
            return *self;
        }
        match *self {
            Bound::Below { limit } => Bound::Below { limit: limit * s },
            Bound::Near { target, tolerance } => Bound::Near { target, tolerance: tolerance * s },
            Bound::Within { lo, hi } => {
                let (c, h) = ((lo + hi) / 2.0, (hi - lo) / 2.0 * s);
                Bound::Within { lo: c - h, hi: c + h }
            }
            Bound::AtMost { ceiling } => Bound::AtMost { ceiling: ceiling * s },
            b @ Bound::AtLeast { .. } => b,
        }
    }

    fn describe(&self) -> String {
        match *self {
            Bound::Below { limit } => format!("< {limit:e}"),
            Bound::Near { target, tolerance } => format!("{target} ± {tolerance:e}"),
            Bound::Within { lo, hi } => format!("in [{lo}, {hi}]"),
            Bound::AtMost { ceiling } => format!("<= {ceiling}"),
            Bound::AtLeast { floor } => format!(">= {floor:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl SubCheck {
    pub fn new(name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Self { name: name.into(), measured, bound, passed: bound.holds(measured) }
    }

    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self::new(name, measured, Bound::Below { limit })
    }

    pub fn near(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, measured, Bound::Near { target, tolerance })
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, measured, Bound::Within { lo, hi })
    }

    pub fn at_most(name: impl Into<String>, measured: f64, ceiling: f64) -> Self {
        Self::new(name, measured, Bound::AtMost { ceiling })
    }

    pub fn at_least(name: impl Into<String>, measured: f64, floor: f64) -> Self {
        Self::new(name, measured, Bound::AtLeast { floor })
    }
}

/// A named group of subchecks with the seed that reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
    pub subchecks: Vec<SubCheck>,
}

impl CheckOutcome {
    pub fn new(id: impl Into<String>, title: impl Into<String>, subchecks: Vec<SubCheck>) -> Self {
        let passed = subchecks.iter().all(|s| s.passed);
        Self { id: id.into(), title: title.into(), passed, seed: None, runtime_s: None, subchecks }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_runtime(mut self, seconds: f64) -> Self {
        self.runtime_s = Some(seconds);
        self
    }

    /// Re-evaluates every subcheck with its tolerance scaled by `s`.
    pub fn with_tolerance_scale(mut self, s: f64) -> Self {
        for c in &mut self.subchecks {
            c.bound = c.bound.scaled(s);
            c.passed = c.bound.holds(c.measured);
        }
        self.passed = self.subchecks.iter().all(|c| c.passed);
        self
    }

    /// One-line human summary.
    pub fn line(&self) -> String {
        let mut s = format!("[{}] {} {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.title);
        if let Some(seed) = self.seed {
            s += &format!(" (seed {seed})");
        }
        for c in &self.subchecks {
            let m = c.measured;
            let shown = if m == 0.0 || (1e-3..1e6).contains(&m.abs()) { format!("{m}") } else { format!("{m:e}") };
            s += &format!("; {}{}={} {}", if c.passed { "" } else { "!" }, c.name, shown, c.bound.describe());
        }
        s
    }
}

/// The JSON summary: `experiment`, `config`, `results`, `checks`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub results: serde_json::Value,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_and_scaling() {
        assert!(Bound::Near { target: 1.0, tolerance: 0.1 }.holds(1.05));
        assert!(!Bound::Near { target: 1.0, tolerance: 0.1 }.scaled(0.1).holds(1.05));
        let w = Bound::Within { lo: 0.9, hi: 1.1 }.scaled(0.5);
        assert_eq!(w, Bound::Within { lo: 0.95, hi: 1.05 });
        assert!(!Bound::Below { limit: 1.0 }.holds(f64::NAN));
    }

    #[test]
    fn outcome_passes_only_when_all_subchecks_do() {
        let ok = CheckOutcome::new("a", "t", vec![SubCheck::below("x", 0.5, 1.0)]);
        assert!(ok.passed);
        let tampered = ok.clone().with_tolerance_scale(0.1);
        assert!(!tampered.passed);
        assert!(tampered.line().starts_with("[FAIL] a"));
    }
}
