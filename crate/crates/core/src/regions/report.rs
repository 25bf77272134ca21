use serde::{Deserialize, Serialize};

/// How `worst_value` is compared with `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass iff `worst_value <= tolerance`.
    AtMost,
    /// Pass iff `worst_value > tolerance`.
    Above,
}

impl Comparison {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Comparison::AtMost => value <= tolerance,
            Comparison::Above => value > tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Index of the sample in acceptance order.
    pub index: usize,
    pub t: f64,
    pub x: Vec<f64>,
}

/// Outcome of one sampled condition check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub condition: String,
    pub samples: usize,
    pub seed: u64,
    pub worst_value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub passed: bool,
    /// Samples redrawn because they landed on a nonsmooth seam.
    pub resampled: usize,
    pub notes: Vec<String>,
    pub witness: Option<Witness>,
}

impl CheckReport {
    pub(crate) fn new(
        condition: impl Into<String>,
        seed: u64,
        comparison: Comparison,
        tolerance: f64,
    ) -> Self {
        CheckReport {
            condition: condition.into(),
            samples: 0,
            seed,
            worst_value: match comparison {
                Comparison::AtMost => f64::NEG_INFINITY,
                Comparison::Above => f64::INFINITY,
            },
            comparison,
            tolerance,
            passed: true,
            resampled: 0,
            notes: Vec::new(),
            witness: None,
        }
    }

    /// Fold in one sample; strictly worse values replace the witness, so the
    /// lowest index wins among ties.
    pub(crate) fn record(&mut self, value: f64, t: f64, x: &[f64]) {
        let worse = match self.comparison {
            Comparison::AtMost => value > self.worst_value,
            Comparison::Above => value < self.worst_value,
        };
        if worse || self.witness.is_none() {
            self.worst_value = value;
            self.witness = Some(Witness {
                index: self.samples,
                t,
                x: x.to_vec(),
            });
        }
        self.samples += 1;
    }

    /// Recompute the verdict from the stored value and tolerance; `extra`
    /// carries side conditions (initial point, continuity) that must also hold.
    pub(crate) fn finish(mut self, extra: bool) -> Self {
        let sampled = self.samples == 0 || self.comparison.holds(self.worst_value, self.tolerance);
        self.passed = sampled && extra;
        if self.samples == 0 {
            self.worst_value = 0.0;
        }
        self
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }

    /// Stable key-ordered text rendering.
    pub fn to_text(&self) -> String {
        toml::to_string(self).unwrap_or_else(|e| format!("# unrenderable report: {e}\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_keep_lowest_index() {
        let mut r = CheckReport::new("c", 0, Comparison::AtMost, 0.0);
        r.record(-1.0, 0.0, &[0.0]);
        r.record(0.0, 1.0, &[1.0]);
        r.record(0.0, 2.0, &[2.0]);
        let r = r.finish(true);
        assert_eq!(r.witness.unwrap().index, 1);
        assert!(r.passed);
    }

    #[test]
    fn above_comparison_tracks_minimum() {
        let mut r = CheckReport::new("c", 0, Comparison::Above, 0.5);
        r.record(2.0, 0.0, &[0.0]);
        r.record(0.4, 0.0, &[0.0]);
        let r = r.finish(true);
        assert_eq!(r.worst_value, 0.4);
        assert!(!r.passed);
    }

    #[test]
    fn renders_as_text() {
        let mut r = CheckReport::new("solution_region", 3, Comparison::AtMost, 1e-10);
        r.record(-0.25, 0.5, &[1.0, 2.0]);
        let text = r.finish(true).to_text();
        assert!(text.starts_with("condition = \"solution_region\""));
        let back: CheckReport = toml::from_str(&text).unwrap();
        assert_eq!(back.worst_value, -0.25);
    }
}
