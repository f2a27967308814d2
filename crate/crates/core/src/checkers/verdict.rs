use serde::{Deserialize, Serialize};

/// A certificate with its measured defect against a budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict<C> {
    pub certificate: C,
    pub budget: f64,
    pub defect: f64,
    pub pass: bool,
    pub window_fingerprint: String,
}

impl<C> Verdict<C> {
    pub fn new(certificate: C, budget: f64, defect: f64, window_fingerprint: &str) -> Self {
        Self {
            certificate,
            budget,
            defect,
            pass: passes(defect, budget),
            window_fingerprint: window_fingerprint.to_string(),
        }
    }

    pub fn map<D>(self, f: impl FnOnce(C) -> D) -> Verdict<D> {
        Verdict {
            certificate: f(self.certificate),
            budget: self.budget,
            defect: self.defect,
            pass: self.pass,
            window_fingerprint: self.window_fingerprint,
        }
    }
}

/// `defect <= budget`; NaN never passes.
pub fn passes(defect: f64, budget: f64) -> bool {
    defect <= budget
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_defect_vs_budget() {
        assert!(Verdict::new((), 0.5, 0.5, "x").pass);
        assert!(!Verdict::new((), 0.5, 0.51, "x").pass);
        assert!(!Verdict::new((), 0.5, f64::NAN, "x").pass);
    }
}
