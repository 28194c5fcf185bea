//! Pass/fail verdicts with severity classes and the report emitter.

use crate::ExitClass;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictClass {
    Invariant,
    Statistical,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub class: VerdictClass,
    /// None means not applicable under this configuration
    pub passed: Option<bool>,
    pub detail: String,
}

impl Verdict {
    pub fn new(
        name: impl Into<String>,
        class: VerdictClass,
        passed: bool,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            class,
            passed: Some(passed),
            detail: detail.into(),
        }
    }

    pub fn skipped(name: impl Into<String>, class: VerdictClass, why: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            class,
            passed: None,
            detail: why.into(),
        }
    }
}

pub fn exit_class(verdicts: &[Verdict]) -> ExitClass {
    let mut class = ExitClass::Ok;
    for v in verdicts {
        if v.passed == Some(false) {
            class = class.worst(match v.class {
                VerdictClass::Invariant => ExitClass::Invariant,
                VerdictClass::Statistical => ExitClass::Statistical,
            });
        }
    }
    class
}

/// One line per verdict, stable formatting.
pub fn render(verdicts: &[Verdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        let status = match v.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        let _ = writeln!(out, "{status} {} — {}", v.name, v.detail);
    }
    out
}

pub fn to_csv(verdicts: &[Verdict]) -> crate::io::Csv {
    let mut csv = crate::io::Csv::new("name,class,status,detail");
    for v in verdicts {
        let class = match v.class {
            VerdictClass::Invariant => "invariant",
            VerdictClass::Statistical => "statistical",
        };
        let status = match v.passed {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "skip",
        };
        // detail strings stay comma-free by construction
        csv.row(&[&v.name, &class, &status, &v.detail]);
    }
    csv
}
