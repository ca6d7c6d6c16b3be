//! Shared shape of sampled property reports.

use serde::Serialize;

use crate::modular_metric::MAX_WITNESSES;

/// How a clause was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    /// Asserted on every drawn sample.
    Sampled,
    /// Follows from the closed form of a built-in.
    Analytic,
    /// Near-equality probing; can miss violations.
    Heuristic,
    /// Not machine-checkable (e.g. continuity); recorded, not tested.
    Assumed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause<W> {
    pub clause: String,
    pub method: CheckMethod,
    pub samples: usize,
    pub violation_count: usize,
    pub witnesses: Vec<W>,
    pub passed: bool,
}

impl<W> Clause<W> {
    pub fn new(clause: impl Into<String>, method: CheckMethod) -> Self {
        Self {
            clause: clause.into(),
            method,
            samples: 0,
            violation_count: 0,
            witnesses: Vec::new(),
            passed: true,
        }
    }

    pub fn tick(&mut self) {
        self.samples += 1;
    }

    pub fn record(&mut self, witness: W) {
        self.violation_count += 1;
        self.passed = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport<W> {
    pub subject: String,
    pub clauses: Vec<Clause<W>>,
    pub passed: bool,
}

impl<W> PropertyReport<W> {
    pub fn new(subject: impl Into<String>, clauses: Vec<Clause<W>>) -> Self {
        let passed = clauses.iter().all(|c| c.passed);
        Self {
            subject: subject.into(),
            clauses,
            passed,
        }
    }

    pub fn clause(&self, name: &str) -> Option<&Clause<W>> {
        self.clauses.iter().find(|c| c.clause == name)
    }
}
