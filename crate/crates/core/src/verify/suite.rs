use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    lemma_trial, theorem_trial, trial_seed, LemmaTrialResult, TheoremTrialResult, DEFAULT_MAX_DIM,
    MAX_FUZZ_DIM, METRIC_TOL, SEED_DERIVATION,
};
use crate::channels::DEFAULT_STEP;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::metrology::FD_STEP_RANGE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Lemma,
    Theorem,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub kind: SuiteKind,
    pub trials: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    /// Depolarizing levels for the theorem suite; ignored by the lemma suite.
    pub gammas: Vec<f64>,
    pub n: u64,
    pub dx: f64,
    pub max_dim: usize,
    /// Harness self-test: flag every trial in which the inequality holds.
    pub invert: bool,
    /// Not part of the report, so parallel and sequential runs match byte for byte.
    #[serde(skip)]
    pub execution: Execution,
}

impl SuiteConfig {
    pub fn lemma(trials: usize, seed: u64) -> Self {
        Self {
            kind: SuiteKind::Lemma,
            trials,
            seed,
            dims: vec![2, 4, 8],
            gammas: Vec::new(),
            n: 1,
            dx: DEFAULT_STEP,
            max_dim: DEFAULT_MAX_DIM,
            invert: false,
            execution: Execution::default(),
        }
    }

    pub fn theorem(trials: usize, seed: u64) -> Self {
        Self {
            kind: SuiteKind::Theorem,
            dims: vec![4, 8],
            gammas: vec![0.0, 0.1, 0.3],
            ..Self::lemma(trials, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trial count must be positive".into());
        }
        if self.max_dim > MAX_FUZZ_DIM {
            return fail(format!("max dimension {} exceeds {MAX_FUZZ_DIM}", self.max_dim));
        }
        if self.dims.is_empty() {
            return fail("no dimensions given".into());
        }
        let min_dim = match self.kind {
            SuiteKind::Lemma => 1,
            SuiteKind::Theorem => 2,
        };
        if let Some(d) = self.dims.iter().find(|&&d| d < min_dim || d > self.max_dim) {
            return fail(format!("dimension {d} outside {min_dim}..={}", self.max_dim));
        }
        if self.kind == SuiteKind::Theorem {
            if self.gammas.is_empty() {
                return fail("no depolarizing levels given".into());
            }
            if let Some(g) = self.gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
                return fail(format!("gamma {g} not in [0, 1]"));
            }
            if !(FD_STEP_RANGE.0..=FD_STEP_RANGE.1).contains(&self.dx) {
                return fail(format!("dx {} outside [1e-6, 1e-2]", self.dx));
            }
        }
        if self.n == 0 {
            return fail("repetition count must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum TrialRecords {
    Lemma(Vec<LemmaTrialResult>),
    Theorem(Vec<TheoremTrialResult>),
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub trials: usize,
    pub violations: usize,
    pub violating_trials: Vec<usize>,
    /// Lemma: smallest `rhs - lhs`. Theorem: smallest `max(qfi_pure) - qfi_mixed`.
    pub worst_margin: f64,
    /// Theorem only: smallest proof-chain margin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_chain_margin: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub config: SuiteConfig,
    pub seed_derivation: &'static str,
    pub summary: SuiteSummary,
    pub trials: TrialRecords,
}

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    /// 0 when no trial is flagged, 1 otherwise.
    pub exit_code: u8,
}

impl SuiteReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Fixed columns: `trial,seed,dim,lhs,rhs,margin` for the lemma suite and
    /// `trial,seed,dim,qfi_mixed,qfi_best_pure,holds` for the theorem suite.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match &self.trials {
            TrialRecords::Lemma(rows) => {
                out.write_record(["trial", "seed", "dim", "lhs", "rhs", "margin"])?;
                for r in rows {
                    out.write_record([
                        r.trial.to_string(),
                        r.seed.to_string(),
                        r.dim.to_string(),
                        r.check.lhs.to_string(),
                        r.check.rhs.to_string(),
                        r.check.margin.to_string(),
                    ])?;
                }
            }
            TrialRecords::Theorem(rows) => {
                out.write_record(["trial", "seed", "dim", "qfi_mixed", "qfi_best_pure", "holds"])?;
                for r in rows {
                    out.write_record([
                        r.trial.to_string(),
                        r.seed.to_string(),
                        r.dim.to_string(),
                        r.check.qfi_mixed.to_string(),
                        r.check.qfi_best_pure.to_string(),
                        (r.check.holds && r.check.chain_holds).to_string(),
                    ])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(File::create(path)?)
    }
}

/// Runs the configured fuzzer. Trial `i` uses seed
/// `trial_seed(config.seed, i)` and results are ordered by trial index.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutcome> {
    config.validate()?;
    let seed_of = |i: usize| trial_seed(config.seed, i as u64);
    let flag = |ok: bool| ok == config.invert;

    let (records, flags, worst_margin, worst_chain_margin) = match config.kind {
        SuiteKind::Lemma => {
            let rows = map_indexed(config.trials, config.execution, |i| {
                lemma_trial(i, seed_of(i), &config.dims)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let flags: Vec<bool> = rows.iter().map(|r| flag(r.check.margin >= -METRIC_TOL)).collect();
            let worst = rows.iter().map(|r| r.check.margin).fold(f64::INFINITY, f64::min);
            (TrialRecords::Lemma(rows), flags, worst, None)
        }
        SuiteKind::Theorem => {
            let rows = map_indexed(config.trials, config.execution, |i| {
                theorem_trial(i, seed_of(i), &config.dims, &config.gammas, config.n, config.dx)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let flags: Vec<bool> = rows
                .iter()
                .map(|r| flag(r.check.holds && r.check.chain_holds))
                .collect();
            let worst = rows
                .iter()
                .map(|r| r.check.qfi_best_pure - r.check.qfi_mixed)
                .fold(f64::INFINITY, f64::min);
            let worst_chain = rows.iter().map(|r| r.check.chain_margin).fold(f64::INFINITY, f64::min);
            (TrialRecords::Theorem(rows), flags, worst, Some(worst_chain))
        }
    };

    let violating_trials: Vec<usize> = flags
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i))
        .collect();
    let summary = SuiteSummary {
        trials: config.trials,
        violations: violating_trials.len(),
        violating_trials,
        worst_margin,
        worst_chain_margin,
    };
    let exit_code = u8::from(summary.violations > 0);
    Ok(SuiteOutcome {
        report: SuiteReport {
            suite: config.kind,
            config: config.clone(),
            seed_derivation: SEED_DERIVATION,
            summary,
            trials: records,
        },
        exit_code,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_suite_passes() {
        let mut cfg = SuiteConfig::lemma(100, 7);
        cfg.dims = vec![2, 4];
        let out = run_suite(&cfg).unwrap();
        assert_eq!(out.exit_code, 0);
        assert!(out.report.summary.worst_margin >= -METRIC_TOL);
    }

    #[test]
    fn theorem_suite_passes() {
        let out = run_suite(&SuiteConfig::theorem(100, 7)).unwrap();
        assert_eq!(out.exit_code, 0, "{:?}", out.report.summary);
    }

    #[test]
    fn inverted_self_test_flags_every_trial() {
        let mut cfg = SuiteConfig::lemma(20, 3);
        cfg.invert = true;
        let out = run_suite(&cfg).unwrap();
        assert_eq!(out.exit_code, 1);
        assert_eq!(out.report.summary.violations, 20);

        let mut cfg = SuiteConfig::theorem(10, 3);
        cfg.invert = true;
        let out = run_suite(&cfg).unwrap();
        assert_eq!(out.exit_code, 1);
        assert_eq!(out.report.summary.violating_trials, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn config_errors() {
        let mut cfg = SuiteConfig::lemma(10, 1);
        cfg.dims = vec![16];
        assert!(matches!(run_suite(&cfg), Err(Error::Config(_))));
        cfg.max_dim = 16;
        assert!(cfg.validate().is_ok());
        cfg.max_dim = 32;
        assert!(cfg.validate().is_err());

        let mut cfg = SuiteConfig::theorem(10, 1);
        cfg.gammas = vec![1.2];
        assert!(cfg.validate().is_err());
        let cfg = SuiteConfig::theorem(0, 1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sequential_and_parallel_reports_match() {
        let mut a = SuiteConfig::theorem(12, 99);
        a.execution = Execution::Sequential;
        let mut b = a.clone();
        b.execution = Execution::Parallel;
        let ja = run_suite(&a).unwrap().report.to_json().unwrap();
        let jb = run_suite(&b).unwrap().report.to_json().unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn csv_columns() {
        let out = run_suite(&SuiteConfig::lemma(3, 1)).unwrap();
        let mut buf = Vec::new();
        out.report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trial,seed,dim,lhs,rhs,margin\n"));
        assert_eq!(text.lines().count(), 4);

        let out = run_suite(&SuiteConfig::theorem(2, 1)).unwrap();
        let mut buf = Vec::new();
        out.report.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("trial,seed,dim,qfi_mixed,qfi_best_pure,holds\n"));
    }
}
