//! Executing the verifiers of a configuration and assembling the report
//! document.

use crate::config::RunConfig;
use anyhow::Result;
use bicontact_core::manifolds::{build_model, ModelSpec};
use bicontact_core::verifiers::run_verifier;
use bicontact_core::{Verdict, VerificationReport, VerifierOptions};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: ToolInfo = ToolInfo {
    name: "bicontact",
    version: env!("CARGO_PKG_VERSION"),
};

/// Overall outcome of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVerdict {
    Pass,
    Fail,
    Inconclusive,
    /// At least one verifier could not be evaluated.
    Error,
}

impl RunVerdict {
    /// Process exit code: 0 pass, 1 fail or inconclusive, 2 error.
    pub fn exit_code(self) -> i32 {
        match self {
            RunVerdict::Pass => 0,
            RunVerdict::Fail | RunVerdict::Inconclusive => 1,
            RunVerdict::Error => 2,
        }
    }
}

/// One configured verifier: the resolved options and either its reports
/// or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierRun {
    pub id: String,
    pub options: VerifierOptions,
    pub reports: Vec<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub verdict: RunVerdict,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub errors: usize,
}

/// The report document written by `run`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub model: ModelSpec,
    pub runs: Vec<VerifierRun>,
    pub summary: Summary,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn summarize(runs: &[VerifierRun]) -> Summary {
    let mut s = Summary {
        verdict: RunVerdict::Pass,
        passed: 0,
        failed: 0,
        inconclusive: 0,
        errors: 0,
    };
    for run in runs {
        if run.error.is_some() {
            s.errors += 1;
        }
        for r in &run.reports {
            match r.verdict {
                Verdict::Pass => s.passed += 1,
                Verdict::Fail => s.failed += 1,
                Verdict::Inconclusive => s.inconclusive += 1,
            }
        }
    }
    s.verdict = if s.errors > 0 {
        RunVerdict::Error
    } else if s.failed > 0 {
        RunVerdict::Fail
    } else if s.inconclusive > 0 {
        RunVerdict::Inconclusive
    } else {
        RunVerdict::Pass
    };
    s
}

/// Runs every configured verifier (concurrently, on the current rayon pool)
/// and collects the results in configuration order. Runtimes are kept only
/// with `timings`, so that reports are reproducible byte for byte.
pub fn run_config(cfg: &RunConfig, timings: bool) -> Result<RunReport> {
    let (model, flow) = build_model(&cfg.model)?;
    let runs: Vec<VerifierRun> = cfg
        .verifiers
        .par_iter()
        .map(|(id, opts)| {
            let (mut reports, error) = match run_verifier(id, &model, &flow, opts) {
                Ok(r) => (r, None),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            if !timings {
                for r in &mut reports {
                    r.runtime_seconds = None;
                }
            }
            VerifierRun {
                id: id.clone(),
                options: opts.clone(),
                reports,
                error,
            }
        })
        .collect();
    Ok(RunReport {
        tool: TOOL,
        model: cfg.model,
        summary: summarize(&runs),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_and_errors_are_summarized() {
        let cfg = RunConfig::parse(
            "[model]\nname = \"t3_pA\"\n[[verifiers]]\nid = \"domination\"\n[[verifiers]]\nid = \"reeb\"",
        )
        .unwrap();
        let rep = run_config(&cfg, false).unwrap();
        assert_eq!(rep.runs[0].id, "domination");
        assert!(rep.runs[1].error.as_deref().unwrap().contains("invariant volume"));
        assert_eq!(rep.summary.verdict, RunVerdict::Error);
        assert_eq!(rep.summary.verdict.exit_code(), 2);
        assert!(rep.runs[0].reports.iter().all(|r| r.runtime_seconds.is_none()));
        assert!(!rep.to_json().contains("runtime_seconds"));
    }
}
