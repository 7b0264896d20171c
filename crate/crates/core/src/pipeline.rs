//! The verification tool chain: filtering, unfolding, query-answer
//! transformation, splitting, thresholds, polyhedral analysis.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::analyzer::{analyze_with, check_safety, Analysis, AnalyzerConfig, Verdict};
use crate::ast::{canonical_vars, Atom, Program, FALSE};
use crate::print::program_to_string;
use crate::thresholds::{compute_thresholds_capped, ThresholdSet, DEFAULT_TP_CAP};
use crate::transform::{ans_name, query_answer, raf_filter, split_predicates, unfold_forward_from};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub raf: bool,
    pub unfold: bool,
    pub qa: bool,
    pub split: bool,
    /// When off the analysis widens without thresholds.
    pub thresholds: bool,
    pub widen_delay: usize,
    pub tp_cap: usize,
    pub goal: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            raf: true,
            unfold: true,
            qa: true,
            split: true,
            thresholds: true,
            widen_delay: AnalyzerConfig::default().widen_delay,
            tp_cap: DEFAULT_TP_CAP,
            goal: FALSE.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Raf,
    Unfold,
    Qa,
    Split,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Raf => "raf",
            Stage::Unfold => "unfold",
            Stage::Qa => "qa",
            Stage::Split => "split",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    /// Program after each stage that ran, in order.
    pub stages: Vec<(Stage, Program)>,
    pub thresholds: ThresholdSet,
    pub analysis: Analysis,
    /// Predicate whose emptiness decides the verdict.
    pub goal: String,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

impl PipelineOutcome {
    /// The program handed to the analysis.
    pub fn final_program<'a>(&'a self, input: &'a Program) -> &'a Program {
        self.stages.last().map_or(input, |(_, p)| p)
    }

    /// Writes each intermediate program to `<stem>.<stage>.chc`.
    pub fn write_dumps(&self, stem: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (stage, program) in &self.stages {
            let mut name = stem.as_os_str().to_owned();
            name.push(format!(".{}.chc", stage.name()));
            let path = PathBuf::from(name);
            std::fs::write(&path, program_to_string(program))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn goal_atom(p: &Program, goal: &str) -> Atom {
    Atom::new(goal, canonical_vars(p.arity(goal).unwrap_or(0)))
}

pub fn run_pipeline(input: &Program, cfg: &PipelineConfig) -> PipelineOutcome {
    let start = Instant::now();
    let mut stages = Vec::new();
    let mut current = input.clone();
    let mut goal = cfg.goal.clone();
    if cfg.raf {
        current = raf_filter(&current, &goal_atom(&current, &goal));
        stages.push((Stage::Raf, current.clone()));
    }
    if cfg.unfold {
        current = unfold_forward_from(&current, &goal);
        stages.push((Stage::Unfold, current.clone()));
    }
    if cfg.qa {
        current = query_answer(&current, &goal_atom(&current, &goal));
        goal = ans_name(&goal);
        stages.push((Stage::Qa, current.clone()));
    }
    if cfg.split {
        current = split_predicates(&current, &goal);
        stages.push((Stage::Split, current.clone()));
    }
    let thresholds = if cfg.thresholds {
        compute_thresholds_capped(&current, cfg.tp_cap)
    } else {
        ThresholdSet::new()
    };
    let analyzer = AnalyzerConfig {
        widen_delay: cfg.widen_delay,
        ..AnalyzerConfig::default()
    };
    let analysis = analyze_with(&current, &thresholds, analyzer);
    let verdict = check_safety(&analysis.model, &goal);
    PipelineOutcome {
        stages,
        thresholds,
        analysis,
        goal,
        verdict,
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    #[test]
    fn derivable_goal_is_not_proved() {
        let p = parse_program("false :- A=0, p(A). p(A) :- A=0.").unwrap();
        let out = run_pipeline(&p, &PipelineConfig::default());
        assert_eq!(out.verdict, Verdict::Unknown);
        assert_eq!(out.goal, "false_ans");
        assert_eq!(out.stages.len(), 4);
    }

    #[test]
    fn skipped_stages_are_absent() {
        let p = parse_program("false :- A>=1, p(A). p(A) :- A=0.").unwrap();
        let cfg = PipelineConfig {
            raf: false,
            qa: false,
            ..PipelineConfig::default()
        };
        let out = run_pipeline(&p, &cfg);
        let names: Vec<&str> = out.stages.iter().map(|(s, _)| s.name()).collect();
        assert_eq!(names, vec!["unfold", "split"]);
        assert_eq!(out.goal, FALSE);
        assert_eq!(out.verdict, Verdict::Safe);
    }
}
