//! JSON reports. Key names are part of the interface; timings are printed to
//! stderr instead so that reports are byte-identical across runs.

use krylov_core::solver::PathRecord;
use serde::Serialize;

use crate::verify::SuiteReport;

/// Node lists in reports are truncated to this many entries.
pub const NODE_LIST_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub seed: u64,
    pub trials: u64,
    pub passed: bool,
    pub failed_suites: Vec<String>,
    pub suites: Vec<SuiteReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeStatus {
    Pass,
    /// `χ_0 ∈ Γ_{k-1}` everywhere but some margin is `≤ 0`.
    MarginFailure,
    /// `χ_0 ∉ Γ_{k-1}` at some node.
    PreconditionFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeList {
    pub count: usize,
    /// The first [`NODE_LIST_CAP`] nodes in index order.
    pub nodes: Vec<usize>,
}

impl NodeList {
    pub fn from_flags(flags: impl Iterator<Item = bool>) -> Self {
        let all: Vec<usize> = flags.enumerate().filter_map(|(i, f)| f.then_some(i)).collect();
        NodeList { count: all.len(), nodes: all.into_iter().take(NODE_LIST_CAP).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeCheckReport {
    pub command: &'static str,
    pub status: ConeStatus,
    pub variant: &'static str,
    pub nodes: usize,
    /// Smallest `strict-k-1` margin over all nodes and directions.
    pub min_margin: Option<f64>,
    pub min_node: usize,
    /// Nodes whose smallest margin is `≤ 0`.
    pub failing: NodeList,
    /// Degree of the cone `χ_0` must lie in.
    pub precondition_degree: usize,
    /// Nodes where `χ_0 ∉ Γ_{k-1}`.
    pub outside_cone: NodeList,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEntry {
    pub stage: u8,
    pub t: f64,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub residual_linf: f64,
    pub residual_l2: f64,
    pub min_cone_margin: f64,
    pub a_tilde: f64,
    pub min_sigma_k_minus_1: f64,
    pub min_grad_sum: f64,
}

impl From<&PathRecord> for PathEntry {
    fn from(r: &PathRecord) -> Self {
        PathEntry {
            stage: r.stage.number(),
            t: r.t,
            newton_iterations: r.newton_iterations,
            linear_iterations: r.linear_iterations,
            residual_linf: r.residual_linf,
            residual_l2: r.residual_l2,
            min_cone_margin: r.min_cone_margin,
            a_tilde: r.a_tilde,
            min_sigma_k_minus_1: r.min_sigma_k_minus_1,
            min_grad_sum: r.min_grad_sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAudit {
    /// Integral gap with `a` folded into `α_{k-1}`.
    pub gap: f64,
    pub floor_gap: Option<f64>,
    /// `5h²`.
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManufacturedAudit {
    /// `‖u − (u* − mean u*)‖_∞` on the grid.
    pub error_linf: f64,
    /// `5h²`.
    pub bound: f64,
    pub within_bound: bool,
    pub discrete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveFiles {
    pub u: String,
    pub chi: String,
    pub eigen_range: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub converged: bool,
    pub error: Option<String>,
    pub n: usize,
    pub k: usize,
    pub points: usize,
    pub spacing: f64,
    /// Final `a` (α-scale); from the last converged state on failure.
    pub a: f64,
    pub a_tilde: f64,
    pub stage: u8,
    pub t: f64,
    pub residual_linf: Option<f64>,
    pub residual_l2: Option<f64>,
    pub min_cone_margin: Option<f64>,
    pub path: Vec<PathEntry>,
    pub integral_gap: Option<GapAudit>,
    pub manufactured: Option<ManufacturedAudit>,
    /// Field dumps, relative to the output directory.
    pub files: SolveFiles,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}
