//! Config-driven experiment runner.
//!
//! A run builds the topology, workload and route catalogs, solves the
//! initial placement once, then builds, solves and reports one main model
//! per (method, alpha) cell. Configs are TOML files; bundled presets can be
//! named in place of a path.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::{make_exponential_approx, CostFunctionSet};
use crate::error::{Error, Result};
use crate::metrics::{compute_report, write_report, UtilizationReport};
use crate::model::{
    build_initial_placement_model, build_main_model, InitialPlacement, Method, MethodParams, ModelInstance,
    RouteCatalog, Routing,
};
use crate::paths::{build_ecmp_catalog, build_sdn_catalog, mix, EcmpOptions, DEFAULT_CATALOG_CAP};
use crate::solve::{solve_exact_with, solve_heuristic, verify, Solution, SolveBudget, SolveStatus};
use crate::topology::{build_fat_tree, build_leaf_spine, Topology};
use crate::workload::{
    fat_tree_sfc, generate_fat_tree_workload, generate_leaf_spine_workload, leaf_spine_sfc, Interval, PairSelection,
    VnfType, Workload,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Bundled configs by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("paper-ecmp-desk", include_str!("../presets/paper-ecmp-desk.toml")),
    ("paper-sdn-desk", include_str!("../presets/paper-sdn-desk.toml")),
    ("paper-ecmp", include_str!("../presets/paper-ecmp.toml")),
    ("paper-sdn", include_str!("../presets/paper-sdn.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    EcmpFatTree,
    SdnLeafSpine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    /// Fat-tree pod count (k).
    pub pods: Option<usize>,
    pub leaves: Option<usize>,
    pub spines: Option<usize>,
    pub servers_per_node: usize,
    #[serde(default = "default_capacity")]
    pub server_capacity: f64,
    #[serde(default = "default_capacity")]
    pub link_capacity: f64,
}

fn default_capacity() -> f64 {
    1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairsConfig {
    All,
    Sampled(usize),
    /// Node names, e.g. `[["tor1", "tor3"]]`.
    Explicit(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadConfig {
    #[serde(default = "default_pairs")]
    pub pairs: PairsConfig,
    /// Leaf-spine only.
    pub chains_per_direction: Option<usize>,
    pub demands: [usize; 2],
    pub bandwidth: [f64; 2],
    #[serde(default = "default_max_intermediate")]
    pub max_intermediate: usize,
    /// Scenario default when absent.
    pub sfc: Option<Vec<VnfType>>,
    /// ECMP alternatives: VNF positions allowed to move (all when absent).
    pub movable: Option<Vec<usize>>,
}

fn default_pairs() -> PairsConfig {
    PairsConfig::All
}

fn default_max_intermediate() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub methods: Vec<String>,
    pub alphas: Vec<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_e_m")]
    pub e_m: f64,
    #[serde(default = "default_e_r")]
    pub e_r: f64,
    pub r_max: Option<usize>,
}

fn default_beta() -> f64 {
    MethodParams::default().beta
}
fn default_e_m() -> f64 {
    MethodParams::default().e_m
}
fn default_e_r() -> f64 {
    MethodParams::default().e_r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub segments: usize,
    pub steepness: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig { segments: crate::costs::DEFAULT_SEGMENTS, steepness: crate::costs::DEFAULT_STEEPNESS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub backend: Backend,
    pub max_wall_time: f64,
    pub max_nodes: u64,
    pub max_iterations: u64,
    pub gap_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let b = SolveBudget::default();
        SolverConfig {
            backend: Backend::Exact,
            max_wall_time: b.max_wall_time,
            max_nodes: b.max_nodes,
            max_iterations: b.max_iterations,
            gap_tolerance: b.gap_tolerance,
        }
    }
}

impl SolverConfig {
    pub fn budget(&self) -> SolveBudget {
        SolveBudget {
            max_wall_time: self.max_wall_time,
            max_nodes: self.max_nodes,
            max_iterations: self.max_iterations,
            gap_tolerance: self.gap_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Worker threads for cells; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    pub topology: TopologyConfig,
    pub workload: WorkloadConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub costs: CostConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub reason: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Diagnostic { field: field.into(), reason: reason.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, Vec<Diagnostic>> {
        toml::from_str(text).map_err(|e| vec![Diagnostic::new("config", e.message().to_string())])
    }

    /// Reads `arg` as a file path, or as a preset name when no such file exists.
    pub fn load(arg: &str) -> std::result::Result<Self, Vec<Diagnostic>> {
        let path = Path::new(arg);
        if path.exists() {
            let text =
                std::fs::read_to_string(path).map_err(|e| vec![Diagnostic::new("config", format!("{arg}: {e}"))])?;
            return Self::from_toml(&text);
        }
        match preset(arg) {
            Some(text) => Self::from_toml(text),
            None => Err(vec![Diagnostic::new("config", format!("`{arg}` is neither a file nor a preset"))]),
        }
    }

    pub fn methods(&self) -> Vec<Method> {
        self.model.methods.iter().filter_map(|m| Method::parse(m).ok()).collect()
    }

    pub fn routing(&self) -> Routing {
        match self.scenario {
            ScenarioKind::EcmpFatTree => Routing::Ecmp,
            ScenarioKind::SdnLeafSpine => Routing::Sdn,
        }
    }

    pub fn params(&self, alpha: f64) -> MethodParams {
        MethodParams {
            alpha,
            beta: self.model.beta,
            e_m: self.model.e_m,
            e_r: self.model.e_r,
            r_max: self.model.r_max.unwrap_or(usize::MAX),
        }
    }

    pub fn costs(&self) -> CostFunctionSet {
        make_exponential_approx(self.costs.segments, self.costs.steepness)
    }

    fn sfc(&self) -> Vec<VnfType> {
        self.workload.sfc.clone().unwrap_or_else(|| match self.scenario {
            ScenarioKind::EcmpFatTree => fat_tree_sfc(),
            ScenarioKind::SdnLeafSpine => leaf_spine_sfc(),
        })
    }

    pub fn build_topology(&self) -> Result<Topology> {
        let t = &self.topology;
        match self.scenario {
            ScenarioKind::EcmpFatTree => {
                let pods = t.pods.ok_or_else(|| Error::invalid("topology.pods", "required for ecmp_fat_tree"))?;
                build_fat_tree(pods, t.servers_per_node, t.server_capacity, t.link_capacity)
            }
            ScenarioKind::SdnLeafSpine => {
                let leaves =
                    t.leaves.ok_or_else(|| Error::invalid("topology.leaves", "required for sdn_leaf_spine"))?;
                let spines = t.spines.unwrap_or(crate::topology::DEFAULT_SPINES);
                build_leaf_spine(leaves, spines, t.servers_per_node, t.server_capacity, t.link_capacity)
            }
        }
    }

    pub fn build_workload(&self, topo: &Topology) -> Result<Workload> {
        let w = &self.workload;
        let demands = Interval::new(w.demands[0], w.demands[1]);
        let bandwidth = Interval::new(w.bandwidth[0], w.bandwidth[1]);
        let seed = derive_seed(self.seed, 1);
        match self.scenario {
            ScenarioKind::EcmpFatTree => {
                let pairs = match &w.pairs {
                    PairsConfig::All => PairSelection::All,
                    PairsConfig::Sampled(k) => PairSelection::Sampled(*k),
                    PairsConfig::Explicit(list) => {
                        let mut ids = Vec::with_capacity(list.len());
                        for (a, b) in list {
                            let find = |n: &str| {
                                topo.node_by_name(n)
                                    .ok_or_else(|| Error::invalid("workload.pairs", format!("unknown node `{n}`")))
                            };
                            ids.push((find(a)?, find(b)?));
                        }
                        PairSelection::Explicit(ids)
                    }
                };
                generate_fat_tree_workload(topo, &pairs, demands, bandwidth, &self.sfc(), seed)
            }
            ScenarioKind::SdnLeafSpine => {
                let per = w.chains_per_direction.unwrap_or(crate::workload::LEAF_SPINE_CHAINS_PER_DIRECTION);
                generate_leaf_spine_workload(topo, per, demands, bandwidth, &self.sfc(), seed)
            }
        }
    }
}

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

/// Every problem with `cfg`; empty iff it is valid.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut bad = |field: &str, reason: String| out.push(Diagnostic::new(field, reason));
    let t = &cfg.topology;
    match cfg.scenario {
        ScenarioKind::EcmpFatTree => match t.pods {
            None => bad("topology.pods", "required for ecmp_fat_tree".into()),
            Some(k) if k < 2 || k % 2 != 0 => bad("topology.pods", format!("must be even and >= 2, got {k}")),
            _ => {}
        },
        ScenarioKind::SdnLeafSpine => {
            match t.leaves {
                None => bad("topology.leaves", "required for sdn_leaf_spine".into()),
                Some(l) if l < 2 => bad("topology.leaves", format!("must be >= 2, got {l}")),
                _ => {}
            }
            if t.spines == Some(0) {
                bad("topology.spines", "must be >= 1".into());
            }
        }
    }
    if t.servers_per_node == 0 {
        bad("topology.servers_per_node", "must be >= 1".into());
    }
    for (name, v) in [("topology.server_capacity", t.server_capacity), ("topology.link_capacity", t.link_capacity)] {
        if !(v.is_finite() && v > 0.0) {
            bad(name, format!("must be positive, got {v}"));
        }
    }

    let w = &cfg.workload;
    if w.demands[0] > w.demands[1] {
        bad("workload.demands", format!("interval [{}, {}] is reversed", w.demands[0], w.demands[1]));
    }
    if w.demands[0] == 0 {
        bad("workload.demands", "lower bound must be >= 1".into());
    }
    if w.bandwidth[0] > w.bandwidth[1] {
        bad("workload.bandwidth", format!("interval [{}, {}] is reversed", w.bandwidth[0], w.bandwidth[1]));
    }
    if !(w.bandwidth[0] > 0.0 && w.bandwidth[1].is_finite()) {
        bad("workload.bandwidth", "bounds must be positive and finite".into());
    }
    match &w.pairs {
        PairsConfig::Sampled(0) => bad("workload.pairs", "sample size must be >= 1".into()),
        PairsConfig::Explicit(list) if list.is_empty() => bad("workload.pairs", "explicit list is empty".into()),
        _ => {}
    }
    if cfg.scenario == ScenarioKind::SdnLeafSpine && w.chains_per_direction == Some(0) {
        bad("workload.chains_per_direction", "must be >= 1".into());
    }
    let sfc = cfg.sfc();
    if sfc.is_empty() {
        bad("workload.sfc", "needs at least one VNF".into());
    }
    for v in &sfc {
        if !(v.load_ratio.is_finite() && v.load_ratio > 0.0) {
            bad("workload.sfc", format!("{} has non-positive load ratio", v.name));
        }
    }
    if let Some(m) = &w.movable {
        if let Some(&p) = m.iter().find(|&&p| p >= sfc.len()) {
            bad("workload.movable", format!("position {p} beyond {} VNFs", sfc.len()));
        }
    }

    let m = &cfg.model;
    if m.methods.is_empty() {
        bad("model.methods", "empty".into());
    }
    for name in &m.methods {
        if Method::parse(name).is_err() {
            bad("model.methods", format!("unknown method `{name}`"));
        }
    }
    if m.alphas.is_empty() {
        bad("model.alphas", "empty".into());
    }
    for &a in &m.alphas {
        if !(0.0..=1.0).contains(&a) {
            bad("model.alphas", format!("{a} not in [0, 1]"));
        }
    }
    if !(m.beta.is_finite() && m.beta >= 0.0) {
        bad("model.beta", format!("{} must be >= 0", m.beta));
    }
    if !(0.0..=1.0).contains(&m.e_m) {
        bad("model.e_m", format!("{} not in [0, 1]; E_m times a utilization must stay within the cost domain", m.e_m));
    }
    if !(m.e_r.is_finite() && m.e_r > 0.0) {
        bad("model.e_r", format!("{} must be > 0", m.e_r));
    }

    if cfg.costs.segments == 0 {
        bad("costs.segments", "must be >= 1".into());
    }
    if !(cfg.costs.steepness.is_finite() && cfg.costs.steepness > 0.0) {
        bad("costs.steepness", format!("{} must be > 0", cfg.costs.steepness));
    }

    let s = &cfg.solver;
    if !(s.max_wall_time.is_finite() && s.max_wall_time > 0.0) {
        bad("solver.max_wall_time", format!("{} must be > 0", s.max_wall_time));
    }
    if s.max_nodes == 0 {
        bad("solver.max_nodes", "must be > 0".into());
    }
    if s.max_iterations == 0 {
        bad("solver.max_iterations", "must be > 0".into());
    }
    if !(s.gap_tolerance.is_finite() && s.gap_tolerance > 0.0) {
        bad("solver.gap_tolerance", format!("{} must be > 0", s.gap_tolerance));
    }

    if out.is_empty() {
        if let Err(e) = cfg.build_topology().and_then(|t| cfg.build_workload(&t)) {
            out.push(Diagnostic::new("workload", e.to_string()));
        }
    }
    out
}

/// Child seed for one stream of a run.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix(mix(seed) ^ stream)
}

fn cell_seed(seed: u64, method: Method, alpha: f64) -> u64 {
    let tag = match method {
        Method::Migration => 11,
        Method::Replication => 12,
        Method::Combined => 13,
    };
    derive_seed(derive_seed(seed, tag), alpha.to_bits())
}

/// Solves with the configured backend; the exact backend starts from the
/// heuristic's solution.
pub fn solve_model(model: &ModelInstance, solver: &SolverConfig, seed: u64) -> Solution {
    let budget = solver.budget();
    let heur = solve_heuristic(model, seed, &budget);
    match solver.backend {
        Backend::Heuristic => heur,
        Backend::Exact => {
            let warm = heur.status.has_solution().then_some(heur.assignment.as_slice());
            let mut exact = solve_exact_with(model, &budget, warm);
            exact.stats.heuristic_iterations = heur.stats.heuristic_iterations;
            exact
        }
    }
}

/// Everything shared by the cells of one run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: Topology,
    pub workload: Workload,
    /// Routes offered to the initial placement.
    pub initial_catalog: RouteCatalog,
    pub initial: InitialPlacement,
    pub initial_solution: Solution,
    /// Routes offered to the re-optimization models.
    pub catalog: RouteCatalog,
}

/// Builds the scenario and solves its initial placement.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Scenario> {
    let topology = cfg.build_topology()?;
    let workload = cfg.build_workload(&topology)?;
    let max_i = cfg.workload.max_intermediate;
    let ecmp_seed = derive_seed(cfg.seed, 2);
    let initial_catalog = match cfg.routing() {
        Routing::Sdn => {
            RouteCatalog::from_sdn(&build_sdn_catalog(&topology, &workload.chains, max_i, DEFAULT_CATALOG_CAP)?)
        }
        Routing::Ecmp => RouteCatalog::ecmp_skeletons(&topology, &workload, max_i, ecmp_seed)?,
    };
    let model = build_initial_placement_model(&topology, &workload, &initial_catalog)?;
    let initial_solution = solve_model(&model, &cfg.solver, derive_seed(cfg.seed, 3));
    if !initial_solution.status.has_solution() || initial_solution.assignment.is_empty() {
        return Err(Error::Infeasible(format!(
            "initial placement: {:?} ({})",
            initial_solution.status,
            initial_solution.certificate.as_deref().unwrap_or("no certificate")
        )));
    }
    let initial = InitialPlacement::from_decisions(&model.decisions(&initial_solution.assignment)?)?;
    let catalog = match cfg.routing() {
        Routing::Sdn => initial_catalog.clone(),
        Routing::Ecmp => {
            let options = EcmpOptions { movable: cfg.workload.movable.clone(), candidates: None };
            let ecmp =
                build_ecmp_catalog(&topology, &workload.chains, &initial.vnf_nodes(&topology), &options, ecmp_seed)?;
            RouteCatalog::from_ecmp(&topology, &ecmp)
        }
    };
    Ok(Scenario { topology, workload, initial_catalog, initial, initial_solution, catalog })
}

impl Scenario {
    pub fn build_cell(&self, cfg: &ExperimentConfig, method: Method, alpha: f64) -> Result<ModelInstance> {
        build_main_model(
            &self.topology,
            &self.workload,
            &self.catalog,
            &self.initial,
            method,
            cfg.routing(),
            cfg.params(alpha),
            &cfg.costs(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub method: Method,
    pub alpha: f64,
    pub status: SolveStatus,
    /// `None` when the cell produced a verified report.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub cells: Vec<CellOutcome>,
    pub reports: Vec<UtilizationReport>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.cells.iter().any(|c| c.failure.is_some()) {
            EXIT_FAILURE
        } else {
            EXIT_OK
        }
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    scenario: &Scenario,
    method: Method,
    alpha: f64,
) -> (CellOutcome, Option<UtilizationReport>) {
    let fail = |status, msg: String| (CellOutcome { method, alpha, status, failure: Some(msg) }, None);
    let model = match scenario.build_cell(cfg, method, alpha) {
        Ok(m) => m,
        Err(e) => return fail(SolveStatus::Infeasible, e.to_string()),
    };
    let sol = solve_model(&model, &cfg.solver, cell_seed(cfg.seed, method, alpha));
    if !sol.status.has_solution() || sol.assignment.is_empty() {
        let why = sol.certificate.clone().unwrap_or_else(|| "no solution found".into());
        return fail(sol.status, why);
    }
    let check = verify(&model, &sol.assignment);
    if let Some(v) = check.violations.first() {
        return fail(sol.status, format!("verification failed: {} by {:e}", v.name, v.amount));
    }
    match compute_report(&model, &sol, &scenario.initial) {
        Ok(r) => (CellOutcome { method, alpha, status: sol.status, failure: None }, Some(r)),
        Err(e) => fail(sol.status, e.to_string()),
    }
}

/// Runs every (method, alpha) cell of an already validated config and
/// writes the report files to `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let scenario = prepare(cfg)?;
    let cells: Vec<(Method, f64)> =
        cfg.methods().into_iter().flat_map(|m| cfg.model.alphas.iter().map(move |&a| (m, a))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    let results: Vec<(CellOutcome, Option<UtilizationReport>)> =
        pool.install(|| cells.par_iter().map(|&(m, a)| run_cell(cfg, &scenario, m, a)).collect());
    let mut outcomes = Vec::with_capacity(results.len());
    let mut reports = Vec::new();
    for (c, r) in results {
        outcomes.push(c);
        reports.extend(r);
    }
    let files = write_report(&reports, &cfg.out)?;
    Ok(RunOutcome { cells: outcomes, reports, files })
}

/// Parses `mgr,0.5` style cell selectors.
pub fn parse_cell(s: &str) -> Result<(Method, f64)> {
    let (m, a) =
        s.split_once(',').ok_or_else(|| Error::invalid("cell", format!("expected <method,alpha>, got `{s}`")))?;
    let alpha: f64 = a.trim().parse().map_err(|_| Error::invalid("cell", format!("bad alpha `{a}`")))?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("cell", format!("alpha {alpha} not in [0, 1]")));
    }
    Ok((Method::parse(m.trim())?, alpha))
}

#[derive(Debug, Parser)]
#[command(name = "vnfplace", about = "VNF placement with migration and replication", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (method, alpha) cell and write reports.
    Run {
        /// Config file or preset name.
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config and list every problem.
    Validate { config: String },
    /// Write the LP file of one cell.
    ExportLp {
        config: String,
        /// `<method,alpha>`, e.g. `mgr,0.5`.
        #[arg(long)]
        cell: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List bundled presets.
    Presets,
}

fn load_valid(arg: &str, seed: Option<u64>) -> std::result::Result<ExperimentConfig, i32> {
    let mut cfg = match ExperimentConfig::load(arg) {
        Ok(c) => c,
        Err(diags) => {
            for d in diags {
                eprintln!("{d}");
            }
            return Err(EXIT_INVALID);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let diags = validate(&cfg);
    if !diags.is_empty() {
        for d in diags {
            eprintln!("{d}");
        }
        return Err(EXIT_INVALID);
    }
    Ok(cfg)
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::OutOfRange { .. } | Error::CatalogTooLarge { .. } => EXIT_INVALID,
        _ => EXIT_FAILURE,
    }
}

/// Executes a parsed command line; returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            EXIT_OK
        }
        Command::Validate { config } => match load_valid(&config, None) {
            Ok(_) => {
                println!("ok");
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Run { config, seed, out, threads } => {
            let mut cfg = match load_valid(&config, seed) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            match run(&cfg) {
                Ok(outcome) => {
                    for c in &outcome.cells {
                        let status = format!("{:?}", c.status).to_lowercase();
                        match &c.failure {
                            None => println!("{} alpha={} {status}", c.method, c.alpha),
                            Some(f) => println!("{} alpha={} {status} FAILED: {f}", c.method, c.alpha),
                        }
                    }
                    println!("wrote {} files to {}", outcome.files.len(), cfg.out.display());
                    outcome.exit_code()
                }
                Err(e) => {
                    eprintln!("{e}");
                    error_code(&e)
                }
            }
        }
        Command::ExportLp { config, cell, seed, out } => {
            let cfg = match load_valid(&config, seed) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let result = parse_cell(&cell)
                .and_then(|(m, a)| prepare(&cfg).and_then(|s| s.build_cell(&cfg, m, a)))
                .map(|model| crate::solve::export_lp(&model));
            match result {
                Ok(text) => match out {
                    Some(path) => match std::fs::write(&path, text) {
                        Ok(()) => EXIT_OK,
                        Err(e) => {
                            eprintln!("{}: {e}", path.display());
                            EXIT_FAILURE
                        }
                    },
                    None => {
                        print!("{text}");
                        EXIT_OK
                    }
                },
                Err(e) => {
                    eprintln!("{e}");
                    error_code(&e)
                }
            }
        }
    }
}

/// Parses `args` (program name first) and executes them.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            }
        }
    }
}
