//! ILP instances for the initial placement and for the migration,
//! replication, and combined re-optimization methods.
//!
//! Every generated row carries a name of the form `eq<N><part>_<indices>`
//! (for example `eq14_s0_d2`), which the verifier and the LP writer reuse.

mod build;
mod catalog;
mod placement;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::costs::CostFunctionSet;
use crate::error::{Error, Result};
use crate::topology::{LinkId, ServerId, Topology};
use crate::workload::Workload;

pub use build::{build_initial_placement_model, build_main_model, replica_overhead};
pub use catalog::{path_servers, precedence_sets, ChainRoutes, RouteCatalog, RouteOption, Routing};
pub use placement::{
    count_migrations, count_replicas, ChainDecision, ChainPlacement, Decisions, InitialPlacement, Placement,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "mgr")]
    Migration,
    #[serde(rename = "rep")]
    Replication,
    #[serde(rename = "mgr_rep")]
    Combined,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Migration, Method::Replication, Method::Combined];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Migration => "mgr",
            Method::Replication => "rep",
            Method::Combined => "mgr_rep",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "mgr" => Ok(Method::Migration),
            "rep" => Ok(Method::Replication),
            "mgr_rep" | "mgr&rep" => Ok(Method::Combined),
            _ => Err(Error::invalid("method", format!("unknown method `{s}`"))),
        }
    }

    pub fn allows_replicas(self) -> bool {
        self != Method::Migration
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    pub alpha: f64,
    pub beta: f64,
    /// Migration penalty ratio.
    pub e_m: f64,
    /// Replication overhead ratio.
    pub e_r: f64,
    /// Maximum replicas per chain; forced to 0 for the migration method.
    pub r_max: usize,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams { alpha: 0.5, beta: 0.1, e_m: 1.0, e_r: 0.05, r_max: usize::MAX }
    }
}

impl MethodParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", format!("{} not in [0, 1]", self.alpha)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", format!("{} must be >= 0", self.beta)));
        }
        // E_m * u stays a valid cost-function argument for u <= 1
        if !(self.e_m >= 0.0 && self.e_m <= 1.0) {
            return Err(Error::invalid("e_m", format!("{} not in [0, 1]", self.e_m)));
        }
        if !(self.e_r > 0.0 && self.e_r.is_finite()) {
            return Err(Error::invalid("e_r", format!("{} must be > 0", self.e_r)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKey {
    RouteChain { chain: usize, option: usize },
    RouteDemand { chain: usize, demand: usize, option: usize },
    Place { chain: usize, vnf: usize, server: ServerId },
    Use { chain: usize, vnf: usize, server: ServerId, demand: usize },
    UsedServer { server: ServerId },
    VnfUtil { chain: usize, vnf: usize, server: ServerId },
    ServerUtil { server: ServerId },
    LinkUtil { link: LinkId },
    ServerCost { server: ServerId },
    LinkCost { link: LinkId },
    MigrationCost { chain: usize, vnf: usize },
}

impl VarKey {
    pub fn name(&self, routing: Routing) -> String {
        let ecmp = routing == Routing::Ecmp;
        match *self {
            VarKey::RouteChain { chain, option } if ecmp => format!("ri_s{chain}_i{option}"),
            VarKey::RouteChain { chain, option } => format!("r_s{chain}_p{option}"),
            VarKey::RouteDemand { chain, demand, option } if ecmp => format!("rij_s{chain}_d{demand}_i{option}"),
            VarKey::RouteDemand { chain, demand, option } => format!("rd_s{chain}_d{demand}_p{option}"),
            VarKey::Place { chain, vnf, server } => format!("f_s{chain}_v{vnf}_x{}", server.0),
            VarKey::Use { chain, vnf, server, demand } => format!("fu_s{chain}_v{vnf}_x{}_d{demand}", server.0),
            VarKey::UsedServer { server } => format!("z_x{}", server.0),
            VarKey::VnfUtil { chain, vnf, server } => format!("uv_s{chain}_v{vnf}_x{}", server.0),
            VarKey::ServerUtil { server } => format!("ux_x{}", server.0),
            VarKey::LinkUtil { link } => format!("ul_l{}", link.0),
            VarKey::ServerCost { server } => format!("kx_x{}", server.0),
            VarKey::LinkCost { link } => format!("kl_l{}", link.0),
            VarKey::MigrationCost { chain, vnf } => format!("kv_s{chain}_v{vnf}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub key: VarKey,
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded above.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Initial,
    Main(Method),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelMeta {
    pub kind: ModelKind,
    pub routing: Routing,
    pub params: MethodParams,
}

/// Problem data the instance was generated from, kept for heuristics,
/// reporting, and structural completion of assignments.
#[derive(Debug, Clone)]
pub struct ModelData {
    pub topology: Topology,
    pub workload: Workload,
    pub catalog: RouteCatalog,
    pub initial: Option<InitialPlacement>,
    pub costs: CostFunctionSet,
    /// Servers eligible per chain: those on some option's path.
    pub candidates: Vec<Vec<ServerId>>,
}

#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, f64)>,
    pub meta: ModelMeta,
    pub data: ModelData,
    index: HashMap<VarKey, usize>,
}

impl ModelInstance {
    pub fn var(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    pub fn method(&self) -> Option<Method> {
        match self.meta.kind {
            ModelKind::Main(m) => Some(m),
            ModelKind::Initial => None,
        }
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables.iter().enumerate().filter(|(_, v)| v.kind == VarKind::Binary).map(|(j, _)| j)
    }

    /// Value of `key`, or 0 for variables the instance does not declare.
    pub fn value(&self, x: &[f64], key: VarKey) -> f64 {
        self.var(&key).map_or(0.0, |j| x[j])
    }

    /// Weighted migration-cost term of the objective.
    pub fn migration_term(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .filter(|(j, _)| matches!(self.variables[*j].key, VarKey::MigrationCost { .. }))
            .map(|&(j, c)| c * x[j])
            .sum()
    }
}
