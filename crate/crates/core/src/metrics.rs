//! Utilization distributions, migration and replication counts, and report
//! files.
//!
//! Files written by [`write_report`] for a report with stem `<stem>`
//! (`<routing>_<method>_a<alpha>`):
//!
//! - `<stem>_summary.json`: every field of [`UtilizationReport`]
//! - `<stem>_server_cdf.txt`, `<stem>_link_cdf.txt`: lines `value fraction`
//! - `comparison.csv`: one row per (routing, method), one `m-r` cell per alpha

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    count_migrations, count_replicas, replica_overhead, InitialPlacement, Method, ModelInstance, Routing,
};
use crate::solve::{verify, Solution};
use crate::topology::{LinkId, ServerId};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilizationReport {
    /// `None` for the initial-placement model.
    pub method: Option<Method>,
    pub routing: Routing,
    pub alpha: f64,
    pub seed: u64,
    pub objective: f64,
    pub status: crate::solve::SolveStatus,
    pub nodes: u64,
    pub iterations: u64,
    pub per_server: Vec<(ServerId, f64)>,
    pub per_link: Vec<(LinkId, f64)>,
    pub server_mean: f64,
    pub server_max: f64,
    pub link_mean: f64,
    pub link_max: f64,
    pub migrations: usize,
    pub replicas: usize,
}

impl UtilizationReport {
    pub fn stem(&self) -> String {
        let routing = match self.routing {
            Routing::Ecmp => "ecmp",
            Routing::Sdn => "sdn",
        };
        let method = self.method.map_or("initial", Method::tag);
        format!("{routing}_{method}_a{}", round6(self.alpha))
    }
}

fn mean_max(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let sum: f64 = values.iter().sum();
    (sum / values.len() as f64, values.iter().copied().fold(0.0, f64::max))
}

/// Recomputes utilizations from the routing and usage choices in `solution`.
pub fn compute_report(
    model: &ModelInstance,
    solution: &Solution,
    initial: &InitialPlacement,
) -> Result<UtilizationReport> {
    if !solution.status.has_solution() || solution.assignment.is_empty() {
        return Err(Error::Infeasible(format!("solution status {:?}", solution.status)));
    }
    let check = verify(model, &solution.assignment);
    if let Some(v) = check.violations.first() {
        return Err(Error::Infeasible(format!("{} violated by {:e}", v.name, v.amount)));
    }
    let x = &solution.assignment;
    let decisions = model.decisions(x)?;
    let placement = model.placement(&decisions);
    let d = &model.data;
    let topo = &d.topology;
    let overhead = model.method().is_some_and(Method::allows_replicas);
    let e_r = model.meta.params.e_r;

    let mut server = vec![0.0; topo.servers.len()];
    let mut link = vec![0.0; topo.links.len()];
    for (s, (chain, dec)) in d.workload.chains.iter().zip(&decisions.chains).enumerate() {
        let options = &d.catalog.chains[s].options;
        for (dm, &o) in dec.routes.iter().enumerate() {
            let bw = chain.demands[dm].bandwidth;
            for &l in &options[o].path(dm).links {
                link[l.0] += bw / topo.link(l).capacity;
            }
        }
        for (v, vnf) in chain.vnfs.iter().enumerate() {
            for &srv in &placement.chains[s][v] {
                let cap = topo.server(srv).capacity;
                let u: f64 = (0..chain.demands.len())
                    .filter(|&dm| dec.servers[dm][v] == srv)
                    .map(|dm| chain.demands[dm].bandwidth * vnf.load_ratio / cap)
                    .sum();
                server[srv.0] += u;
                if overhead && !initial.placed(s, v, srv) {
                    server[srv.0] += replica_overhead(e_r, cap, u, true);
                }
            }
        }
    }
    let (server_mean, server_max) = mean_max(&server);
    let (link_mean, link_max) = mean_max(&link);
    Ok(UtilizationReport {
        method: model.method(),
        routing: model.meta.routing,
        alpha: model.meta.params.alpha,
        seed: d.workload.rng_seed,
        objective: check.objective,
        status: solution.status,
        nodes: solution.stats.nodes,
        iterations: solution.stats.lp_iterations + solution.stats.heuristic_iterations,
        per_server: topo.servers.iter().map(|s| (s.id, server[s.id.0])).collect(),
        per_link: topo.links.iter().map(|l| (l.id, link[l.id.0])).collect(),
        server_mean,
        server_max,
        link_mean,
        link_max,
        migrations: count_migrations(initial, &placement),
        replicas: count_replicas(&placement),
    })
}

/// Empirical CDF: one point per distinct value with the fraction of values
/// at or below it.
pub fn cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => out.push((v, frac)),
        }
    }
    out
}

pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    method: &'a str,
    routing: Routing,
    alpha: f64,
    seed: u64,
    status: crate::solve::SolveStatus,
    objective: f64,
    nodes: u64,
    iterations: u64,
    migrations: usize,
    replicas: usize,
    server_mean: f64,
    server_max: f64,
    link_mean: f64,
    link_max: f64,
    per_server: Vec<(usize, f64)>,
    per_link: Vec<(usize, f64)>,
}

fn summary_json(r: &UtilizationReport) -> String {
    let s = Summary {
        method: r.method.map_or("initial", Method::tag),
        routing: r.routing,
        alpha: round6(r.alpha),
        seed: r.seed,
        status: r.status,
        objective: round6(r.objective),
        nodes: r.nodes,
        iterations: r.iterations,
        migrations: r.migrations,
        replicas: r.replicas,
        server_mean: round6(r.server_mean),
        server_max: round6(r.server_max),
        link_mean: round6(r.link_mean),
        link_max: round6(r.link_max),
        per_server: r.per_server.iter().map(|&(x, u)| (x.0, round6(u))).collect(),
        per_link: r.per_link.iter().map(|&(l, u)| (l.0, round6(u))).collect(),
    };
    serde_json::to_string_pretty(&s).expect("summary serializes") + "\n"
}

fn cdf_text(values: &[f64]) -> String {
    let rounded: Vec<f64> = values.iter().map(|&v| round6(v)).collect();
    let mut out = String::from("# value fraction\n");
    for (v, f) in cdf(&rounded) {
        writeln!(out, "{:.6} {:.6}", v, f).expect("write to string");
    }
    out
}

/// Table of `migrations-replicas` pairs: rows are (routing, method), columns
/// are the distinct alphas in ascending order.
pub fn comparison_table(reports: &[UtilizationReport]) -> String {
    let alphas: Vec<f64> = {
        let set: BTreeSet<u64> = reports.iter().map(|r| round6(r.alpha).to_bits()).collect();
        let mut v: Vec<f64> = set.into_iter().map(f64::from_bits).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let mut rows: Vec<(Routing, Option<Method>)> = Vec::new();
    for r in reports {
        if !rows.contains(&(r.routing, r.method)) {
            rows.push((r.routing, r.method));
        }
    }
    rows.sort_by_key(|&(routing, m)| (routing == Routing::Sdn, m));
    let mut out = String::from("routing,method");
    for a in &alphas {
        write!(out, ",alpha={a}").expect("write to string");
    }
    out.push('\n');
    for (routing, method) in rows {
        let tag = match routing {
            Routing::Ecmp => "ecmp",
            Routing::Sdn => "sdn",
        };
        write!(out, "{tag},{}", method.map_or("initial", Method::tag)).expect("write to string");
        for &a in &alphas {
            let cell = reports
                .iter()
                .find(|r| r.routing == routing && r.method == method && round6(r.alpha) == a)
                .map_or_else(|| "-".to_string(), |r| format!("{}-{}", r.migrations, r.replicas));
            write!(out, ",{cell}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

fn write_file(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes three files per report plus `comparison.csv`; returns their paths.
pub fn write_report(reports: &[UtilizationReport], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for r in reports {
        let stem = r.stem();
        let servers: Vec<f64> = r.per_server.iter().map(|p| p.1).collect();
        let links: Vec<f64> = r.per_link.iter().map(|p| p.1).collect();
        written.push(write_file(out_dir.join(format!("{stem}_summary.json")), &summary_json(r))?);
        written.push(write_file(out_dir.join(format!("{stem}_server_cdf.txt")), &cdf_text(&servers))?);
        written.push(write_file(out_dir.join(format!("{stem}_link_cdf.txt")), &cdf_text(&links))?);
    }
    written.push(write_file(out_dir.join("comparison.csv"), &comparison_table(reports))?);
    Ok(written)
}
