//! Benchmark plans, result rows, summaries and the statistical checks run
//! over them.
//!
//! A plan names one graph, a list of algorithms, ε values, thread counts and
//! a repetition count. Repetition `r` fixes one permutation derived from the
//! root seed; serial KwikCluster runs once on it and every other cell runs on
//! the same permutation, so each row carries its ratio to that serial run.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::cdk::{cdk_run, CdkConfig};
use crate::engine::{self, Algorithm, EngineConfig, RunReport, Variant};
use crate::error::{Error, Result};
use crate::graph::{gen_gnp, gen_planted, load_edge_list, Graph, LoadOptions};
use crate::ordering::{derive_seed, random_permutation, Permutation, Rng};
use crate::quality::{disagreements, objective_ratio, ObjectiveBreakdown};
use crate::serial::{brute_force_opt, kwik_cluster};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSource {
    Path {
        path: PathBuf,
        #[serde(default = "default_true")]
        symmetrize: bool,
        #[serde(default)]
        compact: bool,
    },
    /// Without `seed` the generator seed is derived from the plan's root seed.
    Gnp {
        n: usize,
        p: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Planted {
        n: usize,
        k: usize,
        p_in: f64,
        p_out: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl GraphSource {
    pub fn load(&self, root_seed: u64) -> Result<Graph> {
        let seed = |s: &Option<u64>| s.unwrap_or_else(|| derive_seed(root_seed, "graph"));
        match self {
            GraphSource::Path {
                path,
                symmetrize,
                compact,
            } => Ok(load_edge_list(
                path,
                LoadOptions {
                    symmetrize: *symmetrize,
                    compact: *compact,
                },
            )?
            .graph),
            GraphSource::Gnp { n, p, seed: s } => gen_gnp(*n, *p, seed(s)),
            GraphSource::Planted {
                n,
                k,
                p_in,
                p_out,
                seed: s,
            } => gen_planted(*n, *k, *p_in, *p_out, seed(s)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GraphSource::Path { path, .. } => path.display().to_string(),
            GraphSource::Gnp { n, p, .. } => format!("gnp({n}, {p})"),
            GraphSource::Planted {
                n, k, p_in, p_out, ..
            } => format!("planted({n}, {k}, {p_in}, {p_out})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub graph: GraphSource,
    pub variants: Vec<Algorithm>,
    pub epsilons: Vec<f64>,
    pub threads: Vec<usize>,
    pub repetitions: usize,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub watchdog_secs: Option<u64>,
}

impl BenchPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: BenchPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut text = String::new();
        File::open(path.as_ref())?.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.variants.is_empty() || self.epsilons.is_empty() || self.threads.is_empty() {
            return Err(Error::invalid(
                "variants, epsilons and threads must be nonempty",
            ));
        }
        if let Some(e) = self.epsilons.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::invalid(format!("epsilon = {e} is outside (0, 1]")));
        }
        if self.threads.contains(&0) {
            return Err(Error::invalid("thread counts must be at least 1"));
        }
        Ok(())
    }
}

/// Seed of the permutation used by repetition `r`.
pub fn permutation_seed(root: u64, r: usize) -> u64 {
    derive_seed(root, &format!("perm/{r}"))
}

/// Seed of the batch sampling used by repetition `r`.
pub fn sampling_seed(root: u64, r: usize) -> u64 {
    derive_seed(root, &format!("batch/{r}"))
}

pub fn repetition_permutation(n: usize, root: u64, r: usize) -> Permutation {
    random_permutation(n, &mut Rng::new(permutation_seed(root, r)))
}

/// One row of a benchmark result. Serial rows leave `epsilon` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub graph: String,
    pub variant: Algorithm,
    pub epsilon: Option<f64>,
    pub threads: usize,
    pub repetition: usize,
    pub perm_seed: u64,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub rounds: u64,
    pub wall_ns_setup: u64,
    pub wall_ns_cluster: u64,
    pub blocked_vertices: u64,
    pub blocked_fraction: f64,
    pub objective: u64,
    pub positive_cut: u64,
    pub negative_within: u64,
    /// Objective over the serial objective on the same permutation; empty
    /// when the serial objective is zero and this one is not.
    pub objective_ratio: Option<f64>,
    pub matches_serial: Option<bool>,
    pub straggler_fallback: bool,
    pub status: RowStatus,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed,
}

impl BenchRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    fn from_report(
        graph: &str,
        g: &Graph,
        repetition: usize,
        perm_seed: u64,
        report: &RunReport,
    ) -> Self {
        BenchRow {
            graph: graph.to_string(),
            variant: report.variant,
            epsilon: (report.variant != Algorithm::Serial).then_some(report.epsilon),
            threads: report.threads,
            repetition,
            perm_seed,
            seed: report.seed,
            n: g.n(),
            m: g.m(),
            max_degree: g.max_degree(),
            rounds: report.rounds,
            wall_ns_setup: report.wall_ns_setup,
            wall_ns_cluster: report.wall_ns_cluster,
            blocked_vertices: report.blocked_vertices,
            blocked_fraction: report.blocked_fraction(),
            objective: report.objective,
            positive_cut: report.breakdown.positive_cut,
            negative_within: report.breakdown.negative_within,
            objective_ratio: None,
            matches_serial: None,
            straggler_fallback: report.straggler_fallback,
            status: RowStatus::Ok,
            error: None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn failed(
        graph: &str,
        g: &Graph,
        variant: Algorithm,
        epsilon: f64,
        threads: usize,
        repetition: usize,
        perm_seed: u64,
        seed: u64,
        err: &Error,
    ) -> Self {
        BenchRow {
            graph: graph.to_string(),
            variant,
            epsilon: Some(epsilon),
            threads,
            repetition,
            perm_seed,
            seed,
            n: g.n(),
            m: g.m(),
            max_degree: g.max_degree(),
            rounds: 0,
            wall_ns_setup: 0,
            wall_ns_cluster: 0,
            blocked_vertices: 0,
            blocked_fraction: 0.0,
            objective: 0,
            positive_cut: 0,
            negative_within: 0,
            objective_ratio: None,
            matches_serial: None,
            straggler_fallback: false,
            status: RowStatus::Failed,
            error: Some(err.to_string()),
        }
    }
}

/// Serial KwikCluster wrapped in a report so it can share the row format.
/// Its round count is the number of peel steps.
pub fn serial_report(g: &Graph, perm: &Permutation) -> Result<(crate::Assignment, RunReport)> {
    let start = std::time::Instant::now();
    let a = kwik_cluster(g, perm)?;
    let elapsed = start.elapsed();
    let mut report = RunReport::new(Algorithm::Serial, 0.0, 1, 0, g);
    report.rounds = a.cluster_count() as u64;
    report.wall_ns_cluster = elapsed.as_nanos() as u64;
    report.set_objective(disagreements(g, &a)?);
    Ok((a, report))
}

/// Runs one algorithm on one permutation. CDK ignores the permutation.
pub fn run_cell(
    g: &Graph,
    perm: &Permutation,
    algorithm: Algorithm,
    epsilon: f64,
    threads: usize,
    seed: u64,
    watchdog: Option<std::time::Duration>,
) -> Result<(crate::Assignment, RunReport)> {
    match algorithm {
        Algorithm::Serial => serial_report(g, perm),
        Algorithm::Cdk => cdk_run(
            g,
            &CdkConfig {
                epsilon,
                threads,
                seed,
                ..CdkConfig::default()
            },
        ),
        other => {
            let variant: Variant = other.engine_variant().expect("engine algorithm");
            let mut cfg = EngineConfig::new(variant)
                .epsilon(epsilon)
                .threads(threads)
                .seed(seed);
            if let Some(w) = watchdog {
                cfg.watchdog = w;
            }
            engine::run(g, perm, &cfg)
        }
    }
}

/// Runs `plan` on its own graph, passing every row to `on_row` as soon as it
/// exists.
pub fn run_plan(
    plan: &BenchPlan,
    on_row: impl FnMut(&BenchRow) -> Result<()>,
) -> Result<Vec<BenchRow>> {
    plan.validate()?;
    let g = plan.graph.load(plan.root_seed)?;
    run_plan_on(plan, &g, &plan.graph.describe(), on_row)
}

/// [`run_plan`] on an already built graph.
pub fn run_plan_on(
    plan: &BenchPlan,
    g: &Graph,
    graph_name: &str,
    mut on_row: impl FnMut(&BenchRow) -> Result<()>,
) -> Result<Vec<BenchRow>> {
    plan.validate()?;
    let watchdog = plan.watchdog_secs.map(std::time::Duration::from_secs);
    let mut rows = Vec::new();
    let mut emit = |row: BenchRow, rows: &mut Vec<BenchRow>| -> Result<()> {
        on_row(&row)?;
        rows.push(row);
        Ok(())
    };
    for r in 0..plan.repetitions {
        let perm_seed = permutation_seed(plan.root_seed, r);
        let seed = sampling_seed(plan.root_seed, r);
        let perm = random_permutation(g.n(), &mut Rng::new(perm_seed));
        let (serial, serial_rep) = serial_report(g, &perm)?;
        let serial_canonical = serial.canonical();
        info!("repetition {r}: serial objective {}", serial_rep.objective);
        if plan.variants.contains(&Algorithm::Serial) {
            let mut row = BenchRow::from_report(graph_name, g, r, perm_seed, &serial_rep);
            row.objective_ratio = Some(1.0);
            row.matches_serial = Some(true);
            emit(row, &mut rows)?;
        }
        for &variant in plan.variants.iter().filter(|&&v| v != Algorithm::Serial) {
            for &epsilon in &plan.epsilons {
                for &threads in &plan.threads {
                    let row = match run_cell(g, &perm, variant, epsilon, threads, seed, watchdog) {
                        Ok((a, report)) => {
                            let mut row =
                                BenchRow::from_report(graph_name, g, r, perm_seed, &report);
                            row.objective_ratio =
                                objective_ratio(&serial_rep.breakdown, &report.breakdown).ok();
                            row.matches_serial = Some(a.canonical() == serial_canonical);
                            row
                        }
                        Err(err) => {
                            warn!("{variant} eps={epsilon} P={threads} rep={r} failed: {err}");
                            BenchRow::failed(
                                graph_name, g, variant, epsilon, threads, r, perm_seed, seed, &err,
                            )
                        }
                    };
                    emit(row, &mut rows)?;
                }
            }
        }
    }
    Ok(rows)
}

/// CSV sink that flushes after every row.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl CsvSink<File> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(File::create(path)?))
    }
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Self {
        CsvSink {
            writer: csv::Writer::from_writer(inner),
        }
    }

    pub fn write(&mut self, row: &BenchRow) -> Result<()> {
        self.writer.serialize(row)?;
        self.writer.flush()?;
        Ok(())
    }
}

pub fn write_rows<W: Write>(rows: &[BenchRow], writer: W) -> Result<()> {
    let mut sink = CsvSink::new(writer);
    for row in rows {
        sink.write(row)?;
    }
    Ok(())
}

pub fn read_rows<R: Read>(reader: R) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in rdr.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub graph: String,
    pub variant: Algorithm,
    pub epsilon: Option<f64>,
    pub threads: usize,
    pub runs: usize,
    pub failed: usize,
    pub mean_wall_ns: f64,
    pub median_wall_ns: f64,
    /// Mean wall time at one thread over mean wall time here, for the same
    /// graph, algorithm and ε.
    pub speedup: Option<f64>,
    pub median_objective: f64,
    pub median_objective_ratio: Option<f64>,
    pub max_blocked_fraction: f64,
    pub mean_rounds: f64,
    pub all_match_serial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hardware {
    pub available_parallelism: usize,
    pub os: String,
    pub arch: String,
}

impl Hardware {
    pub fn detect() -> Self {
        Hardware {
            available_parallelism: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub hardware: Hardware,
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn cell(
        &self,
        variant: Algorithm,
        epsilon: Option<f64>,
        threads: usize,
    ) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.variant == variant && c.epsilon == epsilon && c.threads == threads)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

type CellKey = (String, Algorithm, Option<u64>, usize);

pub fn summarize(rows: &[BenchRow]) -> Summary {
    let mut groups: BTreeMap<CellKey, Vec<&BenchRow>> = BTreeMap::new();
    for row in rows {
        let key = (
            row.graph.clone(),
            row.variant,
            row.epsilon.map(f64::to_bits),
            row.threads,
        );
        groups.entry(key).or_default().push(row);
    }
    let mut cells: Vec<CellSummary> = groups
        .iter()
        .map(|((graph, variant, eps, threads), group)| {
            let ok: Vec<&&BenchRow> = group.iter().filter(|r| r.is_ok()).collect();
            let walls: Vec<f64> = ok.iter().map(|r| r.wall_ns_cluster as f64).collect();
            let ratios: Vec<f64> = ok.iter().filter_map(|r| r.objective_ratio).collect();
            let objectives: Vec<f64> = ok.iter().map(|r| r.objective as f64).collect();
            CellSummary {
                graph: graph.clone(),
                variant: *variant,
                epsilon: eps.map(f64::from_bits),
                threads: *threads,
                runs: group.len(),
                failed: group.len() - ok.len(),
                mean_wall_ns: mean(&walls),
                median_wall_ns: median(&walls),
                speedup: None,
                median_objective: median(&objectives),
                median_objective_ratio: (!ratios.is_empty()).then(|| median(&ratios)),
                max_blocked_fraction: ok.iter().map(|r| r.blocked_fraction).fold(0.0, f64::max),
                mean_rounds: mean(&ok.iter().map(|r| r.rounds as f64).collect::<Vec<_>>()),
                all_match_serial: ok.iter().all(|r| r.matches_serial != Some(false)),
            }
        })
        .collect();
    let base: Vec<(String, Algorithm, Option<f64>, f64)> = cells
        .iter()
        .filter(|c| c.threads == 1)
        .map(|c| (c.graph.clone(), c.variant, c.epsilon, c.mean_wall_ns))
        .collect();
    for cell in &mut cells {
        cell.speedup = base
            .iter()
            .find(|(g, v, e, _)| *g == cell.graph && *v == cell.variant && *e == cell.epsilon)
            .map(|&(.., t1)| {
                if cell.mean_wall_ns > 0.0 {
                    t1 / cell.mean_wall_ns
                } else {
                    1.0
                }
            });
    }
    Summary {
        hardware: Hardware::detect(),
        cells,
    }
}

/// Outcome of one statistical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

/// A small graph together with its optimum objective.
#[derive(Debug, Clone)]
pub struct OracleFixture {
    pub name: String,
    pub graph: Graph,
    pub opt: u64,
}

/// Twenty G(n, 1/2) graphs with n cycling through 6..=12, each solved exactly.
pub fn oracle_fixtures(root: u64) -> Result<Vec<OracleFixture>> {
    (0..20)
        .map(|i| {
            let n = 6 + i % 7;
            let graph = gen_gnp(n, 0.5, derive_seed(root, &format!("oracle/{i}")))?;
            let (opt, _) = brute_force_opt(&graph)?;
            Ok(OracleFixture {
                name: format!("oracle-{i}-n{n}"),
                graph,
                opt,
            })
        })
        .collect()
}

/// Named generator specs for the desk-scale experiments.
pub fn desk_fixtures() -> Vec<(&'static str, GraphSource)> {
    vec![
        (
            "gnp-2000",
            GraphSource::Gnp {
                n: 2000,
                p: 0.01,
                seed: Some(7),
            },
        ),
        (
            "planted-2000",
            GraphSource::Planted {
                n: 2000,
                k: 20,
                p_in: 0.3,
                p_out: 0.005,
                seed: Some(7),
            },
        ),
        (
            "gnp-5000",
            GraphSource::Gnp {
                n: 5000,
                p: 0.002,
                seed: Some(11),
            },
        ),
        (
            "gnp-1m",
            GraphSource::Gnp {
                n: 1_000_000,
                p: 2e-5,
                seed: Some(13),
            },
        ),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisConfig {
    pub permutations: usize,
    pub epsilon: f64,
    pub threads: usize,
    pub seed: u64,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        HypothesisConfig {
            permutations: 10_000,
            epsilon: 0.9,
            threads: 1,
            seed: 0,
        }
    }
}

fn objectives_over_perms(
    fixture: &OracleFixture,
    cfg: &HypothesisConfig,
    algorithm: Algorithm,
) -> Result<Vec<f64>> {
    let g = &fixture.graph;
    (0..cfg.permutations)
        .map(|r| {
            let perm = repetition_permutation(g.n(), cfg.seed, r);
            let objective = match algorithm {
                Algorithm::Serial => disagreements(g, &kwik_cluster(g, &perm)?)?.total,
                other => {
                    run_cell(
                        g,
                        &perm,
                        other,
                        cfg.epsilon,
                        cfg.threads,
                        sampling_seed(cfg.seed, r),
                        None,
                    )?
                    .1
                    .objective
                }
            };
            Ok(objective as f64)
        })
        .collect()
}

/// Serial mean objective within `3·OPT` plus three standard errors on
/// every fixture.
pub fn serial_approximation_check(
    fixtures: &[OracleFixture],
    cfg: &HypothesisConfig,
) -> Result<Verdict> {
    let mut metrics = BTreeMap::new();
    let mut failures = Vec::new();
    for f in fixtures {
        let xs = objectives_over_perms(f, cfg, Algorithm::Serial)?;
        let m = mean(&xs);
        let bound = 3.0 * f.opt as f64 + 3.0 * std_dev(&xs) / (xs.len() as f64).sqrt();
        metrics.insert(format!("{}.mean", f.name), m);
        metrics.insert(format!("{}.opt", f.name), f.opt as f64);
        if m > bound {
            failures.push(format!("{}: mean {m:.4} > bound {bound:.4}", f.name));
        }
    }
    Ok(Verdict {
        check: "serial-3-approximation".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "{} fixtures, {} permutations each",
                fixtures.len(),
                cfg.permutations
            )
        } else {
            failures.join("; ")
        },
        metrics,
    })
}

/// ClusterWild! BSP mean objective against `(3+ε)·OPT`. The guarantee
/// carries an additive `ε·n·log²n` term that dominates at these sizes, so a
/// fixture that misses the multiplicative bound but stays inside the
/// additive one passes with a caveat in the detail text.
pub fn cw_approximation_check(
    fixtures: &[OracleFixture],
    cfg: &HypothesisConfig,
) -> Result<Verdict> {
    let eps = cfg.epsilon;
    let mut metrics = BTreeMap::new();
    let mut failures = Vec::new();
    let mut caveats = Vec::new();
    for f in fixtures {
        let xs = objectives_over_perms(f, cfg, Algorithm::CwBsp)?;
        let m = mean(&xs);
        let se = std_dev(&xs) / (xs.len() as f64).sqrt();
        let strict = (3.0 + eps) * f.opt as f64 + 3.0 * se;
        let n = f.graph.n() as f64;
        let additive = eps * n * n.log2().powi(2);
        metrics.insert(format!("{}.mean", f.name), m);
        metrics.insert(format!("{}.opt", f.name), f.opt as f64);
        if m > strict + additive {
            failures.push(format!(
                "{}: mean {m:.4} > {:.4}",
                f.name,
                strict + additive
            ));
        } else if m > strict {
            caveats.push(format!(
                "{}: mean {m:.4} above (3+eps)*OPT, inside additive term",
                f.name
            ));
        }
    }
    let detail = if !failures.is_empty() {
        failures.join("; ")
    } else if !caveats.is_empty() {
        caveats.join("; ")
    } else {
        format!("all {} fixtures within (3+eps)*OPT", fixtures.len())
    };
    Ok(Verdict {
        check: "cw-approximation".into(),
        passed: failures.is_empty(),
        detail,
        metrics,
    })
}

/// `8·(1/ε)·ln(n)·log₂(Δ+1)`, floored at one round.
pub fn round_bound(n: usize, max_degree: usize, epsilon: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let raw = 8.0 / epsilon * (n as f64).ln() * ((max_degree + 1) as f64).log2();
    raw.max(1.0)
}

/// Every BSP row stays within [`round_bound`].
pub fn round_bound_check(rows: &[BenchRow]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for row in rows
        .iter()
        .filter(|r| r.is_ok() && matches!(r.variant, Algorithm::C4Bsp | Algorithm::CwBsp))
    {
        let eps = row.epsilon.unwrap_or(1.0);
        let bound = round_bound(row.n, row.max_degree, eps);
        worst = worst.max(row.rounds as f64 / bound);
        checked += 1;
        if row.rounds as f64 > bound {
            failures.push(format!(
                "{} eps={eps} rep={}: {} > {bound:.1}",
                row.variant, row.repetition, row.rounds
            ));
        }
    }
    let mut metrics = BTreeMap::new();
    metrics.insert("rows".into(), checked as f64);
    metrics.insert("max_rounds_over_bound".into(), worst);
    Verdict {
        check: "round-bound".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} rows within bound")
        } else {
            failures.join("; ")
        },
        metrics,
    }
}

/// Runs the three checks: serial approximation and CW approximation on the
/// oracle fixtures, and the round bound on `rows`.
pub fn hypothesis_tests(
    rows: &[BenchRow],
    fixtures: &[OracleFixture],
    cfg: &HypothesisConfig,
) -> Result<Vec<Verdict>> {
    Ok(vec![
        serial_approximation_check(fixtures, cfg)?,
        cw_approximation_check(fixtures, cfg)?,
        round_bound_check(rows),
    ])
}

/// Breakdown of the serial run used as the ratio reference.
pub fn serial_breakdown(g: &Graph, perm: &Permutation) -> Result<ObjectiveBreakdown> {
    disagreements(g, &kwik_cluster(g, perm)?)
}
