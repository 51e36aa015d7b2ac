//! Fully resolved invocations and their execution.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use drp_core::acoustic1d::{self, Acoustic1DConfig};
use drp_core::dispersion::{self, DispersionCurve};
use drp_core::elastic2d::{self, ElasticConfig, ElasticScheme};
use drp_core::io::{self, Snapshot, Table};
use drp_core::stencil::DEFAULT_WINDOW;
use drp_core::{conventional_stencil, optimize_family, taylor_constraint_family, Extent, GridKind, Stencil};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::{Failure, Outcome};
use crate::figures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Conventional,
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StencilParams {
    pub derivative: u32,
    pub grid_kind: GridKind,
    /// Half-width for collocated stencils, coefficient pairs for staggered ones.
    pub extent: u32,
    pub method: Method,
    pub order: Option<u32>,
    pub window: f64,
}

impl Default for StencilParams {
    fn default() -> Self {
        Self {
            derivative: 2,
            grid_kind: GridKind::Collocated,
            extent: 3,
            method: Method::Optimized,
            order: None,
            window: DEFAULT_WINDOW,
        }
    }
}

impl StencilParams {
    /// Builds the stencil and pins `order` to the one actually used.
    pub fn build(&mut self) -> Outcome<Stencil> {
        if !(1..=2).contains(&self.derivative) {
            return Err(Failure::Usage(format!("derivative must be 1 or 2, got {}", self.derivative)));
        }
        let extent = match self.grid_kind {
            GridKind::Collocated => Extent::symmetric(self.extent),
            kind => Extent::staggered(kind, self.extent),
        };
        let conventional = conventional_stencil(self.derivative, self.grid_kind, extent)?;
        let max_order = conventional.accuracy_order();
        match self.method {
            Method::Conventional => {
                if let Some(order) = self.order.filter(|&o| o != max_order) {
                    return Err(Failure::Usage(format!(
                        "a conventional stencil of this extent has order {max_order}, not {order}"
                    )));
                }
                self.order = Some(max_order);
                Ok(conventional)
            }
            Method::Optimized => {
                let order = self.order.unwrap_or(max_order.saturating_sub(2));
                self.order = Some(order);
                let family = taylor_constraint_family(self.derivative, self.grid_kind, extent, order)?;
                Ok(optimize_family(&family, self.window)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeParams {
    pub stencil: StencilParams,
    /// Layout of the coefficients printed on stdout.
    pub format: OutputFormat,
}

impl Default for OptimizeParams {
    fn default() -> Self {
        Self { stencil: StencilParams::default(), format: OutputFormat::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionParams {
    pub stencil: StencilParams,
    pub samples: usize,
}

impl Default for DispersionParams {
    fn default() -> Self {
        Self { stencil: StencilParams::default(), samples: dispersion::DEFAULT_SAMPLES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionParams {
    pub stencil: StencilParams,
    pub tolerance: f64,
}

impl Default for ResolutionParams {
    fn default() -> Self {
        Self { stencil: StencilParams::default(), tolerance: dispersion::DEFAULT_TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Acoustic1DParams {
    pub config: Acoustic1DConfig,
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub template: Acoustic1DConfig,
    pub n_cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticParams {
    pub config: ElasticConfig,
    pub scheme: ElasticScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffParams {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureParams {
    pub id: String,
}

/// A subcommand together with every parameter it runs with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "parameters", rename_all = "snake_case")]
pub enum Invocation {
    Optimize(OptimizeParams),
    Dispersion(DispersionParams),
    Resolution(ResolutionParams),
    Acoustic1d(Acoustic1DParams),
    Sweep(SweepParams),
    Elastic2d(ElasticParams),
    Diff(DiffParams),
    Figure(FigureParams),
}

impl Invocation {
    /// Fills in everything a replay needs, failing early on invalid input.
    pub fn resolve(&mut self) -> Outcome<()> {
        match self {
            Invocation::Optimize(p) => {
                p.stencil.method = Method::Optimized;
                p.stencil.build().map(drop)
            }
            Invocation::Dispersion(p) => p.stencil.build().map(drop),
            Invocation::Resolution(p) => p.stencil.build().map(drop),
            Invocation::Acoustic1d(p) => {
                p.config.validate()?;
                if let Some(t) = p.snapshot_times.iter().find(|&&t| !(t >= 0.0 && t <= p.config.t_end)) {
                    return Err(Failure::Usage(format!("snapshot time {t} lies outside [0, {}]", p.config.t_end)));
                }
                Ok(())
            }
            Invocation::Sweep(p) => {
                p.template.validate()?;
                if p.n_cells.is_empty() {
                    return Err(Failure::Usage("sweep needs at least one cell count".into()));
                }
                Ok(())
            }
            Invocation::Elastic2d(p) => Ok(p.config.validate()?),
            Invocation::Diff(p) => {
                p.a = canonical_dir(&p.a)?;
                p.b = canonical_dir(&p.b)?;
                Ok(())
            }
            Invocation::Figure(p) => {
                p.id = figures::canonical_id(&p.id)?.to_string();
                Ok(())
            }
        }
    }
}

fn canonical_dir(path: &Path) -> Outcome<PathBuf> {
    let dir = fs::canonicalize(path).map_err(|e| Failure::io(path, e))?;
    if !dir.is_dir() {
        return Err(Failure::Usage(format!("{} is not a directory", path.display())));
    }
    Ok(dir)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: invalid JSON: {e}", path.display())))
}

/// Files written by one invocation, named relative to its output directory.
#[derive(Debug, Default)]
pub struct Output {
    dir: Option<PathBuf>,
    pub files: Vec<String>,
    pub stdout: String,
}

impl Output {
    pub fn new(dir: Option<&Path>) -> Outcome<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| Failure::io(d, e))?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf), ..Self::default() })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Outcome<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Failure::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Failure::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Outcome<()> {
        self.write(name, &table.to_csv_string())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Outcome<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn snapshot(&mut self, subdir: &str, s: &Snapshot) -> Outcome<()> {
        let name = if subdir.is_empty() { s.file_name() } else { format!("{subdir}/{}", s.file_name()) };
        self.write(&name, &s.to_csv_string())
    }

    pub fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }
}

pub fn execute(inv: &Invocation, out: &mut Output) -> Outcome<()> {
    match inv {
        Invocation::Optimize(p) => optimize(p, out),
        Invocation::Dispersion(p) => dispersion_curve(p, out),
        Invocation::Resolution(p) => resolution(p, out),
        Invocation::Acoustic1d(p) => acoustic(p, out),
        Invocation::Sweep(p) => sweep(p, out),
        Invocation::Elastic2d(p) => elastic(p, out),
        Invocation::Diff(p) => diff(p, out),
        Invocation::Figure(p) => figures::render(&p.id, out),
    }
}

pub fn stencil_table(stencil: &Stencil, window: f64) -> Outcome<Table> {
    let e = stencil.spectral_error(window)?;
    let mut table = Table::new(["offset", "coefficient"])
        .comment(format!(
            "{} derivative={} grid_kind={} order={}",
            stencil.label(),
            stencil.derivative_order(),
            stencil.grid_kind(),
            stencil.accuracy_order()
        ))
        .comment(format!("window={window} E={}", io::format_f64(e)));
    for (j, a) in stencil.offsets().iter().zip(stencil.coefficients()) {
        table.push_row(vec![j.to_string(), io::format_f64(*a)]);
    }
    Ok(table)
}

fn optimize(p: &OptimizeParams, out: &mut Output) -> Outcome<()> {
    let mut params = p.stencil.clone();
    let stencil = params.build()?;
    let table = stencil_table(&stencil, params.window)?;
    let report = stencil.report(params.window)?;
    match p.format {
        OutputFormat::Csv => out.say(table.to_csv_string().trim_end()),
        OutputFormat::Json => out.say(serde_json::to_string_pretty(&report).expect("serializable")),
    }
    out.table("stencil.csv", &table)?;
    out.json("stencil.json", &report)
}

fn dispersion_curve(p: &DispersionParams, out: &mut Output) -> Outcome<()> {
    let mut params = p.stencil.clone();
    let stencil = params.build()?;
    let table = DispersionCurve::sample(&stencil, p.samples).to_table();
    if out.dir().is_some() {
        out.table("dispersion.csv", &table)
    } else {
        out.say(table.to_csv_string().trim_end());
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct ResolutionResult {
    stencil: String,
    tolerance: f64,
    kappa_max: f64,
    lambda_min_in_dx: f64,
}

fn resolution(p: &ResolutionParams, out: &mut Output) -> Outcome<()> {
    let mut params = p.stencil.clone();
    let stencil = params.build()?;
    let r = dispersion::resolution_limit(&stencil, p.tolerance)?;
    let result = ResolutionResult {
        stencil: stencil.label().to_string(),
        tolerance: p.tolerance,
        kappa_max: r.kappa_max,
        lambda_min_in_dx: r.lambda_min_in_dx,
    };
    out.say(serde_json::to_string(&result).expect("serializable"));
    out.json("resolution.json", &result)
}

pub fn snapshot_1d_name(t: f64) -> String {
    format!("snapshot_t{}.csv", drp_core::round_time(t))
}

fn acoustic(p: &Acoustic1DParams, out: &mut Output) -> Outcome<()> {
    let c = &p.config;
    let run = acoustic1d::run(c, &c.scheme.stencil(), &p.snapshot_times)?;
    out.table("errors.csv", &run.trace.to_table())?;
    for s in &run.snapshots {
        out.table(&snapshot_1d_name(s.t), &s.to_table())?;
    }
    out.say(format!(
        "{} n_cells={} dx={} t={} final_error={:.6}",
        c.scheme.name(),
        c.n_cells,
        c.dx(),
        c.t_end,
        run.final_error()
    ));
    Ok(())
}

fn sweep(p: &SweepParams, out: &mut Output) -> Outcome<()> {
    let entries = acoustic1d::sweep(&p.template, &p.n_cells)?;
    out.table("sweep.csv", &acoustic1d::sweep_table(&entries))?;
    out.say("n_cells,dx,optimized4,conventional6,pct_optimized_better");
    for e in &entries {
        out.say(format!(
            "{},{:.6},{:.6},{:.6},{:.3}",
            e.n_cells,
            e.dx,
            e.optimized_final(),
            e.conventional_final(),
            e.pct_optimized_better
        ));
    }
    Ok(())
}

fn elastic(p: &ElasticParams, out: &mut Output) -> Outcome<()> {
    let set = elastic2d::run(&p.config, p.scheme)?;
    for s in set.all() {
        out.snapshot("", s)?;
    }
    let last = set.last();
    let maxima: Vec<String> = last.iter().map(|s| format!("{}={:.4e}", s.field, s.max_abs())).collect();
    out.say(format!("{} t={} {}", p.scheme.name(), set.times.last().copied().unwrap_or(0.0), maxima.join(" ")));
    Ok(())
}

/// Snapshot files `<field>_t<ms>.csv` in `dir`, sorted by name.
pub fn read_snapshot_dir(dir: &Path) -> Outcome<Vec<(String, Snapshot)>> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Failure::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if is_snapshot_name(&name) {
            names.push(name);
        }
    }
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let path = dir.join(&name);
            let s = io::read_snapshot(&path).map_err(|e| Failure::io(&path, e))?;
            Ok((name, s))
        })
        .collect()
}

fn is_snapshot_name(name: &str) -> bool {
    let Some(stem) = name.strip_suffix(".csv") else {
        return false;
    };
    match stem.rsplit_once("_t") {
        Some((field, ms)) => !field.is_empty() && !ms.is_empty() && ms.bytes().all(|b| b.is_ascii_digit()),
        None => false,
    }
}

#[derive(Debug, Serialize)]
pub struct DiffSummary {
    /// Largest normalized difference over all times, per field.
    pub max_by_field: BTreeMap<String, f64>,
    pub entries: Vec<elastic2d::DifferenceSummary>,
}

pub fn diff_snapshots(a: &[Snapshot], b: &[Snapshot], subdir: &str, out: &mut Output) -> Outcome<DiffSummary> {
    let diffs = elastic2d::field_difference(a, b)?;
    let mut max_by_field = BTreeMap::new();
    let mut entries = Vec::new();
    for d in &diffs {
        out.snapshot(subdir, &d.difference)?;
        let m = max_by_field.entry(d.difference.field.clone()).or_insert(0.0_f64);
        *m = m.max(d.max_abs);
        entries.push(d.summary());
    }
    Ok(DiffSummary { max_by_field, entries })
}

fn diff(p: &DiffParams, out: &mut Output) -> Outcome<()> {
    let a: Vec<Snapshot> = read_snapshot_dir(&p.a)?.into_iter().map(|(_, s)| s).collect();
    let b: Vec<Snapshot> = read_snapshot_dir(&p.b)?.into_iter().map(|(_, s)| s).collect();
    if a.is_empty() {
        return Err(Failure::Usage(format!("{} holds no snapshot files", p.a.display())));
    }
    let summary = diff_snapshots(&a, &b, "", out)?;
    out.json("summary.json", &summary)?;
    for (field, m) in &summary.max_by_field {
        out.say(format!("{field} {:.4}%", 100.0 * m));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_names_are_recognized() {
        assert!(is_snapshot_name("vx_t100.csv"));
        assert!(is_snapshot_name("txz_t0.csv"));
        assert!(!is_snapshot_name("summary.json"));
        assert!(!is_snapshot_name("errors.csv"));
        assert!(!is_snapshot_name("vx_tx.csv"));
        assert!(!is_snapshot_name("_t10.csv"));
    }

    #[test]
    fn one_dimensional_snapshot_names() {
        assert_eq!(snapshot_1d_name(5.0), "snapshot_t5.csv");
        assert_eq!(snapshot_1d_name(0.1 + 0.2), "snapshot_t0.3.csv");
    }

    #[test]
    fn stencil_order_is_pinned() {
        let mut p = StencilParams::default();
        p.build().unwrap();
        assert_eq!(p.order, Some(4));
        let mut p = StencilParams { method: Method::Conventional, ..StencilParams::default() };
        assert_eq!(p.build().unwrap().label(), "conventional6");
        assert_eq!(p.order, Some(6));
        let mut p = StencilParams { method: Method::Conventional, order: Some(4), ..StencilParams::default() };
        assert!(matches!(p.build(), Err(Failure::Usage(_))));
        let mut p = StencilParams { derivative: 3, ..StencilParams::default() };
        assert!(matches!(p.build(), Err(Failure::Usage(_))));
    }

    #[test]
    fn staggered_extent_counts_pairs() {
        let mut p = StencilParams {
            derivative: 1,
            grid_kind: GridKind::StaggeredForward,
            ..StencilParams::default()
        };
        let s = p.build().unwrap();
        assert_eq!(s.offsets(), &[-2, -1, 0, 1, 2, 3]);
        assert_eq!(s.label(), "staggered-optimized4");
    }

    #[test]
    fn invocation_json_round_trip() {
        let mut inv = Invocation::Acoustic1d(Acoustic1DParams {
            config: Acoustic1DConfig::default(),
            snapshot_times: vec![5.0, 20.0],
        });
        inv.resolve().unwrap();
        let text = serde_json::to_string(&inv).unwrap();
        assert!(text.starts_with(r#"{"subcommand":"acoustic1d","parameters":"#));
        let back: Invocation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inv);
    }
}
