//! Canned recipes producing the data behind each figure.

use drp_core::acoustic1d::{self, Acoustic1DConfig, Scheme, SweepEntry, FINE_SWEEP};
use drp_core::dispersion::{self, DispersionCurve};
use drp_core::elastic2d::{self, ElasticConfig, ElasticScheme};
use drp_core::io::{format_f64, Table};
use drp_core::stencil::presets;
use drp_core::{GridKind, Stencil};
use serde::Serialize;

use crate::failure::{Failure, Outcome};
use crate::run::{diff_snapshots, Output};

/// Every accepted id with the recipe it runs.
pub const IDS: [(&str, &str); 18] = [
    ("fig1", "fig1"),
    ("fig2", "fig2"),
    ("fig3", "fig3"),
    ("fig4", "fig4"),
    ("fig5", "fig5"),
    ("fig6", "fig6"),
    ("fig7", "fig7"),
    ("fig8", "fig8"),
    ("fig11", "fig11"),
    ("fig12", "fig12"),
    ("fig9", "elastic"),
    ("fig10", "elastic"),
    ("fig13", "elastic"),
    ("fig14", "elastic"),
    ("fig15", "elastic"),
    ("fig16", "elastic"),
    ("fig16-diff", "elastic"),
    ("elastic", "elastic"),
];

pub fn canonical_id(id: &str) -> Outcome<&'static str> {
    let lower = id.to_ascii_lowercase();
    IDS.iter().find(|(k, _)| *k == lower).map(|(_, v)| *v).ok_or_else(|| {
        let known: Vec<&str> = IDS.iter().map(|(k, _)| *k).collect();
        Failure::Usage(format!("unknown figure `{id}`; expected one of {}", known.join(", ")))
    })
}

pub fn render(id: &str, out: &mut Output) -> Outcome<()> {
    match canonical_id(id)? {
        "fig1" => fig1(out),
        "fig2" => fig2(out),
        "fig3" => sweep_figure("fig3.csv", &FINE_SWEEP, out),
        "fig4" => traces_figure("fig4.csv", &[500, 480, 460, 440, 420, 400], 20.0, out),
        "fig5" => fig5(out),
        "fig6" => sweep_figure("fig6.csv", &acoustic1d::wide_sweep_cells(), out),
        "fig7" => traces_figure("fig7.csv", &[250, 300, 800, 1000], 20.0, out),
        "fig8" => fig8(out),
        "fig11" => fig11(out),
        "fig12" => traces_figure("fig12.csv", &[1000], 40.0, out),
        _ => elastic(out),
    }
}

/// Modified wavenumbers of several stencils on a shared κ grid.
fn curves_table(stencils: &[Stencil]) -> Table {
    let curves: Vec<DispersionCurve> =
        stencils.iter().map(|s| DispersionCurve::sample(s, dispersion::DEFAULT_SAMPLES)).collect();
    let d = stencils[0].derivative_order();
    let mut columns = vec!["kappa".to_string(), "ideal".to_string()];
    columns.extend(stencils.iter().map(|s| s.label().to_string()));
    let mut table = Table::new(columns);
    for (i, &k) in curves[0].kappa.iter().enumerate() {
        let mut row = vec![k, dispersion::ideal(d, k)];
        row.extend(curves.iter().map(|c| c.symbol[i]));
        table.push_numbers(&row);
    }
    table
}

fn fig1(out: &mut Output) -> Outcome<()> {
    let mut table = curves_table(&[presets::optimized_second4()]);
    table.columns[2] = "optimized".into();
    out.table("fig1.csv", &table)
}

fn fig2(out: &mut Output) -> Outcome<()> {
    let stencils = [
        presets::conventional_second(2),
        presets::conventional_second(4),
        presets::conventional_second(6),
        presets::optimized_second4(),
    ];
    out.table("fig2.csv", &curves_table(&stencils))?;
    let tol = dispersion::DEFAULT_TOLERANCE;
    let mut limits = Table::new(["stencil", "tolerance", "kappa_max", "lambda_min_in_dx"]);
    for s in &stencils {
        let r = dispersion::resolution_limit(s, tol)?;
        limits.push_row(vec![
            s.label().to_string(),
            format_f64(tol),
            format_f64(r.kappa_max),
            format_f64(r.lambda_min_in_dx),
        ]);
    }
    out.table("fig2_resolution.csv", &limits)
}

fn fig8(out: &mut Output) -> Outcome<()> {
    let kind = GridKind::StaggeredForward;
    let stencils = [presets::optimized_staggered4(kind), presets::conventional_staggered(kind, 6)];
    let mut table = curves_table(&stencils);
    for s in &stencils {
        let m = dispersion::integrated_misfit(s, std::f64::consts::FRAC_PI_2)?;
        table = table.comment(format!("integrated_misfit_{}={}", s.label(), format_f64(m)));
    }
    out.table("fig8.csv", &table)
}

fn fig11(out: &mut Output) -> Outcome<()> {
    let diff = dispersion::curve_difference(
        &presets::optimized_second4(),
        &presets::conventional_second(6),
        dispersion::DEFAULT_SAMPLES,
    )?;
    out.table("fig11.csv", &diff.to_table())
}

fn sweep_figure(name: &str, cells: &[usize], out: &mut Output) -> Outcome<()> {
    let entries = acoustic1d::sweep(&Acoustic1DConfig::default(), cells)?;
    out.table(name, &acoustic1d::sweep_table(&entries))
}

/// Error traces of both schemes at each grid size, one column per run.
fn traces_table(entries: &[SweepEntry]) -> Table {
    let mut columns = vec!["t".to_string()];
    for e in entries {
        columns.push(format!("optimized4_n{}", e.n_cells));
        columns.push(format!("conventional6_n{}", e.n_cells));
    }
    let mut table = Table::new(columns);
    for e in entries {
        table = table.comment(format!(
            "n{}: dx={} pct_optimized_better={}",
            e.n_cells,
            e.dx,
            format_f64(e.pct_optimized_better)
        ));
    }
    let times: Vec<f64> = entries[0].optimized.times().collect();
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        for e in entries {
            row.push(e.optimized.samples()[i].1);
            row.push(e.conventional.samples()[i].1);
        }
        table.push_numbers(&row);
    }
    table
}

fn traces_figure(name: &str, cells: &[usize], t_end: f64, out: &mut Output) -> Outcome<()> {
    let template = Acoustic1DConfig { t_end, ..Acoustic1DConfig::default() };
    let entries = acoustic1d::sweep(&template, cells)?;
    out.table(name, &traces_table(&entries))
}

/// Wavefields every 5 s and their spatial spectra at 20 s, at 440 cells.
fn fig5(out: &mut Output) -> Outcome<()> {
    let times = [0.0, 5.0, 10.0, 15.0, 20.0];
    let config = Acoustic1DConfig { n_cells: 440, ..Acoustic1DConfig::default() };
    let runs = [Scheme::Optimized4, Scheme::Conventional6]
        .map(|s| acoustic1d::run(&Acoustic1DConfig { scheme: s, ..config.clone() }, &s.stencil(), &times));
    let [opt, conv] = runs;
    let (opt, conv) = (opt?, conv?);

    let mut columns = vec!["x".to_string()];
    for t in times {
        columns.extend(["analytic", "optimized4", "conventional6"].map(|c| format!("{c}_t{t}")));
    }
    let mut fields = Table::new(columns).comment(format!("dx={}", config.dx()));
    let x = &opt.snapshots[0].x;
    for i in 0..x.len() {
        let mut row = vec![x[i]];
        for (a, b) in opt.snapshots.iter().zip(&conv.snapshots) {
            row.extend([a.analytic[i], a.numeric[i], b.numeric[i]]);
        }
        fields.push_numbers(&row);
    }
    out.table("fig5_wavefields.csv", &fields)?;

    let last_opt = opt.snapshots.last().expect("snapshot at 20 s");
    let last_conv = conv.snapshots.last().expect("snapshot at 20 s");
    let dx = config.dx();
    let analytic = acoustic1d::spatial_spectrum(&last_opt.analytic, dx)?;
    let optimized = acoustic1d::spatial_spectrum(&last_opt.numeric, dx)?;
    let conventional = acoustic1d::spatial_spectrum(&last_conv.numeric, dx)?;
    let scale = analytic.amplitude.iter().fold(0.0_f64, |m, a| m.max(*a));
    let mut spectrum = Table::new(["frequency", "analytic", "optimized4", "conventional6"])
        .comment("amplitudes normalized by the analytic maximum");
    for i in 0..analytic.frequency.len() {
        if analytic.frequency[i] >= 0.0 {
            spectrum.push_numbers(&[
                analytic.frequency[i],
                analytic.amplitude[i] / scale,
                optimized.amplitude[i] / scale,
                conventional.amplitude[i] / scale,
            ]);
        }
    }
    out.table("fig5_spectrum.csv", &spectrum)
}

#[derive(Debug, Serialize)]
struct ElasticSummary {
    config: ElasticConfig,
    difference: crate::run::DiffSummary,
}

/// Both schemes on the default layered model, plus their normalized difference.
fn elastic(out: &mut Output) -> Outcome<()> {
    let config = ElasticConfig::default();
    let conventional = elastic2d::run(&config, ElasticScheme::Conventional)?;
    let optimized = elastic2d::run(&config, ElasticScheme::Optimized)?;
    for (dir, set) in [("conventional", &conventional), ("optimized", &optimized)] {
        for s in set.all() {
            out.snapshot(dir, s)?;
        }
    }
    let a: Vec<_> = conventional.all().cloned().collect();
    let b: Vec<_> = optimized.all().cloned().collect();
    let difference = diff_snapshots(&a, &b, "difference", out)?;
    for (field, m) in &difference.max_by_field {
        out.say(format!("{field} {:.4}%", 100.0 * m));
    }
    out.json("summary.json", &ElasticSummary { config, difference })
}
