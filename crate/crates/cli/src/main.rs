//! `drp`: every toolkit operation as a subcommand.
//!
//! Runs that write files record a `manifest.json` beside them holding the
//! fully resolved parameters; `drp replay <manifest>` reproduces the outputs
//! byte for byte. Exit status is 0 on success, 1 on usage or input errors and
//! 2 when the computation itself fails.

mod args;
mod failure;
mod figures;
mod manifest;
mod run;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use drp_core::acoustic1d::{self, Acoustic1DConfig, FINE_SWEEP};
use drp_core::elastic2d::{ElasticConfig, ElasticScheme};

use args::{Cli, Command, SweepPreset};
use failure::{Failure, Outcome};
use manifest::RunManifest;
use run::*;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("drp: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn config_or_default<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Outcome<T> {
    path.map_or_else(|| Ok(T::default()), load_json)
}

fn dispatch(command: Command) -> Outcome<()> {
    let (invocation, out_dir) = match command {
        Command::Optimize(a) => {
            let mut p: OptimizeParams = config_or_default(a.config.as_deref())?;
            a.stencil.apply(&mut p.stencil);
            if let Some(f) = a.format {
                p.format = f;
            }
            (Invocation::Optimize(p), a.out_dir)
        }
        Command::Dispersion(a) => {
            let mut p: DispersionParams = config_or_default(a.config.as_deref())?;
            a.stencil.apply(&mut p.stencil);
            if let Some(m) = a.method {
                p.stencil.method = m;
            }
            if let Some(n) = a.samples {
                p.samples = n;
            }
            (Invocation::Dispersion(p), a.out_dir)
        }
        Command::Resolution(a) => {
            let mut p: ResolutionParams = config_or_default(a.config.as_deref())?;
            a.stencil.apply(&mut p.stencil);
            if let Some(m) = a.method {
                p.stencil.method = m;
            }
            if let Some(t) = a.tolerance {
                p.tolerance = t;
            }
            (Invocation::Resolution(p), a.out_dir)
        }
        Command::Acoustic1d(a) => {
            let mut config: Acoustic1DConfig = config_or_default(a.config.as_deref())?;
            a.fields.apply(&mut config);
            let snapshot_times = a.snapshot_times.unwrap_or_default();
            (Invocation::Acoustic1d(Acoustic1DParams { config, snapshot_times }), Some(a.out_dir))
        }
        Command::Sweep(a) => {
            let mut template: Acoustic1DConfig = config_or_default(a.config.as_deref())?;
            a.fields.apply(&mut template);
            let n_cells = match (a.cells, a.preset) {
                (Some(cells), _) => cells,
                (None, Some(SweepPreset::Wide)) => acoustic1d::wide_sweep_cells(),
                (None, _) => FINE_SWEEP.to_vec(),
            };
            (Invocation::Sweep(SweepParams { template, n_cells }), Some(a.out_dir))
        }
        Command::Elastic2d(a) => {
            let mut config: ElasticConfig = config_or_default(a.config.as_deref())?;
            a.apply(&mut config);
            let scheme = a.scheme.unwrap_or(ElasticScheme::Optimized);
            (Invocation::Elastic2d(ElasticParams { config, scheme }), Some(a.out_dir))
        }
        Command::Diff(a) => (Invocation::Diff(DiffParams { a: a.a, b: a.b }), Some(a.out_dir)),
        Command::Figure(a) => (Invocation::Figure(FigureParams { id: a.id }), Some(a.out_dir)),
        Command::Replay(a) => {
            let recorded = RunManifest::read(&a.manifest)?;
            let dir = a.out_dir.unwrap_or_else(|| {
                a.manifest.parent().map(Path::to_path_buf).unwrap_or_default()
            });
            (recorded.invocation, Some(dir))
        }
    };
    perform(invocation, out_dir.as_deref())
}

fn perform(mut invocation: Invocation, out_dir: Option<&Path>) -> Outcome<()> {
    let start = Instant::now();
    invocation.resolve()?;
    let mut out = Output::new(out_dir)?;
    execute(&invocation, &mut out)?;
    if let Some(dir) = out.dir().map(Path::to_path_buf) {
        let files = std::mem::take(&mut out.files);
        RunManifest::new(invocation, files, start.elapsed().as_secs_f64()).write(&dir)?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(out.stdout.as_bytes())
        .map_err(|e| Failure::Usage(format!("stdout: {e}")))
}
