//! Standing waves on a string: `u_tt = c0² u_xx` on `[0, L]` with `u = 0` at
//! both ends, zero initial velocity and a square-wave initial displacement
//! expanded in a truncated sine series.
//!
//! Time stepping is second-order leapfrog. Stencil reads that fall outside
//! the grid see zero, and the two boundary nodes are re-pinned to zero after
//! every step.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;
use crate::metrics::{mean_abs_error, pct_better, ErrorTrace};
use crate::stencil::{presets, GridKind, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Optimized4,
    Conventional6,
    Conventional4,
    Conventional2,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Optimized4,
        Scheme::Conventional6,
        Scheme::Conventional4,
        Scheme::Conventional2,
    ];

    pub fn stencil(self) -> Stencil {
        match self {
            Scheme::Optimized4 => presets::optimized_second4(),
            Scheme::Conventional6 => presets::conventional_second(6),
            Scheme::Conventional4 => presets::conventional_second(4),
            Scheme::Conventional2 => presets::conventional_second(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Optimized4 => "optimized4",
            Scheme::Conventional6 => "conventional6",
            Scheme::Conventional4 => "conventional4",
            Scheme::Conventional2 => "conventional2",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Acoustic1DConfig {
    /// Domain length in meters.
    pub length: f64,
    /// Wave speed in m/s.
    pub wavespeed: f64,
    pub courant: f64,
    pub n_cells: usize,
    pub t_end: f64,
    pub series_terms: usize,
    pub amplitude: f64,
    pub scheme: Scheme,
    pub error_interval: f64,
}

impl Default for Acoustic1DConfig {
    fn default() -> Self {
        Self {
            length: 10.0,
            wavespeed: 1.0,
            courant: 0.2,
            n_cells: 400,
            t_end: 20.0,
            series_terms: 100,
            amplitude: 0.1,
            scheme: Scheme::Optimized4,
            error_interval: 0.2,
        }
    }
}

impl Acoustic1DConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.courant > 0.0 && self.courant <= 1.0) {
            return fail(format!("courant must lie in (0, 1], got {}", self.courant));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return fail(format!("length must be positive, got {}", self.length));
        }
        if !(self.wavespeed > 0.0 && self.wavespeed.is_finite()) {
            return fail(format!("wavespeed must be positive, got {}", self.wavespeed));
        }
        if self.n_cells < 2 {
            return fail(format!("n_cells must be at least 2, got {}", self.n_cells));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.series_terms == 0 {
            return fail("series_terms must be at least 1".into());
        }
        if !(self.error_interval > 0.0) {
            return fail(format!("error_interval must be positive, got {}", self.error_interval));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn dt(&self) -> f64 {
        self.courant * self.dx() / self.wavespeed
    }

    /// Node coordinates, both boundaries included.
    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.n_cells).map(|i| i as f64 * dx).collect()
    }

    /// Step index closest to time `t`.
    pub fn step_index(&self, t: f64) -> usize {
        (t / self.dt()).round() as usize
    }

    /// Nominal error sampling times `0, Δ, 2Δ, ... ≤ t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        let count = (self.t_end / self.error_interval + 1e-9).floor() as usize;
        (0..=count).map(|k| crate::round_time(k as f64 * self.error_interval)).collect()
    }
}

/// Closed-form sine-series solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSolution {
    /// `D̃_n` for `n = 1..=2·series_terms`, stored at index `n - 1`.
    pub coefficients: Vec<f64>,
    pub length: f64,
    pub wavespeed: f64,
    pub amplitude: f64,
}

/// `cos(mπ/2)` for integer `m`, exactly.
fn cos_half_pi(m: usize) -> f64 {
    [1.0, 0.0, -1.0, 0.0][m % 4]
}

/// Series coefficients of the square wave that is `+amplitude` on
/// `[0, L/4] ∪ [L/2, 3L/4]` and `-amplitude` elsewhere.
///
/// `D̃_n = (4/L) ∫_0^{L/2} f(x) sin(nπx/L) dx` for even `n`, which evaluates
/// to `4/(nπ) · (1 - 2cos(nπ/4) + cos(nπ/2))`; only `n ≡ 4 (mod 8)` survive.
pub fn fourier_coefficients(config: &Acoustic1DConfig) -> AnalyticSolution {
    let coefficients = (1..=2 * config.series_terms)
        .map(|n| {
            if n % 2 == 1 {
                return 0.0;
            }
            let m = n / 2;
            let bracket = 1.0 - 2.0 * cos_half_pi(m) + cos_half_pi(2 * m);
            config.amplitude * 4.0 / (n as f64 * PI) * bracket
        })
        .collect();
    AnalyticSolution {
        coefficients,
        length: config.length,
        wavespeed: config.wavespeed,
        amplitude: config.amplitude,
    }
}

impl AnalyticSolution {
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let k = PI / self.length;
        let w = k * self.wavespeed;
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, d)| **d != 0.0)
            .map(|(i, d)| {
                let n = (i + 1) as f64;
                d * (n * k * x).sin() * (n * w * t).cos()
            })
            .sum()
    }

    /// Evaluates on a grid whose end points are exactly the boundaries.
    pub fn eval_grid(&self, xs: &[f64], t: f64) -> Vec<f64> {
        let last = xs.len().saturating_sub(1);
        xs.iter()
            .enumerate()
            .map(|(i, &x)| if i == 0 || i == last { 0.0 } else { self.eval(x, t) })
            .collect()
    }
}

/// Two time levels of the displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefield1D {
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    pub steps: usize,
    pub time: f64,
}

/// `out[l] = Σ_j a_j u[l + j]`, reading zero outside the array.
pub fn apply_stencil(stencil: &Stencil, u: &[f64], out: &mut [f64]) {
    let n = u.len() as i64;
    out.iter_mut().for_each(|v| *v = 0.0);
    for (&j, &a) in stencil.offsets().iter().zip(stencil.coefficients()) {
        let j = j as i64;
        let lo = (-j).max(0);
        let hi = (n - j).min(n);
        for l in lo..hi {
            out[l as usize] += a * u[(l + j) as usize];
        }
    }
}

fn check_collocated_second(stencil: &Stencil) -> Result<()> {
    if stencil.derivative_order() != 2 || stencil.grid_kind() != GridKind::Collocated {
        return Err(Error::InvalidStencil(format!(
            "{} is not a collocated second-derivative stencil",
            stencil.label()
        )));
    }
    Ok(())
}

impl Wavefield1D {
    /// Starts from displacement `u0` at rest. The history level is filled
    /// by mirroring the first step (`u^{-1} = u^{1}`), so the first leapfrog
    /// update reduces to `u^1 = u^0 + ½ r² L u^0`.
    pub fn at_rest(mut u0: Vec<f64>, config: &Acoustic1DConfig, stencil: &Stencil) -> Result<Self> {
        check_collocated_second(stencil)?;
        if let Some(first) = u0.first_mut() {
            *first = 0.0;
        }
        if let Some(last) = u0.last_mut() {
            *last = 0.0;
        }
        let r2 = config.courant * config.courant;
        let mut lap = vec![0.0; u0.len()];
        apply_stencil(stencil, &u0, &mut lap);
        let mut u_prev: Vec<f64> = u0.iter().zip(&lap).map(|(u, l)| u + 0.5 * r2 * l).collect();
        pin(&mut u_prev);
        Ok(Self { u_prev, u_curr: u0, steps: 0, time: 0.0 })
    }

    pub fn max_abs(&self) -> f64 {
        self.u_curr.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn pin(u: &mut [f64]) {
    if let Some(first) = u.first_mut() {
        *first = 0.0;
    }
    if let Some(last) = u.last_mut() {
        *last = 0.0;
    }
}

pub fn initial_condition(config: &Acoustic1DConfig) -> Result<Wavefield1D> {
    initial_condition_with(config, &config.scheme.stencil())
}

pub fn initial_condition_with(config: &Acoustic1DConfig, stencil: &Stencil) -> Result<Wavefield1D> {
    config.validate()?;
    let solution = fourier_coefficients(config);
    Wavefield1D::at_rest(solution.eval_grid(&config.grid(), 0.0), config, stencil)
}

/// One leapfrog step `u⁺ = 2u - u⁻ + r² Σ a_j u_{l+j}`.
pub fn step(field: &mut Wavefield1D, config: &Acoustic1DConfig, stencil: &Stencil, scratch: &mut Vec<f64>) -> Result<()> {
    let r2 = config.courant * config.courant;
    scratch.resize(field.u_curr.len(), 0.0);
    apply_stencil(stencil, &field.u_curr, scratch);
    let mut finite = true;
    for ((prev, curr), lap) in field.u_prev.iter_mut().zip(&field.u_curr).zip(scratch.iter()) {
        let next = 2.0 * curr - *prev + r2 * lap;
        finite &= next.is_finite();
        *prev = next;
    }
    std::mem::swap(&mut field.u_prev, &mut field.u_curr);
    pin(&mut field.u_curr);
    field.steps += 1;
    field.time = field.steps as f64 * config.dt();
    if !finite {
        return Err(Error::Instability { time: field.time });
    }
    Ok(())
}

/// Numeric and analytic fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot1D {
    pub t: f64,
    pub x: Vec<f64>,
    pub numeric: Vec<f64>,
    pub analytic: Vec<f64>,
}

impl Snapshot1D {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["x", "u_numeric", "u_analytic"]).comment(format!("t={}", self.t));
        for i in 0..self.x.len() {
            table.push_numbers(&[self.x[i], self.numeric[i], self.analytic[i]]);
        }
        table
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Acoustic1DRun {
    pub trace: ErrorTrace,
    /// Maximum of `|u_analytic(x, 0)|` over the grid; every error is divided by it.
    pub normalizer: f64,
    pub snapshots: Vec<Snapshot1D>,
    pub max_abs: f64,
}

impl Acoustic1DRun {
    pub fn final_error(&self) -> f64 {
        self.trace.last_value().unwrap_or(0.0)
    }
}

pub fn run_with_errors(config: &Acoustic1DConfig) -> Result<Acoustic1DRun> {
    run(config, &config.scheme.stencil(), &[])
}

/// Advances to `t_end`, sampling the normalized mean absolute error every
/// `error_interval` and capturing the fields at `snapshot_times`.
pub fn run(config: &Acoustic1DConfig, stencil: &Stencil, snapshot_times: &[f64]) -> Result<Acoustic1DRun> {
    config.validate()?;
    let solution = fourier_coefficients(config);
    let x = config.grid();
    let u0 = solution.eval_grid(&x, 0.0);
    let normalizer = u0.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(normalizer > 0.0) {
        return Err(Error::Config("initial condition is identically zero".into()));
    }
    let mut field = Wavefield1D::at_rest(u0, config, stencil)?;

    let samples: Vec<(usize, f64)> = config
        .sample_times()
        .into_iter()
        .map(|t| (config.step_index(t), t))
        .collect();
    let mut snaps: Vec<(usize, f64)> = snapshot_times
        .iter()
        .filter(|&&t| t >= 0.0 && t <= config.t_end + 1e-12)
        .map(|&t| (config.step_index(t), t))
        .collect();
    snaps.sort_by_key(|a| a.0);
    let last_step = samples
        .iter()
        .chain(&snaps)
        .map(|s| s.0)
        .max()
        .unwrap_or(0)
        .max(config.step_index(config.t_end));

    let mut trace = ErrorTrace::new(stencil.label());
    let mut snapshots = Vec::new();
    let mut max_abs = field.max_abs();
    let mut next_sample = 0;
    let mut next_snap = 0;
    let mut scratch = Vec::new();
    loop {
        let n = field.steps;
        let t_exact = n as f64 * config.dt();
        while next_sample < samples.len() && samples[next_sample].0 == n {
            let exact = solution.eval_grid(&x, t_exact);
            trace.push(samples[next_sample].1, mean_abs_error(&field.u_curr, &exact, normalizer)?)?;
            next_sample += 1;
        }
        while next_snap < snaps.len() && snaps[next_snap].0 == n {
            snapshots.push(Snapshot1D {
                t: snaps[next_snap].1,
                x: x.clone(),
                numeric: field.u_curr.clone(),
                analytic: solution.eval_grid(&x, t_exact),
            });
            next_snap += 1;
        }
        if n >= last_step {
            break;
        }
        step(&mut field, config, stencil, &mut scratch)?;
        max_abs = max_abs.max(field.max_abs());
    }
    Ok(Acoustic1DRun { trace, normalizer, snapshots, max_abs })
}

/// Optimized-4 and conventional-6 results at one grid spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub n_cells: usize,
    pub dx: f64,
    pub optimized: ErrorTrace,
    pub conventional: ErrorTrace,
    /// Fraction of samples where the optimized error is strictly smaller.
    pub pct_optimized_better: f64,
}

impl SweepEntry {
    pub fn optimized_final(&self) -> f64 {
        self.optimized.last_value().unwrap_or(0.0)
    }

    pub fn conventional_final(&self) -> f64 {
        self.conventional.last_value().unwrap_or(0.0)
    }
}

pub const FINE_SWEEP: [usize; 11] = [400, 410, 420, 430, 440, 450, 460, 470, 480, 490, 500];

pub fn wide_sweep_cells() -> Vec<usize> {
    (250..=1000).step_by(50).collect()
}

pub fn sweep(template: &Acoustic1DConfig, n_cells: &[usize]) -> Result<Vec<SweepEntry>> {
    if n_cells.is_empty() {
        return Err(Error::Config("sweep needs at least one grid size".into()));
    }
    let opt = Scheme::Optimized4.stencil();
    let conv = Scheme::Conventional6.stencil();
    let jobs: Vec<(usize, bool)> = n_cells.iter().flat_map(|&n| [(n, true), (n, false)]).collect();
    let traces: Vec<ErrorTrace> = jobs
        .par_iter()
        .map(|&(n, optimized)| {
            let config = Acoustic1DConfig {
                n_cells: n,
                scheme: if optimized { Scheme::Optimized4 } else { Scheme::Conventional6 },
                ..template.clone()
            };
            run(&config, if optimized { &opt } else { &conv }, &[]).map(|r| r.trace)
        })
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(n_cells.len());
    for (k, &n) in n_cells.iter().enumerate() {
        let optimized = traces[2 * k].clone();
        let conventional = traces[2 * k + 1].clone();
        entries.push(SweepEntry {
            n_cells: n,
            dx: template.length / n as f64,
            pct_optimized_better: pct_better(&optimized, &conventional)?,
            optimized,
            conventional,
        });
    }
    Ok(entries)
}

/// Columns `dx,scheme,final_error,pct_timesteps_better`; two rows per entry.
pub fn sweep_table(entries: &[SweepEntry]) -> Table {
    let mut table = Table::new(["dx", "scheme", "final_error", "pct_timesteps_better"]);
    for e in entries {
        let fmt = crate::io::format_f64;
        table.push_row(vec![
            fmt(e.dx),
            Scheme::Optimized4.name().into(),
            fmt(e.optimized_final()),
            fmt(e.pct_optimized_better),
        ]);
        let conv_better = pct_better(&e.conventional, &e.optimized).unwrap_or(0.0);
        table.push_row(vec![
            fmt(e.dx),
            Scheme::Conventional6.name().into(),
            fmt(e.conventional_final()),
            fmt(conv_better),
        ]);
    }
    table
}

/// Discrete Fourier amplitudes with unitary scaling, so that
/// `Σ amplitude² = Σ sample²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Cycles per meter, `k / (N·dx)` for `k ≤ N/2` and negative above.
    pub frequency: Vec<f64>,
    pub amplitude: Vec<f64>,
}

impl Spectrum {
    /// Non-negative frequencies only, amplitudes scaled to unit maximum.
    pub fn to_table(&self) -> Table {
        let max = self.amplitude.iter().fold(0.0_f64, |m, a| m.max(*a));
        let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
        let mut table = Table::new(["frequency", "amplitude"]);
        for (f, a) in self.frequency.iter().zip(&self.amplitude) {
            if *f >= 0.0 {
                table.push_numbers(&[*f, a * scale]);
            }
        }
        table
    }
}

pub fn spatial_spectrum(samples: &[f64], dx: f64) -> Result<Spectrum> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Config("spectrum needs at least two samples".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let (frequency, amplitude) = (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, u) in samples.iter().enumerate() {
                // Reduce the phase index modulo n to keep the angle small.
                let theta = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                re += u * theta.cos();
                im += u * theta.sin();
            }
            let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            (signed / (n as f64 * dx), norm * re.hypot(im))
        })
        .unzip();
    Ok(Spectrum { frequency, amplitude })
}
