use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{build_two_layer_model, ElasticConfig, ElasticModel, RickerSource};
use crate::error::{Error, Result};
use crate::io::Snapshot;
use crate::stencil::{presets, GridKind, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElasticScheme {
    /// Sixth-order Taylor staggered stencils.
    Conventional,
    /// Fourth-order spectrally optimized staggered stencils.
    Optimized,
}

impl ElasticScheme {
    pub fn name(self) -> &'static str {
        match self {
            ElasticScheme::Conventional => "conventional",
            ElasticScheme::Optimized => "optimized",
        }
    }
}

impl std::str::FromStr for ElasticScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conventional" => Ok(ElasticScheme::Conventional),
            "optimized" => Ok(ElasticScheme::Optimized),
            other => Err(Error::Config(format!("unknown elastic scheme `{other}`"))),
        }
    }
}

/// Type A stencil for derivatives landing half a cell ahead of the source
/// lattice, type B for those landing half a cell behind.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilPair {
    pub forward: Stencil,
    pub backward: Stencil,
}

impl StencilPair {
    pub fn new(forward: Stencil, backward: Stencil) -> Result<Self> {
        let ok = forward.derivative_order() == 1
            && backward.derivative_order() == 1
            && forward.grid_kind() == GridKind::StaggeredForward
            && backward.grid_kind() == GridKind::StaggeredBackward;
        if !ok {
            return Err(Error::MismatchedStencils(format!(
                "need a (type A, type B) first-derivative pair, got ({}, {})",
                forward.label(),
                backward.label()
            )));
        }
        Ok(Self { forward, backward })
    }

    pub fn for_scheme(scheme: ElasticScheme) -> Self {
        let (forward, backward) = match scheme {
            ElasticScheme::Conventional => (
                presets::conventional_staggered(GridKind::StaggeredForward, 6),
                presets::conventional_staggered(GridKind::StaggeredBackward, 6),
            ),
            ElasticScheme::Optimized => (
                presets::optimized_staggered4(GridKind::StaggeredForward),
                presets::optimized_staggered4(GridKind::StaggeredBackward),
            ),
        };
        Self { forward, backward }
    }

    fn reach(&self) -> usize {
        self.forward.reach().max(self.backward.reach())
    }
}

/// `vmax·dt·√(1/dx² + 1/dz²)·Σ|a|/2`; the explicit scheme is stable below 1.
pub fn stability_number(pair: &StencilPair, dt: f64, dx: f64, dz: f64, vmax: f64) -> f64 {
    let half_sum = |s: &Stencil| 0.5 * s.coefficients().iter().map(|c| c.abs()).sum::<f64>();
    let weight = half_sum(&pair.forward).max(half_sum(&pair.backward));
    vmax * dt * (1.0 / (dx * dx) + 1.0 / (dz * dz)).sqrt() * weight
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldName {
    Vx,
    Vz,
    Txx,
    Tzz,
    Txz,
}

impl FieldName {
    pub const ALL: [FieldName; 5] = [FieldName::Vx, FieldName::Vz, FieldName::Txx, FieldName::Tzz, FieldName::Txz];

    pub fn name(self) -> &'static str {
        match self {
            FieldName::Vx => "vx",
            FieldName::Vz => "vz",
            FieldName::Txx => "txx",
            FieldName::Tzz => "tzz",
            FieldName::Txz => "txz",
        }
    }

    pub fn is_velocity(self) -> bool {
        matches!(self, FieldName::Vx | FieldName::Vz)
    }
}

/// A field stored with a zero halo wide enough for every stencil read.
#[derive(Debug, Clone, PartialEq)]
struct Grid {
    nx: usize,
    nz: usize,
    halo: usize,
    stride: usize,
    data: Vec<f64>,
}

impl Grid {
    fn zeros(nx: usize, nz: usize, halo: usize) -> Self {
        let stride = nx + 2 * halo;
        Self { nx, nz, halo, stride, data: vec![0.0; stride * (nz + 2 * halo)] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (j + self.halo) * self.stride + i + self.halo
    }

    fn interior(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nx * self.nz);
        for j in 0..self.nz {
            let start = self.idx(0, j);
            out.extend_from_slice(&self.data[start..start + self.nx]);
        }
        out
    }

    fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Interior rows as `(j, row)` for parallel updates.
    fn rows_mut(&mut self) -> impl IndexedParallelIterator<Item = (usize, &mut [f64])> {
        let (halo, nz) = (self.halo, self.nz);
        self.data
            .par_chunks_mut(self.stride)
            .skip(halo)
            .take(nz)
            .enumerate()
    }
}

/// Flat-index taps of a stencil applied along x or z of `grid`.
fn taps(stencil: &Stencil, grid: &Grid, along_z: bool, spacing: f64) -> Vec<(isize, f64)> {
    let step = if along_z { grid.stride as isize } else { 1 };
    stencil
        .offsets()
        .iter()
        .zip(stencil.coefficients())
        .map(|(&o, &c)| (o as isize * step, c / spacing))
        .collect()
}

#[inline]
fn apply(data: &[f64], base: usize, taps: &[(isize, f64)]) -> f64 {
    let mut acc = 0.0;
    for &(o, c) in taps {
        acc += c * data[(base as isize + o) as usize];
    }
    acc
}

/// The five wavefields. Stresses are at `time`; velocities lag by `dt/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredFields {
    vx: Grid,
    vz: Grid,
    txx: Grid,
    tzz: Grid,
    txz: Grid,
    pub steps: usize,
    pub time: f64,
}

impl StaggeredFields {
    pub fn zeros(nx: usize, nz: usize, halo: usize) -> Self {
        Self {
            vx: Grid::zeros(nx - 1, nz, halo),
            vz: Grid::zeros(nx, nz - 1, halo),
            txx: Grid::zeros(nx, nz, halo),
            tzz: Grid::zeros(nx, nz, halo),
            txz: Grid::zeros(nx - 1, nz - 1, halo),
            steps: 0,
            time: 0.0,
        }
    }

    fn grid(&self, field: FieldName) -> &Grid {
        match field {
            FieldName::Vx => &self.vx,
            FieldName::Vz => &self.vz,
            FieldName::Txx => &self.txx,
            FieldName::Tzz => &self.tzz,
            FieldName::Txz => &self.txz,
        }
    }

    pub fn shape(&self, field: FieldName) -> (usize, usize) {
        let g = self.grid(field);
        (g.nx, g.nz)
    }

    /// Row-major `[j * nx + i]` values without the halo.
    pub fn values(&self, field: FieldName) -> Vec<f64> {
        self.grid(field).interior()
    }

    pub fn get(&self, field: FieldName, i: usize, j: usize) -> f64 {
        let g = self.grid(field);
        g.data[g.idx(i, j)]
    }

    pub fn snapshot(&self, field: FieldName, dx: f64, dz: f64, t: f64) -> Snapshot {
        let (nx, nz) = self.shape(field);
        Snapshot { nx, nz, dx, dz, t, field: field.name().to_string(), data: self.values(field) }
    }

    pub fn all_finite(&self) -> bool {
        FieldName::ALL.iter().all(|&f| self.grid(f).all_finite())
    }

    pub fn max_abs(&self, field: FieldName) -> f64 {
        self.grid(field).data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Material parameters sampled onto each lattice.
#[derive(Debug, Clone)]
struct Materials {
    bx: Vec<f64>,
    bz: Vec<f64>,
    lam: Vec<f64>,
    lam2mu: Vec<f64>,
    mu_xz: Vec<f64>,
}

impl Materials {
    fn new(m: &ElasticModel) -> Self {
        let (nx, nz) = (m.nx, m.nz);
        let at = |i: usize, j: usize| j * nx + i;
        let mut bx = Vec::with_capacity((nx - 1) * nz);
        for j in 0..nz {
            for i in 0..nx - 1 {
                bx.push(0.5 * (m.buoyancy[at(i, j)] + m.buoyancy[at(i + 1, j)]));
            }
        }
        let mut bz = Vec::with_capacity(nx * (nz - 1));
        for j in 0..nz - 1 {
            for i in 0..nx {
                bz.push(0.5 * (m.buoyancy[at(i, j)] + m.buoyancy[at(i, j + 1)]));
            }
        }
        let mut mu_xz = Vec::with_capacity((nx - 1) * (nz - 1));
        for j in 0..nz - 1 {
            for i in 0..nx - 1 {
                let corners = [m.mu[at(i, j)], m.mu[at(i + 1, j)], m.mu[at(i, j + 1)], m.mu[at(i + 1, j + 1)]];
                let harmonic = if corners.contains(&0.0) {
                    0.0
                } else {
                    4.0 / corners.iter().map(|v| 1.0 / v).sum::<f64>()
                };
                mu_xz.push(harmonic);
            }
        }
        let lam2mu = m.lam.iter().zip(&m.mu).map(|(l, u)| l + 2.0 * u).collect();
        Self { bx, bz, lam: m.lam.clone(), lam2mu, mu_xz }
    }
}

/// Precomputed update for one model, stencil pair and time step.
pub struct Stepper {
    materials: Materials,
    dt: f64,
    source: RickerSource,
    source_node: (usize, usize),
    // vx phase
    dx_txx: Vec<(isize, f64)>,
    dz_txz_at_vx: Vec<(isize, f64)>,
    // vz phase
    dx_txz_at_vz: Vec<(isize, f64)>,
    dz_tzz: Vec<(isize, f64)>,
    // normal-stress phase
    dx_vx: Vec<(isize, f64)>,
    dz_vz: Vec<(isize, f64)>,
    // shear phase
    dz_vx: Vec<(isize, f64)>,
    dx_vz: Vec<(isize, f64)>,
}

impl Stepper {
    pub fn new(
        model: &ElasticModel,
        pair: &StencilPair,
        dt: f64,
        source: RickerSource,
        source_node: (usize, usize),
        fields: &StaggeredFields,
    ) -> Self {
        let (a, b) = (&pair.forward, &pair.backward);
        let (dx, dz) = (model.dx, model.dz);
        Self {
            materials: Materials::new(model),
            dt,
            source,
            source_node,
            dx_txx: taps(a, &fields.txx, false, dx),
            dz_txz_at_vx: taps(b, &fields.txz, true, dz),
            dx_txz_at_vz: taps(b, &fields.txz, false, dx),
            dz_tzz: taps(a, &fields.tzz, true, dz),
            dx_vx: taps(b, &fields.vx, false, dx),
            dz_vz: taps(b, &fields.vz, true, dz),
            dz_vx: taps(a, &fields.vx, true, dz),
            dx_vz: taps(a, &fields.vz, false, dx),
        }
    }

    /// Advances stresses from `t_n` to `t_n + dt` and velocities from
    /// `t_n - dt/2` to `t_n + dt/2`, injecting `dt·ricker(t_n + dt/2)` into
    /// both normal stresses at the source node.
    pub fn step(&self, f: &mut StaggeredFields) -> Result<()> {
        let dt = self.dt;
        let m = &self.materials;

        {
            let (txx, txz) = (&f.txx, &f.txz);
            let nxv = f.vx.nx;
            f.vx.rows_mut().for_each(|(j, row)| {
                let h = txx.halo;
                for i in 0..nxv {
                    let d = apply(&txx.data, txx.idx(i, j), &self.dx_txx)
                        + apply(&txz.data, txz.idx(i, j), &self.dz_txz_at_vx);
                    row[h + i] += dt * m.bx[j * nxv + i] * d;
                }
            });
        }
        {
            let (txz, tzz) = (&f.txz, &f.tzz);
            let nxv = f.vz.nx;
            f.vz.rows_mut().for_each(|(j, row)| {
                let h = tzz.halo;
                for i in 0..nxv {
                    let d = apply(&txz.data, txz.idx(i, j), &self.dx_txz_at_vz)
                        + apply(&tzz.data, tzz.idx(i, j), &self.dz_tzz);
                    row[h + i] += dt * m.bz[j * nxv + i] * d;
                }
            });
        }
        {
            let (vx, vz) = (&f.vx, &f.vz);
            let nx = f.txx.nx;
            let h = f.txx.halo;
            f.txx.rows_mut().zip(f.tzz.rows_mut()).for_each(|((j, rxx), (_, rzz))| {
                for i in 0..nx {
                    let dvx = apply(&vx.data, vx.idx(i, j), &self.dx_vx);
                    let dvz = apply(&vz.data, vz.idx(i, j), &self.dz_vz);
                    let k = j * nx + i;
                    rxx[h + i] += dt * (m.lam2mu[k] * dvx + m.lam[k] * dvz);
                    rzz[h + i] += dt * (m.lam[k] * dvx + m.lam2mu[k] * dvz);
                }
            });
        }
        {
            let (vx, vz) = (&f.vx, &f.vz);
            let nxs = f.txz.nx;
            let h = f.txz.halo;
            f.txz.rows_mut().for_each(|(j, row)| {
                for i in 0..nxs {
                    let d = apply(&vx.data, vx.idx(i, j), &self.dz_vx) + apply(&vz.data, vz.idx(i, j), &self.dx_vz);
                    row[h + i] += dt * m.mu_xz[j * nxs + i] * d;
                }
            });
        }

        let injection = dt * self.source.ricker(f.time + 0.5 * dt);
        let (si, sj) = self.source_node;
        let k = f.txx.idx(si, sj);
        f.txx.data[k] += injection;
        let k = f.tzz.idx(si, sj);
        f.tzz.data[k] += injection;

        f.steps += 1;
        f.time = f.steps as f64 * dt;
        if !f.all_finite() {
            return Err(Error::Instability { time: f.time });
        }
        Ok(())
    }
}

/// One step with a freshly assembled [`Stepper`]; use [`Stepper`] directly
/// for repeated steps.
pub fn step(
    fields: &mut StaggeredFields,
    model: &ElasticModel,
    source: RickerSource,
    source_node: (usize, usize),
    dt: f64,
    pair: &StencilPair,
) -> Result<()> {
    Stepper::new(model, pair, dt, source, source_node, fields).step(fields)
}

/// All five fields at each snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub times: Vec<f64>,
    /// `frames[k]` holds the fields at `times[k]` in [`FieldName::ALL`] order.
    pub frames: Vec<Vec<Snapshot>>,
}

impl SnapshotSet {
    pub fn get(&self, frame: usize, field: FieldName) -> &Snapshot {
        &self.frames[frame][FieldName::ALL.iter().position(|&f| f == field).unwrap()]
    }

    pub fn last(&self) -> &[Snapshot] {
        self.frames.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all(&self) -> impl Iterator<Item = &Snapshot> {
        self.frames.iter().flatten()
    }
}

/// Runs the configured two-layer model.
pub fn run(config: &ElasticConfig, scheme: ElasticScheme) -> Result<SnapshotSet> {
    let model = build_two_layer_model(config)?;
    run_model(config, &model, &StencilPair::for_scheme(scheme))
}

/// Runs an arbitrary model with the grid, timing and source of `config`.
pub fn run_model(config: &ElasticConfig, model: &ElasticModel, pair: &StencilPair) -> Result<SnapshotSet> {
    config.validate()?;
    let dt = config.dt();
    let stability = stability_number(pair, dt, model.dx, model.dz, config.vmax_for_dt);
    if stability >= 1.0 {
        return Err(Error::Config(format!("time step violates the stability bound ({stability:.3} >= 1)")));
    }
    let mut fields = StaggeredFields::zeros(model.nx, model.nz, pair.reach() + 1);
    let stepper = Stepper::new(model, pair, dt, config.source, config.source_node(), &fields);

    let times = config.snapshot_times();
    let mut frames = Vec::with_capacity(times.len());
    for &t in &times {
        let target = config.step_index(t);
        while fields.steps < target {
            stepper.step(&mut fields)?;
        }
        frames.push(
            FieldName::ALL
                .iter()
                .map(|&name| fields.snapshot(name, model.dx, model.dz, t))
                .collect(),
        );
    }
    Ok(SnapshotSet { times, frames })
}
