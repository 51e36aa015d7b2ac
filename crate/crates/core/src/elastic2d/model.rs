use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One horizontal layer, listed top to bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub thickness: f64,
    pub vp: f64,
    pub vs: f64,
    pub rho: f64,
}

impl Layer {
    pub fn lame(&self) -> Result<(f64, f64)> {
        let mu = self.rho * self.vs * self.vs;
        let lam = self.rho * (self.vp * self.vp - 2.0 * self.vs * self.vs);
        if !(lam > 0.0) {
            return Err(Error::Config(format!(
                "layer (vp={}, vs={}) gives non-positive lambda {lam}",
                self.vp, self.vs
            )));
        }
        if !(self.rho > 0.0) || mu < 0.0 {
            return Err(Error::Config(format!("layer density {} must be positive", self.rho)));
        }
        Ok((lam, mu))
    }
}

/// Ricker wavelet `A (1 - 2π²f²τ²) exp(-π²f²τ²)`, `τ = t - t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RickerSource {
    pub f_peak: f64,
    /// Delay; `None` means `1 / f_peak`.
    pub t0: Option<f64>,
    pub amplitude: f64,
    /// Meters; `None` centers the source horizontally.
    pub x: Option<f64>,
    pub z: f64,
}

impl Default for RickerSource {
    fn default() -> Self {
        Self { f_peak: 11.2, t0: None, amplitude: 1.0, x: None, z: 750.0 }
    }
}

impl RickerSource {
    pub fn delay(&self) -> f64 {
        self.t0.unwrap_or(1.0 / self.f_peak)
    }

    pub fn ricker(&self, t: f64) -> f64 {
        let a = (PI * self.f_peak * (t - self.delay())).powi(2);
        self.amplitude * (1.0 - 2.0 * a) * (-a).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElasticConfig {
    pub width: f64,
    pub depth: f64,
    pub dx: f64,
    pub dz: f64,
    pub layers: Vec<Layer>,
    pub courant: f64,
    pub vmax_for_dt: f64,
    pub t_end: f64,
    pub snapshot_interval: f64,
    pub source: RickerSource,
}

impl Default for ElasticConfig {
    fn default() -> Self {
        Self {
            width: 2000.0,
            depth: 2000.0,
            dx: 10.0,
            dz: 10.0,
            layers: vec![
                Layer { thickness: 1000.0, vp: 1400.0, vs: 0.0, rho: 1000.0 },
                Layer { thickness: 1000.0, vp: 4000.0, vs: 2400.0, rho: 2600.0 },
            ],
            courant: 0.47,
            vmax_for_dt: 6000.0,
            t_end: 0.6,
            snapshot_interval: 0.1,
            source: RickerSource::default(),
        }
    }
}

impl ElasticConfig {
    pub fn nx(&self) -> usize {
        (self.width / self.dx).round() as usize + 1
    }

    pub fn nz(&self) -> usize {
        (self.depth / self.dz).round() as usize + 1
    }

    pub fn dt(&self) -> f64 {
        self.courant * self.dx.min(self.dz) / self.vmax_for_dt
    }

    pub fn source_node(&self) -> (usize, usize) {
        let x = self.source.x.unwrap_or(0.5 * self.width);
        let i = (x / self.dx).round().clamp(0.0, (self.nx() - 1) as f64) as usize;
        let j = (self.source.z / self.dz).round().clamp(0.0, (self.nz() - 1) as f64) as usize;
        (i, j)
    }

    /// Nominal snapshot times `0, Δ, 2Δ, ... ≤ t_end`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let count = (self.t_end / self.snapshot_interval + 1e-9).floor() as usize;
        (0..=count).map(|k| crate::round_time(k as f64 * self.snapshot_interval)).collect()
    }

    pub fn step_index(&self, t: f64) -> usize {
        (t / self.dt()).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        for (name, v) in [("width", self.width), ("depth", self.depth), ("dx", self.dx), ("dz", self.dz)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.nx() < 2 || self.nz() < 2 {
            return fail("grid needs at least 2 × 2 nodes".into());
        }
        if self.layers.is_empty() {
            return fail("at least one layer is required".into());
        }
        let total: f64 = self.layers.iter().map(|l| l.thickness).sum();
        if (total - self.depth).abs() > 1e-9 * self.depth {
            return fail(format!("layer thicknesses sum to {total}, domain depth is {}", self.depth));
        }
        let vp_max = self.layers.iter().fold(0.0_f64, |m, l| m.max(l.vp));
        if self.vmax_for_dt < vp_max {
            return fail(format!("vmax_for_dt {} is below the model's vp {vp_max}", self.vmax_for_dt));
        }
        if !(self.courant > 0.0) {
            return fail(format!("courant must be positive, got {}", self.courant));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.snapshot_interval > 0.0) {
            return fail(format!("snapshot_interval must be positive, got {}", self.snapshot_interval));
        }
        if !(self.source.f_peak > 0.0) {
            return fail(format!("f_peak must be positive, got {}", self.source.f_peak));
        }
        for l in &self.layers {
            l.lame()?;
        }
        Ok(())
    }
}

/// Material grids on the normal-stress lattice, row-major `[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticModel {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub lam: Vec<f64>,
    pub mu: Vec<f64>,
    pub buoyancy: Vec<f64>,
}

impl ElasticModel {
    pub fn homogeneous(nx: usize, nz: usize, dx: f64, dz: f64, layer: Layer) -> Result<Self> {
        let (lam, mu) = layer.lame()?;
        let n = nx * nz;
        Ok(Self { nx, nz, dx, dz, lam: vec![lam; n], mu: vec![mu; n], buoyancy: vec![1.0 / layer.rho; n] })
    }

    pub fn max_vp(&self) -> f64 {
        (0..self.lam.len())
            .map(|k| ((self.lam[k] + 2.0 * self.mu[k]) * self.buoyancy[k]).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Node `j` takes the properties of the layer containing depth `j·dz`; a node
/// on an interface belongs to the layer below it.
pub fn build_two_layer_model(config: &ElasticConfig) -> Result<ElasticModel> {
    config.validate()?;
    let (nx, nz) = (config.nx(), config.nz());
    let props: Vec<(f64, f64, f64)> = config
        .layers
        .iter()
        .map(|l| l.lame().map(|(lam, mu)| (lam, mu, 1.0 / l.rho)))
        .collect::<Result<_>>()?;
    let mut model = ElasticModel {
        nx,
        nz,
        dx: config.dx,
        dz: config.dz,
        lam: Vec::with_capacity(nx * nz),
        mu: Vec::with_capacity(nx * nz),
        buoyancy: Vec::with_capacity(nx * nz),
    };
    for j in 0..nz {
        let z = j as f64 * config.dz;
        let mut top = 0.0;
        let mut index = config.layers.len() - 1;
        for (k, l) in config.layers.iter().enumerate() {
            let bottom = top + l.thickness;
            if z < bottom - 1e-9 * config.dz {
                index = k;
                break;
            }
            top = bottom;
        }
        let (lam, mu, b) = props[index];
        model.lam.extend(std::iter::repeat_n(lam, nx));
        model.mu.extend(std::iter::repeat_n(mu, nx));
        model.buoyancy.extend(std::iter::repeat_n(b, nx));
    }
    Ok(model)
}
