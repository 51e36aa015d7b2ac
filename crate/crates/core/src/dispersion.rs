//! Modified-wavenumber analysis.
//!
//! For a stencil approximating the `d`-th derivative the modified
//! wavenumber is the real number `ᾱΔx` (or `(ᾱΔx)²` for `d = 2`) that the
//! stencil reports for the Fourier mode `e^{iκx/Δx}`; the exact operator
//! gives `κ^d`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;
use crate::quadrature;
use crate::stencil::{Stencil, QUADRATURE_REL_TOL};

pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_TOLERANCE: f64 = 1e-2;

const SCAN_SAMPLES: usize = 4096;
const BISECTIONS: usize = 60;

/// `κ^d`, the exact modified wavenumber.
pub fn ideal(derivative_order: u32, kappa: f64) -> f64 {
    kappa.powi(derivative_order as i32)
}

/// Modified wavenumber of `stencil` at `κ`: `symbol / i^d`, real part.
pub fn modified_wavenumber(stencil: &Stencil, kappa: f64) -> f64 {
    let s = stencil.symbol(kappa);
    // Written so that a zero symbol gives +0 rather than -0.
    match stencil.derivative_order() {
        1 => s.im + 0.0,
        _ => 0.0 - s.re,
    }
}

/// Imaginary residue left after dividing the symbol by `i^d`.
pub fn imaginary_residue(stencil: &Stencil, kappa: f64) -> f64 {
    let s = stencil.symbol(kappa);
    match stencil.derivative_order() {
        1 => -s.re,
        _ => -s.im,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub stencil_id: String,
    pub derivative_order: u32,
    pub kappa: Vec<f64>,
    pub symbol: Vec<f64>,
}

impl DispersionCurve {
    /// `samples` uniform points on `[0, π]`, endpoints included.
    pub fn sample(stencil: &Stencil, samples: usize) -> Self {
        let n = samples.max(2);
        let kappa: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        let symbol = kappa.iter().map(|&k| modified_wavenumber(stencil, k)).collect();
        Self {
            stencil_id: stencil.label().to_string(),
            derivative_order: stencil.derivative_order(),
            kappa,
            symbol,
        }
    }

    /// Columns `kappa,symbol,ideal,misfit`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["kappa", "symbol", "ideal", "misfit"])
            .comment(format!("stencil={}", self.stencil_id));
        for (&k, &s) in self.kappa.iter().zip(&self.symbol) {
            let exact = ideal(self.derivative_order, k);
            t.push_numbers(&[k, s, exact, s - exact]);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub kappa_max: f64,
    pub lambda_min_in_dx: f64,
}

/// Largest `κ* ≤ π` below which the relative misfit of the modified
/// wavenumber stays within `rel_tolerance`.
pub fn resolution_limit(stencil: &Stencil, rel_tolerance: f64) -> Result<Resolution> {
    let d = stencil.derivative_order();
    resolution_limit_by(
        |k| {
            let exact = ideal(d, k);
            (modified_wavenumber(stencil, k) - exact).abs() / exact
        },
        rel_tolerance,
    )
}

/// Resolution limit of an arbitrary relative-misfit function on `(0, π]`.
pub fn resolution_limit_by<F: Fn(f64) -> f64>(relative_misfit: F, rel_tolerance: f64) -> Result<Resolution> {
    if !(rel_tolerance > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {rel_tolerance}")));
    }
    let exceeds = |k: f64| relative_misfit(k) > rel_tolerance;
    let kappa_at = |i: usize| PI * i as f64 / SCAN_SAMPLES as f64;
    let crossing = (1..=SCAN_SAMPLES).find(|&i| exceeds(kappa_at(i)));
    let kappa_max = match crossing {
        None => PI,
        Some(1) => return Err(Error::Unresolved(rel_tolerance)),
        Some(i) => {
            let (mut lo, mut hi) = (kappa_at(i - 1), kappa_at(i));
            for _ in 0..BISECTIONS {
                let mid = 0.5 * (lo + hi);
                if exceeds(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        }
    };
    Ok(Resolution { kappa_max, lambda_min_in_dx: 2.0 * PI / kappa_max })
}

/// Misfit of two stencils against the exact symbol, side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDifference {
    pub label_a: String,
    pub label_b: String,
    pub kappa: Vec<f64>,
    pub misfit_a: Vec<f64>,
    pub misfit_b: Vec<f64>,
    /// `∫_0^{π/2} |misfit|² dκ` for each stencil.
    pub integrated_a: f64,
    pub integrated_b: f64,
}

impl CurveDifference {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["kappa", self.label_a.as_str(), self.label_b.as_str()])
            .comment(format!("integrated_{}={}", self.label_a, self.integrated_a))
            .comment(format!("integrated_{}={}", self.label_b, self.integrated_b));
        for i in 0..self.kappa.len() {
            t.push_numbers(&[self.kappa[i], self.misfit_a[i], self.misfit_b[i]]);
        }
        t
    }
}

pub fn integrated_misfit(stencil: &Stencil, upper: f64) -> Result<f64> {
    let d = stencil.derivative_order();
    quadrature::integrate(
        |k| (modified_wavenumber(stencil, k) - ideal(d, k)).powi(2),
        0.0,
        upper,
        QUADRATURE_REL_TOL,
    )
}

pub fn curve_difference(a: &Stencil, b: &Stencil, samples: usize) -> Result<CurveDifference> {
    if a.derivative_order() != b.derivative_order() || a.grid_kind() != b.grid_kind() {
        return Err(Error::MismatchedStencils(format!(
            "{} (d={}, {}) vs {} (d={}, {})",
            a.label(),
            a.derivative_order(),
            a.grid_kind(),
            b.label(),
            b.derivative_order(),
            b.grid_kind()
        )));
    }
    let ca = DispersionCurve::sample(a, samples);
    let cb = DispersionCurve::sample(b, samples);
    let d = a.derivative_order();
    let misfit = |c: &DispersionCurve| -> Vec<f64> {
        c.kappa.iter().zip(&c.symbol).map(|(&k, &s)| s - ideal(d, k)).collect()
    };
    Ok(CurveDifference {
        label_a: a.label().to_string(),
        label_b: b.label().to_string(),
        misfit_a: misfit(&ca),
        misfit_b: misfit(&cb),
        kappa: ca.kappa,
        integrated_a: integrated_misfit(a, FRAC_PI_2)?,
        integrated_b: integrated_misfit(b, FRAC_PI_2)?,
    })
}
