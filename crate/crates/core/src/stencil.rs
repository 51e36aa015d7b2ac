//! Finite-difference stencils: conventional (Taylor) coefficients, affine
//! families of Taylor-constrained coefficients, and the spectrally optimized
//! member of a family.
//!
//! A stencil approximates the `d`-th derivative at an evaluation point as
//! `Δx^{-d} Σ_j a_j u(x + p_j Δx)`, where the node position `p_j` is the
//! integer offset `j` for collocated stencils and `j ∓ 1/2` for the two
//! staggered kinds.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature;

/// Default half-width of the optimization window in κ = αΔx.
pub const DEFAULT_WINDOW: f64 = FRAC_PI_2;

/// Relative stability demanded of quadrature results when the rule order is doubled.
pub const QUADRATURE_REL_TOL: f64 = 1e-12;

const CONSISTENCY_TOL: f64 = 1e-12;
const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Where a stencil evaluates its derivative relative to the nodes it reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Evaluation on a node; offset `j` sits at `jΔx`.
    Collocated,
    /// Type A: evaluation half a cell ahead of node 0; offset `j` sits at `(j - 1/2)Δx`.
    StaggeredForward,
    /// Type B: evaluation half a cell behind node 0; offset `j` sits at `(j + 1/2)Δx`.
    StaggeredBackward,
}

impl GridKind {
    /// Position shift applied to integer offsets, in cells.
    pub fn shift(self) -> f64 {
        match self {
            GridKind::Collocated => 0.0,
            GridKind::StaggeredForward => -0.5,
            GridKind::StaggeredBackward => 0.5,
        }
    }

    fn shift_rational(self) -> BigRational {
        match self {
            GridKind::Collocated => BigRational::zero(),
            GridKind::StaggeredForward => ratio(-1, 2),
            GridKind::StaggeredBackward => ratio(1, 2),
        }
    }

    pub fn is_staggered(self) -> bool {
        !matches!(self, GridKind::Collocated)
    }
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Collocated => "collocated",
            GridKind::StaggeredForward => "staggered_forward",
            GridKind::StaggeredBackward => "staggered_backward",
        })
    }
}

/// Number of nodes on the negative (`n`) and positive (`m`) side of offset 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Extent {
    pub negative: u32,
    pub positive: u32,
}

impl Extent {
    pub fn new(negative: u32, positive: u32) -> Self {
        Self { negative, positive }
    }

    /// `N = M = half_width`.
    pub fn symmetric(half_width: u32) -> Self {
        Self::new(half_width, half_width)
    }

    /// The natural staggered extent with `pairs` antisymmetric coefficient pairs.
    pub fn staggered(kind: GridKind, pairs: u32) -> Self {
        match kind {
            GridKind::StaggeredForward => Self::new(pairs.saturating_sub(1), pairs),
            GridKind::StaggeredBackward => Self::new(pairs, pairs.saturating_sub(1)),
            GridKind::Collocated => Self::symmetric(pairs),
        }
    }

    pub fn offsets(self) -> Vec<i32> {
        (-(self.negative as i32)..=self.positive as i32).collect()
    }
}

/// A derivative approximation with fixed coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    label: String,
    offsets: Vec<i32>,
    coefficients: Vec<f64>,
    derivative_order: u32,
    grid_kind: GridKind,
    accuracy_order: u32,
}

impl Stencil {
    /// Builds a stencil, checking ordering, consistency and the
    /// (anti)symmetry implied by its grid kind and extent.
    pub fn new(
        label: impl Into<String>,
        offsets: Vec<i32>,
        coefficients: Vec<f64>,
        derivative_order: u32,
        grid_kind: GridKind,
        accuracy_order: u32,
    ) -> Result<Self> {
        if offsets.is_empty() || offsets.len() != coefficients.len() {
            return Err(Error::InvalidStencil(format!(
                "{} offsets for {} coefficients",
                offsets.len(),
                coefficients.len()
            )));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStencil("offsets must be strictly increasing".into()));
        }
        if !(1..=2).contains(&derivative_order) {
            return Err(Error::InvalidStencil(format!(
                "derivative order {derivative_order} is not supported"
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidStencil("non-finite coefficient".into()));
        }
        let sum: f64 = coefficients.iter().sum();
        if sum.abs() > CONSISTENCY_TOL {
            return Err(Error::InvalidStencil(format!(
                "coefficients sum to {sum:e}; a derivative stencil must annihilate constants"
            )));
        }

        let stencil = Self {
            label: label.into(),
            offsets,
            coefficients,
            derivative_order,
            grid_kind,
            accuracy_order,
        };
        stencil.check_symmetry()?;
        Ok(stencil)
    }

    fn check_symmetry(&self) -> Result<()> {
        let mirror: Option<(i32, f64, f64)> = match (self.grid_kind, self.derivative_order) {
            (GridKind::Collocated, 2) => Some((0, 1.0, 0.0)),
            (GridKind::Collocated, _) => Some((0, -1.0, ANTISYMMETRY_TOL)),
            (GridKind::StaggeredForward, _) => Some((1, -1.0, ANTISYMMETRY_TOL)),
            (GridKind::StaggeredBackward, _) => Some((-1, -1.0, ANTISYMMETRY_TOL)),
        };
        let Some((axis, sign, tol)) = mirror else {
            return Ok(());
        };
        // Only stencils whose node set is symmetric about the evaluation
        // point carry the (anti)symmetry; others are one-sided by design.
        let first = self.offsets[0];
        let last = *self.offsets.last().unwrap();
        if first + last != axis {
            return Ok(());
        }
        for (j, a) in self.offsets.iter().zip(&self.coefficients) {
            let partner = self.coefficient_at(axis - j).unwrap_or(0.0);
            if (a - sign * partner).abs() > tol {
                return Err(Error::InvalidStencil(format!(
                    "coefficient at offset {j} breaks the {} pattern",
                    if sign > 0.0 { "symmetric" } else { "antisymmetric" }
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn offsets(&self) -> &[i32] {
        &self.offsets
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient_at(&self, offset: i32) -> Option<f64> {
        self.offsets
            .iter()
            .position(|&j| j == offset)
            .map(|i| self.coefficients[i])
    }

    pub fn derivative_order(&self) -> u32 {
        self.derivative_order
    }

    pub fn grid_kind(&self) -> GridKind {
        self.grid_kind
    }

    pub fn accuracy_order(&self) -> u32 {
        self.accuracy_order
    }

    /// Power of Δx dividing the weighted sum.
    pub fn dx_power(&self) -> u32 {
        self.derivative_order
    }

    pub fn extent(&self) -> Extent {
        Extent::new(
            (-self.offsets[0]).max(0) as u32,
            (*self.offsets.last().unwrap()).max(0) as u32,
        )
    }

    /// Largest |offset|, i.e. the halo a solver needs around its arrays.
    pub fn reach(&self) -> usize {
        self.offsets.iter().map(|j| j.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Node positions in cells relative to the evaluation point.
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        let shift = self.grid_kind.shift();
        self.offsets.iter().map(move |&j| j as f64 + shift)
    }

    /// Applies the stencil to samples `f(p)` at node positions `p` (unit grid).
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.positions()
            .zip(&self.coefficients)
            .map(|(p, a)| a * f(p))
            .sum()
    }

    /// Fourier symbol `Σ a_j e^{i p_j κ}`.
    pub fn symbol(&self, kappa: f64) -> Complex64 {
        let positions: Vec<f64> = self.positions().collect();
        symbol_of(&positions, &self.coefficients, kappa)
    }

    /// Integrated squared misfit between the exact derivative symbol `(iκ)^d`
    /// and the stencil symbol over `[-window, window]`.
    pub fn spectral_error(&self, window: f64) -> Result<f64> {
        check_window(window)?;
        let positions: Vec<f64> = self.positions().collect();
        let d = self.derivative_order;
        quadrature::integrate(
            |k| (ideal_symbol(d, k) - symbol_of(&positions, &self.coefficients, k)).norm_sqr(),
            -window,
            window,
            QUADRATURE_REL_TOL,
        )
    }

    /// `offset,coefficient` rows, no header.
    pub fn to_csv_rows(&self) -> String {
        let mut out = String::new();
        for (j, a) in self.offsets.iter().zip(&self.coefficients) {
            out.push_str(&format!("{j},{}\n", crate::io::format_f64(*a)));
        }
        out
    }

    /// Machine-readable summary including `E` over `[-window, window]`.
    pub fn report(&self, window: f64) -> Result<StencilReport> {
        Ok(StencilReport {
            label: self.label.clone(),
            derivative: self.derivative_order,
            grid_kind: self.grid_kind,
            offsets: self.offsets.clone(),
            coefficients: self.coefficients.clone(),
            accuracy_order: self.accuracy_order,
            window,
            e: self.spectral_error(window)?,
        })
    }
}

/// JSON form of a stencil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilReport {
    pub label: String,
    pub derivative: u32,
    pub grid_kind: GridKind,
    pub offsets: Vec<i32>,
    pub coefficients: Vec<f64>,
    pub accuracy_order: u32,
    pub window: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

/// `(iκ)^d`.
pub fn ideal_symbol(derivative_order: u32, kappa: f64) -> Complex64 {
    Complex64::new(0.0, kappa).powu(derivative_order)
}

/// `Σ a_j e^{i p_j κ}` for a consistent stencil, evaluated as
/// `Σ a_j (e^{i p_j κ} - 1)`. The rounding residue of `Σ a_j` is dropped, so
/// small-κ values keep their relative accuracy and the symbol vanishes at 0.
pub(crate) fn symbol_of(positions: &[f64], coefficients: &[f64], kappa: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, a) in positions.iter().zip(coefficients) {
        let theta = p * kappa;
        let half = (0.5 * theta).sin();
        acc += a * Complex64::new(-2.0 * half * half, theta.sin());
    }
    acc
}

fn check_window(window: f64) -> Result<()> {
    if window.is_finite() && window > 0.0 {
        Ok(())
    } else {
        Err(Error::EmptyWindow)
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn factorial(k: u32) -> BigRational {
    BigRational::from_integer((1..=k as u64).fold(BigInt::one(), |acc, v| acc * BigInt::from(v)))
}

/// One independent unknown of a (anti)symmetric stencil: the offsets it
/// occupies and the sign it carries at each.
#[derive(Debug, Clone)]
struct Unknown {
    name: String,
    slots: Vec<(i32, i32)>,
}

/// Independent unknowns implied by the grid kind, in the order
/// `[u_0?, u_1, u_2, ...]`, plus how many leading entries are never free.
fn unknown_layout(derivative_order: u32, kind: GridKind, extent: Extent) -> Result<(Vec<Unknown>, usize)> {
    let (n, m) = (extent.negative as i32, extent.positive as i32);
    let bad = |why: &str| Err(Error::InvalidExtent(format!("(N={n}, M={m}) {why}")));
    match (kind, derivative_order) {
        (GridKind::Collocated, 2) => {
            if n != m || m < 1 {
                return bad("collocated second derivatives need N = M >= 1");
            }
            let mut list = vec![Unknown { name: "a_0".into(), slots: vec![(0, 1)] }];
            list.extend((1..=m).map(|k| Unknown {
                name: format!("a_{k}"),
                slots: vec![(-k, 1), (k, 1)],
            }));
            Ok((list, 1))
        }
        (GridKind::Collocated, 1) => {
            if n != m || m < 1 {
                return bad("collocated first derivatives need N = M >= 1");
            }
            let list = (1..=m)
                .map(|k| Unknown { name: format!("a_{k}"), slots: vec![(-k, -1), (k, 1)] })
                .collect();
            Ok((list, 0))
        }
        (GridKind::StaggeredForward, 1) => {
            if m != n + 1 {
                return bad("type A stencils need M = N + 1");
            }
            let list = (1..=m)
                .map(|k| Unknown { name: format!("a_{k}"), slots: vec![(1 - k, -1), (k, 1)] })
                .collect();
            Ok((list, 0))
        }
        (GridKind::StaggeredBackward, 1) => {
            if n != m + 1 {
                return bad("type B stencils need N = M + 1");
            }
            let list = (1..=n)
                .map(|k| Unknown { name: format!("a_{}", k - 1), slots: vec![(-k, -1), (k - 1, 1)] })
                .collect();
            Ok((list, 0))
        }
        (kind, d) => Err(Error::InvalidExtent(format!(
            "derivative order {d} on a {kind} grid is not supported"
        ))),
    }
}

/// Moment indices `k` constraining a stencil of the given accuracy order.
fn moment_indices(derivative_order: u32, accuracy_order: u32) -> Vec<u32> {
    (0..derivative_order + accuracy_order)
        .filter(|k| k % 2 == derivative_order % 2)
        .collect()
}

/// Highest even accuracy order the layout can reach.
fn max_accuracy_order(derivative_order: u32, unknowns: usize) -> u32 {
    let mut best = 0;
    let mut p = 2;
    while moment_indices(derivative_order, p).len() <= unknowns {
        best = p;
        p += 2;
    }
    best
}

/// An affine family of stencil coefficients meeting a given accuracy order:
/// `coefficients = base + matrix · params`, held exactly.
#[derive(Debug, Clone)]
pub struct StencilFamily {
    free_parameter_names: Vec<String>,
    offsets: Vec<i32>,
    base: Vec<BigRational>,
    matrix: Vec<Vec<BigRational>>,
    extent: Extent,
    derivative_order: u32,
    grid_kind: GridKind,
    accuracy_order: u32,
}

impl StencilFamily {
    fn derive(derivative_order: u32, kind: GridKind, extent: Extent, accuracy_order: u32) -> Result<Self> {
        if accuracy_order == 0 || !accuracy_order.is_multiple_of(2) {
            return Err(Error::InvalidOrder(format!(
                "{accuracy_order} (must be a positive even integer)"
            )));
        }
        let (unknowns, fixed_lead) = unknown_layout(derivative_order, kind, extent)?;
        let max_order = max_accuracy_order(derivative_order, unknowns.len());
        if accuracy_order > max_order {
            return Err(Error::InvalidOrder(format!(
                "{accuracy_order} exceeds the maximum {max_order} for (N={}, M={})",
                extent.negative, extent.positive
            )));
        }

        let moments = moment_indices(derivative_order, accuracy_order);
        let n_free = unknowns.len() - moments.len();
        let free: Vec<usize> = (fixed_lead..fixed_lead + n_free).collect();
        let dependent: Vec<usize> = (0..unknowns.len()).filter(|i| !free.contains(i)).collect();

        let shift = kind.shift_rational();
        // Row k, column u: Σ over slots of sign · position^k.
        let weight = |u: &Unknown, k: u32| -> BigRational {
            u.slots.iter().fold(BigRational::zero(), |acc, &(j, sign)| {
                let pos = BigRational::from_integer(BigInt::from(j)) + &shift;
                acc + BigRational::from_integer(BigInt::from(sign)) * num_traits::pow(pos, k as usize)
            })
        };

        let a_dep: Vec<Vec<BigRational>> = moments
            .iter()
            .map(|&k| dependent.iter().map(|&u| weight(&unknowns[u], k)).collect())
            .collect();
        // Right-hand sides: column 0 is the target moment vector, columns
        // 1.. are the (negated) contributions of each free unknown.
        let rhs: Vec<Vec<BigRational>> = moments
            .iter()
            .map(|&k| {
                let target = if k == derivative_order {
                    factorial(k)
                } else {
                    BigRational::zero()
                };
                std::iter::once(target)
                    .chain(free.iter().map(|&u| -weight(&unknowns[u], k)))
                    .collect()
            })
            .collect();
        let solved = linalg::solve_rational(a_dep, rhs)?;

        // Unknown values as affine functions: value[u] = (constant, per-free-param).
        let mut affine: Vec<(BigRational, Vec<BigRational>)> =
            vec![(BigRational::zero(), vec![BigRational::zero(); n_free]); unknowns.len()];
        for (row, &u) in dependent.iter().enumerate() {
            affine[u] = (solved[row][0].clone(), solved[row][1..].to_vec());
        }
        for (col, &u) in free.iter().enumerate() {
            affine[u].1[col] = BigRational::one();
        }

        let offsets = extent.offsets();
        let mut base = vec![BigRational::zero(); offsets.len()];
        let mut matrix = vec![vec![BigRational::zero(); n_free]; offsets.len()];
        for (u, unknown) in unknowns.iter().enumerate() {
            for &(j, sign) in &unknown.slots {
                let idx = (j + extent.negative as i32) as usize;
                let s = BigRational::from_integer(BigInt::from(sign));
                base[idx] += &s * &affine[u].0;
                for c in 0..n_free {
                    matrix[idx][c] += &s * &affine[u].1[c];
                }
            }
        }

        Ok(Self {
            free_parameter_names: free.iter().map(|&u| unknowns[u].name.clone()).collect(),
            offsets,
            base,
            matrix,
            extent,
            derivative_order,
            grid_kind: kind,
            accuracy_order,
        })
    }

    pub fn free_parameter_names(&self) -> &[String] {
        &self.free_parameter_names
    }

    pub fn num_free(&self) -> usize {
        self.free_parameter_names.len()
    }

    pub fn offsets(&self) -> &[i32] {
        &self.offsets
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn derivative_order(&self) -> u32 {
        self.derivative_order
    }

    pub fn grid_kind(&self) -> GridKind {
        self.grid_kind
    }

    pub fn accuracy_order(&self) -> u32 {
        self.accuracy_order
    }

    /// Exact constant part of the constraint map, one entry per offset.
    pub fn base_exact(&self) -> &[BigRational] {
        &self.base
    }

    /// Exact linear part of the constraint map (offsets × free parameters).
    pub fn matrix_exact(&self) -> &[Vec<BigRational>] {
        &self.matrix
    }

    /// Coefficients for exact rational parameters.
    pub fn coefficients_exact(&self, params: &[BigRational]) -> Result<Vec<BigRational>> {
        self.check_params(params.len())?;
        Ok(self
            .base
            .iter()
            .zip(&self.matrix)
            .map(|(b, row)| row.iter().zip(params).fold(b.clone(), |acc, (m, p)| acc + m * p))
            .collect())
    }

    /// Coefficients for floating-point parameters.
    pub fn coefficients(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params.len())?;
        Ok(self
            .base
            .iter()
            .zip(&self.matrix)
            .map(|(b, row)| {
                row.iter()
                    .zip(params)
                    .fold(to_f64(b), |acc, (m, p)| acc + to_f64(m) * p)
            })
            .collect())
    }

    fn check_params(&self, given: usize) -> Result<()> {
        if given == self.num_free() {
            Ok(())
        } else {
            Err(Error::LengthMismatch(given, self.num_free()))
        }
    }

    /// The family member with the given free parameters.
    pub fn member(&self, label: impl Into<String>, params: &[f64]) -> Result<Stencil> {
        Stencil::new(
            label,
            self.offsets.clone(),
            self.coefficients(params)?,
            self.derivative_order,
            self.grid_kind,
            self.accuracy_order,
        )
    }

    fn positions(&self) -> Vec<f64> {
        let shift = self.grid_kind.shift();
        self.offsets.iter().map(|&j| j as f64 + shift).collect()
    }

    fn base_f64(&self) -> Vec<f64> {
        self.base.iter().map(to_f64).collect()
    }

    fn column_f64(&self, c: usize) -> Vec<f64> {
        self.matrix.iter().map(|row| to_f64(&row[c])).collect()
    }
}

fn kind_prefix(kind: GridKind) -> &'static str {
    if kind.is_staggered() {
        "staggered-"
    } else {
        ""
    }
}

/// Maximal-order Taylor stencil for the extent.
pub fn conventional_stencil(derivative_order: u32, kind: GridKind, extent: Extent) -> Result<Stencil> {
    let (unknowns, _) = unknown_layout(derivative_order, kind, extent)?;
    let order = max_accuracy_order(derivative_order, unknowns.len());
    let family = StencilFamily::derive(derivative_order, kind, extent, order)?;
    family.member(format!("{}conventional{order}", kind_prefix(kind)), &[])
}

/// Taylor-constrained family of the given accuracy order with at least one free parameter.
pub fn taylor_constraint_family(
    derivative_order: u32,
    kind: GridKind,
    extent: Extent,
    accuracy_order: u32,
) -> Result<StencilFamily> {
    let family = StencilFamily::derive(derivative_order, kind, extent, accuracy_order)?;
    if family.num_free() == 0 {
        return Err(Error::NoFreeParameters { order: accuracy_order });
    }
    Ok(family)
}

/// `E(params)` for a family member.
pub fn spectral_error(family: &StencilFamily, params: &[f64], window: f64) -> Result<f64> {
    check_window(window)?;
    family.member("member", params)?.spectral_error(window)
}

/// Gradient of `E` with respect to the free parameters by central differences.
pub fn spectral_error_gradient(family: &StencilFamily, params: &[f64], window: f64) -> Result<Vec<f64>> {
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let h = 1e-4 * params[i].abs().max(1.0);
        let mut plus = params.to_vec();
        let mut minus = params.to_vec();
        plus[i] += h;
        minus[i] -= h;
        grad.push((spectral_error(family, &plus, window)? - spectral_error(family, &minus, window)?) / (2.0 * h));
    }
    Ok(grad)
}

/// Free parameters minimizing `E` over the window.
///
/// `E` is a quadratic form in the free parameters, so the minimizer solves
/// the normal equations `G p = h` with `G_ik = Re ∫ conj(s_i) s_k` and
/// `h_i = Re ∫ conj(s_i) r_0`, where `s_i` is the symbol of column `i` of the
/// constraint map and `r_0` the misfit of the constant part.
pub fn optimal_parameters(family: &StencilFamily, window: f64) -> Result<Vec<f64>> {
    check_window(window)?;
    let n = family.num_free();
    if n == 0 {
        return Err(Error::NoFreeParameters { order: family.accuracy_order });
    }
    let positions = family.positions();
    let base = family.base_f64();
    let columns: Vec<Vec<f64>> = (0..n).map(|c| family.column_f64(c)).collect();
    let d = family.derivative_order;

    // Packed as [G (n*n) | h (n)].
    let dim = n * n + n;
    let integrals = quadrature::integrate_many(
        |k, out: &mut [f64]| {
            let r0 = ideal_symbol(d, k) - symbol_of(&positions, &base, k);
            let s: Vec<Complex64> = columns.iter().map(|col| symbol_of(&positions, col, k)).collect();
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = (s[i].conj() * s[j]).re;
                }
                out[n * n + i] = (s[i].conj() * r0).re;
            }
        },
        dim,
        -window,
        window,
        QUADRATURE_REL_TOL,
    )?;
    let gram: Vec<Vec<f64>> = (0..n).map(|i| integrals[i * n..(i + 1) * n].to_vec()).collect();
    linalg::solve_spd(&gram, &integrals[n * n..])
}

/// The family member minimizing `E`, with a stationarity check on the result.
pub fn optimize_family(family: &StencilFamily, window: f64) -> Result<Stencil> {
    let params = optimal_parameters(family, window)?;
    let stencil = family.member(
        format!("{}optimized{}", kind_prefix(family.grid_kind), family.accuracy_order),
        &params,
    )?;
    let error = stencil.spectral_error(window)?;
    let gradient = spectral_error_gradient(family, &params, window)?
        .into_iter()
        .fold(0.0_f64, |m, g| m.max(g.abs()));
    if gradient >= 1e-8 * (1.0 + error) {
        return Err(Error::NotStationary { gradient, error });
    }
    Ok(stencil)
}

/// Frequently used stencils.
pub mod presets {
    use super::*;

    /// Spectrally optimized 4th-order second derivative on seven points.
    pub fn optimized_second4() -> Stencil {
        let family = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 4)
            .expect("N = M = 3 admits a 4th-order family");
        optimize_family(&family, DEFAULT_WINDOW).expect("family is non-degenerate")
    }

    /// Conventional second derivative of the given order (2, 4, 6, ...).
    pub fn conventional_second(order: u32) -> Stencil {
        conventional_stencil(2, GridKind::Collocated, Extent::symmetric(order / 2))
            .expect("symmetric extent")
    }

    /// Spectrally optimized 4th-order staggered first derivative on six points.
    pub fn optimized_staggered4(kind: GridKind) -> Stencil {
        let family = taylor_constraint_family(1, kind, Extent::staggered(kind, 3), 4)
            .expect("six-point staggered stencils admit a 4th-order family");
        optimize_family(&family, DEFAULT_WINDOW).expect("family is non-degenerate")
    }

    /// Conventional staggered first derivative of the given order.
    pub fn conventional_staggered(kind: GridKind, order: u32) -> Stencil {
        conventional_stencil(1, kind, Extent::staggered(kind, order / 2)).expect("staggered extent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: dense Gaussian elimination on the full (non-symmetrized)
    /// moment system Σ_j a_j p_j^k = k! δ_{k,d} for k = 0..len-1.
    fn brute_force_moments(positions: &[f64], d: u32) -> Vec<f64> {
        let n = positions.len();
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|k| positions.iter().map(|p| p.powi(k as i32)).collect())
            .collect();
        let mut b: Vec<f64> = (0..n)
            .map(|k| if k as u32 == d { (1..=d).map(f64::from).product() } else { 0.0 })
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn three_point_second_derivative() {
        let s = conventional_stencil(2, GridKind::Collocated, Extent::symmetric(1)).unwrap();
        assert_eq!(s.offsets(), &[-1, 0, 1]);
        assert_eq!(s.coefficients(), &[1.0, -2.0, 1.0]);
        assert_eq!(s.accuracy_order(), 2);
    }

    #[test]
    fn seven_point_second_derivative_matches_brute_force() {
        let s = conventional_stencil(2, GridKind::Collocated, Extent::symmetric(3)).unwrap();
        let oracle = brute_force_moments(&[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0], 2);
        for (a, b) in s.coefficients().iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let expected = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];
        for (a, b) in s.coefficients().iter().zip(&expected) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert_eq!(s.accuracy_order(), 6);
    }

    #[test]
    fn six_point_staggered_matches_brute_force() {
        let s = conventional_stencil(1, GridKind::StaggeredForward, Extent::new(2, 3)).unwrap();
        let positions: Vec<f64> = s.positions().collect();
        let oracle = brute_force_moments(&positions, 1);
        for (a, b) in s.coefficients().iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.coefficient_at(1).unwrap(), 75.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient_at(2).unwrap(), -25.0 / 384.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient_at(3).unwrap(), 3.0 / 640.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient_at(0).unwrap(), -75.0 / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn collocated_family_constraint_map_is_exact() {
        let fam = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 4).unwrap();
        assert_eq!(fam.free_parameter_names(), &["a_1".to_string()]);
        // offsets -3..=3 -> index = j + 3
        let base = fam.base_exact();
        let lin = fam.matrix_exact();
        assert_eq!(base[3], ratio(-13, 18));
        assert_eq!(lin[3][0], ratio(-4, 3));
        assert_eq!(base[5], ratio(9, 20));
        assert_eq!(lin[5][0], ratio(-2, 5));
        assert_eq!(base[6], ratio(-4, 45));
        assert_eq!(lin[6][0], ratio(1, 15));
        assert_eq!(base[0], base[6]);
        assert_eq!(lin[4][0], BigRational::one());
    }

    #[test]
    fn staggered_families_constraint_maps_are_exact() {
        let a = taylor_constraint_family(1, GridKind::StaggeredForward, Extent::new(2, 3), 4).unwrap();
        assert_eq!(a.free_parameter_names(), &["a_1".to_string()]);
        // offsets -2..=3 -> index = j + 2
        assert_eq!(a.base_exact()[2], BigRational::zero());
        assert_eq!(a.matrix_exact()[2][0], ratio(-1, 1));
        assert_eq!(a.base_exact()[4], ratio(25, 48));
        assert_eq!(a.matrix_exact()[4][0], ratio(-1, 2));
        assert_eq!(a.base_exact()[5], ratio(-9, 80));
        assert_eq!(a.matrix_exact()[5][0], ratio(1, 10));

        let b = taylor_constraint_family(1, GridKind::StaggeredBackward, Extent::new(3, 2), 4).unwrap();
        assert_eq!(b.free_parameter_names(), &["a_0".to_string()]);
        // offsets -3..=2 -> index = j + 3
        assert_eq!(b.matrix_exact()[2][0], ratio(-1, 1));
        assert_eq!(b.base_exact()[4], ratio(25, 48));
        assert_eq!(b.matrix_exact()[4][0], ratio(-1, 2));
        assert_eq!(b.base_exact()[5], ratio(-9, 80));
        assert_eq!(b.matrix_exact()[5][0], ratio(1, 10));
    }

    #[test]
    fn family_at_three_halves_is_the_conventional_stencil() {
        let fam = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 4).unwrap();
        let member = fam.coefficients_exact(&[ratio(3, 2)]).unwrap();
        let expected = [ratio(1, 90), ratio(-3, 20), ratio(3, 2), ratio(-49, 18), ratio(3, 2), ratio(-3, 20), ratio(1, 90)];
        assert_eq!(member, expected);
    }

    #[test]
    fn free_parameter_count() {
        let fam = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(5), 4).unwrap();
        assert_eq!(fam.num_free(), 3);
        let fam = taylor_constraint_family(1, GridKind::StaggeredForward, Extent::new(4, 5), 6).unwrap();
        assert_eq!(fam.num_free(), 2);
    }

    #[test]
    fn no_free_parameters_at_maximal_order() {
        let err = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 6).unwrap_err();
        assert!(matches!(err, Error::NoFreeParameters { order: 6 }));
        assert!(err.to_string().contains("no free parameters"));
    }

    #[test]
    fn invalid_extents_and_orders() {
        assert!(matches!(
            conventional_stencil(2, GridKind::Collocated, Extent::new(2, 3)),
            Err(Error::InvalidExtent(_))
        ));
        assert!(matches!(
            conventional_stencil(1, GridKind::StaggeredForward, Extent::new(3, 3)),
            Err(Error::InvalidExtent(_))
        ));
        assert!(matches!(
            conventional_stencil(2, GridKind::StaggeredForward, Extent::new(2, 3)),
            Err(Error::InvalidExtent(_))
        ));
        assert!(matches!(
            taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 3),
            Err(Error::InvalidOrder(_))
        ));
        assert!(matches!(
            taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 8),
            Err(Error::InvalidOrder(_))
        ));
    }

    #[test]
    fn spectral_error_of_exact_symbol_is_zero() {
        // Evaluate the functional against an "ideal" by integrating zero misfit.
        let e = quadrature::integrate(
            |k| (ideal_symbol(2, k) - ideal_symbol(2, k)).norm_sqr(),
            -DEFAULT_WINDOW,
            DEFAULT_WINDOW,
            QUADRATURE_REL_TOL,
        )
        .unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn empty_window_is_rejected() {
        let fam = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 4).unwrap();
        assert!(matches!(spectral_error(&fam, &[1.5], 0.0), Err(Error::EmptyWindow)));
        assert!(matches!(spectral_error(&fam, &[1.5], -1.0), Err(Error::EmptyWindow)));
        assert!(matches!(optimize_family(&fam, f64::NAN), Err(Error::EmptyWindow)));
    }

    // E values below were computed independently with 40-digit adaptive
    // quadrature (mpmath) of the misfit integrand, before this code existed.
    const E_COLLOCATED_OPT: f64 = 1.254_855_230_646_422e-5;
    const E_COLLOCATED_CONV6: f64 = 4.097_215_209_613_651e-4;
    const E_STAGGERED_OPT: f64 = 1.284_971_189_694_514e-6;
    const E_STAGGERED_CONV6: f64 = 3.357_731_553_527_076e-5;
    const A1_COLLOCATED_OPT: f64 = 1.569_379_994_993_790_3;
    const A1_STAGGERED_OPT: f64 = 1.189_101_951_199_964_8;

    #[test]
    fn spectral_error_regression_values() {
        let fam = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(3), 4).unwrap();
        let e = spectral_error(&fam, &[A1_COLLOCATED_OPT], DEFAULT_WINDOW).unwrap();
        assert!((e - E_COLLOCATED_OPT).abs() < 1e-12 * E_COLLOCATED_OPT * 1e3);
        let e = spectral_error(&fam, &[1.5], DEFAULT_WINDOW).unwrap();
        assert!((e / E_COLLOCATED_CONV6 - 1.0).abs() < 1e-10);

        let fam = taylor_constraint_family(1, GridKind::StaggeredForward, Extent::new(2, 3), 4).unwrap();
        let e = spectral_error(&fam, &[A1_STAGGERED_OPT], DEFAULT_WINDOW).unwrap();
        assert!((e / E_STAGGERED_OPT - 1.0).abs() < 1e-9);
        let e = spectral_error(&fam, &[75.0 / 64.0], DEFAULT_WINDOW).unwrap();
        assert!((e / E_STAGGERED_CONV6 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn optimizer_hits_the_independent_minimizer() {
        let s = presets::optimized_second4();
        assert_abs_diff_eq!(s.coefficient_at(1).unwrap(), A1_COLLOCATED_OPT, epsilon = 1e-12);
        assert_eq!(s.label(), "optimized4");
        let s = presets::optimized_staggered4(GridKind::StaggeredForward);
        assert_abs_diff_eq!(s.coefficient_at(1).unwrap(), A1_STAGGERED_OPT, epsilon = 1e-12);
        assert_eq!(s.label(), "staggered-optimized4");
    }

    #[test]
    fn type_b_is_type_a_shifted_by_one_node() {
        let a = presets::optimized_staggered4(GridKind::StaggeredForward);
        let b = presets::optimized_staggered4(GridKind::StaggeredBackward);
        for (&j, &coef) in a.offsets().iter().zip(a.coefficients()) {
            assert_abs_diff_eq!(b.coefficient_at(j - 1).unwrap(), coef, epsilon = 1e-13);
        }
        // Reversed and negated sequences coincide.
        let rev: Vec<f64> = b.coefficients().iter().rev().map(|c| -c).collect();
        for (x, y) in rev.iter().zip(a.coefficients()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn multi_parameter_family_optimizes() {
        let fam = taylor_constraint_family(2, GridKind::Collocated, Extent::symmetric(5), 4).unwrap();
        let s = optimize_family(&fam, DEFAULT_WINDOW).unwrap();
        let conv = conventional_stencil(2, GridKind::Collocated, Extent::symmetric(5)).unwrap();
        assert!(s.spectral_error(DEFAULT_WINDOW).unwrap() < conv.spectral_error(DEFAULT_WINDOW).unwrap());
    }

    #[test]
    fn stencil_rejects_inconsistent_or_asymmetric_coefficients() {
        assert!(Stencil::new("x", vec![-1, 0, 1], vec![1.0, -2.0, 1.1], 2, GridKind::Collocated, 2).is_err());
        assert!(Stencil::new("x", vec![-1, 0, 1], vec![1.5, -2.0, 0.5], 2, GridKind::Collocated, 2).is_err());
        assert!(Stencil::new("x", vec![0, 0], vec![1.0, -1.0], 1, GridKind::Collocated, 2).is_err());
        assert!(Stencil::new("x", vec![0, 1], vec![-1.0, 1.0], 1, GridKind::StaggeredForward, 2).is_ok());
        // One-sided collocated stencils are representable.
        assert!(Stencil::new("x", vec![0, 1, 2], vec![1.0, -2.0, 1.0], 2, GridKind::Collocated, 1).is_ok());
    }

    #[test]
    fn report_and_csv() {
        let s = presets::conventional_second(2);
        assert_eq!(s.to_csv_rows().lines().count(), 3);
        assert!(s.to_csv_rows().starts_with("-1,1.0000000000000000e0"));
        let json = serde_json::to_value(s.report(DEFAULT_WINDOW).unwrap()).unwrap();
        assert_eq!(json["grid_kind"], "collocated");
        assert_eq!(json["derivative"], 2);
        assert!(json["E"].as_f64().unwrap() > 0.0);
    }
}
