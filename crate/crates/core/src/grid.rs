//! Boxes in `R^n` (`n <= 2`) cut into equal cells, with functions sampled at
//! cell centers.
//!
//! Weak derivatives are finite differences: central in the interior and the
//! three-point one-sided formula on the first and last cell of each line.
//! Composition with an affine self-map evaluates the multilinear interpolant
//! of the cell-center samples at `T(center)`. Both steps are exact on affine
//! data, which anchors the chain-rule and boundedness checks below.

use crate::error::{Error, Result};
use crate::orlicz::{self, Carrier, OrliczFunction};

/// Slack when testing whether a point lies in the closed box.
pub const DOMAIN_EPS: f64 = 1e-12;

/// Residuals at or below this are rounding noise; convergence orders are
/// not meaningful there.
pub const EXACT_RESIDUAL_FLOOR: f64 = 1e-10;

/// Smallest accepted `|det A|`.
pub const SINGULAR_DET: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    bounds: Vec<(f64, f64)>,
    resolution: Vec<usize>,
}

impl GridDomain {
    pub fn new(bounds: Vec<(f64, f64)>, resolution: Vec<usize>) -> Result<Self> {
        let n = bounds.len();
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {n}")));
        }
        if resolution.len() != n {
            return Err(Error::InvalidGrid(format!(
                "{n} axes but {} resolutions",
                resolution.len()
            )));
        }
        for (axis, (&(lo, hi), &m)) in bounds.iter().zip(&resolution).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidGrid(format!("axis {axis}: need lo < hi, got [{lo}, {hi}]")));
            }
            if m < 4 {
                return Err(Error::InvalidGrid(format!("axis {axis}: need at least 4 cells, got {m}")));
            }
        }
        Ok(Self { bounds, resolution })
    }

    pub fn interval(lo: f64, hi: f64, m: usize) -> Result<Self> {
        Self::new(vec![(lo, hi)], vec![m])
    }

    /// `[0, 1]^n` with `m` cells per axis.
    pub fn unit(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![(0.0, 1.0); n], vec![m; n])
    }

    /// Same box, `m` cells along every axis.
    pub fn with_resolution(&self, m: usize) -> Result<Self> {
        Self::new(self.bounds.clone(), vec![m; self.dim()])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        (hi - lo) / self.resolution[axis] as f64
    }

    /// Largest cell spacing over the axes.
    pub fn h(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major stride of an axis (the last axis is contiguous).
    fn stride(&self, axis: usize) -> usize {
        self.resolution[axis + 1..].iter().product()
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|a| (idx / self.stride(a)) % self.resolution[a])
            .collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().enumerate().map(|(a, &j)| j * self.stride(a)).sum()
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(a, &j)| self.bounds[a].0 + (j as f64 + 0.5) * self.spacing(a))
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(&self.bounds)
            .all(|(&x, &(lo, hi))| x >= lo - DOMAIN_EPS && x <= hi + DOMAIN_EPS)
    }

    /// True when no index along any axis is the first or last.
    pub fn is_interior(&self, idx: usize) -> bool {
        self.multi_index(idx)
            .iter()
            .zip(&self.resolution)
            .all(|(&j, &m)| j > 0 && j + 1 < m)
    }

    fn corners(&self) -> Vec<Vec<f64>> {
        (0..1usize << self.dim())
            .map(|bits| {
                (0..self.dim())
                    .map(|a| if bits & (1 << a) == 0 { self.bounds[a].0 } else { self.bounds[a].1 })
                    .collect()
            })
            .collect()
    }
}

impl Carrier for GridDomain {
    fn sample_weights(&self) -> Vec<f64> {
        vec![self.cell_volume(); self.len()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFunction { index, value });
        }
        Ok(Self { samples })
    }

    pub fn from_fn(domain: &GridDomain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new((0..domain.len()).map(|i| f(&domain.center(i))).collect())
    }

    pub fn zeros(domain: &GridDomain) -> Self {
        Self {
            samples: vec![0.0; domain.len()],
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check(&self, domain: &GridDomain) -> Result<()> {
        if self.samples.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "function has {} samples but the grid has {} cells",
                self.samples.len(),
                domain.len()
            )));
        }
        Ok(())
    }
}

/// The closed-form test functions available by name in scenarios. `x_i` are
/// cell-center coordinates, `c_i` the box center and `L_i` the side lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `0`
    Zero,
    /// `Σ x_i`
    Linear,
    /// `Σ x_i²`
    Quadratic,
    /// `Π x_i`
    Product,
    /// `Π max(0, 1 - 2|x_i - c_i|/L_i)`
    Hat,
    /// `Π b(2(x_i - c_i)/L_i)` with `b(s) = exp(1 - 1/(1 - s²))` on `|s| < 1`
    Bump,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Zero,
        Builtin::Linear,
        Builtin::Quadratic,
        Builtin::Product,
        Builtin::Hat,
        Builtin::Bump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Zero => "zero",
            Builtin::Linear => "linear",
            Builtin::Quadratic => "quadratic",
            Builtin::Product => "product",
            Builtin::Hat => "hat",
            Builtin::Bump => "bump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn eval(self, domain: &GridDomain, x: &[f64]) -> f64 {
        let scaled = |a: usize| {
            let (lo, hi) = domain.bounds()[a];
            2.0 * (x[a] - 0.5 * (lo + hi)) / (hi - lo)
        };
        let axes = 0..x.len();
        match self {
            Builtin::Zero => 0.0,
            Builtin::Linear => x.iter().sum(),
            Builtin::Quadratic => x.iter().map(|v| v * v).sum(),
            Builtin::Product => x.iter().product(),
            Builtin::Hat => axes.map(|a| (1.0 - scaled(a).abs()).max(0.0)).product(),
            Builtin::Bump => axes
                .map(|a| {
                    let s = scaled(a);
                    if s.abs() < 1.0 {
                        (1.0 - 1.0 / (1.0 - s * s)).exp()
                    } else {
                        0.0
                    }
                })
                .product(),
        }
    }

    pub fn sample(self, domain: &GridDomain) -> GridFunction {
        GridFunction::from_fn(domain, |x| self.eval(domain, x)).expect("builtins are finite")
    }
}

/// `T(x) = A x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let n = offset.len();
        if !(1..=2).contains(&n) || matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "affine map needs an n×n matrix and an n-vector with n in {{1, 2}}, got {}×? and {n}",
                matrix.len()
            )));
        }
        if matrix.iter().flatten().chain(&offset).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("affine map has non-finite entries".into()));
        }
        Ok(Self { matrix, offset })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(
            (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect(),
            vec![0.0; n],
        )
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    /// `M = max |A_{k,i}|`, the uniform bound on the partial derivatives.
    pub fn entry_bound(&self) -> f64 {
        self.matrix.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn det(&self) -> f64 {
        match self.dim() {
            1 => self.matrix[0][0],
            _ => self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0],
        }
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let det = self.det();
        if det.abs() < SINGULAR_DET {
            return Err(Error::SingularMatrix { det });
        }
        let inv: Vec<Vec<f64>> = match self.dim() {
            1 => vec![vec![1.0 / det]],
            _ => {
                let m = &self.matrix;
                vec![
                    vec![m[1][1] / det, -m[0][1] / det],
                    vec![-m[1][0] / det, m[0][0] / det],
                ]
            }
        };
        let offset = inv
            .iter()
            .map(|row| -row.iter().zip(&self.offset).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        AffineMap::new(inv, offset)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &AffineMap) -> Result<AffineMap> {
        if self.dim() != inner.dim() {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        let n = self.dim();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.matrix[i][k] * inner.matrix[k][j]).sum()).collect())
            .collect();
        let offset = self.apply(&inner.offset);
        AffineMap::new(matrix, offset)
    }

    /// Checks `T(Ω) ⊆ closure(Ω)` on the box corners.
    pub fn check_self_map(&self, domain: &GridDomain) -> Result<()> {
        check_dims(self, domain)?;
        for corner in domain.corners() {
            let image = self.apply(&corner);
            if !domain.contains(&image) {
                return Err(Error::MapEscapesDomain { point: image });
            }
        }
        Ok(())
    }
}

fn check_dims(map: &AffineMap, domain: &GridDomain) -> Result<()> {
    if map.dim() != domain.dim() {
        return Err(Error::InvalidArgument(format!(
            "map acts on R^{} but the grid is {}-dimensional",
            map.dim(),
            domain.dim()
        )));
    }
    Ok(())
}

/// `∂f/∂x_axis` by finite differences.
pub fn weak_derivative(f: &GridFunction, domain: &GridDomain, axis: usize) -> Result<GridFunction> {
    f.check(domain)?;
    if axis >= domain.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let m = domain.resolution()[axis];
    let h = domain.spacing(axis);
    let stride = domain.stride(axis);
    let s = &f.samples;
    let out = (0..domain.len())
        .map(|idx| {
            let j = (idx / stride) % m;
            let at = |k: usize| s[idx - j * stride + k * stride];
            if j == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if j == m - 1 {
                (3.0 * at(m - 1) - 4.0 * at(m - 2) + at(m - 3)) / (2.0 * h)
            } else {
                (at(j + 1) - at(j - 1)) / (2.0 * h)
            }
        })
        .collect();
    Ok(GridFunction { samples: out })
}

/// `‖f‖_φ + Σ_i ‖∂f/∂x_i‖_φ` with cell volumes as weights.
pub fn sobolev_norm(phi: &OrliczFunction, f: &GridFunction, domain: &GridDomain, tol: f64) -> Result<f64> {
    f.check(domain)?;
    let mut total = orlicz::luxemburg_norm(phi, f.samples(), domain, tol)?;
    for axis in 0..domain.dim() {
        let d = weak_derivative(f, domain, axis)?;
        total += orlicz::luxemburg_norm(phi, d.samples(), domain, tol)?;
    }
    Ok(total)
}

/// Multilinear interpolant of the cell-center samples at `point`. Points in
/// the half-cell collar next to the boundary use the nearest full stencil,
/// so the interpolant extends linearly there.
pub fn interpolate(f: &GridFunction, domain: &GridDomain, point: &[f64]) -> f64 {
    let n = domain.dim();
    let mut base = vec![0usize; n];
    let mut frac = vec![0.0f64; n];
    for a in 0..n {
        let m = domain.resolution()[a];
        let s = (point[a] - domain.bounds()[a].0) / domain.spacing(a) - 0.5;
        let j = (s.floor().max(0.0) as usize).min(m - 2);
        base[a] = j;
        frac[a] = s - j as f64;
    }
    let mut value = 0.0;
    let mut corner = vec![0usize; n];
    for bits in 0..1usize << n {
        let mut weight = 1.0;
        for a in 0..n {
            let up = bits & (1 << a) != 0;
            corner[a] = base[a] + usize::from(up);
            weight *= if up { frac[a] } else { 1.0 - frac[a] };
        }
        value += weight * f.samples[domain.flat_index(&corner)];
    }
    value
}

/// `(f ∘ T)` sampled at cell centers.
pub fn compose(f: &GridFunction, map: &AffineMap, domain: &GridDomain) -> Result<GridFunction> {
    f.check(domain)?;
    check_dims(map, domain)?;
    let samples = (0..domain.len())
        .map(|idx| {
            let y = map.apply(&domain.center(idx));
            if domain.contains(&y) {
                Ok(interpolate(f, domain, &y))
            } else {
                Err(Error::MapEscapesDomain { point: y })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridFunction { samples })
}

/// `f_T = |det A|^{-1} 1_{T(Ω)}` for Lebesgue measure.
pub fn affine_rn_derivative(map: &AffineMap, domain: &GridDomain) -> Result<GridFunction> {
    check_dims(map, domain)?;
    let inv = map.inverse()?;
    let density = 1.0 / map.det().abs();
    let samples = (0..domain.len())
        .map(|idx| {
            if domain.contains(&inv.apply(&domain.center(idx))) {
                density
            } else {
                0.0
            }
        })
        .collect();
    Ok(GridFunction { samples })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRuleReport {
    pub max_abs_residual: f64,
    pub grid_h: f64,
}

/// Largest interior mismatch between `∂_i(f∘T)` and
/// `Σ_k (∂_k f ∘ T) A_{k,i}` over all axes.
pub fn verify_chain_rule(f: &GridFunction, map: &AffineMap, domain: &GridDomain) -> Result<ChainRuleReport> {
    let composed = compose(f, map, domain)?;
    let grads = (0..domain.dim())
        .map(|k| compose(&weak_derivative(f, domain, k)?, map, domain))
        .collect::<Result<Vec<_>>>()?;
    let mut residual = 0.0f64;
    for i in 0..domain.dim() {
        let lhs = weak_derivative(&composed, domain, i)?;
        for idx in (0..domain.len()).filter(|&idx| domain.is_interior(idx)) {
            let rhs: f64 = (0..domain.dim()).map(|k| grads[k].samples[idx] * map.matrix[k][i]).sum();
            residual = residual.max((lhs.samples[idx] - rhs).abs());
        }
    }
    Ok(ChainRuleReport {
        max_abs_residual: residual,
        grid_h: domain.h(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    /// `(m, h, residual)` per resolution, coarse to fine.
    pub rows: Vec<(usize, f64, f64)>,
    /// `log2`-type slopes between consecutive rows.
    pub orders: Vec<f64>,
}

impl ConvergenceStudy {
    pub fn finest_residual(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.2)
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Exact when every residual is rounding noise; otherwise the slowest
    /// observed order must reach `min_order`.
    pub fn passes(&self, min_order: f64) -> bool {
        self.is_exact() || self.min_order() >= min_order
    }

    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|r| r.2 <= EXACT_RESIDUAL_FLOOR)
    }
}

/// Chain-rule residuals of `sampler(domain)` over the given resolutions.
pub fn chain_rule_convergence(
    sampler: impl Fn(&GridDomain) -> Result<GridFunction>,
    map: &AffineMap,
    domain: &GridDomain,
    resolutions: &[usize],
) -> Result<ConvergenceStudy> {
    let mut rows = Vec::with_capacity(resolutions.len());
    for &m in resolutions {
        let d = domain.with_resolution(m)?;
        let report = verify_chain_rule(&sampler(&d)?, map, &d)?;
        rows.push((m, report.grid_h, report.max_abs_residual));
    }
    let orders = rows
        .windows(2)
        .map(|w| (w[0].2 / w[1].2).ln() / (w[0].1 / w[1].1).ln())
        .collect();
    Ok(ConvergenceStudy { rows, orders })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `‖C_T f‖_{1,φ}`
    pub lhs: f64,
    /// `‖f_T‖_∞ (1 + nM) ‖f‖_{1,φ}`
    pub rhs: f64,
    pub rn_sup: f64,
    pub entry_bound: f64,
    /// Discretization allowance added to `rhs`: one grid spacing.
    pub slack: f64,
    pub holds: bool,
}

/// Compares both sides of the boundedness estimate for `C_T` on the grid.
pub fn verify_boundedness(
    phi: &OrliczFunction,
    f: &GridFunction,
    map: &AffineMap,
    domain: &GridDomain,
) -> Result<BoundReport> {
    let tol = orlicz::DEFAULT_TOL;
    let rn_sup = affine_rn_derivative(map, domain)?.max_abs();
    let entry_bound = map.entry_bound();
    let lhs = sobolev_norm(phi, &compose(f, map, domain)?, domain, tol)?;
    let rhs = rn_sup * (1.0 + domain.dim() as f64 * entry_bound) * sobolev_norm(phi, f, domain, tol)?;
    let slack = domain.h();
    Ok(BoundReport {
        lhs,
        rhs,
        rn_sup,
        entry_bound,
        slack,
        holds: lhs <= rhs * (1.0 + 1e-6) + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingReport {
    /// Largest `|∂_i f|` outside the mask and its band.
    pub max_outside: f64,
    /// Largest `|∂_i f|` on band cells, reported separately.
    pub max_in_band: f64,
    pub boundary_band_width: usize,
}

/// Checks that derivatives of a function supported in `mask` vanish away from
/// it. Band cells are the unmasked cells whose difference stencil, along some
/// axis, reads a masked cell; for interior cells that is the one-cell ring
/// around the mask.
pub fn verify_kernel_derivative_vanishing(
    f: &GridFunction,
    mask: &[bool],
    domain: &GridDomain,
) -> Result<VanishingReport> {
    f.check(domain)?;
    if mask.len() != domain.len() {
        return Err(Error::InvalidArgument(format!(
            "mask has {} cells but the grid has {}",
            mask.len(),
            domain.len()
        )));
    }
    if let Some(idx) = (0..domain.len()).find(|&i| !mask[i] && f.samples[i] != 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "function is {} at unmasked cell {idx}",
            f.samples[idx]
        )));
    }
    let derivatives = (0..domain.dim())
        .map(|a| weak_derivative(f, domain, a))
        .collect::<Result<Vec<_>>>()?;
    let mut max_outside = 0.0f64;
    let mut max_in_band = 0.0f64;
    for idx in (0..domain.len()).filter(|&i| !mask[i]) {
        let value = derivatives.iter().fold(0.0f64, |m, d| m.max(d.samples[idx].abs()));
        if stencil_touches_mask(domain, mask, idx) {
            max_in_band = max_in_band.max(value);
        } else {
            max_outside = max_outside.max(value);
        }
    }
    Ok(VanishingReport {
        max_outside,
        max_in_band,
        boundary_band_width: 1,
    })
}

fn stencil_touches_mask(domain: &GridDomain, mask: &[bool], idx: usize) -> bool {
    let multi = domain.multi_index(idx);
    (0..domain.dim()).any(|a| {
        let m = domain.resolution()[a];
        let j = multi[a];
        let reads: Vec<usize> = if j == 0 {
            vec![1, 2]
        } else if j == m - 1 {
            vec![m - 2, m - 3]
        } else {
            vec![j - 1, j + 1]
        };
        reads.into_iter().any(|k| {
            let mut other = multi.clone();
            other[a] = k;
            mask[domain.flat_index(&other)]
        })
    })
}
