//! The intrinsic square function.
//!
//! `A_α(f)(y, t) = sup_{φ ∈ C_α} |f * φ_t(y)|` is evaluated by linear
//! programming over a discretized class, and
//! `S_α(f)(x)² = ∫∫_{|x−y|<t} A_α(f)(y, t)² dy dt / t^{n+1}` by a quadrature
//! over grid nodes `y` and a geometric ladder of scales `t`.
//!
//! The test function is taken piecewise constant on the cells of the class
//! lattice, so the pairing is
//! `f * φ_t(y) = Σ_i φ_i ∫_{cell_i} f(y − t z) dz`. The cell integrals are
//! computed exactly for the multilinear interpolant of `f`; when `t` is large
//! a cell covers many grid nodes and point sampling would alias.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::exec::{Executor, Sequential};
use crate::grid::{
    ball_dilate, integrate, l2_aggregate, restrict, Ball, Extension, FunctionFamily, Grid,
    GridFunction, Point, Region,
};
use crate::lipopt::{HoelderClassSpec, PairingMaximizer};
use crate::math;

/// Relative shrink of the cone radius. Node distances often tie `t` exactly
/// (`t_min = h`); shrinking excludes ties consistently instead of leaving
/// them to rounding.
const CONE_SHRINK: f64 = 1.0 - 1e-9;

fn cone_section(x: &Point, t: f64) -> Result<Region> {
    Ok(Region::Ball(Ball::new(*x, t * CONE_SHRINK)?))
}

/// Default ladder ratio of the scale quadrature.
pub const DEFAULT_RHO: f64 = 1.25;

/// Geometric scale ladder `t_min·ρ^k ≤ t_max` with midpoint-in-`log t` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConeQuadrature {
    t_min: f64,
    t_max: f64,
    rho: f64,
}

impl ConeQuadrature {
    pub fn new(t_min: f64, t_max: f64, rho: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return Err(invalid(format!(
                "cone needs 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(invalid(format!(
                "cone ladder ratio must exceed 1, got {rho}"
            )));
        }
        Ok(Self { t_min, t_max, rho })
    }

    /// `t_min = h`, `t_max = 4 × window radius`, `ρ = 1.25`.
    pub fn for_grid(grid: &Grid) -> Self {
        Self {
            t_min: grid.spacing(),
            t_max: 4.0 * grid.window_radius(),
            rho: DEFAULT_RHO,
        }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Same window of scales, `ρ − 1` and `t_min` halved.
    pub fn refined(&self) -> Self {
        Self {
            t_min: 0.5 * self.t_min,
            t_max: self.t_max,
            rho: 1.0 + 0.5 * (self.rho - 1.0),
        }
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let t = self.t_min * math::powf(self.rho, k as f64);
            if t > self.t_max * (1.0 + 1e-12) {
                break;
            }
            out.push(t);
            k += 1;
        }
        out
    }

    /// `h^dim · Δt / t^{dim+1}` with `Δt = t(√ρ − 1/√ρ)`.
    pub fn cell_weight(&self, t: f64, h: f64, dim: usize) -> f64 {
        let s = math::sqrt(self.rho);
        let dt = t * (s - 1.0 / s);
        let hd = if dim == 1 { h } else { h * h };
        hd * dt / math::powf(t, (dim + 1) as f64)
    }
}

/// Everything needed to evaluate `S_α` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicParams {
    class: HoelderClassSpec,
    cone: ConeQuadrature,
    extension: Extension,
}

impl IntrinsicParams {
    pub fn new(class: HoelderClassSpec, cone: ConeQuadrature) -> Self {
        Self {
            class,
            cone,
            extension: Extension::Zero,
        }
    }

    /// Default class resolution (10 in 1-D, 4 in 2-D) and default cone.
    pub fn for_grid(grid: &Grid, alpha: f64) -> Result<Self> {
        let class = HoelderClassSpec::new(alpha, grid.dim(), default_class_resolution(grid.dim()))?;
        Ok(Self::new(class, ConeQuadrature::for_grid(grid)))
    }

    pub fn with_extension(mut self, extension: Extension) -> Self {
        self.extension = extension;
        self
    }

    pub fn with_cone(mut self, cone: ConeQuadrature) -> Self {
        self.cone = cone;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.class.alpha()
    }

    pub fn class_spec(&self) -> &HoelderClassSpec {
        &self.class
    }

    pub fn cone(&self) -> &ConeQuadrature {
        &self.cone
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }
}

pub fn default_class_resolution(dim: usize) -> usize {
    if dim == 1 {
        10
    } else {
        4
    }
}

/// Exact box integrals of the multilinear interpolant of a grid function.
struct BoxIntegrator<'a> {
    f: &'a GridFunction,
    ext: Extension,
    /// Per line `j` along axis 0: `∫_{x_0}^{x_i}` of that line's interpolant.
    prefix: Vec<f64>,
}

impl<'a> BoxIntegrator<'a> {
    fn new(f: &'a GridFunction, ext: Extension) -> Self {
        let g = f.grid();
        let nx = g.counts()[0];
        let ny = if g.dim() == 2 { g.counts()[1] } else { 1 };
        let h = g.spacing();
        let v = f.values();
        let mut prefix = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 1..nx {
                let a = v[g.flat_index(i - 1, j)];
                let b = v[g.flat_index(i, j)];
                prefix[j * nx + i] = prefix[j * nx + i - 1] + 0.5 * h * (a + b);
            }
        }
        Self { f, ext, prefix }
    }

    /// `∫_{x_0}^{x}` of line `j`, extended according to `ext`.
    fn line_cumulative(&self, j: usize, x: f64) -> f64 {
        let g = self.f.grid();
        let nx = g.counts()[0];
        let h = g.spacing();
        let v = |i: usize| self.f.values()[g.flat_index(i, j)];
        let s = (x - g.lower(0)) / h;
        let last = (nx - 1) as f64;
        if s <= 0.0 {
            return match self.ext {
                Extension::Zero => 0.0,
                Extension::Clamp => s * h * v(0),
            };
        }
        if s >= last {
            let full = self.prefix[j * nx + nx - 1];
            return match self.ext {
                Extension::Zero => full,
                Extension::Clamp => full + (s - last) * h * v(nx - 1),
            };
        }
        let i = (math::floor(s) as usize).min(nx - 2);
        let r = s - i as f64;
        let (a, b) = (v(i), v(i + 1));
        self.prefix[j * nx + i] + h * r * (a + 0.5 * r * (b - a))
    }

    fn line_integral(&self, j: usize, lo: f64, hi: f64) -> f64 {
        self.line_cumulative(j, hi) - self.line_cumulative(j, lo)
    }

    /// Hat-function weights of `[lo, hi]` along axis 1.
    fn axis1_weights(&self, lo: f64, hi: f64, mut visit: impl FnMut(usize, f64)) {
        let g = self.f.grid();
        let n = g.counts()[1];
        let h = g.spacing();
        let last = (n - 1) as f64;
        let a = (lo - g.lower(1)) / h;
        let b = (hi - g.lower(1)) / h;
        if self.ext == Extension::Clamp {
            if a < 0.0 {
                visit(0, (b.min(0.0) - a) * h);
            }
            if b > last {
                visit(n - 1, (b - a.max(last)) * h);
            }
        }
        let a = a.max(0.0);
        let b = b.min(last);
        if !(a < b) {
            return;
        }
        let first = (math::floor(a) as usize).min(n - 2);
        let end = (math::ceil(b) as usize).min(n - 1);
        for cell in first..end {
            let p = a.max(cell as f64) - cell as f64;
            let q = b.min((cell + 1) as f64) - cell as f64;
            if q <= p {
                continue;
            }
            let sq = 0.5 * (q * q - p * p);
            visit(cell, h * ((q - p) - sq));
            visit(cell + 1, h * sq);
        }
    }

    /// Mean of the interpolant over the cube of half-width `half` at `center`.
    fn average(&self, center: &Point, half: f64) -> f64 {
        let (lo0, hi0) = (center.coord(0) - half, center.coord(0) + half);
        let side = 2.0 * half;
        if self.f.grid().dim() == 1 {
            return self.line_integral(0, lo0, hi0) / side;
        }
        let mut total = 0.0;
        self.axis1_weights(center.coord(1) - half, center.coord(1) + half, |j, w| {
            total += w * self.line_integral(j, lo0, hi0);
        });
        total / (side * side)
    }
}

/// Cached per-scale data of the cone quadrature on one grid.
#[derive(Debug, Clone)]
struct Ladder {
    t: Vec<f64>,
    weight: Vec<f64>,
}

/// Evaluates `A_α`, `S_α` and the square-function field on one grid.
pub struct Engine<'e> {
    params: IntrinsicParams,
    maximizer: PairingMaximizer,
    exec: &'e dyn Executor,
}

impl<'e> Engine<'e> {
    pub fn new(params: IntrinsicParams, exec: &'e dyn Executor) -> Result<Self> {
        let maximizer = PairingMaximizer::new(params.class_spec())?;
        Ok(Self {
            params,
            maximizer,
            exec,
        })
    }

    pub fn params(&self) -> &IntrinsicParams {
        &self.params
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.params.class.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.params.class.dim(),
                found: grid.dim(),
            });
        }
        if grid.counts().iter().any(|&n| n < 2) {
            return Err(invalid("square functions need at least 2 nodes per axis"));
        }
        Ok(())
    }

    fn ladder(&self, grid: &Grid) -> Ladder {
        let cone = &self.params.cone;
        let t = cone.t_nodes();
        let weight = t
            .iter()
            .map(|&t| cone.cell_weight(t, grid.spacing(), grid.dim()))
            .collect();
        Ladder { t, weight }
    }

    fn pairing_with(&self, box_int: &BoxIntegrator<'_>, y: &Point, t: f64) -> Vec<f64> {
        let spec = &self.params.class;
        let hu = spec.support_grid().spacing();
        let vol = spec.cell_volume();
        spec.nodes()
            .iter()
            .map(|u| vol * box_int.average(&y.add_scaled(-t, u), 0.5 * t * hu))
            .collect()
    }

    /// `c_i = ∫_{cell_i} f(y − t z) dz` over the class cells.
    pub fn pairing_vector(&self, f: &GridFunction, y: &Point, t: f64) -> Result<Vec<f64>> {
        self.check_point(f.grid(), y, t)?;
        Ok(self.pairing_with(&BoxIntegrator::new(f, self.params.extension), y, t))
    }

    fn check_point(&self, grid: &Grid, y: &Point, t: f64) -> Result<()> {
        self.check_grid(grid)?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("scale t must be positive, got {t}")));
        }
        if y.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: y.dim(),
            });
        }
        if !grid.window_contains(y) {
            return Err(invalid("A_alpha is evaluated at points of the grid window"));
        }
        Ok(())
    }

    pub fn a_alpha(&self, f: &GridFunction, y: &Point, t: f64) -> Result<f64> {
        let c = self.pairing_vector(f, y, t)?;
        self.maximizer.maximize_abs(&c)
    }

    /// `Σ_j A_α(f_j)(y, t)²` for a list of `(y, t)` cells, via the executor.
    fn cell_sums(
        &self,
        integrators: &[BoxIntegrator<'_>],
        cells: &[(usize, f64)],
        grid: &Grid,
    ) -> Result<Vec<f64>> {
        let out = self.exec.map(cells.len(), &|k| {
            let (node, t) = cells[k];
            let y = grid.node(node);
            let mut sum = 0.0;
            for bi in integrators {
                let c = self.pairing_with(bi, &y, t);
                match self.maximizer.maximize_abs(&c) {
                    Ok(a) => sum += a * a,
                    Err(_) => return f64::NAN,
                }
            }
            sum
        });
        if out.iter().any(|v| v.is_nan()) {
            return Err(Error::Solver("failed on a cone cell".into()));
        }
        Ok(out)
    }

    /// `(Σ_j S_α(f_j)(x)²)^{1/2}`.
    pub fn s_alpha_family(&self, fam: &FunctionFamily, x: &Point) -> Result<f64> {
        let grid = *fam.grid();
        self.check_grid(&grid)?;
        if x.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: x.dim(),
            });
        }
        let ladder = self.ladder(&grid);
        let mut cells = Vec::new();
        let mut level = Vec::new();
        for (l, &t) in ladder.t.iter().enumerate() {
            grid.for_each_node_in(&cone_section(x, t)?, |k, _| {
                cells.push((k, t));
                level.push(l);
            });
        }
        let integrators = self.integrators(fam);
        let sums = self.cell_sums(&integrators, &cells, &grid)?;
        let mut total = 0.0;
        for (s, &l) in sums.iter().zip(&level) {
            total += s * ladder.weight[l];
        }
        Ok(math::sqrt(total))
    }

    pub fn s_alpha(&self, f: &GridFunction, x: &Point) -> Result<f64> {
        self.s_alpha_family(&FunctionFamily::single(f.clone()), x)
    }

    fn integrators<'f>(&self, fam: &'f FunctionFamily) -> Vec<BoxIntegrator<'f>> {
        fam.members()
            .iter()
            .filter(|m| !m.is_zero())
            .map(|m| BoxIntegrator::new(m, self.params.extension))
            .collect()
    }

    /// `Σ_j A_α(f_j)(y, t)² · weight(t)` over every grid node `y` and scale `t`.
    pub fn cone_table(&self, fam: &FunctionFamily) -> Result<ConeTable> {
        self.build_table(fam, None)
    }

    /// Like [`Engine::cone_table`], but only the cells that lie in the cone of
    /// some point of `near` are evaluated; the table is exact on `near` only.
    pub fn cone_table_near(&self, fam: &FunctionFamily, near: &Ball) -> Result<ConeTable> {
        self.build_table(fam, Some(near))
    }

    fn build_table(&self, fam: &FunctionFamily, near: Option<&Ball>) -> Result<ConeTable> {
        let grid = *fam.grid();
        self.check_grid(&grid)?;
        let ladder = self.ladder(&grid);
        let n = grid.len();
        let mut cells = Vec::new();
        for (l, &t) in ladder.t.iter().enumerate() {
            for k in 0..n {
                let keep = match near {
                    Some(b) => grid.node(k).distance(&b.center()) < t + b.radius(),
                    None => true,
                };
                if keep {
                    cells.push((l, k));
                }
            }
        }
        let integrators = self.integrators(fam);
        let scaled: Vec<(usize, f64)> = cells.iter().map(|&(l, k)| (k, ladder.t[l])).collect();
        let sums = self.cell_sums(&integrators, &scaled, &grid)?;
        let mut values = vec![0.0; ladder.t.len() * n];
        for (&(l, k), s) in cells.iter().zip(&sums) {
            values[l * n + k] = s * ladder.weight[l];
        }
        Ok(ConeTable {
            grid,
            t: ladder.t,
            values,
        })
    }

    /// `x ↦ (Σ_j S_α(f_j)(x)²)^{1/2}` at every grid node.
    pub fn field(&self, fam: &FunctionFamily) -> Result<GridFunction> {
        self.cone_table(fam)?.field()
    }
}

/// Weighted squared `A_α` values on all cone cells of a grid.
#[derive(Debug, Clone)]
pub struct ConeTable {
    grid: Grid,
    t: Vec<f64>,
    /// Scale-major: `values[l · len + k]` for scale `l` and node `k`.
    values: Vec<f64>,
}

impl ConeTable {
    pub fn scales(&self) -> &[f64] {
        &self.t
    }

    /// The square function at `x`, summing scale by scale in node order.
    pub fn at(&self, x: &Point) -> Result<f64> {
        let n = self.grid.len();
        let mut total = 0.0;
        for (l, &t) in self.t.iter().enumerate() {
            let row = &self.values[l * n..(l + 1) * n];
            self.grid
                .for_each_node_in(&cone_section(x, t)?, |k, _| total += row[k]);
        }
        Ok(math::sqrt(total))
    }

    pub fn field(&self) -> Result<GridFunction> {
        let values = self
            .grid
            .nodes()
            .map(|x| self.at(&x))
            .collect::<Result<Vec<f64>>>()?;
        GridFunction::new(self.grid, values)
    }
}

/// `S_α(f)(x)` with a sequential engine.
pub fn s_alpha(f: &GridFunction, x: &Point, params: &IntrinsicParams) -> Result<f64> {
    Engine::new(params.clone(), &Sequential)?.s_alpha(f, x)
}

/// `(Σ_j S_α(f_j)(x)²)^{1/2}` with a sequential engine.
pub fn s_alpha_family(fam: &FunctionFamily, x: &Point, params: &IntrinsicParams) -> Result<f64> {
    Engine::new(params.clone(), &Sequential)?.s_alpha_family(fam, x)
}

/// `A_α(f)(y, t)` with a sequential engine.
pub fn a_alpha(f: &GridFunction, y: &Point, t: f64, params: &IntrinsicParams) -> Result<f64> {
    Engine::new(params.clone(), &Sequential)?.a_alpha(f, y, t)
}

/// Upper bound for the part of `S_α(f)(x)` coming from scales above `t_max`:
/// `‖f‖₁ (ω_n t_max^{−2n} / 2n)^{1/2}`, using `|A_α(f)(y,t)| ≤ t^{−n}‖f‖₁`.
pub fn cone_tail_bound(fam: &FunctionFamily, cone: &ConeQuadrature) -> Result<f64> {
    let agg = l2_aggregate(fam);
    let l1 = integrate(&agg.abs(), &Region::WholeGrid)?;
    let n = fam.grid().dim() as f64;
    let omega = if fam.grid().dim() == 1 {
        2.0
    } else {
        core::f64::consts::PI
    };
    Ok(l1 * math::sqrt(omega * math::powf(cone.t_max(), -2.0 * n) / (2.0 * n)))
}

/// `f_j = f_j·χ_{2B} + f_j·(1 − χ_{2B})`, nodewise.
pub fn split_local_far(fam: &FunctionFamily, b: &Ball) -> Result<(FunctionFamily, FunctionFamily)> {
    let two_b = Region::Ball(ball_dilate(b, 2.0)?);
    let mut local = Vec::with_capacity(fam.len());
    let mut far = Vec::with_capacity(fam.len());
    for f in fam.members() {
        let l = restrict(f, &two_b)?;
        far.push(f.sub(&l)?);
        local.push(l);
    }
    Ok((FunctionFamily::new(local)?, FunctionFamily::new(far)?))
}

/// Smallest `ℓ ≥ 1` with `2^{ℓ+1}B` covering the grid window.
pub fn default_ell_max(grid: &Grid, b: &Ball) -> u32 {
    let mut reach = 0.0f64;
    let corners: &[(usize, usize)] = if grid.dim() == 1 {
        &[(0, 0), (1, 0)]
    } else {
        &[(0, 0), (0, 1), (1, 0), (1, 1)]
    };
    for &(a, c) in corners {
        let x = if a == 0 { grid.lower(0) } else { grid.upper(0) };
        let p = if grid.dim() == 1 {
            Point::d1(x)
        } else {
            Point::d2(x, if c == 0 { grid.lower(1) } else { grid.upper(1) })
        };
        reach = reach.max(p.distance(&b.center()));
    }
    let mut ell = 1;
    while libm::ldexp(b.radius(), ell as i32 + 1) <= reach {
        ell += 1;
    }
    ell
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Majorant {
    pub value: f64,
    /// Shell terms for `ℓ = 1, …, ell_max`.
    pub terms: Vec<f64>,
    /// Set when some `2^{ℓ+1}B` leaves the window (integral truncated to it).
    pub escaped: bool,
}

/// `Σ_{ℓ=1}^{ell_max} |2^{ℓ+1}B|^{−1} ∫_{2^{ℓ+1}B} (Σ_j |f_j|²)^{1/2}`.
///
/// `|2^{ℓ+1}B|` is the node measure on the unbounded lattice, so a ball
/// sticking out of the window keeps its full size in the denominator.
pub fn far_field_majorant(fam: &FunctionFamily, b: &Ball, ell_max: u32) -> Result<Majorant> {
    if ell_max < 1 {
        return Err(invalid("ell_max must be at least 1"));
    }
    let grid = fam.grid();
    let agg = l2_aggregate(fam);
    let mut terms = Vec::with_capacity(ell_max as usize);
    let mut escaped = false;
    for ell in 1..=ell_max {
        let big = ball_dilate(b, libm::ldexp(1.0, ell as i32 + 1))?;
        escaped |= !grid.window_contains_ball(&big);
        let m = grid.lattice_measure(&big);
        let integral = integrate(&agg, &Region::Ball(big))?;
        terms.push(if m > 0.0 { integral / m } else { 0.0 });
    }
    Ok(Majorant {
        value: terms.iter().sum(),
        terms,
        escaped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: f64, hi: f64, h: f64) -> Grid {
        let n = libm::round((hi - lo) / h) as usize + 1;
        Grid::new(Point::d1(lo), h, &[n]).unwrap()
    }

    fn dense_average(f: &GridFunction, ext: Extension, lo: f64, hi: f64) -> f64 {
        let n = 200_000;
        let w = (hi - lo) / n as f64;
        (0..n)
            .map(|k| f.interpolate(&Point::d1(lo + (k as f64 + 0.5) * w), ext))
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn box_averages_match_dense_sampling_1d() {
        let g = line(-1.0, 1.0, 0.1);
        let f = GridFunction::from_fn(g, |p| (3.0 * p.coord(0)).sin() + 0.5).unwrap();
        for ext in [Extension::Zero, Extension::Clamp] {
            let bi = BoxIntegrator::new(&f, ext);
            for &(c, r) in &[
                (0.03, 0.01),
                (0.3, 0.37),
                (-0.9, 0.4),
                (0.8, 1.5),
                (2.0, 0.3),
            ] {
                let got = bi.average(&Point::d1(c), r);
                let want = dense_average(&f, ext, c - r, c + r);
                // the zero extension jumps at the window edge, which costs the
                // sampled oracle O(sample width)
                let tol = if ext == Extension::Zero { 1e-5 } else { 1e-8 };
                assert!((got - want).abs() < tol, "{ext:?} {c} {r}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn box_averages_match_dense_sampling_2d() {
        let g = Grid::centered(2, 1.0, 0.25).unwrap();
        let f = GridFunction::from_fn(g, |p| p.coord(0) * p.coord(1) + (2.0 * p.coord(1)).cos())
            .unwrap();
        for ext in [Extension::Zero, Extension::Clamp] {
            let bi = BoxIntegrator::new(&f, ext);
            for &(cx, cy, r) in &[(0.1, 0.2, 0.05), (-0.5, 0.7, 0.6), (0.9, -0.9, 1.3)] {
                let got = bi.average(&Point::d2(cx, cy), r);
                let n = 600;
                let w = 2.0 * r / n as f64;
                let mut s = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let p =
                            Point::d2(cx - r + (a as f64 + 0.5) * w, cy - r + (b as f64 + 0.5) * w);
                        s += f.interpolate(&p, ext);
                    }
                }
                let want = s / (n * n) as f64;
                let tol = if ext == Extension::Zero { 1e-4 } else { 1e-6 };
                assert!((got - want).abs() < tol, "{ext:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn clamped_constants_are_annihilated() {
        let g = line(-1.0, 1.0, 0.05);
        let params = IntrinsicParams::for_grid(&g, 0.7)
            .unwrap()
            .with_extension(Extension::Clamp);
        let f = GridFunction::constant(g, 2.0).unwrap();
        for x in [-0.9, 0.0, 0.45] {
            assert!(s_alpha(&f, &Point::d1(x), &params).unwrap() <= 2e-8);
        }
    }

    #[test]
    fn zero_function_vanishes() {
        let g = line(-1.0, 1.0, 0.1);
        let params = IntrinsicParams::for_grid(&g, 0.5).unwrap();
        let f = GridFunction::zeros(g);
        assert_eq!(s_alpha(&f, &Point::d1(0.2), &params).unwrap(), 0.0);
        assert_eq!(a_alpha(&f, &Point::d1(0.2), 0.3, &params).unwrap(), 0.0);
        assert!(a_alpha(&f, &Point::d1(0.2), 0.0, &params).is_err());
        assert!(a_alpha(&f, &Point::d1(3.0), 1.0, &params).is_err());
    }

    #[test]
    fn table_and_direct_evaluation_agree() {
        let g = line(-1.0, 1.0, 0.1);
        let params = IntrinsicParams::for_grid(&g, 1.0).unwrap();
        let f =
            GridFunction::from_fn(g, |p| (1.0 - 4.0 * p.coord(0) * p.coord(0)).max(0.0)).unwrap();
        let eng = Engine::new(params, &Sequential).unwrap();
        let fam = FunctionFamily::single(f.clone());
        let field = eng.field(&fam).unwrap();
        for k in [0, 7, 10, 20] {
            let x = g.node(k);
            assert_eq!(field.values()[k], eng.s_alpha(&f, &x).unwrap());
        }
        let b = Ball::new(Point::d1(0.3), 0.25).unwrap();
        let near = eng.cone_table_near(&fam, &b).unwrap();
        for k in g.nodes_in(&Region::Ball(b)) {
            assert_eq!(near.at(&g.node(k)).unwrap(), field.values()[k]);
        }
    }

    #[test]
    fn cone_ladder() {
        let c = ConeQuadrature::new(0.05, 16.0, 1.25).unwrap();
        let t = c.t_nodes();
        assert_eq!(t[0], 0.05);
        assert!(*t.last().unwrap() <= 16.0 * (1.0 + 1e-12));
        assert!(t.last().unwrap() * 1.25 > 16.0);
        assert!(ConeQuadrature::new(0.0, 1.0, 1.25).is_err());
        assert!(ConeQuadrature::new(1.0, 0.5, 1.25).is_err());
        assert!(ConeQuadrature::new(0.1, 1.0, 1.0).is_err());
        let w = c.cell_weight(1.0, 0.1, 1);
        assert!((w - 0.1 * (1.25f64.sqrt() - 1.0 / 1.25f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn split_examples() {
        let g = line(-4.0, 4.0, 0.1);
        let b = Ball::new(Point::d1(0.0), 0.5).unwrap();
        let inside = GridFunction::from_fn(g, |p| if p.norm() < 0.8 { 1.0 } else { 0.0 }).unwrap();
        let outside = GridFunction::from_fn(g, |p| if p.norm() > 1.5 { 2.0 } else { 0.0 }).unwrap();
        let fam = FunctionFamily::new(vec![inside, outside]).unwrap();
        let (l, f) = split_local_far(&fam, &b).unwrap();
        assert!(f.members()[0].is_zero());
        assert!(l.members()[1].is_zero());
        for j in 0..2 {
            assert_eq!(
                l.members()[j].add(&f.members()[j]).unwrap(),
                fam.members()[j]
            );
        }
    }

    #[test]
    fn majorant_examples() {
        let g = line(-8.0, 8.0, 0.05);
        let b = Ball::new(Point::d1(0.0), 0.5).unwrap();
        let zero = FunctionFamily::single(GridFunction::zeros(g));
        assert_eq!(far_field_majorant(&zero, &b, 3).unwrap().value, 0.0);

        // indicator of 4B \ 2B; its ℓ = 1 term is |4B \ 2B| / |4B|
        let shell = Region::annulus(b, 1).unwrap();
        let f = GridFunction::from_fn(g, |p| if shell.contains(p) { 1.0 } else { 0.0 }).unwrap();
        let fam = FunctionFamily::single(f);
        let m = far_field_majorant(&fam, &b, 3).unwrap();
        let n_shell = g.node_count_in(&shell) as f64;
        let n_4b = g.node_count_in(&Region::Ball(b.dilate(4.0).unwrap())) as f64;
        assert!((m.terms[0] - n_shell / n_4b).abs() < 1e-12);
        assert!(m.value >= m.terms[0]);
        assert!(!m.escaped);
        let scaled = far_field_majorant(&fam.scaled(4.0), &b, 3).unwrap();
        assert_eq!(scaled.value, 4.0 * m.value);
        assert!(far_field_majorant(&fam, &b, 0).is_err());
        assert_eq!(default_ell_max(&g, &b), 4);
    }
}
