//! Uniform grids, sampled functions, balls and node quadrature.
//!
//! All integrals are node sums: a node counts for a region iff the node lies
//! in the region, and contributes `value · h^dim`. Regions are never clipped
//! to sub-cell accuracy, which makes every region partition (ball, dyadic
//! annulus, complement) exactly additive at the level of node sets.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{invalid, Error, Result};
use crate::math;

/// A point of `ℝ¹` or `ℝ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Point {
    coords: [f64; 2],
    dim: usize,
}

impl Point {
    pub const fn d1(x: f64) -> Self {
        Self {
            coords: [x, 0.0],
            dim: 1,
        }
    }

    pub const fn d2(x: f64, y: f64) -> Self {
        Self {
            coords: [x, y],
            dim: 2,
        }
    }

    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point coordinates must be finite"));
        }
        match *coords {
            [x] => Ok(Self::d1(x)),
            [x, y] => Ok(Self::d2(x, y)),
            _ => Err(invalid(format!(
                "points must have 1 or 2 coordinates, got {}",
                coords.len()
            ))),
        }
    }

    pub fn origin(dim: usize) -> Self {
        if dim == 1 {
            Self::d1(0.0)
        } else {
            Self::d2(0.0, 0.0)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        if self.dim == 1 {
            math::abs(self.coords[0])
        } else {
            math::hypot(self.coords[0], self.coords[1])
        }
    }

    /// Euclidean distance; both points must have the same dimension.
    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        if self.dim == 1 {
            math::abs(self.coords[0] - other.coords[0])
        } else {
            math::hypot(
                self.coords[0] - other.coords[0],
                self.coords[1] - other.coords[1],
            )
        }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &Point) -> Point {
        Point {
            coords: [
                self.coords[0] + s * other.coords[0],
                self.coords[1] + s * other.coords[1],
            ],
            dim: self.dim,
        }
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point {
            coords: [s * self.coords[0], s * self.coords[1]],
            dim: self.dim,
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim,
            });
        }
        Ok(())
    }
}

/// Axis-aligned uniform grid in one or two dimensions.
///
/// Nodes are `origin + h·(i, j)`; the flat index is row-major, so the first
/// axis varies slowest.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Grid {
    dim: usize,
    origin: Point,
    spacing: f64,
    counts: [usize; 2],
}

impl Grid {
    pub fn new(origin: Point, spacing: f64, counts: &[usize]) -> Result<Self> {
        let dim = origin.dim();
        if counts.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: counts.len(),
            });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        if counts.iter().any(|&c| c < 2) {
            return Err(invalid("grids need at least 2 nodes per axis"));
        }
        let mut c = [1, 1];
        c[..dim].copy_from_slice(counts);
        Ok(Self {
            dim,
            origin,
            spacing,
            counts: c,
        })
    }

    /// The window `[-half_width, half_width]^dim` with `round(2·half_width/h) + 1`
    /// nodes per axis.
    pub fn centered(dim: usize, half_width: f64, spacing: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(invalid("half width must be positive"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        let n = libm::round(2.0 * half_width / spacing) as usize + 1;
        match dim {
            1 => Self::new(Point::d1(-half_width), spacing, &[n]),
            2 => Self::new(Point::d2(-half_width, -half_width), spacing, &[n, n]),
            _ => Err(invalid(format!("dimension must be 1 or 2, got {dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dim]
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^dim`, the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.spacing
        } else {
            self.spacing * self.spacing
        }
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.origin.coord(axis)
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.origin.coord(axis) + (self.counts[axis] - 1) as f64 * self.spacing
    }

    /// Center of the window box.
    pub fn center(&self) -> Point {
        let mut c = self.origin;
        for axis in 0..self.dim {
            c.coords[axis] = 0.5 * (self.lower(axis) + self.upper(axis));
        }
        c
    }

    /// Half the diagonal of the window box (half the length in 1-D).
    pub fn window_radius(&self) -> f64 {
        let mut s = 0.0;
        for axis in 0..self.dim {
            let half = 0.5 * (self.upper(axis) - self.lower(axis));
            s += half * half;
        }
        math::sqrt(s)
    }

    pub fn node(&self, index: usize) -> Point {
        let [i, j] = self.multi_index(index);
        let mut p = self.origin;
        p.coords[0] += i as f64 * self.spacing;
        if self.dim == 2 {
            p.coords[1] += j as f64 * self.spacing;
        }
        p
    }

    pub fn multi_index(&self, index: usize) -> [usize; 2] {
        if self.dim == 1 {
            [index, 0]
        } else {
            [index / self.counts[1], index % self.counts[1]]
        }
    }

    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        if self.dim == 1 {
            i
        } else {
            i * self.counts[1] + j
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    /// True iff `p` lies in the closed window box.
    pub fn window_contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| p.coord(a) >= self.lower(a) && p.coord(a) <= self.upper(a))
    }

    /// True iff the closed ball lies inside the window box.
    pub fn window_contains_ball(&self, b: &Ball) -> bool {
        (0..self.dim).all(|a| {
            b.center.coord(a) - b.radius >= self.lower(a)
                && b.center.coord(a) + b.radius <= self.upper(a)
        })
    }

    /// Same window, half the spacing.
    pub fn refined(&self) -> Grid {
        let mut g = *self;
        g.spacing = 0.5 * self.spacing;
        for axis in 0..self.dim {
            g.counts[axis] = 2 * self.counts[axis] - 1;
        }
        g
    }

    /// Node indices along `axis` whose coordinate lies in `[lo, hi]`.
    fn axis_range(&self, axis: usize, lo: f64, hi: f64) -> Range<usize> {
        let o = self.lower(axis);
        let h = self.spacing;
        let first = math::ceil((lo - o) / h).max(0.0);
        let last = math::floor((hi - o) / h).min((self.counts[axis] - 1) as f64);
        if !(first <= last) {
            return 0..0;
        }
        // Guard against rounding in the division; membership is rechecked.
        let first = (first as usize).saturating_sub(1);
        let last = ((last as usize) + 1).min(self.counts[axis] - 1);
        first..last + 1
    }

    /// Calls `visit(index, node)` for every node in `region`, in index order.
    pub fn for_each_node_in(&self, region: &Region, mut visit: impl FnMut(usize, Point)) {
        match region.bounding_ball() {
            Some(outer) => {
                let r0 = self.axis_range(
                    0,
                    outer.center.coord(0) - outer.radius,
                    outer.center.coord(0) + outer.radius,
                );
                let r1 = if self.dim == 2 {
                    self.axis_range(
                        1,
                        outer.center.coord(1) - outer.radius,
                        outer.center.coord(1) + outer.radius,
                    )
                } else {
                    0..1
                };
                for i in r0 {
                    for j in r1.clone() {
                        let k = self.flat_index(i, j);
                        let p = self.node(k);
                        if region.contains(&p) {
                            visit(k, p);
                        }
                    }
                }
            }
            None => {
                for k in 0..self.len() {
                    let p = self.node(k);
                    if region.contains(&p) {
                        visit(k, p);
                    }
                }
            }
        }
    }

    pub fn nodes_in(&self, region: &Region) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_node_in(region, |k, _| out.push(k));
        out
    }

    pub fn node_count_in(&self, region: &Region) -> usize {
        let mut n = 0;
        self.for_each_node_in(region, |_, _| n += 1);
        n
    }

    /// Node measure of `ball` computed on the infinite extension of the grid
    /// lattice, i.e. without truncating the ball to the window.
    pub fn lattice_measure(&self, ball: &Ball) -> f64 {
        let h = self.spacing;
        let range = |axis: usize| -> (i64, i64) {
            let o = self.lower(axis);
            let lo = math::floor((ball.center.coord(axis) - ball.radius - o) / h) as i64 - 1;
            let hi = math::ceil((ball.center.coord(axis) + ball.radius - o) / h) as i64 + 1;
            (lo, hi)
        };
        let (a0, b0) = range(0);
        let mut count = 0usize;
        if self.dim == 1 {
            for i in a0..=b0 {
                let p = Point::d1(self.lower(0) + i as f64 * h);
                if ball.contains(&p) {
                    count += 1;
                }
            }
        } else {
            let (a1, b1) = range(1);
            for i in a0..=b0 {
                for j in a1..=b1 {
                    let p = Point::d2(self.lower(0) + i as f64 * h, self.lower(1) + j as f64 * h);
                    if ball.contains(&p) {
                        count += 1;
                    }
                }
            }
        }
        count as f64 * self.cell_volume()
    }
}

/// Open ball `{x : |x − center| < radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Strict membership; `p` must have the ball's dimension.
    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        self.center.distance(p) < self.radius
    }

    /// The concentric ball with `factor` times the radius.
    pub fn dilate(&self, factor: f64) -> Result<Ball> {
        ball_dilate(self, factor)
    }
}

/// `λB`: same center, radius scaled by `factor`.
pub fn ball_dilate(b: &Ball, factor: f64) -> Result<Ball> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(invalid(format!(
            "dilation factor must be positive, got {factor}"
        )));
    }
    Ball::new(b.center, factor * b.radius)
}

/// Regions over which integrals and suprema are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Ball(Ball),
    /// The dyadic shell `2^{level+1}B \ 2^{level}B`.
    Annulus {
        ball: Ball,
        level: u32,
    },
    Complement(Ball),
    WholeGrid,
}

impl Region {
    pub fn annulus(ball: Ball, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(invalid("annulus level must be at least 1"));
        }
        Ok(Region::Annulus { ball, level })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Region::Ball(b) | Region::Complement(b) | Region::Annulus { ball: b, .. } => {
                Some(b.dim())
            }
            Region::WholeGrid => None,
        }
    }

    /// Membership without the dimension check.
    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Ball(b) => b.contains(p),
            Region::Annulus { ball, level } => {
                let (inner, outer) = annulus_radii(ball.radius, *level);
                let d = ball.center.distance(p);
                d < outer && !(d < inner)
            }
            Region::Complement(b) => !b.contains(p),
            Region::WholeGrid => true,
        }
    }

    /// Smallest ball containing the region, if bounded.
    fn bounding_ball(&self) -> Option<Ball> {
        match self {
            Region::Ball(b) => Some(*b),
            Region::Annulus { ball, level } => {
                let (_, outer) = annulus_radii(ball.radius, *level);
                Some(Ball {
                    center: ball.center,
                    radius: outer,
                })
            }
            Region::Complement(_) | Region::WholeGrid => None,
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            }),
            _ => Ok(()),
        }
    }
}

// Powers of two are exact, so these radii agree bit-for-bit with
// `ball_dilate(b, 2^level)` and `ball_dilate(b, 2^(level+1))`.
fn annulus_radii(r: f64, level: u32) -> (f64, f64) {
    let inner = libm::ldexp(1.0, level as i32);
    (inner * r, 2.0 * inner * r)
}

/// Checked membership test.
pub fn membership(x: &Point, region: &Region) -> Result<bool> {
    if let Some(d) = region.dim() {
        x.check_dim(d)?;
    }
    Ok(region.contains(x))
}

/// Outside-the-window convention used when sampling a function off-grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Extension {
    /// The function vanishes outside the window (compact support).
    #[default]
    Zero,
    /// The function is extended by its nearest window value.
    Clamp,
}

/// Real values sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "expected {} node values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid function values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = grid.nodes().map(|p| f(&p)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: alloc::vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, alloc::vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(math::abs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(invalid("grid functions live on different grids"));
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Multilinear interpolation at an arbitrary point.
    pub fn interpolate(&self, p: &Point, ext: Extension) -> f64 {
        let g = &self.grid;
        let mut idx = [0usize; 2];
        let mut frac = [0.0f64; 2];
        for axis in 0..g.dim {
            let n = g.counts[axis];
            let mut s = (p.coord(axis) - g.lower(axis)) / g.spacing;
            if !(s >= 0.0 && s <= (n - 1) as f64) {
                match ext {
                    Extension::Zero => return 0.0,
                    Extension::Clamp => s = s.clamp(0.0, (n - 1) as f64),
                }
            }
            let i = (math::floor(s) as usize).min(n - 2);
            idx[axis] = i;
            frac[axis] = s - i as f64;
        }
        // v0 + s·(v1 − v0) reproduces constants exactly.
        let lerp = |v0: f64, v1: f64, s: f64| v0 + s * (v1 - v0);
        if g.dim == 1 {
            lerp(self.values[idx[0]], self.values[idx[0] + 1], frac[0])
        } else {
            let (i, j) = (idx[0], idx[1]);
            let (a, b) = (frac[0], frac[1]);
            let v = |ii: usize, jj: usize| self.values[g.flat_index(ii, jj)];
            lerp(
                lerp(v(i, j), v(i, j + 1), b),
                lerp(v(i + 1, j), v(i + 1, j + 1), b),
                a,
            )
        }
    }
}

/// Finitely many functions on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    members: Vec<GridFunction>,
}

impl FunctionFamily {
    pub fn new(members: Vec<GridFunction>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(invalid("function family must be nonempty"));
        };
        if members.iter().any(|m| m.grid != first.grid) {
            return Err(invalid("family members must share one grid"));
        }
        Ok(Self { members })
    }

    pub fn single(f: GridFunction) -> Self {
        Self {
            members: alloc::vec![f],
        }
    }

    pub fn members(&self) -> &[GridFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid(&self) -> &Grid {
        &self.members[0].grid
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            members: self.members.iter().map(|m| m.scaled(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.members.iter().all(GridFunction::is_zero)
    }
}

/// Midpoint-rule integral of `f` over the nodes of `region`.
pub fn integrate(f: &GridFunction, region: &Region) -> Result<f64> {
    region.check_dim(f.grid.dim)?;
    let mut sum = 0.0;
    f.grid.for_each_node_in(region, |k, _| sum += f.values[k]);
    Ok(sum * f.grid.cell_volume())
}

/// Node measure `#{nodes in region} · h^dim`.
pub fn measure(grid: &Grid, region: &Region) -> Result<f64> {
    region.check_dim(grid.dim)?;
    Ok(grid.node_count_in(region) as f64 * grid.cell_volume())
}

/// `f` on the nodes of `region`, zero elsewhere.
pub fn restrict(f: &GridFunction, region: &Region) -> Result<GridFunction> {
    region.check_dim(f.grid.dim)?;
    let mut values = alloc::vec![0.0; f.values.len()];
    f.grid
        .for_each_node_in(region, |k, _| values[k] = f.values[k]);
    Ok(GridFunction {
        grid: f.grid,
        values,
    })
}

/// Nodewise `(Σ_j |f_j|²)^{1/2}`.
pub fn l2_aggregate(fam: &FunctionFamily) -> GridFunction {
    let grid = *fam.grid();
    let mut sq = alloc::vec![0.0; grid.len()];
    for m in &fam.members {
        for (s, v) in sq.iter_mut().zip(&m.values) {
            *s += v * v;
        }
    }
    GridFunction {
        grid,
        values: sq.into_iter().map(math::sqrt).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn line(lo: f64, hi: f64, h: f64) -> Grid {
        let n = libm::round((hi - lo) / h) as usize + 1;
        Grid::new(Point::d1(lo), h, &[n]).unwrap()
    }

    #[test]
    fn dilate_examples() {
        let b = Ball::new(Point::d1(0.0), 1.0).unwrap();
        assert_eq!(ball_dilate(&b, 2.0).unwrap().radius(), 2.0);
        assert_eq!(ball_dilate(&b, 1.0).unwrap(), b);
        let b = Ball::new(Point::d1(3.0), 0.5).unwrap();
        let d = ball_dilate(&b, 8.0).unwrap();
        assert_eq!(d.center(), Point::d1(3.0));
        assert_eq!(d.radius(), 4.0);
        assert!(ball_dilate(&b, 0.0).is_err());
        assert!(ball_dilate(&b, -1.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let b = Ball::new(Point::d1(0.0), 1.0).unwrap();
        assert!(membership(&Point::d1(0.0), &Region::Ball(b)).unwrap());
        assert!(!membership(&Point::d1(1.0), &Region::Ball(b)).unwrap());
        assert!(!membership(&Point::d1(-1.0), &Region::Ball(b)).unwrap());
        // 2r ≤ 3r < 4r for the first dyadic shell
        let b = Ball::new(Point::d1(1.0), 0.5).unwrap();
        let shell = Region::annulus(b, 1).unwrap();
        assert!(membership(&Point::d1(1.0 + 1.5), &shell).unwrap());
        assert!(membership(&Point::d1(1.0 + 1.0), &shell).unwrap());
        assert!(!membership(&Point::d1(1.0 + 2.0), &shell).unwrap());
        assert!(!membership(&Point::d1(1.2), &shell).unwrap());
        assert!(matches!(
            membership(&Point::d2(0.0, 0.0), &Region::Ball(b)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Region::annulus(b, 0).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = line(-2.0, 2.0, 0.1);
        let one = GridFunction::constant(g, 1.0).unwrap();
        let ball = Region::Ball(Ball::new(Point::d1(0.0), 1.0).unwrap());
        let count = g.node_count_in(&ball);
        assert_eq!(count, 19);
        assert_eq!(integrate(&one, &ball).unwrap(), count as f64 * 0.1);
        assert!((integrate(&one, &ball).unwrap() - 2.0).abs() <= 0.1);
        assert_eq!(integrate(&GridFunction::zeros(g), &ball).unwrap(), 0.0);

        // cell-centred nodes on [-1, 1]
        let g = Grid::new(Point::d1(-0.995), 0.01, &[200]).unwrap();
        let sq = GridFunction::from_fn(g, |p| p.coord(0) * p.coord(0)).unwrap();
        let v = integrate(&sq, &ball).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn restrict_examples() {
        let g = line(-4.0, 4.0, 0.05);
        let one = GridFunction::constant(g, 1.0).unwrap();
        assert_eq!(restrict(&one, &Region::WholeGrid).unwrap(), one);
        let far = Region::Ball(Ball::new(Point::d1(10.0), 1.0).unwrap());
        assert!(restrict(&one, &far).unwrap().is_zero());
        let unit = Region::Ball(Ball::new(Point::d1(0.0), 1.0).unwrap());
        let r = restrict(&one, &unit).unwrap();
        assert!((integrate(&r, &Region::WholeGrid).unwrap() - 2.0).abs() <= 0.05);
    }

    #[test]
    fn l2_aggregate_examples() {
        let g = line(-1.0, 1.0, 0.25);
        let f = GridFunction::from_fn(g, |p| p.coord(0) - 0.3).unwrap();
        let single = l2_aggregate(&FunctionFamily::single(f.clone()));
        assert_eq!(single, f.abs());
        let base = GridFunction::from_fn(g, |p| p.coord(0) * p.coord(0)).unwrap();
        let fam = FunctionFamily::new(vec![base.scaled(3.0), base.scaled(4.0)]).unwrap();
        let agg = l2_aggregate(&fam);
        for (a, b) in agg.values().iter().zip(base.values()) {
            assert!((a - 5.0 * b).abs() <= 1e-15 * (1.0 + b));
        }
    }

    #[test]
    fn two_dimensional_grid_layout() {
        let g = Grid::new(Point::d2(-1.0, 0.0), 0.5, &[5, 3]).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.node(0), Point::d2(-1.0, 0.0));
        assert_eq!(g.node(1), Point::d2(-1.0, 0.5));
        assert_eq!(g.node(3), Point::d2(-0.5, 0.0));
        assert_eq!(g.upper(0), 1.0);
        assert_eq!(g.upper(1), 1.0);
        let ball = Region::Ball(Ball::new(Point::d2(0.0, 0.5), 0.6).unwrap());
        let inside: Vec<usize> = g.nodes_in(&ball);
        let brute: Vec<usize> = (0..g.len())
            .filter(|&k| ball.contains(&g.node(k)))
            .collect();
        assert_eq!(inside, brute);
        assert_eq!(inside.len(), 5);
    }

    #[test]
    fn interpolation_reproduces_affine_functions() {
        let g = Grid::new(Point::d2(-1.0, -1.0), 0.25, &[9, 9]).unwrap();
        let f = GridFunction::from_fn(g, |p| 2.0 * p.coord(0) - p.coord(1) + 0.5).unwrap();
        let p = Point::d2(0.13, -0.71);
        assert!((f.interpolate(&p, Extension::Zero) - (0.26 + 0.71 + 0.5)).abs() < 1e-12);
        assert_eq!(f.interpolate(&Point::d2(1.5, 0.0), Extension::Zero), 0.0);
        assert_eq!(
            f.interpolate(&Point::d2(1.5, 0.0), Extension::Clamp),
            f.interpolate(&Point::d2(1.0, 0.0), Extension::Zero)
        );
    }

    #[test]
    fn lattice_measure_matches_window_count_for_interior_balls() {
        let g = line(-4.0, 4.0, 0.05);
        let b = Ball::new(Point::d1(0.3), 1.1).unwrap();
        assert_eq!(
            g.lattice_measure(&b),
            measure(&g, &Region::Ball(b)).unwrap()
        );
        let big = Ball::new(Point::d1(0.0), 10.0).unwrap();
        assert!(g.lattice_measure(&big) > measure(&g, &Region::Ball(big)).unwrap());
    }

    #[test]
    fn family_rejects_mixed_grids() {
        let a = GridFunction::zeros(line(-1.0, 1.0, 0.5));
        let b = GridFunction::zeros(line(-1.0, 1.0, 0.25));
        assert!(FunctionFamily::new(vec![a, b]).is_err());
        assert!(FunctionFamily::new(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn annulus_partition_is_additive(
            vals in proptest::collection::vec(-8i32..8, 161),
            cx in -1.0f64..1.0, r in 0.05f64..0.8, level in 1u32..4,
        ) {
            // integer values and a dyadic spacing keep every partial sum exact
            let g = Grid::new(Point::d1(-5.0), 0.0625, &[161]).unwrap();
            let f = GridFunction::new(g, vals.iter().map(|&v| v as f64).collect()).unwrap();
            let b = Ball::new(Point::d1(cx), r).unwrap();
            let outer = integrate(&f, &Region::Ball(ball_dilate(&b, libm::ldexp(1.0, level as i32 + 1)).unwrap())).unwrap();
            let inner = integrate(&f, &Region::Ball(ball_dilate(&b, libm::ldexp(1.0, level as i32)).unwrap())).unwrap();
            let shell = integrate(&f, &Region::annulus(b, level).unwrap()).unwrap();
            prop_assert_eq!(outer, inner + shell);
        }

        #[test]
        fn restrict_is_idempotent_and_complementary(
            vals in proptest::collection::vec(-5.0f64..5.0, 81),
            cx in -1.0f64..1.0, r in 0.1f64..1.5,
        ) {
            let g = line(-2.0, 2.0, 0.05);
            let f = GridFunction::new(g, vals).unwrap();
            let b = Ball::new(Point::d1(cx), r).unwrap();
            let once = restrict(&f, &Region::Ball(b)).unwrap();
            prop_assert_eq!(&restrict(&once, &Region::Ball(b)).unwrap(), &once);
            let rest = restrict(&f, &Region::Complement(b)).unwrap();
            prop_assert_eq!(once.add(&rest).unwrap(), f);
        }

        #[test]
        fn l2_aggregate_is_absolutely_homogeneous(
            a in proptest::collection::vec(-5.0f64..5.0, 9),
            b in proptest::collection::vec(-5.0f64..5.0, 9),
            k in -6i32..6,
        ) {
            // power-of-two scalings are exact in floating point
            let c = -libm::ldexp(1.0, k);
            let g = line(-1.0, 1.0, 0.25);
            let fam = FunctionFamily::new(vec![
                GridFunction::new(g, a).unwrap(),
                GridFunction::new(g, b).unwrap(),
            ]).unwrap();
            let lhs = l2_aggregate(&fam.scaled(c));
            let rhs = l2_aggregate(&fam).scaled(c.abs());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn l2_aggregate_dominates_members(
            vals in proptest::collection::vec(-5.0f64..5.0, 5 * 17),
        ) {
            let g = line(-2.0, 2.0, 0.25);
            let members: Vec<GridFunction> = vals.chunks(17)
                .map(|c| GridFunction::new(g, c.to_vec()).unwrap())
                .collect();
            let fam = FunctionFamily::new(members).unwrap();
            let agg = l2_aggregate(&fam);
            for m in fam.members() {
                for (a, v) in agg.values().iter().zip(m.values()) {
                    prop_assert!(*a >= v.abs());
                }
            }
        }

        #[test]
        fn dilation_composes(a in 0.1f64..4.0, b in 0.1f64..4.0, r in 0.1f64..2.0) {
            let ball = Ball::new(Point::d1(0.5), r).unwrap();
            let twice = ball.dilate(a).unwrap().dilate(b).unwrap();
            let once = ball.dilate(a * b).unwrap();
            prop_assert_eq!(twice.center(), once.center());
            prop_assert!((twice.radius() - once.radius()).abs() <= 1e-15 * once.radius());
        }
    }
}
