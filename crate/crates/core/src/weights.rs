//! Weight diagnostics: Muckenhoupt characteristics, doubling ratios,
//! `A_∞`-type comparison fits and the Hardy–Littlewood maximal function.
//!
//! Every "for all balls" condition is evaluated over a finite [`BallFamily`];
//! the family carries a provenance string so reports can say exactly which
//! balls were tried.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::grid::{integrate, Ball, Grid, GridFunction, Point, Region};
use crate::math;

/// Default lower floor applied to weight densities.
pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Cap on the comparison constant accepted by [`ainfty_fit`].
pub const DEFAULT_AINFTY_CAP: f64 = 1e3;

/// A sampled weight density, floored away from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    density: GridFunction,
    floor: f64,
}

impl Weight {
    /// Raises every value below `floor` to `floor`.
    pub fn new(density: GridFunction, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(invalid(format!(
                "weight floor must be positive, got {floor}"
            )));
        }
        Ok(Self {
            density: density.map(|v| v.max(floor)),
            floor,
        })
    }

    /// `w ≡ 1`.
    pub fn unit(grid: Grid) -> Self {
        Self {
            density: GridFunction::constant(grid, 1.0).expect("finite constant"),
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(GridFunction::constant(grid, c)?, DEFAULT_FLOOR)
    }

    pub fn density(&self) -> &GridFunction {
        &self.density
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn grid(&self) -> &Grid {
        self.density.grid()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(invalid("weights can only be scaled by positive factors"));
        }
        Self::new(self.density.scaled(c), self.floor * c)
    }
}

/// `density(x) = max(|x|^a, floor)`. For `a < 0` the singular node at the
/// origin is evaluated at distance `h/2`.
pub fn power_weight(a: f64, grid: Grid, floor: f64) -> Result<Weight> {
    if !a.is_finite() {
        return Err(invalid("power weight exponent must be finite"));
    }
    let h = grid.spacing();
    let density = GridFunction::from_fn(grid, |p| {
        let r = p.norm();
        let r = if a < 0.0 && r == 0.0 { 0.5 * h } else { r };
        if a == 0.0 {
            1.0
        } else {
            math::powf(r, a)
        }
    })?;
    Weight::new(density, floor)
}

/// A finite surrogate for "all balls".
#[derive(Debug, Clone, PartialEq)]
pub struct BallFamily {
    balls: Vec<Ball>,
    provenance: String,
}

impl BallFamily {
    /// Every ball must contain at least one node of `grid`.
    pub fn new(grid: &Grid, balls: Vec<Ball>, provenance: impl Into<String>) -> Result<Self> {
        if balls.is_empty() {
            return Err(invalid("ball family must be nonempty"));
        }
        for (i, b) in balls.iter().enumerate() {
            if b.dim() != grid.dim() {
                return Err(invalid(format!("ball {i} has the wrong dimension")));
            }
            if grid.node_count_in(&Region::Ball(*b)) == 0 {
                return Err(invalid(format!("ball {i} contains no grid node")));
            }
        }
        Ok(Self {
            balls,
            provenance: provenance.into(),
        })
    }

    /// Centers on a lattice of the given spacing anchored at the window
    /// center, radii `r0·2^k` for `k < levels`; only balls inside the window
    /// are kept.
    pub fn lattice(grid: &Grid, center_spacing: f64, r0: f64, levels: u32) -> Result<Self> {
        if !(center_spacing > 0.0 && r0 > 0.0) || levels == 0 {
            return Err(invalid(
                "lattice family needs positive spacing, radius and levels",
            ));
        }
        let c = grid.center();
        let axis_offsets = |axis: usize| -> Vec<f64> {
            let half = 0.5 * (grid.upper(axis) - grid.lower(axis));
            let k = math::floor(half / center_spacing + 1e-9) as i64;
            (-k..=k)
                .map(|i| c.coord(axis) + i as f64 * center_spacing)
                .collect()
        };
        let xs = axis_offsets(0);
        let centers: Vec<Point> = if grid.dim() == 1 {
            xs.iter().map(|&x| Point::d1(x)).collect()
        } else {
            let ys = axis_offsets(1);
            xs.iter()
                .flat_map(|&x| ys.iter().map(move |&y| Point::d2(x, y)))
                .collect()
        };
        let mut balls = Vec::new();
        for level in 0..levels {
            let r = r0 * libm::ldexp(1.0, level as i32);
            for &center in &centers {
                let b = Ball::new(center, r)?;
                if grid.window_contains_ball(&b) {
                    balls.push(b);
                }
            }
        }
        Self::new(
            grid,
            balls,
            format!("lattice:{center_spacing}:{r0}:{levels}"),
        )
    }

    /// Concentric balls `B(center, r0·2^k)`, `k < count`, kept if inside the window.
    pub fn centered(grid: &Grid, center: Point, r0: f64, count: u32) -> Result<Self> {
        if !(r0 > 0.0) || count == 0 {
            return Err(invalid("centered family needs a positive radius and count"));
        }
        let balls: Vec<Ball> = (0..count)
            .map(|k| Ball::new(center, r0 * libm::ldexp(1.0, k as i32)))
            .collect::<Result<_>>()?;
        let balls = balls
            .into_iter()
            .filter(|b| grid.window_contains_ball(b))
            .collect();
        let coords: Vec<String> = center.coords().iter().map(|c| format!("{c}")).collect();
        Self::new(
            grid,
            balls,
            format!("centered:{}:{r0}:{count}", coords.join(",")),
        )
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Distinct radii in increasing order.
    pub fn radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.balls.iter().map(Ball::radius).collect();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    /// This family followed by the balls of `other`.
    pub fn extended(&self, other: &BallFamily) -> BallFamily {
        let mut balls = self.balls.clone();
        balls.extend_from_slice(&other.balls);
        BallFamily {
            balls,
            provenance: format!("{}+{}", self.provenance, other.provenance),
        }
    }
}

/// Supremum over a ball family together with the per-ball terms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Characteristic {
    pub value: f64,
    /// Index of the first ball attaining `value`.
    pub maximizer: usize,
    pub terms: Vec<f64>,
}

fn max_with_index(terms: &[f64]) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &t) in terms.iter().enumerate() {
        if t > best.0 {
            best = (t, i);
        }
    }
    best
}

fn node_values(w: &Weight, ball: &Ball) -> Vec<f64> {
    let d = w.density.values();
    let mut v = Vec::new();
    w.grid()
        .for_each_node_in(&Region::Ball(*ball), |k, _| v.push(d[k]));
    v
}

/// `w(E) = ∫_E w`.
pub fn weighted_measure(w: &Weight, region: &Region) -> Result<f64> {
    integrate(&w.density, region)
}

fn ap_term(values: &[f64], p: f64) -> f64 {
    // Averages of w/w_ref: the product is scale free, and constant weights
    // give exactly 1.
    let reference = values.iter().fold(0.0f64, |m, &v| m.max(v));
    let n = values.len() as f64;
    let dual_exp = -1.0 / (p - 1.0);
    let mut avg = 0.0;
    let mut dual = 0.0;
    for &v in values {
        let r = v / reference;
        avg += r;
        dual += if p == 2.0 {
            1.0 / r
        } else {
            math::powf(r, dual_exp)
        };
    }
    avg /= n;
    dual /= n;
    avg * if p == 2.0 {
        dual
    } else {
        math::powf(dual, p - 1.0)
    }
}

/// `max_B (⨍_B w)(⨍_B w^{−1/(p−1)})^{p−1}` over the family.
pub fn ap_characteristic(w: &Weight, p: f64, balls: &BallFamily) -> Result<Characteristic> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("A_p needs p > 1, got {p}")));
    }
    let terms: Vec<f64> = balls
        .balls
        .iter()
        .map(|b| ap_term(&node_values(w, b), p))
        .collect();
    let (value, maximizer) = max_with_index(&terms);
    Ok(Characteristic {
        value,
        maximizer,
        terms,
    })
}

fn a1_term(values: &[f64]) -> f64 {
    let min = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    values.iter().map(|v| v / min).sum::<f64>() / values.len() as f64
}

/// `max_B (⨍_B w) / min_{nodes of B} w` over the family.
pub fn a1_characteristic(w: &Weight, balls: &BallFamily) -> Result<Characteristic> {
    let terms: Vec<f64> = balls
        .balls
        .iter()
        .map(|b| a1_term(&node_values(w, b)))
        .collect();
    let (value, maximizer) = max_with_index(&terms);
    Ok(Characteristic {
        value,
        maximizer,
        terms,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DoublingReport {
    pub value: f64,
    pub maximizer: usize,
    /// `w(2B)/w(B)` per ball; `None` for skipped balls.
    pub terms: Vec<Option<f64>>,
    /// Balls with zero weighted measure.
    pub skipped: Vec<usize>,
}

/// `max_B w(2B)/w(B)`; `2B` is truncated to the window.
pub fn doubling_ratio(w: &Weight, balls: &BallFamily) -> Result<DoublingReport> {
    let mut terms = Vec::with_capacity(balls.len());
    let mut skipped = Vec::new();
    for (i, b) in balls.balls.iter().enumerate() {
        let small = weighted_measure(w, &Region::Ball(*b))?;
        if small <= 0.0 {
            skipped.push(i);
            terms.push(None);
            continue;
        }
        let big = weighted_measure(w, &Region::Ball(b.dilate(2.0)?))?;
        terms.push(Some(big / small));
    }
    let flat: Vec<f64> = terms
        .iter()
        .map(|t| t.unwrap_or(f64::NEG_INFINITY))
        .collect();
    let (value, maximizer) = max_with_index(&flat);
    Ok(DoublingReport {
        value,
        maximizer,
        terms,
        skipped,
    })
}

/// Fitted constants for `w(E)/w(B) ≤ C (|E|/|B|)^δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AInftyFit {
    pub c_fit: f64,
    pub delta_fit: f64,
    /// Smallest slack `C (|E|/|B|)^δ − w(E)/w(B)` over the pairs; never negative.
    pub residual: f64,
    /// False when even the smallest ladder exponent needs `C` above the cap.
    pub within_cap: bool,
}

/// `δ ∈ {0.05, 0.10, …, 1.00}`.
pub fn delta_ladder() -> impl DoubleEndedIterator<Item = f64> {
    (1..=20).map(|k| k as f64 / 20.0)
}

/// [`ainfty_fit_with_cap`] with [`DEFAULT_AINFTY_CAP`].
pub fn ainfty_fit(w: &Weight, pairs: &[(Ball, Region)]) -> Result<AInftyFit> {
    ainfty_fit_with_cap(w, pairs, DEFAULT_AINFTY_CAP)
}

/// Largest ladder `δ` whose best constant over the pairs stays `≤ cap`.
pub fn ainfty_fit_with_cap(w: &Weight, pairs: &[(Ball, Region)], cap: f64) -> Result<AInftyFit> {
    if pairs.is_empty() {
        return Err(invalid("A_∞ fit needs at least one (ball, subset) pair"));
    }
    let grid = w.grid();
    let mut ratios = Vec::with_capacity(pairs.len());
    for (i, (ball, sub)) in pairs.iter().enumerate() {
        let ball_region = Region::Ball(*ball);
        let mut sub_nodes = 0usize;
        let mut outside = false;
        grid.for_each_node_in(sub, |_, p| {
            sub_nodes += 1;
            outside |= !ball.contains(&p);
        });
        if outside {
            return Err(invalid(format!("pair {i}: subset is not inside its ball")));
        }
        if sub_nodes == 0 {
            return Err(invalid(format!("pair {i}: subset has zero measure")));
        }
        let ball_nodes = grid.node_count_in(&ball_region);
        let mass_ratio = weighted_measure(w, sub)? / weighted_measure(w, &ball_region)?;
        let size_ratio = sub_nodes as f64 / ball_nodes as f64;
        ratios.push((mass_ratio, size_ratio));
    }
    let constant_for = |delta: f64| {
        ratios
            .iter()
            .map(|&(m, s)| m / math::powf(s, delta))
            .fold(0.0f64, f64::max)
    };
    let slack = |c: f64, delta: f64| {
        ratios
            .iter()
            .map(|&(m, s)| c * math::powf(s, delta) - m)
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    };
    for delta in delta_ladder().rev() {
        let c = constant_for(delta);
        if c <= cap {
            return Ok(AInftyFit {
                c_fit: c,
                delta_fit: delta,
                residual: slack(c, delta),
                within_cap: true,
            });
        }
    }
    let delta = 0.05;
    let c = constant_for(delta);
    Ok(AInftyFit {
        c_fit: c,
        delta_fit: delta,
        residual: slack(c, delta),
        within_cap: false,
    })
}

/// `max_r ⨍_{B(x,r)} w` over the radii ladder; balls with no node are skipped.
pub fn hl_maximal(w: &Weight, x: &Point, radii: &[f64]) -> Result<f64> {
    if radii.is_empty() {
        return Err(invalid("maximal function needs a nonempty radius ladder"));
    }
    if x.dim() != w.grid().dim() {
        return Err(crate::Error::DimensionMismatch {
            expected: w.grid().dim(),
            found: x.dim(),
        });
    }
    let d = w.density.values();
    let mut best = 0.0f64;
    for &r in radii {
        let ball = Ball::new(*x, r)?;
        let mut sum = 0.0;
        let mut n = 0usize;
        w.grid().for_each_node_in(&Region::Ball(ball), |k, _| {
            sum += d[k];
            n += 1;
        });
        if n > 0 {
            best = best.max(sum / n as f64);
        }
    }
    Ok(best)
}

/// `Mw` at every node of the weight's grid.
pub fn maximal_function(w: &Weight, radii: &[f64]) -> Result<GridFunction> {
    let grid = *w.grid();
    let values = grid
        .nodes()
        .map(|p| hl_maximal(w, &p, radii))
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(grid, values)
}

/// `h/2 · 2^k` up to twice the window radius; the first radius isolates a node.
pub fn maximal_radii(grid: &Grid) -> Vec<f64> {
    let mut radii = Vec::new();
    let mut r = 0.5 * grid.spacing();
    while r <= 2.0 * grid.window_radius() {
        radii.push(r);
        r *= 2.0;
    }
    radii
}
