//! The discretized Hölder test class and the pairing maximizer.
//!
//! A test function is represented by its values `φ_i` at the nodes `u_i` of a
//! lattice inside the closed unit ball. The class is the polytope
//!
//! ```text
//!   Σ_i φ_i · h^dim = 0,        φ_i − φ_j ≤ |u_i − u_j|^α   for all i ≠ j,
//! ```
//!
//! with support enforced by only having variables inside the ball. Pairings
//! `Σ_i c_i φ_i` are maximized over it with a dense simplex method.
//!
//! The solver works on the dual problem. For the programs built here the
//! primal has a handful of free variables and `m(m−1)` inequality rows, so
//! the dual tableau has only `m` rows and each pivot is cheap.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, Point};
use crate::math;

/// The discrete class `C_α` on a lattice inside the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct HoelderClassSpec {
    alpha: f64,
    support_grid: Grid,
    nodes: Vec<Point>,
}

impl HoelderClassSpec {
    /// Cell midpoints of a `resolution^dim` partition of `[-1, 1]^dim`, keeping
    /// those in the closed unit ball. In 1-D with `resolution = 2` the nodes
    /// are `±0.5`.
    pub fn new(alpha: f64, dim: usize, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(invalid("class resolution must be at least 2"));
        }
        let h = 2.0 / resolution as f64;
        let o = -1.0 + 0.5 * h;
        let grid = match dim {
            1 => Grid::new(Point::d1(o), h, &[resolution])?,
            2 => Grid::new(Point::d2(o, o), h, &[resolution, resolution])?,
            _ => return Err(invalid(format!("dimension must be 1 or 2, got {dim}"))),
        };
        Self::from_grid(alpha, grid)
    }

    /// Uses the nodes of `support_grid` lying in the closed unit ball.
    pub fn from_grid(alpha: f64, support_grid: Grid) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        let nodes: Vec<Point> = support_grid
            .nodes()
            .filter(|u| u.norm() <= 1.0 + 1e-12)
            .collect();
        if nodes.len() < 2 {
            return Err(invalid(
                "the Hölder class needs at least 2 nodes in the unit ball",
            ));
        }
        Ok(Self {
            alpha,
            support_grid,
            nodes,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.support_grid.dim()
    }

    pub fn support_grid(&self) -> &Grid {
        &self.support_grid
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weight `h^dim` of one class node.
    pub fn cell_volume(&self) -> f64 {
        self.support_grid.cell_volume()
    }
}

/// One constraint row `coeffs · x (≤ | =) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// `maximize objective · x` over free `x` subject to inequality and equality rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    inequalities: Vec<Row>,
    equalities: Vec<Row>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Result<Self> {
        if num_vars == 0 {
            return Err(invalid("a linear program needs at least one variable"));
        }
        Ok(Self {
            num_vars,
            objective: vec![0.0; num_vars],
            inequalities: Vec::new(),
            equalities: Vec::new(),
        })
    }

    fn check_row(&self, coeffs: &[f64], rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: coeffs.len(),
            });
        }
        if !rhs.is_finite() || coeffs.iter().any(|v| !v.is_finite()) {
            return Err(invalid("constraint rows must be finite"));
        }
        Ok(())
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> Result<()> {
        self.check_row(&objective, 0.0)?;
        self.objective = objective;
        Ok(())
    }

    pub fn with_objective(mut self, objective: Vec<f64>) -> Result<Self> {
        self.set_objective(objective)?;
        Ok(self)
    }

    /// Adds `coeffs · x ≤ rhs`.
    pub fn add_inequality(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_row(&coeffs, rhs)?;
        self.inequalities.push(Row { coeffs, rhs });
        Ok(())
    }

    /// Adds `coeffs · x = rhs`.
    pub fn add_equality(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_row(&coeffs, rhs)?;
        self.equalities.push(Row { coeffs, rhs });
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn inequalities(&self) -> &[Row] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Row] {
        &self.equalities
    }

    /// Largest violation of any row at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |r: &Row| r.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let ineq = self
            .inequalities
            .iter()
            .map(|r| (dot(r) - r.rhs).max(0.0))
            .fold(0.0, f64::max);
        let eq = self
            .equalities
            .iter()
            .map(|r| math::abs(dot(r) - r.rhs))
            .fold(0.0, f64::max);
        ineq.max(eq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value at `argument`; NaN unless optimal.
    pub optimum: f64,
    pub argument: Vec<f64>,
}

/// The constraint rows of the discrete class, with a zero objective.
///
/// Row order: the mean-zero equality, then for each pair `i < j` the rows
/// `φ_i − φ_j ≤ d_ij^α` and `φ_j − φ_i ≤ d_ij^α`.
pub fn calpha_constraints(spec: &HoelderClassSpec) -> Result<LinearProgram> {
    let m = spec.len();
    if m < 2 {
        return Err(invalid("the Hölder class needs at least 2 nodes"));
    }
    let mut lp = LinearProgram::new(m)?;
    lp.add_equality(vec![spec.cell_volume(); m], 0.0)?;
    let nodes = spec.nodes();
    for i in 0..m {
        for j in i + 1..m {
            let bound = math::powf(nodes[i].distance(&nodes[j]), spec.alpha());
            let mut row = vec![0.0; m];
            row[i] = 1.0;
            row[j] = -1.0;
            lp.add_inequality(row.clone(), bound)?;
            row[i] = -1.0;
            row[j] = 1.0;
            lp.add_inequality(row, bound)?;
        }
    }
    Ok(lp)
}

/// Solves `lp` exactly (up to floating point) with the dual simplex tableau.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    DualTableau::new(lp).solve(lp.objective())
}

/// Reusable solver for one constraint set and many objectives.
///
/// The primal `max c·x, Ax ≤ b, Ex = d, x free` is solved through its dual
/// `min b·y + d·(z⁺ − z⁻), Aᵀy + Eᵀ(z⁺ − z⁻) = c, y, z⁺, z⁻ ≥ 0`, whose
/// constraint matrix does not depend on `c`. The primal point is read off as
/// the simplex multipliers of the dual at optimality.
#[derive(Debug, Clone)]
pub struct DualTableau {
    rows: usize,
    structural: usize,
    /// Row-major `rows × structural` dual constraint matrix.
    matrix: Vec<f64>,
    costs: Vec<f64>,
    cost_scale: f64,
}

const PIVOT_EPS: f64 = 1e-11;
const MAX_DEGENERATE_DANTZIG: usize = 50;

impl DualTableau {
    pub fn new(lp: &LinearProgram) -> Self {
        let rows = lp.num_vars;
        let k = lp.inequalities.len();
        let q = lp.equalities.len();
        let structural = k + 2 * q;
        let mut matrix = vec![0.0; rows * structural];
        let mut costs = Vec::with_capacity(structural);
        for (col, r) in lp.inequalities.iter().enumerate() {
            for i in 0..rows {
                matrix[i * structural + col] = r.coeffs[i];
            }
            costs.push(r.rhs);
        }
        for (e, r) in lp.equalities.iter().enumerate() {
            let plus = k + 2 * e;
            for i in 0..rows {
                matrix[i * structural + plus] = r.coeffs[i];
                matrix[i * structural + plus + 1] = -r.coeffs[i];
            }
            costs.push(r.rhs);
            costs.push(-r.rhs);
        }
        let cost_scale = costs.iter().fold(1.0f64, |m, c| m.max(math::abs(*c)));
        Self {
            rows,
            structural,
            matrix,
            costs,
            cost_scale,
        }
    }

    pub fn solve(&self, objective: &[f64]) -> Result<LpSolution> {
        if objective.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: objective.len(),
            });
        }
        match self.run(objective)? {
            DualOutcome::Optimal(x) => {
                let optimum = x.iter().zip(objective).map(|(a, b)| a * b).sum();
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    optimum,
                    argument: x,
                })
            }
            DualOutcome::DualUnbounded => Ok(LpSolution {
                status: LpStatus::Infeasible,
                optimum: f64::NAN,
                argument: Vec::new(),
            }),
            DualOutcome::DualInfeasible => {
                // Primal is infeasible or unbounded. It is feasible iff the
                // dual with a zero objective stays bounded (Farkas).
                let zero = vec![0.0; self.rows];
                let status = match self.run(&zero)? {
                    DualOutcome::Optimal(_) => LpStatus::Unbounded,
                    _ => LpStatus::Infeasible,
                };
                Ok(LpSolution {
                    status,
                    optimum: f64::NAN,
                    argument: Vec::new(),
                })
            }
        }
    }

    fn run(&self, rhs: &[f64]) -> Result<DualOutcome> {
        let m = self.rows;
        let s = self.structural;
        let width = s + m + 1;
        let rhs_col = width - 1;
        let mut t = vec![0.0; m * width];
        let mut signs = vec![1.0; m];
        let mut basis: Vec<usize> = (s..s + m).collect();
        for i in 0..m {
            let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
            signs[i] = sign;
            let row = &mut t[i * width..(i + 1) * width];
            for (dst, src) in row[..s].iter_mut().zip(&self.matrix[i * s..(i + 1) * s]) {
                *dst = sign * src;
            }
            row[s + i] = 1.0;
            row[rhs_col] = sign * rhs[i];
        }

        // Phase 1: minimize the sum of artificials.
        let mut reduced = vec![0.0; width];
        for i in 0..m {
            for j in 0..s {
                reduced[j] -= t[i * width + j];
            }
            reduced[rhs_col] -= t[i * width + rhs_col];
        }
        let rhs_scale = rhs.iter().fold(1.0f64, |a, v| a.max(math::abs(*v)));
        let mut tab = Tableau {
            t,
            width,
            rows: m,
            basis: &mut basis,
            reduced,
        };
        match tab.minimize(s, rhs_scale * 1e-12)? {
            Phase::Optimal => {}
            Phase::Unbounded => return Err(Error::Solver("phase 1 reported unbounded".into())),
        }
        let infeasibility = -tab.reduced[rhs_col];
        if infeasibility > 1e-9 * rhs_scale {
            return Ok(DualOutcome::DualInfeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < s {
                continue;
            }
            let row = &tab.t[r * width..r * width + s];
            let pick = (0..s)
                .filter(|&j| math::abs(row[j]) > 1e-9)
                .max_by(|&a, &b| {
                    math::abs(row[a])
                        .total_cmp(&math::abs(row[b]))
                        .then(b.cmp(&a))
                });
            if let Some(j) = pick {
                tab.pivot(r, j);
            }
        }

        // Phase 2: original costs, artificials never re-enter.
        let cost_of = |j: usize| if j < s { self.costs[j] } else { 0.0 };
        let mut reduced = vec![0.0; width];
        for (j, r) in reduced.iter_mut().enumerate().take(s) {
            *r = self.costs[j];
        }
        for i in 0..m {
            let cb = cost_of(tab.basis[i]);
            if cb != 0.0 {
                let row = &tab.t[i * width..(i + 1) * width];
                for (j, (r, t)) in reduced.iter_mut().zip(row).enumerate() {
                    if j < s || j == rhs_col {
                        *r -= cb * t;
                    }
                }
            }
        }
        tab.reduced = reduced;
        match tab.minimize(s, self.cost_scale * 1e-11)? {
            Phase::Optimal => {}
            Phase::Unbounded => return Ok(DualOutcome::DualUnbounded),
        }

        // Multipliers π̃ = c_Bᵀ B⁻¹; B⁻¹ sits in the artificial block.
        let mut x = vec![0.0; m];
        for (i, xi) in x.iter_mut().enumerate() {
            let mut pi = 0.0;
            for r in 0..m {
                let cb = cost_of(tab.basis[r]);
                if cb != 0.0 {
                    pi += cb * tab.t[r * width + s + i];
                }
            }
            *xi = signs[i] * pi;
        }
        Ok(DualOutcome::Optimal(x))
    }
}

enum DualOutcome {
    Optimal(Vec<f64>),
    DualInfeasible,
    DualUnbounded,
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau<'a> {
    t: Vec<f64>,
    width: usize,
    rows: usize,
    basis: &'a mut Vec<usize>,
    /// Reduced costs; the last entry holds minus the objective value.
    reduced: Vec<f64>,
}

impl Tableau<'_> {
    /// Primal simplex over columns `0..eligible`. Dantzig pricing with
    /// lowest-index ties; after a run of degenerate pivots it switches to
    /// Bland's rule, which cannot cycle.
    fn minimize(&mut self, eligible: usize, rc_eps: f64) -> Result<Phase> {
        let rhs_col = self.width - 1;
        let mut degenerate_run = 0usize;
        let max_iters = 50 * (self.rows + eligible) + 1000;
        for _ in 0..max_iters {
            let bland = degenerate_run >= MAX_DEGENERATE_DANTZIG;
            let mut enter = None;
            let mut best = -rc_eps;
            for j in 0..eligible {
                let d = self.reduced[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(e) = enter else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i * self.width + e];
                if a > PIVOT_EPS {
                    let ratio = self.t[i * self.width + rhs_col].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = math::abs(ratio - lr) <= 1e-12 * (1.0 + lr);
                            if (ratio < lr && !tie) || (tie && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Phase::Unbounded);
            };
            if ratio <= 1e-14 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
        }
        Err(Error::Solver(format!(
            "simplex exceeded {max_iters} iterations"
        )))
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let inv = 1.0 / self.t[r * w + e];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v *= inv;
        }
        self.t[r * w + e] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[e];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * p;
                }
                row[e] = 0.0;
            }
        }
        let f = self.reduced[e];
        if f != 0.0 {
            for (x, p) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *x -= f * p;
            }
            self.reduced[e] = 0.0;
        }
        self.basis[r] = e;
    }
}

/// Maximizes `|Σ_i c_i φ_i|` over one fixed discrete class.
#[derive(Debug, Clone)]
pub struct PairingMaximizer {
    spec: HoelderClassSpec,
    tableau: DualTableau,
}

impl PairingMaximizer {
    pub fn new(spec: &HoelderClassSpec) -> Result<Self> {
        let lp = calpha_constraints(spec)?;
        Ok(Self {
            spec: spec.clone(),
            tableau: DualTableau::new(&lp),
        })
    }

    pub fn spec(&self) -> &HoelderClassSpec {
        &self.spec
    }

    /// `max_φ Σ c_i φ_i` with the maximizing node values.
    pub fn maximize(&self, c: &[f64]) -> Result<LpSolution> {
        self.tableau.solve(c)
    }

    /// `max(sup c·φ, sup −c·φ)`, never negative.
    pub fn maximize_abs(&self, c: &[f64]) -> Result<f64> {
        if c.len() != self.spec.len() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.len(),
                found: c.len(),
            });
        }
        // Constant vectors (zero included) are annihilated by the mean-zero row.
        if c.iter().all(|&v| v == c[0]) {
            return Ok(0.0);
        }
        let plus = self.checked(c)?;
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        let minus = self.checked(&neg)?;
        Ok(plus.max(minus).max(0.0))
    }

    fn checked(&self, c: &[f64]) -> Result<f64> {
        let sol = self.tableau.solve(c)?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.optimum),
            other => Err(Error::Solver(format!(
                "over the Hölder class returned {other:?}"
            ))),
        }
    }
}

/// `sup_φ |Σ_i c_i φ_i|` over the discrete class described by `spec`.
pub fn maximize_abs_pairing(c: &[f64], spec: &HoelderClassSpec) -> Result<f64> {
    PairingMaximizer::new(spec)?.maximize_abs(c)
}
