//! Weighted Lebesgue, weighted Morrey and generalized Morrey norms, strong
//! and weak, plus growth functions and their doubling constants.
//!
//! Suprema over balls run over a [`BallFamily`]. Suprema over `λ` in the weak
//! norms are exact: the functional `λ ↦ λ·w(|f| > λ)` is piecewise linear
//! with breakpoints at the values of `|f|`, so it suffices to look just
//! below each distinct level.
//!
//! The weak and strong (`p = 1`) functionals are summed node by node in the
//! same order, which makes `weak ≤ strong` hold in floating point as well.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{Ball, GridFunction, Region};
use crate::math;
use crate::weights::{BallFamily, Weight};

/// A positive nondecreasing function of the radius.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum GrowthFunction {
    /// `Φ(r) = r^λ`.
    PowerLaw { lambda: f64 },
    /// Linear interpolation in `log r`, constant outside the table.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl GrowthFunction {
    pub fn power_law(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!(
                "power law exponent must be positive, got {lambda}"
            )));
        }
        Ok(Self::PowerLaw { lambda })
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(invalid(
                "growth table needs matching nonempty radius and value columns",
            ));
        }
        if radii
            .iter()
            .chain(&values)
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(invalid("growth table entries must be positive and finite"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("growth table radii must be strictly increasing"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("growth table values must be nondecreasing"));
        }
        Ok(Self::Tabulated { radii, values })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(format!("growth functions live on r > 0, got {r}")));
        }
        Ok(match self {
            Self::PowerLaw { lambda } => math::powf(r, *lambda),
            Self::Tabulated { radii, values } => {
                let n = radii.len();
                if r <= radii[0] {
                    values[0]
                } else if r >= radii[n - 1] {
                    values[n - 1]
                } else {
                    let k = radii.partition_point(|&x| x <= r) - 1;
                    let s = (math::ln(r) - math::ln(radii[k]))
                        / (math::ln(radii[k + 1]) - math::ln(radii[k]));
                    values[k] + s * (values[k + 1] - values[k])
                }
            }
        })
    }
}

/// Weighted Morrey exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MorreyParams {
    p: f64,
    kappa: f64,
}

impl MorreyParams {
    pub fn new(p: f64, kappa: f64) -> Result<Self> {
        check_p(p)?;
        check_kappa(kappa)?;
        Ok(Self { p, kappa })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("need 1 <= p < inf, got {p}")));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(invalid(format!("need 0 < kappa < 1, got {kappa}")));
    }
    Ok(())
}

/// A supremum over a ball family with its audit trail.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NormReport {
    pub value: f64,
    /// Lowest index of a ball attaining `value`.
    pub maximizing_ball: usize,
    /// Level just below which the weak supremum is attained (weak norms only).
    pub maximizing_lambda: Option<f64>,
    pub terms: Vec<f64>,
    /// Set when `f` is nonzero but vanishes on every ball of the family.
    pub vanished: bool,
}

fn node_mass(w: Option<&Weight>, k: usize, cell: f64) -> f64 {
    match w {
        Some(w) => w.density().values()[k] * cell,
        None => cell,
    }
}

fn pow_p(a: f64, p: f64) -> f64 {
    if p == 1.0 {
        a
    } else {
        math::powf(a, p)
    }
}

fn root_p(a: f64, p: f64) -> f64 {
    if p == 1.0 {
        a
    } else {
        math::powf(a, 1.0 / p)
    }
}

/// `(|f_k|, mass_k)` over the nodes of a region, in grid order.
fn collect(f: &GridFunction, w: Option<&Weight>, region: &Region) -> Vec<(f64, f64)> {
    let cell = f.grid().cell_volume();
    let v = f.values();
    let mut out = Vec::new();
    f.grid().for_each_node_in(region, |k, _| {
        out.push((math::abs(v[k]), node_mass(w, k, cell)))
    });
    out
}

fn strong_sum(nodes: &[(f64, f64)], p: f64) -> f64 {
    nodes.iter().map(|&(a, m)| pow_p(a, p) * m).sum()
}

/// `sup_λ λ·mass(|f| > λ)` and the level attaining it.
fn weak_sup(nodes: &[(f64, f64)]) -> (f64, Option<f64>) {
    let mut sorted: Vec<(f64, f64)> = nodes.iter().copied().filter(|n| n.0 > 0.0).collect();
    if sorted.is_empty() {
        return (0.0, None);
    }
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Select the level with prefix sums, then evaluate it termwise in grid
    // order so that it is dominated by the strong sum.
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut mass = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let level = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == level {
            mass += sorted[i].1;
            i += 1;
        }
        if level * mass > best.0 {
            best = (level * mass, level);
        }
    }
    let level = best.1;
    let value = nodes
        .iter()
        .filter(|n| n.0 >= level)
        .map(|&(_, m)| level * m)
        .sum();
    (value, Some(level))
}

/// `(Σ |f|^p w h^dim)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: f64, w: &Weight) -> Result<f64> {
    check_p(p)?;
    same_grid(f, w)?;
    Ok(root_p(
        strong_sum(&collect(f, Some(w), &Region::WholeGrid), p),
        p,
    ))
}

/// `sup_λ λ·w(|f| > λ)`.
pub fn weak_l1_norm(f: &GridFunction, w: &Weight) -> Result<f64> {
    same_grid(f, w)?;
    Ok(weak_sup(&collect(f, Some(w), &Region::WholeGrid)).0)
}

fn same_grid(f: &GridFunction, w: &Weight) -> Result<()> {
    if f.grid() != w.grid() {
        return Err(invalid("function and weight live on different grids"));
    }
    Ok(())
}

fn supremum(f: &GridFunction, terms: Vec<(f64, Option<f64>)>) -> NormReport {
    let mut best = 0;
    for (i, t) in terms.iter().enumerate() {
        if t.0 > terms[best].0 {
            best = i;
        }
    }
    let value = terms[best].0;
    NormReport {
        value,
        maximizing_ball: best,
        maximizing_lambda: terms[best].1,
        terms: terms.iter().map(|t| t.0).collect(),
        vanished: value == 0.0 && !f.is_zero(),
    }
}

fn ball_nodes(f: &GridFunction, w: Option<&Weight>, b: &Ball) -> Vec<(f64, f64)> {
    collect(f, w, &Region::Ball(*b))
}

fn ball_weight(nodes: &[(f64, f64)]) -> f64 {
    nodes.iter().map(|n| n.1).sum()
}

/// `max_B (w(B)^{−κ} ∫_B |f|^p w)^{1/p}`.
pub fn weighted_morrey_norm(
    f: &GridFunction,
    params: MorreyParams,
    w: &Weight,
    balls: &BallFamily,
) -> Result<NormReport> {
    same_grid(f, w)?;
    let terms = balls
        .balls()
        .iter()
        .map(|b| {
            let nodes = ball_nodes(f, Some(w), b);
            let scale = math::powf(ball_weight(&nodes), -params.kappa);
            (root_p(scale * strong_sum(&nodes, params.p), params.p), None)
        })
        .collect();
    Ok(supremum(f, terms))
}

/// `max_B w(B)^{−κ} sup_λ λ·w({x ∈ B: |f| > λ})`.
pub fn weak_weighted_morrey_norm(
    f: &GridFunction,
    kappa: f64,
    w: &Weight,
    balls: &BallFamily,
) -> Result<NormReport> {
    check_kappa(kappa)?;
    same_grid(f, w)?;
    let terms = balls
        .balls()
        .iter()
        .map(|b| {
            let nodes = ball_nodes(f, Some(w), b);
            let scale = math::powf(ball_weight(&nodes), -kappa);
            let (v, level) = weak_sup(&nodes);
            (scale * v, level)
        })
        .collect();
    Ok(supremum(f, terms))
}

/// `max_{B(x₀,r)} (Φ(r)^{−1} ∫_B |f|^p)^{1/p}`.
pub fn generalized_morrey_norm(
    f: &GridFunction,
    p: f64,
    phi: &GrowthFunction,
    balls: &BallFamily,
) -> Result<NormReport> {
    check_p(p)?;
    let terms = balls
        .balls()
        .iter()
        .map(|b| {
            let nodes = ball_nodes(f, None, b);
            Ok((
                root_p(strong_sum(&nodes, p) / phi.eval(b.radius())?, p),
                None,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(supremum(f, terms))
}

/// `max_{B(x₀,r)} Φ(r)^{−1} sup_λ λ·|{x ∈ B: |f| > λ}|`.
pub fn weak_generalized_morrey_norm(
    f: &GridFunction,
    phi: &GrowthFunction,
    balls: &BallFamily,
) -> Result<NormReport> {
    let terms = balls
        .balls()
        .iter()
        .map(|b| {
            let (v, level) = weak_sup(&ball_nodes(f, None, b));
            Ok((v / phi.eval(b.radius())?, level))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(supremum(f, terms))
}

/// `max_r Φ(2r)/Φ(r)` over the ladder.
pub fn doubling_constant(phi: &GrowthFunction, radii: &[f64]) -> Result<f64> {
    if radii.is_empty() {
        return Err(invalid("doubling constant needs a nonempty radius ladder"));
    }
    let mut d = f64::NEG_INFINITY;
    for &r in radii {
        d = d.max(phi.eval(2.0 * r)? / phi.eval(r)?);
    }
    Ok(d)
}

/// Checks `1 ≤ D(Φ) < 2^dim`, the growth hypothesis of the generalized
/// Morrey bounds, and returns `D(Φ)`.
pub fn doubling_gate(phi: &GrowthFunction, dim: usize, radii: &[f64]) -> Result<f64> {
    let d = doubling_constant(phi, radii)?;
    let limit = (1u32 << dim) as f64;
    if !(d >= 1.0 && d < limit) {
        return Err(Error::Precondition(format!(
            "doubling constant {d} is outside [1, {limit})"
        )));
    }
    Ok(d)
}

/// `r₀·2^k` for `k < count`.
pub fn dyadic_radii(r0: f64, count: u32) -> Vec<f64> {
    (0..count)
        .map(|k| r0 * libm::ldexp(1.0, k as i32))
        .collect()
}
