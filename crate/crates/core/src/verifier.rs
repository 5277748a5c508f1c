//! Empirical ratio harness for the boundedness theorems.
//!
//! A [`ScenarioSpec`] is a small, seed-complete description of a test case;
//! [`Scenario::build`] turns it into a function family, weight, growth
//! function, ball family and square-function parameters on one grid. Every
//! theorem check evaluates both sides of an inequality and records the ratio,
//! which is an observation about the hidden constant and never a proof.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::grid::{
    integrate, l2_aggregate, Ball, FunctionFamily, Grid, GridFunction, Point, Region,
};
use crate::intrinsic::{
    default_class_resolution, default_ell_max, far_field_majorant, split_local_far, ConeQuadrature,
    Engine, IntrinsicParams,
};
use crate::lipopt::HoelderClassSpec;
use crate::math;
use crate::morrey::{
    doubling_constant, doubling_gate, generalized_morrey_norm, lp_norm,
    weak_generalized_morrey_norm, weak_l1_norm, weak_weighted_morrey_norm, weighted_morrey_norm,
    GrowthFunction, MorreyParams,
};
use crate::weights::{
    a1_characteristic, ap_characteristic, maximal_function, maximal_radii, power_weight,
    weighted_measure, BallFamily, Weight, DEFAULT_FLOOR,
};

/// Which inequality a report is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum TheoremId {
    A,
    B,
    Bbar,
    C,
    D,
    T1,
    T2,
    T3,
    T4,
    Key,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::A,
        TheoremId::B,
        TheoremId::Bbar,
        TheoremId::C,
        TheoremId::D,
        TheoremId::T1,
        TheoremId::T2,
        TheoremId::T3,
        TheoremId::T4,
        TheoremId::Key,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::A => "A",
            TheoremId::B => "B",
            TheoremId::Bbar => "Bbar",
            TheoremId::C => "C",
            TheoremId::D => "D",
            TheoremId::T1 => "T1",
            TheoremId::T2 => "T2",
            TheoremId::T3 => "T3",
            TheoremId::T4 => "T4",
            TheoremId::Key => "KEY",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown theorem id {s:?}")))
    }
}

/// How the function family is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// `members` functions, each a sum of 1 to `max_bumps` truncated
    /// quadratics `a·max(0, 1 − |x − c|²/s²)` with seeded parameters.
    Random { members: usize, max_bumps: usize },
    /// One member: the indicator of `2^{level+1}B \ 2^{level}B` for the key ball.
    Shell { level: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Unit,
    /// `|x|^a`, floored.
    Power(f64),
    /// `w ≡ 1` except one node at the window center of the given height.
    Spike(f64),
}

/// Ball family in physical units.
#[derive(Debug, Clone, PartialEq)]
pub enum BallSpec {
    /// Lattice spacing `W/2`, radii `W/8 · 2^k`, `k < 3`, with `W` the half width.
    Default,
    Lattice {
        spacing: f64,
        r0: f64,
        levels: u32,
    },
    Centered {
        center: Vec<f64>,
        r0: f64,
        count: u32,
    },
}

impl BallSpec {
    /// The family on `grid`; `Default` takes `W` from the extent of axis 0.
    pub fn build(&self, grid: &Grid) -> Result<BallFamily> {
        match self {
            BallSpec::Default => {
                let w = 0.5 * (grid.upper(0) - grid.lower(0));
                BallFamily::lattice(grid, w / 2.0, w / 8.0, 3)
            }
            BallSpec::Lattice {
                spacing,
                r0,
                levels,
            } => BallFamily::lattice(grid, *spacing, *r0, *levels),
            BallSpec::Centered { center, r0, count } => {
                BallFamily::centered(grid, point(center, grid.dim())?, *r0, *count)
            }
        }
    }
}

/// A complete, seed-reproducible scenario description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub dim: usize,
    /// The window is `[-half_width, half_width]^dim`.
    pub half_width: f64,
    pub h: f64,
    pub family: FamilySpec,
    pub weight: WeightSpec,
    pub growth: GrowthFunction,
    pub alpha: f64,
    pub p: f64,
    pub kappa: f64,
    pub balls: BallSpec,
    /// Center and radius of the ball used by the key and pointwise estimates;
    /// defaults to the window center and `W/8`.
    pub key_ball: Option<(Vec<f64>, f64)>,
    pub class_res: Option<usize>,
    pub cone: Option<ConeQuadrature>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            dim: 1,
            half_width: 2.0,
            h: 0.05,
            family: FamilySpec::Random {
                members: 3,
                max_bumps: 3,
            },
            weight: WeightSpec::Power(0.5),
            growth: GrowthFunction::PowerLaw { lambda: 0.5 },
            alpha: 1.0,
            p: 2.0,
            kappa: 0.3,
            balls: BallSpec::Default,
            key_ball: None,
            class_res: None,
            cone: None,
        }
    }
}

impl ScenarioSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::centered(self.dim, self.half_width, self.h)
    }

    /// The cone actually used: the explicit one or the grid default.
    pub fn effective_cone(&self) -> Result<ConeQuadrature> {
        Ok(match self.cone {
            Some(c) => c,
            None => ConeQuadrature::for_grid(&self.grid()?),
        })
    }

    /// One ladder step: `h`, `ρ − 1` and `t_min` halved.
    pub fn refined(&self) -> Result<Self> {
        let mut s = self.clone();
        s.cone = Some(self.effective_cone()?.refined());
        s.h = 0.5 * self.h;
        Ok(s)
    }

    /// A canonical one-line description; equal specs give equal strings.
    pub fn canonical(&self) -> String {
        format!(
            "seed={};dim={};half_width={:?};h={:?};family={:?};weight={:?};growth={:?};alpha={:?};p={:?};kappa={:?};balls={:?};key_ball={:?};class_res={:?};cone={:?}",
            self.seed,
            self.dim,
            self.half_width,
            self.h,
            self.family,
            self.weight,
            self.growth,
            self.alpha,
            self.p,
            self.kappa,
            self.balls,
            self.key_ball,
            self.class_res,
            self.cone,
        )
    }
}

/// A built scenario: everything lives on one grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub family: FunctionFamily,
    pub weight: Weight,
    pub growth: GrowthFunction,
    pub params: MorreyParams,
    pub intrinsic: IntrinsicParams,
    pub balls: BallFamily,
    pub key_ball: Ball,
    /// Points of the key ball where pointwise estimates are tested.
    pub sample_points: Vec<Point>,
    pub fingerprint: String,
}

fn point(coords: &[f64], dim: usize) -> Result<Point> {
    if coords.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: coords.len(),
        });
    }
    Point::new(coords)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, half: f64) -> Point {
    if dim == 1 {
        Point::d1(rng.gen_range(-half..half))
    } else {
        Point::d2(rng.gen_range(-half..half), rng.gen_range(-half..half))
    }
}

/// Seeded bump families. The draws do not depend on `h`, so refining the
/// grid samples the same continuous functions.
fn random_family(
    grid: &Grid,
    members: usize,
    max_bumps: usize,
    seed: u64,
    w: f64,
) -> Result<FunctionFamily> {
    if !(1..=5).contains(&members) || !(1..=3).contains(&max_bumps) {
        return Err(invalid("random families have 1-5 members of 1-3 bumps"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(members);
    for _ in 0..members {
        let count = rng.gen_range(1..=max_bumps);
        let bumps: Vec<(Point, f64, f64)> = (0..count)
            .map(|_| {
                let c = random_point(&mut rng, grid.dim(), 0.6 * w);
                let s = rng.gen_range(0.15 * w..0.4 * w);
                let a = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (c, s, a)
            })
            .collect();
        out.push(GridFunction::from_fn(*grid, |x| {
            bumps
                .iter()
                .map(|(c, s, a)| {
                    let d = x.distance(c) / s;
                    a * (1.0 - d * d).max(0.0)
                })
                .sum()
        })?);
    }
    FunctionFamily::new(out)
}

impl Scenario {
    pub fn build(spec: &ScenarioSpec) -> Result<Self> {
        let grid = spec.grid()?;
        let dim = spec.dim;
        let w = spec.half_width;
        let origin = Point::origin(dim);
        let key_ball = match &spec.key_ball {
            Some((c, r)) => Ball::new(point(c, dim)?, *r)?,
            None => Ball::new(origin, w / 8.0)?,
        };
        let family = match spec.family {
            FamilySpec::Random { members, max_bumps } => {
                random_family(&grid, members, max_bumps, spec.seed, w)?
            }
            FamilySpec::Shell { level } => {
                let shell = Region::annulus(key_ball, level)?;
                FunctionFamily::single(GridFunction::from_fn(grid, |x| {
                    if shell.contains(x) {
                        1.0
                    } else {
                        0.0
                    }
                })?)
            }
        };
        let weight = match spec.weight {
            WeightSpec::Unit => Weight::unit(grid),
            WeightSpec::Power(a) => power_weight(a, grid, DEFAULT_FLOOR)?,
            WeightSpec::Spike(height) => {
                if !(height > 0.0) {
                    return Err(invalid("spike height must be positive"));
                }
                let mut v = vec![1.0; grid.len()];
                let mid = grid
                    .nodes()
                    .enumerate()
                    .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                v[mid] = height;
                Weight::new(GridFunction::new(grid, v)?, DEFAULT_FLOOR)?
            }
        };
        let balls = match spec.balls {
            BallSpec::Default => BallFamily::lattice(&grid, w / 2.0, w / 8.0, 3)?,
            ref other => other.build(&grid)?,
        };
        let class = HoelderClassSpec::new(
            spec.alpha,
            dim,
            spec.class_res
                .unwrap_or_else(|| default_class_resolution(dim)),
        )?;
        let intrinsic = IntrinsicParams::new(class, spec.effective_cone()?);
        let params = MorreyParams::new(spec.p, spec.kappa)?;

        let inside = grid.nodes_in(&Region::Ball(key_ball));
        let sample_points: Vec<Point> = if dim == 1 || inside.len() <= 256 {
            inside.iter().map(|&k| grid.node(k)).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
            let mut picked: Vec<usize> = sample(&mut rng, inside.len(), 256).into_vec();
            picked.sort_unstable();
            picked.iter().map(|&i| grid.node(inside[i])).collect()
        };
        let fingerprint = format!(
            "{};samples={}",
            spec.canonical(),
            if dim == 1 || inside.len() <= 256 {
                String::from("all-in-key-ball")
            } else {
                format!("subsample-256-of-{}", inside.len())
            }
        );
        Ok(Self {
            spec: spec.clone(),
            family,
            weight,
            growth: spec.growth.clone(),
            params,
            intrinsic,
            balls,
            key_ball,
            sample_points,
            fingerprint,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.family.grid()
    }

    /// Same scenario with the family multiplied by `c`.
    pub fn with_scaled_family(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.family = self.family.scaled(c);
        s.fingerprint = format!("{};family_scale={c:?}", self.fingerprint);
        s
    }

    /// Same scenario with a different family on the same grid.
    pub fn with_family(&self, family: FunctionFamily, tag: &str) -> Result<Self> {
        if family.grid() != self.grid() {
            return Err(invalid("replacement family lives on another grid"));
        }
        let mut s = self.clone();
        s.family = family;
        s.fingerprint = format!("{};family={tag}", self.fingerprint);
        Ok(s)
    }
}

/// One measured inequality.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RatioReport {
    pub theorem: TheoremId,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, absent when `rhs = 0`.
    pub ratio: Option<f64>,
    pub maximizers: Vec<usize>,
    pub fingerprint: String,
    pub flags: Vec<String>,
    /// Diagnostic columns such as measured weight characteristics.
    pub extras: Vec<(String, f64)>,
}

impl RatioReport {
    fn new(theorem: TheoremId, label: &str, lhs: f64, rhs: f64, s: &Scenario) -> Self {
        let mut flags = Vec::new();
        let ratio = if rhs > 0.0 {
            Some(lhs / rhs)
        } else {
            flags.push("degenerate".to_string());
            if lhs > 0.0 {
                flags.push("anomaly".to_string());
            }
            None
        };
        Self {
            theorem,
            label: label.to_string(),
            lhs,
            rhs,
            ratio,
            maximizers: Vec::new(),
            fingerprint: s.fingerprint.clone(),
            flags,
            extras: Vec::new(),
        }
    }

    fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.push((key.to_string(), value));
        self
    }

    fn flag(mut self, cond: bool, flag: &str) -> Self {
        if cond {
            self.flags.push(flag.to_string());
        }
        self
    }
}

/// A scenario with its square-function field and `ℓ²` aggregate.
#[derive(Debug, Clone)]
pub struct Evaluated<'s> {
    pub scenario: &'s Scenario,
    /// `x ↦ (Σ_j S_α(f_j)(x)²)^{1/2}` at every grid node.
    pub field: GridFunction,
    /// `x ↦ (Σ_j |f_j(x)|²)^{1/2}`.
    pub aggregate: GridFunction,
}

pub fn evaluate<'s>(s: &'s Scenario, exec: &dyn Executor) -> Result<Evaluated<'s>> {
    let engine = Engine::new(s.intrinsic.clone(), exec)?;
    Ok(Evaluated {
        scenario: s,
        field: engine.field(&s.family)?,
        aggregate: l2_aggregate(&s.family),
    })
}

/// Theorems A–D: weighted `L^p` (strong) or weak `L¹` bounds for the field.
pub fn lebesgue_ratio(
    ev: &Evaluated<'_>,
    p: f64,
    weak: bool,
    unit_weight: bool,
) -> Result<RatioReport> {
    let s = ev.scenario;
    let unit = Weight::unit(*s.grid());
    let w = if unit_weight { &unit } else { &s.weight };
    let report = if weak {
        let id = if unit_weight {
            TheoremId::D
        } else {
            TheoremId::B
        };
        let lhs = weak_l1_norm(&ev.field, w)?;
        let rhs = lp_norm(&ev.aggregate, 1.0, w)?;
        let label = if unit_weight {
            "weak L1 of S vs L1 of aggregate"
        } else {
            "weak L1(w) of S vs L1(w) of aggregate"
        };
        RatioReport::new(id, label, lhs, rhs, s)
            .extra("a1_characteristic", a1_characteristic(w, &s.balls)?.value)
    } else {
        if !(p > 1.0) {
            return Err(invalid(format!(
                "strong Lebesgue bound needs p > 1, got {p}"
            )));
        }
        let id = if unit_weight {
            TheoremId::C
        } else {
            TheoremId::A
        };
        let lhs = lp_norm(&ev.field, p, w)?;
        let rhs = lp_norm(&ev.aggregate, p, w)?;
        let label = if unit_weight {
            "Lp of S vs Lp of aggregate"
        } else {
            "Lp(w) of S vs Lp(w) of aggregate"
        };
        RatioReport::new(id, label, lhs, rhs, s).extra(
            "ap_characteristic",
            ap_characteristic(w, p, &s.balls)?.value,
        )
    };
    Ok(report.extra("p", p))
}

/// Weak bound with the maximal function of an arbitrary weight on the right.
pub fn maximal_weak_check(ev: &Evaluated<'_>) -> Result<RatioReport> {
    let s = ev.scenario;
    let lhs = weak_l1_norm(&ev.field, &s.weight)?;
    let mw = maximal_function(&s.weight, &maximal_radii(s.grid()))?;
    let rhs = integrate(&ev.aggregate.mul(&mw)?, &Region::WholeGrid)?;
    Ok(RatioReport::new(
        TheoremId::Bbar,
        "weak L1(w) of S vs L1(Mw) of aggregate",
        lhs,
        rhs,
        s,
    ))
}

/// Weighted Morrey bounds: `T1` strong with `p > 1`, `T2` weak with `p = 1`.
pub fn morrey_ratio(ev: &Evaluated<'_>, theorem: TheoremId) -> Result<RatioReport> {
    let s = ev.scenario;
    let kappa = s.params.kappa();
    let (lhs, rhs, label) = match theorem {
        TheoremId::T1 => {
            if !(s.params.p() > 1.0) {
                return Err(invalid("the strong weighted Morrey bound needs p > 1"));
            }
            (
                weighted_morrey_norm(&ev.field, s.params, &s.weight, &s.balls)?,
                weighted_morrey_norm(&ev.aggregate, s.params, &s.weight, &s.balls)?,
                "L^{p,kappa}(w) of S vs L^{p,kappa}(w) of aggregate",
            )
        }
        TheoremId::T2 => (
            weak_weighted_morrey_norm(&ev.field, kappa, &s.weight, &s.balls)?,
            weighted_morrey_norm(
                &ev.aggregate,
                MorreyParams::new(1.0, kappa)?,
                &s.weight,
                &s.balls,
            )?,
            "WL^{1,kappa}(w) of S vs L^{1,kappa}(w) of aggregate",
        ),
        other => return Err(invalid(format!("{other} is not a weighted Morrey theorem"))),
    };
    let characteristic = if theorem == TheoremId::T1 {
        (
            "ap_characteristic",
            ap_characteristic(&s.weight, s.params.p(), &s.balls)?.value,
        )
    } else {
        (
            "a1_characteristic",
            a1_characteristic(&s.weight, &s.balls)?.value,
        )
    };
    let mut r = RatioReport::new(theorem, label, lhs.value, rhs.value, s)
        .extra(characteristic.0, characteristic.1)
        .extra("kappa", kappa)
        .flag(rhs.vanished, "rhs-vanished");
    r.maximizers = vec![lhs.maximizing_ball, rhs.maximizing_ball];
    Ok(r)
}

/// Generalized Morrey bounds (`T3` strong, `T4` weak), gated on
/// `1 ≤ D(Φ) < 2^dim` over the family's radii.
pub fn generalized_ratio(ev: &Evaluated<'_>, theorem: TheoremId) -> Result<RatioReport> {
    let s = ev.scenario;
    let d = doubling_gate(&s.growth, s.grid().dim(), &s.balls.radii())?;
    let (lhs, rhs, label) = match theorem {
        TheoremId::T3 => (
            generalized_morrey_norm(&ev.field, s.params.p(), &s.growth, &s.balls)?,
            generalized_morrey_norm(&ev.aggregate, s.params.p(), &s.growth, &s.balls)?,
            "L^{p,Phi} of S vs L^{p,Phi} of aggregate",
        ),
        TheoremId::T4 => (
            weak_generalized_morrey_norm(&ev.field, &s.growth, &s.balls)?,
            generalized_morrey_norm(&ev.aggregate, 1.0, &s.growth, &s.balls)?,
            "WL^{1,Phi} of S vs L^{1,Phi} of aggregate",
        ),
        other => {
            return Err(invalid(format!(
                "{other} is not a generalized Morrey theorem"
            )))
        }
    };
    let mut r = RatioReport::new(theorem, label, lhs.value, rhs.value, s)
        .extra("doubling_constant", d)
        .flag(rhs.vanished, "rhs-vanished");
    r.maximizers = vec![lhs.maximizing_ball, rhs.maximizing_ball];
    Ok(r)
}

/// `S_α` of the far part (outside `2B`) at every sample point of `B`.
fn far_field_values(s: &Scenario, exec: &dyn Executor) -> Result<Vec<f64>> {
    let (_, far) = split_local_far(&s.family, &s.key_ball)?;
    if far.is_zero() {
        return Ok(vec![0.0; s.sample_points.len()]);
    }
    let engine = Engine::new(s.intrinsic.clone(), exec)?;
    let table = engine.cone_table_near(&far, &s.key_ball)?;
    s.sample_points.iter().map(|x| table.at(x)).collect()
}

fn max_with_index(v: &[f64]) -> (f64, usize) {
    let mut best = (0.0, 0);
    for (i, &x) in v.iter().enumerate() {
        if x > best.0 {
            best = (x, i);
        }
    }
    best
}

/// Key estimate on one scenario: `max_{x ∈ B} S_α(f^∞)(x)` against the
/// far-field majorant of the family.
pub fn key_estimate(s: &Scenario, exec: &dyn Executor) -> Result<RatioReport> {
    let values = far_field_values(s, exec)?;
    let (lhs, at) = max_with_index(&values);
    let ell_max = default_ell_max(s.grid(), &s.key_ball);
    let m = far_field_majorant(&s.family, &s.key_ball, ell_max)?;
    let mut r = RatioReport::new(
        TheoremId::Key,
        "S of far part on B vs shell-averaged majorant",
        lhs,
        m.value,
        s,
    )
    .extra("ell_max", ell_max as f64)
    .flag(m.escaped, "escaped-window");
    r.maximizers = vec![at];
    Ok(r)
}

/// `C_emp = max lhs/rhs` over the scenarios with `rhs > 0`.
pub fn key_estimate_constant(
    scenarios: &[Scenario],
    exec: &dyn Executor,
) -> Result<(Option<f64>, Vec<RatioReport>)> {
    let reports = scenarios
        .iter()
        .map(|s| key_estimate(s, exec))
        .collect::<Result<Vec<_>>>()?;
    let c = reports
        .iter()
        .filter_map(|r| r.ratio)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    Ok((c, reports))
}

/// The twelve scenarios used to track the key-estimate constant:
/// eight one-dimensional and four two-dimensional, varying seed, `α`,
/// family shape and the key ball.
pub fn standard_key_suite() -> Vec<ScenarioSpec> {
    let mut out = Vec::new();
    let alphas = [1.0, 0.5, 0.8, 0.3];
    for seed in 0..6u64 {
        out.push(ScenarioSpec {
            seed,
            alpha: alphas[seed as usize % alphas.len()],
            family: FamilySpec::Random {
                members: 1 + (seed as usize % 4),
                max_bumps: 3,
            },
            key_ball: Some((vec![0.25 * (seed as f64 - 2.5) / 2.5], 0.25)),
            ..ScenarioSpec::default()
        });
    }
    for (k, level) in [1u32, 2].into_iter().enumerate() {
        out.push(ScenarioSpec {
            seed: 100 + k as u64,
            family: FamilySpec::Shell { level },
            key_ball: Some((vec![0.0], 0.2)),
            ..ScenarioSpec::default()
        });
    }
    for seed in 0..3u64 {
        out.push(ScenarioSpec {
            seed: 200 + seed,
            dim: 2,
            half_width: 1.0,
            h: 0.125,
            alpha: alphas[seed as usize],
            family: FamilySpec::Random {
                members: 2,
                max_bumps: 2,
            },
            key_ball: Some((vec![0.0, 0.0], 0.125)),
            ..ScenarioSpec::default()
        });
    }
    out.push(ScenarioSpec {
        seed: 300,
        dim: 2,
        half_width: 1.0,
        h: 0.125,
        family: FamilySpec::Shell { level: 1 },
        key_ball: Some((vec![0.0, 0.0], 0.15)),
        ..ScenarioSpec::default()
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointwiseMode {
    Weighted,
    Generalized,
}

/// `max_{x ∈ B} S_α(f^∞)(x)` against the ball-level bound used to close the
/// weak Morrey proofs: `‖F‖_{L^{1,κ}(w)} w(B)^{κ−1}` (weighted) or
/// `‖F‖_{L^{1,Φ}} Φ(r)/|B|` (generalized), `F` the aggregate.
pub fn pointwise_estimate_check(
    s: &Scenario,
    mode: PointwiseMode,
    exec: &dyn Executor,
) -> Result<RatioReport> {
    let agg = l2_aggregate(&s.family);
    let b = s.key_ball;
    let (rhs, theorem, label, extra) = match mode {
        PointwiseMode::Weighted => {
            let kappa = s.params.kappa();
            let norm =
                weighted_morrey_norm(&agg, MorreyParams::new(1.0, kappa)?, &s.weight, &s.balls)?;
            let wb = weighted_measure(&s.weight, &Region::Ball(b))?;
            (
                norm.value * math::powf(wb, kappa - 1.0),
                TheoremId::T2,
                "pointwise: S of far part on B vs L^{1,kappa}(w) norm times w(B)^(kappa-1)",
                (
                    "a1_characteristic",
                    a1_characteristic(&s.weight, &s.balls)?.value,
                ),
            )
        }
        PointwiseMode::Generalized => {
            let d = doubling_gate(&s.growth, s.grid().dim(), &s.balls.radii())?;
            let norm = generalized_morrey_norm(&agg, 1.0, &s.growth, &s.balls)?;
            let size = s.grid().lattice_measure(&b);
            (
                norm.value * s.growth.eval(b.radius())? / size,
                TheoremId::T4,
                "pointwise: S of far part on B vs L^{1,Phi} norm times Phi(r)/|B|",
                ("doubling_constant", d),
            )
        }
    };
    let values = far_field_values(s, exec)?;
    let (lhs, at) = max_with_index(&values);
    let mut r = RatioReport::new(theorem, label, lhs, rhs, s).extra(extra.0, extra.1);
    r.maximizers = vec![at];
    Ok(r)
}

/// Partial sums of `Σ_ℓ (D/2^n)^{(ℓ+1)/p}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SeriesTail {
    pub doubling_constant: f64,
    /// `q = D / 2^dim`.
    pub q: f64,
    /// Terms for `ℓ = 1, …, L`.
    pub terms: Vec<f64>,
    pub partial_sum: f64,
    /// `q^{(L+2)/p} / (1 − q^{1/p})`, infinite when `q ≥ 1`.
    pub tail_bound: f64,
    pub diverges: bool,
}

/// The shell series that closes the generalized Morrey bounds.
pub fn series_tail(
    phi: &GrowthFunction,
    p: f64,
    dim: usize,
    levels: u32,
    radii: &[f64],
) -> Result<SeriesTail> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("need p >= 1, got {p}")));
    }
    if levels < 1 {
        return Err(invalid("the series needs at least one term"));
    }
    if !(1..=2).contains(&dim) {
        return Err(invalid(format!("dimension must be 1 or 2, got {dim}")));
    }
    let d = doubling_constant(phi, radii)?;
    let q = d / (1u32 << dim) as f64;
    let terms: Vec<f64> = (1..=levels)
        .map(|l| math::powf(q, (l + 1) as f64 / p))
        .collect();
    let diverges = q >= 1.0;
    let tail_bound = if diverges {
        f64::INFINITY
    } else {
        math::powf(q, (levels + 2) as f64 / p) / (1.0 - math::powf(q, 1.0 / p))
    };
    Ok(SeriesTail {
        doubling_constant: d,
        q,
        partial_sum: terms.iter().sum(),
        terms,
        tail_bound,
        diverges,
    })
}

/// Outcome of the cone/shell geometry check.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeometryReport {
    pub tuples: usize,
    pub violations: usize,
    /// Smallest observed `2t − 2^{ℓ−1} r_B`.
    pub min_slack: f64,
}

/// Samples `x ∈ B`, `z ∈ 2^{ℓ+1}B \ 2^ℓB` and `(y, t)` with `|x − y| < t` and
/// `|y − z| ≤ t`, and checks `2t ≥ 2^{ℓ−1} r_B` exactly.
pub fn cone_geometry_check(seed: u64, count: usize) -> Result<GeometryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GeometryReport {
        tuples: 0,
        violations: 0,
        min_slack: f64::INFINITY,
    };
    let unit_dir = |rng: &mut ChaCha8Rng, dim: usize| -> Point {
        if dim == 1 {
            Point::d1(if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        } else {
            let a = rng.gen_range(0.0..core::f64::consts::TAU);
            Point::d2(libm::cos(a), libm::sin(a))
        }
    };
    while report.tuples < count {
        let dim = 1 + (report.tuples % 2);
        let r = libm::exp(rng.gen_range(-4.0..2.0));
        let center = random_point(&mut rng, dim, 3.0);
        let ball = Ball::new(center, r)?;
        let level = rng.gen_range(1..=6u32);
        let shell = Region::annulus(ball, level)?;
        let x = center.add_scaled(r * rng.gen_range(0.0..1.0), &unit_dir(&mut rng, dim));
        let rz = libm::ldexp(r, level as i32) * rng.gen_range(1.0..2.0);
        let z = center.add_scaled(rz, &unit_dir(&mut rng, dim));
        if !ball.contains(&x) || !shell.contains(&z) {
            continue;
        }
        // y anywhere near the segment, t just large enough for both constraints
        let y = x
            .add_scaled(rng.gen_range(-0.5..1.5), &z.add_scaled(-1.0, &x))
            .add_scaled(r * rng.gen_range(0.0..2.0), &unit_dir(&mut rng, dim));
        let t = (x.distance(&y) * (1.0 + 1e-12) + f64::MIN_POSITIVE).max(y.distance(&z))
            * (1.0 + rng.gen_range(0.0..0.5));
        if !(x.distance(&y) < t && y.distance(&z) <= t) {
            continue;
        }
        report.tuples += 1;
        let slack = 2.0 * t - libm::ldexp(r, level as i32 - 1);
        report.min_slack = report.min_slack.min(slack / r);
        if slack < 0.0 {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// Runs one theorem on a scenario; `KEY` ignores `ev.field`.
pub fn run_theorem(ev: &Evaluated<'_>, id: TheoremId, exec: &dyn Executor) -> Result<RatioReport> {
    let s = ev.scenario;
    match id {
        TheoremId::A => lebesgue_ratio(ev, s.params.p(), false, false),
        TheoremId::B => lebesgue_ratio(ev, 1.0, true, false),
        TheoremId::C => lebesgue_ratio(ev, s.params.p(), false, true),
        TheoremId::D => lebesgue_ratio(ev, 1.0, true, true),
        TheoremId::Bbar => maximal_weak_check(ev),
        TheoremId::T1 | TheoremId::T2 => morrey_ratio(ev, id),
        TheoremId::T3 | TheoremId::T4 => generalized_ratio(ev, id),
        TheoremId::Key => key_estimate(s, exec),
    }
}
