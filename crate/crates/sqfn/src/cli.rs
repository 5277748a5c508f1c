//! Argument parsing and dispatch for the `sqfn` binary.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::json;
use sqfn_core::grid::Extension;
use sqfn_core::intrinsic::{
    cone_tail_bound, default_class_resolution, ConeQuadrature, Engine, IntrinsicParams,
};
use sqfn_core::lipopt::{calpha_constraints, HoelderClassSpec};
use sqfn_core::morrey::{
    generalized_morrey_norm, lp_norm, weak_generalized_morrey_norm, weak_l1_norm,
    weak_weighted_morrey_norm, weighted_morrey_norm, GrowthFunction, MorreyParams, NormReport,
};
use sqfn_core::verifier::{
    cone_geometry_check, evaluate, key_estimate_constant, run_theorem, series_tail,
    standard_key_suite, BallSpec, RatioReport, Scenario, ScenarioSpec, TheoremId,
};
use sqfn_core::weights::{
    a1_characteristic, ap_characteristic, doubling_ratio, power_weight, BallFamily, Weight,
    DEFAULT_FLOOR,
};
use sqfn_core::{FunctionFamily, Grid, GridFunction};

use crate::config::{parse_alpha, KeyValues};
use crate::error::{CliError, Result};
use crate::exec::Pool;
use crate::io::{ensure_dir, read_grid_function, render_lp, write_grid_function, write_text};
use crate::report::{emit_report, float};

#[derive(Debug, Parser)]
#[command(
    name = "sqfn",
    version,
    about = "Intrinsic square functions and Morrey-type inequalities on uniform grids",
    arg_required_else_help = true
)]
pub struct Cli {
    /// key = value file supplying defaults for any flag below
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random draw
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate S_α on the nodes of a sampled function (or family)
    Compute(ComputeArgs),
    /// Weighted Lebesgue, Morrey or generalized Morrey norm of a function
    Norm(NormArgs),
    /// A_p, A_1 and doubling diagnostics of a weight over a ball family
    Weights(WeightsArgs),
    /// Measure one inequality on a scenario
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Every theorem ratio of a scenario in one report
    Report(ReportArgs),
}

/// Flags shared by the numerical subcommands; all override `--config`.
#[derive(Debug, Args, Default)]
pub struct Params {
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub class_res: Option<usize>,
    /// power:<λ> or table:<path>
    #[arg(long)]
    pub phi: Option<String>,
    /// default | lattice:<spacing>:<r0>:<levels> | centered:<x>[,<y>]:<r0>:<count>
    #[arg(long)]
    pub balls: Option<String>,
}

impl Params {
    fn overlay(&self, kv: &mut KeyValues) {
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.set(k, v);
            }
        };
        set("alpha", self.alpha.map(float));
        set("p", self.p.map(float));
        set("kappa", self.kappa.map(float));
        set("tmin", self.tmin.map(float));
        set("tmax", self.tmax.map(float));
        set("rho", self.rho.map(float));
        set("class_res", self.class_res.map(|v| v.to_string()));
        set("phi", self.phi.clone());
        set("balls", self.balls.clone());
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExtensionArg {
    Zero,
    Clamp,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Grid function file; repeat for a vector-valued family
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// How f is continued outside the window
    #[arg(long, value_enum, default_value = "zero")]
    pub extension: ExtensionArg,
    /// Also write the test-class constraint program to lp.txt
    #[arg(long)]
    pub dump_lp: bool,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum NormKind {
    Lp,
    WeakL1,
    Morrey,
    WeakMorrey,
    Generalized,
    WeakGeneralized,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: NormKind,
    /// Weight density file on the same grid (default w ≡ 1)
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Directory for norm.json and the per-ball terms
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Weight density file
    #[arg(long, conflicts_with = "power")]
    pub weight: Option<PathBuf>,
    /// Use |x|^a on the grid given by --dim/--half-width/--h
    #[arg(long, allow_hyphen_values = true)]
    pub power: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Directory for weights.csv and weights.json (default: CSV on stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// One theorem on one scenario file
    Thm(ThmArgs),
    /// The key-estimate constant over the standard twelve-scenario suite
    KeySuite(KeySuiteArgs),
    /// The shell series of the generalized Morrey bounds
    Series(SeriesArgs),
    /// Seeded check of the cone/shell distance inequality
    Geometry(GeometryArgs),
}

#[derive(Debug, Args)]
pub struct ThmArgs {
    #[arg(long)]
    pub id: TheoremId,
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also run this many refinement steps (h and ρ−1 halved per step)
    #[arg(long, default_value_t = 0)]
    pub refine: u32,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Args)]
pub struct KeySuiteArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Refinement steps after the base level
    #[arg(long, default_value_t = 1)]
    pub refine: u32,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, default_value = "power:0.5")]
    pub phi: String,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 30)]
    pub levels: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub refine: u32,
    #[command(flatten)]
    pub params: Params,
}

/// Parses `argv` and runs it; returns the process exit status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => {
                    let rendered = e.render().to_string();
                    let msg = rendered
                        .lines()
                        .find(|l| !l.trim().is_empty())
                        .unwrap_or("invalid arguments")
                        .trim_start_matches("error: ")
                        .to_string();
                    eprintln!("{}", CliError::Usage(msg).to_json_line());
                    1
                }
            };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let kv = match &cli.config {
        Some(path) => KeyValues::read(path)?,
        None => KeyValues::default(),
    };
    let seed = cli.seed;
    let pool = Pool::new(cli.jobs).map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    info!("{} worker threads", pool.threads());
    match &cli.command {
        Command::Compute(a) => compute(a, kv, &pool),
        Command::Norm(a) => norm(a, kv),
        Command::Weights(a) => weights(a, kv),
        Command::Verify(VerifyCommand::Thm(a)) => verify_thm(a, kv, seed, &pool),
        Command::Verify(VerifyCommand::KeySuite(a)) => key_suite(a, &pool),
        Command::Verify(VerifyCommand::Series(a)) => series(a),
        Command::Verify(VerifyCommand::Geometry(a)) => geometry(a, &kv, seed),
        Command::Report(a) => report(a, kv, seed, &pool),
    }
}

fn read_family(paths: &[PathBuf]) -> Result<FunctionFamily> {
    let members = paths
        .iter()
        .map(|p| read_grid_function(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(FunctionFamily::new(members)?)
}

fn coords_text(c: &[f64]) -> String {
    c.iter().map(|&v| float(v)).collect::<Vec<_>>().join(" ")
}

fn compute(a: &ComputeArgs, mut kv: KeyValues, pool: &Pool) -> Result<()> {
    a.params.overlay(&mut kv);
    let fam = read_family(&a.input)?;
    let grid = *fam.grid();
    let alpha = kv.get("alpha")?.unwrap_or(1.0);
    let res = kv
        .get("class_res")?
        .unwrap_or_else(|| default_class_resolution(grid.dim()));
    let class = HoelderClassSpec::new(alpha, grid.dim(), res)?;
    let cone = kv
        .cone(ConeQuadrature::for_grid(&grid))?
        .unwrap_or_else(|| ConeQuadrature::for_grid(&grid));
    let ext = match a.extension {
        ExtensionArg::Zero => Extension::Zero,
        ExtensionArg::Clamp => Extension::Clamp,
    };
    let params = IntrinsicParams::new(class.clone(), cone).with_extension(ext);
    ensure_dir(&a.out)?;
    if a.dump_lp {
        write_text(
            &a.out.join("lp.txt"),
            &render_lp(&calpha_constraints(&class)?),
        )?;
    }

    let start = Instant::now();
    let field = Engine::new(params, pool)?.field(&fam)?;
    info!("field on {} nodes in {:.2?}", grid.len(), start.elapsed());

    let mut w = csv::Writer::from_writer(Vec::new());
    let header: &[&str] = if grid.dim() == 1 {
        &["x", "s_alpha"]
    } else {
        &["x", "y", "s_alpha"]
    };
    w.write_record(header)?;
    for (k, v) in field.values().iter().enumerate() {
        let mut row: Vec<String> = grid.node(k).coords().iter().map(|&c| float(c)).collect();
        row.push(float(*v));
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::io(&a.out, e.into_error()))?;
    write_text(&a.out.join("sqfn.csv"), &String::from_utf8_lossy(&bytes))?;
    write_grid_function(&a.out.join("sqfn.grid.csv"), &field)?;
    write_text(&a.out.join("sqfn.svg"), &svg(&field))?;
    let summary = json!({
        "nodes": grid.len(),
        "members": fam.len(),
        "alpha": alpha,
        "class_res": res,
        "class_nodes": class.len(),
        "extension": format!("{ext:?}").to_lowercase(),
        "t_min": cone.t_min(),
        "t_max": cone.t_max(),
        "rho": cone.rho(),
        "tail_bound": cone_tail_bound(&fam, &cone)?,
        "max": field.max_abs(),
    });
    write_text(&a.out.join("summary.json"), &format!("{summary:#}\n"))?;
    Ok(())
}

/// A bare plot: a polyline in 1-D, a gray-scale heat map in 2-D.
fn svg(f: &GridFunction) -> String {
    let g = f.grid();
    let top = f.max_abs().max(f64::MIN_POSITIVE);
    let (wpx, hpx) = (800.0, 400.0);
    let mut out =
        format!("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {wpx} {hpx}\">\n");
    if g.dim() == 1 {
        let n = g.len().max(2) - 1;
        let pts: Vec<String> = f
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                format!(
                    "{:.2},{:.2}",
                    wpx * k as f64 / n as f64,
                    hpx * (1.0 - v / top)
                )
            })
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"black\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
    } else {
        let [nx, ny] = [g.counts()[0], g.counts()[1]];
        let (cw, ch) = (wpx / nx as f64, hpx / ny as f64);
        for (k, v) in f.values().iter().enumerate() {
            let [i, j] = g.multi_index(k);
            let shade = (255.0 * (1.0 - v / top)).round() as u8;
            out.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{cw:.2}\" height=\"{ch:.2}\" fill=\"rgb({shade},{shade},{shade})\"/>\n",
                i as f64 * cw,
                (ny - 1 - j) as f64 * ch,
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn load_weight(path: Option<&Path>, grid: &Grid) -> Result<Weight> {
    match path {
        Some(p) => {
            let w = Weight::new(read_grid_function(p)?, DEFAULT_FLOOR)?;
            if w.grid() != grid {
                return Err(CliError::Usage(format!(
                    "--weight {}: grid differs from the input grid",
                    p.display()
                )));
            }
            Ok(w)
        }
        None => Ok(Weight::unit(*grid)),
    }
}

fn growth(kv: &KeyValues) -> Result<GrowthFunction> {
    Ok(kv
        .phi()?
        .unwrap_or(GrowthFunction::PowerLaw { lambda: 0.5 }))
}

fn norm(a: &NormArgs, mut kv: KeyValues) -> Result<()> {
    a.params.overlay(&mut kv);
    let f = read_grid_function(&a.input)?;
    let grid = *f.grid();
    let w = load_weight(a.weight.as_deref(), &grid)?;
    let balls = kv.balls()?.unwrap_or(BallSpec::Default).build(&grid)?;
    let p: f64 = kv.get("p")?.unwrap_or(2.0);
    let kappa: f64 = kv.get("kappa")?.unwrap_or(0.3);
    let phi = growth(&kv)?;
    let scalar = |value: f64| NormReport {
        value,
        maximizing_ball: 0,
        maximizing_lambda: None,
        terms: Vec::new(),
        vanished: false,
    };
    let r = match a.kind {
        NormKind::Lp => scalar(lp_norm(&f, p, &w)?),
        NormKind::WeakL1 => scalar(weak_l1_norm(&f, &w)?),
        NormKind::Morrey => weighted_morrey_norm(&f, MorreyParams::new(p, kappa)?, &w, &balls)?,
        NormKind::WeakMorrey => weak_weighted_morrey_norm(&f, kappa, &w, &balls)?,
        NormKind::Generalized => generalized_morrey_norm(&f, p, &phi, &balls)?,
        NormKind::WeakGeneralized => weak_generalized_morrey_norm(&f, &phi, &balls)?,
    };
    if r.vanished {
        warn!("f vanishes on every ball of the family");
    }
    let uses_balls = !matches!(a.kind, NormKind::Lp | NormKind::WeakL1);
    let line = json!({
        "kind": a.kind.to_possible_value().map(|v| v.get_name().to_string()),
        "value": r.value,
        "maximizing_ball": uses_balls.then_some(r.maximizing_ball),
        "maximizing_lambda": r.maximizing_lambda,
        "vanished": r.vanished,
        "p": p,
        "kappa": kappa,
        "weight_floor": w.floor(),
        "balls": uses_balls.then(|| balls.provenance().to_string()),
    });
    println!("{line}");
    if let Some(out) = &a.out {
        ensure_dir(out)?;
        write_text(&out.join("norm.json"), &format!("{line}\n"))?;
        if uses_balls {
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(["ball_index", "center", "radius", "term"])?;
            for (k, (b, t)) in balls.balls().iter().zip(&r.terms).enumerate() {
                wtr.write_record([
                    k.to_string(),
                    coords_text(b.center().coords()),
                    float(b.radius()),
                    float(*t),
                ])?;
            }
            let bytes = wtr
                .into_inner()
                .map_err(|e| CliError::io(out, e.into_error()))?;
            write_text(
                &out.join("norm_terms.csv"),
                &String::from_utf8_lossy(&bytes),
            )?;
        }
    }
    Ok(())
}

fn weights(a: &WeightsArgs, mut kv: KeyValues) -> Result<()> {
    a.params.overlay(&mut kv);
    let w = match (&a.weight, a.power) {
        (Some(path), _) => Weight::new(read_grid_function(path)?, DEFAULT_FLOOR)?,
        (None, Some(power)) => {
            let dim = a.dim.or(kv.get("dim")?).unwrap_or(1);
            let hw = a.half_width.or(kv.get("half_width")?).unwrap_or(2.0);
            let h = a.h.or(kv.get("h")?).unwrap_or(0.05);
            power_weight(power, Grid::centered(dim, hw, h)?, DEFAULT_FLOOR)?
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --weight or --power is required".into(),
            ))
        }
    };
    let balls: BallFamily = kv.balls()?.unwrap_or(BallSpec::Default).build(w.grid())?;
    let p: f64 = kv.get("p")?.unwrap_or(2.0);
    let ap = ap_characteristic(&w, p, &balls)?;
    let a1 = a1_characteristic(&w, &balls)?;
    let dbl = doubling_ratio(&w, &balls)?;

    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "ball_index",
        "center",
        "radius",
        "ap_term",
        "a1_term",
        "doubling_term",
    ])?;
    for (k, b) in balls.balls().iter().enumerate() {
        wtr.write_record([
            k.to_string(),
            coords_text(b.center().coords()),
            float(b.radius()),
            float(ap.terms[k]),
            float(a1.terms[k]),
            dbl.terms[k].map(float).unwrap_or_default(),
        ])?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::io("<stdout>", e.into_error()))?;
    let csv_text = String::from_utf8_lossy(&bytes).into_owned();
    let summary = json!({
        "p": p,
        "ap_characteristic": ap.value,
        "ap_maximizer": ap.maximizer,
        "a1_characteristic": a1.value,
        "a1_maximizer": a1.maximizer,
        "doubling": dbl.value,
        "doubling_maximizer": dbl.maximizer,
        "skipped": dbl.skipped,
        "floor": w.floor(),
        "balls": balls.provenance(),
    });
    if !dbl.skipped.is_empty() {
        warn!(
            "{} balls with zero weighted measure skipped",
            dbl.skipped.len()
        );
    }
    match &a.out {
        Some(out) => {
            ensure_dir(out)?;
            write_text(&out.join("weights.csv"), &csv_text)?;
            write_text(&out.join("weights.json"), &format!("{summary:#}\n"))?;
            println!("{summary}");
        }
        None => print!("{csv_text}"),
    }
    Ok(())
}

/// `--config`, then the scenario file, then flags.
fn load_scenario(
    path: &Path,
    params: &Params,
    kv: KeyValues,
    seed: Option<u64>,
) -> Result<ScenarioSpec> {
    let mut kv = kv.merge(KeyValues::read(path)?);
    if let Some(seed) = seed {
        kv.set("seed", seed.to_string());
    }
    params.overlay(&mut kv);
    kv.scenario()
}

fn ladder(spec: &ScenarioSpec, steps: u32) -> Result<Vec<ScenarioSpec>> {
    let mut out = vec![spec.clone()];
    for _ in 0..steps {
        let next = out.last().expect("nonempty").refined()?;
        out.push(next);
    }
    Ok(out)
}

fn verify_thm(a: &ThmArgs, kv: KeyValues, seed: Option<u64>, pool: &Pool) -> Result<()> {
    let spec = load_scenario(&a.scenario, &a.params, kv, seed)?;
    let mut reports = Vec::new();
    for (level, s) in ladder(&spec, a.refine)?.iter().enumerate() {
        let start = Instant::now();
        let scenario = Scenario::build(s)?;
        let ev = evaluate(&scenario, pool)?;
        let mut r = run_theorem(&ev, a.id, pool)?;
        r.extras.push(("ladder_level".into(), level as f64));
        info!(
            "{} level {level}: ratio {:?} in {:.2?}",
            a.id,
            r.ratio,
            start.elapsed()
        );
        reports.push(r);
    }
    ensure_dir(&a.out)?;
    emit_report(&reports, &a.out, a.id.as_str())?;
    Ok(())
}

fn key_suite(a: &KeySuiteArgs, pool: &Pool) -> Result<()> {
    let mut reports = Vec::new();
    let mut constants = Vec::new();
    for level in 0..=a.refine {
        let scenarios = standard_key_suite()
            .iter()
            .map(|s| {
                let mut s = s.clone();
                for _ in 0..level {
                    s = s.refined()?;
                }
                Scenario::build(&s)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let (c, rs) = key_estimate_constant(&scenarios, pool)?;
        info!("key suite level {level}: C_emp = {c:?}");
        constants.push(c);
        reports.extend(rs.into_iter().map(|mut r| {
            r.extras.push(("ladder_level".into(), level as f64));
            r
        }));
    }
    ensure_dir(&a.out)?;
    emit_report(&reports, &a.out, "key_suite")?;
    let drift = match (constants.first(), constants.last()) {
        (Some(Some(a)), Some(Some(b))) => Some((b / a).max(a / b)),
        _ => None,
    };
    let summary = json!({ "c_emp": constants, "drift": drift });
    write_text(
        &a.out.join("key_suite_summary.json"),
        &format!("{summary:#}\n"),
    )?;
    println!("{summary}");
    Ok(())
}

fn series(a: &SeriesArgs) -> Result<()> {
    let mut kv = KeyValues::default();
    kv.set("phi", a.phi.clone());
    let phi = growth(&kv)?;
    let radii = sqfn_core::morrey::dyadic_radii(1e-3, 24);
    let s = series_tail(&phi, a.p, a.dim, a.levels, &radii)?;
    let summary = json!({
        "doubling_constant": s.doubling_constant,
        "q": s.q,
        "partial_sum": s.partial_sum,
        "tail_bound": s.tail_bound,
        "diverges": s.diverges,
    });
    println!("{summary}");
    if let Some(out) = &a.out {
        ensure_dir(out)?;
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["level", "term", "partial_sum"])?;
        let mut acc = 0.0;
        for (l, t) in s.terms.iter().enumerate() {
            acc += t;
            wtr.write_record([(l + 1).to_string(), float(*t), float(acc)])?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| CliError::io(out, e.into_error()))?;
        write_text(&out.join("series.csv"), &String::from_utf8_lossy(&bytes))?;
        write_text(&out.join("series.json"), &format!("{summary:#}\n"))?;
    }
    Ok(())
}

fn geometry(a: &GeometryArgs, kv: &KeyValues, seed: Option<u64>) -> Result<()> {
    let seed = match seed {
        Some(s) => s,
        None => kv.get("seed")?.unwrap_or(0),
    };
    let r = cone_geometry_check(seed, a.count)?;
    println!(
        "{}",
        json!({ "seed": seed, "tuples": r.tuples, "violations": r.violations, "min_slack": r.min_slack })
    );
    if r.violations > 0 {
        return Err(CliError::Domain(sqfn_core::Error::Precondition(format!(
            "{} of {} tuples violate 2t >= 2^(l-1) r",
            r.violations, r.tuples
        ))));
    }
    Ok(())
}

fn report(a: &ReportArgs, kv: KeyValues, seed: Option<u64>, pool: &Pool) -> Result<()> {
    let spec = load_scenario(&a.scenario, &a.params, kv, seed)?;
    let mut reports = Vec::new();
    for (level, s) in ladder(&spec, a.refine)?.iter().enumerate() {
        let scenario = Scenario::build(s)?;
        let ev = evaluate(&scenario, pool)?;
        for id in TheoremId::ALL {
            let mut r = match run_theorem(&ev, id, pool) {
                Ok(r) => r,
                Err(e @ sqfn_core::Error::Precondition(_)) => {
                    warn!("{id}: {e}");
                    refused(id, &scenario, &e)
                }
                Err(e) => return Err(e.into()),
            };
            r.extras.push(("ladder_level".into(), level as f64));
            reports.push(r);
        }
    }
    ensure_dir(&a.out)?;
    emit_report(&reports, &a.out, "report")?;
    Ok(())
}

fn refused(id: TheoremId, s: &Scenario, e: &sqfn_core::Error) -> RatioReport {
    RatioReport {
        theorem: id,
        label: e.to_string(),
        lhs: f64::NAN,
        rhs: f64::NAN,
        ratio: None,
        maximizers: Vec::new(),
        fingerprint: s.fingerprint.clone(),
        flags: vec!["refused".into()],
        extras: Vec::new(),
    }
}
