//! File formats: sampled grid functions, growth tables and LP dumps.
//!
//! A grid function file is a header line `# dim,h,origin...,counts...`
//! followed by one node value per line in row-major order (axis 1 fastest).
//! Numbers are written with 17 significant digits, so reading a file back
//! reproduces every value bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use sqfn_core::lipopt::LinearProgram;
use sqfn_core::morrey::GrowthFunction;
use sqfn_core::{Grid, GridFunction, Point};

use crate::error::{CliError, Result};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render_grid_function(f: &GridFunction) -> String {
    let g = f.grid();
    let mut header: Vec<String> = vec![g.dim().to_string(), num(g.spacing())];
    header.extend(g.origin().coords().iter().map(|&c| num(c)));
    header.extend(g.counts().iter().map(|c| c.to_string()));
    let mut out = format!("# {}\n", header.join(","));
    for v in f.values() {
        out.push_str(&num(*v));
        out.push('\n');
    }
    out
}

pub fn parse_grid_function(text: &str, path: &Path) -> Result<GridFunction> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines
        .next()
        .ok_or_else(|| CliError::format(path, 1, "empty file"))?;
    let header = header.strip_prefix('#').ok_or_else(|| {
        CliError::format(path, hl, "expected header '# dim,h,origin...,counts...'")
    })?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    let bad = |m: &str| CliError::format(path, hl, m);
    let dim: usize = fields
        .first()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad dimension"))?;
    if !(1..=2).contains(&dim) || fields.len() != 2 + 2 * dim {
        return Err(bad(
            "header must hold dim, h, dim origin coordinates and dim counts",
        ));
    }
    let h: f64 = fields[1].parse().map_err(|_| bad("bad spacing"))?;
    let origin: Vec<f64> = fields[2..2 + dim]
        .iter()
        .map(|s| s.parse().map_err(|_| bad("bad origin")))
        .collect::<Result<_>>()?;
    let counts: Vec<usize> = fields[2 + dim..]
        .iter()
        .map(|s| s.parse().map_err(|_| bad("bad count")))
        .collect::<Result<_>>()?;
    let grid = Grid::new(Point::new(&origin)?, h, &counts)?;
    let values: Vec<f64> = lines
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|_| CliError::format(path, i, format!("not a number: {l:?}")))
        })
        .collect::<Result<_>>()?;
    if values.len() != grid.len() {
        return Err(CliError::format(
            path,
            hl,
            format!(
                "header promises {} values, found {}",
                grid.len(),
                values.len()
            ),
        ));
    }
    Ok(GridFunction::new(grid, values)?)
}

pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_grid_function(&text, path)
}

pub fn write_grid_function(path: &Path, f: &GridFunction) -> Result<()> {
    fs::write(path, render_grid_function(f)).map_err(|e| CliError::io(path, e))
}

/// Two columns `radius,value`; `#` starts a comment, a `radius,value`
/// header line is optional.
pub fn read_growth_table(path: &Path) -> Result<GrowthFunction> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => CliError::format(path, 0, format!("{other:?}")),
        })?;
    let (mut radii, mut values) = (Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if k == 0 && rec.get(0).is_some_and(|s| s.eq_ignore_ascii_case("radius")) {
            continue;
        }
        if rec.len() != 2 {
            return Err(CliError::format(path, line, "expected 'radius,value'"));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::format(path, line, format!("not a number: {s:?}")))
        };
        radii.push(parse(&rec[0])?);
        values.push(parse(&rec[1])?);
    }
    Ok(GrowthFunction::tabulated(radii, values)?)
}

/// Plain-text dump: objective first, then one constraint per line.
pub fn render_lp(lp: &LinearProgram) -> String {
    let row = |c: &[f64]| c.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ");
    let mut out = format!(
        "# vars={} inequalities={} equalities={}\nmax {}\n",
        lp.num_vars(),
        lp.inequalities().len(),
        lp.equalities().len(),
        row(lp.objective())
    );
    for r in lp.equalities() {
        out.push_str(&format!("{} = {}\n", row(&r.coeffs), num(r.rhs)));
    }
    for r in lp.inequalities() {
        out.push_str(&format!("{} <= {}\n", row(&r.coeffs), num(r.rhs)));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
