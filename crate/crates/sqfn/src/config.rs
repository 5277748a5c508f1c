//! Key–value configuration and scenario files.
//!
//! One `key = value` pair per line; `#` starts a comment; keys are case
//! insensitive and `-` may be written for `_`. The same keys are accepted by
//! `--config` files and `--scenario` files, and every command-line flag
//! overrides the file.
//!
//! | key          | value                                          | default        |
//! |--------------|------------------------------------------------|----------------|
//! | `seed`       | integer                                        | `0`            |
//! | `dim`        | `1` or `2`                                     | `1`            |
//! | `half_width` | window half width `W`                          | `2`            |
//! | `h`          | grid spacing                                   | `0.05`         |
//! | `grid`       | `<dim>:<half_width>:<h>`                       |                |
//! | `family`     | `random:<members>:<max_bumps>` or `shell:<ℓ>`  | `random:3:3`   |
//! | `weight`     | `unit`, `power:<a>` or `spike:<height>`        | `power:0.5`    |
//! | `phi`        | `power:<λ>` or `table:<path>`                  | `power:0.5`    |
//! | `alpha`      | `0 < α ≤ 1`                                    | `1`            |
//! | `p`, `kappa` | Morrey exponents                               | `2`, `0.3`     |
//! | `balls`      | `default`, `lattice:<spacing>:<r0>:<levels>`, `centered:<x>[,<y>]:<r0>:<count>` | `default` |
//! | `key_ball`   | `<x>[,<y>]:<r>`                                | center, `W/8`  |
//! | `class_res`  | cells per axis of the test-class partition     | 10 (1-D), 4 (2-D) |
//! | `tmin`, `tmax`, `rho` | cone quadrature                       | `h`, `4·window radius`, `1.25` |
//!
//! Table paths are resolved relative to the file that names them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sqfn_core::intrinsic::ConeQuadrature;
use sqfn_core::morrey::GrowthFunction;
use sqfn_core::verifier::{BallSpec, FamilySpec, ScenarioSpec, WeightSpec};

use crate::error::{CliError, Result};
use crate::io::read_growth_table;

pub const KEYS: &[&str] = &[
    "seed",
    "dim",
    "half_width",
    "h",
    "grid",
    "family",
    "weight",
    "phi",
    "alpha",
    "p",
    "kappa",
    "balls",
    "key_ball",
    "class_res",
    "tmin",
    "tmax",
    "rho",
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    /// 0 for values set from the command line.
    line: usize,
    source: PathBuf,
}

/// Parsed `key = value` pairs together with where they came from.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, Entry>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl KeyValues {
    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::format(source, i + 1, "expected key = value"))?;
            let k = normalize(k);
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::format(
                    source,
                    i + 1,
                    format!("unknown key {k:?}"),
                ));
            }
            let entry = Entry {
                value: v.trim().to_string(),
                line: i + 1,
                source: source.to_path_buf(),
            };
            if entries.insert(k.clone(), entry).is_some() {
                return Err(CliError::format(
                    source,
                    i + 1,
                    format!("duplicate key {k:?}"),
                ));
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Sets `key` as if given on the command line.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let entry = Entry {
            value: value.into(),
            line: 0,
            source: PathBuf::new(),
        };
        self.entries.insert(normalize(key), entry);
    }

    /// Entries of `other` replace those of `self`.
    pub fn merge(mut self, other: KeyValues) -> Self {
        self.entries.extend(other.entries);
        self
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn fail(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        match self.entries.get(key) {
            Some(e) if e.line > 0 => CliError::format(&e.source, e.line, format!("{key}: {msg}")),
            _ => CliError::Usage(format!("--{}: {msg}", key.replace('_', "-"))),
        }
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| self.fail(key, e)))
            .transpose()
    }

    fn with<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| parse(v).map_err(|e| self.fail(key, e)))
            .transpose()
    }

    pub fn phi(&self) -> Result<Option<GrowthFunction>> {
        let Some(v) = self.raw("phi") else {
            return Ok(None);
        };
        if let Some(path) = v.strip_prefix("table:") {
            let path = Path::new(path);
            let entry = &self.entries["phi"];
            let path = match entry.source.parent() {
                Some(dir) if path.is_relative() && entry.line > 0 => dir.join(path),
                _ => path.to_path_buf(),
            };
            return read_growth_table(&path).map(Some);
        }
        self.with("phi", parse_power_phi)
    }

    pub fn balls(&self) -> Result<Option<BallSpec>> {
        self.with("balls", parse_balls)
    }

    /// Cone from `tmin`/`tmax`/`rho`, falling back to `default` per field.
    pub fn cone(&self, default: ConeQuadrature) -> Result<Option<ConeQuadrature>> {
        let tmin: Option<f64> = self.get("tmin")?;
        let tmax: Option<f64> = self.get("tmax")?;
        let rho: Option<f64> = self.get("rho")?;
        if tmin.is_none() && tmax.is_none() && rho.is_none() {
            return Ok(None);
        }
        ConeQuadrature::new(
            tmin.unwrap_or(default.t_min()),
            tmax.unwrap_or(default.t_max()),
            rho.unwrap_or(default.rho()),
        )
        .map(Some)
        .map_err(|e| self.fail(if rho.is_some() { "rho" } else { "tmin" }, e))
    }

    pub fn scenario(&self) -> Result<ScenarioSpec> {
        let mut s = ScenarioSpec::default();
        if let Some((dim, hw, h)) = self.with("grid", parse_grid)? {
            (s.dim, s.half_width, s.h) = (dim, hw, h);
        }
        if let Some(v) = self.get("seed")? {
            s.seed = v;
        }
        if let Some(v) = self.get("dim")? {
            s.dim = v;
        }
        if let Some(v) = self.get("half_width")? {
            s.half_width = v;
        }
        if let Some(v) = self.get("h")? {
            s.h = v;
        }
        if let Some(v) = self.with("family", parse_family)? {
            s.family = v;
        }
        if let Some(v) = self.with("weight", parse_weight)? {
            s.weight = v;
        }
        if let Some(v) = self.phi()? {
            s.growth = v;
        }
        if let Some(v) = self.with("alpha", parse_alpha)? {
            s.alpha = v;
        }
        if let Some(v) = self.get("p")? {
            s.p = v;
        }
        if let Some(v) = self.get("kappa")? {
            s.kappa = v;
        }
        if let Some(v) = self.balls()? {
            s.balls = v;
        }
        if let Some(v) = self.with("key_ball", parse_key_ball)? {
            s.key_ball = Some(v);
        }
        if let Some(v) = self.get("class_res")? {
            s.class_res = Some(v);
        }
        let grid = s.grid().map_err(|e| self.fail("h", e))?;
        s.cone = self.cone(ConeQuadrature::for_grid(&grid))?;
        Ok(s)
    }
}

fn num(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("not a number: {s:?}"))
}

fn int<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim()
        .parse::<T>()
        .map_err(|_| format!("not an integer: {s:?}"))
}

fn coords(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(num).collect()
}

/// `0 < α ≤ 1`; anything else is refused before any work is done.
pub fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a = num(s)?;
    if a > 0.0 && a <= 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must satisfy 0 < alpha <= 1, got {a}"))
    }
}

pub fn parse_power_phi(s: &str) -> std::result::Result<GrowthFunction, String> {
    let lambda = s
        .strip_prefix("power:")
        .ok_or_else(|| format!("expected power:<lambda> or table:<path>, got {s:?}"))?;
    GrowthFunction::power_law(num(lambda)?).map_err(|e| e.to_string())
}

pub fn parse_balls(s: &str) -> std::result::Result<BallSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["default"] => Ok(BallSpec::Default),
        ["lattice", spacing, r0, levels] => Ok(BallSpec::Lattice {
            spacing: num(spacing)?,
            r0: num(r0)?,
            levels: int(levels)?,
        }),
        ["centered", center, r0, count] => Ok(BallSpec::Centered {
            center: coords(center)?,
            r0: num(r0)?,
            count: int(count)?,
        }),
        _ => Err(format!(
            "expected default, lattice:<spacing>:<r0>:<levels> or centered:<x>[,<y>]:<r0>:<count>, got {s:?}"
        )),
    }
}

pub fn parse_family(s: &str) -> std::result::Result<FamilySpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["random", members, bumps] => Ok(FamilySpec::Random {
            members: int(members)?,
            max_bumps: int(bumps)?,
        }),
        ["shell", level] => Ok(FamilySpec::Shell { level: int(level)? }),
        _ => Err(format!(
            "expected random:<members>:<max_bumps> or shell:<level>, got {s:?}"
        )),
    }
}

pub fn parse_weight(s: &str) -> std::result::Result<WeightSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["unit"] => Ok(WeightSpec::Unit),
        ["power", a] => Ok(WeightSpec::Power(num(a)?)),
        ["spike", height] => Ok(WeightSpec::Spike(num(height)?)),
        _ => Err(format!(
            "expected unit, power:<a> or spike:<height>, got {s:?}"
        )),
    }
}

fn parse_key_ball(s: &str) -> std::result::Result<(Vec<f64>, f64), String> {
    let (c, r) = s
        .split_once(':')
        .ok_or_else(|| format!("expected <x>[,<y>]:<r>, got {s:?}"))?;
    Ok((coords(c)?, num(r)?))
}

fn parse_grid(s: &str) -> std::result::Result<(usize, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [d, w, h] => Ok((int(d)?, num(w)?, num(h)?)),
        _ => Err(format!("expected <dim>:<half_width>:<h>, got {s:?}")),
    }
}
