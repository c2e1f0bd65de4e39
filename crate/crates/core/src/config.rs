//! Run configuration for `liens simulate`.
//!
//! The file is a small TOML subset: four `[section]` tables holding
//! `key = value` pairs. Strings are quoted, numbers are bare, `#` starts a
//! comment. Every key below is recognised; anything else is an error.
//!
//! ```toml
//! [grid]
//! dim = 2             # 2 or 3
//! n = 64              # power of two, >= 8
//! l = 6.283185307179586   # optional, default 2π
//!
//! [physics]
//! nu = 0.1
//!
//! [initial]
//! kind = "taylor_green_2d"  # or taylor_green_3d_embedded, beltrami_abc, random, snapshot
//! amplitude = 1.0           # taylor_green_*: optional, default 1
//! # beltrami_abc: a, b, c (optional, default 1)
//! # random: seed, peak_k, amplitude (all required)
//! # snapshot: path (relative paths resolve against the config file)
//!
//! [run]
//! t_end = 1.0
//! integrator = "lie"        # or "rk4"
//! tol = 1e-10               # lie only, optional
//! max_order = 30            # lie only, optional
//! # rk4_dt = 1e-3           # rk4 only, required
//! output = "out"            # directory, created if missing
//! snapshot_every = 0        # accepted steps between snapshots; 0 = first and last only
//! ```

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::leray::Viscosity;
use crate::lie::{DEFAULT_MAX_ORDER, DEFAULT_TOL};
use crate::oracles::AnalyticFlow;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Analytic(AnalyticFlow),
    Random {
        seed: u64,
        peak_k: usize,
        amplitude: f64,
    },
    Snapshot(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    Lie { tol: f64, max_order: usize },
    Rk4 { dt: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Grid,
    pub nu: Viscosity,
    pub initial: InitialCondition,
    pub t_end: f64,
    pub integrator: Integrator,
    pub output: PathBuf,
    pub snapshot_every: usize,
}

fn err<T>(key: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::Config {
        key: key.to_string(),
        message: message.into(),
    })
}

/// One `[section]` with key bookkeeping for strict rejection.
struct Section<'a> {
    name: &'static str,
    table: &'a Table,
    seen: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str) -> Result<Self> {
        match root.get(name) {
            Some(Value::Table(table)) => Ok(Self {
                name,
                table,
                seen: BTreeSet::new(),
            }),
            Some(_) => err(name, "must be a [section]"),
            None => err(name, "missing section"),
        }
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{k}", self.name)
    }

    fn get(&mut self, k: &'a str) -> Option<&'a Value> {
        let (key, value) = self.table.get_key_value(k)?;
        self.seen.insert(key.as_str());
        Some(value)
    }

    fn float(&mut self, k: &'a str) -> Result<Option<f64>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => err(&self.key(k), "expected a number"),
        }
    }

    fn int(&mut self, k: &'a str) -> Result<Option<i64>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => err(&self.key(k), "expected an integer"),
        }
    }

    fn string(&mut self, k: &'a str) -> Result<Option<&'a str>> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => err(&self.key(k), "expected a quoted string"),
        }
    }

    fn require<T>(&self, k: &str, v: Option<T>) -> Result<T> {
        match v {
            Some(v) => Ok(v),
            None => err(&self.key(k), "missing"),
        }
    }

    fn finite(&mut self, k: &'a str) -> Result<Option<f64>> {
        match self.float(k)? {
            Some(x) if !x.is_finite() => err(&self.key(k), format!("must be finite, got {x}")),
            other => Ok(other),
        }
    }

    fn positive(&mut self, k: &'a str) -> Result<Option<f64>> {
        match self.finite(k)? {
            Some(x) if x <= 0.0 => err(&self.key(k), format!("must be positive, got {x}")),
            other => Ok(other),
        }
    }

    fn count(&mut self, k: &'a str) -> Result<Option<usize>> {
        match self.int(k)? {
            Some(i) if i < 0 => err(&self.key(k), format!("must be non-negative, got {i}")),
            Some(i) => Ok(Some(i as usize)),
            None => Ok(None),
        }
    }

    /// Rejects keys that were present but never read.
    fn finish(self) -> Result<()> {
        match self.table.keys().find(|k| !self.seen.contains(k.as_str())) {
            Some(k) => err(&self.key(k), "unknown or not applicable here"),
            None => Ok(()),
        }
    }
}

fn parse_grid(root: &Table) -> Result<Grid> {
    let mut s = Section::new(root, "grid")?;
    let dim = s.int("dim")?;
    let dim = s.require("dim", dim)?;
    if dim != 2 && dim != 3 {
        return err("grid.dim", format!("must be 2 or 3, got {dim}"));
    }
    let n = s.int("n")?;
    let n = s.require("n", n)?;
    if n < 8 || (n as u64).count_ones() != 1 {
        return err("grid.n", format!("must be a power of two and at least 8, got {n}"));
    }
    let l = s.positive("l")?.unwrap_or(2.0 * PI);
    s.finish()?;
    Grid::new(dim as usize, n as usize, l).or_else(|e| err("grid", e.to_string()))
}

fn parse_physics(root: &Table) -> Result<Viscosity> {
    let mut s = Section::new(root, "physics")?;
    let nu = s.finite("nu")?;
    let nu = s.require("nu", nu)?;
    s.finish()?;
    Viscosity::new(nu).or_else(|e| err("physics.nu", e.to_string()))
}

fn parse_initial(root: &Table, grid: &Grid, base: &Path) -> Result<InitialCondition> {
    let mut s = Section::new(root, "initial")?;
    let kind = s.string("kind")?;
    let kind = s.require("kind", kind)?;
    let init = match kind {
        "taylor_green_2d" | "taylor_green_3d_embedded" => {
            let amplitude = s.finite("amplitude")?.unwrap_or(1.0);
            let flow = if kind == "taylor_green_2d" {
                AnalyticFlow::TaylorGreen2d { amplitude }
            } else {
                AnalyticFlow::TaylorGreen3dEmbedded { amplitude }
            };
            InitialCondition::Analytic(flow)
        }
        "beltrami_abc" => {
            let a = s.finite("a")?.unwrap_or(1.0);
            let b = s.finite("b")?.unwrap_or(1.0);
            let c = s.finite("c")?.unwrap_or(1.0);
            InitialCondition::Analytic(AnalyticFlow::abc(a, b, c))
        }
        "random" => {
            let seed = s.count("seed")?;
            let peak_k = s.count("peak_k")?;
            let amplitude = s.finite("amplitude")?;
            let seed = s.require("seed", seed)? as u64;
            let peak_k = s.require("peak_k", peak_k)?;
            let amplitude = s.require("amplitude", amplitude)?;
            if peak_k == 0 || peak_k > grid.dealias_cutoff() {
                return err(
                    "initial.peak_k",
                    format!("must lie in 1..={}, got {peak_k}", grid.dealias_cutoff()),
                );
            }
            if amplitude < 0.0 {
                return err("initial.amplitude", format!("must be non-negative, got {amplitude}"));
            }
            InitialCondition::Random {
                seed,
                peak_k,
                amplitude,
            }
        }
        "snapshot" => {
            let path = s.string("path")?;
            let path = base.join(s.require("path", path)?);
            if !path.is_file() {
                return err("initial.path", format!("{} does not exist", path.display()));
            }
            InitialCondition::Snapshot(path)
        }
        other => return err("initial.kind", format!("unknown initial condition {other:?}")),
    };
    if let InitialCondition::Analytic(flow) = &init {
        if flow.dim() != grid.dim() {
            return err(
                "initial.kind",
                format!("{kind} needs grid.dim = {}, got {}", flow.dim(), grid.dim()),
            );
        }
    }
    s.finish()?;
    Ok(init)
}

impl RunConfig {
    /// Parses configuration text. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let root: Table = text
            .parse()
            .or_else(|e: toml::de::Error| err("syntax", e.message().to_string()))?;
        if let Some(k) = root
            .keys()
            .find(|k| !["grid", "physics", "initial", "run"].contains(&k.as_str()))
        {
            return err(k, "unknown section");
        }
        let grid = parse_grid(&root)?;
        let nu = parse_physics(&root)?;
        let initial = parse_initial(&root, &grid, base)?;

        let mut s = Section::new(&root, "run")?;
        let t_end = s.finite("t_end")?;
        let t_end = s.require("t_end", t_end)?;
        if t_end < 0.0 {
            return err("run.t_end", format!("must be non-negative, got {t_end}"));
        }
        let integrator = s.string("integrator")?.unwrap_or("lie");
        let integrator = match integrator {
            "lie" => Integrator::Lie {
                tol: s.positive("tol")?.unwrap_or(DEFAULT_TOL),
                max_order: s.count("max_order")?.unwrap_or(DEFAULT_MAX_ORDER),
            },
            "rk4" => {
                let dt = s.positive("rk4_dt")?;
                Integrator::Rk4 {
                    dt: s.require("rk4_dt", dt)?,
                }
            }
            other => return err("run.integrator", format!("expected \"lie\" or \"rk4\", got {other:?}")),
        };
        let output = s.string("output")?;
        let output = base.join(s.require("output", output)?);
        let snapshot_every = s.count("snapshot_every")?.unwrap_or(0);
        s.finish()?;

        Ok(Self {
            grid,
            nu,
            initial,
            t_end,
            integrator,
            output,
            snapshot_every,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .or_else(|e| err("file", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TG: &str = r#"
[grid]
dim = 2
n = 32

[physics]
nu = 0.1

[initial]
kind = "taylor_green_2d"

[run]
t_end = 1
output = "out"
"#;

    fn key_of(text: &str) -> String {
        match RunConfig::parse(text, Path::new("/base")) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config() {
        let c = RunConfig::parse(TG, Path::new("/base")).unwrap();
        assert_eq!(c.grid, Grid::periodic(2, 32).unwrap());
        assert_eq!(c.nu.value(), 0.1);
        assert_eq!(c.initial, InitialCondition::Analytic(AnalyticFlow::taylor_green_2d()));
        assert_eq!(
            c.integrator,
            Integrator::Lie {
                tol: DEFAULT_TOL,
                max_order: DEFAULT_MAX_ORDER
            }
        );
        assert_eq!(c.output, Path::new("/base/out"));
        assert_eq!(c.snapshot_every, 0);
    }

    #[test]
    fn rejects_with_key_names() {
        assert_eq!(key_of(&TG.replace("n = 32", "n = 10")), "grid.n");
        assert_eq!(key_of(&TG.replace("dim = 2", "dim = 4")), "grid.dim");
        assert_eq!(key_of(&TG.replace("nu = 0.1", "nu = -1")), "physics.nu");
        assert_eq!(key_of(&TG.replace("t_end = 1", "t_end = -1")), "run.t_end");
        assert_eq!(key_of(&TG.replace("t_end = 1", "t_end = 1\nspeed = 3")), "run.speed");
        assert_eq!(key_of(&TG.replace("[run]", "[extra]\nx = 1\n[run]")), "extra");
        assert_eq!(key_of(&TG.replace("t_end = 1", "t_end = 1\nrk4_dt = 0.1")), "run.rk4_dt");
        assert_eq!(
            key_of(&TG.replace("t_end = 1", "t_end = 1\nintegrator = \"rk4\"")),
            "run.rk4_dt"
        );
        assert_eq!(
            key_of(&TG.replace("t_end = 1", "t_end = 1\nintegrator = \"rk4\"\nrk4_dt = 0.01\ntol = 1e-9")),
            "run.tol"
        );
        assert_eq!(key_of(&TG.replace("dim = 2", "dim = 3")), "initial.kind");
        assert_eq!(
            key_of(&TG.replace("\"taylor_green_2d\"", "\"snapshot\"\npath = \"missing.bin\"")),
            "initial.path"
        );
        assert_eq!(key_of(&TG.replace("n = 32", "n = \"32\"")), "grid.n");
        assert_eq!(key_of("[grid"), "syntax");
        assert_eq!(key_of(&TG.replace("[physics]\nnu = 0.1\n", "")), "physics");
    }

    #[test]
    fn random_and_rk4() {
        let text = TG
            .replace(
                "kind = \"taylor_green_2d\"",
                "kind = \"random\"\nseed = 7\npeak_k = 3\namplitude = 2.5",
            )
            .replace("t_end = 1", "t_end = 0.5\nintegrator = \"rk4\"\nrk4_dt = 1e-3\nsnapshot_every = 10");
        let c = RunConfig::parse(&text, Path::new(".")).unwrap();
        assert_eq!(
            c.initial,
            InitialCondition::Random {
                seed: 7,
                peak_k: 3,
                amplitude: 2.5
            }
        );
        assert_eq!(c.integrator, Integrator::Rk4 { dt: 1e-3 });
        assert_eq!(c.snapshot_every, 10);
        let bad = text.replace("peak_k = 3", "peak_k = 11");
        assert_eq!(key_of(&bad), "initial.peak_k");
        let missing = text.replace("seed = 7\n", "");
        assert_eq!(key_of(&missing), "initial.seed");
    }
}
