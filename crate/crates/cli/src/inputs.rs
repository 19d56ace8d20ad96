//! Loading systems, observables and windows from command-line arguments.

use std::path::PathBuf;

use clap::Args;
use cubeavg_core::density::{window_file, Boundary};
use cubeavg_core::random::{random_observable, seeded_system, RandomSystemConfig, ValueRange};
use cubeavg_core::{FiniteSystem, Observable, SubsetWindow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

#[derive(Args, Clone, Debug, Serialize)]
pub struct SystemArgs {
    /// System file (JSON).
    #[arg(long, conflicts_with = "random")]
    pub system: Option<PathBuf>,
    /// Draw a random system from the seed instead of reading a file.
    #[arg(long)]
    pub random: bool,
    /// Largest point count of a random system.
    #[arg(long, default_value_t = 6)]
    pub points: usize,
    /// Largest group order of a random system.
    #[arg(long, default_value_t = 6)]
    pub group_order: usize,
    /// Number of actions of a random system (defaults to the cube dimension).
    #[arg(long)]
    pub actions: Option<usize>,
}

impl SystemArgs {
    /// Loads the system; random systems get `actions` or `default_d` actions.
    pub fn load(&self, seed: u64, default_d: usize) -> Result<FiniteSystem, CliError> {
        match (&self.system, self.random) {
            (Some(path), false) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Ok(FiniteSystem::from_json(&text)?)
            }
            (None, true) => Ok(seeded_system(seed, &self.random_config(default_d)?)),
            _ => Err(CliError::Input("give either --system FILE or --random".into())),
        }
    }

    pub fn random_config(&self, default_d: usize) -> Result<RandomSystemConfig, CliError> {
        let d = self.actions.unwrap_or(default_d);
        if d == 0 || self.points == 0 || self.group_order < 2 {
            return Err(CliError::Input("random systems need ≥ 1 action, ≥ 1 point and group order ≥ 2".into()));
        }
        Ok(RandomSystemConfig::new(d, self.points, self.group_order))
    }
}

/// Parses `indicator:a,b`, `const:c`, `values:v1,v2,…`, `random:SEED` (values
/// in `[0,1]`) or `signed:SEED` (values in `[-1,1]`).
pub fn observable(spec: &str, system: &FiniteSystem) -> Result<Observable, CliError> {
    let n = system.len();
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("observable `{spec}` has no `kind:` prefix")))?;
    let bad = |what: &str| CliError::Input(format!("observable `{spec}`: {what}"));
    let seeded = |range: ValueRange| -> Result<Observable, CliError> {
        let seed: u64 = arg.parse().map_err(|_| bad("seed is not an integer"))?;
        Ok(random_observable(&mut ChaCha8Rng::seed_from_u64(seed), n, range, spec))
    };
    let mut f = match kind {
        "indicator" => {
            let mut points = Vec::new();
            for label in arg.split(',').filter(|l| !l.is_empty()) {
                let x = system
                    .point(label)
                    .or_else(|| label.parse::<usize>().ok().filter(|&x| x < n))
                    .ok_or_else(|| bad(&format!("unknown point `{label}`")))?;
                points.push(x);
            }
            Observable::indicator(n, &points)
        }
        "const" => Observable::constant(n, arg.parse().map_err(|_| bad("constant is not a number"))?),
        "values" => {
            let values = arg
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad(&format!("`{t}` is not a number"))))
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != n {
                return Err(bad(&format!("{} values for {n} points", values.len())));
            }
            Observable::new(spec, values)
        }
        "random" => seeded(ValueRange::Unit)?,
        "signed" => seeded(ValueRange::Signed)?,
        other => return Err(bad(&format!("unknown kind `{other}`"))),
    };
    f.name = spec.to_string();
    Ok(f)
}

/// One spec for every vertex or exactly `2^k` specs.
pub fn vertex_observables(specs: &[String], system: &FiniteSystem, k: usize) -> Result<Vec<Observable>, CliError> {
    let fs = specs.iter().map(|s| observable(s, system)).collect::<Result<Vec<_>, _>>()?;
    match fs.len() {
        1 => Ok(vec![fs[0].clone(); 1 << k]),
        m if m == 1 << k => Ok(fs),
        m => Err(CliError::Input(format!("{m} observables given; expected 1 or {}", 1 << k))),
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct WindowArgs {
    /// Window file (`dims`, `extents`, `origin`, `mode`, `rle` lines).
    #[arg(long, conflicts_with = "random_window")]
    pub window: Option<PathBuf>,
    /// Random window with these extents, drawn from the seed.
    #[arg(long, value_delimiter = ',')]
    pub random_window: Option<Vec<usize>>,
    /// Membership probability of a random window.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Lower corner of a random window.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub origin: Option<Vec<i64>>,
    /// Wrap coordinates around the window.
    #[arg(long)]
    pub toroidal: bool,
}

impl WindowArgs {
    pub fn load(&self, seed: u64) -> Result<SubsetWindow, CliError> {
        let w = match (&self.window, &self.random_window) {
            (Some(path), None) => window_file::read(path)?,
            (None, Some(extents)) => {
                let origin = self.origin.clone().unwrap_or_else(|| vec![0; extents.len()]);
                SubsetWindow::random_lattice(&origin, extents, self.p, seed)?
            }
            _ => return Err(CliError::Input("give either --window FILE or --random-window EXTENTS".into())),
        };
        if self.toroidal {
            Ok(w.with_boundary(Boundary::Toroidal)?)
        } else {
            Ok(w)
        }
    }
}

/// `lo:hi` (half-open) integer range.
pub fn range(spec: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Input(format!("range `{spec}` is not `lo:hi` with lo < hi"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    let (lo, hi): (i64, i64) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if lo >= hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Comma-separated integers.
pub fn int_list(spec: &str) -> Result<Vec<i64>, CliError> {
    spec.split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Input(format!("`{spec}` is not a list of integers"))))
        .collect()
}

/// `3x3` style box sides.
pub fn box_sides(spec: &str) -> Result<Vec<usize>, CliError> {
    spec.split('x')
        .map(|t| t.trim().parse().map_err(|_| CliError::Input(format!("box `{spec}` is not like `3x3`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cubeavg_core::{GroupModel, Perm};

    fn swap() -> FiniteSystem {
        FiniteSystem::new(
            vec!["a".into(), "b".into()],
            vec![0.5, 0.5],
            GroupModel::cyclic(2),
            vec![vec![Perm::from_images(vec![1, 0]).unwrap()]],
        )
        .unwrap()
    }

    #[test]
    fn observable_specs() {
        let s = swap();
        assert_eq!(observable("indicator:a", &s).unwrap().values, vec![1.0, 0.0]);
        assert_eq!(observable("indicator:1", &s).unwrap().values, vec![0.0, 1.0]);
        assert_eq!(observable("const:0.5", &s).unwrap().values, vec![0.5, 0.5]);
        assert_eq!(observable("values:1,-2", &s).unwrap().values, vec![1.0, -2.0]);
        assert_eq!(observable("random:3", &s).unwrap().values, observable("random:3", &s).unwrap().values);
        for bad in ["indicator:c", "values:1", "const:x", "nope:1", "plain"] {
            assert!(observable(bad, &s).is_err(), "{bad}");
        }
    }

    #[test]
    fn small_parsers() {
        assert_eq!(range("1:64").unwrap(), (1, 64));
        assert!(range("5:5").is_err());
        assert_eq!(int_list("1,-2").unwrap(), vec![1, -2]);
        assert_eq!(box_sides("3x4").unwrap(), vec![3, 4]);
    }
}
