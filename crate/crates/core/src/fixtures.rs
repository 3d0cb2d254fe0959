//! Line-oriented oracle fixture files.
//!
//! Each non-blank line that does not start with `#` holds seven
//! whitespace-separated fields: `Z omega R m index E gridError`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::GridSolution;
use crate::params::PhysicalConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub z: f64,
    pub omega: f64,
    pub r: f64,
    pub m: u32,
    /// Position of the level within its m-block, 0 = lowest.
    pub index: u32,
    pub energy: f64,
    pub grid_error: f64,
}

impl Fixture {
    pub fn config(&self) -> Result<PhysicalConfig> {
        PhysicalConfig::new(self.z, self.omega, self.r)
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, name: &str, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse { line, message: format!("missing field {name}") })?;
    tok.parse().map_err(|_| Error::Parse { line, message: format!("invalid {name} {tok:?}") })
}

/// Parse fixture text. Line numbers in errors are 1-based.
pub fn parse(text: &str) -> Result<Vec<Fixture>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut it = body.split_whitespace();
        let fx = Fixture {
            z: field(it.next(), "Z", line)?,
            omega: field(it.next(), "omega", line)?,
            r: field(it.next(), "R", line)?,
            m: field(it.next(), "m", line)?,
            index: field(it.next(), "index", line)?,
            energy: field(it.next(), "E", line)?,
            grid_error: field(it.next(), "gridError", line)?,
        };
        if let Some(extra) = it.next() {
            return Err(Error::Parse { line, message: format!("unexpected trailing field {extra:?}") });
        }
        let finite = [fx.z, fx.omega, fx.r, fx.energy, fx.grid_error].iter().all(|v| v.is_finite());
        if !finite || fx.r <= 0.0 || fx.omega < 0.0 || fx.grid_error <= 0.0 {
            return Err(Error::Parse { line, message: "values out of range".into() });
        }
        out.push(fx);
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<Fixture>> {
    parse(&std::fs::read_to_string(path)?)
}

/// Render fixtures with a header comment; round-trips through [`parse`].
pub fn render(fixtures: &[Fixture], header: &str) -> String {
    let mut s = String::new();
    for line in header.lines() {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "# Z omega R m index E gridError");
    for f in fixtures {
        let _ = writeln!(s, "{} {} {} {} {} {:.17e} {:.3e}", f.z, f.omega, f.r, f.m, f.index, f.energy, f.grid_error);
    }
    s
}

pub fn write(path: &Path, fixtures: &[Fixture], header: &str) -> Result<()> {
    std::fs::write(path, render(fixtures, header))?;
    Ok(())
}

/// One record per level of a grid solution.
pub fn from_grid(config: &PhysicalConfig, m: u32, sol: &GridSolution) -> Vec<Fixture> {
    sol.energies
        .iter()
        .zip(&sol.grid_error)
        .enumerate()
        .map(|(k, (&energy, &grid_error))| Fixture {
            z: config.z,
            omega: config.omega,
            r: config.r,
            m,
            index: k as u32,
            energy,
            grid_error,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let fx = vec![
            Fixture { z: 1.0, omega: 0.25, r: 5.0, m: 0, index: 0, energy: 0.679_612_257_575_369, grid_error: 3.2e-5 },
            Fixture { z: 1.0, omega: 0.25, r: 20.0, m: 0, index: 1, energy: -13.5, grid_error: 1e-4 },
        ];
        let text = render(&fx, "test\nfixtures");
        assert_eq!(parse(&text).unwrap(), fx);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\n   # indented comment\n1 0.25 5 0 0 0.68 1e-4\n";
        assert_eq!(parse(text).unwrap().len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse("# a\n1 0.25 5 0 0 0.68\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!(matches!(parse("1 0.25 5 -1 0 0.68 1e-4").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(parse("1 0.25 5 0 0 0.68 1e-4 7").is_err());
        assert!(parse("1 0.25 5 0 0 0.68 0").is_err());
        assert!(parse("1 0.25 5 0 0 nan 1e-4").is_err());
    }
}
