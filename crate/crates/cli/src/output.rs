//! CSV/JSON emission and report records.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes `header` and `rows` to `path`; `None` cells stay empty.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.map(fmt_f64).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Matplotlib script reading `csv`, plotting `ys` against `x`.
pub fn write_plot_template(path: &Path, csv: &str, x: &str, ys: &[&str]) -> Result<()> {
    let cols = ys.iter().map(|y| format!("{y:?}")).collect::<Vec<_>>().join(", ");
    let text = format!(
        "# Plotting template; run from the output directory.\n\
         import csv\n\
         import matplotlib.pyplot as plt\n\
         \n\
         with open({csv:?}) as fh:\n\
         \x20   rows = list(csv.DictReader(fh))\n\
         \n\
         xs = [float(r[{x:?}]) for r in rows]\n\
         for col in [{cols}]:\n\
         \x20   pts = [(x, float(r[col])) for x, r in zip(xs, rows) if r[col] != \"\"]\n\
         \x20   plt.plot([p[0] for p in pts], [p[1] for p in pts], \".\", label=col)\n\
         plt.xlabel({x:?})\n\
         plt.legend()\n\
         plt.savefig({png:?})\n",
        png = csv.replace(".csv", ".png"),
    );
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// One named comparison in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `residual <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// A check that could not be evaluated.
    pub fn errored(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Check {
            name: name.into(),
            residual: f64::NAN,
            tolerance: 0.0,
            passed: false,
            note: Some(format!("error: {err}")),
        }
    }
}

/// Files written by a command and whether its tolerances held.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn nan_fails_a_check() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(Check::at_most("x", 1.0, 1.0).passed);
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["a", "b"], &[vec![Some(1.0), None]]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000000e0,\n");
    }
}
