//! File formats and atomic output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use sphreg::format::decimal;
use sphreg::{CubatureRule, HarmonicCoefficients};

use crate::error::{CliError, CliResult};

/// Tolerance on sample point coordinates, relative to `max(1, ρ)`.
pub const POINT_TOLERANCE: f64 = 1e-9;

pub fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::missing(format!("{}: file not found", path.display())),
        _ => CliError::missing(format!("{}: {e}", path.display())),
    })
}

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn atomic_write(path: &Path, contents: &str) -> CliResult<()> {
    let fail = |e: io::Error| CliError::numerical(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(fail)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::invalid(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(fail)
}

/// CSV `x,y,z,weight`, one row per rule point.
pub fn rule_csv(rule: &CubatureRule) -> String {
    let mut out = String::from("x,y,z,weight\n");
    for (p, w) in rule.points().iter().zip(rule.weights()) {
        let [x, y, z] = p.cartesian();
        out.push_str(&format!("{},{},{},{}\n", decimal(x), decimal(y), decimal(z), decimal(*w)));
    }
    out
}

/// CSV `k,j,value` in canonical coefficient order.
pub fn coefficients_csv(c: &HarmonicCoefficients) -> String {
    let mut out = String::from("k,j,value\n");
    for (k, j, v) in c.iter() {
        out.push_str(&format!("{k},{j},{}\n", decimal(v)));
    }
    out
}

/// CSV `x,y,z,value` with every point on the canonical rule, in rule order.
pub fn samples_csv(rule: &CubatureRule, values: &[f64]) -> String {
    let mut out = String::from("x,y,z,value\n");
    for (p, v) in rule.points().iter().zip(values) {
        let [x, y, z] = p.cartesian();
        out.push_str(&format!("{},{},{},{}\n", decimal(x), decimal(y), decimal(z), decimal(*v)));
    }
    out
}

/// Parses a sample file and checks it row by row against `rule`.
pub fn parse_samples(text: &str, rule: &CubatureRule, source: &str) -> CliResult<Vec<f64>> {
    let bad = |line: u64, what: String| CliError::invalid(format!("{source}: line {line}: {what}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| bad(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["x", "y", "z", "value"] {
        return Err(bad(1, "header must be `x,y,z,value`".into()));
    }
    let tol = POINT_TOLERANCE * rule.radius().max(1.0);
    let mut values = Vec::with_capacity(rule.len());
    let mut last_line = 1;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(last_line + 1);
            bad(line, format!("malformed row ({e})"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(last_line + 1);
        last_line = line;
        let mut field = [0.0; 4];
        for (slot, (s, name)) in field.iter_mut().zip(record.iter().zip(["x", "y", "z", "value"])) {
            *slot = s
                .parse::<f64>()
                .map_err(|_| bad(line, format!("{name}: `{s}` is not a number")))?;
            if !slot.is_finite() {
                return Err(bad(line, format!("{name}: value is not finite")));
            }
        }
        let Some(p) = rule.points().get(i) else {
            return Err(bad(line, format!("more rows than the {} rule points", rule.len())));
        };
        let expected = p.cartesian();
        if expected.iter().zip(&field[..3]).any(|(a, b)| (a - b).abs() > tol) {
            return Err(bad(
                line,
                format!(
                    "point does not match rule point {i} of the rule (M = {}, rho = {})",
                    rule.max_degree(),
                    rule.radius()
                ),
            ));
        }
        values.push(field[3]);
    }
    if values.len() != rule.len() {
        return Err(bad(
            last_line + 1,
            format!(
                "file truncated: expected {} rows, found {}",
                rule.len(),
                values.len()
            ),
        ));
    }
    Ok(values)
}

pub fn read_samples(path: &Path, rule: &CubatureRule) -> CliResult<Vec<f64>> {
    let text = read_input(path)?;
    parse_samples(&text, rule, &path.display().to_string())
}
