//! Parsing of flag values that need more than clap's type conversion.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::sync::Arc;

use gprkhs::{Grid, GridFunction64, KernelSpec64};

/// Error tagged with the flag it came from.
#[derive(Debug)]
pub struct FlagError {
    pub flag: &'static str,
    pub message: String,
}

impl FlagError {
    pub fn new(flag: &'static str, message: impl Into<String>) -> Self {
        Self { flag, message: message.into() }
    }
}

pub type FlagResult<T> = Result<T, FlagError>;

pub fn kernel(flag: &'static str, s: &str) -> FlagResult<KernelSpec64> {
    s.parse().map_err(|e| FlagError::new(flag, format!("{e}")))
}

pub fn eps_list(flag: &'static str, s: &str) -> FlagResult<Vec<f64>> {
    let values = float_list(flag, s)?;
    if values.is_empty() {
        return Err(FlagError::new(flag, "needs at least one value"));
    }
    if let Some(v) = values.iter().find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(FlagError::new(flag, format!("values must be finite and > 0, got {v}")));
    }
    Ok(values)
}

pub fn float_list(flag: &'static str, s: &str) -> FlagResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| FlagError::new(flag, format!("'{p}' is not a number"))))
        .collect()
}

/// `builtin:id`, `builtin:sq`, `builtin:sin` or a path to a one-column CSV
/// with one value per grid point. Lines starting with `#` and a non-numeric
/// header line are skipped.
pub fn function(flag: &'static str, s: &str, grid: &Arc<Grid<f64>>) -> FlagResult<GridFunction64> {
    if let Some(name) = s.strip_prefix("builtin:") {
        let f: fn(f64) -> f64 = match name {
            "id" => |t| t,
            "sq" => |t| t * t,
            "sin" => |t| (FRAC_PI_2 * t).sin(),
            other => return Err(FlagError::new(flag, format!("unknown builtin '{other}' (id|sq|sin)"))),
        };
        return Ok(GridFunction64::from_fn(grid.clone(), f));
    }
    let text = fs::read_to_string(s).map_err(|e| FlagError::new(flag, format!("cannot read '{s}': {e}")))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cell = line.split(',').next().unwrap_or("").trim();
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(FlagError::new(flag, format!("{s}:{}: non-finite value {v}", i + 1))),
            Err(_) if values.is_empty() => continue,
            Err(_) => return Err(FlagError::new(flag, format!("{s}:{}: '{cell}' is not a number", i + 1))),
        }
    }
    if values.len() != grid.len() {
        return Err(FlagError::new(flag, format!("'{s}' has {} values but the grid has {} points", values.len(), grid.len())));
    }
    GridFunction64::new(grid.clone(), values).map_err(|e| FlagError::new(flag, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gprkhs::make_grid;

    #[test]
    fn builtins() {
        let g = make_grid(5).unwrap();
        let f = function("--fn", "builtin:sin", &g).unwrap();
        assert!((f.values()[4] - 1.0).abs() < 1e-15);
        assert_eq!(function("--fn", "builtin:sq", &g).unwrap().values()[2], 0.25);
        assert!(function("--fn", "builtin:cube", &g).is_err());
    }

    #[test]
    fn csv_file() {
        let g = make_grid(3).unwrap();
        let dir = std::env::temp_dir().join(format!("gprkhs-inputs-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("f.csv");
        fs::write(&p, "# meta\nvalue\n0\n0.5\n1\n").unwrap();
        let f = function("--w0", p.to_str().unwrap(), &g).unwrap();
        assert_eq!(f.values(), &[0.0, 0.5, 1.0]);
        fs::write(&p, "0\n1\n").unwrap();
        let e = function("--w0", p.to_str().unwrap(), &g).unwrap_err();
        assert_eq!(e.flag, "--w0");
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn eps_lists() {
        assert_eq!(eps_list("--eps", "0.4, 0.2").unwrap(), vec![0.4, 0.2]);
        assert!(eps_list("--eps", "0.4,-1").is_err());
        assert!(eps_list("--eps", "").is_err());
        assert!(eps_list("--eps", "x").is_err());
    }
}
