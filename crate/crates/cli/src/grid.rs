//! Sweep grids: `log:lo:hi:n`, `lin:lo:hi:n` or a comma-separated list.

use std::str::FromStr;

use weakmeas_core::stats::{lin_grid, log_grid};

use crate::config::ConfigError;

/// Largest grid a spec may request.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Log { lo: f64, hi: f64, n: usize },
    Lin { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

fn number(spec: &str, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| ConfigError::Grid { spec: spec.to_string(), reason: format!("`{}`: {e}", s.trim()) })?;
    if !v.is_finite() {
        return Err(ConfigError::Grid { spec: spec.to_string(), reason: format!("`{}` is not finite", s.trim()) });
    }
    Ok(v)
}

impl FromStr for GridSpec {
    type Err = ConfigError;

    fn from_str(spec: &str) -> Result<Self, ConfigError> {
        let err = |reason: &str| ConfigError::Grid { spec: spec.to_string(), reason: reason.to_string() };
        let s = spec.trim();
        if let Some((kind, rest)) = s.split_once(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(err("expected kind:lo:hi:n"));
            };
            let (lo, hi) = (number(spec, lo)?, number(spec, hi)?);
            let n: usize = n.trim().parse().map_err(|_| err("point count must be a non-negative integer"))?;
            if n == 0 || n > MAX_GRID_POINTS {
                return Err(err("point count out of range"));
            }
            let g = match kind.trim() {
                "log" => GridSpec::Log { lo, hi, n },
                "lin" => GridSpec::Lin { lo, hi, n },
                _ => return Err(err("kind must be `log` or `lin`")),
            };
            g.points()?;
            return Ok(g);
        }
        let values = s.split(',').map(|x| number(spec, x)).collect::<Result<Vec<_>, _>>()?;
        if values.len() > MAX_GRID_POINTS {
            return Err(err("too many points"));
        }
        Ok(GridSpec::List(values))
    }
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, ConfigError> {
        let wrap = |r: weakmeas_core::Result<Vec<f64>>| {
            r.map_err(|e| ConfigError::Grid { spec: format!("{self:?}"), reason: e.to_string() })
        };
        match self {
            GridSpec::Log { lo, hi, n } => wrap(log_grid(*lo, *hi, *n)),
            GridSpec::Lin { lo, hi, n } => wrap(lin_grid(*lo, *hi, *n)),
            GridSpec::List(v) => Ok(v.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spec_matches_endpoints() {
        let g: GridSpec = "log:1e-3:1e2:200".parse().unwrap();
        let p = g.points().unwrap();
        assert_eq!(p.len(), 200);
        assert_eq!(p[0], 1e-3);
        assert_eq!(p[199], 1e2);
    }

    #[test]
    fn lists_and_linear_specs() {
        assert_eq!("1, 3,5".parse::<GridSpec>().unwrap().points().unwrap(), vec![1.0, 3.0, 5.0]);
        assert_eq!("lin:0:1:3".parse::<GridSpec>().unwrap().points().unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn malformed_specs_are_rejected() {
        for bad in ["", "log:1:2", "log:0:1:5", "log:2:1:5", "cubic:0:1:3", "lin:0:1:0", "1,,2", "1,inf", "lin:0:1:-3"]
        {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}
