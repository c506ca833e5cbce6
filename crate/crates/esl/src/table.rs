//! Tabulated candidates: a CSV of `(x, y, z, h)` rows evaluated by exact
//! point lookup.
//!
//! Lookup is keyed on the normalized bit patterns of the coordinates, so a
//! table answers exactly the points it lists and nothing else. Asking for an
//! absent point is a compute error naming the point; there is no
//! interpolation, because an interpolated value would silently change every
//! defect the table was built to measure.

use crate::CliError;
use esl_core::domain::{Point3, TernaryFn};
use esl_core::error::Error;
use std::collections::HashMap;
use std::path::Path;

type Result<T> = esl_core::Result<T>;

pub struct TabulatedFn {
    values: HashMap<[u64; 3], f64>,
}

fn key(p: Point3) -> [u64; 3] {
    [p.x().to_bits(), p.y().to_bits(), p.z().to_bits()]
}

impl TabulatedFn {
    /// Parses CSV text with the exact header `x,y,z,h`. Rows must be four
    /// finite numbers; duplicate points are rejected even when the values
    /// agree, since a duplicate always indicates a generator bug.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                None => {
                    return Err(Error::InvalidParameter(
                        "table is empty; expected header x,y,z,h".to_owned(),
                    ))
                }
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((_, l)) => break l,
            }
        };
        if header.trim() != "x,y,z,h" {
            return Err(Error::InvalidParameter(format!(
                "table header must be \"x,y,z,h\", got {:?}",
                header.trim()
            )));
        }
        let mut values = HashMap::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::InvalidParameter(format!(
                    "table line {}: expected 4 fields, got {}",
                    idx + 1,
                    fields.len()
                )));
            }
            let mut nums = [0.0f64; 4];
            for (slot, field) in nums.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| {
                    Error::InvalidParameter(format!(
                        "table line {}: cannot parse {field:?} as a number",
                        idx + 1
                    ))
                })?;
            }
            let p = Point3::new(nums[0], nums[1], nums[2])?;
            if !nums[3].is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "table line {}: value must be finite, got {}",
                    idx + 1,
                    nums[3]
                )));
            }
            if values.insert(key(p), nums[3]).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "table line {}: duplicate point ({}, {}, {})",
                    idx + 1,
                    p.x(),
                    p.y(),
                    p.z()
                )));
            }
        }
        if values.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        Ok(Self { values })
    }

    /// Reads a table from disk; any parse problem is a config-stage error.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read table {}: {e}", path.display()))
        })?;
        Self::from_csv_str(&text)
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl TernaryFn for TabulatedFn {
    fn eval(&self, p: Point3) -> Result<f64> {
        self.values
            .get(&key(p))
            .copied()
            .ok_or(Error::MissingTablePoint {
                x: p.x(),
                y: p.y(),
                z: p.z(),
            })
    }
}

/// Loads a table, classifying parse failures as config errors.
pub fn load_table(path: &Path) -> std::result::Result<TabulatedFn, CliError> {
    TabulatedFn::load(path).map_err(CliError::config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_looks_up() {
        let t = TabulatedFn::from_csv_str("x,y,z,h\n1,2,3,6.5\n1,2,0,4\n").unwrap();
        assert_eq!(t.len(), 2);
        let p = Point3::new(1.0, 2.0, 3.0).unwrap();
        assert_eq!(t.eval(p).unwrap(), 6.5);
        let b = Point3::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(t.eval(b).unwrap(), 4.0);
    }

    #[test]
    fn missing_point_is_named() {
        let t = TabulatedFn::from_csv_str("x,y,z,h\n1,2,3,6.5\n").unwrap();
        let p = Point3::new(9.0, 2.0, 3.0).unwrap();
        match t.eval(p) {
            Err(Error::MissingTablePoint { x, y, z }) => {
                assert_eq!((x, y, z), (9.0, 2.0, 3.0));
            }
            other => panic!("expected missing point, got {other:?}"),
        }
    }

    #[test]
    fn negative_zero_matches_positive_zero() {
        let t = TabulatedFn::from_csv_str("x,y,z,h\n1,2,0,4\n").unwrap();
        let b = Point3::new(1.0, 2.0, -0.0).unwrap();
        assert_eq!(t.eval(b).unwrap(), 4.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(TabulatedFn::from_csv_str("").is_err());
        assert!(TabulatedFn::from_csv_str("a,b,c,d\n1,2,3,4\n").is_err());
        assert!(TabulatedFn::from_csv_str("x,y,z,h\n1,2,3\n").is_err());
        assert!(TabulatedFn::from_csv_str("x,y,z,h\n1,2,3,oops\n").is_err());
        assert!(TabulatedFn::from_csv_str("x,y,z,h\n1,2,3,4\n1,2,3,4\n").is_err());
        assert!(TabulatedFn::from_csv_str("x,y,z,h\n-1,2,3,4\n").is_err());
        assert!(TabulatedFn::from_csv_str("x,y,z,h\n1,2,3,inf\n").is_err());
    }
}
