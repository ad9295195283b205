//! Plain-text formats for fields and particle clouds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use super::{EmpiricalMeasure, ModeLattice, SpectralField};
use crate::error::{invalid, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDoc {
    d: usize,
    #[serde(rename = "M")]
    m: usize,
    coeffs: Vec<[f64; 2]>,
}

/// `{"d": .., "M": .., "coeffs": [[re, im], ..]}` in lattice order.
pub fn field_to_json(field: &SpectralField) -> String {
    let doc = FieldDoc {
        d: field.dim(),
        m: field.lattice().cutoff(),
        coeffs: field.coeffs().iter().map(|c| [c.re, c.im]).collect(),
    };
    serde_json::to_string(&doc).expect("field serialises")
}

/// Reads a field as a signed distribution; use
/// [`SpectralField::into_density`] to re-tag it.
pub fn field_from_json(text: &str) -> Result<SpectralField> {
    let doc: FieldDoc = serde_json::from_str(text)?;
    let lattice = ModeLattice::new(doc.d, doc.m)?;
    SpectralField::signed(
        lattice,
        doc.coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
    )
}

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// One particle per row, coordinates comma-separated.
pub fn write_empirical_csv(mu: &EmpiricalMeasure, mut out: impl Write) -> Result<()> {
    for i in 0..mu.len() {
        let row: Vec<String> = mu.particle(i).iter().map(|&x| fmt17(x)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_empirical_csv(input: impl BufRead, lattice: ModeLattice) -> Result<EmpiricalMeasure> {
    let mut coords = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != lattice.dim() {
            return invalid(format!("line {}: expected {} columns", lineno + 1, lattice.dim()));
        }
        for v in row {
            match v.trim().parse::<f64>() {
                Ok(x) => coords.push(x),
                Err(_) => return invalid(format!("line {}: bad number {v:?}", lineno + 1)),
            }
        }
    }
    EmpiricalMeasure::new(coords, lattice)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let lat = ModeLattice::new(1, 3).unwrap();
        let mu = EmpiricalMeasure::new(vec![0.1, 0.123456789012345678, 0.9], lat).unwrap();
        let text = field_to_json(mu.modes());
        assert!(text.starts_with("{\"d\":1,\"M\":3,\"coeffs\":[["));
        assert_eq!(field_from_json(&text).unwrap().coeffs(), mu.modes().coeffs());
        let mut buf = Vec::new();
        write_empirical_csv(&mu, &mut buf).unwrap();
        assert_eq!(read_empirical_csv(&buf[..], lat).unwrap(), mu);
        assert!(field_from_json("{\"d\":1,\"M\":1,\"coeffs\":[],\"x\":1}").is_err());
    }
}
