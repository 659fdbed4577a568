//! Plain-text coefficient dumps.
//!
//! Line 1: `n N1 .. Nn L1 .. Ln`. Then one coefficient per line in row-major
//! order (last axis fastest), `{:.16e}`. The basis family is not stored; the
//! reader is told which one to use.

use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use crate::diagnostics::csv::sci;
use crate::error::{KsError, Result};
use crate::geometry::DomainSpec;
use crate::spectral::{Parity, SpectralField};

pub fn write_dump<W: Write>(mut out: W, field: &SpectralField) -> std::io::Result<()> {
    let d = field.domain();
    let mut head = vec![d.n().to_string()];
    head.extend(field.resolution().iter().map(|r| r.to_string()));
    head.extend(d.lengths().iter().map(|l| sci(*l)));
    writeln!(out, "{}", head.join(" "))?;
    for c in field.coeffs().iter() {
        writeln!(out, "{}", sci(*c))?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> KsError {
    KsError::InvalidParameter(format!("malformed dump: {}", msg.into()))
}

/// Reads a dump into a field expanded in `parity` (all sine when `None`).
pub fn read_dump<R: BufRead>(input: R, parity: Option<Vec<Parity>>) -> Result<SpectralField> {
    let mut lines = input.lines();
    let head = lines.next().ok_or_else(|| bad("empty input"))??;
    let tokens: Vec<&str> = head.split_whitespace().collect();
    let n: usize = tokens
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("header must start with the dimension"))?;
    if n == 0 || tokens.len() != 1 + 2 * n {
        return Err(bad(format!(
            "header needs {} fields, found {}",
            1 + 2 * n,
            tokens.len()
        )));
    }
    let resolution = tokens[1..=n]
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|e| bad(format!("resolution `{t}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let lengths = tokens[n + 1..]
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| bad(format!("length `{t}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let domain = DomainSpec::new(lengths)?;
    let expected: usize = resolution.iter().product();
    let mut values = Vec::with_capacity(expected);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(
            t.parse::<f64>()
                .map_err(|e| bad(format!("coefficient `{t}`: {e}")))?,
        );
    }
    if values.len() != expected {
        return Err(bad(format!(
            "expected {expected} coefficients, found {}",
            values.len()
        )));
    }
    let coeffs =
        ArrayD::from_shape_vec(IxDyn(&resolution), values).map_err(|e| bad(e.to_string()))?;
    let parity = parity.unwrap_or_else(|| vec![Parity::Sine; n]);
    SpectralField::with_parity(domain, parity, coeffs)
}

pub fn save_dump(path: &Path, field: &SpectralField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_dump(&mut f, field)?;
    f.flush()?;
    Ok(())
}

pub fn load_dump(path: &Path, parity: Option<Vec<Parity>>) -> Result<SpectralField> {
    let f = std::fs::File::open(path)?;
    read_dump(std::io::BufReader::new(f), parity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let d = DomainSpec::new(vec![2.0, 1.5]).unwrap();
        let f = crate::verify::random_field(&d, &[3, 4], 11, 1.0).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("2 3 4 2.0000000000000000e0 1.5000000000000000e0\n"));
        assert_eq!(text.lines().count(), 13);
        let g = read_dump(&buf[..], None).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn parity_is_applied() {
        let d = DomainSpec::cube(2, 1.0).unwrap();
        let f = SpectralField::with_parity(
            d,
            vec![Parity::Cosine, Parity::Sine],
            ArrayD::from_elem(IxDyn(&[2, 2]), 0.5),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &f).unwrap();
        let g = read_dump(&buf[..], Some(f.parity().to_vec())).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_dump(&b""[..], None).is_err());
        assert!(read_dump(&b"2 2 2 1.0\n"[..], None).is_err());
        assert!(read_dump(&b"1 2 1.0\n0.5\n"[..], None).is_err());
        assert!(read_dump(&b"1 2 1.0\n0.5\nx\n"[..], None).is_err());
        assert!(read_dump(&b"1 2 -1.0\n0.5\n0.5\n"[..], None).is_err());
        assert!(read_dump(&b"1 2 1.0\n0.5\n0.25\n"[..], None).is_ok());
    }
}
