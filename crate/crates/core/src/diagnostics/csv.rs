//! Per-run energy CSV.
//!
//! Columns: `t`, then `<name>_l2, <name>_grad, <name>_lap, <name>_gradlap,
//! <name>_bilap` for every component, then the same five for `total`.
//! Values use scientific notation with 17 significant digits.

use std::io::Write;

use crate::spectral::Norms;

use super::EnergyRecord;

/// Formats a float with 17 significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(names: &[String]) -> String {
    let mut cols = vec!["t".to_string()];
    for name in names
        .iter()
        .map(String::as_str)
        .chain(std::iter::once("total"))
    {
        cols.extend(Norms::LABELS.iter().map(|l| format!("{name}_{l}")));
    }
    cols.join(",")
}

/// Component names used for gradient runs (`u1, u2, ...`).
pub fn component_names(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("u{j}")).collect()
}

pub fn write_energy_csv<W: Write>(
    mut out: W,
    records: &[EnergyRecord],
    names: &[String],
) -> std::io::Result<()> {
    writeln!(out, "{}", header(names))?;
    for r in records {
        let mut cols = vec![sci(r.t)];
        for n in r.fields.iter().chain(std::iter::once(&r.totals)) {
            cols.extend(n.as_array().iter().map(|v| sci(*v)));
        }
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
