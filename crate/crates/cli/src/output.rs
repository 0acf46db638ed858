//! Deterministic CSV and metadata emission.
//!
//! Numbers are printed in C-style `%.12e` (13 significant digits, signed
//! two-digit exponent), which round-trips: parsing a cell and re-emitting it
//! reproduces the byte-identical cell.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// C-style `%.12e` formatting.
pub fn fmt_e12(x: f64) -> String {
    let raw = format!("{:.12e}", x);
    // Rust prints `1.5e7` / `1.5e-7`; normalize the exponent to `e+07` form.
    let (mantissa, exp) = raw.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("numeric exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// One table column of a series file.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Render `time_s` plus the given columns as CSV.
pub fn render_series_csv(times: &[f64], columns: &[Column]) -> String {
    let mut out = String::new();
    out.push_str("time_s");
    for c in columns {
        out.push(',');
        out.push_str(&c.name);
    }
    out.push('\n');
    for (i, t) in times.iter().enumerate() {
        out.push_str(&fmt_e12(*t));
        for c in columns {
            out.push(',');
            out.push_str(&fmt_e12(c.values[i]));
        }
        out.push('\n');
    }
    out
}

/// Render `name,value_start,value_end` parameter rows as CSV.
pub fn render_params_csv(rows: &[(String, f64, f64)]) -> String {
    let mut out = String::from("name,value_start,value_end\n");
    for (name, v0, v1) in rows {
        let _ = writeln!(out, "{name},{},{}", fmt_e12(*v0), fmt_e12(*v1));
    }
    out
}

/// Parse a series CSV back into (times, columns); used by the round-trip
/// checks and available to downstream tooling.
pub fn parse_series_csv(text: &str) -> Result<(Vec<f64>, Vec<Column>), String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?;
    let names: Vec<&str> = header.split(',').collect();
    if names.first() != Some(&"time_s") {
        return Err("first column must be time_s".into());
    }
    let mut times = Vec::new();
    let mut columns: Vec<Column> =
        names[1..].iter().map(|n| Column { name: n.to_string(), values: Vec::new() }).collect();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() {
            return Err(format!("row has {} cells, header has {}", cells.len(), names.len()));
        }
        times.push(cells[0].parse::<f64>().map_err(|e| e.to_string())?);
        for (col, cell) in columns.iter_mut().zip(&cells[1..]) {
            col.values.push(cell.parse::<f64>().map_err(|e| e.to_string())?);
        }
    }
    Ok((times, columns))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e12_format_is_c_style() {
        assert_eq!(fmt_e12(1.6e7), "1.600000000000e+07");
        assert_eq!(fmt_e12(-2.0e-7), "-2.000000000000e-07");
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(1.0e100), "1.000000000000e+100");
    }

    #[test]
    fn series_round_trips_exactly() {
        let times = vec![0.0, 1.3e-8, 2.6e-8];
        let cols = vec![
            Column { name: "n_1".into(), values: vec![1.0, 0.751239871234, 0.5] },
            Column { name: "decay_prob".into(), values: vec![0.0, 1.2e-4, 2.4e-4] },
        ];
        let text = render_series_csv(&times, &cols);
        let (t2, c2) = parse_series_csv(&text).unwrap();
        let again = render_series_csv(&t2, &c2);
        assert_eq!(text, again);
    }

    #[test]
    fn params_rows_render() {
        let rows =
            vec![("kappa".to_string(), 1.5625e7, 1.5625e7), ("j_hop".to_string(), 2.0e7, 2.0e7)];
        let text = render_params_csv(&rows);
        assert!(text.starts_with("name,value_start,value_end\n"));
        assert!(text.contains("kappa,1.562500000000e+07,1.562500000000e+07"));
    }
}
