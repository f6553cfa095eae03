//! Touchstone v1 and CSV exchange of S-parameter sweeps.

use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// One frequency point of an N-port sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SPoint {
    pub frequency: f64,
    pub s: CMatrix,
}

/// Parsed Touchstone data.
#[derive(Debug, Clone, PartialEq)]
pub struct Touchstone {
    pub z_ref: f64,
    pub points: Vec<SPoint>,
}

/// Entry order within a frequency record: 2-ports use the historical
/// column-major `S11 S21 S12 S22`, everything else is row-major.
fn entry_order(n: usize) -> Vec<(usize, usize)> {
    if n == 2 {
        vec![(0, 0), (1, 0), (0, 1), (1, 1)]
    } else {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
    }
}

/// Writes GHz / RI Touchstone v1 text.
pub fn write_touchstone(points: &[SPoint], z_ref: f64) -> Result<String> {
    let n = points.first().map_or(0, |p| p.s.dim());
    if n == 0 {
        return Err(Error::Precondition("no S-parameter data to write".into()));
    }
    let mut out = String::new();
    let _ = writeln!(out, "! {n}-port S-parameters");
    let _ = writeln!(out, "# GHz S RI R {z_ref}");
    let order = entry_order(n);
    for p in points {
        if p.s.dim() != n {
            return Err(Error::Precondition("mixed port counts in sweep".into()));
        }
        let _ = write!(out, "{:.12}", p.frequency / 1e9);
        for (k, &(i, j)) in order.iter().enumerate() {
            // 3+ ports: one matrix row per line, at most four pairs per line
            if n > 2 && k > 0 && (k % n).is_multiple_of(4) {
                out.push('\n');
            }
            let z = p.s[(i, j)];
            let _ = write!(out, " {:.12e} {:.12e}", z.re, z.im);
        }
        out.push('\n');
    }
    Ok(out)
}

fn unit_scale(tok: &str) -> Option<f64> {
    match tok {
        "HZ" => Some(1.0),
        "KHZ" => Some(1e3),
        "MHZ" => Some(1e6),
        "GHZ" => Some(1e9),
        _ => None,
    }
}

#[derive(Clone, Copy)]
enum Format {
    Ri,
    Ma,
    Db,
}

/// Parses Touchstone v1 text for an `n_ports`-port network (the port count
/// normally comes from the `.sNp` extension).
pub fn read_touchstone(text: &str, n_ports: usize) -> Result<Touchstone> {
    if n_ports == 0 {
        return Err(Error::Domain("port count must be >= 1".into()));
    }
    let mut scale = 1e9;
    let mut format = Format::Ma;
    let mut z_ref = 50.0;
    let mut seen_option = false;
    let mut values: Vec<(usize, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(opts) = line.strip_prefix('#') {
            if seen_option {
                continue;
            }
            seen_option = true;
            let toks: Vec<String> = opts.split_whitespace().map(str::to_uppercase).collect();
            let mut k = 0;
            while k < toks.len() {
                let t = toks[k].as_str();
                if let Some(s) = unit_scale(t) {
                    scale = s;
                } else {
                    match t {
                        "RI" => format = Format::Ri,
                        "MA" => format = Format::Ma,
                        "DB" => format = Format::Db,
                        "S" => {}
                        "Y" | "Z" | "H" | "G" => {
                            return Err(Error::Parse {
                                line: lineno + 1,
                                message: format!("only S-parameters are supported, found {t}"),
                            })
                        }
                        "R" => {
                            k += 1;
                            z_ref =
                                toks.get(k).and_then(|v| v.parse().ok()).ok_or(Error::Parse {
                                    line: lineno + 1,
                                    message: "missing reference impedance after R".into(),
                                })?;
                        }
                        other => {
                            return Err(Error::Parse {
                                line: lineno + 1,
                                message: format!("unknown option `{other}`"),
                            })
                        }
                    }
                }
                k += 1;
            }
            continue;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("not a number: `{tok}`"),
            })?;
            values.push((lineno + 1, v));
        }
    }
    let per_record = 1 + 2 * n_ports * n_ports;
    if values.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data records".into() });
    }
    if !values.len().is_multiple_of(per_record) {
        return Err(Error::Parse {
            line: values.last().map_or(0, |v| v.0),
            message: format!(
                "{} numbers do not form whole {n_ports}-port records of {per_record}",
                values.len()
            ),
        });
    }
    let order = entry_order(n_ports);
    let mut points = Vec::with_capacity(values.len() / per_record);
    for rec in values.chunks(per_record) {
        let mut s = CMatrix::zeros(n_ports);
        for (k, &(i, j)) in order.iter().enumerate() {
            let (x, y) = (rec[1 + 2 * k].1, rec[2 + 2 * k].1);
            s[(i, j)] = match format {
                Format::Ri => Complex64::new(x, y),
                Format::Ma => Complex64::from_polar(x, y.to_radians()),
                Format::Db => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
            };
        }
        let frequency = rec[0].1 * scale;
        if let Some(prev) = points.last().map(|p: &SPoint| p.frequency) {
            if frequency <= prev {
                return Err(Error::Parse {
                    line: rec[0].0,
                    message: "frequencies must increase".into(),
                });
            }
        }
        points.push(SPoint { frequency, s });
    }
    Ok(Touchstone { z_ref, points })
}

/// CSV with `f_hz` then `sIJ_re,sIJ_im` for every entry in row-major order.
pub fn write_s_csv(points: &[SPoint]) -> String {
    let n = points.first().map_or(0, |p| p.s.dim());
    let mut out = String::from("f_hz");
    for i in 1..=n {
        for j in 1..=n {
            let _ = write!(out, ",s{i}{j}_re,s{i}{j}_im");
        }
    }
    out.push('\n');
    for p in points {
        let _ = write!(out, "{:e}", p.frequency);
        for i in 0..n {
            for j in 0..n {
                let z = p.s[(i, j)];
                let _ = write!(out, ",{:e},{:e}", z.re, z.im);
            }
        }
        out.push('\n');
    }
    out
}
