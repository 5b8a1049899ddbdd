//! On-disk formats: the comma-separated time series and the `NESS` field
//! snapshot.
//!
//! Snapshot layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `NESS` |
//! | 4 | version (u32) |
//! | 4 | n_points (u32) |
//! | 8 | x_min (f64) |
//! | 8 | x_max (f64) |
//! | 8 | time (f64) |
//! | 16 n | interleaved re, im (f64) |

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nessim::observables::{Sample, TimeSeries};
use nessim::{Complex, Grid, WaveField};

use crate::error::{CliError, Result};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"NESS";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 36;

pub const SERIES_COLUMNS: &str = "t,norm,x_c,peak_density,peak_amplitude,sigma_t";

/// Writes the series with a `#` header carrying the config hash. Floats use
/// the shortest representation that round-trips.
pub fn write_series_csv(path: &Path, series: &TimeSeries, config_hash: &str) -> Result<()> {
    let io = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "# nessim time series").map_err(io)?;
    writeln!(w, "# config_hash: {config_hash}").map_err(io)?;
    writeln!(w, "{SERIES_COLUMNS}").map_err(io)?;
    for i in 0..series.len() {
        let s = series.sample(i);
        writeln!(w, "{},{},{},{},{},{}", s.t, s.norm, s.x_c, s.peak_density, s.peak_amplitude, s.sigma_t)
            .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a series written by [`write_series_csv`]; returns the config hash
/// from the header, if present.
pub fn read_series_csv(path: &Path) -> Result<(Option<String>, TimeSeries)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hash = None;
    let mut series = TimeSeries::new();
    let mut seen_header = false;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(h) = rest.trim().strip_prefix("config_hash:") {
                hash = Some(h.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if line.trim() != SERIES_COLUMNS {
                return Err(CliError::config(path, format!("unexpected column header {line:?}")));
            }
            seen_header = true;
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| CliError::config(path, format!("line {}: {e}", lineno + 1)))?;
        if vals.len() != 6 {
            return Err(CliError::config(path, format!("line {}: expected 6 columns", lineno + 1)));
        }
        series.push(Sample {
            t: vals[0],
            norm: vals[1],
            x_c: vals[2],
            peak_density: vals[3],
            peak_amplitude: vals[4],
            sigma_t: vals[5],
            ..Sample::default()
        });
    }
    Ok((hash, series))
}

/// A decoded snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub version: u32,
    pub x_min: f64,
    pub x_max: f64,
    pub time: f64,
    pub values: Vec<Complex>,
}

impl Snapshot {
    pub fn to_field(&self) -> nessim::Result<WaveField> {
        let grid = Grid::new(self.x_min, self.x_max, self.values.len())?;
        WaveField::new(grid, self.values.clone())
    }
}

pub fn encode_snapshot(time: f64, field: &WaveField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.len() as u32).to_le_bytes());
    out.extend_from_slice(&g.x_min().to_le_bytes());
    out.extend_from_slice(&g.x_max().to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for z in field.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> std::result::Result<Snapshot, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("{} bytes is shorter than the header", bytes.len()));
    }
    if bytes[..4] != SNAPSHOT_MAGIC {
        return Err("bad magic".into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != SNAPSHOT_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let n = u32_at(8) as usize;
    if bytes.len() != HEADER_LEN + 16 * n {
        return Err(format!("expected {} bytes for {n} points, found {}", HEADER_LEN + 16 * n, bytes.len()));
    }
    let values = (0..n)
        .map(|j| {
            let o = HEADER_LEN + 16 * j;
            Complex::new(f64_at(o), f64_at(o + 8))
        })
        .collect();
    Ok(Snapshot { version, x_min: f64_at(12), x_max: f64_at(20), time: f64_at(28), values })
}

pub fn write_snapshot(path: &Path, time: f64, field: &WaveField) -> Result<()> {
    std::fs::write(path, encode_snapshot(time, field)).map_err(|e| CliError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_snapshot(&bytes).map_err(|m| CliError::config(path, m))
}
