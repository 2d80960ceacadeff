//! `sphgrid v1` map files.
//!
//! A header line `sphgrid v1 <n_rings> <n_phi> <ell> <seed>` is followed
//! either by one comma-separated text row per ring or by a block of
//! little-endian `f64` values in pixel order. Readers detect which.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "sphgrid v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapHeader {
    pub n_rings: usize,
    pub n_phi: usize,
    pub ell: u32,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MapFormat {
    #[default]
    Csv,
    Binary,
}

impl std::str::FromStr for MapFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "text" => Ok(MapFormat::Csv),
            "bin" | "binary" => Ok(MapFormat::Binary),
            _ => Err(Error::Config(format!("unknown map format '{s}'"))),
        }
    }
}

/// Serialize a map to bytes.
pub fn encode(header: &MapHeader, values: &[f64], format: MapFormat) -> Result<Vec<u8>> {
    let n = header.n_rings * header.n_phi;
    if values.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: values.len(),
        });
    }
    let mut out = Vec::with_capacity(n * 8 + 64);
    writeln!(
        out,
        "{MAGIC} {} {} {} {}",
        header.n_rings, header.n_phi, header.ell, header.seed
    )
    .expect("write to Vec");
    match format {
        MapFormat::Csv => {
            for row in values.chunks_exact(header.n_phi) {
                for (k, v) in row.iter().enumerate() {
                    if k > 0 {
                        out.push(b',');
                    }
                    // Display for f64 is the shortest string that round-trips
                    write!(out, "{v}").expect("write to Vec");
                }
                out.push(b'\n');
            }
        }
        MapFormat::Binary => {
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Parse a map from bytes, detecting the body format.
pub fn decode(bytes: &[u8]) -> Result<(MapHeader, Vec<f64>, MapFormat)> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let head = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Format("header is not text".into()))?;
    let header = parse_header(head)?;
    let body = &bytes[nl + 1..];
    let n = header.n_rings * header.n_phi;

    if let Some(values) = parse_csv(body, &header) {
        return Ok((header, values?, MapFormat::Csv));
    }
    if body.len() == 8 * n {
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        return Ok((header, values, MapFormat::Binary));
    }
    Err(Error::Format(format!(
        "body is neither {} text rows nor {} binary bytes",
        header.n_rings,
        8 * n
    )))
}

fn parse_header(line: &str) -> Result<MapHeader> {
    let rest = line
        .trim_end()
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Format(format!("bad magic in header '{line}'")))?;
    let fields: Vec<&str> = rest.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::Format(format!("header needs 4 fields, got {}", fields.len())));
    }
    let bad = |what: &str| Error::Format(format!("bad {what} in header"));
    let header = MapHeader {
        n_rings: fields[0].parse().map_err(|_| bad("n_rings"))?,
        n_phi: fields[1].parse().map_err(|_| bad("n_phi"))?,
        ell: fields[2].parse().map_err(|_| bad("ell"))?,
        seed: fields[3].parse().map_err(|_| bad("seed"))?,
    };
    if header.n_rings == 0 || header.n_phi == 0 {
        return Err(bad("grid size"));
    }
    Ok(header)
}

// None: not a text body. Some(Err): text body with bad content.
fn parse_csv(body: &[u8], header: &MapHeader) -> Option<Result<Vec<f64>>> {
    let text = std::str::from_utf8(body).ok()?;
    if !text
        .bytes()
        .all(|b| b.is_ascii_graphic() || b == b'\n' || b == b'\r' || b == b' ')
    {
        return None;
    }
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != header.n_rings {
        return None;
    }
    let mut values = Vec::with_capacity(header.n_rings * header.n_phi);
    for (i, row) in rows.iter().enumerate() {
        let before = values.len();
        for field in row.split(',') {
            match field.trim().parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) => {
                    return Some(Err(Error::Format(format!(
                        "ring {i}: cannot parse '{}'",
                        field.trim()
                    ))))
                }
            }
        }
        if values.len() - before != header.n_phi {
            return Some(Err(Error::Shape {
                expected: header.n_phi,
                got: values.len() - before,
            }));
        }
    }
    Some(Ok(values))
}

pub fn write_map(path: &Path, header: &MapHeader, values: &[f64], format: MapFormat) -> Result<()> {
    let bytes = encode(header, values, format)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_map(path: &Path) -> Result<(MapHeader, Vec<f64>, MapFormat)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (MapHeader, Vec<f64>) {
        let header = MapHeader {
            n_rings: 4,
            n_phi: 8,
            ell: 2,
            seed: u64::MAX,
        };
        let values = (0..32)
            .map(|k| match k {
                0 => 0.1 + 0.2,
                1 => -0.0,
                2 => 1e-310,
                3 => f64::MAX,
                _ => (k as f64).sin() / 3.0,
            })
            .collect();
        (header, values)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (h, v) = sample();
        for fmt in [MapFormat::Csv, MapFormat::Binary] {
            let bytes = encode(&h, &v, fmt).unwrap();
            let (h2, v2, f2) = decode(&bytes).unwrap();
            assert_eq!(h2, h);
            assert_eq!(f2, fmt);
            assert_eq!(v.len(), v2.len());
            for (a, b) in v.iter().zip(&v2) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"hello\n1,2").is_err());
        assert!(decode(b"sphgrid v1 4 8 2\n").is_err());
        let (h, v) = sample();
        let mut bytes = encode(&h, &v, MapFormat::Binary).unwrap();
        bytes.pop();
        assert!(decode(&bytes).is_err());
        let (h, v) = sample();
        assert!(encode(&h, &v[1..], MapFormat::Csv).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.sph");
        let (h, v) = sample();
        write_map(&path, &h, &v, MapFormat::Binary).unwrap();
        let (_, back, _) = read_map(&path).unwrap();
        assert_eq!(back, v);
        assert!(matches!(read_map(&dir.path().join("missing")), Err(Error::Io { .. })));
    }
}
