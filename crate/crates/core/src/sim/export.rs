// SPDX-License-Identifier: Apache-2.0

//! Trace files: CSV (`cycle,v_in,m_hat,m,v_out`, voltages to 9 significant
//! digits) and a raw little-endian `u16` stream of `m_hat` codes.

use std::io::{self, BufRead, Read, Write};

use super::{Trace, TraceRecord};

pub const CSV_HEADER: &str = "cycle,v_in,m_hat,m,v_out";

#[derive(Debug, thiserror::Error)]
pub enum TraceFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("raw code stream has an odd number of bytes ({0})")]
    OddLength(usize),
}

/// Format `v` with 9 significant digits in positional notation.
pub fn sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.cycle,
            sig9(r.v_in),
            r.m_hat,
            r.m,
            sig9(r.v_out)
        )?;
    }
    out.flush()
}

/// Parse a trace CSV. Saturation events are not part of the file format and
/// come back as zero.
pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Trace, TraceFileError> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim();
        if idx == 0 {
            if line != CSV_HEADER {
                return Err(TraceFileError::Parse {
                    line: line_no,
                    msg: format!("expected header `{CSV_HEADER}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(TraceFileError::Parse {
                line: line_no,
                msg: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let bad = |what: &str| TraceFileError::Parse {
            line: line_no,
            msg: format!("bad {what}"),
        };
        records.push(TraceRecord {
            cycle: fields[0].parse().map_err(|_| bad("cycle"))?,
            v_in: fields[1].parse().map_err(|_| bad("v_in"))?,
            m_hat: fields[2].parse().map_err(|_| bad("m_hat"))?,
            m: fields[3].parse().map_err(|_| bad("m"))?,
            v_out: fields[4].parse().map_err(|_| bad("v_out"))?,
        });
    }
    Ok(Trace {
        records,
        saturation_events: 0,
    })
}

pub fn write_raw_codes<W: Write>(records: &[TraceRecord], mut out: W) -> io::Result<()> {
    let mut buf = Vec::with_capacity(records.len() * 2);
    for r in records {
        buf.extend_from_slice(&r.m_hat.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()
}

pub fn read_raw_codes<R: Read>(mut input: R) -> Result<Vec<u16>, TraceFileError> {
    let mut buf = Vec::new();
    input.read_to_end(&mut buf)?;
    if buf.len() % 2 != 0 {
        return Err(TraceFileError::OddLength(buf.len()));
    }
    Ok(buf
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(3.6), "3.60000000");
        assert_eq!(sig9(0.768), "0.768000000");
        assert_eq!(sig9(12.3456789012), "12.3456789");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn csv_layout() {
        let recs = [TraceRecord {
            cycle: 0,
            v_in: 3.0,
            m_hat: 2,
            m: 2,
            v_out: 3.6,
        }];
        let mut out = Vec::new();
        write_trace_csv(&recs, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "cycle,v_in,m_hat,m,v_out\n0,3.00000000,2,2,3.60000000\n"
        );
    }

    #[test]
    fn csv_rejects_bad_header_and_fields() {
        let err = read_trace_csv("a,b\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TraceFileError::Parse { line: 1, .. }));
        let err = read_trace_csv(format!("{CSV_HEADER}\n1,2,3\n").as_bytes()).unwrap_err();
        assert!(matches!(err, TraceFileError::Parse { line: 2, .. }));
        let err = read_trace_csv(format!("{CSV_HEADER}\n1,x,3,4,5\n").as_bytes()).unwrap_err();
        assert!(err.to_string().contains("v_in"));
    }

    #[test]
    fn raw_codes_are_little_endian() {
        let recs: Vec<_> = [0x0102u16, 0x03ff]
            .iter()
            .enumerate()
            .map(|(i, &c)| TraceRecord {
                cycle: i as u64,
                v_in: 0.0,
                m_hat: c,
                m: 0,
                v_out: 0.0,
            })
            .collect();
        let mut out = Vec::new();
        write_raw_codes(&recs, &mut out).unwrap();
        assert_eq!(out, [0x02, 0x01, 0xff, 0x03]);
        assert_eq!(read_raw_codes(&out[..]).unwrap(), vec![0x0102, 0x03ff]);
        assert!(matches!(
            read_raw_codes(&out[..3]),
            Err(TraceFileError::OddLength(3))
        ));
    }
}
