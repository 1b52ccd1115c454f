//! Field files.
//!
//! CSV layout, one record per line:
//!
//! ```text
//! # hessq-field v1
//! n,<n>
//! lower,<l_1>,…,<l_n>
//! spacing,<h_1>,…,<h_n>
//! dims,<d_1>,…,<d_n>
//! count,<d_1·…·d_n>
//! <value>            (count lines, last axis fastest)
//! ```
//!
//! Binary layout, little-endian: the magic `HQF1`, `n` as `u32`, then `n`
//! `f64` lower bounds, `n` `f64` spacings, `n` `u64` dims, the `u64` count and
//! `count` `f64` values. Values are written at full `f64` precision and read
//! back bit-exactly.

use std::io::{BufRead, Read, Write};

use super::grid::ScalarField;
use crate::error::{LabError, Result};
use crate::scalar::Scalar;

pub const CSV_MAGIC: &str = "# hessq-field v1";
pub const BINARY_MAGIC: &[u8; 4] = b"HQF1";

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Domain(format!("malformed field file: {}", msg.into()))
}

fn join<T: Scalar>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_f64_lossy().to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_csv<T: Scalar>(field: &ScalarField<T>, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_MAGIC}")?;
    writeln!(out, "n,{}", field.n())?;
    writeln!(out, "lower,{}", join(&field.lower))?;
    writeln!(out, "spacing,{}", join(&field.spacing))?;
    writeln!(out, "dims,{}", field.dims.iter().map(usize::to_string).collect::<Vec<_>>().join(","))?;
    writeln!(out, "count,{}", field.len())?;
    for v in &field.values {
        writeln!(out, "{}", v.to_f64_lossy())?;
    }
    Ok(())
}

pub fn read_csv<T: Scalar>(input: impl BufRead) -> Result<ScalarField<T>> {
    let mut lines = input.lines().map(|l| l.map_err(|e| bad(e.to_string())));
    let mut next = || lines.next().unwrap_or_else(|| Err(bad("unexpected end of file")));
    if next()?.trim() != CSV_MAGIC {
        return Err(bad("missing header line"));
    }
    let mut record = |key: &str| -> Result<Vec<String>> {
        let line = next()?;
        let mut parts = line.trim().split(',');
        if parts.next() != Some(key) {
            return Err(bad(format!("expected a `{key}` record")));
        }
        Ok(parts.map(str::to_owned).collect())
    };
    let parse_f = |s: &str| s.trim().parse::<f64>().map(T::lit).map_err(|_| bad(format!("not a number: {s}")));
    let parse_u = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(format!("not a count: {s}")));
    let n = parse_u(record("n")?.first().ok_or_else(|| bad("empty n"))?)?;
    let lower = record("lower")?.iter().map(|s| parse_f(s)).collect::<Result<Vec<_>>>()?;
    let spacing = record("spacing")?.iter().map(|s| parse_f(s)).collect::<Result<Vec<_>>>()?;
    let dims = record("dims")?.iter().map(|s| parse_u(s)).collect::<Result<Vec<_>>>()?;
    let count = parse_u(record("count")?.first().ok_or_else(|| bad("empty count"))?)?;
    if lower.len() != n || spacing.len() != n || dims.len() != n {
        return Err(bad("header lengths disagree with n"));
    }
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        values.push(parse_f(&next()?)?);
    }
    ScalarField::new(lower, spacing, dims, values)
}

pub fn write_binary<T: Scalar>(field: &ScalarField<T>, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(field.n() as u32).to_le_bytes())?;
    for v in field.lower.iter().chain(&field.spacing) {
        out.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    for &d in &field.dims {
        out.write_all(&(d as u64).to_le_bytes())?;
    }
    out.write_all(&(field.len() as u64).to_le_bytes())?;
    for v in &field.values {
        out.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<T: Scalar>(mut input: impl Read) -> Result<ScalarField<T>> {
    let mut take = |len: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; len];
        input.read_exact(&mut buf).map_err(|e| bad(e.to_string()))?;
        Ok(buf)
    };
    if take(4)? != BINARY_MAGIC {
        return Err(bad("wrong magic"));
    }
    let n = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if n == 0 || n > 64 {
        return Err(bad(format!("implausible dimension {n}")));
    }
    let mut f64s = |count: usize| -> Result<Vec<T>> {
        let raw = take(8 * count)?;
        Ok(raw.chunks_exact(8).map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap()))).collect())
    };
    let lower = f64s(n)?;
    let spacing = f64s(n)?;
    let mut u64s = |count: usize| -> Result<Vec<usize>> {
        let raw = take(8 * count)?;
        Ok(raw.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize).collect())
    };
    let dims = u64s(n)?;
    let count = u64s(1)?[0];
    if dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)) != Some(count) {
        return Err(bad("count does not match dims"));
    }
    let values = {
        let raw = take(8 * count)?;
        raw.chunks_exact(8).map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap()))).collect()
    };
    ScalarField::new(lower, spacing, dims, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScalarField<f64> {
        ScalarField::from_fn(&[-1.0, 0.0], &[1.0, 0.3], &[4, 3], |x: &[f64]| (x[0] + 0.1).exp() * x[1] + 1.0 / 3.0).unwrap()
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let g: ScalarField<f64> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"HQF1");
        let g: ScalarField<f64> = read_binary(buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn truncated_inputs_rejected() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert!(read_binary::<f64>(&buf[..buf.len() - 3]).is_err());
        let mut csv = Vec::new();
        write_csv(&f, &mut csv).unwrap();
        assert!(read_csv::<f64>(&csv[..csv.len() / 2]).is_err());
        assert!(read_csv::<f64>("garbage\n".as_bytes()).is_err());
    }
}
