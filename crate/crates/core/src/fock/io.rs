//! CSV serialization of operators and states.
//!
//! Both formats share one layout: a single `#` header line naming the
//! truncation and payload kind, followed by `row,col,re,im` entries with
//! 17-significant-digit floats (round-trippable doubles). Pure states use
//! `col = 0`.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

use super::{QuantumState, SparseOperator, Truncation};

pub fn write_operator_csv(
    out: &mut impl Write,
    op: &SparseOperator,
    trunc: &Truncation,
) -> Result<()> {
    writeln!(
        out,
        "# operator nmax={} dim={} hermitian={}",
        trunc.n_max(),
        op.dim(),
        u8::from(op.hermitian())
    )?;
    for (r, c, v) in op.iter() {
        writeln!(out, "{r},{c},{:.16e},{:.16e}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_operator_csv(input: &mut impl BufRead) -> Result<(SparseOperator, Truncation)> {
    let header = read_header(input, "operator")?;
    let n_max = header_field(&header, "nmax")?.parse::<u32>().map_err(bad_header)?;
    let dim = header_field(&header, "dim")?.parse::<usize>().map_err(bad_header)?;
    let hermitian = header_field(&header, "hermitian")? == "1";
    let trunc = Truncation::new(n_max);
    let mut triplets = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (r, c, v) = parse_entry(&line)?;
        if r >= dim || c >= dim {
            return Err(Error::InvalidParameter(format!(
                "entry ({r},{c}) outside dimension {dim}"
            )));
        }
        triplets.push((r, c, v));
    }
    let op = SparseOperator::from_triplets(dim, triplets);
    Ok(if hermitian { (op.flagged_hermitian(), trunc) } else { (op, trunc) })
}

pub fn write_state_csv(out: &mut impl Write, state: &QuantumState) -> Result<()> {
    let trunc = state.truncation();
    if let Some(psi) = state.as_pure() {
        writeln!(out, "# state nmax={} dim={} kind=pure", trunc.n_max(), psi.len())?;
        for (i, amp) in psi.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            writeln!(out, "{i},0,{:.16e},{:.16e}", amp.re, amp.im)?;
        }
        return Ok(());
    }
    let rho = state.to_density_matrix()?;
    writeln!(out, "# state nmax={} dim={} kind=mixed", trunc.n_max(), rho.nrows())?;
    for r in 0..rho.nrows() {
        for c in 0..rho.ncols() {
            let v = rho[(r, c)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            writeln!(out, "{r},{c},{:.16e},{:.16e}", v.re, v.im)?;
        }
    }
    Ok(())
}

pub fn read_state_csv(input: &mut impl BufRead) -> Result<QuantumState> {
    let header = read_header(input, "state")?;
    let n_max = header_field(&header, "nmax")?.parse::<u32>().map_err(bad_header)?;
    let dim = header_field(&header, "dim")?.parse::<usize>().map_err(bad_header)?;
    let kind = header_field(&header, "kind")?;
    let trunc = Truncation::new(n_max);
    if trunc.total_dim() != dim {
        return Err(Error::DimensionMismatch { expected: trunc.total_dim(), found: dim });
    }
    match kind.as_str() {
        "pure" => {
            let mut psi = vec![Complex64::new(0.0, 0.0); dim];
            for line in input.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let (r, c, v) = parse_entry(&line)?;
                if c != 0 || r >= dim {
                    return Err(Error::InvalidParameter(format!(
                        "pure-state entry ({r},{c}) outside column vector of length {dim}"
                    )));
                }
                psi[r] = v;
            }
            QuantumState::from_pure(psi, trunc)
        }
        "mixed" => {
            let mut rho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
            for line in input.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let (r, c, v) = parse_entry(&line)?;
                if r >= dim || c >= dim {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({r},{c}) outside dimension {dim}"
                    )));
                }
                rho[(r, c)] = v;
            }
            QuantumState::from_density_matrix(rho, trunc)
        }
        other => Err(Error::InvalidParameter(format!("unknown state kind `{other}`"))),
    }
}

fn read_header(input: &mut impl BufRead, expected_kind: &str) -> Result<String> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let line = line.trim();
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|r| r.strip_prefix(expected_kind))
        .ok_or_else(|| {
            Error::InvalidParameter(format!("expected `# {expected_kind} …` header, got `{line}`"))
        })?;
    Ok(rest.trim().to_string())
}

fn header_field(header: &str, key: &str) -> Result<String> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(&format!("{key}=")))
        .map(str::to_string)
        .ok_or_else(|| Error::InvalidParameter(format!("header missing `{key}=` field")))
}

fn parse_entry(line: &str) -> Result<(usize, usize, Complex64)> {
    let mut parts = line.trim().split(',');
    let mut next = |what: &str| {
        parts
            .next()
            .ok_or_else(|| Error::InvalidParameter(format!("entry `{line}` missing {what}")))
    };
    let r = next("row")?.trim().parse::<usize>().map_err(bad_entry(line))?;
    let c = next("col")?.trim().parse::<usize>().map_err(bad_entry(line))?;
    let re = next("re")?.trim().parse::<f64>().map_err(bad_entry(line))?;
    let im = next("im")?.trim().parse::<f64>().map_err(bad_entry(line))?;
    Ok((r, c, Complex64::new(re, im)))
}

fn bad_header<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidParameter(format!("malformed header field: {e}"))
}

fn bad_entry<E: std::fmt::Display>(line: &str) -> impl Fn(E) -> Error + '_ {
    move |e| Error::InvalidParameter(format!("malformed entry `{line}`: {e}"))
}
