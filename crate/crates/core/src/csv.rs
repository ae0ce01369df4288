//! Trace files: header `k,s,f,grad_norm,feasibility,flops,wall_ns`, one row per
//! record, floats in C `%.17g` form, empty fields for unlogged values.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use crate::optim::IterationRecord;

pub const HEADER: &str = "k,s,f,grad_norm,feasibility,flops,wall_ns";

/// C's `%.17g`: 17 significant digits, fixed or exponent form by the decimal
/// exponent, trailing zeros removed.
pub fn format_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    } else {
        let mut out = strip_zeros(mantissa).to_string();
        let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
        out
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_f(x: Option<f64>) -> String {
    x.map(format_g17).unwrap_or_default()
}

pub fn write_trace<W: Write>(mut w: W, trace: &[IterationRecord]) -> io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.k,
            r.s,
            format_g17(r.f),
            opt_f(r.grad_norm),
            opt_f(r.feasibility),
            r.flops,
            r.wall_ns.map(|t| t.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn trace_to_string(trace: &[IterationRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

fn bad(line: usize, msg: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"))
}

pub fn read_trace<R: BufRead>(r: R) -> io::Result<Vec<IterationRecord>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?;
    if header.as_deref() != Some(HEADER) {
        return Err(bad(1, "missing trace header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let no = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(no, format!("expected 7 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| bad(no, e));
        let float = |s: &str| s.parse::<f64>().map_err(|e| bad(no, e));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { float(s).map(Some) };
        out.push(IterationRecord {
            k: int(f[0])? as usize,
            s: int(f[1])? as usize,
            f: float(f[2])?,
            grad_norm: opt(f[3])?,
            feasibility: opt(f[4])?,
            flops: int(f[5])?,
            wall_ns: if f[6].is_empty() { None } else { Some(int(f[6])?) },
        });
    }
    Ok(out)
}
