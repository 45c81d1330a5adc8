//! Text form of piecewise polynomials and extended states.
//!
//! ```text
//! piecewise-poly
//! dim: 2
//! breakpoints: 0 0.5 1
//! cell: 0
//! 1 2          # component 0, coefficients of x^0, x^1, ... with x = s - left
//! 0 -1         # component 1
//! cell: 1
//! ...
//! end
//! ```
//!
//! An extended state is a `piecewise-poly` block followed by `vertex: d_1 ... d_n`,
//! preceded by the header `extended-state`. Numbers are decimal (shortest round trip)
//! or hexadecimal floats.

use std::fmt::Write as _;

use nalgebra::DVector;

use super::piecewise::PiecewisePoly;
use super::poly::Poly;
use super::state::ExtendedState;
use crate::error::{Error, Result};
use crate::hexfloat::{format_hex, parse_float};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FloatFormat {
    #[default]
    Decimal,
    Hex,
}

pub fn fmt_float(x: f64, fmt: FloatFormat) -> String {
    match fmt {
        FloatFormat::Decimal => format!("{x:?}"),
        FloatFormat::Hex => format_hex(x),
    }
}

fn join(xs: impl IntoIterator<Item = f64>, fmt: FloatFormat) -> String {
    xs.into_iter().map(|x| fmt_float(x, fmt)).collect::<Vec<_>>().join(" ")
}

pub fn write_piecewise(f: &PiecewisePoly, fmt: FloatFormat) -> String {
    let mut out = String::from("piecewise-poly\n");
    writeln!(out, "dim: {}", f.dim()).unwrap();
    writeln!(out, "breakpoints: {}", join(f.breakpoints().iter().copied(), fmt)).unwrap();
    for (i, cell) in f.cells().iter().enumerate() {
        writeln!(out, "cell: {i}").unwrap();
        for p in cell {
            writeln!(out, "{}", join(p.0.iter().copied(), fmt)).unwrap();
        }
    }
    out.push_str("end\n");
    out
}

pub fn write_state(x: &ExtendedState, fmt: FloatFormat) -> String {
    let mut out = String::from("extended-state\n");
    out.push_str(&write_piecewise(&x.f, fmt));
    writeln!(out, "vertex: {}", join(x.d.iter().copied(), fmt)).unwrap();
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate().peekable() }
    }

    fn skip_blank(&mut self) {
        while let Some((_, l)) = self.inner.peek() {
            if strip(l).is_empty() {
                self.inner.next();
            } else {
                break;
            }
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.skip_blank();
        self.inner
            .next()
            .map(|(i, l)| (i + 1, strip(l)))
            .ok_or(Error::Parse { line: 0, msg: "unexpected end of input".into() })
    }

    fn peek_line(&mut self) -> Option<&'a str> {
        self.skip_blank();
        self.inner.peek().map(|(_, l)| strip(l))
    }
}

fn strip(l: &str) -> &str {
    l.split('#').next().unwrap_or("").trim()
}

fn expect_key<'a>(line: usize, text: &'a str, key: &str) -> Result<&'a str> {
    match text.split_once(':') {
        Some((k, v)) if k.trim() == key => Ok(v.trim()),
        _ => Err(Error::Parse { line, msg: format!("expected `{key}: ...`, got `{text}`") }),
    }
}

fn floats(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| parse_float(t).ok_or_else(|| Error::Parse { line, msg: format!("invalid number `{t}`") }))
        .collect()
}

fn read_piecewise_block(lines: &mut Lines<'_>) -> Result<PiecewisePoly> {
    let (l, head) = lines.next_line()?;
    if head != "piecewise-poly" {
        return Err(Error::Parse { line: l, msg: format!("expected `piecewise-poly`, got `{head}`") });
    }
    let (l, t) = lines.next_line()?;
    let dim: usize = expect_key(l, t, "dim")?
        .parse()
        .map_err(|_| Error::Parse { line: l, msg: "invalid dim".into() })?;
    let (l, t) = lines.next_line()?;
    let breaks = floats(l, expect_key(l, t, "breakpoints")?)?;
    let mut cells = Vec::new();
    loop {
        let (l, t) = lines.next_line()?;
        if t == "end" {
            break;
        }
        let idx: usize = expect_key(l, t, "cell")?
            .parse()
            .map_err(|_| Error::Parse { line: l, msg: "invalid cell index".into() })?;
        if idx != cells.len() {
            return Err(Error::Parse { line: l, msg: format!("expected cell {}, got {idx}", cells.len()) });
        }
        let mut cell = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (l, t) = lines.next_line()?;
            let row = floats(l, t)?;
            if row.is_empty() {
                return Err(Error::Parse { line: l, msg: "empty coefficient row".into() });
            }
            cell.push(Poly(row));
        }
        cells.push(cell);
    }
    PiecewisePoly::new(dim, breaks, cells)
}

pub fn read_piecewise(text: &str) -> Result<PiecewisePoly> {
    let mut lines = Lines::new(text);
    let f = read_piecewise_block(&mut lines)?;
    if let Some(extra) = lines.peek_line() {
        return Err(Error::Parse { line: 0, msg: format!("trailing content `{extra}`") });
    }
    Ok(f)
}

pub fn read_state(text: &str) -> Result<ExtendedState> {
    let mut lines = Lines::new(text);
    let (l, head) = lines.next_line()?;
    if head != "extended-state" {
        return Err(Error::Parse { line: l, msg: format!("expected `extended-state`, got `{head}`") });
    }
    let f = read_piecewise_block(&mut lines)?;
    let (l, t) = lines.next_line()?;
    let d = floats(l, expect_key(l, t, "vertex")?)?;
    Ok(ExtendedState { f, d: DVector::from_vec(d) })
}

/// Samples a scalar or vector function as CSV rows `s, f_1(s), ..., f_dim(s)`.
pub fn sample_csv(f: &PiecewisePoly, points: usize) -> String {
    let (a, b) = f.domain();
    let mut out = String::from("s");
    for c in 0..f.dim() {
        write!(out, ",f{}", c + 1).unwrap();
    }
    out.push('\n');
    let n = points.max(2);
    for k in 0..n {
        let s = a + (b - a) * k as f64 / (n - 1) as f64;
        let v = f.eval(s).expect("sample inside domain");
        write!(out, "{s:?}").unwrap();
        for x in v.iter() {
            write!(out, ",{x:?}").unwrap();
        }
        out.push('\n');
    }
    out
}
