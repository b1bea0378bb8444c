//! Text formats: matrix blocks, point sets, kernel specs, generator lists.
//!
//! A matrix block is
//!
//! ```text
//! matrix <rows> <cols>
//! <row of whitespace-separated scalars>
//! ...
//! ```
//!
//! Scalars are real (`1.5`, `-2e-3`) or complex (`a+bi` / `a-bi`, e.g.
//! `0.5-1.25i`). Files may hold several blocks back to back; `#` starts a
//! comment. Point-set files are matrix blocks whose rows are the points.

use crate::{CMatrix, KreinError, RVector, Result, Scalar};

/// Parses one scalar token.
pub fn parse_scalar(tok: &str) -> std::result::Result<Scalar, String> {
    let t = tok.trim();
    if t.is_empty() {
        return Err("empty scalar".into());
    }
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // Find the sign splitting real and imaginary parts: last '+'/'-' that
        // is not the leading sign and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let re: f64 = re_str
            .trim()
            .parse()
            .map_err(|_| format!("bad real part in `{t}`"))?;
        let im_trim = im_str.trim();
        let im: f64 = match im_trim {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => s
                .parse()
                .map_err(|_| format!("bad imaginary part in `{t}`"))?,
        };
        Ok(Scalar::new(re, im))
    } else {
        let re: f64 = t.parse().map_err(|_| format!("bad number `{t}`"))?;
        Ok(Scalar::new(re, 0.0))
    }
}

fn format_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0
    format!("{x}")
}

/// Formats a scalar in the same syntax [`parse_scalar`] accepts. Real values
/// stay real.
#[must_use]
pub fn format_scalar(z: &Scalar) -> String {
    if z.im == 0.0 {
        format_f64(z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", format_f64(z.re), format_f64(-z.im))
    } else {
        format!("{}+{}i", format_f64(z.re), format_f64(z.im))
    }
}

/// Renders a matrix block.
#[must_use]
pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = format!("matrix {} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_scalar(&m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next semantic line: (1-based number, content with comments stripped).
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.inner.by_ref() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let line = line.trim();
            if !line.is_empty() {
                return Some((idx + 1, line));
            }
        }
        None
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> KreinError {
    KreinError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_matrix_header(line_no: usize, line: &str) -> Result<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let kw = parts.next().unwrap_or("");
    if kw != "matrix" {
        return Err(parse_err(
            line_no,
            format!("expected `matrix`, found `{kw}`"),
        ));
    }
    let rows: usize = parts
        .next()
        .ok_or_else(|| parse_err(line_no, "missing row count"))?
        .parse()
        .map_err(|_| parse_err(line_no, "bad row count"))?;
    let cols: usize = parts
        .next()
        .ok_or_else(|| parse_err(line_no, "missing column count"))?
        .parse()
        .map_err(|_| parse_err(line_no, "bad column count"))?;
    if parts.next().is_some() {
        return Err(parse_err(line_no, "trailing tokens after matrix header"));
    }
    Ok((rows, cols))
}

fn parse_matrix_body(
    lines: &mut Lines,
    rows: usize,
    cols: usize,
    header_line: usize,
) -> Result<CMatrix> {
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (no, line) = lines.next_content().ok_or_else(|| {
            parse_err(
                header_line,
                format!("matrix body ends after {r} of {rows} rows"),
            )
        })?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(parse_err(
                no,
                format!("expected {cols} entries, found {}", toks.len()),
            ));
        }
        for tok in toks {
            data.push(parse_scalar(tok).map_err(|msg| parse_err(no, msg))?);
        }
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

/// Parses every matrix block in the text.
pub fn parse_matrix_blocks(text: &str) -> Result<Vec<CMatrix>> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while let Some((no, line)) = lines.next_content() {
        let (rows, cols) = parse_matrix_header(no, line)?;
        out.push(parse_matrix_body(&mut lines, rows, cols, no)?);
    }
    Ok(out)
}

/// Parses exactly one matrix block.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let blocks = parse_matrix_blocks(text)?;
    match blocks.len() {
        1 => Ok(blocks.into_iter().next().unwrap()),
        n => Err(parse_err(
            1,
            format!("expected exactly one matrix block, found {n}"),
        )),
    }
}

/// Parses a point set: one real matrix block, rows are points.
pub fn parse_points(text: &str) -> Result<Vec<RVector>> {
    let m = parse_matrix(text)?;
    if m.iter().any(|z| z.im != 0.0) {
        return Err(parse_err(1, "point sets must be real"));
    }
    Ok((0..m.nrows())
        .map(|i| RVector::from_fn(m.ncols(), |j, _| m[(i, j)].re))
        .collect())
}

/// Parsed form of a kernel spec line:
/// `kernel <name> [degree=<n>] [metric=<file>] [values=<file>]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSpec {
    pub name: String,
    pub degree: Option<usize>,
    pub metric_path: Option<String>,
    pub values_path: Option<String>,
}

/// Parses a kernel spec line. File paths are returned verbatim; the caller
/// loads them.
pub fn parse_kernel_spec(line: &str) -> Result<KernelSpec> {
    let mut parts = line.split_whitespace();
    match parts.next() {
        Some("kernel") => {}
        other => {
            return Err(parse_err(
                1,
                format!("expected `kernel`, found `{}`", other.unwrap_or("")),
            ));
        }
    }
    let name = parts
        .next()
        .ok_or_else(|| parse_err(1, "missing kernel name"))?
        .to_string();
    let mut spec = KernelSpec {
        name,
        degree: None,
        metric_path: None,
        values_path: None,
    };
    for tok in parts {
        match tok.split_once('=') {
            Some(("degree", v)) => {
                spec.degree = Some(
                    v.parse()
                        .map_err(|_| parse_err(1, format!("bad degree `{v}`")))?,
                );
            }
            Some(("metric", v)) => spec.metric_path = Some(v.to_string()),
            Some(("values", v)) => spec.values_path = Some(v.to_string()),
            _ => return Err(parse_err(1, format!("unknown kernel option `{tok}`"))),
        }
    }
    Ok(spec)
}

/// One entry of a generator file: an explicit matrix block or a named
/// builtin such as `builtin boost12 0.7`.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorEntry {
    Matrix(CMatrix),
    Builtin { name: String, args: Vec<String> },
}

/// Parses a generator file: any interleaving of matrix blocks and
/// `builtin <name> <args...>` lines.
pub fn parse_generator_file(text: &str) -> Result<Vec<GeneratorEntry>> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while let Some((no, line)) = lines.next_content() {
        if line.starts_with("matrix") {
            let (rows, cols) = parse_matrix_header(no, line)?;
            out.push(GeneratorEntry::Matrix(parse_matrix_body(
                &mut lines, rows, cols, no,
            )?));
        } else if let Some(rest) = line.strip_prefix("builtin") {
            let mut toks = rest.split_whitespace();
            let name = toks
                .next()
                .ok_or_else(|| parse_err(no, "missing builtin name"))?
                .to_string();
            out.push(GeneratorEntry::Builtin {
                name,
                args: toks.map(str::to_string).collect(),
            });
        } else {
            return Err(parse_err(
                no,
                format!("expected `matrix` or `builtin`, found `{line}`"),
            ));
        }
    }
    Ok(out)
}
