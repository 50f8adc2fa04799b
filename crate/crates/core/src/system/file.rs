//! Plain-text "DSS v1" system files.
//!
//! ```text
//! DSS v1
//! timing discrete
//! dims n m p
//! A
//! <n rows>
//! E
//! ...
//! ```
//!
//! Entries are written with 17 significant digits, which re-reads bit-exactly.
//! A matrix with a zero dimension is written as its name line alone.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{DescriptorSystem, Timing};
use crate::error::{Error, Result};

const MAGIC: &str = "DSS v1";

fn push_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    out.push_str(name);
    out.push('\n');
    if m.ncols() == 0 {
        return;
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

/// Serializes a system in the DSS v1 format.
pub fn write_system(sys: &DescriptorSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "timing {}", sys.timing());
    let _ = writeln!(out, "dims {} {} {}", sys.order(), sys.inputs(), sys.outputs());
    push_matrix(&mut out, "A", sys.a());
    push_matrix(&mut out, "E", sys.e());
    push_matrix(&mut out, "B", sys.b());
    push_matrix(&mut out, "C", sys.c());
    push_matrix(&mut out, "D", sys.d());
    out
}

pub fn write_system_file(sys: &DescriptorSystem, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_system(sys))?;
    Ok(())
}

pub fn read_system_file(path: impl AsRef<Path>) -> Result<DescriptorSystem> {
    read_system(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l.trim_end_matches('\r'))
            }
            None => Err(Error::Parse { line: self.last + 1, msg: format!("unexpected end of input, expected {what}") }),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.last, msg: msg.into() }
    }
}

fn read_matrix(lines: &mut Lines<'_>, name: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    let header = lines.next_line(&format!("matrix name `{name}`"))?;
    if header.trim() != name {
        return Err(lines.err(format!("expected matrix name `{name}`, found `{}`", header.trim())));
    }
    let mut m = DMatrix::zeros(rows, cols);
    if cols == 0 {
        return Ok(m);
    }
    for i in 0..rows {
        let line = lines.next_line(&format!("row {} of {name}", i + 1))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != cols {
            return Err(lines.err(format!("row {} of {name} has {} entries, expected {cols}", i + 1, fields.len())));
        }
        for (j, f) in fields.iter().enumerate() {
            m[(i, j)] = f.parse().map_err(|_| lines.err(format!("invalid number `{f}` in {name}")))?;
        }
    }
    Ok(m)
}

/// Parses a DSS v1 document.
pub fn read_system(text: &str) -> Result<DescriptorSystem> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let magic = lines.next_line("header")?;
    if magic.trim() != MAGIC {
        return Err(lines.err(format!("expected `{MAGIC}` header, found `{}`", magic.trim())));
    }
    let timing_line = lines.next_line("timing line")?;
    let timing = match timing_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["timing", "continuous"] => Timing::Continuous,
        ["timing", "discrete"] => Timing::Discrete,
        _ => return Err(lines.err(format!("expected `timing <continuous|discrete>`, found `{timing_line}`"))),
    };
    let dims_line = lines.next_line("dims line")?;
    let dims: Vec<&str> = dims_line.split_whitespace().collect();
    if dims.len() != 4 || dims[0] != "dims" {
        return Err(lines.err(format!("expected `dims n m p`, found `{dims_line}`")));
    }
    let mut parsed = [0usize; 3];
    for (slot, f) in parsed.iter_mut().zip(&dims[1..]) {
        *slot = f.parse().map_err(|_| lines.err(format!("invalid dimension `{f}`")))?;
    }
    let [n, m, p] = parsed;
    let a = read_matrix(&mut lines, "A", n, n)?;
    let e = read_matrix(&mut lines, "E", n, n)?;
    let b = read_matrix(&mut lines, "B", n, m)?;
    let c = read_matrix(&mut lines, "C", p, n)?;
    let d = read_matrix(&mut lines, "D", p, m)?;
    for (i, rest) in lines.inner {
        if !rest.trim().is_empty() {
            return Err(Error::Parse { line: i + 1, msg: "trailing content after D".into() });
        }
    }
    DescriptorSystem::new(a, e, b, c, d, timing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, rows * cols)
            .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
    }

    fn system() -> impl Strategy<Value = DescriptorSystem> {
        (0usize..5, 0usize..4, 0usize..4, any::<bool>()).prop_flat_map(|(n, m, p, disc)| {
            (matrix(n, n), matrix(n, n), matrix(n, m), matrix(p, n), matrix(p, m)).prop_map(move |(a, e, b, c, d)| {
                let t = if disc { Timing::Discrete } else { Timing::Continuous };
                DescriptorSystem::new(a, e, b, c, d, t).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(sys in system()) {
            let back = read_system(&write_system(&sys)).unwrap();
            prop_assert_eq!(back.timing(), sys.timing());
            for (x, y) in [(back.a(), sys.a()), (back.e(), sys.e()), (back.b(), sys.b()), (back.c(), sys.c()), (back.d(), sys.d())] {
                prop_assert_eq!(x.shape(), y.shape());
                for (u, v) in x.iter().zip(y.iter()) {
                    prop_assert_eq!(u.to_bits(), v.to_bits());
                }
            }
        }
    }

    #[test]
    fn zero_dimension_blocks() {
        let sys = DescriptorSystem::static_gain(DMatrix::from_element(2, 3, 0.25), Timing::Continuous);
        let text = write_system(&sys);
        assert_eq!(
            text,
            "DSS v1\ntiming continuous\ndims 0 3 2\nA\nE\nB\nC\nD\n\
             2.5000000000000000e-1 2.5000000000000000e-1 2.5000000000000000e-1\n\
             2.5000000000000000e-1 2.5000000000000000e-1 2.5000000000000000e-1\n"
        );
        assert_eq!(read_system(&text).unwrap(), sys);
    }

    #[test]
    fn parse_errors_report_lines() {
        let err = read_system("DSS v2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
        let err = read_system("DSS v1\ntiming discrete\ndims 1 1 1\nA\n0\nE\n1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 7, .. }), "{err:?}");
        let err = read_system("DSS v1\ntiming discrete\ndims 1 1 1\nA\nx\n").unwrap_err();
        assert!(err.to_string().contains("invalid number"), "{err}");
        let err = read_system("DSS v1\ntiming hybrid\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = read_system("DSS v1\ntiming discrete\ndims 1 1 1\nA\n0\nE\n1\nB\n1\nC\n1\n").unwrap_err();
        assert!(err.to_string().contains("end of input"), "{err}");
    }
}
