//! SMS sparse-matrix text format.
//!
//! ```text
//! rows cols M
//! i j v        (1-based indices; v an integer or p/2^k)
//! ...
//! 0 0 0
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::dyadic::Dyadic;
use crate::error::{FmmError, Result};
use crate::matrix::{CoeffMatrix, Matrix};

fn line_err(line: usize, msg: impl Into<String>) -> FmmError {
    FmmError::ParseLine {
        line,
        msg: msg.into(),
    }
}

pub fn parse_sms(text: &str) -> Result<CoeffMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| line_err(1, "empty input"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 || h[2] != "M" {
        return Err(line_err(hline, format!("expected header 'rows cols M', got '{header}'")));
    }
    let rows: usize = h[0].parse().map_err(|_| line_err(hline, "bad row count"))?;
    let cols: usize = h[1].parse().map_err(|_| line_err(hline, "bad column count"))?;
    if rows == 0 || cols == 0 {
        return Err(line_err(hline, "matrix dimensions must be positive"));
    }

    let mut m = Matrix::<Dyadic>::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    let mut terminated = false;
    for (ln, line) in lines {
        if terminated {
            return Err(line_err(ln, "content after terminator '0 0 0'"));
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(line_err(ln, format!("expected 'i j v', got '{line}'")));
        }
        let i: usize = t[0].parse().map_err(|_| line_err(ln, "bad row index"))?;
        let j: usize = t[1].parse().map_err(|_| line_err(ln, "bad column index"))?;
        if i == 0 && j == 0 {
            if t[2] != "0" {
                return Err(line_err(ln, "malformed terminator"));
            }
            terminated = true;
            continue;
        }
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(line_err(ln, format!("index ({i},{j}) outside {rows}x{cols}")));
        }
        let v: Dyadic = t[2]
            .parse()
            .map_err(|e: FmmError| line_err(ln, e.to_string()))?;
        let idx = (i - 1) * cols + (j - 1);
        if seen[idx] {
            return Err(line_err(ln, format!("duplicate entry ({i},{j})")));
        }
        seen[idx] = true;
        m.set(i - 1, j - 1, v);
    }
    if !terminated {
        return Err(line_err(text.lines().count().max(1), "missing terminator '0 0 0'"));
    }
    Ok(m)
}

pub fn render_sms(m: &CoeffMatrix) -> String {
    let mut out = format!("{} {} M\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if !v.is_zero() {
                let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
            }
        }
    }
    out.push_str("0 0 0\n");
    out
}

pub fn load_sms(path: impl AsRef<Path>) -> Result<CoeffMatrix> {
    parse_sms(&std::fs::read_to_string(path)?)
}

pub fn save_sms(m: &CoeffMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_sms(m))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_matrix() {
        let m = parse_sms("2 2 M\n0 0 0\n").unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert!(m.is_zero());
    }

    #[test]
    fn one_based_entry() {
        let m = parse_sms("2 3 M\n1 2 -1\n2 3 3/2^2\n0 0 0\n").unwrap();
        assert_eq!(*m.get(0, 1), Dyadic::from(-1));
        assert_eq!(*m.get(1, 2), Dyadic::normalize(3, -2));
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("2 2\n0 0 0\n", 1),
            ("2 2 M\n1 1 1\n3 1 1\n0 0 0\n", 3),
            ("2 2 M\n1 1 x\n0 0 0\n", 2),
            ("2 2 M\n1 1 1\n1 1 2\n0 0 0\n", 3),
            ("2 2 M\n1 1 1/3\n0 0 0\n", 2),
            ("2 2 M\n1 1\n0 0 0\n", 2),
        ];
        for (text, want) in cases {
            match parse_sms(text) {
                Err(FmmError::ParseLine { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(parse_sms("2 2 M\n1 1 1\n").is_err());
    }

    #[test]
    fn render_format() {
        let m = parse_sms("1 2 M\n1 2 -1/2^3\n0 0 0\n").unwrap();
        assert_eq!(render_sms(&m), "1 2 M\n1 2 -1/2^3\n0 0 0\n");
    }

    proptest! {
        #[test]
        fn round_trip(rows in 1usize..8, cols in 1usize..8, vals in proptest::collection::vec((-9i64..9, -4i64..3), 64)) {
            let m = Matrix::from_fn(rows, cols, |i, j| {
                let (a, e) = vals[i * 8 + j];
                Dyadic::normalize(a, e)
            });
            prop_assert_eq!(parse_sms(&render_sms(&m)).unwrap(), m);
        }
    }
}
