//! Bilinear (L, R, P) representation of matrix-multiplication algorithms.
//!
//! A scheme for `<m,k,n:r>` maps an `m x k` matrix `A` and a `k x n` matrix
//! `B` to `devec(P * ((L * vec A) o (R * vec B)))`, where `o` is the
//! entrywise product of two length-`r` vectors and `vec` is row-major.

use crate::dyadic::Dyadic;
use crate::element::Element;
use crate::error::{FmmError, Result};
use crate::matrix::{classical_multiply, CoeffMatrix, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct LrpScheme {
    id: String,
    m: usize,
    k: usize,
    n: usize,
    l: CoeffMatrix,
    r: CoeffMatrix,
    p: CoeffMatrix,
}

impl LrpScheme {
    /// Checks `L: r x mk`, `R: r x kn`, `P: mn x r`.
    pub fn new(
        id: impl Into<String>,
        (m, k, n): (usize, usize, usize),
        l: CoeffMatrix,
        r: CoeffMatrix,
        p: CoeffMatrix,
    ) -> Result<Self> {
        let rank = l.rows();
        if m == 0 || k == 0 || n == 0 || rank == 0 {
            return Err(FmmError::Shape("scheme dimensions must be positive".into()));
        }
        let expect = [
            ("L", l.shape(), (rank, m * k)),
            ("R", r.shape(), (rank, k * n)),
            ("P", p.shape(), (m * n, rank)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(FmmError::Shape(format!(
                    "{name} is {}x{}, expected {}x{} for <{m},{k},{n}:{rank}>",
                    got.0, got.1, want.0, want.1
                )));
            }
        }
        Ok(LrpScheme {
            id: id.into(),
            m,
            k,
            n,
            l,
            r,
            p,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.m, self.k, self.n)
    }

    pub fn rank(&self) -> usize {
        self.l.rows()
    }

    pub fn l(&self) -> &CoeffMatrix {
        &self.l
    }

    pub fn r(&self) -> &CoeffMatrix {
        &self.r
    }

    pub fn p(&self) -> &CoeffMatrix {
        &self.p
    }

    /// The same scheme under another name.
    pub fn renamed(&self, id: impl Into<String>) -> Self {
        LrpScheme {
            id: id.into(),
            ..self.clone()
        }
    }

    /// `<1,1,1:1>`: the scalar product.
    pub fn trivial() -> Self {
        let one = || Matrix::from_vec(1, 1, vec![Dyadic::one()]).unwrap();
        LrpScheme::new("trivial-1x1x1", (1, 1, 1), one(), one(), one()).unwrap()
    }

    /// Short human label, e.g. `<4,4,4:48>`.
    pub fn signature(&self) -> String {
        format!("<{},{},{}:{}>", self.m, self.k, self.n, self.rank())
    }
}

/// `M * v` for a coefficient matrix acting on elements, skipping zero coefficients.
pub fn apply_coeffs<T: Element>(coeffs: &CoeffMatrix, v: &[T]) -> Vec<T> {
    debug_assert_eq!(coeffs.cols(), v.len());
    (0..coeffs.rows())
        .map(|i| {
            let mut acc: Option<T> = None;
            for (c, x) in coeffs.row(i).iter().zip(v) {
                if c.is_zero() {
                    continue;
                }
                let term = x.mul_coeff(c);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            acc.unwrap_or_else(T::zero)
        })
        .collect()
}

/// One application of the bilinear map: `devec(P * ((L vec A) o (R vec B)))`.
pub fn apply_one_level<T: Element>(s: &LrpScheme, a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.shape() != (s.m, s.k) || b.shape() != (s.k, s.n) {
        return Err(FmmError::Shape(format!(
            "scheme {} expects {}x{} by {}x{}, got {}x{} by {}x{}",
            s.signature(),
            s.m,
            s.k,
            s.k,
            s.n,
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let la = apply_coeffs(&s.l, a.as_slice());
    let rb = apply_coeffs(&s.r, b.as_slice());
    let h: Vec<T> = la.iter().zip(&rb).map(|(x, y)| x.mul(y)).collect();
    let c = apply_coeffs(&s.p, &h);
    Matrix::devectorize(&c, s.m, s.n)
}

/// A failing elementary pair: `A = E(a_row, a_col)`, `B = E(b_row, b_col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairFailure {
    pub a_row: usize,
    pub a_col: usize,
    pub b_row: usize,
    pub b_col: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checked: usize,
    pub failures: Vec<PairFailure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exhaustive check over all elementary pairs in exact arithmetic.
///
/// By bilinearity, agreement on every pair `(E_ab, E_cd)` is equivalent to
/// agreement on all inputs.
pub fn validate_scheme(s: &LrpScheme) -> ValidationReport {
    let (m, k, n) = s.dims();
    let mut report = ValidationReport::default();
    for a_row in 0..m {
        for a_col in 0..k {
            let ea = Matrix::<Dyadic>::elementary(m, k, a_row, a_col);
            for b_row in 0..k {
                for b_col in 0..n {
                    let eb = Matrix::<Dyadic>::elementary(k, n, b_row, b_col);
                    let got = apply_one_level(s, &ea, &eb).expect("shapes fixed by the scheme");
                    let want = classical_multiply(&ea, &eb).expect("shapes fixed by the scheme");
                    report.checked += 1;
                    if got != want {
                        report.failures.push(PairFailure {
                            a_row,
                            a_col,
                            b_row,
                            b_col,
                        });
                    }
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn ints(rows: usize, cols: usize, v: &[i64]) -> CoeffMatrix {
        Matrix::from_vec(rows, cols, v.iter().map(|&x| Dyadic::from(x)).collect()).unwrap()
    }

    #[test]
    fn shape_checks() {
        let l = ints(1, 1, &[1]);
        assert!(LrpScheme::new("bad", (1, 1, 2), l.clone(), l.clone(), l.clone()).is_err());
        assert!(LrpScheme::new("ok", (1, 1, 1), l.clone(), l.clone(), l).is_ok());
    }

    #[test]
    fn classic_on_identity() {
        let s = catalog::builtin("classic-2x2x2").unwrap().scheme;
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(apply_one_level(&s, &a, &Matrix::identity(2)).unwrap(), a);
        assert!(apply_one_level(&s, &a, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn accurate_scheme_examples() {
        let s = catalog::builtin("acc-4x4x4").unwrap().scheme;
        let e11 = Matrix::<Dyadic>::elementary(4, 4, 0, 0);
        assert_eq!(apply_one_level(&s, &e11, &e11).unwrap(), e11);
        let ones = Matrix::from_fn(4, 4, |_, _| Dyadic::one());
        let fours = Matrix::from_fn(4, 4, |_, _| Dyadic::from(4));
        assert_eq!(apply_one_level(&s, &ones, &ones).unwrap(), fours);
    }

    #[test]
    fn trivial_scheme_is_valid() {
        assert!(validate_scheme(&LrpScheme::trivial()).is_valid());
    }

    #[test]
    fn every_single_sign_flip_is_detected() {
        let s = catalog::builtin("strassen").unwrap().scheme;
        for i in 0..s.rank() {
            for j in 0..4 {
                let mut l = s.l().clone();
                let v = l.get(i, j).clone();
                if v.is_zero() {
                    continue;
                }
                l.set(i, j, -&v);
                let bad = LrpScheme::new("flip", (2, 2, 2), l, s.r().clone(), s.p().clone()).unwrap();
                assert!(!validate_scheme(&bad).is_valid(), "flip at ({i},{j}) undetected");
            }
        }
    }
}
