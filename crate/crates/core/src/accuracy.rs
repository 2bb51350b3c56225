//! Growth factors, error-bound exponents and leading complexity constants.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{FmmError, Result};
use crate::lrp::LrpScheme;
use crate::matrix::CoeffMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Norm {
    One,
    Two,
    Inf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::One => "1",
            Norm::Two => "2",
            Norm::Inf => "inf",
        })
    }
}

impl FromStr for Norm {
    type Err = FmmError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Norm::One),
            "2" => Ok(Norm::Two),
            "inf" | "Inf" | "∞" | "infinity" => Ok(Norm::Inf),
            other => Err(FmmError::Parse(format!("unsupported norm '{other}'"))),
        }
    }
}

/// Hölder conjugate: `1/q + 1/q* = 1`.
pub fn dual_exponent(q: Norm) -> Norm {
    match q {
        Norm::One => Norm::Inf,
        Norm::Two => Norm::Two,
        Norm::Inf => Norm::One,
    }
}

/// Vector norm; the 2-norm is scaled by the largest magnitude first.
pub fn vector_norm(v: &[f64], p: Norm) -> f64 {
    match p {
        Norm::One => v.iter().map(|x| x.abs()).sum(),
        Norm::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        Norm::Two => {
            let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if big == 0.0 {
                return 0.0;
            }
            big * v.iter().map(|x| (x / big) * (x / big)).sum::<f64>().sqrt()
        }
    }
}

fn row_f64(m: &CoeffMatrix, i: usize) -> Vec<f64> {
    m.row(i).iter().map(|x| x.to_f64_rounded()).collect()
}

fn col_f64(m: &CoeffMatrix, j: usize) -> Vec<f64> {
    m.column(j).iter().map(|x| x.to_f64_rounded()).collect()
}

/// `|| ( sum_i |L_i|_{q*} |R_i|_{q*} |p_{j,i}| )_j ||_p`.
pub fn growth_factor(s: &LrpScheme, p: Norm, q: Norm) -> f64 {
    let qs = dual_exponent(q);
    let weights: Vec<f64> = (0..s.rank())
        .map(|i| vector_norm(&row_f64(s.l(), i), qs) * vector_norm(&row_f64(s.r(), i), qs))
        .collect();
    let per_output: Vec<f64> = (0..s.p().rows())
        .map(|j| {
            s.p()
                .row(j)
                .iter()
                .zip(&weights)
                .map(|(c, w)| c.to_f64_rounded().abs() * w)
                .sum()
        })
        .collect();
    vector_norm(&per_output, p)
}

/// `sum_i |L_i|_2 |R_i|_2 |P^T_i|_2`, an upper bound on the (2,2) factor.
pub fn gamma2(s: &LrpScheme) -> f64 {
    (0..s.rank())
        .map(|i| {
            vector_norm(&row_f64(s.l(), i), Norm::Two)
                * vector_norm(&row_f64(s.r(), i), Norm::Two)
                * vector_norm(&col_f64(s.p(), i), Norm::Two)
        })
        .sum()
}

/// `log_k(gamma)`: the error bound grows like `n^exponent`.
pub fn error_exponent(gamma: f64, k: usize) -> f64 {
    gamma.ln() / (k as f64).ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthEntry {
    pub p: Norm,
    pub q: Norm,
    pub gamma: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub scheme: String,
    pub k: usize,
    pub entries: Vec<GrowthEntry>,
    pub gamma2: f64,
}

pub const NORM_PAIRS: [(Norm, Norm); 4] = [
    (Norm::Inf, Norm::Inf),
    (Norm::Inf, Norm::Two),
    (Norm::Two, Norm::Inf),
    (Norm::Two, Norm::Two),
];

impl GrowthReport {
    pub fn gamma(&self, p: Norm, q: Norm) -> Option<f64> {
        self.entries.iter().find(|e| (e.p, e.q) == (p, q)).map(|e| e.gamma)
    }

    pub fn exponent(&self, p: Norm, q: Norm) -> Option<f64> {
        self.entries.iter().find(|e| (e.p, e.q) == (p, q)).map(|e| e.exponent)
    }
}

pub fn growth_report(s: &LrpScheme, pairs: &[(Norm, Norm)]) -> GrowthReport {
    let k = s.dims().1;
    GrowthReport {
        scheme: s.id().to_string(),
        k,
        entries: pairs
            .iter()
            .map(|&(p, q)| {
                let gamma = growth_factor(s, p, q);
                GrowthEntry {
                    p,
                    q,
                    gamma,
                    exponent: error_exponent(gamma, k),
                }
            })
            .collect(),
        gamma2: gamma2(s),
    }
}

/// One row per scheme: each factor followed by its exponent, then `gamma2`.
pub fn render_growth_table(reports: &[GrowthReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let mut out = format!("{:<16}", "scheme");
    for e in &first.entries {
        out.push_str(&format!(" {:>22}", format!("g({},{}) [exp]", e.p, e.q)));
    }
    out.push_str(&format!(" {:>12}\n", "gamma2"));
    for r in reports {
        out.push_str(&format!("{:<16}", r.scheme));
        for e in &r.entries {
            out.push_str(&format!(" {:>22}", format!("{:.4} [{:.3}]", e.gamma, e.exponent)));
        }
        out.push_str(&format!(" {:>12.4}\n", r.gamma2));
    }
    out
}

/// Leading constant `1 + adds/(r - m n)` of the operation count of a square
/// recursive scheme, and its exponent `log_m r`.
pub fn complexity_constant(adds: u64, r: u64, m: u64, n: u64) -> Result<(Ratio<u64>, f64)> {
    if r <= m * n {
        return Err(FmmError::Invalid(format!("rank {r} must exceed m*n = {}", m * n)));
    }
    Ok((
        Ratio::from_integer(1) + Ratio::new(adds, r - m * n),
        (r as f64).ln() / (m as f64).ln(),
    ))
}

/// Same constant in an alternative basis of inner dimension `t`: the
/// recursion only pays for the core, `1 + adds/(r - t)`.
pub fn complexity_constant_alt(adds: u64, r: u64, t: u64, m: u64) -> Result<(Ratio<u64>, f64)> {
    if r <= t {
        return Err(FmmError::Invalid(format!("rank {r} must exceed the inner dimension {t}")));
    }
    Ok((
        Ratio::from_integer(1) + Ratio::new(adds, r - t),
        (r as f64).ln() / (m as f64).ln(),
    ))
}
