//! Recursive multiplication driven by a scheme, with zero padding for
//! arbitrary sizes, and the alternative-basis variant.

use crate::catalog::{naive_programs, AltBasisScheme, SchemeBundle};
use crate::element::{Element, Linear};
use crate::error::{FmmError, Result};
use crate::matrix::Matrix;
use crate::slp::{eval_slp_with, SlpProgram};

pub use crate::matrix::classical_multiply;

/// How deep to recurse. With `levels: None` the depth is the smallest one
/// that brings every base dimension down to `base_threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecursionPlan {
    pub levels: Option<usize>,
    pub base_threshold: usize,
}

/// Resolved depth, base block shape and padded operand sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub levels: usize,
    pub base: (usize, usize, usize),
    pub padded: (usize, usize, usize),
}

impl RecursionPlan {
    pub fn auto(base_threshold: usize) -> Self {
        RecursionPlan {
            levels: None,
            base_threshold: base_threshold.max(1),
        }
    }

    pub fn fixed(levels: usize) -> Self {
        RecursionPlan {
            levels: Some(levels),
            base_threshold: 16,
        }
    }

    /// Threshold 16 for schemes with a block dimension of 4 or more, 8 below.
    pub fn default_for(dims: (usize, usize, usize)) -> Self {
        let big = dims.0.max(dims.1).max(dims.2);
        RecursionPlan::auto(if big >= 4 { 16 } else { 8 })
    }

    pub fn layout(&self, dims: (usize, usize, usize), size: (usize, usize, usize)) -> Layout {
        let pairs = [(dims.0, size.0), (dims.1, size.1), (dims.2, size.2)];
        let levels = self.levels.unwrap_or_else(|| {
            pairs
                .iter()
                .filter(|(d, _)| *d > 1)
                .map(|&(d, s)| {
                    let mut l = 0;
                    while s.div_ceil(d.pow(l as u32)) > self.base_threshold {
                        l += 1;
                    }
                    l
                })
                .max()
                .unwrap_or(0)
        });
        let base = pairs.map(|(d, s)| s.div_ceil(d.pow(levels as u32)).max(1));
        Layout {
            levels,
            base: (base[0], base[1], base[2]),
            padded: (
                base[0] * dims.0.pow(levels as u32),
                base[1] * dims.1.pow(levels as u32),
                base[2] * dims.2.pow(levels as u32),
            ),
        }
    }
}

/// Which description of the scheme drives the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driver {
    /// The bundle's own programs when present, otherwise the coefficients.
    Auto,
    Programs,
    /// Naive programs generated from `L`, `R`, `P`.
    Coefficients,
}

fn check_shapes<T>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(FmmError::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

fn eval_linear<V: Linear>(p: &SlpProgram, inputs: Vec<V>) -> Vec<V> {
    eval_slp_with(p, inputs, |_, _| unreachable!("product in a linear stage")).expect("stage arity checked")
}

fn check_programs(progs: &[SlpProgram; 4], dims: (usize, usize, usize), rank: usize) -> Result<()> {
    let (m, k, n) = dims;
    let [l, r, h, p] = progs;
    let ok = l.is_linear()
        && r.is_linear()
        && p.is_linear()
        && (l.inputs().len(), l.outputs().len()) == (m * k, rank)
        && (r.inputs().len(), r.outputs().len()) == (k * n, rank)
        && (h.inputs().len(), h.outputs().len()) == (2 * rank, rank)
        && (p.inputs().len(), p.outputs().len()) == (rank, m * n);
    if ok {
        Ok(())
    } else {
        Err(FmmError::Slp("programs do not fit the scheme's shape".into()))
    }
}

struct Dense<'a> {
    progs: &'a [SlpProgram; 4],
    dims: (usize, usize, usize),
}

impl Dense<'_> {
    fn run<T: Element>(&self, a: &Matrix<T>, b: &Matrix<T>, level: usize) -> Matrix<T> {
        if level == 0 {
            return classical_multiply(a, b).expect("padded shapes agree");
        }
        let (m, k, n) = self.dims;
        let [lp, rp, hp, pp] = self.progs;
        let mut operands = eval_linear(lp, a.split_grid(m, k));
        operands.extend(eval_linear(rp, b.split_grid(k, n)));
        let products =
            eval_slp_with(hp, operands, |x, y| self.run(x, y, level - 1)).expect("stage arity checked");
        Matrix::from_grid(&eval_linear(pp, products), m, n)
    }
}

/// `A * B` through the bundle's scheme; sizes are padded with zeros as the
/// plan requires and the result is cropped back.
pub fn multiply<T: Element>(bundle: &SchemeBundle, a: &Matrix<T>, b: &Matrix<T>, plan: &RecursionPlan) -> Result<Matrix<T>> {
    multiply_driven(bundle, a, b, plan, Driver::Auto)
}

pub fn multiply_driven<T: Element>(
    bundle: &SchemeBundle,
    a: &Matrix<T>,
    b: &Matrix<T>,
    plan: &RecursionPlan,
    driver: Driver,
) -> Result<Matrix<T>> {
    check_shapes(a, b)?;
    let s = &bundle.scheme;
    let progs = match (driver, bundle.has_slps()) {
        (Driver::Coefficients, _) | (Driver::Auto, false) => naive_programs(s)?,
        (Driver::Auto | Driver::Programs, true) => bundle.programs_or_naive()?,
        (Driver::Programs, false) => {
            return Err(FmmError::Slp(format!("scheme '{}' has no programs", s.id())));
        }
    };
    check_programs(&progs, s.dims(), s.rank())?;
    let (rows, cols) = (a.rows(), b.cols());
    if rows == 0 || cols == 0 || a.cols() == 0 {
        return Ok(Matrix::zeros(rows, cols));
    }
    let lay = plan.layout(s.dims(), (rows, a.cols(), cols));
    let (pm, pk, pn) = lay.padded;
    let engine = Dense {
        progs: &progs,
        dims: s.dims(),
    };
    let c = engine.run(&a.resized(pm, pk), &b.resized(pk, pn), lay.levels);
    Ok(c.resized(rows, cols))
}

/// A list of equally shaped blocks, combined entrywise.
#[derive(Clone, Debug)]
struct BlockSet<T>(Vec<Matrix<T>>);

impl<T: Linear> Linear for BlockSet<T> {
    fn add(&self, other: &Self) -> Self {
        BlockSet(self.0.iter().zip(&other.0).map(|(x, y)| x.add(y)).collect())
    }
    fn sub(&self, other: &Self) -> Self {
        BlockSet(self.0.iter().zip(&other.0).map(|(x, y)| x.sub(y)).collect())
    }
    fn neg(&self) -> Self {
        BlockSet(self.0.iter().map(Linear::neg).collect())
    }
    fn scale_pow2(&self, e: i64) -> Self {
        BlockSet(self.0.iter().map(|x| x.scale_pow2(e)).collect())
    }
}

fn regroup<T>(v: Vec<Matrix<T>>, groups: usize) -> Vec<BlockSet<T>> {
    let size = v.len() / groups;
    let mut it = v.into_iter();
    (0..groups).map(|_| BlockSet(it.by_ref().take(size).collect())).collect()
}

struct Alt<'a> {
    alt: &'a AltBasisScheme,
    dims: (usize, usize, usize),
}

impl Alt<'_> {
    /// Change of basis applied recursively: `inner^level` base blocks,
    /// ordered with the outermost level first.
    fn forward<T: Element>(&self, prog: &SlpProgram, x: &Matrix<T>, grid: (usize, usize), level: usize) -> Vec<Matrix<T>> {
        if level == 0 {
            return vec![x.clone()];
        }
        eval_linear(prog, x.split_grid(grid.0, grid.1))
            .iter()
            .flat_map(|u| self.forward(prog, u, grid, level - 1))
            .collect()
    }

    fn backward<T: Element>(&self, w: Vec<Matrix<T>>, level: usize) -> Matrix<T> {
        if level == 0 {
            return w.into_iter().next().expect("one base block");
        }
        let parts: Vec<Matrix<T>> = regroup(w, self.alt.inner)
            .into_iter()
            .map(|g| self.backward(g.0, level - 1))
            .collect();
        Matrix::from_grid(&eval_linear(&self.alt.cob_p, parts), self.dims.0, self.dims.2)
    }

    fn core<T: Element>(&self, x: Vec<Matrix<T>>, y: Vec<Matrix<T>>, level: usize) -> Vec<Matrix<T>> {
        if level == 0 {
            return vec![classical_multiply(&x[0], &y[0]).expect("padded shapes agree")];
        }
        let l = eval_linear(&self.alt.core_l, regroup(x, self.alt.inner));
        let r = eval_linear(&self.alt.core_r, regroup(y, self.alt.inner));
        let products: Vec<BlockSet<T>> = l
            .into_iter()
            .zip(r)
            .map(|(u, v)| BlockSet(self.core(u.0, v.0, level - 1)))
            .collect();
        eval_linear(&self.alt.core_p, products)
            .into_iter()
            .flat_map(|b| b.0)
            .collect()
    }
}

/// `A * B` in the alternative basis: both operands are transformed
/// recursively, the sparse core runs on the transformed blocks, and the
/// result is transformed back.
pub fn multiply_alt<T: Element>(bundle: &SchemeBundle, a: &Matrix<T>, b: &Matrix<T>, plan: &RecursionPlan) -> Result<Matrix<T>> {
    check_shapes(a, b)?;
    let s = &bundle.scheme;
    let alt = bundle
        .alt
        .as_ref()
        .ok_or_else(|| FmmError::NoAltBasis(s.id().to_string()))?;
    let (rows, cols) = (a.rows(), b.cols());
    if rows == 0 || cols == 0 || a.cols() == 0 {
        return Ok(Matrix::zeros(rows, cols));
    }
    let dims = s.dims();
    let lay = plan.layout(dims, (rows, a.cols(), cols));
    let (pm, pk, pn) = lay.padded;
    let engine = Alt { alt, dims };
    let x = engine.forward(&alt.cob_l, &a.resized(pm, pk), (dims.0, dims.1), lay.levels);
    let y = engine.forward(&alt.cob_r, &b.resized(pk, pn), (dims.1, dims.2), lay.levels);
    let c = engine.backward(engine.core(x, y, lay.levels), lay.levels);
    Ok(c.resized(rows, cols))
}
