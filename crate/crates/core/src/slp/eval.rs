use std::collections::HashMap;

use num_integer::Integer;
use num_traits::Zero;

use super::{Instruction, SlpProgram, Term};
use crate::dyadic::Dyadic;
use crate::element::{Element, Linear};
use crate::error::{FmmError, Result};
use crate::matrix::{CoeffMatrix, Matrix};

fn slot<'a, V>(p: &SlpProgram, slots: &'a [Option<V>], id: usize) -> Result<&'a V> {
    slots[id]
        .as_ref()
        .ok_or_else(|| FmmError::MissingBinding(p.name(id).to_string()))
}

fn scaled<V: Linear>(v: &V, e: i64) -> V {
    if e == 0 {
        v.clone()
    } else {
        v.scale_pow2(e)
    }
}

/// Runs `p` on values given in input order; returns outputs in output order.
///
/// `product` implements `Product` instructions, which lets the same
/// interpreter recurse on sub-matrices. Temporaries are dropped after their
/// last read.
pub fn eval_slp_with<V, F>(p: &SlpProgram, inputs: Vec<V>, mut product: F) -> Result<Vec<V>>
where
    V: Linear,
    F: FnMut(&V, &V) -> V,
{
    if inputs.len() != p.inputs().len() {
        return Err(FmmError::Shape(format!(
            "{} values for {} inputs",
            inputs.len(),
            p.inputs().len()
        )));
    }
    let mut slots: Vec<Option<V>> = vec![None; p.names.len()];
    for (&id, v) in p.inputs().iter().zip(inputs) {
        slots[id] = Some(v);
    }
    for (i, ins) in p.instructions().iter().enumerate() {
        let value = match ins {
            Instruction::LinCombine {
                terms, post_scale, ..
            } => {
                let first: &Term = &terms[0];
                let v0 = slots[first.var]
                    .as_ref()
                    .ok_or_else(|| FmmError::MissingBinding(p.name(first.var).to_string()))?;
                let mut acc = scaled(v0, first.scale);
                if first.negative {
                    acc = acc.neg();
                }
                for t in &terms[1..] {
                    let v = slots[t.var]
                        .as_ref()
                        .ok_or_else(|| FmmError::MissingBinding(p.name(t.var).to_string()))?;
                    let x = scaled(v, t.scale);
                    acc = if t.negative { acc.sub(&x) } else { acc.add(&x) };
                }
                scaled(&acc, *post_scale)
            }
            Instruction::Product { left, right, .. } => {
                product(slot(p, &slots, *left)?, slot(p, &slots, *right)?)
            }
        };
        slots[ins.target()] = Some(value);
        for &v in &p.releases()[i] {
            slots[v] = None;
        }
    }
    p.outputs()
        .iter()
        .map(|&o| {
            slots[o]
                .clone()
                .ok_or_else(|| FmmError::MissingBinding(p.name(o).to_string()))
        })
        .collect()
}

/// Name-based evaluation over scalars; products use the element product.
pub fn eval_slp<T: Element>(p: &SlpProgram, bindings: &HashMap<String, T>) -> Result<HashMap<String, T>> {
    let inputs = p
        .input_names()
        .into_iter()
        .map(|n| {
            bindings
                .get(n)
                .cloned()
                .ok_or_else(|| FmmError::MissingBinding(n.to_string()))
        })
        .collect::<Result<Vec<T>>>()?;
    let out = eval_slp_with(p, inputs, |a: &T, b: &T| a.mul(b))?;
    Ok(p.output_names()
        .into_iter()
        .map(String::from)
        .zip(out)
        .collect())
}

/// Matrix of a linear program, one exact evaluation per input basis vector.
pub fn linear_map_of(p: &SlpProgram) -> Result<CoeffMatrix> {
    if let Some(Instruction::Product { target, .. }) = p
        .instructions()
        .iter()
        .find(|i| matches!(i, Instruction::Product { .. }))
    {
        return Err(FmmError::NotLinear(p.name(*target).to_string()));
    }
    let (rows, cols) = (p.outputs().len(), p.inputs().len());
    let mut m = Matrix::<Dyadic>::zeros(rows, cols);
    for j in 0..cols {
        let basis = (0..cols)
            .map(|i| if i == j { Dyadic::one() } else { Dyadic::zero() })
            .collect();
        let out = eval_slp_with(p, basis, |_: &Dyadic, _: &Dyadic| unreachable!())?;
        for (i, v) in out.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// True iff `p` computes exactly `m`.
pub fn verify_slp(p: &SlpProgram, m: &CoeffMatrix) -> bool {
    matches!(linear_map_of(p), Ok(ref got) if got == m)
}

/// Splits a nonzero coefficient into signed power-of-two parts.
fn power_of_two_parts(c: &Dyadic) -> Vec<(bool, i64)> {
    let negative = c.is_negative();
    let mut mag = c.mantissa().magnitude().clone();
    let mut parts = Vec::new();
    let mut bit = 0i64;
    while !mag.is_zero() {
        if mag.is_odd() {
            parts.push((negative, c.exp2() + bit));
        }
        mag >>= 1u32;
        bit += 1;
    }
    parts
}

/// One combination per row of `m`, summing its nonzero entries.
///
/// Coefficients that are not `±2^e` are expanded into their binary digits;
/// a power of two shared by a whole row becomes the post-scale.
pub fn naive_slp(m: &CoeffMatrix, input_names: &[&str], output_names: &[&str]) -> Result<SlpProgram> {
    if input_names.len() != m.cols() || output_names.len() != m.rows() {
        return Err(FmmError::Shape(format!(
            "{} input and {} output names for a {}x{} matrix",
            input_names.len(),
            output_names.len(),
            m.rows(),
            m.cols()
        )));
    }
    let mut names: Vec<String> = input_names.iter().map(|s| s.to_string()).collect();
    names.extend(output_names.iter().map(|s| s.to_string()));
    let inputs: Vec<usize> = (0..m.cols()).collect();
    let outputs: Vec<usize> = (m.cols()..m.cols() + m.rows()).collect();
    let mut instructions = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let mut terms: Vec<Term> = Vec::new();
        for (j, c) in m.row(i).iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (negative, scale) in power_of_two_parts(c) {
                terms.push(Term {
                    negative,
                    var: j,
                    scale,
                });
            }
        }
        if terms.is_empty() {
            return Err(FmmError::Slp(format!("row {i} is zero")));
        }
        // positive terms first so no leading negation is needed when avoidable
        terms.sort_by_key(|t| t.negative);
        let post_scale = terms.iter().map(|t| t.scale).min().unwrap_or(0);
        for t in &mut terms {
            t.scale -= post_scale;
        }
        instructions.push(Instruction::LinCombine {
            target: m.cols() + i,
            terms,
            post_scale,
        });
    }
    SlpProgram::new(names, inputs, outputs, instructions)
}

#[cfg(test)]
mod tests {
    use super::super::{parse_slp, OpCount};
    use super::*;
    use proptest::prelude::*;

    fn ints(rows: usize, cols: usize, v: &[i64]) -> CoeffMatrix {
        Matrix::from_vec(rows, cols, v.iter().map(|&x| Dyadic::from(x)).collect()).unwrap()
    }

    #[test]
    fn identity_copy() {
        let p = parse_slp("y=x;").unwrap();
        let mut b = HashMap::new();
        b.insert("x".to_string(), 3.5f64);
        assert_eq!(eval_slp(&p, &b).unwrap()["y"], 3.5);
        assert!(matches!(eval_slp(&p, &HashMap::<String, f64>::new()), Err(FmmError::MissingBinding(_))));
    }

    #[test]
    fn naive_examples() {
        let p = naive_slp(&ints(2, 2, &[1, 0, 0, 1]), &["x0", "x1"], &["y0", "y1"]).unwrap();
        assert_eq!(p.count_ops(), OpCount::default());
        assert_eq!(linear_map_of(&p).unwrap(), ints(2, 2, &[1, 0, 0, 1]));
        let p = naive_slp(&ints(1, 2, &[1, 1]), &["a", "b"], &["s"]).unwrap();
        assert_eq!(p.count_ops().additions, 1);
        assert!(naive_slp(&ints(1, 2, &[1, 1]), &["a"], &["s"]).is_err());
        assert!(naive_slp(&ints(1, 2, &[0, 0]), &["a", "b"], &["s"]).is_err());
    }

    #[test]
    fn naive_handles_general_dyadics() {
        let m = Matrix::from_vec(
            1,
            3,
            vec![Dyadic::normalize(3, -3), Dyadic::normalize(-1, -3), Dyadic::normalize(5, 1)],
        )
        .unwrap();
        let p = naive_slp(&m, &["a", "b", "c"], &["y"]).unwrap();
        assert!(verify_slp(&p, &m));
        // 3/8 -> two parts, -1/8 -> one, 10 -> two
        assert_eq!(p.count_ops().additions, 4);
    }

    #[test]
    fn products_are_not_linear() {
        let p = parse_slp("p=a*b;").unwrap();
        assert!(matches!(linear_map_of(&p), Err(FmmError::NotLinear(_))));
        assert!(!verify_slp(&p, &ints(1, 2, &[1, 1])));
    }

    proptest! {
        #[test]
        fn naive_verifies(rows in 1usize..6, cols in 1usize..6, vals in proptest::collection::vec((-4i64..5, -3i64..2), 36)) {
            let m = Matrix::from_fn(rows, cols, |i, j| {
                if j == 0 { Dyadic::one() } else { let (a, e) = vals[i * 6 + j]; Dyadic::normalize(a, e) }
            });
            let ins: Vec<String> = (0..cols).map(|j| format!("x{j}")).collect();
            let outs: Vec<String> = (0..rows).map(|i| format!("y{i}")).collect();
            let ins: Vec<&str> = ins.iter().map(String::as_str).collect();
            let outs: Vec<&str> = outs.iter().map(String::as_str).collect();
            let p = naive_slp(&m, &ins, &outs).unwrap();
            prop_assert!(verify_slp(&p, &m));
            let reparsed = parse_slp(&p.render()).unwrap();
            prop_assert!(verify_slp(&reparsed, &m));
            prop_assert_eq!(reparsed.count_ops(), p.count_ops());
        }
    }
}
