use std::collections::{HashMap, HashSet};

use super::{Instruction, SlpProgram, Term, VarId};
use crate::error::{FmmError, Result};

impl SlpProgram {
    /// Specializes the program to a new interface.
    ///
    /// Inputs not listed in `inputs` are fixed to zero and folded away;
    /// `outputs` may name any defined variables, in any order. Statements
    /// that no output depends on are removed.
    pub fn restrict(&self, inputs: &[&str], outputs: &[&str]) -> Result<SlpProgram> {
        let lookup = |n: &str| {
            self.var(n)
                .ok_or_else(|| FmmError::Slp(format!("unknown variable '{n}'")))
        };
        let new_inputs: Vec<VarId> = inputs.iter().map(|n| lookup(n)).collect::<Result<_>>()?;
        let new_outputs: Vec<VarId> = outputs.iter().map(|n| lookup(n)).collect::<Result<_>>()?;
        for &v in &new_inputs {
            if !self.inputs.contains(&v) {
                return Err(FmmError::Slp(format!("'{}' is not an input", self.name(v))));
            }
        }

        let mut zero: HashSet<VarId> = self
            .inputs
            .iter()
            .copied()
            .filter(|v| !new_inputs.contains(v))
            .collect();
        let mut folded = Vec::with_capacity(self.instructions.len());
        for ins in &self.instructions {
            match ins {
                Instruction::LinCombine {
                    target,
                    terms,
                    post_scale,
                } => {
                    let kept: Vec<Term> = terms.iter().copied().filter(|t| !zero.contains(&t.var)).collect();
                    if kept.is_empty() {
                        zero.insert(*target);
                    } else {
                        folded.push(Instruction::LinCombine {
                            target: *target,
                            terms: kept,
                            post_scale: *post_scale,
                        });
                    }
                }
                Instruction::Product { target, left, right } => {
                    if zero.contains(left) || zero.contains(right) {
                        zero.insert(*target);
                    } else {
                        folded.push(ins.clone());
                    }
                }
            }
        }
        for &o in &new_outputs {
            if zero.contains(&o) {
                return Err(FmmError::Slp(format!(
                    "output '{}' is identically zero after restriction",
                    self.name(o)
                )));
            }
        }

        // dead-code elimination, walking backwards from the outputs
        let mut live: HashSet<VarId> = new_outputs.iter().copied().collect();
        let mut kept = Vec::new();
        for ins in folded.into_iter().rev() {
            if live.contains(&ins.target()) {
                live.extend(ins.operands());
                kept.push(ins);
            }
        }
        kept.reverse();

        // compact the variable table
        let mut used: Vec<VarId> = new_inputs.clone();
        for ins in &kept {
            used.push(ins.target());
        }
        for &o in &new_outputs {
            if !used.contains(&o) {
                used.push(o);
            }
        }
        let remap: HashMap<VarId, VarId> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let names = used.iter().map(|&v| self.names[v].clone()).collect();
        let instructions = kept
            .into_iter()
            .map(|ins| match ins {
                Instruction::LinCombine {
                    target,
                    terms,
                    post_scale,
                } => Instruction::LinCombine {
                    target: remap[&target],
                    terms: terms
                        .into_iter()
                        .map(|t| Term {
                            var: remap[&t.var],
                            ..t
                        })
                        .collect(),
                    post_scale,
                },
                Instruction::Product { target, left, right } => Instruction::Product {
                    target: remap[&target],
                    left: remap[&left],
                    right: remap[&right],
                },
            })
            .collect();
        SlpProgram::new(
            names,
            new_inputs.iter().map(|v| remap[v]).collect(),
            new_outputs.iter().map(|v| remap[v]).collect(),
            instructions,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::super::{linear_map_of, parse_slp};
    use crate::dyadic::Dyadic;
    use crate::matrix::Matrix;

    #[test]
    fn zero_inputs_fold_and_dead_code_goes() {
        let p = parse_slp("#inputs: a b c\n#outputs: x y z\nt=a+b; x=t-c; y=b+c; z=(t+b)/2;").unwrap();
        let q = p.restrict(&["c", "a"], &["x", "z"]).unwrap();
        assert_eq!(q.input_names(), vec!["c", "a"]);
        // t=a, x=t-c, z=(t)/2
        assert_eq!(q.count_ops().additions, 1);
        let m = linear_map_of(&q).unwrap();
        let h = Dyadic::normalize(1, -1);
        let want = Matrix::from_vec(2, 2, vec![Dyadic::from(-1), Dyadic::one(), Dyadic::zero(), h]).unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn zero_output_is_an_error() {
        let p = parse_slp("#inputs: a b\n#outputs: x\nx=b;").unwrap();
        assert!(p.restrict(&["a"], &["x"]).is_err());
        assert!(p.restrict(&["a"], &["nope"]).is_err());
    }
}
