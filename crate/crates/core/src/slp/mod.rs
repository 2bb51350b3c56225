//! Straight-line programs for the linear and bilinear stages of a scheme.
//!
//! Statements follow the listing syntax: `x16=A13+A31;`,
//! `e88=(d55-r13-r23)/2;`, `q37=p3*2-q12+q6;`, `p0=l0*r0;`. Every scaling
//! is by a power of two.

mod eval;
mod parse;
mod transform;

use std::collections::HashMap;
use std::fmt;

pub use eval::{eval_slp, eval_slp_with, linear_map_of, naive_slp, verify_slp};
pub use parse::parse_slp;

use crate::error::{FmmError, Result};

/// Index into a program's variable table.
pub type VarId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub negative: bool,
    pub var: VarId,
    /// Power-of-two exponent applied to the variable.
    pub scale: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    /// `target = (±t1 ± t2 ...) * 2^post_scale`
    LinCombine {
        target: VarId,
        terms: Vec<Term>,
        post_scale: i64,
    },
    /// `target = left * right`
    Product {
        target: VarId,
        left: VarId,
        right: VarId,
    },
}

impl Instruction {
    pub fn target(&self) -> VarId {
        match self {
            Instruction::LinCombine { target, .. } | Instruction::Product { target, .. } => *target,
        }
    }

    pub fn operands(&self) -> Vec<VarId> {
        match self {
            Instruction::LinCombine { terms, .. } => terms.iter().map(|t| t.var).collect(),
            Instruction::Product { left, right, .. } => vec![*left, *right],
        }
    }
}

/// Additions, binary shifts and products of a program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize)]
pub struct OpCount {
    pub additions: usize,
    pub shifts: usize,
    pub products: usize,
}

impl OpCount {
    /// Linear operations (additions and shifts).
    pub fn linear_ops(&self) -> usize {
        self.additions + self.shifts
    }

    pub fn total(&self) -> usize {
        self.additions + self.shifts + self.products
    }
}

impl std::ops::Add for OpCount {
    type Output = OpCount;
    fn add(self, o: OpCount) -> OpCount {
        OpCount {
            additions: self.additions + o.additions,
            shifts: self.shifts + o.shifts,
            products: self.products + o.products,
        }
    }
}

impl fmt::Display for OpCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} additions, {} shifts, {} products",
            self.additions, self.shifts, self.products
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlpProgram {
    names: Vec<String>,
    inputs: Vec<VarId>,
    outputs: Vec<VarId>,
    instructions: Vec<Instruction>,
    // variables whose last read happens at instruction i
    releases: Vec<Vec<VarId>>,
}

impl SlpProgram {
    /// Checks single assignment, definition before use and defined outputs.
    pub fn new(
        names: Vec<String>,
        inputs: Vec<VarId>,
        outputs: Vec<VarId>,
        instructions: Vec<Instruction>,
    ) -> Result<Self> {
        let nvars = names.len();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.as_str(), i).is_some() {
                return Err(FmmError::Slp(format!("variable '{n}' declared twice")));
            }
        }
        let mut defined = vec![false; nvars];
        for &i in &inputs {
            if i >= nvars || defined[i] {
                return Err(FmmError::Slp("invalid or repeated input".into()));
            }
            defined[i] = true;
        }
        for ins in &instructions {
            if let Instruction::LinCombine { terms, .. } = ins {
                if terms.is_empty() {
                    return Err(FmmError::Slp(format!(
                        "'{}' has an empty linear combination",
                        names[ins.target()]
                    )));
                }
            }
            for v in ins.operands() {
                if v >= nvars || !defined[v] {
                    return Err(FmmError::Slp(format!(
                        "'{}' used before definition",
                        names.get(v).map(String::as_str).unwrap_or("?")
                    )));
                }
            }
            let t = ins.target();
            if t >= nvars {
                return Err(FmmError::Slp("target out of range".into()));
            }
            if defined[t] {
                return Err(FmmError::Slp(format!("'{}' assigned twice", names[t])));
            }
            defined[t] = true;
        }
        for &o in &outputs {
            if o >= nvars || !defined[o] {
                return Err(FmmError::Slp(format!(
                    "output '{}' is never defined",
                    names.get(o).map(String::as_str).unwrap_or("?")
                )));
            }
        }
        let releases = compute_releases(nvars, &outputs, &instructions);
        Ok(SlpProgram {
            names,
            inputs,
            outputs,
            instructions,
            releases,
        })
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v]
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn inputs(&self) -> &[VarId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[VarId] {
        &self.outputs
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.inputs.iter().map(|&v| self.name(v)).collect()
    }

    pub fn output_names(&self) -> Vec<&str> {
        self.outputs.iter().map(|&v| self.name(v)).collect()
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn is_linear(&self) -> bool {
        self.instructions
            .iter()
            .all(|i| matches!(i, Instruction::LinCombine { .. }))
    }

    pub(crate) fn releases(&self) -> &[Vec<VarId>] {
        &self.releases
    }

    pub fn count_ops(&self) -> OpCount {
        count_ops(self)
    }

    /// Same statements in a different order; must still define before use.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let instructions = order.iter().map(|&i| self.instructions[i].clone()).collect();
        SlpProgram::new(
            self.names.clone(),
            self.inputs.clone(),
            self.outputs.clone(),
            instructions,
        )
    }

    pub fn render(&self) -> String {
        parse::render(self)
    }
}

fn compute_releases(nvars: usize, outputs: &[VarId], instructions: &[Instruction]) -> Vec<Vec<VarId>> {
    let mut last = vec![None; nvars];
    for (i, ins) in instructions.iter().enumerate() {
        for v in ins.operands() {
            last[v] = Some(i);
        }
    }
    for &o in outputs {
        last[o] = None;
    }
    let mut releases = vec![Vec::new(); instructions.len()];
    for (v, l) in last.into_iter().enumerate() {
        if let Some(i) = l {
            releases[i].push(v);
        }
    }
    releases
}

/// Counting rule: a `t`-term combination costs `t - 1` additions (a lone
/// negated term costs one); every nonzero term scale or post-scale is one
/// shift whatever its magnitude; every product is one product.
pub fn count_ops(p: &SlpProgram) -> OpCount {
    let mut c = OpCount::default();
    for ins in &p.instructions {
        match ins {
            Instruction::LinCombine {
                terms, post_scale, ..
            } => {
                c.additions += match terms.len() {
                    1 if terms[0].negative => 1,
                    t => t - 1,
                };
                c.shifts += terms.iter().filter(|t| t.scale != 0).count();
                c.shifts += usize::from(*post_scale != 0);
            }
            Instruction::Product { .. } => c.products += 1,
        }
    }
    c
}

/// Orders names by alphabetic prefix, then by numeric suffix.
pub(crate) fn natural_key(name: &str) -> (String, u64, String) {
    let split = name
        .char_indices()
        .find(|(_, c)| c.is_ascii_digit())
        .map(|(i, _)| i)
        .unwrap_or(name.len());
    let (prefix, digits) = name.split_at(split);
    (prefix.to_string(), digits.parse().unwrap_or(0), digits.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_order() {
        let mut v = vec!["l10", "l2", "A21", "A12", "l0"];
        v.sort_by_key(|s| natural_key(s));
        assert_eq!(v, vec!["A12", "A21", "l0", "l2", "l10"]);
    }

    #[test]
    fn count_rules() {
        let p = parse_slp("#inputs: a b\n#outputs: x y z w\nx=a+b; y=(a-b)/8; z=-a; w=a*2+b/2;").unwrap();
        assert_eq!(
            p.count_ops(),
            OpCount {
                additions: 4,
                shifts: 3,
                products: 0
            }
        );
    }

    #[test]
    fn construction_errors() {
        assert!(parse_slp("#inputs: a\n#outputs: x\nx=a; x=a;").is_err());
        assert!(parse_slp("#inputs: a\n#outputs: x\nx=b+a;").is_err());
        assert!(parse_slp("#inputs: a\n#outputs: y\nx=a;").is_err());
    }

    #[test]
    fn releases_skip_outputs() {
        let p = parse_slp("#inputs: a b\n#outputs: x y\nx=a+b; y=x+a;").unwrap();
        let rel = p.releases();
        assert!(rel[1].contains(&p.var("a").unwrap()));
        assert!(!rel.iter().flatten().any(|&v| v == p.var("x").unwrap()));
    }
}
