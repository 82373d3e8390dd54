//! The map `f` with `f(x)_i = x_{f(x)_{<i}}` and its depth-2 formula.
//!
//! An assignment gives one bit per prefix string of length `< n`; the bit
//! of prefix `p` lives at index `heap_index(p) - 1`.

use alloc::vec::Vec;

use super::tree::heap_index;

/// `f(x)` by `n` sequential lookups.
pub fn eval_f(n: usize, assignment: &[bool]) -> u64 {
    let mut y = 0u64;
    let mut h = 1usize;
    for _ in 0..n {
        let bit = assignment[h - 1];
        y = (y << 1) | bit as u64;
        h = 2 * h + bit as usize;
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    /// Assignment index of the variable.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

/// One disjunction of conjunctions per output bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dnf {
    pub n: usize,
    /// `outputs[j - 1]` lists the terms of output bit `j`.
    pub outputs: Vec<Vec<Vec<Literal>>>,
}

impl Dnf {
    pub fn evaluate(&self, assignment: &[bool]) -> u64 {
        self.outputs.iter().fold(0u64, |acc, terms| {
            let bit = terms.iter().any(|t| t.iter().all(|l| l.eval(assignment)));
            (acc << 1) | bit as u64
        })
    }

    /// Number of literal occurrences.
    pub fn size(&self) -> usize {
        self.outputs.iter().flatten().map(Vec::len).sum()
    }

    pub fn num_terms(&self) -> usize {
        self.outputs.iter().map(Vec::len).sum()
    }
}

/// Output bit `j` is 1 iff some `t` of length `j` ending in 1 satisfies
/// `x_{t_{<i}} = t_i` for all `i <= j`.
pub fn build_f_dnf(n: usize) -> Dnf {
    let outputs = (1..=n)
        .map(|j| {
            (0..1usize << (j - 1))
                .map(|head| {
                    let t = (head << 1) | 1;
                    (1..=j)
                        .map(|i| Literal {
                            var: heap_index(i - 1, t >> (j - i + 1)) - 1,
                            positive: (t >> (j - i)) & 1 == 1,
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Dnf { n, outputs }
}
