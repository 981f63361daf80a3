use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use crate::sat::Var;

/// A possibly negated reference to a circuit node, packed as `node * 2 + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bit(u32);

impl Bit {
    pub const TRUE: Bit = Bit(0);
    pub const FALSE: Bit = Bit(1);

    fn node(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }

    pub fn constant(value: bool) -> Bit {
        if value {
            Bit::TRUE
        } else {
            Bit::FALSE
        }
    }
}

impl Not for Bit {
    type Output = Bit;
    fn not(self) -> Bit {
        Bit(self.0 ^ 1)
    }
}

impl fmt::Debug for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bit::TRUE => f.write_str("T"),
            Bit::FALSE => f.write_str("F"),
            b => write!(f, "{}n{}", if b.negated() { "!" } else { "" }, b.node()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Node {
    True,
    Input(Var),
    And(Bit, Bit),
}

/// An and-inverter graph with structural hashing and constant folding.
#[derive(Debug)]
pub struct Circuit {
    nodes: Vec<Node>,
    ands: HashMap<(Bit, Bit), u32>,
    inputs: HashMap<Var, u32>,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub fn new() -> Self {
        Circuit {
            nodes: vec![Node::True],
            ands: HashMap::new(),
            inputs: HashMap::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn node(&self, bit: Bit) -> Node {
        self.nodes[bit.node()]
    }

    pub(crate) fn node_index(bit: Bit) -> usize {
        bit.node()
    }

    pub(crate) fn is_negated(bit: Bit) -> bool {
        bit.negated()
    }

    pub fn input(&mut self, var: Var) -> Bit {
        let idx = *self.inputs.entry(var).or_insert_with(|| {
            self.nodes.push(Node::Input(var));
            (self.nodes.len() - 1) as u32
        });
        Bit(idx << 1)
    }

    pub fn and(&mut self, a: Bit, b: Bit) -> Bit {
        if a == Bit::FALSE || b == Bit::FALSE || a == !b {
            return Bit::FALSE;
        }
        if a == Bit::TRUE || a == b {
            return b;
        }
        if b == Bit::TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        let idx = *self.ands.entry(key).or_insert_with(|| {
            self.nodes.push(Node::And(key.0, key.1));
            (self.nodes.len() - 1) as u32
        });
        Bit(idx << 1)
    }

    pub fn or(&mut self, a: Bit, b: Bit) -> Bit {
        !self.and(!a, !b)
    }

    pub fn implies(&mut self, a: Bit, b: Bit) -> Bit {
        self.or(!a, b)
    }

    pub fn ite(&mut self, c: Bit, t: Bit, e: Bit) -> Bit {
        if t == e {
            return t;
        }
        let x = self.and(c, t);
        let y = self.and(!c, e);
        self.or(x, y)
    }

    pub fn iff(&mut self, a: Bit, b: Bit) -> Bit {
        self.ite(a, b, !b)
    }

    pub fn xor(&mut self, a: Bit, b: Bit) -> Bit {
        !self.iff(a, b)
    }

    /// Balanced conjunction; TRUE when empty.
    pub fn and_all(&mut self, bits: impl IntoIterator<Item = Bit>) -> Bit {
        let mut layer: Vec<Bit> = bits.into_iter().collect();
        if layer.contains(&Bit::FALSE) {
            return Bit::FALSE;
        }
        layer.retain(|&b| b != Bit::TRUE);
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            for pair in layer.chunks(2) {
                next.push(match pair {
                    [a, b] => self.and(*a, *b),
                    [a] => *a,
                    _ => unreachable!(),
                });
            }
            layer = next;
        }
        layer.pop().unwrap_or(Bit::TRUE)
    }

    /// Balanced disjunction; FALSE when empty.
    pub fn or_all(&mut self, bits: impl IntoIterator<Item = Bit>) -> Bit {
        let negated: Vec<Bit> = bits.into_iter().map(|b| !b).collect();
        !self.and_all(negated)
    }

    /// Evaluates `roots` under an input valuation.
    pub fn eval_many(&self, roots: &[Bit], input: &dyn Fn(Var) -> bool) -> Vec<bool> {
        let mut memo: HashMap<usize, bool> = HashMap::new();
        roots.iter().map(|&r| self.eval_memo(r, input, &mut memo)).collect()
    }

    pub fn eval(&self, root: Bit, input: &dyn Fn(Var) -> bool) -> bool {
        self.eval_many(&[root], input)[0]
    }

    fn eval_memo(&self, root: Bit, input: &dyn Fn(Var) -> bool, memo: &mut HashMap<usize, bool>) -> bool {
        let mut stack = vec![root.node()];
        while let Some(&n) = stack.last() {
            if memo.contains_key(&n) {
                stack.pop();
                continue;
            }
            match self.nodes[n] {
                Node::True => {
                    memo.insert(n, true);
                    stack.pop();
                }
                Node::Input(v) => {
                    memo.insert(n, input(v));
                    stack.pop();
                }
                Node::And(a, b) => match (memo.get(&a.node()), memo.get(&b.node())) {
                    (Some(&x), Some(&y)) => {
                        let v = (x != a.negated()) && (y != b.negated());
                        memo.insert(n, v);
                        stack.pop();
                    }
                    (x, y) => {
                        if x.is_none() {
                            stack.push(a.node());
                        }
                        if y.is_none() {
                            stack.push(b.node());
                        }
                    }
                },
            }
        }
        memo[&root.node()] != root.negated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_and_hashing() {
        let mut c = Circuit::new();
        let a = c.input(1);
        let b = c.input(2);
        assert_eq!(c.and(a, Bit::TRUE), a);
        assert_eq!(c.and(a, !a), Bit::FALSE);
        let x = c.and(a, b);
        let y = c.and(b, a);
        assert_eq!(x, y);
        assert_eq!(c.input(1), a);
        assert_eq!(c.or_all([]), Bit::FALSE);
        assert_eq!(c.and_all([]), Bit::TRUE);
    }

    #[test]
    fn derived_gates_truth_tables() {
        let mut c = Circuit::new();
        let a = c.input(1);
        let b = c.input(2);
        let s = c.input(3);
        let gates = [c.or(a, b), c.xor(a, b), c.iff(a, b), c.ite(s, a, b), c.implies(a, b)];
        for m in 0..8u32 {
            let val = |v: Var| m >> (v - 1) & 1 == 1;
            let (x, y, z) = (val(1), val(2), val(3));
            let got = c.eval_many(&gates, &val);
            assert_eq!(got, vec![x || y, x != y, x == y, if z { x } else { y }, !x || y]);
        }
    }
}
