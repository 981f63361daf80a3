//! Order-theoretic properties of a binary relation on `0..n`, written as
//! direct loops over the pairs.

use std::collections::BTreeSet;

use crate::graph::closure;

pub type Pairs = BTreeSet<(usize, usize)>;

pub fn acyclic(n: usize, r: &Pairs) -> bool {
    let c = closure(n, r);
    (0..n).all(|x| !c.contains(&(x, x)))
}

pub fn transitive(n: usize, r: &Pairs) -> bool {
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if r.contains(&(a, b)) && r.contains(&(b, c)) && !r.contains(&(a, c)) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn reflexive(n: usize, r: &Pairs) -> bool {
    (0..n).all(|x| r.contains(&(x, x)))
}

pub fn irreflexive(n: usize, r: &Pairs) -> bool {
    (0..n).all(|x| !r.contains(&(x, x)))
}

pub fn symmetric(_n: usize, r: &Pairs) -> bool {
    r.iter().all(|&(a, b)| r.contains(&(b, a)))
}

pub fn asymmetric(_n: usize, r: &Pairs) -> bool {
    r.iter().all(|&(a, b)| !r.contains(&(b, a)))
}

pub fn antisymmetric(_n: usize, r: &Pairs) -> bool {
    r.iter().all(|&(a, b)| a == b || !r.contains(&(b, a)))
}

fn out_degree(n: usize, r: &Pairs, a: usize) -> usize {
    (0..n).filter(|&b| r.contains(&(a, b))).count()
}

fn in_degree(n: usize, r: &Pairs, b: usize) -> usize {
    (0..n).filter(|&a| r.contains(&(a, b))).count()
}

pub fn functional(n: usize, r: &Pairs) -> bool {
    (0..n).all(|a| out_degree(n, r, a) <= 1)
}

pub fn total(n: usize, r: &Pairs) -> bool {
    (0..n).all(|a| out_degree(n, r, a) >= 1)
}

pub fn injective(n: usize, r: &Pairs) -> bool {
    (0..n).all(|b| in_degree(n, r, b) <= 1)
}

pub fn surjective(n: usize, r: &Pairs) -> bool {
    (0..n).all(|b| in_degree(n, r, b) >= 1)
}

pub fn bijective(n: usize, r: &Pairs) -> bool {
    functional(n, r) && injective(n, r) && surjective(n, r)
}

pub fn bijection(n: usize, r: &Pairs) -> bool {
    bijective(n, r) && total(n, r)
}

pub fn complete(n: usize, r: &Pairs) -> bool {
    for a in 0..n {
        for b in 0..n {
            if a != b && !r.contains(&(a, b)) && !r.contains(&(b, a)) {
                return false;
            }
        }
    }
    true
}

pub fn preorder(n: usize, r: &Pairs) -> bool {
    reflexive(n, r) && transitive(n, r)
}

pub fn equivalence(n: usize, r: &Pairs) -> bool {
    preorder(n, r) && symmetric(n, r)
}

pub fn partial_order(n: usize, r: &Pairs) -> bool {
    preorder(n, r) && antisymmetric(n, r)
}

pub fn total_order(n: usize, r: &Pairs) -> bool {
    partial_order(n, r) && complete(n, r)
}

/// The property for a keyword, by name.
pub fn by_keyword(keyword: &str) -> Option<fn(usize, &Pairs) -> bool> {
    Some(match keyword {
        "acyclic" => acyclic,
        "transitive" => transitive,
        "reflexive" => reflexive,
        "irreflexive" => irreflexive,
        "symmetric" => symmetric,
        "asymmetric" => asymmetric,
        "antisymmetric" => antisymmetric,
        "functional" => functional,
        "total" => total,
        "injective" => injective,
        "surjective" => surjective,
        "bijective" => bijective,
        "bijection" => bijection,
        "complete" => complete,
        "preorder" => preorder,
        "equivalence" => equivalence,
        "partialorder" => partial_order,
        "totalorder" => total_order,
        _ => return None,
    })
}

/// Every relation on `0..n`, as the `2^(n*n)` subsets of pairs.
pub fn all_relations(n: usize) -> impl Iterator<Item = Pairs> {
    let cells = n * n;
    (0u64..1 << cells).map(move |mask| {
        (0..cells)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (i / n, i % n))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_an_equivalence_and_a_total_order_on_one_atom() {
        let id: Pairs = BTreeSet::from([(0, 0)]);
        assert!(equivalence(1, &id));
        assert!(total_order(1, &id));
        assert!(!acyclic(1, &id));
        assert_eq!(all_relations(3).count(), 512);
    }
}
