//! Transitive closure by Floyd-Warshall on a dense matrix.

use std::collections::BTreeSet;

#[allow(clippy::needless_range_loop)]
/// The transitive closure of `pairs` over atoms `0..n`.
pub fn closure(n: usize, pairs: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in pairs {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x {
                out.insert((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain() {
        let r = BTreeSet::from([(0, 1), (1, 2)]);
        assert_eq!(closure(3, &r), BTreeSet::from([(0, 1), (1, 2), (0, 2)]));
    }
}
