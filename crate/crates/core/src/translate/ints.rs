//! Fixed-width two's-complement integer circuits. Vectors are LSB first.

use super::circuit::{Bit, Circuit};

pub type IntBits = Vec<Bit>;

pub fn constant(value: i64, width: usize) -> IntBits {
    (0..width)
        .map(|i| Bit::constant((value >> i.min(63)) & 1 == 1))
        .collect()
}

fn full_add(c: &mut Circuit, a: Bit, b: Bit, carry: Bit) -> (Bit, Bit) {
    let ab = c.xor(a, b);
    let sum = c.xor(ab, carry);
    let x = c.and(a, b);
    let y = c.and(ab, carry);
    (sum, c.or(x, y))
}

/// Ripple-carry addition with an incoming carry; returns the sum and the
/// carry out of the top bit.
fn add_with_carry(c: &mut Circuit, a: &[Bit], b: &[Bit], mut carry: Bit) -> (IntBits, Bit) {
    let mut out = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let (s, k) = full_add(c, x, y, carry);
        out.push(s);
        carry = k;
    }
    (out, carry)
}

pub fn add(c: &mut Circuit, a: &[Bit], b: &[Bit]) -> IntBits {
    add_with_carry(c, a, b, Bit::FALSE).0
}

pub fn sub(c: &mut Circuit, a: &[Bit], b: &[Bit]) -> IntBits {
    let nb: Vec<Bit> = b.iter().map(|&x| !x).collect();
    add_with_carry(c, a, &nb, Bit::TRUE).0
}

pub fn negate(c: &mut Circuit, a: &[Bit]) -> IntBits {
    let zero = vec![Bit::FALSE; a.len()];
    sub(c, &zero, a)
}

/// Shift-and-add; the low `width` bits of the product are the same for
/// signed and unsigned operands.
pub fn mul(c: &mut Circuit, a: &[Bit], b: &[Bit]) -> IntBits {
    let width = a.len();
    let mut acc = vec![Bit::FALSE; width];
    for (i, &bi) in b.iter().enumerate() {
        let mut partial = vec![Bit::FALSE; width];
        for j in 0..width - i {
            partial[i + j] = c.and(a[j], bi);
        }
        acc = add(c, &acc, &partial);
    }
    acc
}

fn mux(c: &mut Circuit, sel: Bit, t: &[Bit], e: &[Bit]) -> IntBits {
    t.iter().zip(e).map(|(&x, &y)| c.ite(sel, x, y)).collect()
}

fn abs(c: &mut Circuit, a: &[Bit]) -> IntBits {
    let neg = negate(c, a);
    mux(c, a[a.len() - 1], &neg, a)
}

/// Signed division truncating toward zero. The result for a zero divisor is
/// unspecified; callers must rule it out.
pub fn div(c: &mut Circuit, a: &[Bit], b: &[Bit]) -> IntBits {
    let width = a.len();
    let ua = abs(c, a);
    let ub = abs(c, b);
    let mut ub_ext = ub.clone();
    ub_ext.push(Bit::FALSE);
    let mut rem = vec![Bit::FALSE; width + 1];
    let mut q = vec![Bit::FALSE; width];
    for i in (0..width).rev() {
        rem.pop();
        rem.insert(0, ua[i]);
        let nb: Vec<Bit> = ub_ext.iter().map(|&x| !x).collect();
        let (diff, no_borrow) = add_with_carry(c, &rem, &nb, Bit::TRUE);
        q[i] = no_borrow;
        rem = mux(c, no_borrow, &diff, &rem);
    }
    let sign = c.xor(a[width - 1], b[width - 1]);
    let nq = negate(c, &q);
    mux(c, sign, &nq, &q)
}

pub fn equal(c: &mut Circuit, a: &[Bit], b: &[Bit]) -> Bit {
    let bits: Vec<Bit> = a.iter().zip(b).map(|(&x, &y)| c.iff(x, y)).collect();
    c.and_all(bits)
}

/// Signed a < b, computed as the sign of a - b in one extra bit.
pub fn less_than(c: &mut Circuit, a: &[Bit], b: &[Bit]) -> Bit {
    let mut x = a.to_vec();
    x.push(a[a.len() - 1]);
    let mut y = b.to_vec();
    y.push(b[b.len() - 1]);
    let d = sub(c, &x, &y);
    d[d.len() - 1]
}

/// Population count of `bits`, wrapped to `width`.
pub fn count(c: &mut Circuit, bits: &[Bit], width: usize) -> IntBits {
    let mut layer: Vec<IntBits> = bits
        .iter()
        .map(|&b| {
            let mut v = vec![Bit::FALSE; width];
            v[0] = b;
            v
        })
        .collect();
    if layer.is_empty() {
        return vec![Bit::FALSE; width];
    }
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        for pair in layer.chunks(2) {
            next.push(match pair {
                [a, b] => add(c, a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            });
        }
        layer = next;
    }
    layer.pop().unwrap()
}

/// Sum of `terms`, wrapped to their width.
pub fn sum(c: &mut Circuit, terms: Vec<IntBits>, width: usize) -> IntBits {
    terms
        .into_iter()
        .reduce(|a, b| add(c, &a, &b))
        .unwrap_or_else(|| vec![Bit::FALSE; width])
}

/// Reads a vector back as a signed value.
pub fn decode(values: &[bool]) -> i64 {
    let width = values.len();
    let mut v: i64 = 0;
    for (i, &b) in values.iter().enumerate() {
        if b {
            v |= 1 << i;
        }
    }
    if width < 64 && values[width - 1] {
        v -= 1 << width;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::wrap;

    fn eval(c: &Circuit, bits: &[Bit]) -> i64 {
        decode(&c.eval_many(bits, &|_| false))
    }

    #[test]
    fn constant_arithmetic_folds_exhaustively() {
        let w = 4;
        for x in -8i64..8 {
            for y in -8i64..8 {
                let mut c = Circuit::new();
                let (a, b) = (constant(x, w), constant(y, w));
                assert_eq!(eval(&c, &a), x);
                let s = add(&mut c, &a, &b);
                assert_eq!(eval(&c, &s), wrap((x + y) as i128, 4));
                let d = sub(&mut c, &a, &b);
                assert_eq!(eval(&c, &d), wrap((x - y) as i128, 4));
                let m = mul(&mut c, &a, &b);
                assert_eq!(eval(&c, &m), wrap((x * y) as i128, 4));
                if y != 0 {
                    let q = div(&mut c, &a, &b);
                    assert_eq!(eval(&c, &q), wrap((x / y) as i128, 4), "{x}/{y}");
                }
                let lt = less_than(&mut c, &a, &b);
                assert_eq!(c.eval(lt, &|_| false), x < y);
                let eq = equal(&mut c, &a, &b);
                assert_eq!(c.eval(eq, &|_| false), x == y);
            }
        }
    }

    #[test]
    fn count_wraps() {
        let mut c = Circuit::new();
        let bits = vec![Bit::TRUE; 9];
        let n = count(&mut c, &bits, 4);
        assert_eq!(eval(&c, &n), -7);
    }
}
