//! Two's-complement arithmetic modelled with wide integers.

/// Reduces `v` into the signed range of `bitwidth` bits.
pub fn wrap(v: i128, bitwidth: u32) -> i64 {
    let m = 1i128 << bitwidth;
    let mut r = v.rem_euclid(m);
    if r >= m / 2 {
        r -= m;
    }
    r as i64
}

pub fn add(a: i64, b: i64, w: u32) -> i64 {
    wrap(a as i128 + b as i128, w)
}

pub fn sub(a: i64, b: i64, w: u32) -> i64 {
    wrap(a as i128 - b as i128, w)
}

pub fn mul(a: i64, b: i64, w: u32) -> i64 {
    wrap(a as i128 * b as i128, w)
}

/// Truncating division; `None` when dividing by zero.
pub fn div(a: i64, b: i64, w: u32) -> Option<i64> {
    if b == 0 {
        None
    } else {
        Some(wrap(a as i128 / b as i128, w))
    }
}

pub fn range(w: u32) -> std::ops::RangeInclusive<i64> {
    let half = 1i64 << (w - 1);
    -half..=half - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_at_four_bits() {
        assert_eq!(add(7, 1, 4), -8);
        assert_eq!(add(2, 2, 4), 4);
        assert_eq!(div(-8, -1, 4), Some(-8));
        assert_eq!(range(4).count(), 16);
    }
}
