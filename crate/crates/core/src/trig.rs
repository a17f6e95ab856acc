//! Trigonometry in turns (one turn = 2 pi radians).
//!
//! Arguments are reduced modulo one turn before scaling by 2 pi, which keeps
//! `cos(2 pi f t)` accurate for large `t` and makes quarter turns exact.

use std::f64::consts::TAU;

// Reduce to n quarter turns plus a remainder in [-1/8, 1/8].
#[inline]
fn reduce(x: f64) -> (u8, f64) {
    let r = x - x.floor();
    let n = (4.0 * r).round();
    let y = r - n / 4.0;
    ((n as i64).rem_euclid(4) as u8, TAU * y)
}

/// `cos(2 pi x)`, exactly even in x.
#[inline]
pub fn cos_turns(x: f64) -> f64 {
    let (q, th) = reduce(x.abs());
    match q {
        0 => th.cos(),
        1 => -th.sin(),
        2 => -th.cos(),
        _ => th.sin(),
    }
}

/// `sin(2 pi x)`, exactly odd in x.
#[inline]
pub fn sin_turns(x: f64) -> f64 {
    if x < 0.0 {
        return -sin_turns(-x);
    }
    let (q, th) = reduce(x);
    match q {
        0 => th.sin(),
        1 => th.cos(),
        2 => -th.sin(),
        _ => -th.cos(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(cos_turns(0.25), 0.0);
        assert_eq!(cos_turns(0.5), -1.0);
        assert_eq!(sin_turns(0.5), 0.0);
        assert_eq!(sin_turns(-0.25), -1.0);
        assert_eq!(cos_turns(17.0), 1.0);
    }

    #[test]
    fn matches_std() {
        for i in 0..1000 {
            let x = (i as f64) * 0.01237 - 5.0;
            assert!((cos_turns(x) - (TAU * x).cos()).abs() < 1e-13);
            assert!((sin_turns(x) - (TAU * x).sin()).abs() < 1e-13);
        }
    }
}
