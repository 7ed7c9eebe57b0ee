use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Highest Legendre degree accepted by the special-function routines.
pub const MAX_DEGREE: usize = 4096;

const DOMAIN_SLACK: f64 = 1e-12;

pub(crate) fn check_degree(l: usize) -> Result<()> {
    if l > MAX_DEGREE {
        return Err(Error::Config(format!(
            "degree {l} exceeds the maximum supported degree {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// Clamps `x` into `[-1, 1]` if it lies within the rounding slack, errors otherwise.
pub(crate) fn check_argument(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

#[inline]
fn bonnet_step(l: usize, x: f64, p_l: f64, p_lm1: f64) -> f64 {
    let lf = l as f64;
    ((2.0 * lf + 1.0) * x * p_l - lf * p_lm1) / (lf + 1.0)
}

/// Legendre polynomial `P_l(x)` by the Bonnet three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> Result<f64> {
    check_degree(l)?;
    let x = check_argument(x)?;
    Ok(legendre_unchecked(l, x))
}

pub(crate) fn legendre_unchecked(l: usize, x: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..l {
        let next = bonnet_step(k, x, cur, prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `[P_0(x), ..., P_l(x)]` in one recurrence pass. Each entry matches
/// [`legendre_p`] bit for bit.
pub fn legendre_p_sequence(l: usize, x: f64) -> Result<Vec<f64>> {
    check_degree(l)?;
    let x = check_argument(x)?;
    Ok(legendre_sequence_unchecked(l, x))
}

pub(crate) fn legendre_sequence_unchecked(l: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(l + 1);
    out.push(1.0);
    if l == 0 {
        return out;
    }
    out.push(x);
    for k in 1..l {
        let next = bonnet_step(k, x, out[k], out[k - 1]);
        out.push(next);
    }
    out
}

/// Fully normalized associated Legendre function
/// `sqrt((2l+1)/(4π) (l-m)!/(l+m)!) P_l^m(x)`, without the Condon-Shortley phase.
///
/// Uses the standard normalized recurrences (sectoral seed, then upward in
/// degree), so no factorial ratio is ever formed.
pub fn assoc_legendre_normalized(l: usize, m: usize, x: f64) -> Result<f64> {
    if m > l {
        return Err(Error::Index {
            degree: l,
            order: m as i64,
        });
    }
    check_degree(l)?;
    let x = check_argument(x)?;
    Ok(assoc_unchecked(l, m, x))
}

pub(crate) fn assoc_unchecked(l: usize, m: usize, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    // sectoral value P̄_m^m
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut prev = pmm;
    let mut cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
    for k in (m + 2)..=l {
        let kf = k as f64;
        let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
        let km1 = kf - 1.0;
        let b = ((km1 * km1 - mf * mf) / (4.0 * km1 * km1 - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_bigint::BigUint;
    use proptest::prelude::*;

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_p(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_p(5, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(legendre_p(2, 0.5).unwrap(), -0.125, epsilon = 1e-16);
    }

    #[test]
    fn endpoints_are_exact() {
        for l in [1usize, 2, 17, 100, 4096] {
            assert_eq!(legendre_p(l, 1.0).unwrap(), 1.0);
            let expected = if l % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(legendre_p(l, -1.0).unwrap(), expected);
        }
    }

    #[test]
    fn sequence_examples() {
        assert_eq!(legendre_p_sequence(2, 0.5).unwrap(), vec![1.0, 0.5, -0.125]);
        assert_eq!(legendre_p_sequence(0, -1.0).unwrap(), vec![1.0]);
        assert_eq!(legendre_p_sequence(3, 1.0).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn domain_and_degree_errors() {
        assert!(matches!(legendre_p(3, 1.1), Err(Error::Domain(_))));
        assert!(matches!(legendre_p(3, f64::NAN), Err(Error::Domain(_))));
        // inside the slack: clamped
        assert_eq!(legendre_p(3, 1.0 + 1e-13).unwrap(), 1.0);
        assert!(matches!(legendre_p(MAX_DEGREE + 1, 0.0), Err(Error::Config(_))));
        assert!(matches!(
            assoc_legendre_normalized(2, 3, 0.0),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn normalized_associated_examples() {
        let y00 = 1.0 / (2.0 * PI.sqrt());
        assert_abs_diff_eq!(assoc_legendre_normalized(0, 0, 0.7).unwrap(), y00, epsilon = 1e-15);
        assert_abs_diff_eq!(
            assoc_legendre_normalized(1, 0, 1.0).unwrap(),
            (3.0 / (4.0 * PI)).sqrt(),
            epsilon = 1e-15
        );
        // P_2^1(x) = 3x sqrt(1-x^2) without the Condon-Shortley phase
        let x: f64 = 0.4;
        let expected = (5.0 / (4.0 * PI) / 6.0).sqrt() * 3.0 * x * (1.0 - x * x).sqrt();
        assert_abs_diff_eq!(assoc_legendre_normalized(2, 1, x).unwrap(), expected, epsilon = 1e-14);
    }

    /// Exact value of `N_l^l P_l^l(0)`: the square equals
    /// `(2l+1)/(4π) * (2l-1)!! / (2l)!!`, evaluated with big integers.
    fn sectoral_at_equator_oracle(l: u32) -> f64 {
        let mut odd = BigUint::from(1u32);
        let mut even = BigUint::from(1u32);
        for k in 1..=l {
            odd *= 2 * k - 1;
            even *= 2 * k;
        }
        // scale numerator so the integer quotient carries ~60 significant bits
        let shift = even.bits() - odd.bits() + 64;
        let q: BigUint = (odd << shift) / even;
        let ratio = q.to_string().parse::<f64>().unwrap() * 2f64.powi(-(shift as i32));
        ((2.0 * l as f64 + 1.0) / (4.0 * PI) * ratio).sqrt()
    }

    #[test]
    fn sectoral_values_match_big_integer_oracle() {
        for l in [1u32, 5, 20, 50] {
            let got = assoc_legendre_normalized(l as usize, l as usize, 0.0).unwrap();
            assert!(got.is_finite());
            assert_relative_eq!(got, sectoral_at_equator_oracle(l), max_relative = 1e-13);
        }
    }

    #[test]
    fn high_degree_does_not_overflow() {
        for &(l, m, x) in &[(4096, 4096, 0.0), (4096, 0, 0.3), (4096, 2000, 0.9), (3000, 1500, -0.2)] {
            let v = assoc_legendre_normalized(l, m, x).unwrap();
            assert!(v.is_finite(), "l={l} m={m} x={x} gave {v}");
        }
    }

    proptest! {
        #[test]
        fn sequence_matches_scalar_bitwise(l in 0usize..300, x in -1.0f64..=1.0) {
            let seq = legendre_p_sequence(l, x).unwrap();
            for (k, v) in seq.iter().enumerate() {
                prop_assert_eq!(v.to_bits(), legendre_p(k, x).unwrap().to_bits());
            }
        }

        #[test]
        fn zonal_associated_matches_scaled_legendre(l in 0usize..200, x in -1.0f64..=1.0) {
            let lhs = assoc_legendre_normalized(l, 0, x).unwrap();
            let norm = ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt();
            let rhs = norm * legendre_p(l, x).unwrap();
            // relative to the function's scale, so sign changes near roots do not blow up
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(norm),
                "l={} x={} lhs={} rhs={}", l, x, lhs, rhs);
        }
    }
}
