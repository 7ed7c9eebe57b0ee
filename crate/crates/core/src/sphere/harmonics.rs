use std::f64::consts::SQRT_2;

use crate::error::Result;
use crate::sphere::legendre::{assoc_unchecked, check_argument, check_degree};
use crate::sphere::point::{HarmonicIndex, SpherePoint};

/// Real spherical harmonic `Y_l^m(P)`.
///
/// Orders `m > 0` carry `cos(mθ)`, `m < 0` carry `sin(|m|θ)`, with
/// normalization `sqrt((2l+1)/(2π) (l-|m|)!/(l+|m|)!)`; `m = 0` uses
/// `sqrt((2l+1)/(4π))`. The Legendre argument is `sin(lat)`, i.e. the cosine
/// of the colatitude, which makes the family orthonormal on the sphere.
pub fn real_spherical_harmonic(idx: HarmonicIndex, p: &SpherePoint) -> Result<f64> {
    check_degree(idx.degree())?;
    let x = check_argument(p.lat().sin())?;
    Ok(harmonic_unchecked(idx, x, p.lon()))
}

fn harmonic_unchecked(idx: HarmonicIndex, x: f64, lon: f64) -> f64 {
    let m = idx.order();
    let am = m.unsigned_abs() as usize;
    let p = assoc_unchecked(idx.degree(), am, x);
    match m {
        0 => p,
        m if m > 0 => SQRT_2 * p * (m as f64 * lon).cos(),
        _ => SQRT_2 * p * (am as f64 * lon).sin(),
    }
}

/// Evaluates every harmonic of degree `< n` at `p`, in
/// [`HarmonicIndex::below_degree`] order.
pub fn harmonics_below_degree(n: usize, p: &SpherePoint) -> Vec<f64> {
    let x = p.lat().sin().clamp(-1.0, 1.0);
    HarmonicIndex::below_degree(n)
        .into_iter()
        .map(|idx| harmonic_unchecked(idx, x, p.lon()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::legendre::legendre_p;
    use crate::sphere::point::great_circle;
    use crate::sphere::quadrature::gauss_legendre_nodes;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI, TAU};

    fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
        let lon = rng.random::<f64>() * TAU;
        let lat = (2.0 * rng.random::<f64>() - 1.0).asin();
        SpherePoint::new(lon, lat).unwrap()
    }

    #[test]
    fn constant_harmonic() {
        let idx = HarmonicIndex::new(0, 0).unwrap();
        let p = SpherePoint::new(2.0, -0.4).unwrap();
        assert_abs_diff_eq!(
            real_spherical_harmonic(idx, &p).unwrap(),
            0.282_094_791_773_878_14,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sine_harmonic_vanishes_at_zero_longitude() {
        let idx = HarmonicIndex::new(1, -1).unwrap();
        let p = SpherePoint::new(0.0, 0.7).unwrap();
        assert_eq!(real_spherical_harmonic(idx, &p).unwrap(), 0.0);
    }

    #[test]
    fn degree_two_order_one_closed_form() {
        let idx = HarmonicIndex::new(2, 1).unwrap();
        let p = SpherePoint::new(FRAC_PI_4, FRAC_PI_6).unwrap();
        let x = FRAC_PI_6.sin();
        // sqrt(5/(2π) * 1!/3!) * 3x sqrt(1-x²) * cos θ
        let expected = (5.0 / (2.0 * PI) / 6.0).sqrt() * 3.0 * x * (1.0 - x * x).sqrt() * FRAC_PI_4.cos();
        assert_abs_diff_eq!(real_spherical_harmonic(idx, &p).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn addition_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let q = random_point(&mut rng);
            let cos_psi = great_circle(&p, &q).cos();
            let yp = harmonics_below_degree(16, &p);
            let yq = harmonics_below_degree(16, &q);
            for l in 0..=15usize {
                let range = l * l..(l + 1) * (l + 1);
                let lhs: f64 = yp[range.clone()].iter().zip(&yq[range]).map(|(a, b)| a * b).sum();
                let rhs = (2.0 * l as f64 + 1.0) / (4.0 * PI) * legendre_p(l, cos_psi).unwrap();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let (nodes, weights) = gauss_legendre_nodes(64);
        let n_lon = 128;
        let idx = HarmonicIndex::below_degree(9);
        let mut gram = vec![0.0; idx.len() * idx.len()];
        for (x, w) in nodes.iter().zip(&weights) {
            for k in 0..n_lon {
                let lon = TAU * k as f64 / n_lon as f64;
                let p = SpherePoint::new(lon, x.asin()).unwrap();
                let y = harmonics_below_degree(9, &p);
                let wt = w * TAU / n_lon as f64;
                for a in 0..idx.len() {
                    for b in 0..idx.len() {
                        gram[a * idx.len() + b] += wt * y[a] * y[b];
                    }
                }
            }
        }
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[a * idx.len() + b], expected, epsilon = 1e-8);
            }
        }
    }
}
