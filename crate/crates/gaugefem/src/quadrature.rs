//! Quadrature on the reference triangle and the reference edge.
//!
//! Rules are generated from Gauss-Legendre nodes (Newton iteration on the
//! Legendre recurrence) and a Duffy collapse onto the triangle, which makes
//! them exact for all polynomials up to the requested degree. Exactness is
//! capped at 10; every integral assembled in this crate fits under that cap.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_EXACTNESS: usize = 10;

/// Points and weights on the reference triangle (0,0),(1,0),(0,1) and the
/// reference edge [0,1].
#[derive(Clone, Debug)]
pub struct QuadratureRule<S> {
    pub tri_points: Vec<[S; 2]>,
    pub tri_weights: Vec<S>,
    pub edge_points: Vec<S>,
    pub edge_weights: Vec<S>,
    pub exactness: usize,
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre<S: Real>(n: usize) -> (Vec<S>, Vec<S>) {
    let mut xs = vec![S::zero(); n];
    let mut ws = vec![S::zero(); n];
    let tol = S::epsilon() * S::lit(4.0);
    for i in 0..n {
        // Chebyshev-like initial guess
        let guess = (S::PI() * (S::of_usize(i) + S::lit(0.75))
            / (S::of_usize(n) + S::lit(0.5)))
        .cos();
        let mut x = -guess;
        for _ in 0..100 {
            // Legendre recurrence for P_n and P_{n-1}
            let mut p0 = S::one();
            let mut p1 = x;
            for k in 1..n {
                let kf = S::of_usize(k);
                let p2 = ((S::lit(2.0) * kf + S::one()) * x * p1 - kf * p0)
                    / (kf + S::one());
                p0 = p1;
                p1 = p2;
            }
            let dp = S::of_usize(n) * (x * p1 - p0) / (x * x - S::one());
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= tol {
                break;
            }
        }
        // weight 2 / ((1-x^2) P'_n(x)^2)
        let mut p0 = S::one();
        let mut p1 = x;
        for k in 1..n {
            let kf = S::of_usize(k);
            let p2 = ((S::lit(2.0) * kf + S::one()) * x * p1 - kf * p0) / (kf + S::one());
            p0 = p1;
            p1 = p2;
        }
        let dp = S::of_usize(n) * (x * p1 - p0) / (x * x - S::one());
        xs[i] = x;
        ws[i] = S::lit(2.0) / ((S::one() - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Gauss-Legendre rule mapped to [0, 1].
fn gauss01<S: Real>(n: usize) -> (Vec<S>, Vec<S>) {
    let (xs, ws) = gauss_legendre::<S>(n);
    let half = S::lit(0.5);
    (
        xs.iter().map(|x| (*x + S::one()) * half).collect(),
        ws.iter().map(|w| *w * half).collect(),
    )
}

/// Build a rule exact to the requested polynomial degree on both the triangle
/// and the edge.
pub fn quadrature<S: Real>(exactness: usize) -> Result<QuadratureRule<S>> {
    if exactness > MAX_EXACTNESS {
        return Err(Error::ExactnessBeyondTable(exactness));
    }
    let d = exactness.max(1);
    // Duffy collapse raises the u-degree by one
    let k_tri = (d + 3) / 2;
    let k_edge = (d + 2) / 2;
    let (u, wu) = gauss01::<S>(k_tri);
    let (v, wv) = gauss01::<S>(k_tri);
    let mut tri_points = Vec::with_capacity(k_tri * k_tri);
    let mut tri_weights = Vec::with_capacity(k_tri * k_tri);
    for i in 0..k_tri {
        for j in 0..k_tri {
            tri_points.push([u[i], v[j] * (S::one() - u[i])]);
            tri_weights.push(wu[i] * wv[j] * (S::one() - u[i]));
        }
    }
    let (edge_points, edge_weights) = gauss01::<S>(k_edge);
    Ok(QuadratureRule {
        tri_points,
        tri_weights,
        edge_points,
        edge_weights,
        exactness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ref_monomial_integral;

    #[test]
    fn weights_sum_to_reference_measures() {
        for d in 1..=MAX_EXACTNESS {
            let q = quadrature::<f64>(d).unwrap();
            let st: f64 = q.tri_weights.iter().sum();
            let se: f64 = q.edge_weights.iter().sum();
            assert!((st - 0.5).abs() < 1e-14, "deg {d}");
            assert!((se - 1.0).abs() < 1e-14, "deg {d}");
        }
    }

    #[test]
    fn specific_values() {
        let q = quadrature::<f64>(4).unwrap();
        let int_xy: f64 = q
            .tri_points
            .iter()
            .zip(&q.tri_weights)
            .map(|(p, w)| w * p[0] * p[1])
            .sum();
        assert!((int_xy - 1.0 / 24.0).abs() < 1e-15);
        let int_t3: f64 = q
            .edge_points
            .iter()
            .zip(&q.edge_weights)
            .map(|(t, w)| w * t * t * t)
            .sum();
        assert!((int_t3 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn monomial_exactness_to_requested_degree() {
        for d in 1..=MAX_EXACTNESS {
            let q = quadrature::<f64>(d).unwrap();
            for n in 0..=d {
                for j in 0..=n {
                    let i = n - j;
                    let num: f64 = q
                        .tri_points
                        .iter()
                        .zip(&q.tri_weights)
                        .map(|(p, w)| w * p[0].powi(i as i32) * p[1].powi(j as i32))
                        .sum();
                    let exact = ref_monomial_integral::<f64>(i, j);
                    assert!(
                        (num - exact).abs() <= 1e-14 * exact.abs().max(1.0),
                        "x^{i} y^{j} at exactness {d}: {num} vs {exact}"
                    );
                }
                let num: f64 = q
                    .edge_points
                    .iter()
                    .zip(&q.edge_weights)
                    .map(|(t, w)| w * t.powi(n as i32))
                    .sum();
                let exact = 1.0 / (n as f64 + 1.0);
                assert!((num - exact).abs() <= 1e-14, "t^{n} at exactness {d}");
            }
        }
    }

    #[test]
    fn beyond_table_is_rejected() {
        assert!(quadrature::<f64>(11).is_err());
    }

    #[test]
    fn f32_rule_is_consistent() {
        let q = quadrature::<f32>(4).unwrap();
        let st: f32 = q.tri_weights.iter().sum();
        assert!((st - 0.5).abs() < 1e-6);
    }
}
