//! Pointwise and element-wise exterior calculus for g-valued polynomial forms:
//! wedges with the bracket and the inner product, exterior derivative,
//! curvature, exterior covariant derivative, the vacuum Hodge operators, and
//! exact integration over elements and element boundaries.
//!
//! All derivatives and traces are coefficient manipulations on polynomials,
//! never numerical differentiation. Orientation conventions: dx^dy is the
//! positive volume form and element boundaries are traversed counterclockwise.

use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::mesh::Mesh;
use crate::poly::{Poly1, Poly2};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;

/// Number of scalar components a k-form carries in 2D.
pub fn n_components(rank: u8) -> usize {
    match rank {
        0 | 2 => 1,
        1 => 2,
        _ => unreachable!("rank beyond ambient dimension"),
    }
}

/// A g-valued polynomial k-form on one element (element frame).
///
/// Component layout: `comps[layer * n_components(rank) + c]`; for 1-forms the
/// components are the dx and dy coefficients, for 2-forms the dx^dy
/// coefficient.
#[derive(Clone, Debug)]
pub struct PolyForm<S> {
    pub rank: u8,
    pub m: usize,
    pub comps: Vec<Poly2<S>>,
}

/// Pointwise value of a g-valued form; same component layout as [`PolyForm`].
#[derive(Clone, Debug)]
pub struct PointForm<S> {
    pub rank: u8,
    pub m: usize,
    pub vals: Vec<S>,
}

impl<S: Real> PolyForm<S> {
    pub fn zero(rank: u8, m: usize, deg: usize) -> Self {
        let nc = n_components(rank);
        PolyForm {
            rank,
            m,
            comps: (0..m * nc).map(|_| Poly2::zero(deg)).collect(),
        }
    }

    /// Highest total degree carried by a nonzero coefficient.
    pub fn max_degree(&self) -> usize {
        let mut deg = 0;
        for p in &self.comps {
            for n in (0..=p.deg()).rev() {
                let mut any = false;
                for j in 0..=n {
                    if p.coeff(n - j, j) != S::zero() {
                        any = true;
                        break;
                    }
                }
                if any {
                    deg = deg.max(n);
                    break;
                }
            }
        }
        deg
    }

    pub fn axpy(&mut self, s: S, other: &PolyForm<S>) {
        debug_assert_eq!(self.rank, other.rank);
        debug_assert_eq!(self.m, other.m);
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(s, b);
        }
    }

    pub fn scale(&self, s: S) -> Self {
        PolyForm {
            rank: self.rank,
            m: self.m,
            comps: self.comps.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn eval_point(&self, x: S, y: S) -> PointForm<S> {
        PointForm {
            rank: self.rank,
            m: self.m,
            vals: self.comps.iter().map(|p| p.eval(x, y)).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> S {
        self.comps
            .iter()
            .fold(S::zero(), |acc, p| acc.max(p.max_abs()))
    }
}

/// Exterior derivative of a polynomial form; the degree drops by one and the
/// rank rises by one. Rejected for 2-forms (3-forms vanish identically in 2D).
pub fn exterior_d<S: Real>(u: &PolyForm<S>) -> Result<PolyForm<S>> {
    match u.rank {
        0 => {
            let mut out = PolyForm::zero(1, u.m, 0);
            for l in 0..u.m {
                out.comps[l * 2] = u.comps[l].dx();
                out.comps[l * 2 + 1] = u.comps[l].dy();
            }
            Ok(out)
        }
        1 => {
            let mut out = PolyForm::zero(2, u.m, 0);
            for l in 0..u.m {
                // d(ux dx + uy dy) = (d/dx uy - d/dy ux) dx^dy
                out.comps[l] = u.comps[l * 2 + 1].dx().sub(&u.comps[l * 2].dy());
            }
            Ok(out)
        }
        r => Err(Error::RankOverflow(r, 1)),
    }
}

/// Scalar wedge of component polynomials for given ranks.
fn scalar_wedge<S: Real>(ku: u8, kv: u8, u: &[Poly2<S>], v: &[Poly2<S>]) -> Vec<Poly2<S>> {
    match (ku, kv) {
        (0, 0) | (0, 2) | (2, 0) => vec![u[0].mul(&v[0])],
        (0, 1) => vec![u[0].mul(&v[0]), u[0].mul(&v[1])],
        (1, 0) => vec![u[0].mul(&v[0]), u[1].mul(&v[0])],
        (1, 1) => vec![u[0].mul(&v[1]).sub(&u[1].mul(&v[0]))],
        _ => unreachable!("rank overflow is checked by the caller"),
    }
}

fn check_ranks(ku: u8, kv: u8) -> Result<u8> {
    if ku + kv > 2 {
        return Err(Error::RankOverflow(ku, kv));
    }
    Ok(ku + kv)
}

fn layer_slice<S>(u: &PolyForm<S>, l: usize) -> &[Poly2<S>] {
    let nc = n_components(u.rank);
    &u.comps[l * nc..(l + 1) * nc]
}

/// Bracket wedge `[u ^ v]`: the real wedge of component forms paired with the
/// Lie bracket of the coefficients.
pub fn wedge_bracket<S: Real>(
    u: &PolyForm<S>,
    v: &PolyForm<S>,
    alg: &LieAlgebra<S>,
) -> Result<PolyForm<S>> {
    let rank = check_ranks(u.rank, v.rank)?;
    let m = alg.dim();
    let deg = u.max_degree() + v.max_degree();
    let mut out = PolyForm::zero(rank, m, deg);
    let nc = n_components(rank);
    for a in 0..m {
        let ua = layer_slice(u, a);
        if ua.iter().all(|p| p.is_zero()) {
            continue;
        }
        for b in 0..m {
            if (0..m).all(|k| alg.c(a, b, k) == S::zero()) {
                continue;
            }
            let vb = layer_slice(v, b);
            if vb.iter().all(|p| p.is_zero()) {
                continue;
            }
            let w = scalar_wedge(u.rank, v.rank, ua, vb);
            for k in 0..m {
                let c = alg.c(a, b, k);
                if c == S::zero() {
                    continue;
                }
                for (ci, wp) in w.iter().enumerate() {
                    out.comps[k * nc + ci].axpy(c, wp);
                }
            }
        }
    }
    Ok(out)
}

/// Inner-product wedge `<u ^ v>`: real wedge paired with the invariant inner
/// product; the result is a real-valued form (one layer).
pub fn wedge_inner<S: Real>(
    u: &PolyForm<S>,
    v: &PolyForm<S>,
    alg: &LieAlgebra<S>,
) -> Result<PolyForm<S>> {
    let rank = check_ranks(u.rank, v.rank)?;
    let m = alg.dim();
    let deg = u.max_degree() + v.max_degree();
    let mut out = PolyForm::zero(rank, 1, deg);
    for a in 0..m {
        let ua = layer_slice(u, a);
        if ua.iter().all(|p| p.is_zero()) {
            continue;
        }
        for b in 0..m {
            let g = alg.g(a, b);
            if g == S::zero() {
                continue;
            }
            let vb = layer_slice(v, b);
            if vb.iter().all(|p| p.is_zero()) {
                continue;
            }
            let w = scalar_wedge(u.rank, v.rank, ua, vb);
            for (ci, wp) in w.iter().enumerate() {
                out.comps[ci].axpy(g, wp);
            }
        }
    }
    Ok(out)
}

/// Vacuum electric Hodge on 1-forms: `a dx + b dy -> a dy - b dx`.
pub fn hodge_eps<S: Real>(u: &PolyForm<S>) -> Result<PolyForm<S>> {
    if u.rank != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: u.rank,
        });
    }
    let mut out = u.clone();
    for l in 0..u.m {
        out.comps[l * 2] = u.comps[l * 2 + 1].scale(-S::one());
        out.comps[l * 2 + 1] = u.comps[l * 2].clone();
    }
    Ok(out)
}

/// Vacuum inverse-permeability Hodge on 2-forms: `c dx^dy -> c`.
pub fn hodge_mu_inv<S: Real>(w: &PolyForm<S>) -> Result<PolyForm<S>> {
    if w.rank != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: w.rank,
        });
    }
    Ok(PolyForm {
        rank: 0,
        m: w.m,
        comps: w.comps.clone(),
    })
}

/// Curvature `F_A = dA + [A ^ A] / 2` of a polynomial connection 1-form.
pub fn curvature<S: Real>(a: &PolyForm<S>, alg: &LieAlgebra<S>) -> Result<PolyForm<S>> {
    if a.rank != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: a.rank,
        });
    }
    let mut f = exterior_d(a)?;
    let aa = wedge_bracket(a, a, alg)?;
    f.axpy(S::lit(0.5), &aa);
    Ok(f)
}

/// Exterior covariant derivative `d_A u = du + [A ^ u]`.
pub fn covariant_d<S: Real>(
    a: &PolyForm<S>,
    u: &PolyForm<S>,
    alg: &LieAlgebra<S>,
) -> Result<PolyForm<S>> {
    let mut du = exterior_d(u)?;
    let au = wedge_bracket(a, u, alg)?;
    du.axpy(S::one(), &au);
    Ok(du)
}

// ---------------------------------------------------------------------------
// pointwise variants
// ---------------------------------------------------------------------------

impl<S: Real> PointForm<S> {
    pub fn zero(rank: u8, m: usize) -> Self {
        PointForm {
            rank,
            m,
            vals: vec![S::zero(); m * n_components(rank)],
        }
    }
}

fn scalar_wedge_vals<S: Real>(ku: u8, kv: u8, u: &[S], v: &[S]) -> [S; 2] {
    match (ku, kv) {
        (0, 0) | (0, 2) | (2, 0) => [u[0] * v[0], S::zero()],
        (0, 1) => [u[0] * v[0], u[0] * v[1]],
        (1, 0) => [u[0] * v[0], u[1] * v[0]],
        (1, 1) => [u[0] * v[1] - u[1] * v[0], S::zero()],
        _ => unreachable!(),
    }
}

/// Pointwise `[u ^ v]`.
pub fn point_wedge_bracket<S: Real>(
    u: &PointForm<S>,
    v: &PointForm<S>,
    alg: &LieAlgebra<S>,
) -> Result<PointForm<S>> {
    let rank = check_ranks(u.rank, v.rank)?;
    let m = alg.dim();
    let ncu = n_components(u.rank);
    let ncv = n_components(v.rank);
    let nc = n_components(rank);
    let mut out = PointForm::zero(rank, m);
    for a in 0..m {
        for b in 0..m {
            let w = scalar_wedge_vals(
                u.rank,
                v.rank,
                &u.vals[a * ncu..(a + 1) * ncu],
                &v.vals[b * ncv..(b + 1) * ncv],
            );
            for k in 0..m {
                let c = alg.c(a, b, k);
                if c == S::zero() {
                    continue;
                }
                for ci in 0..nc {
                    out.vals[k * nc + ci] += c * w[ci];
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise `<u ^ v>` (single-layer result).
pub fn point_wedge_inner<S: Real>(
    u: &PointForm<S>,
    v: &PointForm<S>,
    alg: &LieAlgebra<S>,
) -> Result<PointForm<S>> {
    let rank = check_ranks(u.rank, v.rank)?;
    let m = alg.dim();
    let ncu = n_components(u.rank);
    let ncv = n_components(v.rank);
    let nc = n_components(rank);
    let mut out = PointForm::zero(rank, 1);
    for a in 0..m {
        for b in 0..m {
            let g = alg.g(a, b);
            if g == S::zero() {
                continue;
            }
            let w = scalar_wedge_vals(
                u.rank,
                v.rank,
                &u.vals[a * ncu..(a + 1) * ncu],
                &v.vals[b * ncv..(b + 1) * ncv],
            );
            for ci in 0..nc {
                out.vals[ci] += g * w[ci];
            }
        }
    }
    Ok(out)
}

/// Pointwise vacuum Hodge on 1-form values.
pub fn point_hodge_eps<S: Real>(u: &PointForm<S>) -> Result<PointForm<S>> {
    if u.rank != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: u.rank,
        });
    }
    let mut out = u.clone();
    for l in 0..u.m {
        out.vals[l * 2] = -u.vals[l * 2 + 1];
        out.vals[l * 2 + 1] = u.vals[l * 2];
    }
    Ok(out)
}

/// Pointwise vacuum Hodge on 2-form values.
pub fn point_hodge_mu_inv<S: Real>(w: &PointForm<S>) -> Result<PointForm<S>> {
    if w.rank != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: w.rank,
        });
    }
    Ok(PointForm {
        rank: 0,
        m: w.m,
        vals: w.vals.clone(),
    })
}

// ---------------------------------------------------------------------------
// integration
// ---------------------------------------------------------------------------

/// Integrate a scalar integrand over element `k` by quadrature. The closure
/// receives element-frame coordinates.
pub fn integrate_element<S: Real>(
    mesh: &Mesh<S>,
    k: usize,
    rule: &QuadratureRule<S>,
    f: impl Fn([S; 2]) -> S,
) -> S {
    let geo = mesh.element_geometry(k);
    let mut acc = S::zero();
    for (p, w) in rule.tri_points.iter().zip(&rule.tri_weights) {
        let x = [
            geo.jac[0][0] * p[0] + geo.jac[0][1] * p[1],
            geo.jac[1][0] * p[0] + geo.jac[1][1] * p[1],
        ];
        acc += *w * geo.det * f(x);
    }
    acc
}

/// Exact integral of a polynomial 2-form over element `k`, one value per layer.
pub fn integrate_2form<S: Real>(mesh: &Mesh<S>, k: usize, w: &PolyForm<S>) -> Result<Vec<S>> {
    if w.rank != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: w.rank,
        });
    }
    let geo = mesh.element_geometry(k);
    let mut out = Vec::with_capacity(w.m);
    for l in 0..w.m {
        // pull back to the reference triangle; the frame shift is already in
        // the element coordinates, so only the linear part enters
        let pulled = w.comps[l].compose_affine(
            geo.jac[0][0],
            geo.jac[0][1],
            S::zero(),
            geo.jac[1][0],
            geo.jac[1][1],
            S::zero(),
        );
        out.push(pulled.integrate_ref() * geo.det);
    }
    Ok(out)
}

/// Tangential-trace density of a 1-form on edge `le` of element `k`, as a
/// univariate polynomial in the global edge parameter. One entry per layer.
pub fn edge_trace<S: Real>(mesh: &Mesh<S>, k: usize, le: usize, u: &PolyForm<S>) -> Vec<Poly1<S>> {
    debug_assert_eq!(u.rank, 1);
    let origin = mesh.corners(k)[0];
    let (p, q) = mesh.edge_endpoints(k, le);
    let pl = [p[0] - origin[0], p[1] - origin[1]];
    let ql = [q[0] - origin[0], q[1] - origin[1]];
    let tangent = [ql[0] - pl[0], ql[1] - pl[1]];
    let mut out = Vec::with_capacity(u.m);
    for l in 0..u.m {
        let mut tau = u.comps[l * 2].on_segment(pl, ql);
        for c in tau.coeffs.iter_mut() {
            *c *= tangent[0];
        }
        let mut ty = u.comps[l * 2 + 1].on_segment(pl, ql);
        for c in ty.coeffs.iter_mut() {
            *c *= tangent[1];
        }
        tau.axpy(S::one(), &ty);
        out.push(tau);
    }
    out
}

/// Exact boundary integral of the tangential trace of a polynomial 1-form
/// over the counterclockwise-traversed boundary of element `k`.
pub fn integrate_boundary_trace<S: Real>(mesh: &Mesh<S>, k: usize, u: &PolyForm<S>) -> Vec<S> {
    let mut out = vec![S::zero(); u.m];
    for le in 0..3 {
        let te = mesh.tri_edges(k)[le];
        let sign = if te.ccw { S::one() } else { -S::one() };
        let traces = edge_trace(mesh, k, le, u);
        for (l, tau) in traces.iter().enumerate() {
            out[l] += sign * tau.integral_01();
        }
    }
    out
}

/// Quadrature version of the boundary integral for closure integrands; the
/// closure receives (local edge, parameter, element-frame point) and the
/// counterclockwise sign is applied internally.
pub fn integrate_boundary<S: Real>(
    mesh: &Mesh<S>,
    k: usize,
    rule: &QuadratureRule<S>,
    f: impl Fn(usize, S, [S; 2]) -> S,
) -> S {
    let origin = mesh.corners(k)[0];
    let mut acc = S::zero();
    for le in 0..3 {
        let te = mesh.tri_edges(k)[le];
        let sign = if te.ccw { S::one() } else { -S::one() };
        let (p, q) = mesh.edge_endpoints(k, le);
        let pl = [p[0] - origin[0], p[1] - origin[1]];
        let ql = [q[0] - origin[0], q[1] - origin[1]];
        for (t, w) in rule.edge_points.iter().zip(&rule.edge_weights) {
            let x = [pl[0] + *t * (ql[0] - pl[0]), pl[1] + *t * (ql[1] - pl[1])];
            acc += sign * *w * f(le, *t, x);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{su2, u1};
    use crate::mesh::structured_square;
    use crate::quadrature::quadrature;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mono(i: usize, j: usize, v: f64) -> Poly2<f64> {
        let mut p = Poly2::zero(i + j);
        p.set_coeff(i, j, v);
        p
    }

    fn one_form(m: usize, layer: usize, comp: usize, p: Poly2<f64>) -> PolyForm<f64> {
        let mut f = PolyForm::zero(1, m, p.deg());
        f.comps[layer * 2 + comp] = p;
        f
    }

    fn zero_form(m: usize, layer: usize, p: Poly2<f64>) -> PolyForm<f64> {
        let mut f = PolyForm::zero(0, m, p.deg());
        f.comps[layer] = p;
        f
    }

    fn random_form(rng: &mut ChaCha8Rng, rank: u8, m: usize, deg: usize) -> PolyForm<f64> {
        let mut f = PolyForm::zero(rank, m, deg);
        for c in f.comps.iter_mut() {
            for n in 0..=deg {
                for j in 0..=n {
                    c.set_coeff(n - j, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        f
    }

    #[test]
    fn wedge_bracket_basis_example() {
        let alg = su2::<f64>();
        // dx (x) e1  ^  dy (x) e2  ->  dx^dy (x) e3
        let u = one_form(3, 0, 0, mono(0, 0, 1.0));
        let v = one_form(3, 1, 1, mono(0, 0, 1.0));
        let w = wedge_bracket(&u, &v, &alg).unwrap();
        assert_eq!(w.rank, 2);
        assert!((w.comps[2].coeff(0, 0) - 1.0).abs() < 1e-15);
        assert!(w.comps[0].max_abs() < 1e-15 && w.comps[1].max_abs() < 1e-15);
        // [u ^ u] = 0 (dx ^ dx and a single Lie direction)
        let uu = wedge_bracket(&u, &u, &alg).unwrap();
        assert!(uu.comps.iter().all(|p| p.max_abs() < 1e-15));
        // abelian algebra: always 0
        let alg1 = u1::<f64>();
        let a = one_form(1, 0, 0, mono(1, 0, 2.0));
        let b = one_form(1, 0, 1, mono(0, 1, 3.0));
        let ab = wedge_bracket(&a, &b, &alg1).unwrap();
        assert!(ab.comps.iter().all(|p| p.max_abs() < 1e-15));
    }

    #[test]
    fn wedge_inner_examples() {
        let alg = su2::<f64>();
        let u = one_form(3, 0, 0, mono(0, 0, 1.0));
        let v_same = one_form(3, 0, 1, mono(0, 0, 1.0));
        let w = wedge_inner(&u, &v_same, &alg).unwrap();
        assert!((w.comps[0].coeff(0, 0) - 0.5).abs() < 1e-15);
        let v_other = one_form(3, 1, 1, mono(0, 0, 1.0));
        let w0 = wedge_inner(&u, &v_other, &alg).unwrap();
        assert!(w0.comps[0].max_abs() < 1e-15);
    }

    #[test]
    fn commutativity_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let alg = su2::<f64>();
        for (ku, kv) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)] {
            let u = random_form(&mut rng, ku, 3, 2);
            let v = random_form(&mut rng, kv, 3, 2);
            let sign = if (ku * kv) % 2 == 0 { 1.0 } else { -1.0 };
            // [u^v] + (-1)^{kl} [v^u] = 0
            let uv = wedge_bracket(&u, &v, &alg).unwrap();
            let vu = wedge_bracket(&v, &u, &alg).unwrap();
            let mut sum = uv.clone();
            sum.axpy(sign, &vu);
            assert!(sum.max_abs_coeff() < 1e-13, "bracket ({ku},{kv})");
            // <u^v> - (-1)^{kl} <v^u> = 0
            let uvi = wedge_inner(&u, &v, &alg).unwrap();
            let vui = wedge_inner(&v, &u, &alg).unwrap();
            let mut diff = uvi.clone();
            diff.axpy(-sign, &vui);
            assert!(diff.max_abs_coeff() < 1e-13, "inner ({ku},{kv})");
        }
    }

    #[test]
    fn associativity_identities() {
        // [[u^v]^w] + (-1)^{kl} [v^[u^w]] = [u^[v^w]]
        // <[u^v]^w> + (-1)^{kl} <v^[u^w]> = 0
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alg = su2::<f64>();
        for (ku, kv, kp) in [
            (0u8, 0u8, 0u8),
            (0, 0, 1),
            (0, 1, 0),
            (1, 0, 0),
            (1, 1, 0),
            (1, 0, 1),
            (0, 1, 1),
            (0, 0, 2),
            (2, 0, 0),
        ] {
            let u = random_form(&mut rng, ku, 3, 1);
            let v = random_form(&mut rng, kv, 3, 1);
            let w = random_form(&mut rng, kp, 3, 1);
            let sign = if (ku * kv) % 2 == 0 { 1.0 } else { -1.0 };
            let lhs1 = wedge_bracket(&wedge_bracket(&u, &v, &alg).unwrap(), &w, &alg).unwrap();
            let lhs2 = wedge_bracket(&v, &wedge_bracket(&u, &w, &alg).unwrap(), &alg).unwrap();
            let rhs = wedge_bracket(&u, &wedge_bracket(&v, &w, &alg).unwrap(), &alg).unwrap();
            let mut acc = lhs1.clone();
            acc.axpy(sign, &lhs2);
            acc.axpy(-1.0, &rhs);
            assert!(acc.max_abs_coeff() < 1e-12, "assoc ({ku},{kv},{kp})");
            let a1 = wedge_inner(&wedge_bracket(&u, &v, &alg).unwrap(), &w, &alg).unwrap();
            let a2 = wedge_inner(&v, &wedge_bracket(&u, &w, &alg).unwrap(), &alg).unwrap();
            let mut acc = a1.clone();
            acc.axpy(sign, &a2);
            assert!(acc.max_abs_coeff() < 1e-12, "inv ({ku},{kv},{kp})");
        }
    }

    #[test]
    fn exterior_d_examples() {
        // d(x dy (x) e3) = dx^dy (x) e3
        let u = one_form(3, 2, 1, mono(1, 0, 1.0));
        let du = exterior_d(&u).unwrap();
        assert!((du.comps[2].coeff(0, 0) - 1.0).abs() < 1e-15);
        // d of a constant 0-form is zero
        let c = zero_form(3, 0, mono(0, 0, 5.0));
        let dc = exterior_d(&c).unwrap();
        assert!(dc.comps.iter().all(|p| p.max_abs() < 1e-15));
        // d(d phi) = 0
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = random_form(&mut rng, 0, 3, 4);
        let ddphi = exterior_d(&exterior_d(&phi).unwrap()).unwrap();
        assert!(ddphi.comps.iter().all(|p| p.max_abs() < 1e-12));
        // 2-forms are rejected (3-forms vanish in 2D)
        let w = random_form(&mut rng, 2, 3, 2);
        assert!(exterior_d(&w).is_err());
    }

    #[test]
    fn leibniz_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let alg = su2::<f64>();
        for (ku, kv) in [(0u8, 0u8), (0, 1), (1, 0)] {
            let u = random_form(&mut rng, ku, 3, 3);
            let v = random_form(&mut rng, kv, 3, 3);
            let sign = if ku % 2 == 0 { 1.0 } else { -1.0 };
            let lhs = exterior_d(&wedge_bracket(&u, &v, &alg).unwrap()).unwrap();
            let mut rhs = wedge_bracket(&exterior_d(&u).unwrap(), &v, &alg).unwrap();
            rhs.axpy(sign, &wedge_bracket(&u, &exterior_d(&v).unwrap(), &alg).unwrap());
            let mut diff = lhs.clone();
            diff.axpy(-1.0, &rhs);
            assert!(diff.max_abs_coeff() < 1e-12, "squareLeibniz ({ku},{kv})");
            let lhs = exterior_d(&wedge_inner(&u, &v, &alg).unwrap()).unwrap();
            let mut rhs = wedge_inner(&exterior_d(&u).unwrap(), &v, &alg).unwrap();
            rhs.axpy(sign, &wedge_inner(&u, &exterior_d(&v).unwrap(), &alg).unwrap());
            let mut diff = lhs.clone();
            diff.axpy(-1.0, &rhs);
            assert!(diff.max_abs_coeff() < 1e-12, "angleLeibniz ({ku},{kv})");
        }
    }

    #[test]
    fn curvature_examples() {
        let alg = su2::<f64>();
        // A = x dy (x) e3: [A^A] has a single Lie direction, so F = dA
        let a = one_form(3, 2, 1, mono(1, 0, 1.0));
        let f = curvature(&a, &alg).unwrap();
        assert!((f.comps[2].coeff(0, 0) - 1.0).abs() < 1e-15);
        assert!(f.comps[0].max_abs() < 1e-15 && f.comps[1].max_abs() < 1e-15);
        // A = x dy (x) e1 + y dx (x) e2: F = dx^dy (x) (e1 - e2) - xy dx^dy (x) e3
        let mut a = PolyForm::zero(1, 3, 1);
        a.comps[1] = mono(1, 0, 1.0);
        a.comps[2] = mono(0, 1, 1.0);
        let f = curvature(&a, &alg).unwrap();
        assert!((f.comps[0].coeff(0, 0) - 1.0).abs() < 1e-15);
        assert!((f.comps[1].coeff(0, 0) + 1.0).abs() < 1e-15);
        assert!((f.comps[2].coeff(1, 1) + 1.0).abs() < 1e-15);
        // Maxwell case: F = dA
        let alg1 = u1::<f64>();
        let a = one_form(1, 0, 1, mono(1, 0, 1.0));
        let f = curvature(&a, &alg1).unwrap();
        assert!((f.comps[0].coeff(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn covariant_d_examples() {
        let alg = su2::<f64>();
        // phi = e2 constant, A = x dy (x) e1: d_A phi = x dy (x) e3
        let phi = zero_form(3, 1, mono(0, 0, 1.0));
        let a = one_form(3, 0, 1, mono(1, 0, 1.0));
        let d = covariant_d(&a, &phi, &alg).unwrap();
        assert!((d.comps[2 * 2 + 1].coeff(1, 0) - 1.0).abs() < 1e-15);
        assert!(d.comps[0].max_abs() < 1e-15);
        // abelian: d_A phi = d phi
        let alg1 = u1::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let phi = random_form(&mut rng, 0, 1, 3);
        let a1 = random_form(&mut rng, 1, 1, 2);
        let lhs = covariant_d(&a1, &phi, &alg1).unwrap();
        let rhs = exterior_d(&phi).unwrap();
        let mut diff = lhs.clone();
        diff.axpy(-1.0, &rhs);
        assert!(diff.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn covariant_d_squares_to_curvature_bracket() {
        // d_A(d_A phi) = [F_A ^ phi] for 0-forms, checked at random points
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let alg = su2::<f64>();
        for _ in 0..10 {
            let a = random_form(&mut rng, 1, 3, 2);
            let phi = random_form(&mut rng, 0, 3, 2);
            let lhs = covariant_d(&a, &covariant_d(&a, &phi, &alg).unwrap(), &alg).unwrap();
            let f = curvature(&a, &alg).unwrap();
            let rhs = wedge_bracket(&f, &phi, &alg).unwrap();
            for _ in 0..10 {
                let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let lv = lhs.eval_point(x, y);
                let rv = rhs.eval_point(x, y);
                for (a, b) in lv.vals.iter().zip(&rv.vals) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn covariant_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let alg = su2::<f64>();
        for (ku, kv) in [(0u8, 0u8), (0, 1), (1, 0)] {
            let a = random_form(&mut rng, 1, 3, 2);
            let u = random_form(&mut rng, ku, 3, 2);
            let v = random_form(&mut rng, kv, 3, 2);
            let sign = if ku % 2 == 0 { 1.0 } else { -1.0 };
            let lhs = covariant_d(&a, &wedge_bracket(&u, &v, &alg).unwrap(), &alg).unwrap();
            let mut rhs = wedge_bracket(&covariant_d(&a, &u, &alg).unwrap(), &v, &alg).unwrap();
            rhs.axpy(
                sign,
                &wedge_bracket(&u, &covariant_d(&a, &v, &alg).unwrap(), &alg).unwrap(),
            );
            let mut diff = lhs.clone();
            diff.axpy(-1.0, &rhs);
            assert!(diff.max_abs_coeff() < 1e-12, "({ku},{kv})");
        }
    }

    #[test]
    fn hodge_examples() {
        let alg = su2::<f64>();
        // eps(dx) = dy
        let u = one_form(3, 0, 0, mono(0, 0, 1.0));
        let eu = hodge_eps(&u).unwrap();
        assert!((eu.comps[1].coeff(0, 0) - 1.0).abs() < 1e-15);
        assert!(eu.comps[0].max_abs() < 1e-15);
        // eps(eps(dx)) = -dx
        let eeu = hodge_eps(&eu).unwrap();
        assert!((eeu.comps[0].coeff(0, 0) + 1.0).abs() < 1e-15);
        // [u ^ eps u] = 0 for random g-valued 1-forms
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let u = random_form(&mut rng, 1, 3, 3);
            let w = wedge_bracket(&u, &hodge_eps(&u).unwrap(), &alg).unwrap();
            assert!(w.max_abs_coeff() < 1e-12);
        }
        // mu^-1 on 2-forms and rank checks
        let w = random_form(&mut rng, 2, 3, 2);
        assert!(hodge_mu_inv(&w).is_ok());
        assert!(hodge_eps(&w).is_err());
        let z = random_form(&mut rng, 0, 3, 2);
        assert!(hodge_mu_inv(&z).is_err());
    }

    #[test]
    fn element_integrals() {
        let mesh = structured_square::<f64>(2, 2, false).unwrap();
        let rule = quadrature(6).unwrap();
        // area of a grid half-cell
        let v = integrate_element(&mesh, 0, &rule, |_| 1.0);
        assert!((v - 1.0 / 8.0).abs() < 1e-15);
        // linearity
        let v3 = integrate_element(&mesh, 0, &rule, |_| 3.0);
        assert!((v3 - 3.0 * v).abs() < 1e-15);
        // exact symbolic 2-form integral agrees with quadrature
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let w = random_form(&mut rng, 2, 1, 4);
        let exact = integrate_2form(&mesh, 1, &w).unwrap()[0];
        let quad = integrate_element(&mesh, 1, &rule, |x| w.comps[0].eval(x[0], x[1]));
        assert!((exact - quad).abs() < 1e-14);
    }

    #[test]
    fn stokes_on_elements() {
        let mesh = structured_square::<f64>(3, 3, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for k in 0..mesh.n_triangles() {
            let u = random_form(&mut rng, 1, 3, 3);
            let lhs = integrate_boundary_trace(&mesh, k, &u);
            let rhs = integrate_2form(&mesh, k, &exterior_d(&u).unwrap()).unwrap();
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-13, "element {k}");
            }
        }
        // exact forms have zero boundary integral: d(scalar) and constants
        let phi = random_form(&mut rng, 0, 1, 4);
        let dphi = exterior_d(&phi).unwrap();
        let v = integrate_boundary_trace(&mesh, 0, &dphi);
        assert!(v[0].abs() < 1e-13);
        let dx_form = one_form(1, 0, 0, mono(0, 0, 1.0));
        let v = integrate_boundary_trace(&mesh, 4, &dx_form);
        assert!(v[0].abs() < 1e-14);
    }

    #[test]
    fn covariant_integration_by_parts() {
        // int_bdry <u ^ v> = int <d_A u ^ v> + (-1)^k int <u ^ d_A v>
        // for u a 0-form and v a 1-form
        let mesh = structured_square::<f64>(2, 2, false).unwrap();
        let alg = su2::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for k in 0..mesh.n_triangles() {
            let a = random_form(&mut rng, 1, 3, 2);
            let u = random_form(&mut rng, 0, 3, 2);
            let v = random_form(&mut rng, 1, 3, 2);
            let uv = wedge_inner(&u, &v, &alg).unwrap();
            let lhs = integrate_boundary_trace(&mesh, k, &uv)[0];
            let t1 = integrate_2form(
                &mesh,
                k,
                &wedge_inner(&covariant_d(&a, &u, &alg).unwrap(), &v, &alg).unwrap(),
            )
            .unwrap()[0];
            let t2 = integrate_2form(
                &mesh,
                k,
                &wedge_inner(&u, &covariant_d(&a, &v, &alg).unwrap(), &alg).unwrap(),
            )
            .unwrap()[0];
            assert!((lhs - (t1 + t2)).abs() < 1e-12, "element {k}");
        }
    }

    #[test]
    fn point_ops_match_poly_ops() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let alg = su2::<f64>();
        let u = random_form(&mut rng, 1, 3, 2);
        let v = random_form(&mut rng, 1, 3, 2);
        let w = wedge_bracket(&u, &v, &alg).unwrap();
        let wi = wedge_inner(&u, &v, &alg).unwrap();
        for _ in 0..10 {
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let up = u.eval_point(x, y);
            let vp = v.eval_point(x, y);
            let wp = point_wedge_bracket(&up, &vp, &alg).unwrap();
            for (a, b) in wp.vals.iter().zip(&w.eval_point(x, y).vals) {
                assert!((a - b).abs() < 1e-12);
            }
            let wip = point_wedge_inner(&up, &vp, &alg).unwrap();
            assert!((wip.vals[0] - wi.eval_point(x, y).vals[0]).abs() < 1e-12);
            let ep = point_hodge_eps(&up).unwrap();
            let epoly = hodge_eps(&u).unwrap().eval_point(x, y);
            for (a, b) in ep.vals.iter().zip(&epoly.vals) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rank_overflow_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let alg = su2::<f64>();
        let u = random_form(&mut rng, 1, 3, 1);
        let w = random_form(&mut rng, 2, 3, 1);
        assert!(wedge_bracket(&u, &w, &alg).is_err());
        assert!(wedge_inner(&w, &w, &alg).is_err());
    }
}
