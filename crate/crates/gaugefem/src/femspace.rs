//! Finite element spaces of Lie algebra-valued differential forms and their
//! coefficient fields.
//!
//! Four space families are provided: the curl-conforming full-linear 1-form
//! space (two tangential-trace moments per edge), continuous Lagrange 0-forms
//! of degree 1..3, element-wise broken 1-form spaces of arbitrary degree, and
//! piecewise constants. A g-valued field stores one real coefficient layer per
//! Lie basis direction, all sharing the scalar space.
//!
//! Every local basis function is an exact polynomial in coordinates shifted to
//! the element's first corner. Translations commute with d, the wedges and the
//! vacuum Hodge operators, so all calculus can be done in these local frames;
//! the shift only exists to keep local Vandermonde solves well conditioned.

use crate::calculus::PolyForm;
use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::linalg::{DenseLu, DenseMat};
use crate::mesh::Mesh;
use crate::poly::Poly2;
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;
use std::sync::Arc;

/// Continuity class of a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Continuity {
    Conforming,
    Broken,
    PiecewiseConstant,
}

/// Descriptor of a finite element space of scalar-valued k-forms, with the
/// per-element local bases as exact polynomials in the element frame.
pub struct FormSpace<S> {
    mesh: Arc<Mesh<S>>,
    pub form_rank: u8,
    pub poly_degree: usize,
    pub continuity: Continuity,
    pub n_dofs: usize,
    dof_map: Vec<Vec<usize>>,
    boundary_dof: Vec<bool>,
    /// local_basis[k][local][comp]: comp count is 1 for 0-forms, 2 for 1-forms.
    local_basis: Vec<Vec<Vec<Poly2<S>>>>,
}

/// Legendre weights used for the two tangential-trace moments on an edge.
pub fn edge_legendre<S: Real>(which: usize, t: S) -> S {
    match which {
        0 => S::one(),
        1 => S::lit(2.0) * t - S::one(),
        _ => unreachable!("only two edge moments per edge"),
    }
}

/// Invert a small DOF/Vandermonde matrix with two Newton refinement passes to
/// wash out the conditioning of monomial bases on small elements.
fn refined_inverse<S: Real>(d: &DenseMat<S>) -> Result<DenseMat<S>> {
    let n = d.n_rows;
    let lu = DenseLu::new(d)?;
    let mut x = lu.inverse();
    for _ in 0..2 {
        // X <- X (2I - D X)
        let mut dx = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    acc += d.get(i, k) * x.get(k, j);
                }
                dx.set(i, j, acc);
            }
        }
        let mut corr = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { S::lit(2.0) } else { S::zero() };
                corr.set(i, j, id - dx.get(i, j));
            }
        }
        let mut next = DenseMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    acc += x.get(i, k) * corr.get(k, j);
                }
                next.set(i, j, acc);
            }
        }
        x = next;
    }
    Ok(x)
}

/// Scalar monomial exponents of total degree <= deg, in the fixed order used
/// by broken spaces and local Vandermonde solves.
pub fn monomial_exponents(deg: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 0..=deg {
        for j in 0..=n {
            out.push((n - j, j));
        }
    }
    out
}

fn monomial_poly<S: Real>(i: usize, j: usize) -> Poly2<S> {
    let mut p = Poly2::zero(i + j);
    p.set_coeff(i, j, S::one());
    p
}

impl<S: Real> FormSpace<S> {
    pub fn mesh(&self) -> &Arc<Mesh<S>> {
        &self.mesh
    }

    pub fn local_dofs(&self, k: usize) -> &[usize] {
        &self.dof_map[k]
    }

    pub fn n_local(&self, k: usize) -> usize {
        self.dof_map[k].len()
    }

    /// Polynomial components of local basis function `a` on element `k`, in
    /// the element frame (coordinates relative to corner 0).
    pub fn basis(&self, k: usize, a: usize) -> &[Poly2<S>] {
        &self.local_basis[k][a]
    }

    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        self.boundary_dof[dof]
    }

    pub fn boundary_dofs(&self) -> &[bool] {
        &self.boundary_dof
    }

    /// Curl-conforming full-linear 1-form space: two moments of the tangential
    /// trace (against 1 and 2t-1 in the global edge parametrization) per edge.
    /// Sharing edge DOFs between neighbours makes tangential traces
    /// single-valued by construction.
    pub fn curl_conforming_p1(mesh: Arc<Mesh<S>>) -> Result<Arc<Self>> {
        let n_dofs = 2 * mesh.n_edges();
        let mut dof_map = Vec::with_capacity(mesh.n_triangles());
        let mut local_basis = Vec::with_capacity(mesh.n_triangles());
        // vector monomials: (1,0),(x,0),(y,0),(0,1),(0,x),(0,y)
        let monos: Vec<[Poly2<S>; 2]> = vec![
            [monomial_poly(0, 0), Poly2::zero(0)],
            [monomial_poly(1, 0), Poly2::zero(0)],
            [monomial_poly(0, 1), Poly2::zero(0)],
            [Poly2::zero(0), monomial_poly(0, 0)],
            [Poly2::zero(0), monomial_poly(1, 0)],
            [Poly2::zero(0), monomial_poly(0, 1)],
        ];
        for k in 0..mesh.n_triangles() {
            let origin = mesh.corners(k)[0];
            let mut dofs = Vec::with_capacity(6);
            let mut d = DenseMat::zeros(6, 6);
            let mut row = 0;
            for le in 0..3 {
                let te = mesh.tri_edges(k)[le];
                let (p, q) = mesh.edge_endpoints(k, le);
                let pl = [p[0] - origin[0], p[1] - origin[1]];
                let ql = [q[0] - origin[0], q[1] - origin[1]];
                let tangent = [ql[0] - pl[0], ql[1] - pl[1]];
                for leg in 0..2 {
                    for (j, mono) in monos.iter().enumerate() {
                        // moment of the tangential trace, exact via the
                        // segment restriction: int (u . tangent) L_leg(t) dt
                        let mut tau = mono[0].on_segment(pl, ql);
                        for c in tau.coeffs.iter_mut() {
                            *c *= tangent[0];
                        }
                        let mut uy = mono[1].on_segment(pl, ql);
                        for c in uy.coeffs.iter_mut() {
                            *c *= tangent[1];
                        }
                        tau.axpy(S::one(), &uy);
                        let weighted = if leg == 0 {
                            tau
                        } else {
                            tau.mul(&crate::poly::Poly1 {
                                coeffs: vec![-S::one(), S::lit(2.0)],
                            })
                        };
                        d.set(row, j, weighted.integral_01());
                    }
                    dofs.push(2 * te.edge + leg);
                    row += 1;
                }
            }
            let inv = refined_inverse(&d)?;
            let mut basis = Vec::with_capacity(6);
            for a in 0..6 {
                let mut cx = Poly2::zero(1);
                let mut cy = Poly2::zero(1);
                for j in 0..6 {
                    let c = inv.get(j, a);
                    cx.axpy(c, &monos[j][0]);
                    cy.axpy(c, &monos[j][1]);
                }
                basis.push(vec![cx, cy]);
            }
            dof_map.push(dofs);
            local_basis.push(basis);
        }
        let mut boundary_dof = vec![false; n_dofs];
        for e in 0..mesh.n_edges() {
            if mesh.is_boundary_edge(e) {
                boundary_dof[2 * e] = true;
                boundary_dof[2 * e + 1] = true;
            }
        }
        Ok(Arc::new(FormSpace {
            mesh,
            form_rank: 1,
            poly_degree: 1,
            continuity: Continuity::Conforming,
            n_dofs,
            dof_map,
            boundary_dof,
            local_basis,
        }))
    }

    /// Continuous Lagrange 0-forms of degree `s` (1..=3): vertex nodes, `s-1`
    /// evenly spaced interior nodes per edge (placed along the global edge
    /// parametrization so both neighbours agree), and interior lattice nodes.
    pub fn lagrange_cg(mesh: Arc<Mesh<S>>, s: usize) -> Result<Arc<Self>> {
        if !(1..=3).contains(&s) {
            return Err(Error::InvalidParameter {
                name: "degree_s",
                reason: format!("supported Lagrange degrees are 1..=3, got {s}"),
            });
        }
        let n_interior = if s >= 2 { (s - 1) * (s - 2) / 2 } else { 0 };
        let n_dofs =
            mesh.n_vertices() + mesh.n_edges() * (s - 1) + mesh.n_triangles() * n_interior;
        let exps = monomial_exponents(s);
        let nl = exps.len();
        let mut dof_map = Vec::with_capacity(mesh.n_triangles());
        let mut local_basis = Vec::with_capacity(mesh.n_triangles());
        for k in 0..mesh.n_triangles() {
            let corners = mesh.corners(k);
            let origin = corners[0];
            let tri = mesh.triangle(k);
            let mut nodes: Vec<[S; 2]> = Vec::with_capacity(nl);
            let mut dofs: Vec<usize> = Vec::with_capacity(nl);
            for slot in 0..3 {
                nodes.push([corners[slot][0] - origin[0], corners[slot][1] - origin[1]]);
                dofs.push(tri[slot]);
            }
            if s >= 2 {
                for le in 0..3 {
                    let te = mesh.tri_edges(k)[le];
                    let (p, q) = mesh.edge_endpoints(k, le);
                    for node in 1..s {
                        let t = S::of_usize(node) / S::of_usize(s);
                        nodes.push([
                            p[0] - origin[0] + t * (q[0] - p[0]),
                            p[1] - origin[1] + t * (q[1] - p[1]),
                        ]);
                        dofs.push(mesh.n_vertices() + te.edge * (s - 1) + node - 1);
                    }
                }
            }
            if n_interior > 0 {
                let mut c = 0;
                for a in 1..s {
                    for b in 1..(s - a) {
                        let w1 = S::of_usize(a) / S::of_usize(s);
                        let w2 = S::of_usize(b) / S::of_usize(s);
                        nodes.push([
                            w1 * (corners[1][0] - origin[0]) + w2 * (corners[2][0] - origin[0]),
                            w1 * (corners[1][1] - origin[1]) + w2 * (corners[2][1] - origin[1]),
                        ]);
                        dofs.push(
                            mesh.n_vertices() + mesh.n_edges() * (s - 1) + k * n_interior + c,
                        );
                        c += 1;
                    }
                }
                debug_assert_eq!(c, n_interior);
            }
            if std::env::var("GAUGEFEM_DEBUG_NODES").is_ok() && k == 4 {
                eprintln!("constructor nodes for k=4: {nodes:?}");
            }
            let mut d = DenseMat::zeros(nl, nl);
            for (row, node) in nodes.iter().enumerate() {
                for (col, (i, j)) in exps.iter().enumerate() {
                    d.set(row, col, node[0].powi(*i as i32) * node[1].powi(*j as i32));
                }
            }
            let inv = refined_inverse(&d)?;
            let mut basis = Vec::with_capacity(nl);
            for a in 0..nl {
                let mut p = Poly2::zero(s);
                for (col, (i, j)) in exps.iter().enumerate() {
                    p.add_coeff(*i, *j, inv.get(col, a));
                }
                basis.push(vec![p]);
            }
            dof_map.push(dofs);
            local_basis.push(basis);
        }
        let mut boundary_dof = vec![false; n_dofs];
        for v in 0..mesh.n_vertices() {
            boundary_dof[v] = mesh.is_boundary_vertex(v);
        }
        if s >= 2 {
            for e in 0..mesh.n_edges() {
                if mesh.is_boundary_edge(e) {
                    for node in 0..(s - 1) {
                        boundary_dof[mesh.n_vertices() + e * (s - 1) + node] = true;
                    }
                }
            }
        }
        Ok(Arc::new(FormSpace {
            mesh,
            form_rank: 0,
            poly_degree: s,
            continuity: Continuity::Conforming,
            n_dofs,
            dof_map,
            boundary_dof,
            local_basis,
        }))
    }

    /// One constant 0-form per element.
    pub fn piecewise_constant(mesh: Arc<Mesh<S>>) -> Arc<Self> {
        let n = mesh.n_triangles();
        let dof_map = (0..n).map(|k| vec![k]).collect();
        let local_basis = (0..n)
            .map(|_| vec![vec![Poly2::constant(S::one())]])
            .collect();
        Arc::new(FormSpace {
            mesh,
            form_rank: 0,
            poly_degree: 0,
            continuity: Continuity::PiecewiseConstant,
            n_dofs: n,
            dof_map,
            boundary_dof: vec![false; n],
            local_basis,
        })
    }

    /// Element-wise 1-forms of degree `q` with no inter-element coupling; the
    /// local coefficients are monomial coefficients in the element frame.
    pub fn broken_1form(mesh: Arc<Mesh<S>>, q: usize) -> Result<Arc<Self>> {
        if q < 1 {
            return Err(Error::InvalidParameter {
                name: "broken degree",
                reason: "degree must be at least 1".into(),
            });
        }
        let exps = monomial_exponents(q);
        let ld = 2 * exps.len();
        debug_assert_eq!(ld, (q + 1) * (q + 2));
        let n = mesh.n_triangles();
        let mut dof_map = Vec::with_capacity(n);
        let mut local_basis = Vec::with_capacity(n);
        for k in 0..n {
            dof_map.push((k * ld..(k + 1) * ld).collect::<Vec<_>>());
            let mut basis = Vec::with_capacity(ld);
            for (i, j) in &exps {
                basis.push(vec![monomial_poly(*i, *j), Poly2::zero(0)]);
                basis.push(vec![Poly2::zero(0), monomial_poly(*i, *j)]);
            }
            local_basis.push(basis);
        }
        Ok(Arc::new(FormSpace {
            mesh,
            form_rank: 1,
            poly_degree: q,
            continuity: Continuity::Broken,
            n_dofs: n * ld,
            dof_map,
            boundary_dof: vec![false; n * ld],
            local_basis,
        }))
    }
}

/// Coefficient field: `n_dofs x m` reals tagged with its space and algebra.
#[derive(Clone)]
pub struct Field<S> {
    pub space: Arc<FormSpace<S>>,
    pub algebra: Arc<LieAlgebra<S>>,
    /// Layout: `coeffs[dof * m + layer]`.
    pub coeffs: Vec<S>,
}

impl<S: Real> Field<S> {
    pub fn zeros(space: Arc<FormSpace<S>>, algebra: Arc<LieAlgebra<S>>) -> Self {
        let len = space.n_dofs * algebra.dim();
        Field {
            space,
            algebra,
            coeffs: vec![S::zero(); len],
        }
    }

    #[inline]
    pub fn get(&self, dof: usize, layer: usize) -> S {
        self.coeffs[dof * self.algebra.dim() + layer]
    }

    #[inline]
    pub fn set(&mut self, dof: usize, layer: usize, v: S) {
        self.coeffs[dof * self.algebra.dim() + layer] = v;
    }

    /// `self += s * other` (same space and algebra).
    pub fn axpy(&mut self, s: S, other: &Field<S>) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * *b;
        }
    }

    pub fn scale(&mut self, s: S) {
        for a in self.coeffs.iter_mut() {
            *a *= s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Zero out every coefficient attached to a boundary DOF.
    pub fn zero_boundary(&mut self) {
        let m = self.algebra.dim();
        for dof in 0..self.space.n_dofs {
            if self.space.is_boundary_dof(dof) {
                for l in 0..m {
                    self.coeffs[dof * m + l] = S::zero();
                }
            }
        }
    }

    /// Apply an adjoint rotation matrix (`m x m`, row-major) to every DOF.
    pub fn rotate_layers(&self, r: &[S]) -> Field<S> {
        let m = self.algebra.dim();
        let mut out = self.clone();
        for dof in 0..self.space.n_dofs {
            for i in 0..m {
                let mut acc = S::zero();
                for j in 0..m {
                    acc += r[i * m + j] * self.coeffs[dof * m + j];
                }
                out.coeffs[dof * m + i] = acc;
            }
        }
        out
    }

    /// The exact polynomial restriction to element `k`, in the element frame.
    pub fn local_polyform(&self, k: usize) -> PolyForm<S> {
        let m = self.algebra.dim();
        let rank = self.space.form_rank;
        let ncomp = if rank == 1 { 2 } else { 1 };
        let deg = self.space.poly_degree;
        let mut out = PolyForm::zero(rank, m, deg);
        for (a, &dof) in self.space.local_dofs(k).iter().enumerate() {
            let basis = self.space.basis(k, a);
            for l in 0..m {
                let c = self.coeffs[dof * m + l];
                if c == S::zero() {
                    continue;
                }
                for comp in 0..ncomp {
                    out.comps[l * ncomp + comp].axpy(c, &basis[comp]);
                }
            }
        }
        out
    }

    /// Overwrite the local coefficients of element `k` of a broken 1-form
    /// field with the monomial coefficients of `form` (element frame).
    pub fn set_local_from_polyform(&mut self, k: usize, form: &PolyForm<S>) -> Result<()> {
        self.write_local_from_polyform(k, form, None)
    }

    /// Like [`Self::set_local_from_polyform`] but accumulates `scale * form`.
    pub fn add_local_from_polyform(
        &mut self,
        k: usize,
        scale: S,
        form: &PolyForm<S>,
    ) -> Result<()> {
        self.write_local_from_polyform(k, form, Some(scale))
    }

    fn write_local_from_polyform(
        &mut self,
        k: usize,
        form: &PolyForm<S>,
        accumulate: Option<S>,
    ) -> Result<()> {
        assert_eq!(self.space.continuity, Continuity::Broken);
        assert_eq!(form.rank, 1);
        let q = self.space.poly_degree;
        if form.max_degree() > q {
            return Err(Error::DegreeOverflow {
                have: q,
                need: form.max_degree(),
            });
        }
        let m = self.algebra.dim();
        let exps = monomial_exponents(q);
        for (mi, (i, j)) in exps.iter().enumerate() {
            for comp in 0..2 {
                let local = 2 * mi + comp;
                let dof = self.space.local_dofs(k)[local];
                for l in 0..m {
                    let v = form.comps[l * 2 + comp].coeff(*i, *j);
                    match accumulate {
                        Some(s) => self.coeffs[dof * m + l] += s * v,
                        None => self.coeffs[dof * m + l] = v,
                    }
                }
            }
        }
        Ok(())
    }

    /// Interpolate a closed-form 1-form into the curl-conforming space by its
    /// edge moments. The closure receives physical coordinates and the layer
    /// index and returns the (dx, dy) components.
    pub fn interpolate_oneform(
        space: &Arc<FormSpace<S>>,
        algebra: &Arc<LieAlgebra<S>>,
        rule: &QuadratureRule<S>,
        f: impl Fn([S; 2], usize) -> [S; 2],
    ) -> Field<S> {
        assert_eq!(space.form_rank, 1);
        assert_eq!(space.continuity, Continuity::Conforming);
        let mesh = space.mesh().clone();
        let m = algebra.dim();
        let mut field = Field::zeros(space.clone(), algebra.clone());
        let mut done = vec![false; mesh.n_edges()];
        for k in 0..mesh.n_triangles() {
            for le in 0..3 {
                let te = mesh.tri_edges(k)[le];
                if done[te.edge] {
                    continue;
                }
                done[te.edge] = true;
                let (p, q) = mesh.edge_endpoints(k, le);
                let tangent = [q[0] - p[0], q[1] - p[1]];
                for l in 0..m {
                    let mut m0 = S::zero();
                    let mut m1 = S::zero();
                    for (t, w) in rule.edge_points.iter().zip(&rule.edge_weights) {
                        let x = [p[0] + *t * tangent[0], p[1] + *t * tangent[1]];
                        let v = f(x, l);
                        let tau = v[0] * tangent[0] + v[1] * tangent[1];
                        m0 += *w * tau;
                        m1 += *w * tau * edge_legendre(1, *t);
                    }
                    field.set(2 * te.edge, l, m0);
                    field.set(2 * te.edge + 1, l, m1);
                }
            }
        }
        field
    }

    /// Interpolate a scalar closure into a Lagrange space by node evaluation.
    pub fn interpolate_scalar(
        space: &Arc<FormSpace<S>>,
        algebra: &Arc<LieAlgebra<S>>,
        f: impl Fn([S; 2], usize) -> S,
    ) -> Field<S> {
        assert_eq!(space.form_rank, 0);
        let mesh = space.mesh().clone();
        let m = algebra.dim();
        let s = space.poly_degree.max(1);
        let n_interior = (s.saturating_sub(1)) * (s.saturating_sub(2)) / 2;
        let mut field = Field::zeros(space.clone(), algebra.clone());
        for k in 0..mesh.n_triangles() {
            let corners = mesh.corners(k);
            let tri = mesh.triangle(k);
            for slot in 0..3 {
                for l in 0..m {
                    field.set(tri[slot], l, f(corners[slot], l));
                }
            }
            if s >= 2 {
                for le in 0..3 {
                    let te = mesh.tri_edges(k)[le];
                    let (p, q) = mesh.edge_endpoints(k, le);
                    for node in 1..s {
                        let t = S::of_usize(node) / S::of_usize(s);
                        let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                        let dof = mesh.n_vertices() + te.edge * (s - 1) + node - 1;
                        for l in 0..m {
                            field.set(dof, l, f(x, l));
                        }
                    }
                }
                let mut c = 0;
                for a in 1..s {
                    for b in 1..(s - a) {
                        let w1 = S::of_usize(a) / S::of_usize(s);
                        let w2 = S::of_usize(b) / S::of_usize(s);
                        let x = [
                            corners[0][0]
                                + w1 * (corners[1][0] - corners[0][0])
                                + w2 * (corners[2][0] - corners[0][0]),
                            corners[0][1]
                                + w1 * (corners[1][1] - corners[0][1])
                                + w2 * (corners[2][1] - corners[0][1]),
                        ];
                        let dof =
                            mesh.n_vertices() + mesh.n_edges() * (s - 1) + k * n_interior + c;
                        for l in 0..m {
                            field.set(dof, l, f(x, l));
                        }
                        c += 1;
                    }
                }
            }
        }
        field
    }

    /// L2 projection of a scalar closure onto piecewise constants (element
    /// averages).
    pub fn project_piecewise_constant(
        space: &Arc<FormSpace<S>>,
        algebra: &Arc<LieAlgebra<S>>,
        rule: &QuadratureRule<S>,
        f: impl Fn([S; 2], usize) -> S,
    ) -> Field<S> {
        assert_eq!(space.continuity, Continuity::PiecewiseConstant);
        let mesh = space.mesh().clone();
        let m = algebra.dim();
        let mut field = Field::zeros(space.clone(), algebra.clone());
        for k in 0..mesh.n_triangles() {
            let geo = mesh.element_geometry(k);
            let area = mesh.area(k);
            for l in 0..m {
                let mut acc = S::zero();
                for (p, w) in rule.tri_points.iter().zip(&rule.tri_weights) {
                    let x = geo.to_physical(p[0], p[1]);
                    acc += *w * geo.det * f(x, l);
                }
                field.set(k, l, acc / area);
            }
        }
        field
    }

    /// Embed a conforming 1-form field exactly into a broken 1-form space,
    /// optionally applying the vacuum Hodge `eps` first.
    pub fn embed_broken(&self, broken: &Arc<FormSpace<S>>, apply_eps: bool) -> Result<Field<S>> {
        assert_eq!(self.space.form_rank, 1);
        let mesh = self.space.mesh().clone();
        let mut out = Field::zeros(broken.clone(), self.algebra.clone());
        for k in 0..mesh.n_triangles() {
            let mut local = self.local_polyform(k);
            if apply_eps {
                local = crate::calculus::hodge_eps(&local)?;
            }
            out.set_local_from_polyform(k, &local)?;
        }
        Ok(out)
    }
}
