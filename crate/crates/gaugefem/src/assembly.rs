//! Assembly of the semidiscrete systems: the eps-weighted mass matrix of the
//! conforming 1-form space, the nonlinear evolution right-hand side, and the
//! element-boundary pairing blocks of the hybrid system, plus solver
//! front-ends over the sparse LDL^T kernel.
//!
//! All loops run in fixed element order with fixed accumulation order, so
//! repeated runs produce bitwise-identical matrices.

use crate::calculus::{
    self, covariant_d, curvature, hodge_mu_inv, integrate_2form, wedge_inner,
};
use crate::error::{Error, Result};
use crate::femspace::{Field, FormSpace};
use crate::linalg::{norm2, CsrMatrix, DenseMat, LdltSolver, SparseSym};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;
use std::sync::Arc;

/// Relative residual demanded from every direct solve.
pub fn solve_tolerance<S: Real>() -> S {
    S::lit(1e-12)
}

// ---------------------------------------------------------------------------
// element tables
// ---------------------------------------------------------------------------

/// Precomputed basis values at quadrature points for one element.
pub struct ElemTab<S> {
    /// Quadrature weight times Jacobian determinant, per volume point.
    pub wdet: Vec<S>,
    /// Conforming 1-form basis values: `[a * nq * 2 + q * 2 + comp]`.
    pub conf_vals: Vec<S>,
    /// Curl (dx^dy coefficient of d basis) values: `[a * nq + q]`.
    pub conf_curl: Vec<S>,
    /// Multiplier 0-form basis values: `[h * nq + q]`.
    pub hhat_vals: Vec<S>,
    /// Multiplier basis gradients: `[h * nq * 2 + q * 2 + comp]`.
    pub hhat_grad: Vec<S>,
    /// Counterclockwise orientation sign per local edge.
    pub edge_sign: [S; 3],
    /// Tangential-trace density of conforming basis on edges:
    /// `[le * 6 * neq + a * neq + qe]`.
    pub conf_trace: Vec<S>,
    /// Multiplier basis values on edges: `[le * nh * neq + h * neq + qe]`.
    pub hhat_trace: Vec<S>,
}

/// Basis tables for a (conforming 1-form, multiplier 0-form) pair of spaces on
/// a shared mesh and quadrature rule.
pub struct Assembler<S: Real> {
    pub conf: Arc<FormSpace<S>>,
    pub hhat: Arc<FormSpace<S>>,
    pub rule: QuadratureRule<S>,
    pub tabs: Vec<ElemTab<S>>,
}

impl<S: Real> Assembler<S> {
    pub fn new(
        conf: Arc<FormSpace<S>>,
        hhat: Arc<FormSpace<S>>,
        rule: QuadratureRule<S>,
    ) -> Self {
        let mesh = conf.mesh().clone();
        let nq = rule.tri_points.len();
        let neq = rule.edge_points.len();
        let mut tabs = Vec::with_capacity(mesh.n_triangles());
        for k in 0..mesh.n_triangles() {
            let geo = mesh.element_geometry(k);
            let origin = mesh.corners(k)[0];
            let pts: Vec<[S; 2]> = rule
                .tri_points
                .iter()
                .map(|p| {
                    [
                        geo.jac[0][0] * p[0] + geo.jac[0][1] * p[1],
                        geo.jac[1][0] * p[0] + geo.jac[1][1] * p[1],
                    ]
                })
                .collect();
            let wdet: Vec<S> = rule.tri_weights.iter().map(|w| *w * geo.det).collect();
            let mut conf_vals = vec![S::zero(); 6 * nq * 2];
            let mut conf_curl = vec![S::zero(); 6 * nq];
            for a in 0..6 {
                let basis = conf.basis(k, a);
                let curl = basis[1].dx().sub(&basis[0].dy());
                for (q, x) in pts.iter().enumerate() {
                    conf_vals[a * nq * 2 + q * 2] = basis[0].eval(x[0], x[1]);
                    conf_vals[a * nq * 2 + q * 2 + 1] = basis[1].eval(x[0], x[1]);
                    conf_curl[a * nq + q] = curl.eval(x[0], x[1]);
                }
            }
            let nh = hhat.n_local(k);
            let mut hhat_vals = vec![S::zero(); nh * nq];
            let mut hhat_grad = vec![S::zero(); nh * nq * 2];
            for h in 0..nh {
                let basis = &hhat.basis(k, h)[0];
                let gx = basis.dx();
                let gy = basis.dy();
                for (q, x) in pts.iter().enumerate() {
                    hhat_vals[h * nq + q] = basis.eval(x[0], x[1]);
                    hhat_grad[h * nq * 2 + q * 2] = gx.eval(x[0], x[1]);
                    hhat_grad[h * nq * 2 + q * 2 + 1] = gy.eval(x[0], x[1]);
                }
            }
            let mut edge_sign = [S::one(); 3];
            let mut conf_trace = vec![S::zero(); 3 * 6 * neq];
            let mut hhat_trace = vec![S::zero(); 3 * nh * neq];
            for le in 0..3 {
                let te = mesh.tri_edges(k)[le];
                edge_sign[le] = if te.ccw { S::one() } else { -S::one() };
                let (p, q) = mesh.edge_endpoints(k, le);
                let pl = [p[0] - origin[0], p[1] - origin[1]];
                let ql = [q[0] - origin[0], q[1] - origin[1]];
                let tangent = [ql[0] - pl[0], ql[1] - pl[1]];
                for (qe, t) in rule.edge_points.iter().enumerate() {
                    let x = [pl[0] + *t * tangent[0], pl[1] + *t * tangent[1]];
                    for a in 0..6 {
                        let basis = conf.basis(k, a);
                        let tr = basis[0].eval(x[0], x[1]) * tangent[0]
                            + basis[1].eval(x[0], x[1]) * tangent[1];
                        conf_trace[le * 6 * neq + a * neq + qe] = tr;
                    }
                    for h in 0..nh {
                        hhat_trace[le * nh * neq + h * neq + qe] =
                            hhat.basis(k, h)[0].eval(x[0], x[1]);
                    }
                }
            }
            tabs.push(ElemTab {
                wdet,
                conf_vals,
                conf_curl,
                hhat_vals,
                hhat_grad,
                edge_sign,
                conf_trace,
                hhat_trace,
            });
        }
        Assembler {
            conf,
            hhat,
            rule,
            tabs,
        }
    }

    /// Values of a conforming field at the volume quadrature points of element
    /// `k`: `out[l * nq * 2 + q * 2 + comp]`, plus curl values
    /// `curl[l * nq + q]`.
    pub fn field_values(&self, k: usize, field: &Field<S>, out: &mut [S], curl: &mut [S]) {
        let nq = self.rule.tri_points.len();
        let m = field.algebra.dim();
        out.iter_mut().for_each(|v| *v = S::zero());
        curl.iter_mut().for_each(|v| *v = S::zero());
        let tab = &self.tabs[k];
        for (a, &dof) in self.conf.local_dofs(k).iter().enumerate() {
            for l in 0..m {
                let c = field.coeffs[dof * m + l];
                if c == S::zero() {
                    continue;
                }
                for q in 0..nq {
                    out[l * nq * 2 + q * 2] += c * tab.conf_vals[a * nq * 2 + q * 2];
                    out[l * nq * 2 + q * 2 + 1] += c * tab.conf_vals[a * nq * 2 + q * 2 + 1];
                    curl[l * nq + q] += c * tab.conf_curl[a * nq + q];
                }
            }
        }
    }

    /// Mass matrix of the conforming space under the pairing
    /// `int <phi_i ^ eps phi_j>` (scalar layer; the integrand reduces to the
    /// Euclidean dot product of the vector proxies). Full matrix, boundary
    /// DOFs included; symmetric positive definite.
    pub fn mass_eps(&self) -> SparseSym<S> {
        let mesh = self.conf.mesh();
        let mut trips: Vec<(usize, usize, S)> = Vec::new();
        let nq = self.rule.tri_points.len();
        for k in 0..mesh.n_triangles() {
            let tab = &self.tabs[k];
            let dofs = self.conf.local_dofs(k);
            for a in 0..6 {
                for b in 0..=a {
                    let mut acc = S::zero();
                    for q in 0..nq {
                        let dot = tab.conf_vals[a * nq * 2 + q * 2]
                            * tab.conf_vals[b * nq * 2 + q * 2]
                            + tab.conf_vals[a * nq * 2 + q * 2 + 1]
                                * tab.conf_vals[b * nq * 2 + q * 2 + 1];
                        acc += tab.wdet[q] * dot;
                    }
                    let (i, j) = (dofs[a], dofs[b]);
                    let (lo, hi) = (i.min(j), i.max(j));
                    trips.push((hi, lo, acc));
                }
            }
        }
        SparseSym::from_triplets(self.conf.n_dofs, &trips, true)
    }

    /// Evolution right-hand side `rhs[i, l] = int <d_A (phi_i e_l) ^ mu^-1 F_A>`
    /// evaluated via the precomputed tables. Exact for the shared rule.
    pub fn evolution_rhs(&self, a_field: &Field<S>) -> Vec<S> {
        let mesh = self.conf.mesh();
        let alg = &a_field.algebra;
        let m = alg.dim();
        let nq = self.rule.tri_points.len();
        let mut rhs = vec![S::zero(); self.conf.n_dofs * m];
        let mut av = vec![S::zero(); m * nq * 2];
        let mut acurl = vec![S::zero(); m * nq];
        let mut h = vec![S::zero(); m * nq];
        for k in 0..mesh.n_triangles() {
            let tab = &self.tabs[k];
            self.field_values(k, a_field, &mut av, &mut acurl);
            // H = mu^-1 F_A: 0-form values, F = dA + [A ^ A]/2
            for l in 0..m {
                for q in 0..nq {
                    h[l * nq + q] = acurl[l * nq + q];
                }
            }
            for a in 0..m {
                for b in 0..m {
                    for kk in 0..m {
                        let c = alg.c(a, b, kk);
                        if c == S::zero() {
                            continue;
                        }
                        let half_c = c * S::lit(0.5);
                        for q in 0..nq {
                            let cross = av[a * nq * 2 + q * 2] * av[b * nq * 2 + q * 2 + 1]
                                - av[a * nq * 2 + q * 2 + 1] * av[b * nq * 2 + q * 2];
                            h[kk * nq + q] += half_c * cross;
                        }
                    }
                }
            }
            let dofs = self.conf.local_dofs(k);
            for (la, &dof) in dofs.iter().enumerate() {
                for l in 0..m {
                    // d_A(phi_a e_l) = curl(phi_a) e_l + [A ^ phi_a e_l]
                    let mut acc = S::zero();
                    for q in 0..nq {
                        let mut dal = [S::zero(), S::zero(), S::zero()];
                        let dal = &mut dal[..m];
                        dal[l] = tab.conf_curl[la * nq + q];
                        for aa in 0..m {
                            for kk in 0..m {
                                let c = alg.c(aa, l, kk);
                                if c == S::zero() {
                                    continue;
                                }
                                let cross = av[aa * nq * 2 + q * 2]
                                    * tab.conf_vals[la * nq * 2 + q * 2 + 1]
                                    - av[aa * nq * 2 + q * 2 + 1]
                                        * tab.conf_vals[la * nq * 2 + q * 2];
                                dal[kk] += c * cross;
                            }
                        }
                        let mut val = S::zero();
                        for k1 in 0..m {
                            for k2 in 0..m {
                                let g = alg.g(k1, k2);
                                if g != S::zero() {
                                    val += g * dal[k1] * h[k2 * nq + q];
                                }
                            }
                        }
                        acc += tab.wdet[q] * val;
                    }
                    rhs[dof * m + l] += acc;
                }
            }
        }
        rhs
    }

    /// Local element-boundary pairing block
    /// `C_K[a][h] = sum over edges of K of ccw_sign * int trace(phi_a) psi_h dt`
    /// (scalar layers; Lie Gram factors applied by the caller).
    pub fn boundary_pairing(&self, k: usize) -> DenseMat<S> {
        let nh = self.hhat.n_local(k);
        let neq = self.rule.edge_points.len();
        let tab = &self.tabs[k];
        let mut c = DenseMat::zeros(6, nh);
        for le in 0..3 {
            let sign = tab.edge_sign[le];
            for a in 0..6 {
                for h in 0..nh {
                    let mut acc = S::zero();
                    for qe in 0..neq {
                        acc += self.rule.edge_weights[qe]
                            * tab.conf_trace[le * 6 * neq + a * neq + qe]
                            * tab.hhat_trace[le * nh * neq + h * neq + qe];
                    }
                    c.add(a, h, sign * acc);
                }
            }
        }
        c
    }
}

// ---------------------------------------------------------------------------
// reference (symbolic) assembly paths
// ---------------------------------------------------------------------------

/// Mass matrix assembled directly from local polynomials; reference path for
/// the table-based [`Assembler::mass_eps`].
pub fn mass_eps<S: Real>(space: &Arc<FormSpace<S>>, rule: &QuadratureRule<S>) -> SparseSym<S> {
    let hhat = FormSpace::piecewise_constant(space.mesh().clone());
    Assembler::new(space.clone(), hhat, rule.clone()).mass_eps()
}

/// Evolution right-hand side computed through exact polynomial calculus; used
/// as the independent oracle for the table-based path.
pub fn evolution_rhs_symbolic<S: Real>(a_field: &Field<S>) -> Result<Vec<S>> {
    let space = &a_field.space;
    let alg = &a_field.algebra;
    let mesh = space.mesh();
    let m = alg.dim();
    let mut rhs = vec![S::zero(); space.n_dofs * m];
    for k in 0..mesh.n_triangles() {
        let a_local = a_field.local_polyform(k);
        let h = hodge_mu_inv(&curvature(&a_local, alg)?)?;
        for (la, &dof) in space.local_dofs(k).iter().enumerate() {
            let basis = space.basis(k, la);
            for l in 0..m {
                let mut phi = calculus::PolyForm::zero(1, m, space.poly_degree);
                phi.comps[l * 2] = basis[0].clone();
                phi.comps[l * 2 + 1] = basis[1].clone();
                let dphi = covariant_d(&a_local, &phi, alg)?;
                let integrand = wedge_inner(&dphi, &h, alg)?;
                rhs[dof * m + l] += integrate_2form(mesh, k, &integrand)?[0];
            }
        }
    }
    Ok(rhs)
}

// ---------------------------------------------------------------------------
// solvers
// ---------------------------------------------------------------------------

/// Reusable factorization of a symmetric positive definite matrix.
pub struct SpdFactor<S: Real> {
    matrix: SparseSym<S>,
    solver: LdltSolver<S>,
}

impl<S: Real> SpdFactor<S> {
    pub fn new(matrix: SparseSym<S>) -> Result<Self> {
        let solver = LdltSolver::new(&matrix)?;
        Ok(SpdFactor { matrix, solver })
    }

    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let (x, res) = self.solver.solve_refined(&self.matrix, b);
        if res > solve_tolerance::<S>() {
            return Err(Error::SolveResidual {
                residual: res.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(x)
    }
}

/// One-shot SPD solve with the default direct factorization.
pub fn solve_spd<S: Real>(m: &SparseSym<S>, b: &[S]) -> Result<Vec<S>> {
    if !m.spd {
        return Err(Error::InvalidParameter {
            name: "matrix",
            reason: "solve_spd requires the positive-definite flag".into(),
        });
    }
    SpdFactor::new(m.clone())?.solve(b)
}

/// One-shot symmetric indefinite solve (quasi-definite systems such as the
/// regularized KKT saddle matrix).
pub fn solve_sym_indefinite<S: Real>(a: &SparseSym<S>, b: &[S]) -> Result<Vec<S>> {
    let solver = LdltSolver::new(a)?;
    let (x, res) = solver.solve_refined(a, b);
    if res > solve_tolerance::<S>() {
        return Err(Error::SolveResidual {
            residual: res.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(x)
}

/// Assemble the KKT saddle matrix `[Q, C^T; C, -delta I]`.
pub fn build_kkt<S: Real>(q: &SparseSym<S>, c: &CsrMatrix<S>, delta: S) -> SparseSym<S> {
    let n = q.n + c.n_rows;
    let mut trips: Vec<(usize, usize, S)> = Vec::new();
    for i in 0..q.n {
        for p in q.row_ptr[i]..q.row_ptr[i + 1] {
            let j = q.col_idx[p];
            if j <= i {
                trips.push((i, j, q.vals[p]));
            }
        }
    }
    for r in 0..c.n_rows {
        for p in c.row_ptr[r]..c.row_ptr[r + 1] {
            trips.push((q.n + r, c.col_idx[p], c.vals[p]));
        }
        trips.push((q.n + r, q.n + r, -delta));
    }
    SparseSym::from_triplets(n, &trips, false)
}

/// Relative norm of `C x - b`.
pub fn constraint_residual<S: Real>(c: &CsrMatrix<S>, x: &[S], b: &[S]) -> S {
    let mut cx = vec![S::zero(); c.n_rows];
    c.mul_vec(x, &mut cx);
    for (v, bb) in cx.iter_mut().zip(b) {
        *v -= *bb;
    }
    let nb = norm2(b);
    if nb == S::zero() {
        norm2(&cx)
    } else {
        norm2(&cx) / nb
    }
}
