//! Hybrid post-processing: solve the constrained least-squares problem for the
//! multiplier 0-form, evolve the broken flux 1-form by the covariant
//! derivative of the multiplier, and initialize the flux from the electric
//! field.
//!
//! The constraints say that on every element K and for every local broken test
//! 1-form, the boundary pairing with the multiplier matches the local residual
//! of the evolution equation. Those constraints only see the multiplier's
//! boundary traces, so they underdetermine it; the quadratic objective
//! (closeness to the magnetic 0-form and of the induced flux rate to the
//! electric rate) picks a unique minimizer via a regularized KKT saddle solve.

use crate::assembly::{build_kkt, constraint_residual, Assembler};
use crate::calculus::{
    covariant_d, curvature, hodge_eps, hodge_mu_inv, integrate_2form, wedge_inner, PolyForm,
};
use crate::error::{Error, Result};
use crate::femspace::Field;
use crate::linalg::{CsrMatrix, LdltSolver, SparseSym};
use crate::scalar::Real;

/// Relative constraint-residual bound; exceeding it means the multiplier space
/// cannot represent the local residuals (inconsistent inputs).
pub fn consistency_tolerance<S: Real>() -> S {
    S::lit(1e-8)
}

/// The assembled constrained least-squares system for one time step.
pub struct HybridSystem<S> {
    /// Quadratic form of the objective (multiplier DOFs x Lie layers).
    pub objective: SparseSym<S>,
    /// Linear term of the objective.
    pub objective_rhs: Vec<S>,
    /// Constant part of the objective (norms of the targets).
    pub objective_const: S,
    /// Constraint matrix, rows indexed by (element, local broken test, layer).
    pub constraints: CsrMatrix<S>,
    /// Constraint right-hand side.
    pub constraint_rhs: Vec<S>,
    /// Tikhonov regularization actually used on the multiplier block.
    pub delta: S,
}

/// The hybrid pair: multiplier 0-form and broken flux 1-form.
#[derive(Clone)]
pub struct HybridState<S> {
    pub hhat: Field<S>,
    pub dhat: Field<S>,
}

/// Diagnostics of one hybrid solve.
#[derive(Clone, Copy, Debug)]
pub struct HybridSolveInfo<S> {
    pub constraint_residual: S,
    pub objective_value: S,
}

/// Per-run state for hybrid solves: the constraint matrix is constant in time
/// and the KKT factorization pattern is reused across steps.
pub struct HybridWorkspace<S: Real> {
    constraints: CsrMatrix<S>,
    kkt_solver: Option<LdltSolver<S>>,
    pub weight_multiplier: S,
    pub weight_flux: S,
    pub delta_rel: S,
}

impl<S: Real> HybridWorkspace<S> {
    pub fn new(asm: &Assembler<S>, alg: &crate::lie::LieAlgebra<S>) -> Self {
        let constraints = constraint_matrix(asm, alg);
        HybridWorkspace {
            constraints,
            kkt_solver: None,
            weight_multiplier: S::one(),
            weight_flux: S::one(),
            delta_rel: S::lit(1e-10),
        }
    }

    pub fn constraints(&self) -> &CsrMatrix<S> {
        &self.constraints
    }

    /// Assemble the full system for the current connection and electric rate.
    pub fn build_system(
        &self,
        asm: &Assembler<S>,
        a_mid: &Field<S>,
        e_dot: &Field<S>,
    ) -> HybridSystem<S> {
        let alg = &a_mid.algebra;
        let m = alg.dim();
        let mesh = asm.conf.mesh();
        let nq = asm.rule.tri_points.len();
        let nh_total = asm.hhat.n_dofs;
        let mut trips: Vec<(usize, usize, S)> = Vec::new();
        let mut f = vec![S::zero(); nh_total * m];
        let mut c0 = S::zero();
        let mut av = vec![S::zero(); m * nq * 2];
        let mut acurl = vec![S::zero(); m * nq];
        let mut ev = vec![S::zero(); m * nq * 2];
        let mut ecurl = vec![S::zero(); m * nq];
        let mut h0 = vec![S::zero(); m * nq];
        let (w1, w2) = (self.weight_multiplier, self.weight_flux);
        for k in 0..mesh.n_triangles() {
            let tab = &asm.tabs[k];
            let nh = asm.hhat.n_local(k);
            asm.field_values(k, a_mid, &mut av, &mut acurl);
            asm.field_values(k, e_dot, &mut ev, &mut ecurl);
            // H = mu^-1 F_A at quadrature points
            for l in 0..m {
                for q in 0..nq {
                    h0[l * nq + q] = acurl[l * nq + q];
                }
            }
            for a in 0..m {
                for b in 0..m {
                    for kk in 0..m {
                        let c = alg.c(a, b, kk);
                        if c == S::zero() {
                            continue;
                        }
                        let half = c * S::lit(0.5);
                        for q in 0..nq {
                            let cross = av[a * nq * 2 + q * 2] * av[b * nq * 2 + q * 2 + 1]
                                - av[a * nq * 2 + q * 2 + 1] * av[b * nq * 2 + q * 2];
                            h0[kk * nq + q] += half * cross;
                        }
                    }
                }
            }
            // flux-rate target: eps(E_dot) values, per layer rotate (x,y) -> (-y,x)
            // d_A of every (multiplier basis, layer): dab[(h,l),k,q,comp]
            let mut dab = vec![S::zero(); nh * m * m * nq * 2];
            for h in 0..nh {
                for l in 0..m {
                    for q in 0..nq {
                        let base = (((h * m + l) * m + l) * nq + q) * 2;
                        dab[base] += tab.hhat_grad[h * nq * 2 + q * 2];
                        dab[base + 1] += tab.hhat_grad[h * nq * 2 + q * 2 + 1];
                    }
                    for aa in 0..m {
                        for kk in 0..m {
                            let c = alg.c(aa, l, kk);
                            if c == S::zero() {
                                continue;
                            }
                            for q in 0..nq {
                                let hv = tab.hhat_vals[h * nq + q];
                                let base = (((h * m + l) * m + kk) * nq + q) * 2;
                                dab[base] += c * av[aa * nq * 2 + q * 2] * hv;
                                dab[base + 1] += c * av[aa * nq * 2 + q * 2 + 1] * hv;
                            }
                        }
                    }
                }
            }
            let dofs = asm.hhat.local_dofs(k);
            // objective matrix and linear term
            for h1 in 0..nh {
                for l1 in 0..m {
                    let r1 = dofs[h1] * m + l1;
                    // f: w1 <psi e_l, H> + w2 <d_A psi e_l, eps E_dot>
                    let mut facc = S::zero();
                    for q in 0..nq {
                        let mut t1 = S::zero();
                        for b in 0..m {
                            let g = alg.g(l1, b);
                            if g != S::zero() {
                                t1 += g * h0[b * nq + q];
                            }
                        }
                        t1 *= tab.hhat_vals[h1 * nq + q];
                        let mut t2 = S::zero();
                        for k1 in 0..m {
                            for k2 in 0..m {
                                let g = alg.g(k1, k2);
                                if g == S::zero() {
                                    continue;
                                }
                                let base = (((h1 * m + l1) * m + k1) * nq + q) * 2;
                                // eps(E)_x = -E_y, eps(E)_y = E_x
                                let dx = -ev[k2 * nq * 2 + q * 2 + 1];
                                let dy = ev[k2 * nq * 2 + q * 2];
                                t2 += g * (dab[base] * dx + dab[base + 1] * dy);
                            }
                        }
                        facc += tab.wdet[q] * (w1 * t1 + w2 * t2);
                    }
                    f[r1] += facc;
                    for h2 in 0..nh {
                        for l2 in 0..m {
                            let r2 = dofs[h2] * m + l2;
                            if r2 > r1 {
                                continue;
                            }
                            let mut qacc = S::zero();
                            for q in 0..nq {
                                let mass = alg.g(l1, l2)
                                    * tab.hhat_vals[h1 * nq + q]
                                    * tab.hhat_vals[h2 * nq + q];
                                let mut stiff = S::zero();
                                for k1 in 0..m {
                                    for k2 in 0..m {
                                        let g = alg.g(k1, k2);
                                        if g == S::zero() {
                                            continue;
                                        }
                                        let b1 = (((h1 * m + l1) * m + k1) * nq + q) * 2;
                                        let b2 = (((h2 * m + l2) * m + k2) * nq + q) * 2;
                                        stiff += g
                                            * (dab[b1] * dab[b2] + dab[b1 + 1] * dab[b2 + 1]);
                                    }
                                }
                                qacc += tab.wdet[q] * (w1 * mass + w2 * stiff);
                            }
                            trips.push((r1, r2, qacc));
                        }
                    }
                }
            }
            // constant part of the objective: w1 |H|^2 + w2 |eps E_dot|^2
            for q in 0..nq {
                let mut hh = S::zero();
                let mut dd = S::zero();
                for k1 in 0..m {
                    for k2 in 0..m {
                        let g = alg.g(k1, k2);
                        if g == S::zero() {
                            continue;
                        }
                        hh += g * h0[k1 * nq + q] * h0[k2 * nq + q];
                        dd += g
                            * (ev[k1 * nq * 2 + q * 2] * ev[k2 * nq * 2 + q * 2]
                                + ev[k1 * nq * 2 + q * 2 + 1] * ev[k2 * nq * 2 + q * 2 + 1]);
                    }
                }
                c0 += tab.wdet[q] * (w1 * hh + w2 * dd);
            }
        }
        let objective = SparseSym::from_triplets(nh_total * m, &trips, false);
        let delta = self.delta_rel * objective.mean_diagonal();
        let constraint_rhs = constraint_rhs_tables(asm, a_mid, e_dot);
        HybridSystem {
            objective,
            objective_rhs: f,
            objective_const: c0,
            constraints: self.constraints.clone(),
            constraint_rhs,
            delta,
        }
    }

    /// Solve the system, reusing the KKT factorization pattern across steps.
    pub fn solve(&mut self, sys: &HybridSystem<S>, hhat: &mut Field<S>) -> Result<HybridSolveInfo<S>> {
        let kkt = build_kkt(&sys.objective, &sys.constraints, sys.delta);
        if let Some(solver) = self.kkt_solver.as_mut() {
            solver.refactor(&kkt)?;
        } else {
            self.kkt_solver = Some(LdltSolver::new(&kkt)?);
        }
        let solver = self.kkt_solver.as_ref().unwrap();
        let mut rhs = Vec::with_capacity(kkt.n);
        rhs.extend_from_slice(&sys.objective_rhs);
        rhs.extend_from_slice(&sys.constraint_rhs);
        let sol = solver.solve(&rhs);
        finish_solve(sys, &sol, hhat)
    }
}

/// One-shot solve of a hybrid system (fresh factorization).
pub fn solve_hybrid<S: Real>(sys: &HybridSystem<S>, hhat: &mut Field<S>) -> Result<HybridSolveInfo<S>> {
    let kkt = build_kkt(&sys.objective, &sys.constraints, sys.delta);
    let solver = LdltSolver::new(&kkt)?;
    let mut rhs = Vec::with_capacity(kkt.n);
    rhs.extend_from_slice(&sys.objective_rhs);
    rhs.extend_from_slice(&sys.constraint_rhs);
    let sol = solver.solve(&rhs);
    finish_solve(sys, &sol, hhat)
}

fn finish_solve<S: Real>(
    sys: &HybridSystem<S>,
    sol: &[S],
    hhat: &mut Field<S>,
) -> Result<HybridSolveInfo<S>> {
    let n = sys.objective.n;
    let x = &sol[..n];
    let res = constraint_residual(&sys.constraints, x, &sys.constraint_rhs);
    // objective value: x^T Q x - 2 f^T x + c0
    let mut qx = vec![S::zero(); n];
    sys.objective.mul_vec(x, &mut qx);
    let mut obj = sys.objective_const;
    for i in 0..n {
        obj += x[i] * qx[i] - S::lit(2.0) * sys.objective_rhs[i] * x[i];
    }
    hhat.coeffs.copy_from_slice(x);
    if res > consistency_tolerance::<S>() {
        return Err(Error::ConstraintInconsistent {
            residual: res.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(HybridSolveInfo {
        constraint_residual: res,
        objective_value: obj,
    })
}

/// The constant constraint matrix: row (element, local broken test `a`, layer
/// `l`) pairs the boundary trace of the test with the multiplier trace,
/// weighted by the Gram matrix across layers.
pub fn constraint_matrix<S: Real>(
    asm: &Assembler<S>,
    alg: &crate::lie::LieAlgebra<S>,
) -> CsrMatrix<S> {
    let mesh = asm.conf.mesh();
    let m = alg.dim();
    let mut rows: Vec<Vec<(usize, S)>> = Vec::with_capacity(mesh.n_triangles() * 6 * m);
    for k in 0..mesh.n_triangles() {
        let pair = asm.boundary_pairing(k);
        let dofs = asm.hhat.local_dofs(k);
        for a in 0..6 {
            for l in 0..m {
                let mut row = Vec::with_capacity(dofs.len() * m);
                for (h, &dof) in dofs.iter().enumerate() {
                    let w = pair.get(a, h);
                    if w == S::zero() {
                        continue;
                    }
                    // the test lives in layer l; the Gram matrix couples it to
                    // every multiplier layer
                    for l2 in 0..m {
                        let g = alg.g(l, l2);
                        if g != S::zero() {
                            row.push((dof * m + l2, w * g));
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    CsrMatrix::from_rows(asm.hhat.n_dofs * m, &rows)
}

/// Constraint right-hand side via the fast tables:
/// `b[(K,a,l)] = -int_K <phi_a e_l ^ eps E_dot> + int_K <d_A(phi_a e_l) ^ H>`.
pub fn constraint_rhs_tables<S: Real>(
    asm: &Assembler<S>,
    a_mid: &Field<S>,
    e_dot: &Field<S>,
) -> Vec<S> {
    let alg = &a_mid.algebra;
    let m = alg.dim();
    let mesh = asm.conf.mesh();
    let nq = asm.rule.tri_points.len();
    let mut b = vec![S::zero(); mesh.n_triangles() * 6 * m];
    let mut av = vec![S::zero(); m * nq * 2];
    let mut acurl = vec![S::zero(); m * nq];
    let mut ev = vec![S::zero(); m * nq * 2];
    let mut ecurl = vec![S::zero(); m * nq];
    let mut h0 = vec![S::zero(); m * nq];
    for k in 0..mesh.n_triangles() {
        let tab = &asm.tabs[k];
        asm.field_values(k, a_mid, &mut av, &mut acurl);
        asm.field_values(k, e_dot, &mut ev, &mut ecurl);
        for l in 0..m {
            for q in 0..nq {
                h0[l * nq + q] = acurl[l * nq + q];
            }
        }
        for a in 0..m {
            for bb in 0..m {
                for kk in 0..m {
                    let c = alg.c(a, bb, kk);
                    if c == S::zero() {
                        continue;
                    }
                    let half = c * S::lit(0.5);
                    for q in 0..nq {
                        let cross = av[a * nq * 2 + q * 2] * av[bb * nq * 2 + q * 2 + 1]
                            - av[a * nq * 2 + q * 2 + 1] * av[bb * nq * 2 + q * 2];
                        h0[kk * nq + q] += half * cross;
                    }
                }
            }
        }
        for a in 0..6 {
            for l in 0..m {
                let mut acc = S::zero();
                for q in 0..nq {
                    let px = tab.conf_vals[a * nq * 2 + q * 2];
                    let py = tab.conf_vals[a * nq * 2 + q * 2 + 1];
                    // term 1: -<phi_a e_l ^ eps E_dot>; the 1-form wedge with
                    // the rotated proxy reduces to the dot product
                    let mut t1 = S::zero();
                    for b2 in 0..m {
                        let g = alg.g(l, b2);
                        if g != S::zero() {
                            t1 += g
                                * (px * ev[b2 * nq * 2 + q * 2] + py * ev[b2 * nq * 2 + q * 2 + 1]);
                        }
                    }
                    // term 2: <d_A(phi_a e_l) ^ H>
                    let mut dal = [S::zero(), S::zero(), S::zero()];
                    let dal = &mut dal[..m];
                    dal[l] = tab.conf_curl[a * nq + q];
                    for aa in 0..m {
                        for kk in 0..m {
                            let c = alg.c(aa, l, kk);
                            if c == S::zero() {
                                continue;
                            }
                            let cross =
                                av[aa * nq * 2 + q * 2] * py - av[aa * nq * 2 + q * 2 + 1] * px;
                            dal[kk] += c * cross;
                        }
                    }
                    let mut t2 = S::zero();
                    for k1 in 0..m {
                        for k2 in 0..m {
                            let g = alg.g(k1, k2);
                            if g != S::zero() {
                                t2 += g * dal[k1] * h0[k2 * nq + q];
                            }
                        }
                    }
                    acc += tab.wdet[q] * (-t1 + t2);
                }
                b[(k * 6 + a) * m + l] = acc;
            }
        }
    }
    b
}

/// Constraint right-hand side through exact polynomial calculus; the
/// independent oracle for [`constraint_rhs_tables`].
pub fn constraint_rhs_symbolic<S: Real>(a_mid: &Field<S>, e_dot: &Field<S>) -> Result<Vec<S>> {
    let space = &a_mid.space;
    let alg = &a_mid.algebra;
    let mesh = space.mesh();
    let m = alg.dim();
    let mut b = vec![S::zero(); mesh.n_triangles() * 6 * m];
    for k in 0..mesh.n_triangles() {
        let a_local = a_mid.local_polyform(k);
        let h = hodge_mu_inv(&curvature(&a_local, alg)?)?;
        let ddot = hodge_eps(&e_dot.local_polyform(k))?;
        for a in 0..6 {
            let basis = space.basis(k, a);
            for l in 0..m {
                let mut phi = PolyForm::zero(1, m, space.poly_degree);
                phi.comps[l * 2] = basis[0].clone();
                phi.comps[l * 2 + 1] = basis[1].clone();
                let t1 = integrate_2form(mesh, k, &wedge_inner(&phi, &ddot, alg)?)?[0];
                let dphi = covariant_d(&a_local, &phi, alg)?;
                let t2 = integrate_2form(mesh, k, &wedge_inner(&dphi, &h, alg)?)?[0];
                b[(k * 6 + a) * m + l] = -t1 + t2;
            }
        }
    }
    Ok(b)
}

/// Advance the broken flux field by `dt * d_A hhat`, element-wise exactly.
pub fn dhat_step<S: Real>(
    dhat: &mut Field<S>,
    a_mid: &Field<S>,
    hhat_mid: &Field<S>,
    dt: S,
) -> Result<()> {
    let mesh = dhat.space.mesh().clone();
    let alg = a_mid.algebra.clone();
    for k in 0..mesh.n_triangles() {
        let a_local = a_mid.local_polyform(k);
        let h_local = hhat_mid.local_polyform(k);
        let rate = covariant_d(&a_local, &h_local, &alg)?;
        dhat.add_local_from_polyform(k, dt, &rate)?;
    }
    Ok(())
}

/// Initial broken flux: the exact element-wise embedding of `eps E0`.
pub fn dhat_init<S: Real>(
    e0: &Field<S>,
    broken: &std::sync::Arc<crate::femspace::FormSpace<S>>,
) -> Result<Field<S>> {
    e0.embed_broken(broken, true)
}
