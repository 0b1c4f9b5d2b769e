//! Charge and energy diagnostics: the hybrid per-element charge (conserved by
//! the scheme), the standard charge expression (locally drifting), their
//! piecewise-constant L2 summaries, total energy, and a conformity residual.

use crate::calculus::{
    curvature, edge_trace, exterior_d, hodge_eps, hodge_mu_inv, integrate_2form,
    integrate_boundary_trace, wedge_bracket, wedge_inner,
};
use crate::dynamics::SimState;
use crate::error::Result;
use crate::femspace::Field;
use crate::lie::LieVector;
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;

/// One row of the diagnostics time series.
#[derive(Clone, Debug)]
pub struct DiagnosticsRecord<S> {
    pub step: usize,
    pub time: S,
    /// L2 norm of the piecewise-constant projection of the standard charge.
    pub l2_rho_avg: S,
    /// Same for the hybrid charge.
    pub l2_rhohat_avg: S,
    /// Largest per-element/per-layer deviation of the hybrid charge from its
    /// step-0 reference.
    pub max_abs_q_drift: S,
    /// Integral of the standard charge over the whole domain, per layer.
    pub global_charge: LieVector<S>,
    pub global_charge_norm: S,
    pub energy: S,
    pub constraint_residual: S,
}

/// Per-element hybrid charge: boundary circulation of the broken flux plus the
/// volume bracket term,
/// `Q_K[a] = oint_{dK} <e_a, Dhat> + int_K <e_a, [A ^ eps E]>`.
///
/// The flux circulation is also computed through the volume form of the exact
/// Stokes identity, and the two routes are asserted to agree.
pub fn element_charge_hat<S: Real>(state: &SimState<S>, k: usize) -> Result<Vec<S>> {
    let alg = &state.a.algebra;
    let m = alg.dim();
    let mesh = state.a.space.mesh().clone();
    let dhat_local = state.hybrid.dhat.local_polyform(k);
    let boundary = integrate_boundary_trace(&mesh, k, &dhat_local);
    // Stokes route: int_K d(Dhat); both are exact polynomial integrals
    let volume = integrate_2form(&mesh, k, &exterior_d(&dhat_local)?)?;
    let scale = boundary
        .iter()
        .chain(&volume)
        .fold(S::one(), |acc, v| acc.max(v.abs()));
    for (b, v) in boundary.iter().zip(&volume) {
        assert!(
            (*b - *v).abs() <= S::lit(1e-13) * scale,
            "flux circulation disagrees with its Stokes volume form"
        );
    }
    let a_local = state.a.local_polyform(k);
    let eps_e = hodge_eps(&state.e.local_polyform(k))?;
    let bracket = wedge_bracket(&a_local, &eps_e, alg)?;
    let bracket_int = integrate_2form(&mesh, k, &bracket)?;
    let mut out = vec![S::zero(); m];
    for a in 0..m {
        for b in 0..m {
            let g = alg.g(a, b);
            if g != S::zero() {
                out[a] += g * (boundary[b] + bracket_int[b]);
            }
        }
    }
    Ok(out)
}

/// Per-element standard charge `int_K <e_a, d(eps E) + [A ^ eps E]>`, via
/// exact polynomial calculus.
pub fn element_charge_std<S: Real>(state: &SimState<S>, k: usize) -> Result<Vec<S>> {
    let alg = &state.a.algebra;
    let m = alg.dim();
    let mesh = state.a.space.mesh().clone();
    let a_local = state.a.local_polyform(k);
    let eps_e = hodge_eps(&state.e.local_polyform(k))?;
    let mut rho = exterior_d(&eps_e)?;
    rho.axpy(S::one(), &wedge_bracket(&a_local, &eps_e, alg)?);
    let ints = integrate_2form(&mesh, k, &rho)?;
    let mut out = vec![S::zero(); m];
    for a in 0..m {
        for b in 0..m {
            let g = alg.g(a, b);
            if g != S::zero() {
                out[a] += g * ints[b];
            }
        }
    }
    Ok(out)
}

/// All hybrid charges, element-major layer-minor.
pub fn all_hat_charges<S: Real>(state: &SimState<S>) -> Result<Vec<S>> {
    let mesh = state.a.space.mesh().clone();
    let m = state.a.algebra.dim();
    let mut out = Vec::with_capacity(mesh.n_triangles() * m);
    for k in 0..mesh.n_triangles() {
        out.extend(element_charge_hat(state, k)?);
    }
    Ok(out)
}

/// All standard charges, element-major layer-minor.
pub fn all_std_charges<S: Real>(state: &SimState<S>) -> Result<Vec<S>> {
    let mesh = state.a.space.mesh().clone();
    let m = state.a.algebra.dim();
    let mut out = Vec::with_capacity(mesh.n_triangles() * m);
    for k in 0..mesh.n_triangles() {
        out.extend(element_charge_std(state, k)?);
    }
    Ok(out)
}

/// L2 norm of the piecewise-constant projection of per-element charges:
/// `sqrt( sum_K |K| |Q_K / |K||_G^2 )`.
pub fn l2_pc_projection<S: Real>(
    charges: &[S],
    mesh: &crate::mesh::Mesh<S>,
    alg: &crate::lie::LieAlgebra<S>,
) -> S {
    let m = alg.dim();
    let mut acc = S::zero();
    for k in 0..mesh.n_triangles() {
        let area = mesh.area(k);
        let q = &charges[k * m..(k + 1) * m];
        let mut norm2 = S::zero();
        for a in 0..m {
            for b in 0..m {
                norm2 += q[a] * alg.g(a, b) * q[b];
            }
        }
        acc += norm2 / area;
    }
    acc.sqrt()
}

/// Total energy `1/2 int (<E ^ eps E> + <F_A ^ mu^-1 F_A>)`, exactly.
pub fn energy<S: Real>(state: &SimState<S>) -> Result<S> {
    let alg = &state.a.algebra;
    let mesh = state.a.space.mesh().clone();
    let mut acc = S::zero();
    for k in 0..mesh.n_triangles() {
        let e_local = state.e.local_polyform(k);
        let ee = wedge_inner(&e_local, &hodge_eps(&e_local)?, alg)?;
        let f = curvature(&state.a.local_polyform(k), alg)?;
        let fh = wedge_inner(&f, &hodge_mu_inv(&f)?, alg)?;
        acc += integrate_2form(&mesh, k, &ee)?[0];
        acc += integrate_2form(&mesh, k, &fh)?[0];
    }
    Ok(acc * S::lit(0.5))
}

/// Largest tangential-trace jump of a conforming 1-form field across interior
/// edges, sampled at edge quadrature points.
///
/// Traces are canonicalized to the ascending-vertex-id orientation before the
/// two sides are compared, so a corrupted per-element edge direction shows up
/// as a jump instead of being silently re-parametrized away.
pub fn conformity_residual<S: Real>(field: &Field<S>, rule: &QuadratureRule<S>) -> S {
    let mesh = field.space.mesh().clone();
    let m = field.algebra.dim();
    let mut per_edge: Vec<Option<Vec<S>>> = vec![None; mesh.n_edges()];
    let mut worst = S::zero();
    for k in 0..mesh.n_triangles() {
        let local = field.local_polyform(k);
        let tri = mesh.triangle(k);
        for le in 0..3 {
            let te = mesh.tri_edges(k)[le];
            let canonical = tri[te.from_slot as usize] == mesh.edge(te.edge)[0];
            let traces = edge_trace(&mesh, k, le, &local);
            let mut vals = Vec::with_capacity(rule.edge_points.len() * m);
            for t in &rule.edge_points {
                // sample in the canonical parameter; a flipped record is
                // evaluated at the mirrored parameter with negated tangent
                let tt = if canonical { *t } else { S::one() - *t };
                for tr in &traces {
                    let v = tr.eval(tt);
                    vals.push(if canonical { v } else { -v });
                }
            }
            match &per_edge[te.edge] {
                None => per_edge[te.edge] = Some(vals),
                Some(other) => {
                    for (a, b) in vals.iter().zip(other) {
                        worst = worst.max((*a - *b).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Assemble the full diagnostics row for the current state.
pub fn record<S: Real>(state: &SimState<S>) -> Result<DiagnosticsRecord<S>> {
    let mesh = state.a.space.mesh().clone();
    let alg = state.a.algebra.clone();
    let m = alg.dim();
    let hat = all_hat_charges(state)?;
    let std_ = all_std_charges(state)?;
    let mut drift = S::zero();
    for (q, q0) in hat.iter().zip(&state.reference_charges) {
        drift = drift.max((*q - *q0).abs());
    }
    let mut global = vec![S::zero(); m];
    for k in 0..mesh.n_triangles() {
        for l in 0..m {
            global[l] += std_[k * m + l];
        }
    }
    let mut gnorm2 = S::zero();
    for a in 0..m {
        for b in 0..m {
            gnorm2 += global[a] * alg.g(a, b) * global[b];
        }
    }
    Ok(DiagnosticsRecord {
        step: state.step,
        time: state.time,
        l2_rho_avg: l2_pc_projection(&std_, &mesh, &alg),
        l2_rhohat_avg: l2_pc_projection(&hat, &mesh, &alg),
        max_abs_q_drift: drift,
        global_charge: LieVector(global),
        global_charge_norm: gnorm2.sqrt(),
        energy: energy(state)?,
        constraint_residual: state.last_constraint_residual,
    })
}
