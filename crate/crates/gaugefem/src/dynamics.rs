//! The leapfrog time stepper, state management, and initial-condition
//! constructors.
//!
//! One step advances the connection by a half step, solves the conforming
//! evolution equation for the electric rate, solves the hybrid system for the
//! multiplier, advances the electric field and the broken flux, and closes the
//! connection half step. The loop is strictly sequential.

use crate::assembly::{mass_eps, Assembler, SpdFactor};
use crate::config::{Algebra, Domain, RunConfig};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::femspace::{Field, FormSpace};
use crate::hybrid::{dhat_init, dhat_step, HybridState, HybridWorkspace};
use crate::lie::{su2, u1, LieAlgebra};
use crate::linalg::{DenseLu, DenseMat, SparseSym};
use crate::mesh::{structured_square, Mesh};
use crate::quadrature::{quadrature, QuadratureRule};
use crate::scalar::Real;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Solver for the conforming mass system with boundary DOFs eliminated and the
/// Lie Gram factor applied blockwise. Factored once per run.
pub struct MassSolver<S: Real> {
    factor: SpdFactor<S>,
    free: Vec<usize>,
    n_dofs: usize,
    g_inv: DenseMat<S>,
    m: usize,
}

impl<S: Real> MassSolver<S> {
    pub fn new(
        space: &Arc<FormSpace<S>>,
        rule: &QuadratureRule<S>,
        alg: &Arc<LieAlgebra<S>>,
    ) -> Result<Self> {
        let full = mass_eps(space, rule);
        let free: Vec<usize> = (0..space.n_dofs)
            .filter(|&d| !space.is_boundary_dof(d))
            .collect();
        let mut idx = vec![usize::MAX; space.n_dofs];
        for (i, &d) in free.iter().enumerate() {
            idx[d] = i;
        }
        let mut trips = Vec::new();
        for i in 0..full.n {
            if idx[i] == usize::MAX {
                continue;
            }
            for p in full.row_ptr[i]..full.row_ptr[i + 1] {
                let j = full.col_idx[p];
                if idx[j] != usize::MAX && idx[j] <= idx[i] {
                    trips.push((idx[i], idx[j], full.vals[p]));
                }
            }
        }
        let reduced = SparseSym::from_triplets(free.len(), &trips, true);
        let factor = SpdFactor::new(reduced)?;
        let m = alg.dim();
        let mut g = DenseMat::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                g.set(a, b, alg.g(a, b));
            }
        }
        let g_inv = DenseLu::new(&g)?.inverse();
        Ok(MassSolver {
            factor,
            free,
            n_dofs: space.n_dofs,
            g_inv,
            m,
        })
    }

    /// Solve `(M (x) G) x = rhs` with boundary rows pinned to zero; `rhs` and
    /// the result use the full `(dof, layer)` layout.
    pub fn solve(&self, rhs: &[S]) -> Result<Vec<S>> {
        let m = self.m;
        let mut tmp = vec![S::zero(); self.n_dofs * m];
        let mut b = vec![S::zero(); self.free.len()];
        for l in 0..m {
            for (i, &d) in self.free.iter().enumerate() {
                b[i] = rhs[d * m + l];
            }
            let x = self.factor.solve(&b)?;
            for (i, &d) in self.free.iter().enumerate() {
                tmp[d * m + l] = x[i];
            }
        }
        let mut out = vec![S::zero(); self.n_dofs * m];
        for d in 0..self.n_dofs {
            for l in 0..m {
                let mut acc = S::zero();
                for l2 in 0..m {
                    acc += self.g_inv.get(l, l2) * tmp[d * m + l2];
                }
                out[d * m + l] = acc;
            }
        }
        Ok(out)
    }
}

/// Everything fixed for one discretization: mesh, spaces, assembler, solvers.
pub struct Model<S: Real> {
    pub mesh: Arc<Mesh<S>>,
    pub algebra: Arc<LieAlgebra<S>>,
    pub conforming: Arc<FormSpace<S>>,
    pub multiplier: Arc<FormSpace<S>>,
    pub broken: Arc<FormSpace<S>>,
    pub piecewise: Arc<FormSpace<S>>,
    pub rule: QuadratureRule<S>,
    pub assembler: Assembler<S>,
    pub hybrid: HybridWorkspace<S>,
    mass: MassSolver<S>,
}

impl<S: Real> Model<S> {
    pub fn new(
        mesh: Arc<Mesh<S>>,
        algebra: Arc<LieAlgebra<S>>,
        degree_s: usize,
    ) -> Result<Self> {
        let conforming = FormSpace::curl_conforming_p1(mesh.clone())?;
        let multiplier = FormSpace::lagrange_cg(mesh.clone(), degree_s)?;
        let broken = FormSpace::broken_1form(mesh.clone(), 1 + degree_s)?;
        let piecewise = FormSpace::piecewise_constant(mesh.clone());
        // one shared rule exact for every assembled integrand: the flux-rate
        // norm has degree 2 (1 + s), everything else is lower
        let exactness = (2 * (1 + degree_s)).max(6);
        let rule = quadrature(exactness)?;
        let assembler = Assembler::new(conforming.clone(), multiplier.clone(), rule.clone());
        let hybrid = HybridWorkspace::new(&assembler, &algebra);
        let mass = MassSolver::new(&conforming, &rule, &algebra)?;
        Ok(Model {
            mesh,
            algebra,
            conforming,
            multiplier,
            broken,
            piecewise,
            rule,
            assembler,
            hybrid,
            mass,
        })
    }

    /// Largest stable-looking time step for the guard (a quarter of the
    /// shortest edge).
    pub fn dt_guard(&self) -> S {
        self.mesh.min_edge_length() * S::lit(0.25)
    }
}

/// Full simulation state at one time level.
#[derive(Clone)]
pub struct SimState<S> {
    pub time: S,
    pub step: usize,
    /// Connection 1-form (conforming).
    pub a: Field<S>,
    /// Electric field 1-form (conforming); the flux density is `eps E`.
    pub e: Field<S>,
    /// Hybrid multiplier/flux pair; the multiplier holds the last mid-step solve.
    pub hybrid: HybridState<S>,
    /// Per-element hat charges recorded at step 0 (element-major, layer-minor).
    pub reference_charges: Vec<S>,
    /// Constraint residual of the most recent hybrid solve.
    pub last_constraint_residual: S,
}

/// Built-in initial-condition families.
#[derive(Clone, Debug)]
pub struct Scenario<S> {
    pub name: String,
    pub amplitude: S,
    pub seed: u64,
}

impl<S: Real> Model<S> {
    /// Build the initial state for a scenario: interpolate the closed-form
    /// connection, set the electric field to zero, embed the flux exactly, and
    /// record the reference charges.
    pub fn make_initial(&self, scenario: &Scenario<S>) -> Result<SimState<S>> {
        let amp = scenario.amplitude;
        let m = self.algebra.dim();
        let two_pi = S::lit(2.0) * S::PI();
        let mut a = match scenario.name.as_str() {
            "zero" => Field::zeros(self.conforming.clone(), self.algebra.clone()),
            "su2_bump" => Field::interpolate_oneform(
                &self.conforming,
                &self.algebra,
                &self.rule,
                |x, l| {
                    let bump = amp * (two_pi * x[0]).sin() * (two_pi * x[1]).sin();
                    match l {
                        0 => [bump, S::zero()],
                        1 => [S::zero(), bump],
                        _ => [S::zero(), S::zero()],
                    }
                },
            ),
            "u1_wave" => Field::interpolate_oneform(
                &self.conforming,
                &self.algebra,
                &self.rule,
                |x, l| {
                    if l == 0 {
                        [S::zero(), amp * (two_pi * x[0]).sin()]
                    } else {
                        [S::zero(), S::zero()]
                    }
                },
            ),
            "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
                let mut f = Field::zeros(self.conforming.clone(), self.algebra.clone());
                for c in f.coeffs.iter_mut() {
                    *c = amp * S::lit(rng.gen_range(-1.0..1.0));
                }
                f
            }
            other => return Err(Error::UnknownScenario(other.to_string())),
        };
        a.zero_boundary();
        let _ = m;
        let e = Field::zeros(self.conforming.clone(), self.algebra.clone());
        let dhat = dhat_init(&e, &self.broken)?;
        let hhat = Field::zeros(self.multiplier.clone(), self.algebra.clone());
        let mut state = SimState {
            time: S::zero(),
            step: 0,
            a,
            e,
            hybrid: HybridState { hhat, dhat },
            reference_charges: Vec::new(),
            last_constraint_residual: S::zero(),
        };
        state.reference_charges = diagnostics::all_hat_charges(&state)?;
        Ok(state)
    }

    /// One leapfrog step; `dt` may be negative (time reversal).
    pub fn leapfrog_step(&mut self, state: &mut SimState<S>, dt: S) -> Result<()> {
        let half = dt * S::lit(0.5);
        // (1) half-step the connection: A += -dt/2 E
        state.a.axpy(-half, &state.e);
        // (2) conforming evolution solve for the electric rate
        let rhs = self.assembler.evolution_rhs(&state.a);
        let edot_coeffs = self.mass.solve(&rhs)?;
        let mut edot = Field::zeros(self.conforming.clone(), self.algebra.clone());
        edot.coeffs = edot_coeffs;
        // (3) hybrid solve for the multiplier at the half step
        let sys = self.hybrid.build_system(&self.assembler, &state.a, &edot);
        let info = self.hybrid.solve(&sys, &mut state.hybrid.hhat)?;
        state.last_constraint_residual = info.constraint_residual;
        // (4) full step of the electric field
        state.e.axpy(dt, &edot);
        // (5) exact flux update by the covariant derivative of the multiplier
        dhat_step(&mut state.hybrid.dhat, &state.a, &state.hybrid.hhat, dt)?;
        // (6) close the connection half step
        state.a.axpy(-half, &state.e);
        state.step += 1;
        state.time += dt;
        if !(state.a.is_finite() && state.e.is_finite() && state.hybrid.dhat.is_finite()) {
            return Err(Error::NonFinite { step: state.step });
        }
        Ok(())
    }
}

/// One output row of the per-element charge dump.
#[derive(Clone, Debug)]
pub struct PerElementRow<S> {
    pub step: usize,
    pub element: usize,
    pub layer: usize,
    pub charge: S,
}

/// Full run output: the time series plus optional per-element charges.
pub struct RunOutput<S> {
    pub records: Vec<DiagnosticsRecord<S>>,
    pub per_element: Vec<PerElementRow<S>>,
}

/// Build the model and state for a configuration.
pub fn setup<S: Real>(cfg: &RunConfig) -> Result<(Model<S>, SimState<S>)> {
    crate::config::validate(cfg)?;
    let mesh = Arc::new(structured_square::<S>(
        cfg.nx,
        cfg.ny,
        cfg.domain == Domain::Torus,
    )?);
    let algebra = Arc::new(match cfg.algebra {
        Algebra::Su2 => su2::<S>(),
        Algebra::U1 => u1::<S>(),
    });
    let mut model = Model::new(mesh, algebra, cfg.degree_s)?;
    model.hybrid.delta_rel = S::lit(cfg.kkt_delta);
    model.hybrid.weight_multiplier = S::lit(cfg.weight_multiplier);
    model.hybrid.weight_flux = S::lit(cfg.weight_flux);
    let scenario = Scenario {
        name: cfg.scenario.clone(),
        amplitude: S::lit(cfg.amplitude),
        seed: cfg.seed,
    };
    let state = model.make_initial(&scenario)?;
    Ok((model, state))
}

/// Execute a configured run, collecting diagnostics every `output_every`
/// steps (plus the initial state).
pub fn run<S: Real>(cfg: &RunConfig) -> Result<RunOutput<S>> {
    let (mut model, mut state) = setup(cfg)?;
    let dt = S::lit(cfg.dt);
    if dt > model.dt_guard() {
        eprintln!(
            "warning: dt = {} exceeds the stability guard {} (quarter of the shortest edge)",
            dt,
            model.dt_guard()
        );
    }
    let mut records = Vec::new();
    let mut per_element = Vec::new();
    let emit = |state: &SimState<S>,
                records: &mut Vec<DiagnosticsRecord<S>>,
                per_element: &mut Vec<PerElementRow<S>>|
     -> Result<()> {
        records.push(diagnostics::record(state)?);
        let charges = diagnostics::all_hat_charges(state)?;
        let m = state.a.algebra.dim();
        for k in 0..state.a.space.mesh().n_triangles() {
            for l in 0..m {
                per_element.push(PerElementRow {
                    step: state.step,
                    element: k,
                    layer: l,
                    charge: charges[k * m + l],
                });
            }
        }
        Ok(())
    };
    emit(&state, &mut records, &mut per_element)?;
    for n in 0..cfg.steps {
        model.leapfrog_step(&mut state, dt)?;
        if (n + 1) % cfg.output_every == 0 || n + 1 == cfg.steps {
            emit(&state, &mut records, &mut per_element)?;
        }
    }
    Ok(RunOutput {
        records,
        per_element,
    })
}
