//! Run driver: CSV emission, plot-script emission, and the self-test suite.

use crate::config::{render, RunConfig};
use crate::diagnostics::{self, conformity_residual};
use crate::dynamics::{self, Model, Scenario};
use crate::error::{Error, Result};
use crate::femspace::{Field, FormSpace};
use crate::lie::{su2, u1};
use crate::mesh::structured_square;
use crate::quadrature::quadrature;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

pub const TIMESERIES_HEADER: &str =
    "step,time,l2_rho_avg,l2_rhohat_avg,max_abs_Q_drift,global_charge_norm,energy,constraint_residual";

fn fmt(x: f64) -> String {
    // 17 significant digits: round-trips exactly
    format!("{x:.16e}")
}

/// Render the diagnostics time series as CSV text.
pub fn timeseries_csv(records: &[diagnostics::DiagnosticsRecord<f64>]) -> String {
    let mut out = String::new();
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.step,
            fmt(r.time),
            fmt(r.l2_rho_avg),
            fmt(r.l2_rhohat_avg),
            fmt(r.max_abs_q_drift),
            fmt(r.global_charge_norm),
            fmt(r.energy),
            fmt(r.constraint_residual),
        );
    }
    out
}

/// Render the per-element charge dump as CSV text.
pub fn per_element_csv(rows: &[dynamics::PerElementRow<f64>]) -> String {
    let mut out = String::from("step,element,layer,Q\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.step, r.element, r.layer, fmt(r.charge));
    }
    out
}

const PLOT_SCRIPT: &str = "\
# gnuplot script: charge drift comparison
set datafile separator ','
set xlabel 'time'
set ylabel 'L2 norm of piecewise-constant charge'
set logscale y
set format y '%.1e'
set key left top
plot 'charge_timeseries.csv' using 2:3 with lines lw 2 title 'standard charge', \\
     'charge_timeseries.csv' using 2:4 with lines lw 2 title 'hybrid charge'
";

/// Execute a configured run and write all output files.
pub fn cmd_run(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let out = dynamics::run::<f64>(cfg)?;
    let dir: &Path = &cfg.output_dir;
    std::fs::write(dir.join("charge_timeseries.csv"), timeseries_csv(&out.records))?;
    std::fs::write(dir.join("per_element_charge.csv"), per_element_csv(&out.per_element))?;
    std::fs::write(dir.join("plot.gp"), PLOT_SCRIPT)?;
    let mesh = structured_square::<f64>(
        cfg.nx,
        cfg.ny,
        cfg.domain == crate::config::Domain::Torus,
    )?;
    let mut mesh_txt = Vec::new();
    mesh.dump(&mut mesh_txt)?;
    std::fs::write(dir.join("mesh.txt"), mesh_txt)?;
    if let Some(last) = out.records.last() {
        println!(
            "steps: {}  final l2_rho_avg: {:.3e}  final l2_rhohat_avg: {:.3e}  max drift: {:.3e}",
            last.step, last.l2_rho_avg, last.l2_rhohat_avg, last.max_abs_q_drift
        );
    }
    Ok(())
}

/// Print the effective configuration.
pub fn cmd_print_config(cfg: &RunConfig) {
    print!("{}", render(cfg));
}

/// One self-test check.
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

/// The self-test battery: algebra identities, calculus identities, Stokes
/// checks, unisolvence, conformity (including an injected fault), and a
/// conservation smoke run. Each check prints one pass/fail line.
pub fn selftest() -> Vec<CheckResult> {
    let mut out = Vec::new();

    // Lie algebra identities
    {
        let a3 = su2::<f64>();
        let a1 = u1::<f64>();
        let worst = a3
            .antisymmetry_defect()
            .max(a3.jacobi_defect())
            .max(a3.invariance_defect())
            .max(a1.jacobi_defect());
        out.push(check(
            "lie identities",
            worst <= 1e-14,
            format!("max defect {worst:.2e}"),
        ));
    }

    // calculus identity suite on random polynomial forms
    {
        use crate::calculus::*;
        let alg = su2::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut worst = 0.0f64;
        let mut random_form = |rank: u8, deg: usize, rng: &mut ChaCha8Rng| {
            let mut f = PolyForm::<f64>::zero(rank, 3, deg);
            for c in f.comps.iter_mut() {
                for n in 0..=deg {
                    for j in 0..=n {
                        c.set_coeff(n - j, j, rng.gen_range(-1.0..1.0));
                    }
                }
            }
            f
        };
        for _ in 0..60 {
            let u = random_form(0, 2, &mut rng);
            let v = random_form(1, 2, &mut rng);
            let a = random_form(1, 2, &mut rng);
            let lhs = exterior_d(&wedge_bracket(&u, &v, &alg).unwrap()).unwrap();
            let mut rhs = wedge_bracket(&exterior_d(&u).unwrap(), &v, &alg).unwrap();
            rhs.axpy(1.0, &wedge_bracket(&u, &exterior_d(&v).unwrap(), &alg).unwrap());
            let mut diff = lhs;
            diff.axpy(-1.0, &rhs);
            worst = worst.max(diff.max_abs_coeff());
            // d_A d_A u = [F_A ^ u]
            let dd = covariant_d(&a, &covariant_d(&a, &u, &alg).unwrap(), &alg).unwrap();
            let fu = wedge_bracket(&curvature(&a, &alg).unwrap(), &u, &alg).unwrap();
            let mut diff = dd;
            diff.axpy(-1.0, &fu);
            worst = worst.max(diff.max_abs_coeff());
            // [v ^ eps v] = 0
            let veps = wedge_bracket(&v, &hodge_eps(&v).unwrap(), &alg).unwrap();
            worst = worst.max(veps.max_abs_coeff());
        }
        out.push(check(
            "calculus identities",
            worst <= 1e-12,
            format!("max defect {worst:.2e}"),
        ));
    }

    // Stokes checks on a small mesh
    {
        use crate::calculus::*;
        let mesh = structured_square::<f64>(3, 3, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        let mut worst = 0.0f64;
        for k in 0..mesh.n_triangles() {
            let mut u = PolyForm::<f64>::zero(1, 1, 3);
            for c in u.comps.iter_mut() {
                for n in 0..=3 {
                    for j in 0..=n {
                        c.set_coeff(n - j, j, rng.gen_range(-1.0..1.0));
                    }
                }
            }
            let lhs = integrate_boundary_trace(&mesh, k, &u)[0];
            let rhs = integrate_2form(&mesh, k, &exterior_d(&u).unwrap()).unwrap()[0];
            worst = worst.max((lhs - rhs).abs());
        }
        out.push(check(
            "stokes consistency",
            worst <= 1e-13,
            format!("max defect {worst:.2e}"),
        ));
    }

    // unisolvence: interpolate each basis function's own DOFs
    {
        let mesh = Arc::new(structured_square::<f64>(3, 3, true).unwrap());
        let sp = FormSpace::curl_conforming_p1(mesh.clone()).unwrap();
        let rule = quadrature::<f64>(6).unwrap();
        let alg = Arc::new(u1::<f64>());
        // interpolating the constant form dx reproduces it exactly
        let f = Field::interpolate_oneform(&sp, &alg, &rule, |_, _| [1.0, 0.0]);
        let mut worst = 0.0f64;
        for k in 0..mesh.n_triangles() {
            let local = f.local_polyform(k);
            let v = local.eval_point(0.05, 0.03);
            worst = worst.max((v.vals[0] - 1.0).abs()).max(v.vals[1].abs());
        }
        out.push(check(
            "interpolation exactness",
            worst <= 1e-12,
            format!("max defect {worst:.2e}"),
        ));
    }

    // conformity, clean and with an injected orientation fault
    {
        let rule = quadrature::<f64>(6).unwrap();
        let alg = Arc::new(su2::<f64>());
        let mesh = Arc::new(structured_square::<f64>(4, 4, true).unwrap());
        let sp = FormSpace::curl_conforming_p1(mesh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let mut f = Field::zeros(sp, alg.clone());
        for c in f.coeffs.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let clean = conformity_residual(&f, &rule);
        let mut bad_mesh = structured_square::<f64>(4, 4, true).unwrap();
        bad_mesh.inject_orientation_fault(1, 2);
        let bad_sp = FormSpace::curl_conforming_p1(Arc::new(bad_mesh)).unwrap();
        let mut bad = Field::zeros(bad_sp, alg);
        bad.coeffs.copy_from_slice(&f.coeffs);
        let faulted = conformity_residual(&bad, &rule);
        out.push(check(
            "conformity of traces",
            clean <= 1e-13 && faulted > 1e-6,
            format!("clean {clean:.2e}, with injected fault {faulted:.2e}"),
        ));
    }

    // conservation smoke run
    {
        let mesh = Arc::new(structured_square::<f64>(4, 4, true).unwrap());
        let alg = Arc::new(su2::<f64>());
        let mut model = Model::new(mesh, alg, 3).unwrap();
        let scenario = Scenario {
            name: "su2_bump".into(),
            amplitude: 1.0,
            seed: 0,
        };
        let mut state = model.make_initial(&scenario).unwrap();
        let mut ok = true;
        let mut drift = 0.0f64;
        for _ in 0..20 {
            if model.leapfrog_step(&mut state, 0.02).is_err() {
                ok = false;
                break;
            }
        }
        if ok {
            let charges = diagnostics::all_hat_charges(&state).unwrap();
            for (q, q0) in charges.iter().zip(&state.reference_charges) {
                drift = drift.max((q - q0).abs());
            }
        }
        out.push(check(
            "hybrid charge conservation (smoke)",
            ok && drift <= 1e-10,
            format!("max per-element drift {drift:.2e} over 20 steps"),
        ));

        // the same run on a mesh with a broken edge orientation must fail:
        // the hybrid constraints become inconsistent and the solver says so
        let mut bad_mesh = structured_square::<f64>(4, 4, true).unwrap();
        bad_mesh.inject_orientation_fault(3, 1);
        let alg = Arc::new(su2::<f64>());
        let fault_detected = match Model::new(Arc::new(bad_mesh), alg, 3) {
            Err(_) => true,
            Ok(mut bad_model) => {
                let mut bad_state = match bad_model.make_initial(&Scenario {
                    name: "su2_bump".into(),
                    amplitude: 1.0,
                    seed: 0,
                }) {
                    Ok(s) => s,
                    Err(_) => {
                        out.push(check("fault injection detected", true, "init failed".into()));
                        return out;
                    }
                };
                let mut failed = false;
                for _ in 0..5 {
                    if bad_model.leapfrog_step(&mut bad_state, 0.02).is_err() {
                        failed = true;
                        break;
                    }
                }
                if !failed {
                    let charges = diagnostics::all_hat_charges(&bad_state).unwrap_or_default();
                    let mut bad_drift = 0.0f64;
                    for (q, q0) in charges.iter().zip(&bad_state.reference_charges) {
                        bad_drift = bad_drift.max((q - q0).abs());
                    }
                    failed = bad_drift > 1e-6;
                }
                failed
            }
        };
        out.push(check(
            "fault injection detected",
            fault_detected,
            "orientation fault must break conservation or the hybrid solve".into(),
        ));
    }

    out
}

/// Run the self-test battery, print the table, and report overall success.
pub fn cmd_selftest() -> bool {
    let results = selftest();
    let mut all = true;
    for r in &results {
        println!(
            "[{}] {:40} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all &= r.passed;
    }
    println!(
        "{} of {} checks passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    all
}

/// Map an error to the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigParse { .. }
        | Error::ConfigValidation { .. }
        | Error::InvalidParameter { .. }
        | Error::UnknownScenario(_) => 1,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_is_stable() {
        assert_eq!(
            TIMESERIES_HEADER,
            "step,time,l2_rho_avg,l2_rhohat_avg,max_abs_Q_drift,global_charge_norm,energy,constraint_residual"
        );
    }

    #[test]
    fn csv_roundtrips_17_digits() {
        let x = std::f64::consts::PI * 1e-7;
        let s = fmt(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn run_and_outputs_are_deterministic() {
        let dir1 = std::env::temp_dir().join("gaugefem_test_run1");
        let dir2 = std::env::temp_dir().join("gaugefem_test_run2");
        let cfg = RunConfig {
            nx: 3,
            ny: 3,
            steps: 3,
            dt: 0.02,
            output_dir: dir1.clone(),
            ..Default::default()
        };
        cmd_run(&cfg).unwrap();
        let cfg2 = RunConfig {
            output_dir: dir2.clone(),
            ..cfg
        };
        cmd_run(&cfg2).unwrap();
        for name in ["charge_timeseries.csv", "per_element_charge.csv"] {
            let a = std::fs::read(dir1.join(name)).unwrap();
            let b = std::fs::read(dir2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
        let ts = std::fs::read_to_string(dir1.join("charge_timeseries.csv")).unwrap();
        assert!(ts.starts_with(TIMESERIES_HEADER));
        // steps=3 with output_every=1: initial row + 3 rows
        assert_eq!(ts.lines().count(), 5);
    }

    #[test]
    fn zero_step_run_has_single_row() {
        let dir = std::env::temp_dir().join("gaugefem_test_zero");
        let cfg = RunConfig {
            nx: 3,
            ny: 3,
            steps: 0,
            output_dir: dir.clone(),
            ..Default::default()
        };
        cmd_run(&cfg).unwrap();
        let ts = std::fs::read_to_string(dir.join("charge_timeseries.csv")).unwrap();
        assert_eq!(ts.lines().count(), 2);
        assert!(dir.join("plot.gp").exists());
        assert!(dir.join("mesh.txt").exists());
    }
}
