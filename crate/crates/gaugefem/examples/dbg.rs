use gaugefem::assembly::{build_kkt, mass_eps, solve_spd, Assembler};
use gaugefem::femspace::{Field, FormSpace};
use gaugefem::hybrid::*;
use gaugefem::lie::su2;
use gaugefem::linalg::{norm2, LdltSolver, SparseSym};
use gaugefem::mesh::structured_square;
use gaugefem::quadrature::quadrature;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn main() {
    let alg = Arc::new(su2::<f64>());
    let mesh = Arc::new(structured_square::<f64>(3, 3, false).unwrap());
    let sp = FormSpace::curl_conforming_p1(mesh.clone()).unwrap();
    let hhat_sp = FormSpace::lagrange_cg(mesh.clone(), 3).unwrap();
    let rule = quadrature(8).unwrap();
    let asm = Assembler::new(sp.clone(), hhat_sp.clone(), rule.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut a = Field::zeros(sp.clone(), alg.clone());
    for c in a.coeffs.iter_mut() { *c = rng.gen_range(-0.5..0.5); }
    a.zero_boundary();
    let rhs = asm.evolution_rhs(&a);
    let m = mass_eps(&sp, &rule);
    let malg = 3;
    let free: Vec<usize> = (0..sp.n_dofs).filter(|&d| !sp.is_boundary_dof(d)).collect();
    let mut idx = vec![usize::MAX; sp.n_dofs];
    for (i, &d) in free.iter().enumerate() { idx[d] = i; }
    let mut trips = Vec::new();
    for i in 0..m.n {
        if idx[i] == usize::MAX { continue; }
        for p in m.row_ptr[i]..m.row_ptr[i + 1] {
            let j = m.col_idx[p];
            if idx[j] != usize::MAX && idx[j] <= idx[i] {
                trips.push((idx[i], idx[j], m.vals[p]));
            }
        }
    }
    let mred = SparseSym::from_triplets(free.len(), &trips, true);
    let mut edot = Field::zeros(sp.clone(), alg.clone());
    for l in 0..malg {
        let b: Vec<f64> = free.iter().map(|&d| rhs[d * malg + l]).collect();
        let x = solve_spd(&mred, &b).unwrap();
        for (i, &d) in free.iter().enumerate() {
            edot.coeffs[d * malg + l] = x[i] / alg.g(l, l);
        }
    }
    // check consistency independently: least squares via dense (nalgebra)
    let ws = HybridWorkspace::new(&asm, &alg);
    let sys = ws.build_system(&asm, &a, &edot);
    let n = sys.objective.n;
    let nr = sys.constraints.n_rows;
    println!("n = {n}, rows = {nr}, delta = {:.3e}", sys.delta);
    let mut cd = nalgebra::DMatrix::<f64>::zeros(nr, n);
    for r in 0..nr {
        for p in sys.constraints.row_ptr[r]..sys.constraints.row_ptr[r + 1] {
            cd[(r, sys.constraints.col_idx[p])] += sys.constraints.vals[p];
        }
    }
    let bd = nalgebra::DVector::<f64>::from_column_slice(&sys.constraint_rhs);
    let svd = nalgebra::SVD::new(cd.clone(), true, true);
    let tol = 1e-10 * svd.singular_values[0];
    let xls = svd.solve(&bd, tol).unwrap();
    let res_ls = (&cd * &xls - &bd).norm() / bd.norm();
    println!("dense least-squares consistency residual: {res_ls:.3e}");
    // now the KKT solve path
    let kkt = build_kkt(&sys.objective, &sys.constraints, sys.delta);
    let solver = LdltSolver::new(&kkt).unwrap();
    let mut full_rhs = Vec::new();
    full_rhs.extend_from_slice(&sys.objective_rhs);
    full_rhs.extend_from_slice(&sys.constraint_rhs);
    let sol = solver.solve(&full_rhs);
    let mut kz = vec![0.0; kkt.n];
    kkt.mul_vec(&sol, &mut kz);
    let mut rnorm = 0.0f64;
    for i in 0..kkt.n { rnorm += (kz[i] - full_rhs[i]).powi(2); }
    println!("KKT solve residual: {:.3e}", rnorm.sqrt() / norm2(&full_rhs));
    let (sol2, res2) = solver.solve_refined(&kkt, &full_rhs);
    println!("KKT refined residual: {res2:.3e}");
    let cres = gaugefem::assembly::constraint_residual(&sys.constraints, &sol2[..n], &sys.constraint_rhs);
    println!("constraint residual after refined solve: {cres:.3e}");
}
