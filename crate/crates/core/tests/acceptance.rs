//! Acceptance suite: one test per criterion, each printing a PASS line on
//! success (run with `--nocapture` to see them) and panicking with a FAIL
//! line otherwise.
//!
//! Criteria 7 (work-per-digit ordering) and 9 (worst-case WAP constant
//! ordering) assert orderings that the shipped upwind finite-difference
//! discretizations do not reproduce: compact 5-point stencils make the plain
//! local-ideal-restriction solver nearly exact, so it undercuts the
//! constrained variant on work-per-digit and already sits on the
//! approximation-constant floor. The assertions are kept as stated rather
//! than weakened; their failure output carries the measured numbers.

use airamg::analysis::{
    approximation_report_with, build_spd_surrogate, fap_constant, SymPowers, WAP_SAP_PAIRS,
};
use airamg::hierarchy::{setup, Hierarchy, SolverConfig};
use airamg::krylov::{
    gmres, pcg, ConvergenceReport, IdentityPreconditioner, KrylovConfig, KrylovMethod,
};
use airamg::linalg::{lu_solve, min_norm_ls, sym_eig, DenseMatrix};
use airamg::partition::{classical_strength, CfSplitting, Label};
use airamg::problems;
use airamg::relaxation::{jacobi_sweep, SweepScope};
use airamg::rng::Lcg64;
use airamg::sparse::{triple_product, SparseMatrix};
use airamg::transfer::{
    base_pattern, build_sparsity_pattern, clair_transfer, full_lair_patterns, lair_restriction,
    CoarsenType, ConstraintMode, InverseType, TransferConfig,
};

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

fn random_splitting(rng: &mut Lcg64, n: usize) -> CfSplitting {
    loop {
        let labels: Vec<Label> = (0..n)
            .map(|_| {
                if rng.next_f64() < 0.4 {
                    Label::C
                } else {
                    Label::F
                }
            })
            .collect();
        let c = labels.iter().filter(|&&l| l == Label::C).count();
        if c > 0 && c < n {
            return CfSplitting::from_labels(labels, None);
        }
    }
}

fn random_spd(rng: &mut Lcg64, n: usize) -> SparseMatrix {
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = rng.next_symmetric();
        }
    }
    let mut spd = d.matmul(&d.transpose());
    for i in 0..n {
        spd[(i, i)] += n as f64;
    }
    SparseMatrix::from_dense(&spd)
}

fn random_lower_triangular(rng: &mut Lcg64, n: usize) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0 + rng.next_f64()));
        for j in 0..i {
            if rng.next_f64() < 0.3 {
                t.push((i, j, rng.next_symmetric()));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

fn random_nonsingular(rng: &mut Lcg64, n: usize) -> SparseMatrix {
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = rng.next_symmetric();
        }
        d[(i, i)] += 2.0 * n as f64; // diagonally dominant, hence nonsingular
    }
    SparseMatrix::from_dense(&d)
}

/// Dense Schur complement oracle S = A_cc - A_cf A_ff^{-1} A_fc.
fn schur_dense(a: &SparseMatrix, split: &CfSplitting) -> DenseMatrix {
    let c = split.c_points();
    let f = split.f_points();
    let aff = a.extract_submatrix(&f, &f).unwrap();
    let afc = a.extract_submatrix(&f, &c).unwrap();
    let acf = a.extract_submatrix(&c, &f).unwrap();
    let acc = a.extract_submatrix(&c, &c).unwrap();
    let x = lu_solve(&aff, &afc).unwrap();
    acc.sub(&acf.matmul(&x))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn solve_prescaled(
    a0: &SparseMatrix,
    cfg: &SolverConfig,
    method: KrylovMethod,
    seed: u64,
) -> (Hierarchy, ConvergenceReport) {
    let h = setup(a0, cfg).unwrap();
    let a = match cfg.prescale_block {
        Some(bs) => problems::block_diag_prescale(a0, bs).unwrap(),
        None => a0.clone(),
    };
    let n = a.n_rows();
    let mut rng = Lcg64::new(seed);
    let x0: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let kc = KrylovConfig {
        method,
        rel_tol: 1e-8,
        abs_tol: 0.0,
        max_iters: 100,
        restart: 100,
    };
    let b = vec![0.0; n];
    let (_, mut rep) = match method {
        KrylovMethod::Cg => pcg(&a, &b, &x0, &h, &kc).unwrap(),
        KrylovMethod::Gmres => gmres(&a, &b, &x0, &h, &kc).unwrap(),
    };
    rep.set_complexity(h.operator_complexity());
    (h, rep)
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_ideal_operator_oracle() {
    let start = std::time::Instant::now();
    let mut rng = Lcg64::new(101);
    let mut checked = 0;
    for case in 0..30 {
        let n = 20 + (rng.next_u64() % 181) as usize; // up to 200
        let a = match case % 3 {
            0 => random_spd(&mut rng, n),
            1 => random_lower_triangular(&mut rng, n),
            _ => random_nonsingular(&mut rng, n),
        };
        let split = random_splitting(&mut rng, n);
        let patterns = full_lair_patterns(&split);
        let (r, _) = lair_restriction(&a, &split, &patterns).unwrap();
        let (pt, _) = lair_restriction(&a.transpose(), &split, &patterns).unwrap();
        let p = pt.matrix.transpose();
        let rap = triple_product(&r.matrix, &a, &p).unwrap().to_dense();
        let oracle = schur_dense(&a, &split);
        let err = rap.sub(&oracle).frobenius_norm() / oracle.frobenius_norm();
        assert!(
            err <= 1e-9,
            "[FAIL] criterion 1: case {case} (n={n}) relative error {err:.3e} > 1e-9"
        );
        checked += 1;
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "[FAIL] criterion 1: runtime {dt:.1}s >= 10s");
    println!("[PASS] criterion 1: ideal-operator oracle on {checked} matrices, {dt:.1}s");
}

#[test]
fn criterion_02_constraint_free_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = Lcg64::new(202);
    for case in 0..40 {
        let n = 15 + (rng.next_u64() % 86) as usize; // up to 100
        let a = if case % 2 == 0 {
            random_spd(&mut rng, n)
        } else {
            random_lower_triangular(&mut rng, n)
        };
        let split = random_splitting(&mut rng, n);
        let theta = 0.05 + 0.3 * rng.next_f64();
        let s = classical_strength(&a, theta);
        let cfg = TransferConfig {
            coarsen_type: CoarsenType::Fc,
            sparsity_degree: 2,
            interp_strength_theta: theta,
            constraints: ConstraintMode::None,
            constraint_smoothing_steps: 0,
            inverse_type: InverseType::ExactLu,
            outer_iterations: 1,
            build_r_from: airamg::transfer::RestrictionSource::TransposeOfA,
        };
        let (p, _) = clair_transfer(&a, &s, &split, &cfg, None).unwrap();
        // Direct local solves on identical patterns via the transposed route.
        let t_base = base_pattern(&s, &split, CoarsenType::Fc, None).unwrap();
        let pattern = build_sparsity_pattern(&s, &t_base, 2, &split).unwrap();
        let pat_t = pattern.transpose();
        let patterns: Vec<Vec<usize>> = (0..split.c_count())
            .map(|j| pat_t.row(j).0.to_vec())
            .collect();
        let (rt, _) = lair_restriction(&a.transpose(), &split, &patterns).unwrap();
        let direct = rt.matrix.transpose();
        for i in 0..n {
            let (cols, vals) = p.matrix.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let d = direct.get(i, c);
                assert!(
                    (v - d).abs() <= 1e-10,
                    "[FAIL] criterion 2: case {case} entry ({i},{c}): {v:.12e} vs {d:.12e}"
                );
            }
            let (dcols, dvals) = direct.row(i);
            for (&c, &v) in dcols.iter().zip(dvals) {
                assert!(
                    (p.matrix.get(i, c) - v).abs() <= 1e-10,
                    "[FAIL] criterion 2: case {case} missing entry ({i},{c})"
                );
            }
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "[FAIL] criterion 2: runtime {dt:.1}s >= 10s");
    println!("[PASS] criterion 2: constraint-free builder equals direct local solves, {dt:.1}s");
}

#[test]
fn criterion_03_mode_constraints_every_level() {
    let problems_list: Vec<(&str, SparseMatrix, SolverConfig)> = vec![
        (
            "poisson 2d",
            problems::poisson_2d(24, 24, true).unwrap(),
            SolverConfig::clair_symmetric(),
        ),
        (
            "poisson 3d",
            problems::poisson_3d(8, 8, 8, true).unwrap(),
            SolverConfig::clair_symmetric(),
        ),
        (
            "grid-aligned anisotropy",
            problems::aniso_q1_2d(20, 20, 1e-3, 0.0).unwrap(),
            SolverConfig::clair_symmetric(),
        ),
        (
            "box-in-box jump",
            problems::jump_coefficient_2d(24, 24, &problems::JumpGeometry::box_in_box(1e4))
                .unwrap(),
            SolverConfig::clair_symmetric(),
        ),
        (
            "advection-diffusion alpha=10",
            problems::advdiff_upwind_2d(24, 24, 10.0, &problems::constant_advection()).unwrap(),
            SolverConfig::clair_nonsymmetric(),
        ),
        (
            "advection-diffusion alpha=10 fc",
            problems::advdiff_upwind_2d(24, 24, 10.0, &problems::constant_advection()).unwrap(),
            SolverConfig::clair_high_complexity(),
        ),
    ];
    for (tag, a, cfg) in problems_list {
        let h = setup(&a, &cfg).unwrap();
        let mut levels_checked = 0;
        for (k, lvl) in h.levels.iter().enumerate() {
            let b = lvl
                .constraints
                .as_ref()
                .unwrap_or_else(|| panic!("[FAIL] criterion 3: {tag} level {k} lost constraints"));
            for j in 0..b.n_cols() {
                let bc: Vec<f64> = lvl
                    .splitting
                    .c_points()
                    .iter()
                    .map(|&c| b[(c, j)])
                    .collect();
                let pbc = lvl.p.matrix.spmv(&bc).unwrap();
                let mut err = 0.0f64;
                for i in 0..pbc.len() {
                    err = err.max((pbc[i] - b[(i, j)]).abs());
                }
                assert!(
                    err <= 1e-10,
                    "[FAIL] criterion 3: {tag} level {k} violation {err:.3e} > 1e-10"
                );
            }
            levels_checked += 1;
        }
        assert!(
            levels_checked > 0,
            "[FAIL] criterion 3: {tag} built no levels"
        );
    }
    println!("[PASS] criterion 3: P B_c = B within 1e-10 on every level of every hierarchy");
}

#[test]
fn criterion_04_poisson_scalability() {
    let start = std::time::Instant::now();
    let mut iters = Vec::new();
    let mut oc_largest = 0.0;
    for &g in &[32usize, 64, 128, 256] {
        let a = problems::poisson_2d(g, g, true).unwrap();
        let (h, rep) =
            solve_prescaled(&a, &SolverConfig::clair_symmetric(), KrylovMethod::Cg, 1234);
        assert!(
            rep.converged,
            "[FAIL] criterion 4: {g}x{g} did not converge in 100 iterations"
        );
        iters.push(rep.iterations);
        oc_largest = h.operator_complexity();
    }
    let dt = start.elapsed().as_secs_f64();
    let (lo, hi) = (*iters.iter().min().unwrap(), *iters.iter().max().unwrap());
    assert!(
        hi - lo <= 4,
        "[FAIL] criterion 4: iteration spread {iters:?} exceeds 4"
    );
    assert!(
        (1.2..=1.6).contains(&oc_largest),
        "[FAIL] criterion 4: OC {oc_largest:.3} outside [1.2, 1.6] at 256^2"
    );
    assert!(dt < 300.0, "[FAIL] criterion 4: runtime {dt:.0}s >= 5 min");
    println!(
        "[PASS] criterion 4: iterations {iters:?} (spread {}), OC {oc_largest:.3} at 256^2, {dt:.0}s",
        hi - lo
    );
}

#[test]
fn criterion_05_lair_complexity_contrast() {
    let a = problems::poisson_2d(256, 256, true).unwrap();
    let mut lair_cfg = SolverConfig::lair_default();
    lair_cfg.restriction_degree = 1;
    let h_lair = setup(&a, &lair_cfg).unwrap();
    let oc_lair = h_lair.operator_complexity();
    let h_clair = setup(&a, &SolverConfig::clair_symmetric()).unwrap();
    let oc_clair = h_clair.operator_complexity();
    assert!(
        (1.8..=2.6).contains(&oc_lair),
        "[FAIL] criterion 5: lAIR OC {oc_lair:.3} outside [1.8, 2.6]"
    );
    assert!(
        oc_lair > oc_clair,
        "[FAIL] criterion 5: lAIR OC {oc_lair:.3} not above constrained OC {oc_clair:.3}"
    );
    println!("[PASS] criterion 5: lAIR OC {oc_lair:.3} vs constrained OC {oc_clair:.3} at 256^2");
}

#[test]
fn criterion_06_advection_convergence() {
    let field = problems::constant_advection();
    // Pure advection, grids up to 128^2: lAIR and the high-complexity
    // constrained variant must stay at or under 25 GMRES iterations, flat.
    for (tag, cfg) in [
        ("lair", SolverConfig::lair_nonsymmetric()),
        ("clair-hc", SolverConfig::clair_high_complexity()),
    ] {
        let mut iters = Vec::new();
        for &g in &[32usize, 64, 128] {
            let a = problems::advdiff_upwind_2d(g, g, 0.0, &field).unwrap();
            let (_, rep) = solve_prescaled(&a, &cfg, KrylovMethod::Gmres, 1234);
            assert!(
                rep.converged && rep.iterations <= 25,
                "[FAIL] criterion 6: {tag} alpha=0 {g}x{g}: iters {} conv {}",
                rep.iterations,
                rep.converged
            );
            iters.push(rep.iterations);
        }
        let spread = iters.iter().max().unwrap() - iters.iter().min().unwrap();
        assert!(
            spread <= 4,
            "[FAIL] criterion 6: {tag} alpha=0 iterations {iters:?} not flat within +4"
        );
        println!("[PASS] criterion 6a: {tag} alpha=0 iterations {iters:?}");
    }
    // Diffusion-dominated alpha=10: every configuration converges fast.
    for (tag, cfg) in [
        ("clair-agg", SolverConfig::clair_nonsymmetric()),
        ("clair-hc", SolverConfig::clair_high_complexity()),
        ("lair", SolverConfig::lair_nonsymmetric()),
    ] {
        let a = problems::advdiff_upwind_2d(64, 64, 10.0, &field).unwrap();
        let (_, rep) = solve_prescaled(&a, &cfg, KrylovMethod::Gmres, 1234);
        assert!(
            rep.converged && rep.iterations <= 25,
            "[FAIL] criterion 6: {tag} alpha=10: iters {} conv {}",
            rep.iterations,
            rep.converged
        );
        println!(
            "[PASS] criterion 6b: {tag} alpha=10 iterations {}",
            rep.iterations
        );
    }
    println!("[PASS] criterion 6: advection convergence and flatness");
}

#[test]
fn criterion_07_alpha_robustness_ordering() {
    let field = problems::constant_advection();
    let g = 64usize;
    let mut rows = Vec::new();
    for &alpha in &[10.0, 1.0, 0.1, 0.01] {
        let a = problems::advdiff_upwind_2d(g, g, alpha, &field).unwrap();
        let (_, rep_clair) = solve_prescaled(
            &a,
            &SolverConfig::clair_nonsymmetric(),
            KrylovMethod::Gmres,
            1234,
        );
        let (_, rep_lair) = solve_prescaled(
            &a,
            &SolverConfig::lair_nonsymmetric(),
            KrylovMethod::Gmres,
            1234,
        );
        rows.push((alpha, rep_clair, rep_lair));
    }
    // OC clause first: at alpha = 10 the aggregation-coarsened hierarchy must
    // be at most 0.7x the lAIR complexity.
    let (_, c10, l10) = &rows[0];
    assert!(
        c10.oc <= 0.7 * l10.oc,
        "[FAIL] criterion 7: OC ratio {:.3}/{:.3} = {:.2} > 0.7 at alpha=10",
        c10.oc,
        l10.oc,
        c10.oc / l10.oc
    );
    println!(
        "[PASS] criterion 7 (OC clause): {:.3} <= 0.7 * {:.3} at alpha=10",
        c10.oc, l10.oc
    );
    // Work-per-digit clause, asserted as stated. On this compact upwind
    // finite-difference discretization the plain local solves are nearly
    // exact, which makes this ordering fail; see the failure message for the
    // measured values.
    for (alpha, c, l) in &rows[..2] {
        assert!(
            c.work_per_digit <= l.work_per_digit,
            "[FAIL] criterion 7 (wpd clause): alpha={alpha}: constrained wpd {:.2} \
             (gamma {:.4}, OC {:.3}) > lair wpd {:.2} (gamma {:.4}, OC {:.3}); the \
             finite-difference substitute makes the plain local-ideal solver \
             near-exact at this scale, inverting the ordering",
            c.work_per_digit,
            c.gamma,
            c.oc,
            l.work_per_digit,
            l.gamma,
            l.oc
        );
    }
    println!("[PASS] criterion 7: wpd ordering and OC ratio");
}

#[test]
fn criterion_08_approximation_property_oracle() {
    let mut rng = Lcg64::new(808);
    // (a) brute-force minimization oracle at n <= 64.
    for &n in &[8usize, 32, 64] {
        let n_c = (n / 2).max(2);
        let mut t = DenseMatrix::zeros(n, n_c);
        for i in 0..n {
            for j in 0..n_c {
                t[(i, j)] = rng.next_symmetric();
            }
        }
        let m = {
            let g = random_spd(&mut rng, n).to_dense();
            g
        };
        let powers = SymPowers::new(&m).unwrap();
        for &(beta, eta) in &WAP_SAP_PAIRS {
            let v: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
            let k = fap_constant(&t, &m, beta, eta, &v).unwrap();
            let m_eta_half = powers.power(eta / 2.0);
            let weighted_t = m_eta_half.matmul(&t);
            let weighted_v = m_eta_half.matvec(&v);
            let vc = min_norm_ls(&weighted_t, &weighted_v);
            let tv = t.matvec(&vc);
            let resid: Vec<f64> = v.iter().zip(&tv).map(|(a, b)| a - b).collect();
            let m_eta = powers.power(eta);
            let m_2b = powers.power(2.0 * beta);
            let num: f64 = {
                let w = m_eta.matvec(&resid);
                resid.iter().zip(&w).map(|(a, b)| a * b).sum()
            };
            let den: f64 = {
                let w = m_2b.matvec(&v);
                v.iter().zip(&w).map(|(a, b)| a * b).sum()
            };
            let oracle = powers.norm().powf(2.0 * beta - eta) * num / den;
            let rel = (k - oracle).abs() / oracle.max(1e-300);
            assert!(
                rel <= 1e-8,
                "[FAIL] criterion 8: n={n} beta={beta} eta={eta}: relative gap {rel:.3e}"
            );
        }
    }
    // (b) projector identities.
    {
        let n = 24;
        let n_c = 10;
        let mut t = DenseMatrix::zeros(n, n_c);
        for i in 0..n {
            for j in 0..n_c {
                t[(i, j)] = rng.next_symmetric();
            }
        }
        let m = random_spd(&mut rng, n).to_dense();
        let powers = SymPowers::new(&m).unwrap();
        for eta in [0.0, 1.0] {
            let m_eta = powers.power(eta);
            // Rebuild the projector exactly as the library does.
            let gram = t.transpose().matmul(&m_eta).matmul(&t);
            let rhs = t.transpose().matmul(&m_eta);
            let solved = lu_solve(&gram, &rhs).unwrap();
            let pi = t.matmul(&solved);
            let idem = pi.matmul(&pi).sub(&pi).frobenius_norm();
            assert!(
                idem <= 1e-9,
                "[FAIL] criterion 8: projector not idempotent ({idem:.3e}) at eta={eta}"
            );
            let adj = m_eta
                .matmul(&pi)
                .sub(&pi.transpose().matmul(&m_eta))
                .frobenius_norm();
            assert!(
                adj <= 1e-9,
                "[FAIL] criterion 8: projector not self-adjoint ({adj:.3e}) at eta={eta}"
            );
        }
    }
    // (c) SPD input yields Q = I, i.e. both surrogates equal A.
    {
        let a = problems::poisson_2d(5, 5, true).unwrap();
        let s = build_spd_surrogate(&a).unwrap();
        let ad = a.to_dense();
        let scale = ad.max_abs();
        assert!(
            s.qa.sub(&ad).max_abs() <= 1e-10 * scale,
            "[FAIL] criterion 8: SPD surrogate differs from A"
        );
        assert!(
            s.aq.sub(&ad).max_abs() <= 1e-10 * scale,
            "[FAIL] criterion 8: SPD surrogate differs from A"
        );
    }
    println!("[PASS] criterion 8: approximation-property oracle, projector identities, SPD case");
}

#[test]
fn criterion_09_wap_constant_ordering() {
    let start = std::time::Instant::now();
    let field = problems::constant_advection();
    // 32x32 grid including boundary: 30x30 = 900 interior unknowns.
    let a0 = problems::advdiff_upwind_2d(30, 30, 10.0, &field).unwrap();
    let a = problems::block_diag_prescale(&a0, 1).unwrap();

    let h_clair = setup(&a0, &SolverConfig::clair_nonsymmetric()).unwrap();
    let h_hc = setup(&a0, &SolverConfig::clair_high_complexity()).unwrap();
    let h_lair = setup(&a0, &SolverConfig::lair_nonsymmetric()).unwrap();

    let surrogate = build_spd_surrogate(&a).unwrap();
    let wap = [(0.5, 0.0)];
    let k_clair =
        approximation_report_with(&surrogate, &h_clair.levels[0].r.matrix, &wap).unwrap()[0].k_max;
    let k_hc =
        approximation_report_with(&surrogate, &h_hc.levels[0].r.matrix, &wap).unwrap()[0].k_max;
    let k_lair =
        approximation_report_with(&surrogate, &h_lair.levels[0].r.matrix, &wap).unwrap()[0].k_max;
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 120.0, "[FAIL] criterion 9: runtime {dt:.0}s >= 2 min");
    // Strict ordering as stated. On the finite-difference substitute the
    // plain solver's restriction already sits at the achievable constant for
    // this coarsening (~2), so the strict inequality fails; the matched
    // first-pass variant ties it to four decimals.
    assert!(
        k_clair < k_lair,
        "[FAIL] criterion 9: K_max(WAP) constrained {k_clair:.4e} !< plain {k_lair:.4e} \
         (matched-coarsening variant {k_hc:.4e}); the substituted discretization \
         leaves the plain restriction at the constant's floor"
    );
    println!("[PASS] criterion 9: K_max(WAP) {k_clair:.3e} < {k_lair:.3e} ({dt:.0}s)");
}

#[test]
fn criterion_10_solver_component_oracles() {
    let mut rng = Lcg64::new(1010);
    // (a) Krylov solvers against dense direct solves, n <= 50.
    for &n in &[10usize, 30, 50] {
        let spd = random_spd(&mut rng, n);
        let b: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let kc = KrylovConfig {
            method: KrylovMethod::Cg,
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_iters: 10 * n,
            restart: 10 * n,
        };
        let (x, rep) = pcg(&spd, &b, &vec![0.0; n], &IdentityPreconditioner, &kc).unwrap();
        assert!(rep.converged);
        let direct = lu_solve(&spd.to_dense(), &DenseMatrix::from_column(&b)).unwrap();
        let err = (0..n)
            .map(|i| (x[i] - direct[(i, 0)]).abs())
            .fold(0.0f64, f64::max)
            / direct.column(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            err <= 1e-10,
            "[FAIL] criterion 10: CG vs direct solve error {err:.3e} at n={n}"
        );

        let gen = random_nonsingular(&mut rng, n);
        let kc = KrylovConfig {
            method: KrylovMethod::Gmres,
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_iters: 10 * n,
            restart: 10 * n,
        };
        let (x, rep) = gmres(&gen, &b, &vec![0.0; n], &IdentityPreconditioner, &kc).unwrap();
        assert!(rep.converged);
        let direct = lu_solve(&gen.to_dense(), &DenseMatrix::from_column(&b)).unwrap();
        let err = (0..n)
            .map(|i| (x[i] - direct[(i, 0)]).abs())
            .fold(0.0f64, f64::max)
            / direct.column(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            err <= 1e-10,
            "[FAIL] criterion 10: GMRES vs direct solve error {err:.3e} at n={n}"
        );
    }
    // (b) V-cycle linearity in b at 1e-12.
    {
        let a = problems::poisson_2d(16, 16, true).unwrap();
        let n = a.n_rows();
        let h = setup(&a, &SolverConfig::clair_symmetric()).unwrap();
        let b1: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let b2: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let (al, be) = (0.37, -2.11);
        let combo: Vec<f64> = b1.iter().zip(&b2).map(|(x, y)| al * x + be * y).collect();
        let zero = vec![0.0; n];
        let v1 = h.vcycle(&b1, &zero).unwrap();
        let v2 = h.vcycle(&b2, &zero).unwrap();
        let vc = h.vcycle(&combo, &zero).unwrap();
        let scale = vc.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n {
            let gap = (vc[i] - al * v1[i] - be * v2[i]).abs();
            assert!(
                gap <= 1e-12 * scale,
                "[FAIL] criterion 10: V-cycle nonlinearity {gap:.3e} at entry {i}"
            );
        }
    }
    // (c) Subset sweeps leave out-of-subset entries bit-identical.
    {
        let a = problems::poisson_2d(8, 8, true).unwrap();
        let n = a.n_rows();
        let labels: Vec<Label> = (0..n)
            .map(|i| if i % 3 == 0 { Label::C } else { Label::F })
            .collect();
        let split = CfSplitting::from_labels(labels, None);
        let x0: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.next_symmetric()).collect();
        let xc = jacobi_sweep(&a, &x0, &b, 0.8, SweepScope::CPoints, Some(&split)).unwrap();
        let xf = jacobi_sweep(&a, &x0, &b, 0.8, SweepScope::FPoints, Some(&split)).unwrap();
        for i in 0..n {
            if split.is_c(i) {
                assert!(
                    xf[i].to_bits() == x0[i].to_bits(),
                    "[FAIL] criterion 10: F sweep touched C entry {i}"
                );
            } else {
                assert!(
                    xc[i].to_bits() == x0[i].to_bits(),
                    "[FAIL] criterion 10: C sweep touched F entry {i}"
                );
            }
        }
    }
    println!("[PASS] criterion 10: Krylov oracles, V-cycle linearity, subset sweep identity");
}

#[test]
fn norm2_helper_is_consistent() {
    assert!((norm2(&[3.0, 4.0]) - 5.0).abs() <= 1e-15);
}
