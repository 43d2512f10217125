//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `--nocapture` to see them).
//!
//! Criteria:
//!   1. mesh cardinality at n = 32
//!   2. adjoint gradient vs central finite differences
//!   3. projection vs random-sampling oracle + KKT structure
//!   4. discrete heuristic vs exact enumeration
//!   5. funnel contraction and penalty bookkeeping
//!   6. residual convergence of the n = 8 desk instance
//!   7. initial-penalty sweep bookkeeping
//!   8. logged energies match from-scratch recomputation

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use topopt::adjoint::compliance_gradient;
use topopt::admm::{initial_funnel_radius, Admm, IterationRecord};
use topopt::cont_solver::{project_box_budget, BoxBudgetSet};
use topopt::disc_solver::{
    solve_discrete_exact, solve_discrete_with_restarts, DiscreteEnergy, HeuristicParams,
};
use topopt::fem::{FemContext, SimpParams};
use topopt::field::{dist_sq, DesignField};
use topopt::mesh::{build_adjacency, build_unit_square_mesh, Mesh};
use topopt::SolverConfig;

fn assert_within(elapsed: Duration, budget: Duration, what: &str) {
    assert!(
        elapsed <= budget,
        "{what} took {elapsed:.2?}, budget {budget:.2?}"
    );
}

#[test]
fn criterion_1_mesh_cardinality() {
    let started = Instant::now();
    let mesh = build_unit_square_mesh(32).unwrap();
    assert_eq!(mesh.num_elements(), 2048);
    assert_eq!(mesh.num_nodes(), 1089);
    assert_within(started.elapsed(), Duration::from_secs(1), "criterion 1");
    println!("criterion 1 (mesh cardinality, n=32 -> 2048/1089): PASS");
}

#[test]
fn criterion_2_adjoint_gradient() {
    let started = Instant::now();
    let mesh = build_unit_square_mesh(4).unwrap();
    let ctx = FemContext {
        mesh: &mesh,
        simp: SimpParams::new(1e-3, 3.0).unwrap(),
        source: 1.0,
        tol_lin: 1e-12,
    };
    let n = mesh.num_elements();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let v = DesignField::from_vec((0..n).map(|_| rng.random_range(0.05..0.95)).collect());
        let (state, _) = ctx.solve(&v).unwrap();
        let analytic = compliance_gradient(&ctx, &v, &state).unwrap();
        for e in 0..n {
            let mut plus = v.values().to_vec();
            let mut minus = v.values().to_vec();
            plus[e] += step;
            minus[e] -= step;
            let fd = (ctx.compliance_at(&DesignField::from_vec(plus)).unwrap()
                - ctx.compliance_at(&DesignField::from_vec(minus)).unwrap())
                / (2.0 * step);
            let err = (fd - analytic[e]).abs() / analytic[e].abs().max(1.0);
            worst = worst.max(err);
            assert!(
                err <= 1e-5,
                "element {e}: fd {fd} vs analytic {} (rel err {err:.2e})",
                analytic[e]
            );
        }
    }
    assert_within(started.elapsed(), Duration::from_secs(30), "criterion 2");
    println!(
        "criterion 2 (adjoint gradient vs finite differences, worst rel err {worst:.2e}): PASS"
    );
}

#[test]
fn criterion_3_projection_oracle() {
    let started = Instant::now();
    let dim = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for instance in 0..100 {
        let budget = rng.random_range(0.5..4.5);
        let set = BoxBudgetSet::new(budget, dim).unwrap();
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..3.0)).collect();
        let proj = project_box_budget(&x, &set);
        assert!(set.contains(&proj, 1e-10));

        let d_proj = dist_sq(&proj, &x);
        let mut d_best = f64::INFINITY;
        for _ in 0..100_000 {
            let mut y: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
            let sum: f64 = y.iter().sum();
            if sum > budget {
                for t in &mut y {
                    *t *= budget / sum;
                }
            }
            d_best = d_best.min(dist_sq(&y, &x));
        }
        assert!(
            d_proj <= d_best + 1e-9,
            "instance {instance}: {d_proj} vs sampled {d_best}"
        );

        // KKT: active budget means a uniform positive shift on interior coords
        let sum: f64 = proj.iter().sum();
        if sum >= budget - 1e-7 {
            let interior: Vec<usize> = (0..dim)
                .filter(|&i| proj[i] > 1e-9 && proj[i] < 1.0 - 1e-9)
                .collect();
            if let Some(&first) = interior.first() {
                let mu = x[first] - proj[first];
                assert!(mu > 0.0, "instance {instance}: shift {mu}");
                for &i in &interior {
                    assert!((x[i] - proj[i] - mu).abs() <= 1e-8, "instance {instance}");
                }
            }
        }
    }
    assert_within(started.elapsed(), Duration::from_secs(30), "criterion 3");
    println!("criterion 3 (projection sampling oracle + KKT, 100 instances): PASS");
}

#[test]
fn criterion_4_discrete_oracle_equivalence() {
    let started = Instant::now();
    let mesh = build_unit_square_mesh(2).unwrap();
    let graph = build_adjacency(&mesh);
    let n = graph.num_elements();
    assert_eq!(n, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(4242);

    let trials = 100;
    let mut exact_hits = 0usize;
    let mut gap_sum = 0.0;
    for trial in 0..trials {
        let v_bar = DesignField::from_vec((0..n).map(|_| rng.random_range(0.0..1.0)).collect());
        let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let alpha = [0.0, 1e-3, 1e-1][rng.random_range(0..3)];
        let budget = [2.0, 4.0, 8.0][rng.random_range(0..3)];

        let energy = DiscreteEnergy::new(&v_bar, &lambda, rho, alpha, &graph).unwrap();
        let exact = solve_discrete_exact(&energy, budget).unwrap();
        let heur = solve_discrete_with_restarts(
            &energy,
            budget,
            &DesignField::zeros(n),
            9000 + trial as u64,
            &HeuristicParams::default(),
            4,
        )
        .unwrap();

        assert!(
            heur.energy >= exact.energy - 1e-9,
            "trial {trial}: heuristic {} beat the exact oracle {}",
            heur.energy,
            exact.energy
        );
        let gap = (heur.energy - exact.energy).max(0.0);
        if gap <= 1e-9 {
            exact_hits += 1;
        }
        gap_sum += gap / exact.energy.abs().max(1e-9);
    }
    let mean_gap = gap_sum / trials as f64;
    assert!(
        exact_hits * 10 >= trials * 9,
        "only {exact_hits}/{trials} exact matches"
    );
    assert!(mean_gap <= 0.05, "mean relative gap {mean_gap}");
    assert_within(started.elapsed(), Duration::from_secs(120), "criterion 4");
    println!(
        "criterion 4 (discrete heuristic vs exact oracle: {exact_hits}/{trials} exact, mean gap {mean_gap:.2e}): PASS"
    );
}

/// Funnel/penalty bookkeeping over a recorded history (criterion 5); used by
/// every integration run here.
fn check_funnel_invariants(
    history: &[IterationRecord],
    tau0: f64,
    rho0: f64,
    beta: f64,
    zeta: f64,
    c: f64,
) {
    let contraction = 1.0 - zeta * (1.0 - beta);
    let mut tau_prev = tau0;
    let mut rho_prev = rho0;
    for rec in history {
        if rec.accepted {
            assert!(
                rec.residual <= beta * tau_prev + 1e-12,
                "iteration {}: accepted residual {} above funnel {}",
                rec.j,
                rec.residual,
                beta * tau_prev
            );
            assert!(
                rec.tau <= contraction * tau_prev + 1e-12,
                "iteration {}: tau {} vs contracted {}",
                rec.j,
                rec.tau,
                contraction * tau_prev
            );
            assert_eq!(
                rec.rho, rho_prev,
                "iteration {}: rho moved on accept",
                rec.j
            );
        } else {
            assert_eq!(
                rec.tau, tau_prev,
                "iteration {}: tau moved on reject",
                rec.j
            );
            assert_eq!(rec.rho, c * rho_prev, "iteration {}: rho factor", rec.j);
        }
        tau_prev = rec.tau;
        rho_prev = rec.rho;
    }
}

fn desk_config(n: usize) -> SolverConfig {
    SolverConfig {
        n,
        alpha: 5e-5,
        rho0: 1e-2,
        gamma: 2.0,
        beta: 0.9,
        zeta: 0.5,
        c: 2.0,
        v_max: 0.4,
        delta_tol: 1e-2,
        max_outer: 200,
        ..SolverConfig::default()
    }
}

#[test]
fn criterion_5_funnel_contraction() {
    let config = desk_config(4);
    let mesh = build_unit_square_mesh(config.n).unwrap();
    let graph = build_adjacency(&mesh);
    let admm = Admm::new(&mesh, &graph, &config, config.funnel()).unwrap();
    let init = admm.initialize().unwrap();
    let run = admm.run().unwrap();
    assert!(!run.history.is_empty());
    check_funnel_invariants(
        &run.history,
        initial_funnel_radius(init.residual_sq(), config.gamma),
        config.rho0,
        config.beta,
        config.zeta,
        config.c,
    );
    println!("criterion 5 (funnel contraction / penalty bookkeeping): PASS");
}

#[test]
fn criterion_6_residual_convergence_desk() {
    let started = Instant::now();
    let config = desk_config(8);
    let mesh = build_unit_square_mesh(config.n).unwrap();
    let graph = build_adjacency(&mesh);
    let admm = Admm::new(&mesh, &graph, &config, config.funnel()).unwrap();
    let init = admm.initialize().unwrap();
    let run = admm.run().unwrap();

    assert!(
        run.converged,
        "desk instance did not converge in 200 iterations"
    );
    assert!(run.state.residual_sq() <= config.delta_tol);
    assert!(run.state.iteration <= 200);
    assert!(run.state.w.is_binary(0.0));
    assert!(run.state.w.sum() <= admm.budget() + 1e-9);
    check_funnel_invariants(
        &run.history,
        initial_funnel_radius(init.residual_sq(), config.gamma),
        config.rho0,
        config.beta,
        config.zeta,
        config.c,
    );
    assert_within(started.elapsed(), Duration::from_secs(300), "criterion 6");
    println!(
        "criterion 6 (n=8 desk run converged in {} iterations, residual {:.3e}): PASS",
        run.state.iteration,
        run.state.residual_sq()
    );
}

/// True if some material element has a full edge on the Dirichlet boundary.
fn material_touches_dirichlet(mesh: &Mesh, w: &DesignField) -> bool {
    mesh.elements.iter().enumerate().any(|(e, tri)| {
        if w[e] != 1.0 {
            return false;
        }
        (0..3).any(|k| {
            let a = mesh.nodes[tri[k]];
            let b = mesh.nodes[tri[(k + 1) % 3]];
            (a[0] == 0.0 && b[0] == 0.0) || (a[1] == 1.0 && b[1] == 1.0)
        })
    })
}

/// The full-scale reproduction at n = 32. Slow; run explicitly with
/// `cargo test -p topopt-cli --test acceptance -- --ignored`.
#[test]
#[ignore = "full-scale n=32 run, several minutes"]
fn criterion_6_full_scale_qualitative() {
    let config = desk_config(32);
    let mesh = build_unit_square_mesh(config.n).unwrap();
    let graph = build_adjacency(&mesh);
    let admm = Admm::new(&mesh, &graph, &config, config.funnel()).unwrap();
    let run = admm.run().unwrap();

    assert!(run.state.w.is_binary(0.0));
    assert!(run.state.w.sum() <= admm.budget() + 1e-9);
    assert!(
        run.state.residual_sq() <= 1.0,
        "residual {} above the sweep threshold",
        run.state.residual_sq()
    );
    assert!(
        material_touches_dirichlet(&mesh, &run.state.w),
        "no material element touches the Dirichlet boundary"
    );
    println!(
        "criterion 6 full scale (n=32: {} iterations, residual {:.3e}, converged={}): PASS",
        run.state.iteration,
        run.state.residual_sq(),
        run.converged
    );
}

#[test]
fn criterion_7_rho_sweep_bookkeeping() {
    let started = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("sweep.cfg");
    fs::write(
        &cfg_path,
        "n=8\nalpha=5e-5\ngamma=2\nbeta=0.9\nzeta=0.5\nc=2\nv_max=0.4\nmax_outer=200\nseed=1\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_topopt"))
        .arg("sweep")
        .arg(&cfg_path)
        .arg("--rho")
        .arg("1e-3,1e-2,1e-1,1")
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);

    // reconstruct the initial funnel radius of the n=8 configuration
    let config = desk_config(8);
    let mesh = build_unit_square_mesh(config.n).unwrap();
    let graph = build_adjacency(&mesh);

    for (idx, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        let rho0: f64 = fields[0].parse().unwrap();
        let failed = fields[1] == "1";
        let converged = fields[2] == "1";
        let iterations: usize = fields[3].parse().unwrap();
        let rho_ratio: f64 = fields[5].parse().unwrap();
        assert!(!failed, "row {idx} flagged as failed");
        assert!(converged, "rho0 {rho0} did not reach ||w - v||^2 <= 1");
        assert!(iterations <= 200);

        let history_text =
            fs::read_to_string(out.join(format!("rho_{idx}_{rho0:e}")).join("history.csv"))
                .unwrap();
        let history = parse_history(&history_text);
        assert_eq!(history.len(), iterations);
        let rejections = history.iter().filter(|r| !r.accepted).count();
        assert_eq!(
            rho_ratio,
            2f64.powi(rejections as i32),
            "rho0 {rho0}: ratio {rho_ratio} vs {rejections} rejections"
        );

        // criterion 5 holds on every sweep run as well
        let sweep_config = SolverConfig {
            rho0,
            delta_tol: 1.0,
            seed: 1,
            ..config.clone()
        };
        let admm = Admm::new(&mesh, &graph, &sweep_config, sweep_config.funnel()).unwrap();
        let init = admm.initialize().unwrap();
        check_funnel_invariants(
            &history,
            initial_funnel_radius(init.residual_sq(), sweep_config.gamma),
            rho0,
            sweep_config.beta,
            sweep_config.zeta,
            sweep_config.c,
        );
    }
    assert_within(started.elapsed(), Duration::from_secs(1200), "criterion 7");
    println!("criterion 7 (rho sweep over 1e-3..1, exact penalty bookkeeping): PASS");
}

/// Minimal history parser for the CSV the driver writes; Display-formatted
/// floats round-trip exactly.
fn parse_history(text: &str) -> Vec<IterationRecord> {
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            IterationRecord {
                j: f[0].parse().unwrap(),
                accepted: f[1] == "1",
                residual: f[2].parse().unwrap(),
                tau: f[3].parse().unwrap(),
                rho: f[4].parse().unwrap(),
                compliance: f[5].parse().unwrap(),
                tv_value: f[6].parse().unwrap(),
                original_objective: f[7].parse().unwrap(),
                aug_lagrangian: f[8].parse().unwrap(),
                wall_time: f[9].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn criterion_8_energy_bookkeeping() {
    let config = desk_config(8);
    let mesh = build_unit_square_mesh(config.n).unwrap();
    let graph = build_adjacency(&mesh);
    let admm = Admm::new(&mesh, &graph, &config, config.funnel()).unwrap();
    let ctx = FemContext {
        mesh: &mesh,
        simp: config.simp().unwrap(),
        source: config.source,
        tol_lin: config.tol_lin,
    };

    let mut checked = 0usize;
    let run = admm
        .run_with_observer(|state, rec| {
            // from-scratch augmented Lagrangian at the stored iterates
            let comp_v = ctx.compliance_at(&state.v).unwrap();
            let tv = graph.total_variation(&state.w);
            let lambda_term: f64 = state
                .lambda
                .iter()
                .zip(state.w.iter().zip(state.v.iter()))
                .map(|(&l, (&we, &ve))| l * (we - ve))
                .sum();
            let aug = comp_v
                + config.alpha * 2.0 * tv
                + lambda_term
                + 0.5 * rec.rho * dist_sq(&state.w, &state.v);
            assert!(
                (rec.aug_lagrangian - aug).abs() <= 1e-9 * aug.abs().max(1.0),
                "iteration {}: logged {} vs recomputed {}",
                rec.j,
                rec.aug_lagrangian,
                aug
            );
            // original objective at the binary design
            let comp_w = ctx.compliance_at(&state.w).unwrap();
            let orig = comp_w + config.alpha * 2.0 * tv;
            assert!(
                (rec.original_objective - orig).abs() <= 1e-9 * orig.abs().max(1.0),
                "iteration {}: logged {} vs recomputed {}",
                rec.j,
                rec.original_objective,
                orig
            );
            checked += 1;
        })
        .unwrap();
    assert!(run.converged);
    assert_eq!(checked, run.history.len());
    println!("criterion 8 (logged energies match recomputation, {checked} records): PASS");
}
