//! Acceptance suite: every release gate in one target, one pass/fail line
//! per criterion. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skanfem::adapt::{mark, run_adaptive, AmrConfig};
use skanfem::assembly::{nonlinear_residual, BandedSystem, Linearization, GAUSS_3};
use skanfem::kelly::estimate;
use skanfem::linsolve::solve_direct;
use skanfem::mesh::{Mesh1D, NodalField};
use skanfem::model::{bc_values, BcVariant, FlowParams};
use skanfem::oracle::{solve_shooting, solve_shooting_with_step};
use skanfem::picard::{initial_guess, picard_solve, PicardConfig};
use skanfem::postproc::wall_gradient;

const TABLE_MS: [f64; 11] = [0.0, 0.2, 0.5, 0.8, 1.0, 1.5, 3.0, 7.0, 10.0, 20.0, 100.0];
const TABLE_FPP0: [f64; 11] = [
    0.67507, 0.93478, 1.1315, 1.2261, 1.2771, 1.3756, 1.4792, 1.5722, 1.604, 1.616, 1.6566,
];

fn wedge(m: f64) -> FlowParams {
    FlowParams::from_m(m, 8.0, BcVariant::Wedge).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

fn pass(n: usize, what: &str, detail: String) {
    println!("ACCEPTANCE criterion {n} ({what}): PASS — {detail}");
}

/// Criterion 1: the published wall-gradient table, 5% relative, with the
/// documented caveat — where the published value disagrees with the strong
/// form's own solution by more than 5%, the oracle-agreement gate governs.
#[test]
fn criterion_01_table_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let m_list = TABLE_MS
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",");

    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_skanfem"))
        .args(["sweep", "--m-list", &m_list, "--out-dir", out_dir.to_str().unwrap()])
        .env("SKANFEM_THREADS", "1")
        .output()
        .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(out.status.success(), "sweep failed: {}", String::from_utf8_lossy(&out.stderr));
    assert!(elapsed < 60.0, "sweep took {elapsed:.1} s, budget is 60 s");

    let table = std::fs::read_to_string(out_dir.join("table.csv")).unwrap();
    let rows: Vec<Vec<f64>> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);

    let mut matched_paper = 0;
    let mut governed_by_oracle = 0;
    for (row, (&m, &published)) in rows.iter().zip(TABLE_MS.iter().zip(&TABLE_FPP0)) {
        let (fpp0, alpha, abs_diff) = (row[2], row[3], row[4]);
        assert_eq!(row[0], m);
        let rel_vs_paper = (fpp0 - published).abs() / published;
        if rel_vs_paper <= 0.05 {
            matched_paper += 1;
        } else {
            // documented discrepancy: the published table disagrees with the
            // strong form's own solution at small m; the oracle gate decides
            let pct = 100.0 * rel_vs_paper;
            assert!(
                alpha.is_finite() && abs_diff <= 5e-3,
                "m = {m}: {pct:.1}% off the published value and \
                 |fpp0 - alpha| = {abs_diff:.2e} fails the oracle gate too"
            );
            governed_by_oracle += 1;
            println!(
                "  note: m = {m}: published {published} vs computed {fpp0:.5} \
                 ({pct:.1}% apart); oracle alpha = {alpha:.5} agrees to {abs_diff:.1e}"
            );
        }
    }
    pass(
        1,
        "table reproduction",
        format!(
            "{matched_paper}/11 rows within 5% of the published values, \
             {governed_by_oracle} governed by the oracle gate, sweep in {elapsed:.1} s"
        ),
    );
}

/// Criterion 2: oracle agreement with defaults, |fpp0 - alpha| <= 5e-3.
#[test]
fn criterion_02_oracle_agreement() {
    let mut worst: f64 = 0.0;
    for m in [0.0, 0.2, 0.5, 1.0, 3.0, 10.0] {
        let params = wedge(m);
        let report = run_adaptive(&params, &AmrConfig::default()).unwrap();
        let shot = solve_shooting(&params, 1e-10).unwrap();
        let diff = (report.fpp0_final() - shot.alpha).abs();
        assert!(diff <= 5e-3, "m = {m}: |fpp0 - alpha| = {diff:.3e} > 5e-3");
        worst = worst.max(diff);
    }
    pass(2, "oracle agreement", format!("worst |fpp0 - alpha| = {worst:.2e} <= 5e-3"));
}

/// Criterion 3: the estimator decays strictly over the first 6 cycles and
/// the largest indicator at cycle 6 is at most 10% of its start value.
#[test]
fn criterion_03_estimator_decay() {
    let mut details = Vec::new();
    for m in [0.0, 1.0] {
        let params = wedge(m);
        let report = run_adaptive(&params, &AmrConfig::default()).unwrap();
        assert!(report.cycles.len() >= 7);
        for w in report.cycles.windows(2).take(6) {
            assert!(
                w[1].eta_global < w[0].eta_global,
                "m = {m}: eta_global rose {} -> {} at cycle {}",
                w[0].eta_global,
                w[1].eta_global,
                w[1].cycle
            );
        }
        let max0 = report.estimates[0].kelly.max_indicator();
        let max6 = report.estimates[6].kelly.max_indicator();
        assert!(
            max6 <= 0.1 * max0,
            "m = {m}: max indicator only fell {max0:.3e} -> {max6:.3e}"
        );
        details.push(format!("m={m}: cycle-6/cycle-0 max ratio {:.3}", max6 / max0));
    }
    pass(3, "estimator decay", details.join(", "));
}

/// Criterion 4: second-order L2 convergence of u on uniform meshes.
#[test]
fn criterion_04_convergence_order() {
    let params = wedge(1.0);
    let shot = solve_shooting(&params, 1e-10).unwrap();
    let mut errs = Vec::new();
    for nel in [32usize, 64, 128] {
        let mesh = Mesh1D::uniform(0.0, 8.0, nel).unwrap();
        let init = initial_guess(&mesh, &bc_values(&params));
        let (sol, rep) = picard_solve(&params, &init, &PicardConfig::default()).unwrap();
        assert!(rep.converged);
        let mut acc = 0.0;
        for e in 0..mesh.element_count() {
            let (a, b) = mesh.element(e);
            acc += GAUSS_3.integrate(a, b, |x| {
                let (_, uh) = sol.eval(x).unwrap();
                let d = uh - shot.u_at(x);
                d * d
            });
        }
        errs.push(acc.sqrt());
    }
    let r1 = (errs[0] / errs[1]).log2();
    let r2 = (errs[1] / errs[2]).log2();
    assert!(r1 >= 1.8 && r2 >= 1.8, "observed orders {r1:.2}, {r2:.2}");
    pass(4, "convergence order", format!("observed orders {r1:.2}, {r2:.2} >= 1.8"));
}

/// Criterion 5: Krylov and direct answers agree on every velocity system of
/// the criterion-2 runs; the direct solver matches dense elimination on 100
/// random diagonally dominant systems.
#[test]
fn criterion_05_solver_cross_validation() {
    // instrumented adaptive runs
    let mut worst: f64 = 0.0;
    for m in [0.0, 0.2, 0.5, 1.0, 3.0, 10.0] {
        let params = wedge(m);
        let cfg = AmrConfig {
            picard: PicardConfig {
                solver_cross_check: true,
                ..PicardConfig::default()
            },
            ..AmrConfig::default()
        };
        let report = run_adaptive(&params, &cfg).unwrap();
        let d = report.max_solver_rel_diff.expect("cross-check ran");
        assert!(d <= 1e-8, "m = {m}: Krylov vs direct disagree by {d:.3e}");
        worst = worst.max(d);
    }

    // dense-elimination oracle on random diagonally dominant systems
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let m = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= m * a[col][k];
                }
                b[row] -= m * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc -= a[i][j] * x[j];
            }
            x[i] = acc / a[i][i];
        }
        x
    }

    let mut rng = ChaCha8Rng::seed_from_u64(515);
    let mut worst_direct: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=100);
        let mut sys = BandedSystem::zeros(n);
        for i in 0..n {
            sys.rhs[i] = rng.gen_range(-1.0..1.0);
        }
        for i in 0..n - 1 {
            sys.sub[i] = rng.gen_range(-1.0..1.0);
            sys.sup[i] = rng.gen_range(-1.0..1.0);
        }
        for i in 0..n {
            let off = (if i > 0 { sys.sub[i - 1].abs() } else { 0.0 })
                + (if i + 1 < n { sys.sup[i].abs() } else { 0.0 });
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sys.main[i] = sign * (off + rng.gen_range(0.5..2.0));
        }
        let x = solve_direct(&sys).unwrap();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = sys.main[i];
            if i > 0 {
                dense[i][i - 1] = sys.sub[i - 1];
            }
            if i + 1 < n {
                dense[i][i + 1] = sys.sup[i];
            }
        }
        let y = dense_solve(dense, sys.rhs.clone());
        let scale = norm(&y).max(1e-300);
        let diff = x
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()))
            / scale;
        assert!(diff <= 1e-10, "direct vs dense differ by {diff:.3e}");
        worst_direct = worst_direct.max(diff);
    }
    pass(
        5,
        "solver cross-validation",
        format!(
            "worst Krylov-vs-direct {worst:.2e} <= 1e-8; \
             worst direct-vs-dense {worst_direct:.2e} <= 1e-10 over 100 systems"
        ),
    );
}

/// Criterion 6: converged iterates of both linearizations kill the nonlinear
/// Galerkin residual and agree with each other on a fixed mesh.
#[test]
fn criterion_06_fixed_point_consistency() {
    let mesh = Mesh1D::uniform(0.0, 8.0, 128).unwrap();
    let mut worst_res: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for m in [0.0, 1.0] {
        let params = wedge(m);
        let init = initial_guess(&mesh, &bc_values(&params));
        let mut fields = Vec::new();
        for lin in [Linearization::NewtonTerm, Linearization::PicardProduct] {
            let cfg = PicardConfig {
                linearization: lin,
                ..PicardConfig::default()
            };
            let (sol, rep) = picard_solve(&params, &init, &cfg).unwrap();
            assert!(rep.converged);
            let r = norm(&nonlinear_residual(&sol, params.beta()));
            assert!(r <= 1e-8, "m = {m}, {lin:?}: residual {r:.3e} > 1e-8");
            worst_res = worst_res.max(r);
            fields.push(sol);
        }
        let gap = fields[0]
            .u_vals()
            .iter()
            .zip(fields[1].u_vals())
            .fold(0.0f64, |acc, (&a, &b)| acc.max((a - b).abs()));
        assert!(gap <= 1e-9, "m = {m}: linearizations differ by {gap:.3e}");
        worst_gap = worst_gap.max(gap);
    }
    pass(
        6,
        "fixed-point consistency",
        format!("worst residual {worst_res:.2e} <= 1e-8, variant gap {worst_gap:.2e} <= 1e-9"),
    );
}

/// Criterion 7: estimator and marking invariants.
#[test]
fn criterion_07_estimator_invariants() {
    // zero indicators on a globally linear zero-residual field
    let params = wedge(0.0);
    let mesh = Mesh1D::uniform(0.0, 8.0, 8).unwrap();
    let flat = NodalField::new(mesh.clone(), vec![0.0; 9], vec![0.25; 9]).unwrap();
    let rep = estimate(&flat, &params, 1.0, 0.5);
    assert!(rep.indicators.iter().all(|&v| v == 0.0) && rep.global == 0.0);
    assert!(mark(&rep, 0.5).is_empty());

    // global^2 equals the sum of squares on a real solve
    let params = wedge(1.0);
    let init = initial_guess(&mesh, &bc_values(&params));
    let (sol, _) = picard_solve(&params, &init, &PicardConfig::default()).unwrap();
    let rep = estimate(&sol, &params, 1.0, 0.5);
    let sq_sum: f64 = rep.indicators.iter().map(|&v| v * v).sum();
    let rel = (rep.global * rep.global - sq_sum).abs() / sq_sum;
    assert!(rel <= 1e-12, "global^2 off by {rel:.3e} relative");

    // marked set invariant under common (power-of-two) scaling of constants
    let scaled = estimate(&sol, &params, 4.0, 2.0);
    for theta in [0.1, 0.5, 1.0] {
        assert_eq!(
            mark(&rep, theta).indices(),
            mark(&scaled, theta).indices(),
            "marked set changed under scaling at theta = {theta}"
        );
    }

    // the maximizer is always marked when the maximum is positive
    let argmax = rep
        .indicators
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert!(mark(&rep, 1.0).is_marked(argmax));

    pass(
        7,
        "estimator/marking invariants",
        format!("zero field clean, global consistent to {rel:.1e}, scaling and maximizer hold"),
    );
}

/// Criterion 8: the wall-gradient formula is exact on quadratics over
/// random nonuniform stencils.
#[test]
fn criterion_08_wall_gradient_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b, c): (f64, f64, f64) = (
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        let x1: f64 = rng.gen_range(1e-3..1.0);
        let x2: f64 = x1 + rng.gen_range(1e-3..1.0);
        let mesh = Mesh1D::from_nodes(vec![0.0, x1, x2, x2 + 1.0]).unwrap();
        let u: Vec<f64> = mesh.nodes().iter().map(|&x| a + b * x + c * x * x).collect();
        let field = NodalField::new(mesh, vec![0.0; 4], u).unwrap();
        let err = (wall_gradient(&field).unwrap() - b).abs();
        assert!(err <= 1e-12, "error {err:.3e} on quadratic stencil");
        worst = worst.max(err);
    }
    pass(8, "wall-gradient exactness", format!("worst error {worst:.2e} <= 1e-12 over 1000 trials"));
}

/// Criterion 9: oracle self-validation — step halving and domain truncation
/// leave alpha essentially unchanged.
#[test]
fn criterion_09_oracle_self_validation() {
    let mut step_worst: f64 = 0.0;
    let mut trunc_worst: f64 = 0.0;
    for beta in [0.0, 1.0] {
        let p8 = FlowParams::from_beta(beta, 8.0, BcVariant::Wedge).unwrap();
        let a = solve_shooting_with_step(&p8, 1e-10, 1e-3).unwrap().alpha;
        let b = solve_shooting_with_step(&p8, 1e-10, 5e-4).unwrap().alpha;
        assert!((a - b).abs() <= 1e-8, "beta = {beta}: step halving moved alpha {:.2e}", (a - b).abs());
        step_worst = step_worst.max((a - b).abs());

        let p12 = FlowParams::from_beta(beta, 12.0, BcVariant::Wedge).unwrap();
        let c = solve_shooting(&p12, 1e-10).unwrap().alpha;
        assert!((a - c).abs() <= 1e-5, "beta = {beta}: truncation moved alpha {:.2e}", (a - c).abs());
        trunc_worst = trunc_worst.max((a - c).abs());
    }
    pass(
        9,
        "oracle self-validation",
        format!("step halving {step_worst:.2e} <= 1e-8, truncation 8 vs 12 {trunc_worst:.2e} <= 1e-5"),
    );
}

/// Criterion 10: two identical runs produce byte-identical outputs.
#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = Command::new(env!("CARGO_BIN_EXE_skanfem"))
            .args(["solve", "--m", "1", "--out-dir", out_dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort_by(|a, b| a.0.cmp(&b.0));
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), outputs[1].len());
    let mut compared = 0;
    for (a, b) in outputs[0].iter().zip(&outputs[1]) {
        assert_eq!(a.0, b.0);
        assert!(a.1 == b.1, "{} differs between identical runs", a.0);
        compared += 1;
    }
    assert!(compared >= 22, "expected summary + profile + 20 indicator files, saw {compared}");
    pass(10, "determinism", format!("{compared} files byte-identical across two runs"));
}
