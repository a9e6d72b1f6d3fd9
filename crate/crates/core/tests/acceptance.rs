//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every tolerance used below is pinned as a constant.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use morphoporo_core::assembly::{
    assemble_divergence, assemble_elastic, assemble_laplace, assemble_loads, assemble_mass,
    assemble_strain_coupling, assemble_strain_nonlinear, assemble_viscous, recover_nodal_gradients,
};
use morphoporo_core::diagnostics::{
    is_strictly_decreasing, oscillation_indicator, symmetry_norm_full, tv_sweep,
};
use morphoporo_core::io::DEFAULT_BETA_LIST;
use morphoporo_core::monotonicity::{
    approx_p_inverse, approx_schur_matrix, beta_star, critical_h, is_m_matrix,
};
use morphoporo_core::stability::{
    consistency_check, continuous_mode, semidiscrete_symbol, STABILITY_TOL,
};
use morphoporo_core::tensor::{skw, tensor_dot};
use morphoporo_core::{
    Error, FullStrainField, GridField, Mesh, ModelParams, Scenario, Sources, State, Tensor2,
    TimeStepper,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const H_CRIT_TARGET: f64 = 0.00283;
const H_CRIT_TOL: f64 = 1e-4;
const BETA_STAR_RANGE: (f64, f64) = (6.1e-4, 6.3e-4);
// criterion 2
const SMOOTH_MAX: f64 = 0.05;
const OSCILLATING_MIN: f64 = 0.25;
// criterion 3
const TV_RATIO_RANGE: (f64, f64) = (2.3, 4.5);
const TABLE_TV: [f64; 6] = [23.6096, 12.1596, 8.3987, 7.5860, 7.2501, 6.9645];
const TABLE_REL_BAND: f64 = 0.15;
// criterion 4
const M_MATRIX_TRIPLES: usize = 50;
const SCHUR_ROWS: usize = 32;
// criterion 5
const P_INV_SLOPE_RANGE: (f64, f64) = (1.2, 2.2);
// criterion 6
const STABILITY_DRAWS: usize = 1000;
const STABILITY_GRID: usize = 20;
// criterion 7
const CONSISTENCY_MAX_GAP: f64 = 1e-5;
const CONSISTENCY_SLOPE_RANGE: (f64, f64) = (1.99, 2.01);
// criterion 8
const EQUILIBRIUM_TOL: f64 = 1e-13;
const SYMMETRY_TOL: f64 = 1e-10;
const SKEW_IDENTITY_REL_TOL: f64 = 1e-12;
// criterion 9
const OPERATOR_REL_TOL: f64 = 1e-12;
const FIXED_POINT_REL_TOL: f64 = 1e-10;

type Outcome = Result<(bool, String), Error>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario_step(kappa: f64, n: usize, beta: f64) -> Result<State, Error> {
    let params = ModelParams::default().with_kappa(kappa).with_beta(beta);
    let stepper = TimeStepper::new(params, &Scenario::PaperBodyForce)?;
    let mesh = Mesh::unit_square(n)?;
    Ok(stepper.step(&State::at_rest(mesh, params.p0))?.0)
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn in_range(v: f64, r: (f64, f64)) -> bool {
    v >= r.0 && v <= r.1
}

fn thresholds() -> Outcome {
    let p = ModelParams::default().with_kappa(1e-6);
    let hc = critical_h(&p);
    let bs = beta_star(2f64.sqrt() / 20.0, &p);
    let ok = (hc - H_CRIT_TARGET).abs() <= H_CRIT_TOL && in_range(bs, BETA_STAR_RANGE);
    Ok((ok, format!("h_critical = {hc:.5}, beta_star = {bs:.4e}")))
}

fn oscillation_dichotomy() -> Outcome {
    let ind = |kappa, n, beta| -> Result<f64, Error> {
        Ok(oscillation_indicator(&GridField::pressure(
            &scenario_step(kappa, n, beta)?,
        )?))
    };
    let smooth = ind(1e-2, 10, 0.0)?;
    let rough = ind(1e-6, 20, 0.0)?;
    let stabilized = ind(1e-6, 20, 6.25e-4)?;
    let ok = smooth < SMOOTH_MAX && rough > OSCILLATING_MIN && stabilized < SMOOTH_MAX;
    Ok((
        ok,
        format!("indicator kappa=1e-2: {smooth:.4}, kappa=1e-6: {rough:.4}, kappa=1e-6 beta=6.25e-4: {stabilized:.4}"),
    ))
}

fn table_shape() -> Outcome {
    let mesh = Mesh::unit_square(20)?;
    let base = ModelParams::default().with_kappa(1e-6);
    let rows = tv_sweep(&base, &DEFAULT_BETA_LIST, &mesh, &Scenario::PaperBodyForce)?;
    let ratio = rows[0].tv / rows[rows.len() - 1].tv;
    let decreasing = is_strictly_decreasing(&rows);
    let tvs: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.tv)).collect();
    let within: Vec<bool> = rows
        .iter()
        .zip(TABLE_TV)
        .map(|(r, t)| ((r.tv - t) / t).abs() <= TABLE_REL_BAND)
        .collect();
    let band = if within.iter().all(|&b| b) {
        "all within 15% of the table".to_string()
    } else {
        format!(
            "{} of 6 within 15% of the table",
            within.iter().filter(|&&b| b).count()
        )
    };
    Ok((
        decreasing && in_range(ratio, TV_RATIO_RANGE),
        format!(
            "TV = [{}], strictly decreasing: {decreasing}, ratio = {ratio:.3} (need [{}, {}]); {band}",
            tvs.join(", "),
            TV_RATIO_RANGE.0,
            TV_RATIO_RANGE.1
        ),
    ))
}

fn m_matrix_predicates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    for k in 0..M_MATRIX_TRIPLES {
        let mu_vis = log_uniform(&mut rng, 0.1, 10.0);
        let kappa = log_uniform(&mut rng, 1e-7, 1e-1);
        let p = ModelParams {
            mu1: mu_vis / 2.0,
            mu2: mu_vis / 2.0,
            kappa,
            ..ModelParams::default()
        };
        let hc = critical_h(&p);
        let h_ok = hc * rng.random_range(0.01..1.0);
        if !is_m_matrix(&approx_schur_matrix(SCHUR_ROWS, h_ok, &p)) {
            failures.push(format!("#{k}: h <= h_c not M"));
        }
        let h_bad = hc * rng.random_range(10.0..100.0);
        if is_m_matrix(&approx_schur_matrix(SCHUR_ROWS, h_bad, &p)) {
            failures.push(format!("#{k}: h >= 10 h_c still M"));
        }
        let bs = beta_star(h_bad, &p);
        if !is_m_matrix(&approx_schur_matrix(SCHUR_ROWS, h_bad, &p.with_beta(bs))) {
            failures.push(format!("#{k}: beta = beta* not M"));
        }
        if is_m_matrix(&approx_schur_matrix(
            SCHUR_ROWS,
            h_bad,
            &p.with_beta(bs / 10.0),
        )) {
            failures.push(format!("#{k}: beta = beta*/10 still M"));
        }
    }
    Ok((
        failures.is_empty(),
        format!(
            "{M_MATRIX_TRIPLES} triples, {} failures {:?}",
            failures.len(),
            failures
        ),
    ))
}

fn p_inverse_order() -> Outcome {
    let p = ModelParams::default();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for n in [16usize, 32, 64, 128] {
        let mesh = Mesh::interval(n)?;
        let approx = approx_p_inverse(&mesh, &p)?;
        // exact inverse from an independent dense factorisation
        let full = assemble_mass(&mesh, 1)
            .scaled(p.rho)
            .add_scaled(&assemble_laplace(&mesh), p.dt * p.mu_vis())
            .to_dense();
        let pm = DMatrix::from_fn(n, n, |i, j| full[i][j]);
        let exact = pm.try_inverse().expect("P is invertible");
        let err = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (exact[(i, j)] - approx[i][j]).abs())
            .fold(0.0, f64::max);
        hs.push(1.0 / n as f64);
        errs.push(err);
    }
    let slope = fit_slope(&hs, &errs);
    let errs_s: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    Ok((
        in_range(slope, P_INV_SLOPE_RANGE),
        format!("errors [{}], slope = {slope:.3}", errs_s.join(", ")),
    ))
}

fn linear_stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut unstable = 0usize;
    let mut modes = 0usize;
    for _ in 0..STABILITY_DRAWS {
        let e = log_uniform(&mut rng, 1e-6, 1e6);
        let mu_vis = log_uniform(&mut rng, 1e-6, 1e6);
        let p = ModelParams {
            rho: log_uniform(&mut rng, 1e-6, 1e6),
            mu: e / 2.0,
            lambda: 0.0,
            mu1: mu_vis / 2.0,
            mu2: mu_vis / 2.0,
            kappa: log_uniform(&mut rng, 1e-6, 1e6),
            alpha: rng.random_range(0.0..10.0),
            ..ModelParams::default()
        };
        for l in 1..STABILITY_GRID {
            let c = continuous_mode(l, &p)?;
            let d = match semidiscrete_symbol(l, STABILITY_GRID, &p) {
                Ok(d) => d,
                Err(Error::DegenerateMode { .. }) => continue,
                Err(e) => return Err(e),
            };
            modes += 2;
            for r in [c, d] {
                if !(r.stable && r.criteria_stable()) {
                    unstable += 1;
                }
            }
        }
    }
    let counter = ModelParams::default().with_alpha(-0.5).with_kappa(1e3);
    let counter_unstable = (1..20)
        .filter_map(|l| semidiscrete_symbol(l, 20, &counter).ok())
        .filter(|r| !r.stable)
        .count();
    let worst_tol = -STABILITY_TOL;
    Ok((
        unstable == 0 && counter_unstable > 0,
        format!(
            "{modes} modes over {STABILITY_DRAWS} draws, {unstable} below {worst_tol:e}; \
             alpha=-0.5 kappa=1e3 n=20 has {counter_unstable} unstable modes"
        ),
    ))
}

fn consistency() -> Outcome {
    let hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-3];
    let rows = consistency_check(1, &hs)?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.relative_gap).collect();
    let slope = fit_slope(&hs, &gaps);
    let last = gaps[gaps.len() - 1];
    Ok((
        last <= CONSISTENCY_MAX_GAP && in_range(slope, CONSISTENCY_SLOPE_RANGE),
        format!("gap at h=1e-3: {last:.3e}, slope = {slope:.4}"),
    ))
}

fn equilibrium_and_symmetry() -> Outcome {
    let mesh = Mesh::unit_square(8)?;
    let stepper = TimeStepper::new(ModelParams::default(), &Scenario::Unforced)?;
    let rest = stepper.run(&State::zero(mesh.clone()), 100, &mut |_, _| {})?;
    let drift = rest.final_state.max_abs();

    let params = ModelParams::default();
    let mut state = State::at_rest(mesh.clone(), params.p0);
    let nv = mesh.n_vertices();
    for (i, x) in mesh.vertices().iter().enumerate() {
        state.eps[i] = 0.2 * x[0];
        state.eps[nv + i] = 0.1 * x[0] * x[1];
        state.eps[2 * nv + i] = -0.15 * x[1];
    }
    let stepper = TimeStepper::new(params, &Scenario::PaperBodyForce)?;
    let mut full = FullStrainField::from_state(&state);
    let mut worst = symmetry_norm_full(&full);
    let mut err = None;
    stepper.run(&state, 20, &mut |s, _| {
        let grads = recover_nodal_gradients(&s.mesh, &s.w);
        match full.advance(&grads, params.alpha, params.dt) {
            Ok(next) => {
                worst = worst.max(symmetry_norm_full(&next));
                full = next;
            }
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut skew_residual = 0.0f64;
    for _ in 0..1000 {
        let mut rand_tensor = || {
            Tensor2::new2([
                [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            ])
        };
        let v = skw(&rand_tensor());
        let l = skw(&rand_tensor());
        let scale = (v.norm() * v.norm() * l.norm()).max(f64::MIN_POSITIVE);
        let r = tensor_dot(&v, &l.matmul(&v))
            .abs()
            .max(tensor_dot(&v, &v.matmul(&l)).abs());
        skew_residual = skew_residual.max(r / scale);
    }
    Ok((
        drift <= EQUILIBRIUM_TOL && worst <= SYMMETRY_TOL && skew_residual <= SKEW_IDENTITY_REL_TOL,
        format!("rest drift {drift:.2e}, 4-slot skew {worst:.2e}, skew identity residual {skew_residual:.2e}"),
    ))
}

fn oracle_equivalence() -> Outcome {
    struct Mixed;
    impl Sources for Mixed {
        fn body_force(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
            [x[0] + 2.0 * x[1] + t, 1.0 - x[0]]
        }
        fn fluid_source(&self, _t: f64, x: [f64; 2]) -> f64 {
            x[0] - 2.0 * x[1]
        }
        fn boundary_flux(&self, _t: f64, x: [f64; 2]) -> f64 {
            3.0 * x[1]
        }
        fn traction(&self, _t: f64, x: [f64; 2]) -> [f64; 2] {
            [x[1], -x[0]]
        }
    }
    let mesh = Mesh::unit_square(2)?;
    let nv = mesh.n_vertices();
    let params = ModelParams {
        mu: 0.7,
        lambda: 1.3,
        mu1: 0.9,
        mu2: 0.4,
        p0: 0.8,
        ..ModelParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w: Vec<f64> = (0..2 * nv).map(|_| rng.random_range(-1.0..1.0)).collect();
    let eps: Vec<f64> = (0..3 * nv).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (bw, bp) = assemble_loads(&mesh, &params, 0.3, &Mixed);
    let (ow, op) = common::loads(&mesh, &params, 0.3, &Mixed);
    let errors = [
        (
            "mass",
            common::rel_error_matrix(&assemble_mass(&mesh, 1), &common::mass(&mesh)),
        ),
        (
            "laplace",
            common::rel_error_matrix(&assemble_laplace(&mesh), &common::laplace(&mesh)),
        ),
        (
            "divergence",
            common::rel_error_matrix(&assemble_divergence(&mesh), &common::divergence(&mesh)),
        ),
        (
            "elastic",
            common::rel_error_matrix(
                &assemble_elastic(&mesh, &params),
                &common::elastic(&mesh, &params),
            ),
        ),
        (
            "viscous",
            common::rel_error_matrix(
                &assemble_viscous(&mesh, &params),
                &common::viscous(&mesh, &params),
            ),
        ),
        (
            "coupling",
            common::rel_error_matrix(
                &assemble_strain_coupling(&mesh),
                &common::strain_coupling(&mesh),
            ),
        ),
        (
            "nonlinear",
            common::rel_error_vec(
                &assemble_strain_nonlinear(&mesh, &w, &eps),
                &common::strain_nonlinear(&mesh, &w, &eps),
            ),
        ),
        ("load w", common::rel_error_vec(&bw, &ow)),
        ("load p", common::rel_error_vec(&bp, &op)),
    ];
    let worst_op = errors.iter().map(|e| e.1).fold(0.0, f64::max);

    let n = 4;
    let p1 = ModelParams {
        p0: 0.2,
        beta: 0.05,
        kappa: 0.3,
        ..ModelParams::default()
    };
    let mut state = State::at_rest(Mesh::interval(n)?, p1.p0);
    for i in 0..=n {
        let x = i as f64 / n as f64;
        state.eps[i] = 0.4 * (1.0 - x) + 0.1;
        state.w[i] = 0.3 * x;
        state.p[i] = p1.p0 + 0.1 * (1.0 - x);
    }
    state.t = 0.2;
    let (next, _) = TimeStepper::new(p1, &common::Push1d)?.step(&state)?;
    let oracle = common::newton_step_1d(n, &p1, &state.w, &state.eps, &state.p, state.t + p1.dt);
    let got: Vec<f64> = next
        .w
        .iter()
        .chain(&next.eps)
        .chain(&next.p)
        .copied()
        .collect();
    let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let step_err = got
        .iter()
        .zip(&oracle)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale;
    Ok((
        worst_op <= OPERATOR_REL_TOL && step_err <= FIXED_POINT_REL_TOL,
        format!("worst operator error {worst_op:.2e}, 1D step error {step_err:.2e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("thresholds", thresholds),
        ("oscillation dichotomy", oscillation_dichotomy),
        ("TV table shape", table_shape),
        ("M-matrix predicates", m_matrix_predicates),
        ("P inverse order", p_inverse_order),
        ("linear stability", linear_stability),
        ("consistency", consistency),
        ("equilibrium and symmetry", equilibrium_and_symmetry),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} criterion {}: {name}: {detail} [{secs:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            k + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
