//! Orchestration: evolve, metric, phases, covariance and lindblad sections,
//! each contributing named checks and CSV artifacts to a run report.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::covariance::{
    geometric_equivalence_check, metric_permutation_trajectory, rho_inverse_trajectory,
    transform_hamiltonian, verify_hamiltonian_invariance, Observable,
};
use crate::error::Error;
use crate::lindblad::{
    dissipator, effective_hamiltonian, evolve_metric_lindblad, generalized_evolution,
    hprime_defect_eta, hprime_defect_fixed, nonunitarity_wrt_eta, LindbladSet,
};
use crate::metric::{
    conserved_inner_product_check, evolve_metric_general, evolve_metric_hermitian,
    lvn_residual, MetricTrajectory,
};
use crate::operator::{Operator, StateVector};
use crate::phases::{
    berry_quadrature, cyclic_phase, geometric_phase, pancharatnam_sum, phase_decomposition,
    reconstruct_evolution, reference_gauge_chain, track_eigenbranches, EigenBranch,
    PhaseDecomposition,
};
use crate::propagator::{
    convergence_order, evolve, ConvergenceOrder, HamiltonianKind, HamiltonianSpec,
    PropagatorTrace, TimeGrid,
};
use crate::scenario::config::{Format, ScenarioConfig};
use crate::scenario::randgen::{random_hermitian, random_state};
use crate::scenario::report::{Check, CheckStatus, RunReport};
use crate::Result;

/// How far along the pipeline a run goes. Later stages include the earlier
/// sections they depend on; `Lindblad` is the dissipative slice on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Evolve,
    Metric,
    Phases,
    Covariance,
    Lindblad,
    All,
}

impl Stage {
    fn has_evolve(self) -> bool {
        !matches!(self, Stage::Lindblad)
    }
    fn has_metric(self) -> bool {
        matches!(self, Stage::Metric | Stage::Phases | Stage::Covariance | Stage::All)
    }
    fn has_phases(self) -> bool {
        matches!(self, Stage::Phases | Stage::All)
    }
    fn has_covariance(self) -> bool {
        matches!(self, Stage::Covariance | Stage::All)
    }
}

/// Max-residual budget for the defining-equation check: central differencing
/// is O(dt^2) with a prefactor driven by how fast H stirs eta.
pub(crate) fn lvn_budget(dt: f64, rate: f64, eta_scale: f64) -> f64 {
    2.0 * dt * dt * eta_scale.max(1.0) * (1.0 + 2.0 * rate).powi(3)
}

/// H2 = H defect budget: 1e-6 at 1e4 steps, O(dt^2) above that.
fn h2_tol(steps: usize) -> f64 {
    1e-6 * (10_000.0 / steps as f64).powi(2).max(1.0)
}

fn smooth_kind(kind: &HamiltonianKind) -> bool {
    matches!(
        kind,
        HamiltonianKind::Constant { .. }
            | HamiltonianKind::PauliRotating { .. }
            | HamiltonianKind::Fourier { .. }
    )
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn probe_pairs(seed: u64, dim: usize) -> Vec<(StateVector, StateVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70726f6265);
    (0..2)
        .map(|_| (random_state(&mut rng, dim), random_state(&mut rng, dim)))
        .collect()
}

fn fail(report: &mut RunReport, name: &str, err: &Error, started: Instant) {
    report.note(format!("{name}: {err}"));
    report.push(Check::with_status(name, CheckStatus::Fail, f64::MAX, 0.0, started));
}

fn near_scalar(eta: &Operator) -> bool {
    let dim = eta.dim();
    let mean = eta.trace().re / dim as f64;
    let dev = (eta - &Operator::identity(dim).scale_re(mean)).frob_norm();
    dev <= 0.05 * eta.frob_norm().max(1e-300)
}

pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    run_stage(cfg, Stage::All, out_dir)
}

pub fn run_stage(cfg: &ScenarioConfig, stage: Stage, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    if stage == Stage::Lindblad && cfg.lindblad.is_none() {
        return Err(Error::Validation {
            field: "lindblad".into(),
            reason: "config has no lindblad section".into(),
        });
    }
    let grid = cfg.time_grid()?;
    let h = cfg.hamiltonian_spec()?;
    let eta0 = cfg.eta0_operator()?;
    let tols = cfg.tolerances.clone();
    let mut report = RunReport::new(&cfg.name);
    let mut phases_csv: Option<String> = None;
    let mut lindblad_csv: Option<String> = None;

    let mut trace: Option<PropagatorTrace> = None;
    if stage.has_evolve() {
        let t = Instant::now();
        match evolve(&h, &grid) {
            Ok(tr) => {
                if h.is_hermitian() {
                    let tol = (1e-13 * grid.steps as f64).max(1e-9);
                    report.push(Check::measured(
                        "evolve.unitarity",
                        tr.max_unitarity_defect(),
                        tol,
                        t,
                    ));
                }
                if smooth_kind(h.kind()) && grid.steps % 4 == 0 && grid.steps >= 8 {
                    let t2 = Instant::now();
                    match convergence_order(&h, &grid) {
                        Ok(ord) => {
                            let defect = match ord {
                                ConvergenceOrder::Exact => 0.0,
                                ConvergenceOrder::Order(p) => (p - 2.0).abs(),
                            };
                            report.push(Check::measured(
                                "evolve.convergence_order",
                                defect,
                                0.2,
                                t2,
                            ));
                        }
                        Err(e) => fail(&mut report, "evolve.convergence_order", &e, t2),
                    }
                }
                trace = Some(tr);
            }
            Err(e) => fail(&mut report, "evolve.propagator", &e, t),
        }
    }

    let mut traj_h: Option<MetricTrajectory> = None;
    if stage.has_metric() && trace.is_some() {
        let hnorm = h.norm_bound(&grid)?;
        let lvn_tol = lvn_budget(grid.dt(), hnorm / grid.hbar, eta0.frob_norm());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x696e6e6572);
        let psi = random_state(&mut rng, cfg.dimension);
        let phi = random_state(&mut rng, cfg.dimension);

        if h.is_hermitian() {
            let t = Instant::now();
            match evolve_metric_hermitian(&h, &eta0, &grid) {
                Ok(traj) => {
                    report.push(Check::measured(
                        "metric.eigenvalue_drift",
                        traj.eigenvalue_drift(),
                        1e-8,
                        t,
                    ));
                    let t2 = Instant::now();
                    match lvn_residual(&h, &traj) {
                        Ok(r) => report.push(Check::measured(
                            "metric.lvn_residual",
                            r,
                            lvn_tol,
                            t2,
                        )),
                        Err(e) => fail(&mut report, "metric.lvn_residual", &e, t2),
                    }
                    let t3 = Instant::now();
                    match conserved_inner_product_check(&h, &traj, &psi, &phi) {
                        Ok(d) => report.push(Check::measured(
                            "metric.inner_product_drift",
                            d,
                            1e-6,
                            t3,
                        )),
                        Err(e) => fail(&mut report, "metric.inner_product_drift", &e, t3),
                    }
                    traj_h = Some(traj);
                }
                Err(e) => fail(&mut report, "metric.evolution", &e, t),
            }
        }

        let t = Instant::now();
        match evolve_metric_general(&h, &eta0, &grid) {
            Ok(traj_g) => {
                match conserved_inner_product_check(&h, &traj_g, &psi, &phi) {
                    Ok(d) => report.push(Check::measured(
                        "metric.inner_product_drift_general",
                        d,
                        1e-6,
                        t,
                    )),
                    Err(e) => {
                        fail(&mut report, "metric.inner_product_drift_general", &e, t)
                    }
                }
                if !h.is_hermitian() {
                    let t2 = Instant::now();
                    match lvn_residual(&h, &traj_g) {
                        Ok(r) => report.push(Check::measured(
                            "metric.lvn_residual",
                            r,
                            lvn_tol,
                            t2,
                        )),
                        Err(e) => fail(&mut report, "metric.lvn_residual", &e, t2),
                    }
                }
            }
            Err(e) => fail(&mut report, "metric.evolution_general", &e, t),
        }
    }

    if stage.has_phases() {
        if !h.is_hermitian() {
            report.note("phases: skipped, H is not Hermitian");
        } else if near_scalar(&eta0) {
            report.note("phases: skipped, eta0 is scalar so branches carry no structure");
        } else if let (Some(traj), Some(tr)) = (&traj_h, &trace) {
            run_phases_section(
                cfg,
                &h,
                &grid,
                traj,
                tr,
                &tols,
                &mut report,
                &mut phases_csv,
            );
        }
    }

    if stage.has_covariance() {
        if !h.is_hermitian() {
            report.note("covariance: skipped, H is not Hermitian");
        } else if let Some(traj) = &traj_h {
            run_covariance_section(cfg, &h, &grid, &eta0, traj, &tols, &mut report)?;
        }
    }

    let lindblad_wanted = stage == Stage::Lindblad
        || (stage == Stage::All && cfg.lindblad.is_some());
    if lindblad_wanted {
        run_lindblad_section(cfg, &h, &grid, &eta0, &tols, &mut report, &mut lindblad_csv)?;
    }

    report.sort();
    write_outputs(cfg, out_dir, &report, &phases_csv, &lindblad_csv)?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_phases_section(
    cfg: &ScenarioConfig,
    h: &HamiltonianSpec,
    grid: &TimeGrid,
    traj: &MetricTrajectory,
    trace: &PropagatorTrace,
    tols: &crate::scenario::config::Tolerances,
    report: &mut RunReport,
    phases_csv: &mut Option<String>,
) {
    let t = Instant::now();
    let branches = match track_eigenbranches(traj, tols.gap_tol) {
        Ok(b) => b,
        Err(e) => {
            let defect = match &e {
                Error::DegenerateSpectrum { gap, .. } => *gap,
                Error::BranchCrossing { overlap, .. } => *overlap,
                _ => f64::MAX,
            };
            report.note(format!("phases.branches: {e}"));
            report.push(Check::with_status(
                "phases.branches",
                CheckStatus::Fail,
                defect,
                tols.gap_tol,
                t,
            ));
            return;
        }
    };
    let dec = match phase_decomposition(&branches, h, grid) {
        Ok(d) => d,
        Err(e) => {
            fail(report, "phases.decomposition", &e, t);
            return;
        }
    };

    let t2 = Instant::now();
    let eig_res = branches
        .iter()
        .map(|b| b.max_eig_residual())
        .fold(0.0, f64::max);
    report.push(Check::measured("phases.eig_residual", eig_res, 1e-9, t2));

    let t3 = Instant::now();
    let mut quad = 0.0f64;
    let mut compared = false;
    for b in &branches {
        // both routes need one common smooth gauge; branches wandering too
        // far from their start vector have none and are skipped
        let Some(w) = reference_gauge_chain(b) else {
            report.note(format!(
                "phases.quadrature_agreement: branch {} left the reference gauge",
                b.index
            ));
            continue;
        };
        compared = true;
        let g1 = pancharatnam_sum(&w);
        let g2 = berry_quadrature(&w);
        for (a, bq) in g1.iter().zip(g2.iter()) {
            quad = quad.max((a - bq).abs());
        }
    }
    if compared {
        report.push(Check::measured("phases.quadrature_agreement", quad, 1e-6, t3));
    }

    let t4 = Instant::now();
    let mut rec_defect = 0.0f64;
    let mut rec_final: Option<Operator> = None;
    let mut rec_mid: Option<Operator> = None;
    let mut rec_err = None;
    for k in 0..traj.len() {
        match reconstruct_evolution(&branches, &dec, k) {
            Ok(rec) => {
                rec_defect = rec_defect.max((&rec - &trace.u[k]).frob_norm());
                if k == traj.len() - 1 {
                    rec_final = Some(rec);
                } else if k == traj.len() / 2 {
                    rec_mid = Some(rec);
                }
            }
            Err(e) => {
                rec_err = Some(e);
                break;
            }
        }
    }
    match rec_err {
        None => report.push(Check::measured("phases.reconstruction", rec_defect, 1e-5, t4)),
        Some(e) => fail(report, "phases.reconstruction", &e, t4),
    }

    if let (Some(base_mid), Some(base_final)) = (rec_mid, rec_final) {
        let t5 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6761756765);
        let mut perturbed = branches.clone();
        for b in perturbed.iter_mut() {
            for v in b.raw.iter_mut() {
                let theta: f64 = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
                *v = v.scale(C64::new(0.0, theta).exp());
            }
        }
        let mut dec2 = dec.clone();
        for (n, b) in perturbed.iter().enumerate() {
            dec2.gamma[n] = geometric_phase(b);
        }
        let mid = traj.len() / 2;
        let last = traj.len() - 1;
        let defect = match (
            reconstruct_evolution(&perturbed, &dec2, mid),
            reconstruct_evolution(&perturbed, &dec2, last),
        ) {
            (Ok(a), Ok(b)) => (&a - &base_mid)
                .frob_norm()
                .max((&b - &base_final).frob_norm()),
            _ => f64::MAX,
        };
        report.push(Check::measured("phases.gauge_invariance", defect, 1e-8, t5));
    }

    let t6 = Instant::now();
    let last = grid.steps;
    let worst_return = branches
        .iter()
        .map(|b| 1.0 - b.raw[0].inner(&b.raw[last]).norm())
        .fold(0.0, f64::max);
    if worst_return < tols.cyc_tol {
        let mut ok = true;
        for (n, b) in branches.iter().enumerate() {
            if cyclic_phase(b, &dec.delta[n], last, tols.cyc_tol).is_err() {
                ok = false;
            }
        }
        report.push(Check::with_status(
            "phases.cyclic_ray_return",
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            worst_return,
            tols.cyc_tol,
            t6,
        ));
    }

    *phases_csv = Some(render_phases_csv(&branches, &dec, grid));
}

fn render_phases_csv(
    branches: &[EigenBranch],
    dec: &PhaseDecomposition,
    grid: &TimeGrid,
) -> String {
    let mut s = String::from("t,branch,lambda,delta,gamma,alpha,eigresidual\n");
    for k in 0..grid.len() {
        for (n, b) in branches.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt(grid.time(k)),
                n,
                fmt(b.lambdas[k]),
                fmt(dec.delta[n][k]),
                fmt(dec.gamma[n][k]),
                fmt(dec.alpha(n, k)),
                fmt(b.eig_residuals[k]),
            ));
        }
    }
    s
}

fn run_covariance_section(
    cfg: &ScenarioConfig,
    h: &HamiltonianSpec,
    grid: &TimeGrid,
    eta0: &Operator,
    traj: &MetricTrajectory,
    tols: &crate::scenario::config::Tolerances,
    report: &mut RunReport,
) -> Result<()> {
    let pairs = probe_pairs(cfg.seed, cfg.dimension);

    let t = Instant::now();
    match rho_inverse_trajectory(h, eta0, grid) {
        Err(e) => fail(report, "covariance.map", &e, t),
        Ok(map) => {
            match map.isometry_defect(&pairs) {
                Ok(d) => report.push(Check::measured("covariance.isometry", d, 1e-8, t)),
                Err(e) => fail(report, "covariance.isometry", &e, t),
            }

            let t2 = Instant::now();
            match transform_hamiltonian(h, &map) {
                Err(e) => fail(report, "covariance.h2_defect", &e, t2),
                Ok(h2) => {
                    let mut fine = 0.0f64;
                    let interior = h2.len() - 1;
                    for (k, h2k) in h2.iter().enumerate().take(interior).skip(1) {
                        let hk = h.evaluate(grid.time(k))?;
                        fine = fine
                            .max((h2k - &hk).frob_norm() / hk.frob_norm().max(1.0));
                    }
                    report.push(Check::measured(
                        "covariance.h2_defect",
                        fine,
                        h2_tol(grid.steps),
                        t2,
                    ));

                    if grid.steps.is_multiple_of(2) {
                        let t3 = Instant::now();
                        let coarse =
                            verify_hamiltonian_invariance(h, eta0, &grid.coarsened(2)?)?;
                        let defect = if fine < 1e-12 && coarse < 1e-12 {
                            0.0
                        } else {
                            ((coarse / fine).log2() - 2.0).abs()
                        };
                        report.push(Check::measured(
                            "covariance.h2_convergence_order",
                            defect,
                            0.3,
                            t3,
                        ));
                    } else {
                        report.note("covariance.h2_convergence_order: skipped, steps odd");
                    }
                }
            }
        }
    }

    let t4 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x657870656374);
    let psi0 = random_state(&mut rng, cfg.dimension);
    let energy = Observable::new(h.evaluate(grid.t0)?, "energy");
    let ladder = Observable::new(
        Operator::from_fn(cfg.dimension, |i, j| {
            if i == j {
                C64::new((i + 1) as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })?,
        "ladder",
    );
    let mut expectation = 0.0f64;
    let mut exp_err = None;
    for obs in [&energy, &ladder] {
        match crate::covariance::expectation_invariance_check(obs, h, eta0, &psi0, grid) {
            Ok(d) => expectation = expectation.max(d),
            Err(e) => exp_err = Some(e),
        }
    }
    match exp_err {
        None => report.push(Check::measured(
            "covariance.expectation_invariance",
            expectation,
            1e-7,
            t4,
        )),
        Some(e) => fail(report, "covariance.expectation_invariance", &e, t4),
    }

    if let Some(eta1) = cfg.eta1_operator()? {
        let t5 = Instant::now();
        match (
            metric_permutation_trajectory(h, eta0, &eta1, grid),
            metric_permutation_trajectory(h, &eta1, eta0, grid),
        ) {
            (Ok(perm), Ok(back)) => {
                match perm.map.isometry_defect(&pairs) {
                    Ok(d) => report.push(Check::measured(
                        "covariance.permutation_isometry",
                        d,
                        1e-8,
                        t5,
                    )),
                    Err(e) => fail(report, "covariance.permutation_isometry", &e, t5),
                }
                let t6 = Instant::now();
                let id = Operator::identity(cfg.dimension);
                let inv_defect = perm
                    .map
                    .v
                    .iter()
                    .zip(back.map.v.iter())
                    .map(|(f, b)| (&(b * f) - &id).frob_norm())
                    .fold(0.0, f64::max);
                report.push(Check::measured(
                    "covariance.permutation_inverse",
                    inv_defect,
                    1e-8,
                    t6,
                ));
                report.push(Check::with_status(
                    "covariance.permutation_hermiticity",
                    CheckStatus::Pass,
                    perm.hermiticity_defect,
                    f64::MAX,
                    t6,
                ));
            }
            (Err(e), _) | (_, Err(e)) => fail(report, "covariance.permutation_isometry", &e, t5),
        }
    }

    let t7 = Instant::now();
    let times: Vec<f64> = (0..traj.len()).map(|k| grid.time(k)).collect();
    let accept_matrices: Result<Vec<Operator>> = (0..traj.len())
        .map(|k| Ok(&h.evaluate(times[k])? + &traj.eta[k].scale_re(0.1)))
        .collect();
    let accept = HamiltonianSpec::new(
        HamiltonianKind::Sampled {
            times: times.clone(),
            matrices: accept_matrices?,
        },
        grid.hbar,
    )?;
    match geometric_equivalence_check(h, &accept, traj, tols.equivalence_tol) {
        Ok(rep) => report.push(Check::measured(
            "covariance.equivalence_accept",
            rep.defect,
            tols.equivalence_tol,
            t7,
        )),
        Err(e) => fail(report, "covariance.equivalence_accept", &e, t7),
    }

    if !near_scalar(eta0) {
        let t8 = Instant::now();
        let mut prng = ChaCha8Rng::seed_from_u64(0x72656a656374);
        let probe = random_hermitian(&mut prng, cfg.dimension);
        let commutant = probe.commutator(eta0)?.frob_norm()
            / (probe.frob_norm() * eta0.frob_norm()).max(1e-300);
        if commutant >= 0.05 {
            let reject_matrices: Result<Vec<Operator>> = (0..traj.len())
                .map(|k| Ok(&h.evaluate(times[k])? + &probe.scale_re(0.3)))
                .collect();
            let reject = HamiltonianSpec::new(
                HamiltonianKind::Sampled {
                    times,
                    matrices: reject_matrices?,
                },
                grid.hbar,
            )?;
            match geometric_equivalence_check(h, &reject, traj, tols.equivalence_tol) {
                Ok(rep) => {
                    let shortfall = (1e-2 - rep.defect).max(0.0);
                    report.push(Check::measured(
                        "covariance.equivalence_reject",
                        shortfall,
                        0.0,
                        t8,
                    ));
                }
                Err(e) => fail(report, "covariance.equivalence_reject", &e, t8),
            }
        } else {
            report.note("covariance.equivalence_reject: skipped, probe nearly commutes");
        }
    } else {
        report.note("covariance.equivalence_reject: skipped, scalar eta0 commutes with all");
    }
    Ok(())
}

fn run_lindblad_section(
    cfg: &ScenarioConfig,
    h: &HamiltonianSpec,
    grid: &TimeGrid,
    eta0: &Operator,
    tols: &crate::scenario::config::Tolerances,
    report: &mut RunReport,
    lindblad_csv: &mut Option<String>,
) -> Result<()> {
    let l = cfg.lindblad_set()?;
    let t = Instant::now();
    let ltraj = match evolve_metric_lindblad(h, eta0, &l, grid) {
        Ok(traj) => traj,
        Err(e) => {
            fail(report, "lindblad.evolution", &e, t);
            return Ok(());
        }
    };

    let floor = tols.pd_tol * eta0.frob_norm();
    let min_eig = ltraj
        .min_eigs
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    match ltraj.positivity_lost {
        Some(loss) => report.push(Check::with_status(
            "lindblad.positivity",
            CheckStatus::Warn,
            (floor - loss.min_eig).max(0.0),
            0.0,
            t,
        )),
        None => report.push(Check::measured(
            "lindblad.positivity",
            (floor - min_eig).max(0.0),
            0.0,
            t,
        )),
    }

    let t2 = Instant::now();
    let max_eta = ltraj
        .eta
        .iter()
        .map(|e| e.frob_norm())
        .fold(0.0, f64::max);
    report.push(Check::measured(
        "lindblad.symmetrization",
        ltraj.symmetrization_defect,
        1e-10 * (1.0 + max_eta) * cfg.dimension as f64,
        t2,
    ));

    let t3 = Instant::now();
    let hnorm = h.norm_bound(grid)?;
    let jump_rate: f64 = l.ops.iter().map(|a| a.frob_norm().powi(2)).sum();
    let budget = lvn_budget(grid.dt(), hnorm / grid.hbar + jump_rate, max_eta);
    match lindblad_equation_residual(h, &l, &ltraj) {
        Ok(r) => report.push(Check::measured("lindblad.equation_residual", r, budget, t3)),
        Err(e) => fail(report, "lindblad.equation_residual", &e, t3),
    }

    if ltraj.positivity_lost.is_some() {
        report.note("lindblad.generalized: skipped, positivity lost");
        return Ok(());
    }
    let t4 = Instant::now();
    match generalized_evolution(h, &ltraj, tols.gap_tol) {
        Err(e) => fail(report, "lindblad.generalized", &e, t4),
        Ok(gen) => {
            let eig_res = gen
                .branches
                .iter()
                .map(|b| b.max_eig_residual())
                .fold(0.0, f64::max);
            report.push(Check::measured("lindblad.eig_residual", eig_res, 1e-9, t4));

            let nu = nonunitarity_wrt_eta(&gen.u, &ltraj)?;
            let hp = effective_hamiltonian(&gen.u, grid)?;
            let mut s = String::from(
                "t,min_eig_eta,trace_eta,nonunitarity,hprime_defect_fixed,hprime_defect_eta\n",
            );
            for k in 0..ltraj.len() {
                let eta_defect = hprime_defect_eta(&hp[k], &ltraj.eta[k])?;
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt(grid.time(k)),
                    fmt(ltraj.min_eigs[k]),
                    fmt(ltraj.eta[k].trace().re),
                    fmt(nu[k]),
                    fmt(hprime_defect_fixed(&hp[k])),
                    fmt(eta_defect),
                ));
            }
            *lindblad_csv = Some(s);
        }
    }
    Ok(())
}

/// Central-difference residual of d(eta)/dt = -(i/hbar)(H'eta - eta H) - D(eta).
fn lindblad_equation_residual(
    h: &HamiltonianSpec,
    l: &LindbladSet,
    traj: &MetricTrajectory,
) -> Result<f64> {
    let grid = &traj.grid;
    let dt = grid.dt();
    let mut worst = 0.0f64;
    for k in 1..traj.len() - 1 {
        let deriv = (&traj.eta[k + 1] - &traj.eta[k - 1]).scale_re(1.0 / (2.0 * dt));
        let hk = h.evaluate(grid.time(k))?;
        let etak = &traj.eta[k];
        let comm = &(&hk.adjoint() * etak) - &(etak * &hk);
        let mut rhs = comm.scale(C64::new(0.0, -1.0 / grid.hbar));
        if !l.is_empty() {
            rhs = &rhs - &dissipator(etak, l)?;
        }
        worst = worst.max((&deriv - &rhs).frob_norm());
    }
    Ok(worst)
}

fn write_outputs(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    report: &RunReport,
    phases_csv: &Option<String>,
    lindblad_csv: &Option<String>,
) -> Result<()> {
    let formats = &cfg.outputs.formats;
    if formats.is_empty() {
        return Ok(());
    }
    std::fs::create_dir_all(out_dir)?;
    if formats.contains(&Format::Json) {
        report.write_json(out_dir.join(format!("{}.report.json", cfg.name)))?;
    }
    if formats.contains(&Format::Csv) {
        if let Some(s) = phases_csv {
            std::fs::write(out_dir.join(format!("{}.phases.csv", cfg.name)), s)?;
        }
        if let Some(s) = lindblad_csv {
            std::fs::write(out_dir.join(format!("{}.lindblad.csv", cfg.name)), s)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::parse_config;

    fn run_named(text: &str) -> (RunReport, tempfile::TempDir) {
        let cfg = parse_config(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let report = run_scenario(&cfg, dir.path()).unwrap();
        (report, dir)
    }

    #[test]
    fn trivial_scenario_all_pass_tiny_defects() {
        let (report, dir) = run_named(
            r#"{
            "name": "trivial",
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 1.0, "steps": 100},
            "hamiltonian": {"kind": "constant", "matrix": [[[0,0],[0,0]],[[0,0],[0,0]]]}
        }"#,
        );
        assert!(report.passed(), "{:#?}", report.checks);
        assert!(!report.checks.is_empty());
        for c in &report.checks {
            assert!(
                c.defect < 1e-10,
                "{} defect {} not tiny",
                c.name,
                c.defect
            );
        }
        assert!(dir.path().join("trivial.report.json").exists());
        // scalar eta0: no phases artifacts
        assert!(!dir.path().join("trivial.phases.csv").exists());
    }

    #[test]
    fn stationary_scenario_passes_and_writes_phases() {
        let (report, dir) = run_named(
            r#"{
            "name": "stat",
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 2.0, "steps": 400},
            "hamiltonian": {"kind": "constant", "matrix": [[[0.7,0],[0,0]],[[0,0],[-0.3,0]]]},
            "eta0": {"kind": "diagonal", "values": [1.0, 2.0]}
        }"#,
        );
        assert!(report.passed(), "{:#?}", report.checks);
        let csv = std::fs::read_to_string(dir.path().join("stat.phases.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,branch,lambda,delta,gamma,alpha,eigresidual"
        );
        assert_eq!(csv.lines().count(), 1 + 401 * 2);
        // delta for branch 0 at final time is -0.7 * 2
        let last_b0 = csv
            .lines()
            .rev()
            .find(|l| l.split(',').nth(1) == Some("0"))
            .unwrap();
        let delta: f64 = last_b0.split(',').nth(3).unwrap().parse().unwrap();
        assert!((delta + 1.4).abs() < 1e-9, "delta {delta}");
    }

    #[test]
    fn near_degenerate_eta_fails_phases_only() {
        // dim 3: a repeated eigenvalue without eta0 being scalar
        let (report, _dir) = run_named(
            r#"{
            "name": "neardeg",
            "dimension": 3,
            "time": {"t0": 0.0, "t1": 1.0, "steps": 200},
            "hamiltonian": {"kind": "constant",
                "matrix": [[[0.5,0],[0.1,0],[0,0]],[[0.1,0],[-0.2,0],[0,0]],[[0,0],[0,0],[0.1,0]]]},
            "eta0": {"kind": "diagonal", "values": [1.0, 1.0, 2.0]}
        }"#,
        );
        let branches = report
            .checks
            .iter()
            .find(|c| c.name == "phases.branches")
            .expect("branch failure recorded");
        assert_eq!(branches.status, CheckStatus::Fail);
        for c in &report.checks {
            if c.name.starts_with("covariance.") || c.name.starts_with("metric.") {
                assert_eq!(c.status, CheckStatus::Pass, "{} failed", c.name);
            }
        }
        assert!(!report.passed());
    }

    #[test]
    fn permutation_pair_checks_present() {
        let (report, _dir) = run_named(
            r#"{
            "name": "perm",
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 1.0, "steps": 200},
            "hamiltonian": {"kind": "pauli_rotating", "omega0": 1.0, "omega1": 0.5, "omega": 0.8},
            "eta0": {"kind": "matrix", "matrix": [[[2.0,0],[0.4,0]],[[0.4,0],[1.0,0]]]},
            "eta1": {"kind": "matrix", "matrix": [[[1.5,0],[-0.3,0]],[[-0.3,0],[2.5,0]]]}
        }"#,
        );
        assert!(report.passed(), "{:#?}", report.checks);
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"covariance.permutation_isometry"));
        assert!(names.contains(&"covariance.permutation_inverse"));
        assert!(names.contains(&"covariance.permutation_hermiticity"));
        let herm = report
            .checks
            .iter()
            .find(|c| c.name == "covariance.permutation_hermiticity")
            .unwrap();
        assert!(herm.defect > 0.0);
    }

    #[test]
    fn dephasing_scenario_writes_lindblad_csv() {
        let (report, dir) = run_named(
            r#"{
            "name": "deph",
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 5.0, "steps": 500},
            "hamiltonian": {"kind": "constant", "matrix": [[[0,0],[0,0]],[[0,0],[0,0]]]},
            "eta0": {"kind": "matrix", "matrix": [[[1.0,0],[0.5,0]],[[0.5,0],[1.0,0]]]},
            "lindblad": {"ops": [[[[0.4472135954999579,0],[0,0]],[[0,0],[-0.4472135954999579,0]]]],
                         "rate_convention": "sqrt_rate_embedded"}
        }"#,
        );
        assert!(report.passed(), "{:#?}", report.checks);
        let csv = std::fs::read_to_string(dir.path().join("deph.lindblad.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,min_eig_eta,trace_eta,nonunitarity,hprime_defect_fixed,hprime_defect_eta"
        );
        assert_eq!(csv.lines().count(), 1 + 501);
        let last = csv.lines().last().unwrap();
        let cols: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((cols[0] - 5.0).abs() < 1e-12);
        assert!((cols[2] - 2.0).abs() < 1e-9, "trace {}", cols[2]);
        assert!(cols[3] > 1e-3, "nonunitarity {}", cols[3]);
        assert!((cols[3] - 0.9114).abs() < 1e-3);
    }

    #[test]
    fn lindblad_stage_requires_lindblad_config() {
        let cfg = parse_config(
            r#"{
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 1.0, "steps": 10},
            "hamiltonian": {"kind": "constant", "matrix": [[[0,0],[0,0]],[[0,0],[0,0]]]}
        }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        match run_stage(&cfg, Stage::Lindblad, dir.path()) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "lindblad"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn stage_slices_report_subsets() {
        let text = r#"{
            "name": "slice",
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 1.0, "steps": 200},
            "hamiltonian": {"kind": "pauli_rotating", "omega0": 1.0, "omega1": 0.5, "omega": 0.8},
            "eta0": {"kind": "diagonal", "values": [1.0, 2.0]}
        }"#;
        let cfg = parse_config(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let ev = run_stage(&cfg, Stage::Evolve, dir.path()).unwrap();
        assert!(ev.checks.iter().all(|c| c.name.starts_with("evolve.")));
        let me = run_stage(&cfg, Stage::Metric, dir.path()).unwrap();
        assert!(me.checks.iter().any(|c| c.name.starts_with("metric.")));
        assert!(!me.checks.iter().any(|c| c.name.starts_with("phases.")));
        let ph = run_stage(&cfg, Stage::Phases, dir.path()).unwrap();
        assert!(ph.checks.iter().any(|c| c.name.starts_with("phases.")));
        assert!(!ph.checks.iter().any(|c| c.name.starts_with("covariance.")));
        let co = run_stage(&cfg, Stage::Covariance, dir.path()).unwrap();
        assert!(co.checks.iter().any(|c| c.name.starts_with("covariance.")));
        assert!(!co.checks.iter().any(|c| c.name.starts_with("phases.")));
    }

    #[test]
    fn determinism_of_csv_and_canonical_report() {
        let text = r#"{
            "name": "det",
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 2.0, "steps": 300},
            "hamiltonian": {"kind": "pauli_rotating", "omega0": 1.0, "omega1": 0.5, "omega": 0.8},
            "eta0": {"kind": "matrix", "matrix": [[[2.0,0],[0.4,0]],[[0.4,0],[1.0,0]]]},
            "seed": 11
        }"#;
        let cfg = parse_config(text).unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let r1 = run_scenario(&cfg, d1.path()).unwrap();
        let r2 = run_scenario(&cfg, d2.path()).unwrap();
        assert_eq!(r1.canonical(), r2.canonical());
        assert_eq!(r1.canonical_digest(), r2.canonical_digest());
        let c1 = std::fs::read(d1.path().join("det.phases.csv")).unwrap();
        let c2 = std::fs::read(d2.path().join("det.phases.csv")).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn non_hermitian_general_route_only() {
        // H = sx - 0.1 i 1: non-Hermitian, general construction conserves.
        let (report, _dir) = run_named(
            r#"{
            "name": "nh",
            "dimension": 2,
            "time": {"t0": 0.0, "t1": 1.0, "steps": 200},
            "hamiltonian": {"kind": "constant", "matrix": [[[0,-0.1],[1,0]],[[1,0],[0,-0.1]]]}
        }"#,
        );
        assert!(report.passed(), "{:#?}", report.checks);
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"metric.inner_product_drift_general"));
        assert!(!names.contains(&"metric.inner_product_drift"));
        assert!(!names.contains(&"evolve.unitarity"));
        assert!(names.contains(&"metric.lvn_residual"));
    }
}
