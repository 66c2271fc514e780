//! Eigenbranch tracking along metric trajectories and the decomposition of
//! total phases into dynamical and geometric parts, with spectral
//! reconstruction of the evolution operator.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::metric::MetricTrajectory;
use crate::operator::{Operator, StateVector};
use crate::propagator::{HamiltonianSpec, TimeGrid};
use crate::{Result, DEFAULT_OVERLAP_FLOOR};

/// One eigenvector branch of a metric trajectory.
///
/// `vectors` carries the continuity gauge (each successive overlap rotated
/// real-positive); `raw` keeps the deterministic eigensolver gauge the
/// Pancharatnam sums are accumulated over. The two differ per point by
/// exactly the accumulated geometric phase.
#[derive(Debug, Clone)]
pub struct EigenBranch {
    pub index: usize,
    /// Eigenvalue at t0 (constant along invariant trajectories).
    pub lambda: f64,
    /// Matched eigenvalue per grid point (drifts only under dissipation).
    pub lambdas: Vec<f64>,
    pub vectors: Vec<StateVector>,
    pub raw: Vec<StateVector>,
    pub min_gap: f64,
    /// ‖η_k v − λ v‖ per grid point.
    pub eig_residuals: Vec<f64>,
}

impl EigenBranch {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn max_eig_residual(&self) -> f64 {
        self.eig_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn lambda_drift(&self) -> f64 {
        self.lambdas
            .iter()
            .map(|l| (l - self.lambda).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-branch, per-point dynamical, geometric and total phases.
#[derive(Debug, Clone)]
pub struct PhaseDecomposition {
    pub delta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
}

impl PhaseDecomposition {
    pub fn alpha(&self, branch: usize, k: usize) -> f64 {
        self.delta[branch][k] + self.gamma[branch][k]
    }
}

/// Follow every eigenvector branch of `traj` by maximal-overlap matching.
pub fn track_eigenbranches(
    traj: &MetricTrajectory,
    gap_tol: f64,
) -> Result<Vec<EigenBranch>> {
    track_eigenbranches_with_floor(traj, gap_tol, DEFAULT_OVERLAP_FLOOR)
}

pub fn track_eigenbranches_with_floor(
    traj: &MetricTrajectory,
    gap_tol: f64,
    overlap_floor: f64,
) -> Result<Vec<EigenBranch>> {
    let dim = traj.dim();
    let npts = traj.len();
    let eig0 = traj.eta[0].herm_eig_unchecked();
    let gap0 = eig0.min_gap();
    if gap0 <= gap_tol {
        return Err(Error::DegenerateSpectrum {
            gap: gap0,
            gap_tol,
        });
    }

    let mut branches: Vec<EigenBranch> = (0..dim)
        .map(|n| {
            EigenBranch {
                index: n,
                lambda: eig0.eigenvalues[n],
                lambdas: Vec::with_capacity(npts),
                vectors: Vec::with_capacity(npts),
                raw: Vec::with_capacity(npts),
                min_gap: f64::INFINITY,
                eig_residuals: Vec::with_capacity(npts),
            }
        })
        .collect();
    let mut prev_raw: Vec<StateVector> = eig0.vectors.clone();
    for (n, b) in branches.iter_mut().enumerate() {
        let scale = traj.eta[0].frob_norm();
        let res = (&traj.eta[0].apply(&eig0.vectors[n])
            - &eig0.vectors[n].scale(C64::new(eig0.eigenvalues[n], 0.0)))
            .norm();
        b.lambdas.push(eig0.eigenvalues[n]);
        b.vectors.push(eig0.vectors[n].clone());
        b.raw.push(eig0.vectors[n].clone());
        b.eig_residuals.push(res / scale.max(1e-300));
        let gap = neighbor_gap(&eig0.eigenvalues, n);
        b.min_gap = b.min_gap.min(gap);
    }

    for k in 1..npts {
        let eig = traj.eta[k].herm_eig_unchecked();
        let gap = eig.min_gap();
        let scale = traj.eta[k].frob_norm().max(1e-300);
        let mut used = vec![false; dim];
        for b in branches.iter_mut() {
            let prev = &prev_raw[b.index];
            let mut best = None;
            let mut best_ov = -1.0f64;
            for (j, cand) in eig.vectors.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let ov = prev.inner(cand).norm();
                if ov > best_ov {
                    best_ov = ov;
                    best = Some(j);
                }
            }
            let j = best.expect("candidate available");
            if best_ov <= overlap_floor || gap <= gap_tol {
                return Err(Error::BranchCrossing {
                    step: k,
                    gap,
                    overlap: best_ov,
                });
            }
            used[j] = true;
            let raw = eig.vectors[j].clone();
            let overlap = b.vectors.last().unwrap().inner(&raw);
            let phase = overlap / C64::new(overlap.norm().max(1e-300), 0.0);
            let cont = raw.scale(phase.conj());
            let res = (&traj.eta[k].apply(&raw)
                - &raw.scale(C64::new(eig.eigenvalues[j], 0.0)))
                .norm();
            b.lambdas.push(eig.eigenvalues[j]);
            b.vectors.push(cont);
            b.raw.push(raw);
            b.eig_residuals.push(res / scale);
            b.min_gap = b.min_gap.min(neighbor_gap(&eig.eigenvalues, j));
        }
        for b in branches.iter() {
            prev_raw[b.index] = b.raw[k].clone();
        }
    }
    Ok(branches)
}

fn neighbor_gap(sorted_eigenvalues: &[f64], n: usize) -> f64 {
    let mut gap = f64::INFINITY;
    if n > 0 {
        gap = gap.min(sorted_eigenvalues[n] - sorted_eigenvalues[n - 1]);
    }
    if n + 1 < sorted_eigenvalues.len() {
        gap = gap.min(sorted_eigenvalues[n + 1] - sorted_eigenvalues[n]);
    }
    gap
}

/// δ_n(t_k) = −(1/ħ)∫⟨v, H v⟩dt by cumulative trapezoid.
pub fn dynamical_phase(
    branch: &EigenBranch,
    h: &HamiltonianSpec,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let npts = branch.len();
    let mut integrand = Vec::with_capacity(npts);
    for k in 0..npts {
        let t = grid.time(k);
        let hk = h.evaluate(t)?;
        let v = &branch.vectors[k];
        let e = v.inner(&hk.apply(v));
        if h.is_hermitian() {
            let tol = 1e-8 * hk.frob_norm().max(1.0);
            if e.im.abs() > tol {
                return Err(Error::NonRealExpectation { t, imag: e.im });
            }
        }
        integrand.push(-e.re / grid.hbar);
    }
    let dt = grid.dt();
    let mut delta = Vec::with_capacity(npts);
    delta.push(0.0);
    for k in 1..npts {
        let prev = delta[k - 1];
        delta.push(prev + dt * (integrand[k - 1] + integrand[k]) / 2.0);
    }
    Ok(delta)
}

/// γ(t_k) = −Σ_{j<k} arg⟨w_j, w_{j+1}⟩, cumulative, not wrapped. Valid in
/// any gauge of `chain`, including one with per-point phase jumps.
pub fn pancharatnam_sum(chain: &[StateVector]) -> Vec<f64> {
    let mut gamma = Vec::with_capacity(chain.len());
    gamma.push(0.0);
    for k in 1..chain.len() {
        let ov = chain[k - 1].inner(&chain[k]);
        gamma.push(gamma[k - 1] - ov.arg());
    }
    gamma
}

/// γ_n over the raw solver-gauge chain.
pub fn geometric_phase(branch: &EigenBranch) -> Vec<f64> {
    pancharatnam_sum(&branch.raw)
}

/// Rotate each raw vector so its overlap with the t0 vector is real and
/// positive. This gauge is smooth wherever that overlap stays away from
/// zero; returns None once it drops below 0.2.
pub fn reference_gauge_chain(branch: &EigenBranch) -> Option<Vec<StateVector>> {
    let r = &branch.raw[0];
    branch
        .raw
        .iter()
        .map(|v| {
            let ov = r.inner(v);
            if ov.norm() < 0.2 {
                return None;
            }
            Some(v.scale((ov / ov.norm()).conj()))
        })
        .collect()
}

/// Quadrature route: trapezoid over the discrete Berry connection
/// −Im⟨w, dw/dt⟩ with central differences (one-sided second order at the
/// ends). Agrees with the Pancharatnam sum at O(Δt²) when `chain` is smooth.
pub fn berry_quadrature(chain: &[StateVector]) -> Vec<f64> {
    let n = chain.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let w = chain;
    let mut conn = Vec::with_capacity(n);
    for k in 0..n {
        let d = if k == 0 {
            &(&w[1].scale(C64::new(4.0, 0.0)) - &w[2]) - &w[0].scale(C64::new(3.0, 0.0))
        } else if k == n - 1 {
            &(&w[n - 1].scale(C64::new(3.0, 0.0)) - &w[n - 2].scale(C64::new(4.0, 0.0)))
                + &w[n - 3]
        } else {
            &w[k + 1] - &w[k - 1]
        };
        conn.push(-w[k].inner(&d).im / 2.0);
    }
    let mut gamma = Vec::with_capacity(n);
    gamma.push(0.0);
    for k in 1..n {
        gamma.push(gamma[k - 1] + (conn[k - 1] + conn[k]) / 2.0);
    }
    gamma
}

/// Full decomposition for every branch.
pub fn phase_decomposition(
    branches: &[EigenBranch],
    h: &HamiltonianSpec,
    grid: &TimeGrid,
) -> Result<PhaseDecomposition> {
    let mut delta = Vec::with_capacity(branches.len());
    let mut gamma = Vec::with_capacity(branches.len());
    for b in branches {
        delta.push(dynamical_phase(b, h, grid)?);
        gamma.push(geometric_phase(b));
    }
    Ok(PhaseDecomposition { delta, gamma })
}

/// U(t_k, t0) = Σ_n e^{iα_n}|λ_n;t_k⟩⟨λ_n;t0| from the tracked branches.
pub fn reconstruct_evolution(
    branches: &[EigenBranch],
    decomposition: &PhaseDecomposition,
    k: usize,
) -> Result<Operator> {
    if branches.is_empty() {
        return Err(Error::IncompleteBranchSet {
            expected: 0,
            got: 0,
        });
    }
    let dim = branches[0].raw[0].dim();
    if branches.len() != dim {
        return Err(Error::IncompleteBranchSet {
            expected: dim,
            got: branches.len(),
        });
    }
    let mut m = nalgebra::DMatrix::<C64>::zeros(dim, dim);
    for (n, b) in branches.iter().enumerate() {
        let alpha = decomposition.alpha(n, k);
        let phase = C64::new(0.0, alpha).exp();
        let ket = b.raw[k].as_dvector();
        let bra = b.raw[0].as_dvector().adjoint();
        m += (ket * bra) * phase;
    }
    Operator::new(m)
}

/// Dynamical and closed-loop geometric phase over `period_steps` steps.
/// The geometric part includes the closing overlap, making it a fully
/// gauge-invariant Pancharatnam loop value.
pub fn cyclic_phase(
    branch: &EigenBranch,
    delta: &[f64],
    period_steps: usize,
    cyc_tol: f64,
) -> Result<(f64, f64)> {
    if period_steps >= branch.len() || period_steps == 0 {
        return Err(Error::Validation {
            field: "period_steps".into(),
            reason: format!(
                "period must land inside the trajectory (len {})",
                branch.len()
            ),
        });
    }
    let v0 = &branch.raw[0];
    let vt = &branch.raw[period_steps];
    let overlap = v0.inner(vt);
    if overlap.norm() <= 1.0 - cyc_tol {
        return Err(Error::NotCyclic {
            overlap: overlap.norm(),
        });
    }
    let mut gamma = 0.0;
    for k in 1..=period_steps {
        gamma -= branch.raw[k - 1].inner(&branch.raw[k]).arg();
    }
    gamma -= vt.inner(v0).arg();
    Ok((delta[period_steps], gamma))
}
