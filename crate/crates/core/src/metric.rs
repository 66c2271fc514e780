//! Metric operators evolved as dynamical invariants, by propagator
//! conjugation or direct integration, with defining-equation residuals.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::operator::{eta_inner, Operator, StateVector};
use crate::propagator::{evolve, HamiltonianSpec, TimeGrid};
use crate::{Result, COND_LIMIT, DEFAULT_HERM_TOL, DEFAULT_PD_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ConjugationHermitian,
    ConjugationGeneral,
    OdeLvn,
    OdeLindblad,
}

/// First step at which the monitored minimum eigenvalue crossed the floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityLoss {
    pub step: usize,
    pub t: f64,
    pub min_eig: f64,
}

#[derive(Debug, Clone)]
pub struct MetricTrajectory {
    pub grid: TimeGrid,
    pub eta0: Operator,
    pub eta: Vec<Operator>,
    pub provenance: Provenance,
    /// Monitored minimum eigenvalue per point (integrated provenances only).
    pub min_eigs: Vec<f64>,
    /// Largest per-step hermiticity correction applied during integration.
    pub symmetrization_defect: f64,
    pub positivity_lost: Option<PositivityLoss>,
}

impl MetricTrajectory {
    pub fn dim(&self) -> usize {
        self.eta0.dim()
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// max_k max_n |λ_n(t_k) − λ_n(t0)| over the sorted spectra.
    pub fn eigenvalue_drift(&self) -> f64 {
        let base = self.eta0.herm_eig_unchecked().eigenvalues;
        let mut drift = 0.0f64;
        for eta in &self.eta {
            let ev = eta.herm_eig_unchecked().eigenvalues;
            for (a, b) in ev.iter().zip(base.iter()) {
                drift = drift.max((a - b).abs());
            }
        }
        drift
    }

    pub fn max_herm_defect(&self) -> f64 {
        self.eta.iter().map(|e| e.herm_defect()).fold(0.0, f64::max)
    }
}

fn check_eta0(eta0: &Operator, dim: usize) -> Result<()> {
    if eta0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: eta0.dim(),
        });
    }
    let min_eig = eta0.min_eigenvalue();
    if !eta0.is_hermitian(DEFAULT_HERM_TOL) || min_eig <= DEFAULT_PD_TOL {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    Ok(())
}

/// η(t_k) = U_k η₀ U_k† for Hermitian H.
pub fn evolve_metric_hermitian(
    h: &HamiltonianSpec,
    eta0: &Operator,
    grid: &TimeGrid,
) -> Result<MetricTrajectory> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            defect: f64::NAN,
            tol: DEFAULT_HERM_TOL,
        });
    }
    check_eta0(eta0, h.dim())?;
    let trace = evolve(h, grid)?;
    let eta = trace
        .u
        .iter()
        .map(|u| (&(u * eta0) * &u.adjoint()).sym())
        .collect();
    Ok(MetricTrajectory {
        grid: *grid,
        eta0: eta0.clone(),
        eta,
        provenance: Provenance::ConjugationHermitian,
        min_eigs: Vec::new(),
        symmetrization_defect: 0.0,
        positivity_lost: None,
    })
}

/// η(t_k) = (U_k⁻¹)† η₀ U_k⁻¹, valid for arbitrary (non-Hermitian) H.
pub fn evolve_metric_general(
    h: &HamiltonianSpec,
    eta0: &Operator,
    grid: &TimeGrid,
) -> Result<MetricTrajectory> {
    check_eta0(eta0, h.dim())?;
    let trace = evolve(h, grid)?;
    let mut eta = Vec::with_capacity(trace.u.len());
    for (k, u) in trace.u.iter().enumerate() {
        let (uinv, cond) = u
            .inverse()
            .ok_or(Error::SingularPropagator { step: k, cond: f64::INFINITY })?;
        if cond > COND_LIMIT {
            return Err(Error::SingularPropagator { step: k, cond });
        }
        eta.push((&(&uinv.adjoint() * eta0) * &uinv).sym());
    }
    Ok(MetricTrajectory {
        grid: *grid,
        eta0: eta0.clone(),
        eta,
        provenance: Provenance::ConjugationGeneral,
        min_eigs: Vec::new(),
        symmetrization_defect: 0.0,
        positivity_lost: None,
    })
}

/// Max interior-point residual of iħ·dη/dt = H†η − ηH, central differences.
pub fn lvn_residual(h: &HamiltonianSpec, traj: &MetricTrajectory) -> Result<f64> {
    if traj.len() < 3 {
        return Err(Error::Validation {
            field: "trajectory".into(),
            reason: "need at least 3 points for a central difference".into(),
        });
    }
    let grid = &traj.grid;
    let dt = grid.dt();
    let mut worst = 0.0f64;
    for k in 1..traj.len() - 1 {
        let hk = h.evaluate(grid.time(k))?;
        let etak = &traj.eta[k];
        let deriv = (&traj.eta[k + 1] - &traj.eta[k - 1])
            .scale(C64::new(0.0, grid.hbar / (2.0 * dt)));
        let rhs = &(&hk.adjoint() * etak) - &(etak * &hk);
        worst = worst.max((&deriv - &rhs).frob_norm());
    }
    Ok(worst)
}

/// I² + 1: positive-definite whenever I is Hermitian, and an invariant
/// whenever I is.
pub fn make_positive_invariant(inv: &Operator) -> Result<Operator> {
    let defect = inv.herm_defect() / inv.frob_norm().max(1.0);
    if defect > DEFAULT_HERM_TOL {
        return Err(Error::NotHermitian {
            defect,
            tol: DEFAULT_HERM_TOL,
        });
    }
    Ok(&(inv * inv) + &Operator::identity(inv.dim()))
}

/// max_k |⟨ψ_k, η_k φ_k⟩ − ⟨ψ0, η0 φ0⟩| along Schrödinger solutions of H.
pub fn conserved_inner_product_check(
    h: &HamiltonianSpec,
    traj: &MetricTrajectory,
    psi0: &StateVector,
    phi0: &StateVector,
) -> Result<f64> {
    if psi0.dim() != h.dim() || phi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi0.dim().max(phi0.dim()),
        });
    }
    let trace = evolve(h, &traj.grid)?;
    let reference = eta_inner(psi0, phi0, &traj.eta0)?;
    let mut drift = 0.0f64;
    for (u, eta) in trace.u.iter().zip(traj.eta.iter()) {
        let v = eta_inner(&u.apply(psi0), &u.apply(phi0), eta)?;
        drift = drift.max((v - reference).norm());
    }
    Ok(drift)
}
