//! Lindblad-type extension of the invariant equation: the metric itself is
//! evolved under iħ[dη/dt + D(η)] = H†η − ηH, the generalized (generally
//! nonunitary) evolution operator is rebuilt spectrally, and the departure
//! from η-unitarity is quantified.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::metric::{MetricTrajectory, PositivityLoss, Provenance};
use crate::operator::Operator;
use crate::phases::{
    phase_decomposition, track_eigenbranches, EigenBranch, PhaseDecomposition,
};
use crate::propagator::{HamiltonianSpec, TimeGrid};
use crate::{Result, COND_LIMIT, DEFAULT_PD_TOL};

/// Jump operators A_j, square-root-of-rate convention: entries are scaled so
/// D(η) carries the same units as (1/ħ)[H, η].
#[derive(Debug, Clone)]
pub struct LindbladSet {
    pub ops: Vec<Operator>,
}

impl LindbladSet {
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        if let Some(first) = ops.first() {
            let d = first.dim();
            if ops.iter().any(|a| a.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: ops.iter().map(|a| a.dim()).find(|&x| x != d).unwrap(),
                });
            }
        }
        Ok(LindbladSet { ops })
    }

    pub fn empty() -> Self {
        LindbladSet { ops: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// D(η) = ½ Σ_j ([A_j†, A_j η] + [η A_j†, A_j]).
pub fn dissipator(eta: &Operator, l: &LindbladSet) -> Result<Operator> {
    let dim = eta.dim();
    let mut out = Operator::zeros(dim);
    for a in &l.ops {
        if a.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: a.dim(),
            });
        }
        let ad = a.adjoint();
        let first = ad.commutator(&(a * eta))?;
        let second = (eta * &ad).commutator(a)?;
        out = &out + &(&first + &second).scale_re(0.5);
    }
    Ok(out)
}

/// RK4 integration of dη/dt = −(i/ħ)(H†η − ηH) − D(η) with per-step
/// symmetrization and positivity monitoring. Positivity loss is recorded on
/// the trajectory, not raised.
pub fn evolve_metric_lindblad(
    h: &HamiltonianSpec,
    eta0: &Operator,
    l: &LindbladSet,
    grid: &TimeGrid,
) -> Result<MetricTrajectory> {
    let min0 = eta0.min_eigenvalue();
    if !eta0.is_hermitian(crate::DEFAULT_HERM_TOL) || min0 <= DEFAULT_PD_TOL {
        return Err(Error::NotPositiveDefinite { min_eig: min0 });
    }
    if eta0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: eta0.dim(),
        });
    }
    let dt = grid.dt();
    let pd_floor = DEFAULT_PD_TOL * eta0.frob_norm();
    let rhs = |t: f64, eta: &Operator| -> Result<Operator> {
        let hk = h.evaluate(t)?;
        let comm = &(&hk.adjoint() * eta) - &(eta * &hk);
        let mut f = comm.scale(C64::new(0.0, -1.0 / grid.hbar));
        if !l.is_empty() {
            f = &f - &dissipator(eta, l)?;
        }
        Ok(f)
    };

    let mut eta = Vec::with_capacity(grid.len());
    let mut min_eigs = Vec::with_capacity(grid.len());
    let mut positivity_lost = None;
    let mut sym_defect = 0.0f64;
    let mut current = eta0.clone();
    eta.push(current.clone());
    min_eigs.push(min0);

    for k in 0..grid.steps {
        let t = grid.time(k);
        let k1 = rhs(t, &current)?;
        let k2 = rhs(t + dt / 2.0, &(&current + &k1.scale_re(dt / 2.0)))?;
        let k3 = rhs(t + dt / 2.0, &(&current + &k2.scale_re(dt / 2.0)))?;
        let k4 = rhs(t + dt, &(&current + &k3.scale_re(dt)))?;
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_re(2.0);
        let raw = &current + &incr.scale_re(dt / 6.0);
        let symmetrized = raw.sym();
        sym_defect = sym_defect.max((&symmetrized - &raw).frob_norm());
        current = symmetrized;
        let me = current.min_eigenvalue();
        min_eigs.push(me);
        if me <= pd_floor && positivity_lost.is_none() {
            positivity_lost = Some(PositivityLoss {
                step: k + 1,
                t: grid.time(k + 1),
                min_eig: me,
            });
        }
        eta.push(current.clone());
    }

    Ok(MetricTrajectory {
        grid: *grid,
        eta0: eta0.clone(),
        eta,
        provenance: if l.is_empty() {
            Provenance::OdeLvn
        } else {
            Provenance::OdeLindblad
        },
        min_eigs,
        symmetrization_defect: sym_defect,
        positivity_lost,
    })
}

/// Spectral generalized evolution built from the tracked branches of an
/// integrated metric trajectory.
pub struct GeneralizedEvolution {
    pub u: Vec<Operator>,
    pub branches: Vec<EigenBranch>,
    pub decomposition: PhaseDecomposition,
}

impl GeneralizedEvolution {
    /// max_n max_k |λ_n(t_k) − λ_n(t0)|; nonzero only under dissipation.
    pub fn lambda_drift(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.lambda_drift())
            .fold(0.0, f64::max)
    }
}

/// U(t_k, t0) = Σ_n e^{iα_n(t_k)} |λ_n;t_k⟩⟨λ_n;t0| with the phases module's
/// quadratures; branch identity is kept by overlap continuity because the
/// eigenvalues drift under dissipation.
pub fn generalized_evolution(
    h: &HamiltonianSpec,
    traj: &MetricTrajectory,
    gap_tol: f64,
) -> Result<GeneralizedEvolution> {
    if let Some(loss) = traj.positivity_lost {
        return Err(Error::PositivityLost {
            step: loss.step,
            t: loss.t,
            min_eig: loss.min_eig,
        });
    }
    let branches = track_eigenbranches(traj, gap_tol)?;
    let decomposition = phase_decomposition(&branches, h, &traj.grid)?;
    let dim = traj.dim();
    let mut u = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let mut m = nalgebra::DMatrix::<C64>::zeros(dim, dim);
        for (n, b) in branches.iter().enumerate() {
            let phase = C64::new(0.0, decomposition.alpha(n, k)).exp();
            m += (b.raw[k].as_dvector() * b.raw[0].as_dvector().adjoint()) * phase;
        }
        u.push(Operator::new(m)?);
    }
    Ok(GeneralizedEvolution {
        u,
        branches,
        decomposition,
    })
}

/// H′(t_k) = iħ (dU/dt)_k U_k⁻¹ with second-order differences.
pub fn effective_hamiltonian(u_seq: &[Operator], grid: &TimeGrid) -> Result<Vec<Operator>> {
    let npts = u_seq.len();
    if npts < 3 {
        return Err(Error::Validation {
            field: "u_seq".into(),
            reason: "need at least 3 points to differentiate".into(),
        });
    }
    let dt = grid.dt();
    let mut out = Vec::with_capacity(npts);
    for k in 0..npts {
        let du = if k == 0 {
            &(&u_seq[1].scale_re(4.0) - &u_seq[2]) - &u_seq[0].scale_re(3.0)
        } else if k == npts - 1 {
            &(&u_seq[k].scale_re(3.0) - &u_seq[k - 1].scale_re(4.0)) + &u_seq[k - 2]
        } else {
            &u_seq[k + 1] - &u_seq[k - 1]
        }
        .scale_re(1.0 / (2.0 * dt));
        let (inv, cond) = u_seq[k]
            .inverse()
            .ok_or(Error::SingularEvolution { step: k, cond: f64::INFINITY })?;
        if cond > COND_LIMIT {
            return Err(Error::SingularEvolution { step: k, cond });
        }
        out.push((&du * &inv).scale(C64::new(0.0, grid.hbar)));
    }
    Ok(out)
}

/// Hermiticity defect of H′ against the fixed inner product.
pub fn hprime_defect_fixed(hprime: &Operator) -> f64 {
    hprime.herm_defect()
}

/// Hermiticity defect of H′ against the η(t_k) inner product:
/// ‖H′ − η⁻¹H′†η‖_F.
pub fn hprime_defect_eta(hprime: &Operator, eta: &Operator) -> Result<f64> {
    let inv = eta.pd_inverse(DEFAULT_PD_TOL)?;
    let twisted = &(&inv * &hprime.adjoint()) * eta;
    Ok((&twisted - hprime).frob_norm())
}

/// ‖U_k^♯ U_k − 1‖_F per point with U^♯ = η(t0)⁻¹ U† η(t_k).
pub fn nonunitarity_wrt_eta(u_seq: &[Operator], traj: &MetricTrajectory) -> Result<Vec<f64>> {
    if u_seq.len() != traj.len() {
        return Err(Error::DimensionMismatch {
            expected: traj.len(),
            got: u_seq.len(),
        });
    }
    let eta0_inv = traj.eta0.pd_inverse(DEFAULT_PD_TOL)?;
    let id = Operator::identity(traj.dim());
    let mut out = Vec::with_capacity(u_seq.len());
    for (u, eta) in u_seq.iter().zip(traj.eta.iter()) {
        let sharp = &(&eta0_inv * &u.adjoint()) * eta;
        out.push((&(&sharp * u) - &id).frob_norm());
    }
    Ok(out)
}
