//! Time-ordered propagators on uniform grids via midpoint-exponential
//! stepping, with unitarity and convergence diagnostics.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::operator::{Operator, StateVector};
use crate::{Result, DEFAULT_HERM_TOL};

/// Uniform time grid on [t0, t1] with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub hbar: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize, hbar: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::Validation {
                field: "time".into(),
                reason: format!("need finite t1 > t0, got [{t0}, {t1}]"),
            });
        }
        if steps < 1 {
            return Err(Error::Validation {
                field: "time.steps".into(),
                reason: "steps must be >= 1".into(),
            });
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Validation {
                field: "hbar".into(),
                reason: "hbar must be positive".into(),
            });
        }
        Ok(TimeGrid { t0, t1, steps, hbar })
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + self.dt() * k as f64
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same span with the step count divided by `factor`.
    pub fn coarsened(&self, factor: usize) -> Result<TimeGrid> {
        TimeGrid::new(self.t0, self.t1, self.steps / factor, self.hbar)
    }
}

/// Time-dependent Hamiltonian families evaluated on demand.
#[derive(Debug, Clone)]
pub enum HamiltonianKind {
    Constant {
        matrix: Operator,
    },
    /// H(t) = (ħ/2)[ω₁cos(ωt)σ_x + ω₁sin(ωt)σ_y + ω₀σ_z], dim 2.
    PauliRotating {
        omega0: f64,
        omega1: f64,
        omega: f64,
    },
    /// matrices[i] applies on [times[i], times[i+1]); the last extends forward.
    PiecewiseConstant {
        times: Vec<f64>,
        matrices: Vec<Operator>,
    },
    /// Linear interpolation between samples; evaluation outside the sampled
    /// span fails.
    Sampled {
        times: Vec<f64>,
        matrices: Vec<Operator>,
    },
    /// H(t) = base + cos(νt)·cos_term + sin(νt)·sin_term.
    Fourier {
        base: Operator,
        cos_term: Operator,
        sin_term: Operator,
        nu: f64,
    },
}

#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    dim: usize,
    hermitian: bool,
    kind: HamiltonianKind,
    hbar: f64,
}

impl HamiltonianSpec {
    pub fn new(kind: HamiltonianKind, hbar: f64) -> Result<Self> {
        let dim = match &kind {
            HamiltonianKind::Constant { matrix } => matrix.dim(),
            HamiltonianKind::PauliRotating { .. } => 2,
            HamiltonianKind::PiecewiseConstant { times, matrices }
            | HamiltonianKind::Sampled { times, matrices } => {
                if matrices.is_empty() || times.len() != matrices.len() {
                    return Err(Error::Validation {
                        field: "hamiltonian.times".into(),
                        reason: "times and matrices must be equally sized and nonempty"
                            .into(),
                    });
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Validation {
                        field: "hamiltonian.times".into(),
                        reason: "times must be strictly increasing".into(),
                    });
                }
                let d = matrices[0].dim();
                if matrices.iter().any(|m| m.dim() != d) {
                    return Err(Error::Validation {
                        field: "hamiltonian.matrices".into(),
                        reason: "inconsistent dimensions".into(),
                    });
                }
                d
            }
            HamiltonianKind::Fourier {
                base,
                cos_term,
                sin_term,
                ..
            } => {
                let d = base.dim();
                if cos_term.dim() != d || sin_term.dim() != d {
                    return Err(Error::Validation {
                        field: "hamiltonian".into(),
                        reason: "inconsistent dimensions".into(),
                    });
                }
                d
            }
        };
        let hermitian = match &kind {
            HamiltonianKind::Constant { matrix } => matrix.is_hermitian(DEFAULT_HERM_TOL),
            HamiltonianKind::PauliRotating { .. } => true,
            HamiltonianKind::PiecewiseConstant { matrices, .. }
            | HamiltonianKind::Sampled { matrices, .. } => matrices
                .iter()
                .all(|m| m.is_hermitian(DEFAULT_HERM_TOL)),
            HamiltonianKind::Fourier {
                base,
                cos_term,
                sin_term,
                ..
            } => {
                base.is_hermitian(DEFAULT_HERM_TOL)
                    && cos_term.is_hermitian(DEFAULT_HERM_TOL)
                    && sin_term.is_hermitian(DEFAULT_HERM_TOL)
            }
        };
        Ok(HamiltonianSpec {
            dim,
            hermitian,
            kind,
            hbar,
        })
    }

    pub fn constant(matrix: Operator) -> Result<Self> {
        Self::new(HamiltonianKind::Constant { matrix }, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn kind(&self) -> &HamiltonianKind {
        &self.kind
    }

    pub fn evaluate(&self, t: f64) -> Result<Operator> {
        match &self.kind {
            HamiltonianKind::Constant { matrix } => Ok(matrix.clone()),
            HamiltonianKind::PauliRotating {
                omega0,
                omega1,
                omega,
            } => {
                let [sx, sy, sz, _] = crate::operator::pauli();
                let c = (omega * t).cos();
                let s = (omega * t).sin();
                let h = &(&sx.scale_re(omega1 * c) + &sy.scale_re(omega1 * s))
                    + &sz.scale_re(*omega0);
                Ok(h.scale_re(self.hbar / 2.0))
            }
            HamiltonianKind::PiecewiseConstant { times, matrices } => {
                if t < times[0] - 1e-12 {
                    return Err(Error::EvaluationFailure {
                        t,
                        reason: format!("before first segment start {}", times[0]),
                    });
                }
                let idx = match times.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(i) => i,
                    Err(0) => 0,
                    Err(i) => i - 1,
                };
                Ok(matrices[idx].clone())
            }
            HamiltonianKind::Sampled { times, matrices } => {
                let first = times[0];
                let last = *times.last().unwrap();
                if t < first - 1e-12 || t > last + 1e-12 {
                    return Err(Error::EvaluationFailure {
                        t,
                        reason: format!("outside sampled span [{first}, {last}]"),
                    });
                }
                let t = t.clamp(first, last);
                let idx = match times.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(i) => return Ok(matrices[i].clone()),
                    Err(i) => i,
                };
                let (lo, hi) = (idx - 1, idx);
                let w = (t - times[lo]) / (times[hi] - times[lo]);
                Ok(&matrices[lo].scale_re(1.0 - w) + &matrices[hi].scale_re(w))
            }
            HamiltonianKind::Fourier {
                base,
                cos_term,
                sin_term,
                nu,
            } => Ok(&(base + &cos_term.scale_re((nu * t).cos()))
                + &sin_term.scale_re((nu * t).sin())),
        }
    }

    /// Max over grid points of ‖H(t)‖_F; used for tolerance budgets.
    pub fn norm_bound(&self, grid: &TimeGrid) -> Result<f64> {
        let mut m = 0.0f64;
        for k in 0..grid.len() {
            m = m.max(self.evaluate(grid.time(k))?.frob_norm());
        }
        Ok(m)
    }
}

/// Propagator samples U(t_k, t0) with per-point unitarity defects.
#[derive(Debug, Clone)]
pub struct PropagatorTrace {
    pub grid: TimeGrid,
    pub u: Vec<Operator>,
    pub unitarity_defect: Vec<f64>,
    /// Fitted constant of the defect budget C·Δt².
    pub fitted_c: f64,
}

impl PropagatorTrace {
    pub fn max_unitarity_defect(&self) -> f64 {
        self.unitarity_defect.iter().copied().fold(0.0, f64::max)
    }
}

/// Midpoint-exponential stepping: U_{k+1} = exp(−(i/ħ)·Δt·H(t_k + Δt/2))·U_k.
pub fn evolve(h: &HamiltonianSpec, grid: &TimeGrid) -> Result<PropagatorTrace> {
    let n = h.dim();
    let dt = grid.dt();
    let mut u = Vec::with_capacity(grid.len());
    let mut defects = Vec::with_capacity(grid.len());
    let id = Operator::identity(n);
    u.push(id.clone());
    defects.push(0.0);

    let constant_step = match h.kind() {
        HamiltonianKind::Constant { matrix } => {
            Some(step_exponential(matrix, dt, grid.hbar))
        }
        _ => None,
    };
    let mut cached: Option<(usize, Operator)> = None;

    for k in 0..grid.steps {
        let tm = grid.time(k) + dt / 2.0;
        let step = if let Some(s) = &constant_step {
            s.clone()
        } else if let HamiltonianKind::PiecewiseConstant { times, .. } = h.kind() {
            let seg = match times.binary_search_by(|x| x.total_cmp(&tm)) {
                Ok(i) => i,
                Err(0) => 0,
                Err(i) => i - 1,
            };
            match &cached {
                Some((s, op)) if *s == seg => op.clone(),
                _ => {
                    let op = step_exponential(&h.evaluate(tm)?, dt, grid.hbar);
                    cached = Some((seg, op.clone()));
                    op
                }
            }
        } else {
            step_exponential(&h.evaluate(tm)?, dt, grid.hbar)
        };
        let next = &step * u.last().unwrap();
        defects.push(unitarity_defect(&next));
        u.push(next);
    }

    let fitted_c = defects.iter().copied().fold(0.0, f64::max) / (dt * dt);
    Ok(PropagatorTrace {
        grid: *grid,
        u,
        unitarity_defect: defects,
        fitted_c,
    })
}

fn step_exponential(h_mid: &Operator, dt: f64, hbar: f64) -> Operator {
    h_mid.scale(C64::new(0.0, -dt / hbar)).matrix_exp()
}

fn unitarity_defect(u: &Operator) -> f64 {
    (&(&u.adjoint() * u) - &Operator::identity(u.dim())).frob_norm()
}

/// ψ(t_k) = U_k ψ0 for every grid point.
pub fn solve_schrodinger(
    h: &HamiltonianSpec,
    psi0: &StateVector,
    grid: &TimeGrid,
) -> Result<Vec<StateVector>> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi0.dim(),
        });
    }
    let trace = evolve(h, grid)?;
    Ok(trace.u.iter().map(|u| u.apply(psi0)).collect())
}

/// Observed convergence order from Richardson ratios at steps, steps/2, steps/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceOrder {
    /// Differences at machine noise; the stepping is exact for this input.
    Exact,
    Order(f64),
}

impl ConvergenceOrder {
    pub fn as_f64(&self) -> f64 {
        match self {
            ConvergenceOrder::Exact => f64::NAN,
            ConvergenceOrder::Order(p) => *p,
        }
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        match self {
            ConvergenceOrder::Exact => true,
            ConvergenceOrder::Order(p) => *p >= lo && *p <= hi,
        }
    }
}

pub fn convergence_order(h: &HamiltonianSpec, grid: &TimeGrid) -> Result<ConvergenceOrder> {
    if !grid.steps.is_multiple_of(4) || grid.steps < 8 {
        return Err(Error::Validation {
            field: "time.steps".into(),
            reason: "convergence measurement needs steps divisible by 4".into(),
        });
    }
    let fine = evolve(h, grid)?;
    let half = evolve(h, &grid.coarsened(2)?)?;
    let quarter = evolve(h, &grid.coarsened(4)?)?;
    let uf = fine.u.last().unwrap();
    let uh = half.u.last().unwrap();
    let uq = quarter.u.last().unwrap();
    let d1 = (uf - uh).frob_norm();
    let d2 = (uh - uq).frob_norm();
    let scale = uf.frob_norm().max(1.0);
    if d1 < 1e-13 * scale || d2 < 1e-13 * scale {
        return Ok(ConvergenceOrder::Exact);
    }
    Ok(ConvergenceOrder::Order((d2 / d1).log2()))
}
