//! Metric-changing symmetry maps: ρ(t)⁻¹ trajectories, transformed
//! Hamiltonians and observables, the H₂ = H invariance defect, expectation
//! invariance, metric permutations, and geometric-equivalence tests.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::metric::{lvn_residual, MetricTrajectory};
use crate::operator::{eta_inner, Operator, StateVector};
use crate::propagator::{evolve, HamiltonianSpec, TimeGrid};
use crate::{Result, COND_LIMIT, DEFAULT_HERM_TOL, DEFAULT_PD_TOL};

/// Inner-product family a map connects: one fixed operator or a per-point
/// trajectory.
#[derive(Debug, Clone)]
pub enum MetricFamily {
    Fixed(Operator),
    Trajectory(Vec<Operator>),
}

impl MetricFamily {
    pub fn at(&self, k: usize) -> &Operator {
        match self {
            MetricFamily::Fixed(m) => m,
            MetricFamily::Trajectory(v) => &v[k],
        }
    }
}

/// Time-dependent map V(t_k) between two metricked spaces.
#[derive(Debug, Clone)]
pub struct UnitaryMapTrajectory {
    pub grid: TimeGrid,
    pub v: Vec<Operator>,
    pub source_metric: MetricFamily,
    pub target_metric: MetricFamily,
}

impl UnitaryMapTrajectory {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// max_k |⟨Vψ, η_tgt Vφ⟩ − ⟨ψ, η_src φ⟩| over the supplied probe pairs.
    pub fn isometry_defect(&self, pairs: &[(StateVector, StateVector)]) -> Result<f64> {
        let mut worst = 0.0f64;
        for (psi, phi) in pairs {
            for k in 0..self.len() {
                let lhs = eta_inner(
                    &self.v[k].apply(psi),
                    &self.v[k].apply(phi),
                    self.target_metric.at(k),
                )?;
                let rhs = eta_inner(psi, phi, self.source_metric.at(k))?;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok(worst)
    }
}

/// Observable with a declared metric for its hermiticity.
#[derive(Debug, Clone)]
pub struct Observable {
    pub matrix: Operator,
    pub label: String,
}

impl Observable {
    pub fn new(matrix: Operator, label: impl Into<String>) -> Self {
        Observable {
            matrix,
            label: label.into(),
        }
    }

    /// ‖η⁻¹A†η − A‖_F, zero when A is Hermitian w.r.t. the η inner product.
    pub fn metric_hermiticity_defect(&self, eta: &Operator) -> Result<f64> {
        let eta_inv = eta.pd_inverse(DEFAULT_PD_TOL)?;
        let twisted = &(&eta_inv * &self.matrix.adjoint()) * eta;
        Ok((&twisted - &self.matrix).frob_norm())
    }
}

/// V_k = U_k η₀^{−1/2} U_k†, the isometry from the fixed inner product onto
/// the η(t) inner product; equals pd_inv_sqrt(η(t_k)).
pub fn rho_inverse_trajectory(
    h: &HamiltonianSpec,
    eta0: &Operator,
    grid: &TimeGrid,
) -> Result<UnitaryMapTrajectory> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian {
            defect: f64::NAN,
            tol: DEFAULT_HERM_TOL,
        });
    }
    let inv_sqrt = eta0.pd_inv_sqrt(DEFAULT_PD_TOL)?;
    let trace = evolve(h, grid)?;
    let mut v = Vec::with_capacity(trace.u.len());
    let mut eta = Vec::with_capacity(trace.u.len());
    for u in &trace.u {
        v.push((&(u * &inv_sqrt) * &u.adjoint()).sym());
        eta.push((&(u * eta0) * &u.adjoint()).sym());
    }
    Ok(UnitaryMapTrajectory {
        grid: *grid,
        v,
        source_metric: MetricFamily::Fixed(Operator::identity(h.dim())),
        target_metric: MetricFamily::Trajectory(eta),
    })
}

/// H₂(t_k) = V_k H₁(t_k) V_k⁻¹ − iħ V_k (dV⁻¹/dt)_k with second-order
/// differences (central inside, one-sided at the ends).
pub fn transform_hamiltonian(
    h1: &HamiltonianSpec,
    map: &UnitaryMapTrajectory,
) -> Result<Vec<Operator>> {
    let npts = map.len();
    if npts < 3 {
        return Err(Error::Validation {
            field: "map".into(),
            reason: "need at least 3 points to differentiate".into(),
        });
    }
    let grid = &map.grid;
    let dt = grid.dt();
    let mut inv = Vec::with_capacity(npts);
    for (k, v) in map.v.iter().enumerate() {
        let (vi, cond) = v
            .inverse()
            .ok_or(Error::SingularMap { step: k, cond: f64::INFINITY })?;
        if cond > COND_LIMIT {
            return Err(Error::SingularMap { step: k, cond });
        }
        inv.push(vi);
    }
    let mut out = Vec::with_capacity(npts);
    for k in 0..npts {
        let dinv = if k == 0 {
            &(&inv[1].scale_re(4.0) - &inv[2]) - &inv[0].scale_re(3.0)
        } else if k == npts - 1 {
            &(&inv[k].scale_re(3.0) - &inv[k - 1].scale_re(4.0)) + &inv[k - 2]
        } else {
            &inv[k + 1] - &inv[k - 1]
        }
        .scale_re(1.0 / (2.0 * dt));
        let hk = h1.evaluate(grid.time(k))?;
        let similarity = &(&map.v[k] * &hk) * &inv[k];
        let gauge = (&map.v[k] * &dinv).scale(C64::new(0.0, grid.hbar));
        out.push(&similarity - &gauge);
    }
    Ok(out)
}

/// Max interior-point relative defect ‖H₂(t_k) − H(t_k)‖ / max(1, ‖H(t_k)‖).
pub fn verify_hamiltonian_invariance(
    h: &HamiltonianSpec,
    eta0: &Operator,
    grid: &TimeGrid,
) -> Result<f64> {
    let map = rho_inverse_trajectory(h, eta0, grid)?;
    let h2 = transform_hamiltonian(h, &map)?;
    let mut worst = 0.0f64;
    let interior = h2.len() - 1;
    for (k, h2k) in h2.iter().enumerate().take(interior).skip(1) {
        let hk = h.evaluate(grid.time(k))?;
        let defect = (h2k - &hk).frob_norm() / hk.frob_norm().max(1.0);
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// O₂ = V_k O V_k⁻¹ at a fixed grid point.
pub fn transform_observable(
    obs: &Observable,
    map: &UnitaryMapTrajectory,
    k: usize,
) -> Result<Observable> {
    let (inv, cond) = map.v[k]
        .inverse()
        .ok_or(Error::SingularMap { step: k, cond: f64::INFINITY })?;
    if cond > COND_LIMIT {
        return Err(Error::SingularMap { step: k, cond });
    }
    Ok(Observable {
        matrix: &(&map.v[k] * &obs.matrix) * &inv,
        label: obs.label.clone(),
    })
}

/// max_k |⟨ψ₁,O₁ψ₁⟩₁/⟨ψ₁,ψ₁⟩₁ − ⟨ψ₂,O₂ψ₂⟩_η/⟨ψ₂,ψ₂⟩_η| with ψ₂ = ρ⁻¹ψ₁ and
/// O₂ = ρ⁻¹O₁ρ.
pub fn expectation_invariance_check(
    obs: &Observable,
    h: &HamiltonianSpec,
    eta0: &Operator,
    psi0: &StateVector,
    grid: &TimeGrid,
) -> Result<f64> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: psi0.dim(),
        });
    }
    let map = rho_inverse_trajectory(h, eta0, grid)?;
    let trace = evolve(h, grid)?;
    let mut worst = 0.0f64;
    for k in 0..trace.u.len() {
        let psi1 = trace.u[k].apply(psi0);
        let lhs_num = psi1.inner(&obs.matrix.apply(&psi1));
        let lhs_den = psi1.inner(&psi1);
        let o2 = transform_observable(obs, &map, k)?;
        let psi2 = map.v[k].apply(&psi1);
        let eta_k = map.target_metric.at(k);
        let rhs_num = eta_inner(&psi2, &o2.matrix.apply(&psi2), eta_k)?;
        let rhs_den = eta_inner(&psi2, &psi2, eta_k)?;
        let diff = (lhs_num / lhs_den - rhs_num / rhs_den).norm();
        worst = worst.max(diff);
    }
    Ok(worst)
}

/// 𝒰(t₀) = η₂^{−1/2} η₁^{1/2}.
pub fn metric_permutation(eta1_0: &Operator, eta2_0: &Operator) -> Result<Operator> {
    let left = eta2_0.pd_inv_sqrt(DEFAULT_PD_TOL)?;
    let right = eta1_0.pd_sqrt(DEFAULT_PD_TOL)?;
    Ok(&left * &right)
}

/// Result of transporting 𝒰₀ along the evolution: 𝒰(t_k) = U_k 𝒰₀ U_k†,
/// mapping the η₁(t) inner product onto the η₂(t) one.
pub struct MetricPermutation {
    pub map: UnitaryMapTrajectory,
    /// ‖𝒰₀ − 𝒰₀†‖_F, invariant under the unitary transport.
    pub hermiticity_defect: f64,
}

pub fn metric_permutation_trajectory(
    h: &HamiltonianSpec,
    eta1_0: &Operator,
    eta2_0: &Operator,
    grid: &TimeGrid,
) -> Result<MetricPermutation> {
    let u0 = metric_permutation(eta1_0, eta2_0)?;
    let hermiticity_defect = u0.herm_defect();
    let trace = evolve(h, grid)?;
    let mut v = Vec::with_capacity(trace.u.len());
    let mut eta1 = Vec::with_capacity(trace.u.len());
    let mut eta2 = Vec::with_capacity(trace.u.len());
    for u in &trace.u {
        v.push(&(u * &u0) * &u.adjoint());
        eta1.push((&(u * eta1_0) * &u.adjoint()).sym());
        eta2.push((&(u * eta2_0) * &u.adjoint()).sym());
    }
    Ok(MetricPermutation {
        map: UnitaryMapTrajectory {
            grid: *grid,
            v,
            source_metric: MetricFamily::Trajectory(eta1),
            target_metric: MetricFamily::Trajectory(eta2),
        },
        hermiticity_defect,
    })
}

/// Equivalence verdict for two Hamiltonians sharing the invariant `eta_traj`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub verdict: bool,
    pub defect: f64,
    pub lvn_residual_h1: f64,
    pub lvn_residual_h2: f64,
}

/// [H₁ − H₂, η] scale test: equivalent iff the normalized commutator stays
/// below `equivalence_tol`. Also reports the defining-equation residual of
/// the shared invariant under both Hamiltonians.
pub fn geometric_equivalence_check(
    h1: &HamiltonianSpec,
    h2: &HamiltonianSpec,
    eta_traj: &MetricTrajectory,
    equivalence_tol: f64,
) -> Result<EquivalenceReport> {
    if h1.dim() != h2.dim() || h1.dim() != eta_traj.dim() {
        return Err(Error::DimensionMismatch {
            expected: eta_traj.dim(),
            got: h1.dim().max(h2.dim()),
        });
    }
    let grid = &eta_traj.grid;
    let mut num = 0.0f64;
    let mut diff_scale = 0.0f64;
    let mut eta_scale = 0.0f64;
    for k in 0..eta_traj.len() {
        let d = &h1.evaluate(grid.time(k))? - &h2.evaluate(grid.time(k))?;
        let c = d.commutator(&eta_traj.eta[k])?;
        num = num.max(c.frob_norm());
        diff_scale = diff_scale.max(d.frob_norm());
        eta_scale = eta_scale.max(eta_traj.eta[k].frob_norm());
    }
    let scale = diff_scale * eta_scale;
    let defect = if scale > 0.0 { num / scale } else { 0.0 };
    Ok(EquivalenceReport {
        verdict: defect < equivalence_tol,
        defect,
        lvn_residual_h1: lvn_residual(h1, eta_traj)?,
        lvn_residual_h2: lvn_residual(h2, eta_traj)?,
    })
}

/// Convenience: ρ(t_k)⁻¹ built pointwise from the metric trajectory, the
/// cross-check partner of `rho_inverse_trajectory`.
pub fn rho_inverse_pointwise(traj: &MetricTrajectory) -> Result<Vec<Operator>> {
    traj.eta
        .iter()
        .map(|eta| eta.pd_inv_sqrt(DEFAULT_PD_TOL))
        .collect()
}

/// Residual of the transported Schrödinger equation for ψ₂ = ρ⁻¹ψ₁:
/// max interior ‖iħ(ψ₂_{k+1} − ψ₂_{k−1})/(2Δt) − H(t_k)ψ₂_k‖.
pub fn transported_schrodinger_residual(
    h: &HamiltonianSpec,
    eta0: &Operator,
    psi0: &StateVector,
    grid: &TimeGrid,
) -> Result<f64> {
    let map = rho_inverse_trajectory(h, eta0, grid)?;
    let trace = evolve(h, grid)?;
    let psi2: Vec<StateVector> = trace
        .u
        .iter()
        .zip(map.v.iter())
        .map(|(u, v)| v.apply(&u.apply(psi0)))
        .collect();
    let dt = grid.dt();
    let mut worst = 0.0f64;
    for k in 1..psi2.len() - 1 {
        let deriv = (&psi2[k + 1] - &psi2[k - 1]).scale(C64::new(0.0, grid.hbar / (2.0 * dt)));
        let rhs = h.evaluate(grid.time(k))?.apply(&psi2[k]);
        worst = worst.max((&deriv - &rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::evolve_metric_hermitian;
    use crate::operator::pauli;
    use crate::propagator::HamiltonianKind;

    fn rotating() -> HamiltonianSpec {
        HamiltonianSpec::new(
            HamiltonianKind::PauliRotating {
                omega0: 1.0,
                omega1: 0.5,
                omega: 0.8,
            },
            1.0,
        )
        .unwrap()
    }

    fn probe_pairs() -> Vec<(StateVector, StateVector)> {
        vec![
            (
                StateVector::from_pairs(&[[0.6, 0.1], [0.2, -0.7]]).unwrap(),
                StateVector::from_pairs(&[[0.3, -0.2], [0.9, 0.4]]).unwrap(),
            ),
            (StateVector::basis(2, 0), StateVector::basis(2, 1)),
        ]
    }

    #[test]
    fn identity_metric_gives_identity_map() {
        let grid = TimeGrid::new(0.0, 1.0, 50, 1.0).unwrap();
        let map = rho_inverse_trajectory(&rotating(), &Operator::identity(2), &grid).unwrap();
        for v in &map.v {
            assert!((v - &Operator::identity(2)).frob_norm() < 1e-12);
        }
        let h2 = transform_hamiltonian(&rotating(), &map).unwrap();
        for (k, h2k) in h2.iter().enumerate() {
            let hk = rotating().evaluate(grid.time(k)).unwrap();
            assert!((h2k - &hk).frob_norm() < 1e-10);
        }
    }

    #[test]
    fn commuting_constant_metric_map() {
        let [_, _, sz, _] = pauli();
        let h = HamiltonianSpec::constant(sz).unwrap();
        let eta0 = Operator::from_rows(&[vec![[4., 0.], [0., 0.]], vec![[0., 0.], [9., 0.]]])
            .unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 40, 1.0).unwrap();
        let map = rho_inverse_trajectory(&h, &eta0, &grid).unwrap();
        for v in &map.v {
            assert!((v.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
            assert!((v.matrix()[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
        }
        let defect = verify_hamiltonian_invariance(&h, &eta0, &grid).unwrap();
        assert!(defect < 1e-10, "defect {defect}");
    }

    #[test]
    fn rho_inverse_two_path_consistency() {
        let eta0 = Operator::from_rows(&[vec![[1., 0.], [0., 0.]], vec![[0., 0.], [2., 0.]]])
            .unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 200, 1.0).unwrap();
        let h = rotating();
        let map = rho_inverse_trajectory(&h, &eta0, &grid).unwrap();
        let traj = evolve_metric_hermitian(&h, &eta0, &grid).unwrap();
        let pointwise = rho_inverse_pointwise(&traj).unwrap();
        for (a, b) in map.v.iter().zip(pointwise.iter()) {
            assert!((a - b).frob_norm() < 1e-8);
        }
    }

    #[test]
    fn h2_defect_converges_to_h() {
        let eta0 = Operator::from_rows(&[vec![[2., 0.], [0.5, 0.]], vec![[0.5, 0.], [1., 0.]]])
            .unwrap();
        let h = rotating();
        let d1 = verify_hamiltonian_invariance(
            &h,
            &eta0,
            &TimeGrid::new(0.0, 2.0, 500, 1.0).unwrap(),
        )
        .unwrap();
        let d2 = verify_hamiltonian_invariance(
            &h,
            &eta0,
            &TimeGrid::new(0.0, 2.0, 1000, 1.0).unwrap(),
        )
        .unwrap();
        assert!(d1 < 1e-4, "coarse defect {d1}");
        let order = (d1 / d2).log2();
        assert!(order > 1.7 && order < 2.3, "order {order}");
    }

    #[test]
    fn isometry_of_rho_inverse() {
        let eta0 = Operator::from_rows(&[vec![[2., 0.], [0.5, 0.]], vec![[0.5, 0.], [1., 0.]]])
            .unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 300, 1.0).unwrap();
        let map = rho_inverse_trajectory(&rotating(), &eta0, &grid).unwrap();
        let defect = map.isometry_defect(&probe_pairs()).unwrap();
        assert!(defect < 1e-10, "defect {defect}");
    }

    #[test]
    fn observable_transform_identity_map() {
        let [sx, _, _, _] = pauli();
        let grid = TimeGrid::new(0.0, 1.0, 10, 1.0).unwrap();
        let map = rho_inverse_trajectory(&rotating(), &Operator::identity(2), &grid).unwrap();
        let o = Observable::new(sx.clone(), "probe");
        let o2 = transform_observable(&o, &map, 5).unwrap();
        assert!((&o2.matrix - &sx).frob_norm() < 1e-12);
    }

    #[test]
    fn expectation_invariance_examples() {
        let grid = TimeGrid::new(0.0, 2.0, 400, 1.0).unwrap();
        let [sx, _, sz, _] = pauli();
        let psi0 = StateVector::from_pairs(&[[0.8, 0.0], [0.36, 0.48]]).unwrap();

        // identity metric: difference is exactly zero
        let o = Observable::new(sz.clone(), "sz");
        let d = expectation_invariance_check(&o, &rotating(), &Operator::identity(2), &psi0, &grid)
            .unwrap();
        assert!(d < 1e-12);

        // identity observable: both sides normalize to 1
        let eta0 = Operator::from_rows(&[vec![[1., 0.], [0., 0.]], vec![[0., 0.], [2., 0.]]])
            .unwrap();
        let ido = Observable::new(Operator::identity(2), "one");
        let d = expectation_invariance_check(&ido, &rotating(), &eta0, &psi0, &grid).unwrap();
        assert!(d < 1e-10);

        // generic case
        let d = expectation_invariance_check(
            &Observable::new(sx, "sx"),
            &rotating(),
            &eta0,
            &psi0,
            &grid,
        )
        .unwrap();
        assert!(d < 1e-7, "defect {d}");
    }

    #[test]
    fn permutation_examples() {
        let eta = Operator::from_rows(&[vec![[2., 0.], [1., 0.]], vec![[1., 0.], [2., 0.]]])
            .unwrap();
        let u = metric_permutation(&eta, &eta).unwrap();
        assert!((&u - &Operator::identity(2)).frob_norm() < 1e-12);

        let eta1 = Operator::from_rows(&[vec![[4., 0.], [0., 0.]], vec![[0., 0.], [1., 0.]]])
            .unwrap();
        let eta2 = Operator::from_rows(&[vec![[1., 0.], [0., 0.]], vec![[0., 0.], [4., 0.]]])
            .unwrap();
        let u = metric_permutation(&eta1, &eta2).unwrap();
        assert!((u.matrix()[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((u.matrix()[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(u.herm_defect() < 1e-12);

        let grid = TimeGrid::new(0.0, 1.0, 100, 1.0).unwrap();
        let perm = metric_permutation_trajectory(&rotating(), &eta, &eta2, &grid).unwrap();
        assert!(perm.hermiticity_defect > 0.1);
        let defect = perm.map.isometry_defect(&probe_pairs()).unwrap();
        assert!(defect < 1e-9, "isometry defect {defect}");
    }

    #[test]
    fn permutation_composition_closes() {
        let grid = TimeGrid::new(0.0, 1.0, 60, 1.0).unwrap();
        let h = rotating();
        let e1 = Operator::from_rows(&[vec![[2., 0.], [0.5, 0.]], vec![[0.5, 0.], [1., 0.]]])
            .unwrap();
        let e2 = Operator::from_rows(&[vec![[1., 0.], [0., 0.]], vec![[0., 0.], [4., 0.]]])
            .unwrap();
        let e3 = Operator::from_rows(&[vec![[3., 0.], [-0.5, 0.]], vec![[-0.5, 0.], [2., 0.]]])
            .unwrap();
        let p12 = metric_permutation_trajectory(&h, &e1, &e2, &grid).unwrap();
        let p23 = metric_permutation_trajectory(&h, &e2, &e3, &grid).unwrap();
        let composed: Vec<Operator> = p12
            .map
            .v
            .iter()
            .zip(p23.map.v.iter())
            .map(|(a, b)| b * a)
            .collect();
        let map = UnitaryMapTrajectory {
            grid,
            v: composed,
            source_metric: p12.map.source_metric.clone(),
            target_metric: p23.map.target_metric.clone(),
        };
        let defect = map.isometry_defect(&probe_pairs()).unwrap();
        assert!(defect < 1e-8, "composition defect {defect}");
    }

    #[test]
    fn equivalence_examples() {
        let h = rotating();
        let eta0 = Operator::from_rows(&[vec![[1., 0.], [0., 0.]], vec![[0., 0.], [2., 0.]]])
            .unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 800, 1.0).unwrap();
        let traj = evolve_metric_hermitian(&h, &eta0, &grid).unwrap();

        // identical pair
        let rep = geometric_equivalence_check(&h, &h, &traj, 1e-8).unwrap();
        assert!(rep.verdict);
        assert_eq!(rep.defect, 0.0);

        // H2 = H + c eta(t)
        let times: Vec<f64> = (0..traj.len()).map(|k| grid.time(k)).collect();
        let matrices: Vec<Operator> = (0..traj.len())
            .map(|k| {
                let hk = h.evaluate(times[k]).unwrap();
                &hk + &traj.eta[k].scale_re(0.5)
            })
            .collect();
        let h2 = HamiltonianSpec::new(HamiltonianKind::Sampled { times, matrices }, 1.0).unwrap();
        let rep = geometric_equivalence_check(&h, &h2, &traj, 1e-8).unwrap();
        assert!(rep.verdict, "defect {}", rep.defect);
        assert!(rep.lvn_residual_h2 < 10.0 * rep.lvn_residual_h1.max(1e-6));

        // perturbed pair
        let [sx, _, _, _] = pauli();
        let shifted = HamiltonianSpec::new(
            HamiltonianKind::Sampled {
                times: (0..traj.len()).map(|k| grid.time(k)).collect(),
                matrices: (0..traj.len())
                    .map(|k| &h.evaluate(grid.time(k)).unwrap() + &sx)
                    .collect(),
            },
            1.0,
        )
        .unwrap();
        let rep = geometric_equivalence_check(&h, &shifted, &traj, 1e-8).unwrap();
        assert!(!rep.verdict);
        assert!(rep.defect > 1e-2, "defect {}", rep.defect);
    }

    #[test]
    fn transported_solutions_satisfy_schrodinger() {
        let eta0 = Operator::from_rows(&[vec![[2., 0.], [0.5, 0.]], vec![[0.5, 0.], [1., 0.]]])
            .unwrap();
        let psi0 = StateVector::from_pairs(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let h = rotating();
        let r1 = transported_schrodinger_residual(
            &h,
            &eta0,
            &psi0,
            &TimeGrid::new(0.0, 2.0, 500, 1.0).unwrap(),
        )
        .unwrap();
        let r2 = transported_schrodinger_residual(
            &h,
            &eta0,
            &psi0,
            &TimeGrid::new(0.0, 2.0, 1000, 1.0).unwrap(),
        )
        .unwrap();
        let order = (r1 / r2).log2();
        assert!(order > 1.7 && order < 2.3, "order {order}");
    }
}
