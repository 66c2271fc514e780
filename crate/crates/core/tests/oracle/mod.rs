//! Closed-form oracles shared by the integration suites.
//!
//! Everything here is derived on paper and coded without calling into the
//! library's propagator, metric-evolution, or phase routines, so agreement
//! between the two is a genuine two-route check. ħ = 1 throughout.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use qmetric::operator::pauli;
use qmetric::{Operator, StateVector};

/// exp(−i(θ/2) n·σ) = cos(θ/2)·I − i sin(θ/2)·(n·σ) for a unit 3-vector n.
pub fn su2_exp(theta: f64, n: [f64; 3]) -> Operator {
    let [sx, sy, sz, id] = pauli();
    let ns = &(&sx.scale_re(n[0]) + &sy.scale_re(n[1])) + &sz.scale_re(n[2]);
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    &id.scale_re(c) + &ns.scale(C64::new(0.0, -s))
}

/// Rotating-frame solution of iψ̇ = H(t)ψ for
/// H(t) = (1/2)[ω₁cos(ωt)σx + ω₁sin(ωt)σy + ω₀σz]:
///
///   U(t) = exp(−iωt σz/2) · exp(−it[(ω₀−ω)σz + ω₁σx]/2),  U(0) = I.
pub fn rabi_closed_form(omega0: f64, omega1: f64, omega: f64, t: f64) -> Operator {
    let (nx, nz, eff) = rabi_axis(omega0, omega1, omega);
    let lab = su2_exp(omega * t, [0.0, 0.0, 1.0]);
    let rot = su2_exp(eff * t, [nx, 0.0, nz]);
    &lab * &rot
}

/// Unit axis (nx, nz) and effective frequency of the rotating-frame
/// Hamiltonian: n ∝ (ω₁, 0, ω₀−ω), Ω′ = √((ω₀−ω)² + ω₁²).
pub fn rabi_axis(omega0: f64, omega1: f64, omega: f64) -> (f64, f64, f64) {
    let det = omega0 - omega;
    let eff = det.hypot(omega1);
    (omega1 / eff, det / eff, eff)
}

/// The conserved energy expectation on the invariant branches:
/// ⟨±n̂(t)|H(t)|±n̂(t)⟩ = ±E with E = (ω₁ nx + ω₀ nz)/2, t-independent.
pub fn rabi_branch_energy(omega0: f64, omega1: f64, omega: f64) -> f64 {
    let (nx, nz, _) = rabi_axis(omega0, omega1, omega);
    (omega1 * nx + omega0 * nz) / 2.0
}

/// 2I + n̂·σ, the invariant metric seed that commutes with the
/// rotating-frame Hamiltonian; eigenvalues 1 (−n̂) and 3 (+n̂).
pub fn rabi_invariant(omega0: f64, omega1: f64, omega: f64) -> Operator {
    let (nx, nz, _) = rabi_axis(omega0, omega1, omega);
    let [sx, _, sz, id] = pauli();
    &id.scale_re(2.0) + &(&sx.scale_re(nx) + &sz.scale_re(nz))
}

/// Independent classic-RK4 integrator for
/// dη/dt = −i(H†η − ηH) − Σ_j [ (A†Aη + ηA†A)/2 − AηA† ],
/// the dissipator written in its expanded algebraic form rather than the
/// commutator form used inside the library. No symmetrization.
pub fn rk4_lvn(
    h_at: &dyn Fn(f64) -> Operator,
    eta0: &Operator,
    ops: &[Operator],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Operator {
    let dt = (t1 - t0) / steps as f64;
    let rhs = |t: f64, eta: &Operator| -> Operator {
        let h = h_at(t);
        let comm = &(&h.adjoint() * eta) - &(eta * &h);
        let mut f = comm.scale(C64::new(0.0, -1.0));
        for a in ops {
            let ad = a.adjoint();
            let aa = &ad * a;
            let anti = &(&aa * eta) + &(eta * &aa);
            let jump = &(a * eta) * &ad;
            f = &f - &(&anti.scale_re(0.5) - &jump);
        }
        f
    };
    let mut eta = eta0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let k1 = rhs(t, &eta);
        let k2 = rhs(t + dt / 2.0, &(&eta + &k1.scale_re(dt / 2.0)));
        let k3 = rhs(t + dt / 2.0, &(&eta + &k2.scale_re(dt / 2.0)));
        let k4 = rhs(t + dt, &(&eta + &k3.scale_re(dt)));
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_re(2.0);
        eta = &eta + &incr.scale_re(dt / 6.0);
    }
    eta
}

/// Brute-force closed-loop Pancharatnam value: −arg of the full overlap
/// product around the chain, closing back onto the first state.
pub fn pancharatnam_loop(chain: &[StateVector]) -> f64 {
    let mut prod = C64::new(1.0, 0.0);
    for j in 0..chain.len() - 1 {
        prod *= chain[j].inner(&chain[j + 1]);
    }
    prod *= chain[chain.len() - 1].inner(&chain[0]);
    -prod.arg()
}

/// Spinor along the unit Bloch vector (sinθcosφ, sinθsinφ, cosθ).
pub fn bloch_state(theta: f64, phi: f64) -> StateVector {
    let up = C64::new((theta / 2.0).cos(), 0.0);
    let dn = C64::from_polar((theta / 2.0).sin(), phi);
    StateVector::from_components(&[up, dn]).unwrap()
}

/// Max Frobenius distance between two operator sequences.
pub fn max_op_distance(a: &[Operator], b: &[Operator]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).frob_norm())
        .fold(0.0, f64::max)
}
