//! Dense complex operators, state vectors, and the spectral kernels
//! (Hermitian eigendecomposition, matrix exponential, positive roots)
//! everything else is built on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::{Result, DEFAULT_HERM_TOL, EXP_SPLIT_TOL};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: CMat,
}

/// Complex column vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    v: CVec,
}

/// Result of a Hermitian eigendecomposition, eigenvalues ascending,
/// eigenvectors orthonormal and phase-fixed.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

fn all_finite(m: &CMat) -> bool {
    m.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

impl Operator {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        if !all_finite(&m) {
            return Err(Error::Validation {
                field: "operator".into(),
                reason: "non-finite entry".into(),
            });
        }
        Ok(Operator { m })
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            m: CMat::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            m: CMat::zeros(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(CMat::from_fn(dim, dim, f))
    }

    /// Row-major nested arrays of `[re, im]` pairs, the shared wire format.
    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: rows[i].len(),
                });
            }
        }
        Self::from_fn(n, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))
    }

    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let c = self.m[(i, j)];
                        [c.re, c.im]
                    })
                    .collect()
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            m: self.m.adjoint(),
        }
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Operator {
            m: &self.m * &other.m - &other.m * &self.m,
        })
    }

    pub fn frob_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            m: self.m.scale(1.0) * c,
        }
    }

    pub fn scale_re(&self, s: f64) -> Operator {
        Operator { m: self.m.scale(s) }
    }

    /// Hermitian part (A + A†)/2.
    pub fn sym(&self) -> Operator {
        Operator {
            m: (&self.m + self.m.adjoint()).scale(0.5),
        }
    }

    /// Absolute Frobenius distance to the adjoint.
    pub fn herm_defect(&self) -> f64 {
        (&self.m - self.m.adjoint()).norm()
    }

    pub fn is_hermitian(&self, herm_tol: f64) -> bool {
        self.herm_defect() <= herm_tol * self.frob_norm().max(1.0)
    }

    fn check_hermitian(&self, herm_tol: f64) -> Result<()> {
        let defect = self.herm_defect() / self.frob_norm().max(1.0);
        if defect > herm_tol {
            return Err(Error::NotHermitian {
                defect,
                tol: herm_tol,
            });
        }
        Ok(())
    }

    /// Eigendecomposition of a (numerically) Hermitian operator.
    /// Deterministic: eigenvalues ascending, ties broken lexicographically on
    /// the phase-fixed eigenvectors; each eigenvector's largest-modulus
    /// component is rotated to be real-positive.
    pub fn herm_eig(&self, herm_tol: f64) -> Result<EigenSystem> {
        self.check_hermitian(herm_tol)?;
        Ok(self.sym().herm_eig_unchecked())
    }

    /// Same decomposition without the hermiticity precondition; the caller
    /// guarantees the input is (or has been symmetrized to) Hermitian.
    pub fn herm_eig_unchecked(&self) -> EigenSystem {
        let se = nalgebra::SymmetricEigen::new(self.m.clone());
        let n = self.dim();
        let mut vectors: Vec<StateVector> = Vec::with_capacity(n);
        for j in 0..n {
            let col = se.eigenvectors.column(j).into_owned();
            vectors.push(StateVector { v: col }.phase_fixed());
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            se.eigenvalues[a]
                .total_cmp(&se.eigenvalues[b])
                .then_with(|| vectors[a].lex_cmp(&vectors[b]))
        });
        EigenSystem {
            eigenvalues: idx.iter().map(|&i| se.eigenvalues[i]).collect(),
            vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
        }
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let se = nalgebra::SymmetricEigen::new(self.sym().m);
        se.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Matrix exponential. Spectral path for inputs that are (anti-)Hermitian
    /// within `EXP_SPLIT_TOL`, scaling-and-squaring with a truncated series
    /// otherwise.
    pub fn matrix_exp(&self) -> Operator {
        let scale = self.frob_norm().max(1.0);
        if self.herm_defect() <= EXP_SPLIT_TOL * scale {
            return self.sym().spectral_map(|x| C64::new(x, 0.0).exp());
        }
        let anti = (&self.m + self.m.adjoint()).norm();
        if anti <= EXP_SPLIT_TOL * scale {
            // A = iK with K Hermitian; exp(A) = V e^{i lambda} V†.
            let k = Operator {
                m: self.m.scale(1.0) * C64::new(0.0, -1.0),
            };
            return k.sym().spectral_map(|x| C64::new(0.0, x).exp());
        }
        self.series_exp()
    }

    fn spectral_map(&self, f: impl Fn(f64) -> C64) -> Operator {
        let se = nalgebra::SymmetricEigen::new(self.m.clone());
        let n = self.dim();
        let mut d = CMat::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = f(se.eigenvalues[i]);
        }
        Operator {
            m: &se.eigenvectors * d * se.eigenvectors.adjoint(),
        }
    }

    fn series_exp(&self) -> Operator {
        let n = self.dim();
        let norm = self.frob_norm();
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let b = self.m.scale(0.5_f64.powi(s as i32));
        let mut result = CMat::identity(n, n);
        let mut term = CMat::identity(n, n);
        for k in 1..=64 {
            term = (&term * &b).scale(1.0 / k as f64);
            result += &term;
            if term.norm() < 1e-18 * result.norm().max(1.0) {
                break;
            }
        }
        for _ in 0..s {
            result = &result * &result;
        }
        Operator { m: result }
    }

    /// Unique positive-definite square root.
    pub fn pd_sqrt(&self, pd_tol: f64) -> Result<Operator> {
        self.pd_spectral(pd_tol, |x| x.sqrt())
    }

    /// Inverse of the positive-definite square root.
    pub fn pd_inv_sqrt(&self, pd_tol: f64) -> Result<Operator> {
        self.pd_spectral(pd_tol, |x| 1.0 / x.sqrt())
    }

    /// Inverse of a positive-definite operator.
    pub fn pd_inverse(&self, pd_tol: f64) -> Result<Operator> {
        self.pd_spectral(pd_tol, |x| 1.0 / x)
    }

    fn pd_spectral(&self, pd_tol: f64, f: impl Fn(f64) -> f64) -> Result<Operator> {
        self.check_hermitian(DEFAULT_HERM_TOL)?;
        let eig = self.sym().herm_eig_unchecked();
        let min_eig = eig.eigenvalues[0];
        if min_eig <= pd_tol {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (lam, v) in eig.eigenvalues.iter().zip(eig.vectors.iter()) {
            let w = f(*lam);
            m += (&v.v * v.v.adjoint()).scale(w);
        }
        Ok(Operator { m }.sym())
    }

    pub fn is_positive_definite(&self, pd_tol: f64) -> bool {
        self.is_hermitian(DEFAULT_HERM_TOL) && self.min_eigenvalue() > pd_tol
    }

    /// LU inverse plus a Frobenius condition estimate ‖A‖·‖A⁻¹‖.
    pub fn inverse(&self) -> Option<(Operator, f64)> {
        let inv = self.m.clone().lu().try_inverse()?;
        let cond = self.m.norm() * inv.norm();
        Some((Operator { m: inv }, cond))
    }

    pub fn det(&self) -> C64 {
        self.m.clone().lu().determinant()
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector { v: &self.m * &v.v }
    }
}

impl std::ops::Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m + &rhs.m }
    }
}

impl std::ops::Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m - &rhs.m }
    }
}

impl std::ops::Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m * &rhs.m }
    }
}

impl std::ops::Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { m: -self.m.clone() }
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        Operator::from_rows(&rows).map_err(D::Error::custom)
    }
}

impl StateVector {
    pub fn new(v: CVec) -> Result<Self> {
        if !v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Validation {
                field: "state".into(),
                reason: "non-finite entry".into(),
            });
        }
        Ok(StateVector { v })
    }

    pub fn from_components(c: &[C64]) -> Result<Self> {
        Self::new(CVec::from_row_slice(c))
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::from_components(
            &pairs.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>(),
        )
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.v.iter().map(|c| [c.re, c.im]).collect()
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        StateVector { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn as_dvector(&self) -> &CVec {
        &self.v
    }

    /// Standard inner product, conjugate-linear in the first argument.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.v.dotc(&other.v)
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn normalized(&self) -> StateVector {
        StateVector {
            v: self.v.normalize(),
        }
    }

    pub fn scale(&self, c: C64) -> StateVector {
        StateVector { v: &self.v * c }
    }

    pub fn component(&self, k: usize) -> C64 {
        self.v[k]
    }

    /// Rotate the global phase so the largest-modulus component is
    /// real-positive (ties broken by lowest index).
    pub fn phase_fixed(&self) -> StateVector {
        let mut best = 0usize;
        let mut best_mod = -1.0f64;
        for (i, c) in self.v.iter().enumerate() {
            let m = c.norm();
            if m > best_mod {
                best_mod = m;
                best = i;
            }
        }
        if best_mod <= 0.0 {
            return self.clone();
        }
        let phase = self.v[best] / C64::new(best_mod, 0.0);
        self.scale(phase.conj())
    }

    fn lex_cmp(&self, other: &StateVector) -> std::cmp::Ordering {
        for (a, b) in self.v.iter().zip(other.v.iter()) {
            let c = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl std::ops::Sub<&StateVector> for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        StateVector { v: &self.v - &rhs.v }
    }
}

impl std::ops::Add<&StateVector> for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        StateVector { v: &self.v + &rhs.v }
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        StateVector::from_pairs(&pairs).map_err(D::Error::custom)
    }
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// ‖V†V − 1‖_F over the eigenvector matrix.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut g = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.vectors[i].inner(&self.vectors[j]);
            }
        }
        (g - CMat::identity(n, n)).norm()
    }

    /// max_n ‖A v_n − λ_n v_n‖.
    pub fn residual(&self, a: &Operator) -> f64 {
        self.eigenvalues
            .iter()
            .zip(self.vectors.iter())
            .map(|(lam, v)| (&a.apply(v) - &v.scale(C64::new(*lam, 0.0))).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest gap between adjacent (sorted) eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// ⟨ψ, ηφ⟩, conjugate-linear in the first argument.
pub fn eta_inner(psi: &StateVector, phi: &StateVector, eta: &Operator) -> Result<C64> {
    if psi.dim() != phi.dim() || psi.dim() != eta.dim() {
        return Err(Error::DimensionMismatch {
            expected: eta.dim(),
            got: psi.dim().max(phi.dim()),
        });
    }
    Ok(psi.inner(&eta.apply(phi)))
}

/// σ_x, σ_y, σ_z and the 2×2 identity.
pub fn pauli() -> [Operator; 4] {
    let i = C64::new(0.0, 1.0);
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    [
        Operator::new(CMat::from_row_slice(2, 2, &[z, o, o, z])).unwrap(),
        Operator::new(CMat::from_row_slice(2, 2, &[z, -i, i, z])).unwrap(),
        Operator::new(CMat::from_row_slice(2, 2, &[o, z, z, -o])).unwrap(),
        Operator::identity(2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn adjoint_examples() {
        let id = Operator::identity(2);
        assert_eq!(id.adjoint(), id);

        let a = Operator::from_rows(&[vec![[0., 0.], [1., 0.]], vec![[0., 0.], [0., 0.]]])
            .unwrap();
        let expect =
            Operator::from_rows(&[vec![[0., 0.], [0., 0.]], vec![[1., 0.], [0., 0.]]]).unwrap();
        assert_eq!(a.adjoint(), expect);

        let [_, sy, _, _] = pauli();
        assert!((&sy.adjoint() - &sy).frob_norm() == 0.0);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn commutator_examples() {
        let [sx, sy, sz, _] = pauli();
        let com = sx.commutator(&sx).unwrap();
        assert_eq!(com.frob_norm(), 0.0);

        let com = sx.commutator(&sy).unwrap();
        let expect = sz.scale(c(0.0, 2.0));
        assert!((&com - &expect).frob_norm() < 1e-15);

        let d1 = Operator::from_fn(2, |i, j| if i == j { c(i as f64 + 1.0, 0.0) } else { c(0., 0.) })
            .unwrap();
        let d2 = Operator::from_fn(2, |i, j| if i == j { c(i as f64 + 3.0, 0.0) } else { c(0., 0.) })
            .unwrap();
        assert_eq!(d1.commutator(&d2).unwrap().frob_norm(), 0.0);

        assert!(matches!(
            d1.commutator(&Operator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn herm_eig_diagonal() {
        let a = Operator::from_rows(&[vec![[3., 0.], [0., 0.]], vec![[0., 0.], [1., 0.]]])
            .unwrap();
        let eig = a.herm_eig(1e-10).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 3.0]);
        assert!((eig.vectors[0].component(1).re - 1.0).abs() < 1e-14);
        assert!((eig.vectors[1].component(0).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn herm_eig_hand_spectral() {
        let a = Operator::from_rows(&[vec![[2., 0.], [1., 0.]], vec![[1., 0.], [2., 0.]]])
            .unwrap();
        let eig = a.herm_eig(1e-10).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 3.0).abs() < 1e-14);
        let s = 1.0 / 2.0_f64.sqrt();
        // (1,-1)/sqrt2 phase-fixed has the first component real positive
        assert!((eig.vectors[0].component(0).re - s).abs() < 1e-12);
        assert!((eig.vectors[0].component(1).re + s).abs() < 1e-12);
        assert!(eig.residual(&a) < 1e-14);
        assert!(eig.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let [sx, _, _, _] = pauli();
        let pert = Operator::from_rows(&[vec![[0., 0.], [0.5, 0.]], vec![[0., 0.], [0., 0.]]])
            .unwrap();
        let a = &sx + &pert;
        assert!(matches!(a.herm_eig(1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn matrix_exp_examples() {
        let z = Operator::zeros(3);
        assert!((&z.matrix_exp() - &Operator::identity(3)).frob_norm() < 1e-15);

        let a = Operator::from_fn(2, |i, j| {
            if i == j && i == 0 {
                c(0.0, std::f64::consts::PI)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let e = a.matrix_exp();
        assert!((e.matrix()[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e.matrix()[(1, 1)] - c(1.0, 0.0)).norm() < 1e-14);

        let [sx, _, _, _] = pauli();
        let a = sx.scale(c(0.0, -std::f64::consts::FRAC_PI_2));
        let e = a.matrix_exp();
        let expect = Operator::from_rows(&[vec![[0., 0.], [0., -1.]], vec![[0., -1.], [0., 0.]]])
            .unwrap();
        assert!((&e - &expect).frob_norm() < 1e-14);
    }

    #[test]
    fn matrix_exp_series_agrees_with_spectral() {
        // Hermitian input evaluated through both paths must agree.
        let a = Operator::from_rows(&[
            vec![[0.3, 0.], [0.2, -0.4]],
            vec![[0.2, 0.4], [-0.1, 0.]],
        ])
        .unwrap();
        let spectral = a.matrix_exp();
        let series = a.series_exp();
        assert!((&spectral - &series).frob_norm() < 1e-13);
    }

    #[test]
    fn matrix_exp_general_input() {
        // Non-normal matrix: exp([[0,1],[0,0]]) = [[1,1],[0,1]].
        let n = Operator::from_rows(&[vec![[0., 0.], [1., 0.]], vec![[0., 0.], [0., 0.]]])
            .unwrap();
        let e = n.matrix_exp();
        let expect = Operator::from_rows(&[vec![[1., 0.], [1., 0.]], vec![[0., 0.], [1., 0.]]])
            .unwrap();
        assert!((&e - &expect).frob_norm() < 1e-14);
    }

    #[test]
    fn pd_sqrt_examples() {
        let id = Operator::identity(2);
        assert!((&id.pd_sqrt(1e-10).unwrap() - &id).frob_norm() < 1e-14);

        let a = Operator::from_rows(&[vec![[4., 0.], [0., 0.]], vec![[0., 0.], [9., 0.]]])
            .unwrap();
        let r = a.pd_sqrt(1e-10).unwrap();
        assert!((r.matrix()[(0, 0)].re - 2.0).abs() < 1e-13);
        assert!((r.matrix()[(1, 1)].re - 3.0).abs() < 1e-13);

        let a = Operator::from_rows(&[vec![[2., 0.], [1., 0.]], vec![[1., 0.], [2., 0.]]])
            .unwrap();
        let r = a.pd_sqrt(1e-10).unwrap();
        let s3 = 3.0_f64.sqrt();
        assert!((r.matrix()[(0, 0)].re - (s3 + 1.0) / 2.0).abs() < 1e-13);
        assert!((r.matrix()[(0, 1)].re - (s3 - 1.0) / 2.0).abs() < 1e-13);
        assert!((&(&r * &r) - &a).frob_norm() < 1e-13);

        let neg = Operator::from_rows(&[vec![[1., 0.], [0., 0.]], vec![[0., 0.], [-1., 0.]]])
            .unwrap();
        assert!(matches!(
            neg.pd_sqrt(1e-10),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn eta_inner_examples() {
        let e1 = StateVector::basis(2, 0);
        let e2 = StateVector::basis(2, 1);
        let id = Operator::identity(2);
        let w = Operator::from_rows(&[vec![[2., 0.], [0., 0.]], vec![[0., 0.], [3., 0.]]])
            .unwrap();
        assert!((eta_inner(&e1, &e1, &id).unwrap() - c(1., 0.)).norm() < 1e-15);
        assert!((eta_inner(&e1, &e1, &w).unwrap() - c(2., 0.)).norm() < 1e-15);
        assert!(eta_inner(&e1, &e2, &w).unwrap().norm() < 1e-15);
    }

    #[test]
    fn is_positive_definite_examples() {
        let [sx, _, _, _] = pauli();
        assert!(Operator::identity(2).is_positive_definite(1e-10));
        let ind = Operator::from_rows(&[vec![[1., 0.], [0., 0.]], vec![[0., 0.], [-1., 0.]]])
            .unwrap();
        assert!(!ind.is_positive_definite(1e-10));
        let shifted = &sx + &Operator::identity(2).scale_re(2.0);
        assert!(shifted.is_positive_definite(1e-10));
    }

    #[test]
    fn phase_fix_deterministic() {
        let v = StateVector::from_components(&[c(0.0, 0.6), c(-0.8, 0.0)]).unwrap();
        let f = v.phase_fixed();
        // largest modulus component (index 1) becomes real positive
        assert!(f.component(1).im.abs() < 1e-15);
        assert!(f.component(1).re > 0.0);
        assert!((f.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let a = Operator::from_rows(&[
            vec![[0.25, -1.5], [3.0, 0.125]],
            vec![[0.1, 0.2], [-0.3, 0.0]],
        ])
        .unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
