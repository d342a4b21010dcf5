use serde::{Deserialize, Serialize};

use super::GaussianState;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::scalar::{cx, Cx, Real};

/// Parameters of `D S rho_th S^dag D^dag`.
///
/// `S = prod_{j<k} S(z_jk) * prod_j S(z_jj)`: single-mode squeezers act first
/// (mode order), then two-mode squeezers in lexicographic pair order; with
/// `S(z_jk) = exp((z_jk^* a_j a_k - z_jk a_j^dag a_k^dag)/2)` for both `j = k`
/// and `j != k`. `D(alpha) = exp(alpha a^dag - alpha^* a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatePrepParams<T> {
    pub nbar: Vec<T>,
    pub single_squeeze: Vec<Cx<T>>,
    /// `(j, k, z_jk)` with `j < k`.
    pub two_mode_squeeze: Vec<(usize, usize, Cx<T>)>,
    pub displacement: Vec<Cx<T>>,
}

impl<T: Real> StatePrepParams<T> {
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            nbar: vec![T::zero(); n_modes],
            single_squeeze: vec![Cx::new(T::zero(), T::zero()); n_modes],
            two_mode_squeeze: Vec::new(),
            displacement: vec![Cx::new(T::zero(), T::zero()); n_modes],
        }
    }

    /// Two-mode reference state with thermal, squeezed, entangled and displaced parts.
    pub fn reference_pair() -> Self {
        let s2 = T::lit(2.0).sqrt();
        Self {
            nbar: vec![T::lit(0.3), T::lit(0.5)],
            single_squeeze: vec![cx(T::lit(0.2), T::zero()), cx(T::lit(0.3), T::zero())],
            two_mode_squeeze: vec![(0, 1, cx(T::lit(0.4), T::zero()))],
            displacement: vec![
                cx(T::lit(3.0), T::lit(-12.0)) / (T::lit(10.0) * s2),
                cx(T::lit(3.0), T::lit(2.0)) / (T::lit(5.0) * s2),
            ],
        }
    }

    #[inline]
    pub fn n_modes(&self) -> usize {
        self.nbar.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nbar.len();
        if n == 0 {
            return Err(Error::InvalidParameter("no modes".into()));
        }
        if self.single_squeeze.len() != n || self.displacement.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} thermal occupations, {} squeezers, {} displacements",
                n,
                self.single_squeeze.len(),
                self.displacement.len()
            )));
        }
        if let Some(nb) = self.nbar.iter().find(|x| !(**x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "thermal occupation {nb} must be finite and nonnegative"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(j, k, _) in &self.two_mode_squeeze {
            if j >= k || k >= n {
                return Err(Error::InvalidParameter(format!(
                    "two-mode squeezer on ({j}, {k}) needs j < k < {n}"
                )));
            }
            if !seen.insert((j, k)) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate two-mode squeezer on ({j}, {k})"
                )));
            }
        }
        Ok(())
    }

    /// Two-mode squeezers sorted in application order.
    pub fn ordered_pairs(&self) -> Vec<(usize, usize, Cx<T>)> {
        let mut v = self.two_mode_squeeze.clone();
        v.sort_by_key(|&(j, k, _)| (j, k));
        v
    }

    /// Total symplectic matrix `S_sym` with `S^dag R S = S_sym R`.
    pub fn symplectic(&self) -> RMatrix<T> {
        let n = self.n_modes();
        // operator product: S = S_pairs(last) ... S_pairs(first) S(z_nn) ... S(z_11)
        // Heisenberg action composes in the same left-to-right order.
        let mut total = RMatrix::identity(2 * n);
        for &(j, k, z) in self.ordered_pairs().iter().rev() {
            total = total.matmul(&two_mode_squeezer_symplectic(n, j, k, z));
        }
        for j in (0..n).rev() {
            total = total.matmul(&squeezer_symplectic(n, j, self.single_squeeze[j]));
        }
        total
    }

    /// Gaussian moments of the prepared state.
    pub fn state(&self) -> Result<GaussianState<T>> {
        self.validate()?;
        let n = self.n_modes();
        let s = self.symplectic();
        let thermal = GaussianState::thermal(&self.nbar);
        let cov = s.matmul(thermal.cov()).matmul(&s.transpose());
        // symmetrise away rounding
        let cov = RMatrix::from_fn(2 * n, 2 * n, |i, j| T::lit(0.5) * (cov[(i, j)] + cov[(j, i)]));
        let s2 = T::lit(2.0).sqrt();
        let mean = self
            .displacement
            .iter()
            .flat_map(|a| [s2 * a.re, s2 * a.im])
            .collect();
        GaussianState::new(mean, cov)
    }
}

/// Real quadrature matrix of the Bogoliubov map `a_j -> sum_k A_jk a_k + B_jk a_k^dag`.
fn bogoliubov_to_symplectic<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> RMatrix<T> {
    let n = a.rows();
    let i = cx(T::zero(), T::one());
    let mut s = RMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let c = a[(j, k)] + b[(j, k)];
            let d = i * (a[(j, k)] - b[(j, k)]);
            s[(2 * j, 2 * k)] = c.re;
            s[(2 * j, 2 * k + 1)] = d.re;
            s[(2 * j + 1, 2 * k)] = c.im;
            s[(2 * j + 1, 2 * k + 1)] = d.im;
        }
    }
    s
}

/// Heisenberg action of `S(z) = exp((z^* a_j^2 - z a_j^dag 2)/2)` on all
/// quadratures: `a_j -> a_j cosh r - e^{i phi} sinh r a_j^dag`, `z = r e^{i phi}`.
pub fn squeezer_symplectic<T: Real>(n_modes: usize, mode: usize, z: Cx<T>) -> RMatrix<T> {
    let mut a = CMatrix::identity(n_modes);
    let mut b = CMatrix::zeros(n_modes, n_modes);
    let (r, phi) = z.to_polar();
    a[(mode, mode)] = cx(r.cosh(), T::zero());
    b[(mode, mode)] = -Cx::from_polar(r.sinh(), phi);
    bogoliubov_to_symplectic(&a, &b)
}

/// Heisenberg action of `S(z) = exp((z^* a_j a_k - z a_j^dag a_k^dag)/2)`:
/// `a_j -> a_j cosh r - e^{i phi} sinh r a_k^dag` (and `j <-> k`) with
/// `r = |z|/2`.
pub fn two_mode_squeezer_symplectic<T: Real>(n_modes: usize, j: usize, k: usize, z: Cx<T>) -> RMatrix<T> {
    let mut a = CMatrix::identity(n_modes);
    let mut b = CMatrix::zeros(n_modes, n_modes);
    let (abs, phi) = z.to_polar();
    let r = abs / T::lit(2.0);
    let ch = cx(r.cosh(), T::zero());
    let sh = Cx::from_polar(r.sinh(), phi);
    a[(j, j)] = ch;
    a[(k, k)] = ch;
    b[(j, k)] = -sh;
    b[(k, j)] = -sh;
    bogoliubov_to_symplectic(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::symplectic_form;

    fn is_symplectic(s: &RMatrix<f64>, n: usize) -> bool {
        let omega = symplectic_form::<f64>(n);
        s.matmul(&omega).matmul(&s.transpose()).sub(&omega).max_abs() < 1e-12
    }

    #[test]
    fn squeezers_are_symplectic() {
        let z = cx(0.3, -0.7);
        assert!(is_symplectic(&squeezer_symplectic(3, 1, z), 3));
        assert!(is_symplectic(&two_mode_squeezer_symplectic(3, 0, 2, z), 3));
    }

    #[test]
    fn zero_params_give_vacuum() {
        let s = StatePrepParams::<f64>::vacuum(2).state().unwrap();
        assert_eq!(s, GaussianState::vacuum(2));
    }

    #[test]
    fn real_squeeze_variances() {
        let mut p = StatePrepParams::<f64>::vacuum(1);
        p.single_squeeze[0] = cx(0.2, 0.0);
        let s = p.state().unwrap();
        assert!((s.cov()[(0, 0)] - (-0.4f64).exp() / 2.0).abs() < 1e-15);
        assert!((s.cov()[(1, 1)] - 0.4f64.exp() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn displacement_sets_mean() {
        let mut p = StatePrepParams::<f64>::vacuum(1);
        p.displacement[0] = cx(1.0 / 2f64.sqrt(), 0.0);
        let s = p.state().unwrap();
        assert!((s.mean()[0] - 1.0).abs() < 1e-15);
        assert_eq!(s.mean()[1], 0.0);
    }

    #[test]
    fn reference_pair_state_is_valid() {
        let s = StatePrepParams::<f64>::reference_pair().state().unwrap();
        assert!((s.mean()[0] - 0.3).abs() < 1e-15);
        assert!((s.mean()[1] + 1.2).abs() < 1e-15);
        assert!((s.mean()[2] - 0.6).abs() < 1e-15);
        assert!((s.mean()[3] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = StatePrepParams::<f64>::vacuum(2);
        p.nbar[0] = -0.1;
        assert!(p.validate().is_err());
        let mut p = StatePrepParams::<f64>::vacuum(2);
        p.two_mode_squeeze.push((1, 0, cx(0.1, 0.0)));
        assert!(p.validate().is_err());
        let mut p = StatePrepParams::<f64>::vacuum(2);
        p.displacement.pop();
        assert!(p.validate().is_err());
    }
}
