//! Single- and two-mode operators on a truncated Fock basis `|0>, ..., |d-1>`.

use crate::linalg::CMatrix;
use crate::scalar::{cx, Cx, Real};

use super::tensor::SparseLocalOp;

pub fn annihilation<T: Real>(dim: usize) -> CMatrix<T> {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = cx(T::from_usize_lossy(n).sqrt(), T::zero());
    }
    a
}

pub fn creation<T: Real>(dim: usize) -> CMatrix<T> {
    annihilation(dim).adjoint()
}

/// `Q = (a + a^dag)/sqrt(2)` truncated to `dim` levels.
pub fn position<T: Real>(dim: usize) -> CMatrix<T> {
    let h = cx(T::lit(0.5).sqrt(), T::zero());
    annihilation::<T>(dim).add(&creation(dim)).scale(h)
}

/// `P = (a - a^dag)/(i sqrt(2))` truncated to `dim` levels.
pub fn momentum<T: Real>(dim: usize) -> CMatrix<T> {
    let h = cx(T::zero(), -T::lit(0.5).sqrt());
    annihilation::<T>(dim).sub(&creation(dim)).scale(h)
}

/// `D(alpha) = exp(alpha a^dag - alpha^* a)`.
pub fn displacement<T: Real>(dim: usize, alpha: Cx<T>) -> CMatrix<T> {
    let a = annihilation::<T>(dim);
    let ad = a.adjoint();
    ad.scale(alpha).sub(&a.scale(alpha.conj())).expm()
}

/// `S(z) = exp((z^* a^2 - z a^dag^2)/2)`.
pub fn squeezer<T: Real>(dim: usize, z: Cx<T>) -> CMatrix<T> {
    let a = annihilation::<T>(dim);
    let ad = a.adjoint();
    let half = cx(T::lit(0.5), T::zero());
    a.matmul(&a)
        .scale(z.conj() * half)
        .sub(&ad.matmul(&ad).scale(z * half))
        .expm()
}

/// `S(z) = exp((z^* a_1 a_2 - z a_1^dag a_2^dag)/2)` on two truncated modes.
///
/// The generator conserves `n_1 - n_2`, so the propagator is stored as one
/// dense block per difference sector.
#[derive(Clone, Debug)]
pub struct TwoModeSqueezer<T: Real> {
    dim: usize,
    /// `(states (n1, n2) in the sector, propagator on that sector)`
    sectors: Vec<(Vec<(usize, usize)>, CMatrix<T>)>,
}

impl<T: Real> TwoModeSqueezer<T> {
    pub fn new(dim: usize, z: Cx<T>) -> Self {
        let half = T::lit(0.5);
        let d = dim as isize;
        let sectors = (-(d - 1)..d)
            .map(|diff| {
                let states: Vec<(usize, usize)> = (0..dim)
                    .filter_map(|i| {
                        let n1 = i as isize + diff.max(0);
                        let n2 = i as isize + (-diff).max(0);
                        (n1 < d && n2 < d).then_some((n1 as usize, n2 as usize))
                    })
                    .collect();
                let len = states.len();
                let mut gen = CMatrix::zeros(len, len);
                for (i, &(n1, n2)) in states.iter().enumerate() {
                    if i + 1 < len {
                        // a1^dag a2^dag |n1, n2> = sqrt((n1+1)(n2+1)) |n1+1, n2+1>
                        let amp = T::from_usize_lossy((n1 + 1) * (n2 + 1)).sqrt();
                        gen[(i + 1, i)] = -z * half * amp;
                        gen[(i, i + 1)] = z.conj() * half * amp;
                    }
                }
                (states, gen.expm())
            })
            .collect();
        Self { dim, sectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Apply to sites `(j, k)` of a tensor with local dimensions `dims`.
    pub fn apply(&self, v: &[Cx<T>], dims: &[usize], j: usize, k: usize) -> Vec<Cx<T>> {
        assert_eq!(dims[j], self.dim);
        assert_eq!(dims[k], self.dim);
        let strides = super::tensor::strides(dims);
        let (sj, sk) = (strides[j], strides[k]);
        let mut out = vec![cx(T::zero(), T::zero()); v.len()];
        let mut local = Vec::new();
        for base in super::tensor::bases(dims, &[j, k]) {
            for (states, u) in &self.sectors {
                local.clear();
                local.extend(states.iter().map(|&(a, b)| v[base + a * sj + b * sk]));
                if local.iter().all(|x| x.re == T::zero() && x.im == T::zero()) {
                    continue;
                }
                let res = u.matvec(&local);
                for (&(a, b), r) in states.iter().zip(res) {
                    out[base + a * sj + b * sk] = r;
                }
            }
        }
        out
    }
}

/// Index of `|m> (x) |q>` in a mode-qubit pair space (`q = 0` is `|e>`).
#[inline]
pub fn pair_index(m: usize, q: usize) -> usize {
    2 * m + q
}

/// `H' = gt (Q X - P Y)` on a mode truncated to `dim` levels times one qubit.
pub fn jc_generator<T: Real>(dim: usize, gt: T) -> CMatrix<T> {
    use crate::pauli::Pauli;
    let q = position::<T>(dim);
    let p = momentum::<T>(dim);
    q.kron(&Pauli::X.matrix())
        .sub(&p.kron(&Pauli::Y.matrix()))
        .scale(cx(gt, T::zero()))
}

/// `exp(-i H')` by dense matrix exponential.
pub fn jc_unitary<T: Real>(dim: usize, gt: T) -> CMatrix<T> {
    jc_generator(dim, gt).scale(cx(T::zero(), -T::one())).expm()
}

/// Closed form of [`jc_unitary`]: `|n, e> <-> |n+1, g>` rotate by
/// `theta_n = sqrt(2) gt sqrt(n+1)`; `|0, g>` and the truncation edge
/// `|d-1, e>` are stationary.
pub fn jc_unitary_analytic<T: Real>(dim: usize, gt: T) -> CMatrix<T> {
    let mut u = CMatrix::zeros(2 * dim, 2 * dim);
    u[(pair_index(0, 1), pair_index(0, 1))] = cx(T::one(), T::zero());
    u[(pair_index(dim - 1, 0), pair_index(dim - 1, 0))] = cx(T::one(), T::zero());
    let g = T::lit(2.0).sqrt() * gt;
    for n in 0..dim - 1 {
        let theta = g * T::from_usize_lossy(n + 1).sqrt();
        let (e, gnd) = (pair_index(n, 0), pair_index(n + 1, 1));
        let c = cx(theta.cos(), T::zero());
        let s = cx(T::zero(), -theta.sin());
        u[(e, e)] = c;
        u[(gnd, gnd)] = c;
        u[(e, gnd)] = s;
        u[(gnd, e)] = s;
    }
    u
}

/// Sparse per-pair JC propagator.
pub fn jc_propagator<T: Real>(dim: usize, gt: T) -> SparseLocalOp<T> {
    SparseLocalOp::from_dense(&jc_unitary_analytic(dim, gt), dim, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_commutator_away_from_edge() {
        let d = 12;
        let q = position::<f64>(d);
        let p = momentum::<f64>(d);
        let c = q.matmul(&p).sub(&p.matmul(&q));
        for n in 0..d - 1 {
            assert!((c[(n, n)] - cx(0.0, 1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn displacement_moves_vacuum() {
        let d = 40;
        let alpha = cx(0.6, -0.3);
        let u = displacement::<f64>(d, alpha);
        let v: Vec<Cx<f64>> = (0..d).map(|i| u[(i, 0)]).collect();
        // coherent-state amplitudes e^{-|a|^2/2} a^n / sqrt(n!)
        let mut expected = (-alpha.norm_sqr() / 2.0).exp();
        let mut pow = cx(1.0, 0.0);
        for (n, amp) in v.iter().enumerate().take(15) {
            if n > 0 {
                pow *= alpha;
                expected /= (n as f64).sqrt();
            }
            assert!((*amp - pow * expected).norm() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn squeezed_vacuum_variance() {
        let d = 60;
        let s = squeezer::<f64>(d, cx(0.3, 0.0));
        let v: Vec<Cx<f64>> = (0..d).map(|i| s[(i, 0)]).collect();
        let q = position::<f64>(d);
        let qv = q.matvec(&v);
        let var: f64 = qv.iter().map(|x| x.norm_sqr()).sum();
        assert!((var - (-0.6f64).exp() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_mode_squeezer_matches_dense_exponential() {
        let d = 8;
        let z = cx(0.3, 0.2);
        let tms = TwoModeSqueezer::<f64>::new(d, z);
        let a = annihilation::<f64>(d);
        let id = CMatrix::<f64>::identity(d);
        let a1 = a.kron(&id);
        let a2 = id.kron(&a);
        let half = cx(0.5, 0.0);
        let gen = a1
            .matmul(&a2)
            .scale(z.conj() * half)
            .sub(&a1.adjoint().matmul(&a2.adjoint()).scale(z * half));
        let dense = gen.expm();
        for col in [0usize, 3, 9, 17, 40] {
            let mut e = vec![cx(0.0, 0.0); d * d];
            e[col] = cx(1.0, 0.0);
            let out = tms.apply(&e, &[d, d], 0, 1);
            for r in 0..d * d {
                assert!((out[r] - dense[(r, col)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn jc_exponential_matches_closed_form() {
        for gt in [0.01, 0.3, 1.7] {
            let dense = jc_unitary::<f64>(15, gt);
            let analytic = jc_unitary_analytic::<f64>(15, gt);
            assert!(dense.sub(&analytic).max_abs() < 1e-13, "gt = {gt}");
        }
    }
}
