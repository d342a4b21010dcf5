//! Row-major tensors over a list of local dimensions (site 0 most significant).

use crate::gaussian::Quad;
use crate::linalg::CMatrix;
use crate::scalar::{cx, Cx, Real};

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every index whose digits on `sites` are zero.
pub fn bases(dims: &[usize], sites: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let total: usize = dims.iter().product();
    (0..total)
        .filter(|&i| sites.iter().all(|&s| (i / st[s]) % dims[s] == 0))
        .collect()
}

/// Apply a dense `d x d` operator to one site.
pub fn apply_local<T: Real>(v: &[Cx<T>], dims: &[usize], site: usize, op: &CMatrix<T>) -> Vec<Cx<T>> {
    let d = dims[site];
    assert_eq!(op.rows(), d);
    let st = strides(dims)[site];
    let zero = cx(T::zero(), T::zero());
    let mut out = vec![zero; v.len()];
    let mut local = vec![zero; d];
    for base in bases(dims, &[site]) {
        for (b, slot) in local.iter_mut().enumerate() {
            *slot = v[base + b * st];
        }
        for a in 0..d {
            let row = op.row(a);
            let mut acc = zero;
            for (x, y) in row.iter().zip(&local) {
                acc += *x * *y;
            }
            out[base + a * st] = acc;
        }
    }
    out
}

/// `Q` or `P` on a mode site, truncated to the site dimension.
pub fn apply_quadrature<T: Real>(v: &[Cx<T>], dims: &[usize], site: usize, quad: Quad) -> Vec<Cx<T>> {
    let d = dims[site];
    let st = strides(dims)[site];
    let h = T::lit(0.5).sqrt();
    let zero = cx(T::zero(), T::zero());
    let sqrt: Vec<T> = (0..=d).map(|n| T::from_usize_lossy(n).sqrt() * h).collect();
    let mut out = vec![zero; v.len()];
    for (i, &x) in v.iter().enumerate() {
        if x == zero {
            continue;
        }
        let n = (i / st) % d;
        // a|n> = sqrt(n)|n-1>, a^dag|n> = sqrt(n+1)|n+1>
        let (lo, hi) = match quad {
            Quad::Q => (cx(sqrt[n], T::zero()), cx(sqrt[n + 1], T::zero())),
            Quad::P => (cx(T::zero(), -sqrt[n]), cx(T::zero(), sqrt[n + 1])),
        };
        if n > 0 {
            out[i - st] += lo * x;
        }
        if n + 1 < d {
            out[i + st] += hi * x;
        }
    }
    out
}

/// Operator on two sites `(a, b)` stored by its nonzero entries, with local
/// index `i_a * d_b + i_b`.
#[derive(Clone, Debug)]
pub struct SparseLocalOp<T: Real> {
    pub d_a: usize,
    pub d_b: usize,
    entries: Vec<(usize, usize, Cx<T>)>,
}

impl<T: Real> SparseLocalOp<T> {
    pub fn from_dense(m: &CMatrix<T>, d_a: usize, d_b: usize) -> Self {
        assert_eq!(m.rows(), d_a * d_b);
        let zero = cx(T::zero(), T::zero());
        let mut entries = Vec::new();
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if m[(r, c)] != zero {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        Self { d_a, d_b, entries }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, v: &[Cx<T>], dims: &[usize], site_a: usize, site_b: usize) -> Vec<Cx<T>> {
        assert_eq!(dims[site_a], self.d_a);
        assert_eq!(dims[site_b], self.d_b);
        let st = strides(dims);
        let (sa, sb) = (st[site_a], st[site_b]);
        let offset = |k: usize| (k / self.d_b) * sa + (k % self.d_b) * sb;
        let zero = cx(T::zero(), T::zero());
        let mut out = vec![zero; v.len()];
        for base in bases(dims, &[site_a, site_b]) {
            for &(r, c, val) in &self.entries {
                let x = v[base + offset(c)];
                if x != zero {
                    out[base + offset(r)] += val * x;
                }
            }
        }
        out
    }
}

pub fn inner<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    a.iter()
        .zip(b)
        .fold(cx(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y)
}

pub fn norm_sqr<T: Real>(v: &[Cx<T>]) -> T {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Copy a tensor into one with larger (or equal) local dimensions.
pub fn embed<T: Real>(v: &[Cx<T>], from: &[usize], to: &[usize]) -> Vec<Cx<T>> {
    let total: usize = to.iter().product();
    let mut out = vec![cx(T::zero(), T::zero()); total];
    let sf = strides(from);
    let stt = strides(to);
    for (i, &x) in v.iter().enumerate() {
        let j: usize = (0..from.len()).map(|s| ((i / sf[s]) % from[s]) * stt[s]).sum();
        out[j] = x;
    }
    out
}

/// Keep only the components with every digit below `to[s]`.
pub fn project<T: Real>(v: &[Cx<T>], from: &[usize], to: &[usize]) -> Vec<Cx<T>> {
    let total: usize = to.iter().product();
    let sf = strides(from);
    let stt = strides(to);
    let mut out = vec![cx(T::zero(), T::zero()); total];
    for (j, slot) in out.iter_mut().enumerate() {
        let i: usize = (0..to.len()).map(|s| ((j / stt[s]) % to[s]) * sf[s]).sum();
        *slot = v[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_and_bases() {
        assert_eq!(strides(&[3, 4, 2]), vec![8, 2, 1]);
        assert_eq!(bases(&[2, 3], &[1]), vec![0, 3]);
        assert_eq!(bases(&[2, 3], &[0]), vec![0, 1, 2]);
    }

    #[test]
    fn embed_then_project_is_identity() {
        let v: Vec<Cx<f64>> = (0..6).map(|i| cx(i as f64, 0.5)).collect();
        let big = embed(&v, &[2, 3], &[4, 5]);
        assert_eq!(project(&big, &[4, 5], &[2, 3]), v);
    }

    #[test]
    fn quadrature_matches_dense_operator() {
        let dims = [5, 4];
        let v: Vec<Cx<f64>> = (0..20).map(|i| cx(i as f64 * 0.1, -(i as f64) * 0.03)).collect();
        let dense_p = super::super::ops::momentum::<f64>(4);
        let a = apply_quadrature(&v, &dims, 1, Quad::P);
        let b = apply_local(&v, &dims, 1, &dense_p);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-15);
        }
    }
}
