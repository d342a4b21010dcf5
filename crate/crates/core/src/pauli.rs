//! Pauli operators, Pauli strings and the single-qubit preparations used by
//! the transduction protocol.
//!
//! Basis convention: `|0> = |e>` (`Z = +1`) and `|1> = |g>` (`Z = -1`); in a
//! multi-qubit register qubit 0 is the most significant tensor factor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cx, Cx, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Powers of `i`, used as exact phases.
#[inline]
pub fn i_pow<T: Real>(k: u8) -> Cx<T> {
    match k % 4 {
        0 => cx(T::one(), T::zero()),
        1 => cx(T::zero(), T::one()),
        2 => cx(-T::one(), T::zero()),
        _ => cx(T::zero(), -T::one()),
    }
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const BASES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::Parse(format!("unknown Pauli letter {c:?}"))),
        }
    }

    /// `self * rhs = i^phase * result`.
    pub fn mul(self, rhs: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn matrix<T: Real>(self) -> CMatrix<T> {
        let (o, z) = (T::one(), T::zero());
        let e = |re, im| cx(re, im);
        let data = match self {
            Pauli::I => vec![e(o, z), e(z, z), e(z, z), e(o, z)],
            Pauli::X => vec![e(z, z), e(o, z), e(o, z), e(z, z)],
            Pauli::Y => vec![e(z, z), e(z, -o), e(z, o), e(z, z)],
            Pauli::Z => vec![e(o, z), e(z, z), e(z, z), e(-o, z)],
        };
        CMatrix::from_rows(2, 2, data)
    }

    /// Action on a computational basis state: `P|b> = i^phase |b ^ flip>`.
    #[inline]
    fn act(self, bit: usize) -> (u8, usize) {
        match self {
            Pauli::I => (0, 0),
            Pauli::X => (0, 1),
            Pauli::Y => (if bit == 0 { 1 } else { 3 }, 1),
            Pauli::Z => (if bit == 0 { 0 } else { 2 }, 0),
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// String acting as `ops[i].1` on qubit `ops[i].0` and identity elsewhere.
    pub fn from_sparse(n: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n);
        for &(q, p) in ops {
            s.0[q] = p;
        }
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] != Pauli::I).collect()
    }

    pub fn restrict(&self, qubits: &[usize]) -> Self {
        Self(qubits.iter().map(|&q| self.0[q]).collect())
    }

    pub fn matrix<T: Real>(&self) -> CMatrix<T> {
        self.0
            .iter()
            .fold(CMatrix::identity(1), |acc, p| acc.kron(&p.matrix()))
    }

    /// All 15 non-identity strings on two qubits, ordered by `(P_a, P_b)`.
    pub fn two_qubit_all() -> Vec<Self> {
        let mut v = Vec::with_capacity(15);
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                if (a, b) != (Pauli::I, Pauli::I) {
                    v.push(Self(vec![a, b]));
                }
            }
        }
        v
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>().map(Self)
    }
}

/// `tr(rho P)` for a `2^n x 2^n` density matrix, computed without forming `P`.
pub fn pauli_expectation<T: Real>(rho: &CMatrix<T>, p: &PauliString) -> Cx<T> {
    let n = p.n_qubits();
    let dim = 1usize << n;
    assert_eq!(rho.rows(), dim, "density matrix does not match string length");
    let mut acc = cx(T::zero(), T::zero());
    for b in 0..dim {
        let mut phase = 0u8;
        let mut target = b;
        for (q, op) in p.0.iter().enumerate() {
            let shift = n - 1 - q;
            let (ph, flip) = op.act((b >> shift) & 1);
            phase = (phase + ph) % 4;
            target ^= flip << shift;
        }
        // P|b> = i^phase |target>, hence <b|rho P|b> = i^phase rho[b, target]
        acc += i_pow::<T>(phase) * rho[(b, target)];
    }
    acc
}

/// Single-qubit preparations available to the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitInit {
    /// `|g>`, the `-1` eigenstate of `Z`.
    Ground,
    /// `|+>`, the `+1` eigenstate of `X`.
    Plus,
    /// `|+i>`, the `+1` eigenstate of `Y`.
    PlusI,
}

impl QubitInit {
    /// Bloch component `<P>` of the preparation.
    pub fn expectation(self, p: Pauli) -> i8 {
        match (self, p) {
            (_, Pauli::I) => 1,
            (QubitInit::Ground, Pauli::Z) => -1,
            (QubitInit::Plus, Pauli::X) => 1,
            (QubitInit::PlusI, Pauli::Y) => 1,
            _ => 0,
        }
    }

    /// State vector in the `(|e>, |g>)` basis.
    pub fn ket<T: Real>(self) -> [Cx<T>; 2] {
        let h = T::lit(0.5).sqrt();
        match self {
            QubitInit::Ground => [cx(T::zero(), T::zero()), cx(T::one(), T::zero())],
            QubitInit::Plus => [cx(h, T::zero()), cx(h, T::zero())],
            QubitInit::PlusI => [cx(h, T::zero()), cx(T::zero(), h)],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QubitInit::Ground => "g",
            QubitInit::Plus => "+",
            QubitInit::PlusI => "+i",
        }
    }
}

impl fmt::Display for QubitInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Expectation of a Pauli string on a product of preparations.
pub fn product_expectation(inits: &[QubitInit], p: &[Pauli]) -> i8 {
    inits.iter().zip(p).map(|(i, &q)| i.expectation(q)).product()
}
