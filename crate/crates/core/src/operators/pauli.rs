//! Pauli strings and single-qubit operator constants.
//!
//! `sigma_minus = |0><1|` annihilates the qubit excitation, i.e. hardware
//! damping decays towards `|0> = |up>`; `sigma_plus = |1><0|` excites. With
//! this convention `X sigma_- X = sigma_+`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::{kron, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliFactor {
    I,
    X,
    Y,
    Z,
    /// sigma+ = |1><0|
    Plus,
    /// sigma- = |0><1|
    Minus,
}

impl PauliFactor {
    pub fn matrix(self) -> CMat {
        match self {
            PauliFactor::I => pauli_i(),
            PauliFactor::X => pauli_x(),
            PauliFactor::Y => pauli_y(),
            PauliFactor::Z => pauli_z(),
            PauliFactor::Plus => sigma_plus(),
            PauliFactor::Minus => sigma_minus(),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliFactor::I => 'I',
            PauliFactor::X => 'X',
            PauliFactor::Y => 'Y',
            PauliFactor::Z => 'Z',
            PauliFactor::Plus => '+',
            PauliFactor::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        Ok(match c {
            'I' | 'i' => PauliFactor::I,
            'X' | 'x' => PauliFactor::X,
            'Y' | 'y' => PauliFactor::Y,
            'Z' | 'z' => PauliFactor::Z,
            '+' => PauliFactor::Plus,
            '-' => PauliFactor::Minus,
            _ => return Err(Error::Validation(format!("unknown Pauli symbol '{c}'"))),
        })
    }
}

pub fn pauli_i() -> CMat {
    CMat::eye(2)
}

pub fn pauli_x() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 1]] = ONE;
    m[[1, 0]] = ONE;
    m
}

pub fn pauli_y() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 1]] = C64::new(0.0, -1.0);
    m[[1, 0]] = C64::new(0.0, 1.0);
    m
}

pub fn pauli_z() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 0]] = ONE;
    m[[1, 1]] = -ONE;
    m
}

/// `|1><0|`
pub fn sigma_plus() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[1, 0]] = ONE;
    m
}

/// `|0><1|`
pub fn sigma_minus() -> CMat {
    let mut m = CMat::zeros((2, 2));
    m[[0, 1]] = ONE;
    m
}

/// Tensor product of per-qubit factors from `{I, X, Y, Z, sigma+, sigma-}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    factors: Vec<PauliFactor>,
}

impl PauliString {
    pub fn new(factors: Vec<PauliFactor>) -> Self {
        Self { factors }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { factors: vec![PauliFactor::I; n_qubits] }
    }

    /// Single non-trivial factor on the given qubit.
    pub fn single(n_qubits: usize, qubit: usize, f: PauliFactor) -> Self {
        let mut factors = vec![PauliFactor::I; n_qubits];
        factors[qubit] = f;
        Self { factors }
    }

    /// Two non-trivial factors.
    pub fn two(n_qubits: usize, q1: usize, f1: PauliFactor, q2: usize, f2: PauliFactor) -> Self {
        let mut factors = vec![PauliFactor::I; n_qubits];
        factors[q1] = f1;
        factors[q2] = f2;
        Self { factors }
    }

    /// Parse from a symbol string such as `"ZIZ"` or `"-I"` (one symbol per
    /// qubit, qubit 0 first).
    pub fn parse(s: &str) -> Result<Self> {
        let factors = s.chars().map(PauliFactor::from_symbol).collect::<Result<Vec<_>>>()?;
        if factors.is_empty() {
            return Err(Error::Validation("empty Pauli string".into()));
        }
        Ok(Self { factors })
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[PauliFactor] {
        &self.factors
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.iter().filter(|f| **f != PauliFactor::I).count()
    }

    pub fn is_hermitian(&self) -> bool {
        self.factors.iter().all(|f| !matches!(f, PauliFactor::Plus | PauliFactor::Minus))
    }

    /// Dense matrix representation.
    pub fn matrix(&self) -> CMat {
        let mats: Vec<CMat> = self.factors.iter().map(|f| f.matrix()).collect();
        let mut out = mats[0].clone();
        for m in &mats[1..] {
            out = kron(&out, m);
        }
        out
    }

    /// Conjugate by `X` on the listed qubits: `X P X` factorwise. Returns the
    /// accumulated sign and the transformed string. For sigma+/sigma- factors
    /// the operator maps to its partner with sign +1.
    pub fn x_conjugated(&self, flipped: &[bool]) -> (f64, PauliString) {
        assert_eq!(flipped.len(), self.factors.len());
        let mut sign = 1.0;
        let factors = self
            .factors
            .iter()
            .zip(flipped)
            .map(|(f, &flip)| {
                if !flip {
                    return *f;
                }
                match f {
                    PauliFactor::I | PauliFactor::X => *f,
                    PauliFactor::Y => {
                        sign = -sign;
                        PauliFactor::Y
                    }
                    PauliFactor::Z => {
                        sign = -sign;
                        PauliFactor::Z
                    }
                    PauliFactor::Plus => PauliFactor::Minus,
                    PauliFactor::Minus => PauliFactor::Plus,
                }
            })
            .collect();
        (sign, PauliString { factors })
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for factor in &self.factors {
            write!(f, "{}", factor.symbol())?;
        }
        Ok(())
    }
}

/// The 4^n Hermitian Pauli basis strings (I/X/Y/Z only) in lexicographic
/// order with I < X < Y < Z, qubit 0 varying slowest.
pub fn hermitian_basis(n_qubits: usize) -> Vec<PauliString> {
    let count = 4usize.pow(n_qubits as u32);
    let letters = [PauliFactor::I, PauliFactor::X, PauliFactor::Y, PauliFactor::Z];
    (0..count)
        .map(|mut code| {
            let mut factors = vec![PauliFactor::I; n_qubits];
            for q in (0..n_qubits).rev() {
                factors[q] = letters[code % 4];
                code /= 4;
            }
            PauliString::new(factors)
        })
        .collect()
}

/// Identify a matrix as `phase * P` for a Hermitian Pauli string `P`, if it
/// is one. Returns the string and the complex phase.
pub fn identify_pauli(m: &CMat, tol: f64) -> Option<(PauliString, C64)> {
    let d = m.nrows();
    if !d.is_power_of_two() || m.ncols() != d {
        return None;
    }
    let n = d.trailing_zeros() as usize;
    for p in hermitian_basis(n) {
        let pm = p.matrix();
        // phase = tr(P^dag M) / d
        let mut phase = ZERO;
        for i in 0..d {
            for j in 0..d {
                phase += pm[[j, i]].conj() * m[[j, i]];
            }
        }
        phase /= d as f64;
        if phase.norm() < tol {
            continue;
        }
        let mut ok = true;
        'outer: for i in 0..d {
            for j in 0..d {
                if (m[[i, j]] - phase * pm[[i, j]]).norm() > tol {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return Some((p, phase));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn x_sigma_minus_x_is_sigma_plus() {
        let x = pauli_x();
        let conj = x.dot(&sigma_minus()).dot(&x);
        assert!(max_abs(&(&conj - &sigma_plus())) < 1e-15);
    }

    #[test]
    fn string_matrix_matches_factors() {
        let p = PauliString::parse("XZ").unwrap();
        let expect = kron(&pauli_x(), &pauli_z());
        assert!(max_abs(&(&p.matrix() - &expect)) < 1e-15);
    }

    #[test]
    fn x_conjugation_signs() {
        let p = PauliString::parse("ZY-").unwrap();
        let (sign, q) = p.x_conjugated(&[true, true, true]);
        assert_eq!(sign, 1.0); // Z -> -Z, Y -> -Y, two signs cancel
        assert_eq!(q.to_string(), "ZY+");
        let (sign, q) = p.x_conjugated(&[true, false, false]);
        assert_eq!(sign, -1.0);
        assert_eq!(q.to_string(), "ZY-");
    }

    #[test]
    fn identify_pauli_roundtrip() {
        let p = PauliString::parse("YZ").unwrap();
        let m = p.matrix().mapv(|z| z * C64::new(0.0, -1.0));
        let (q, phase) = identify_pauli(&m, 1e-12).unwrap();
        assert_eq!(q, p);
        assert!((phase - C64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn basis_count() {
        assert_eq!(hermitian_basis(2).len(), 16);
        assert_eq!(hermitian_basis(2)[0].to_string(), "II");
        assert_eq!(hermitian_basis(2)[15].to_string(), "ZZ");
    }
}
