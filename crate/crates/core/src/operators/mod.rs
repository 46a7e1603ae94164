//! Dense complex operator algebra: density matrices, Pauli strings,
//! superoperators, partial trace and expectation values.
//!
//! Conventions used throughout the crate:
//!
//! * Qubit 0 is the most significant bit of a basis index, i.e. the state
//!   `|q0 q1 ... q(n-1)>` has index `q0*2^(n-1) + ... + q(n-1)` and tensor
//!   products compose as `kron(op_q0, op_q1, ...)`.
//! * `|0> = |up>` is the low-energy qubit state that hardware damping decays
//!   towards; `sigma_z |0> = +|0>`.
//! * Superoperators act on **column-stacked** density matrices:
//!   `vec(A rho B) = (B^T (x) A) vec(rho)`.

pub mod apply;
pub mod expm;
pub mod pauli;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

pub use expm::{matrix_exponential, matrix_log};
pub use pauli::{PauliFactor, PauliString};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I_UNIT: C64 = C64 { re: 0.0, im: 1.0 };

/// Hermiticity / trace tolerance applied when constructing a [`DensityMatrix`].
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Entrywise Hermiticity tolerance.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_TOL: f64 = -1e-9;

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[CMat]) -> CMat {
    assert!(!factors.is_empty());
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = kron(&out, f);
    }
    out
}

/// 2x2 identity.
pub fn eye(d: usize) -> CMat {
    CMat::eye(d)
}

/// Embed a k-qubit operator acting on the given (distinct) qubits of an
/// n-qubit register into the full 2^n-dimensional space.
///
/// `op` is given in the qubit order listed in `qubits` (first listed qubit is
/// the most significant bit of the small operator's index).
pub fn embed_operator(op: &CMat, qubits: &[usize], n_qubits: usize) -> Result<CMat> {
    let k = qubits.len();
    let dk = 1usize << k;
    if op.dim() != (dk, dk) {
        return Err(Error::Dimension(format!(
            "embed_operator: operator is {:?}, expected {dk}x{dk} for {k} qubit(s)",
            op.dim()
        )));
    }
    for (idx, &q) in qubits.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::Validation(format!(
                "embed_operator: qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        if qubits[..idx].contains(&q) {
            return Err(Error::Validation(format!("embed_operator: duplicate qubit {q}")));
        }
    }
    let d = 1usize << n_qubits;
    let mut out = CMat::zeros((d, d));
    // bit position of qubit q counted from the least significant end
    let shift = |q: usize| n_qubits - 1 - q;
    let rest_mask = {
        let mut m = usize::MAX >> (usize::BITS as usize - n_qubits.max(1));
        if n_qubits == 0 {
            m = 0;
        }
        for &q in qubits {
            m &= !(1usize << shift(q));
        }
        m
    };
    // enumerate indices of the untouched qubits
    let mut rest_indices = Vec::with_capacity(d >> k);
    let mut idx = 0usize;
    loop {
        rest_indices.push(idx);
        if idx == rest_mask {
            break;
        }
        idx = (idx.wrapping_sub(rest_mask)) & rest_mask; // next subset of rest_mask
    }
    for &rest in &rest_indices {
        for a in 0..dk {
            for b in 0..dk {
                let v = op[[a, b]];
                if v == ZERO {
                    continue;
                }
                let mut row = rest;
                let mut col = rest;
                for (pos, &q) in qubits.iter().enumerate() {
                    let abit = (a >> (k - 1 - pos)) & 1;
                    let bbit = (b >> (k - 1 - pos)) & 1;
                    row |= abit << shift(q);
                    col |= bbit << shift(q);
                }
                out[[row, col]] = v;
            }
        }
    }
    Ok(out)
}

/// Column-stacking vectorization: `vec(rho)[j*d + i] = rho[i, j]`.
pub fn vectorize(rho: &CMat) -> Vec<C64> {
    let (d, d2) = rho.dim();
    assert_eq!(d, d2);
    let mut v = vec![ZERO; d * d];
    for j in 0..d {
        for i in 0..d {
            v[j * d + i] = rho[[i, j]];
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[C64], d: usize) -> CMat {
    assert_eq!(v.len(), d * d);
    let mut rho = CMat::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            rho[[i, j]] = v[j * d + i];
        }
    }
    rho
}

/// Exact mixed state of `n` qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: CMat,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian to 1e-10 entrywise, unit trace to
    /// 1e-9, eigenvalues above -1e-9.
    pub fn new(mat: CMat) -> Result<Self> {
        let dm = Self::new_unchecked(mat)?;
        dm.check_hermitian(HERMITICITY_TOL)?;
        dm.check_trace(CONSTRUCTION_TOL)?;
        dm.check_psd(PSD_TOL)?;
        Ok(dm)
    }

    /// Constructor that only checks the shape. Used on hot paths where the
    /// invariants are maintained by construction and revalidated separately.
    pub fn new_unchecked(mat: CMat) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c || r == 0 || !r.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "density matrix must be 2^n x 2^n, got {r}x{c}"
            )));
        }
        let n_qubits = r.trailing_zeros() as usize;
        Ok(Self { n_qubits, mat })
    }

    /// Computational basis product state. `bits[q] = false` means qubit `q`
    /// is `|0> = |up>`.
    pub fn product_state(bits: &[bool]) -> Self {
        let n = bits.len();
        let d = 1usize << n;
        let mut idx = 0usize;
        for (q, &b) in bits.iter().enumerate() {
            if b {
                idx |= 1 << (n - 1 - q);
            }
        }
        let mut mat = CMat::zeros((d, d));
        mat[[idx, idx]] = ONE;
        Self { n_qubits: n, mat }
    }

    /// All qubits in `|0> = |up>`.
    pub fn all_up(n_qubits: usize) -> Self {
        Self::product_state(&vec![false; n_qubits])
    }

    /// Fully mixed state `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mat = CMat::eye(d).mapv(|z| z / d as f64);
        Self { n_qubits, mat }
    }

    /// Pure state from a normalized state vector.
    pub fn from_state_vector(psi: &[C64]) -> Result<Self> {
        let d = psi.len();
        if !d.is_power_of_two() || d == 0 {
            return Err(Error::Dimension(format!("state vector length {d} is not 2^n")));
        }
        let mut mat = CMat::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[[i, j]] = psi[i] * psi[j].conj();
            }
        }
        Self::new(mat)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let diff = (self.mat[[i, j]] - self.mat[[j, i]].conj()).norm();
                if diff > tol {
                    return Err(Error::Validation(format!(
                        "density matrix not Hermitian at ({i},{j}): deviation {diff:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn check_trace(&self, tol: f64) -> Result<()> {
        let t = self.trace();
        if (t.re - 1.0).abs() > tol || t.im.abs() > tol {
            return Err(Error::Validation(format!("density matrix trace = {t}, expected 1")));
        }
        Ok(())
    }

    pub fn check_psd(&self, min_eig: f64) -> Result<()> {
        let h = (&self.mat + &self.mat.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        let (w, _) = linalg::eigh(&h)?;
        if let Some(&lo) = w.first() {
            if lo < min_eig {
                return Err(Error::Validation(format!(
                    "density matrix has eigenvalue {lo:.3e} below {min_eig:.0e}"
                )));
            }
        }
        Ok(())
    }
}

/// Superoperator on column-stacked density matrices (4^n x 4^n).
#[derive(Debug, Clone)]
pub struct Superoperator {
    n_qubits: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn new(mat: CMat) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c || r == 0 {
            return Err(Error::Dimension(format!("superoperator must be square, got {r}x{c}")));
        }
        // r = 4^n
        let d = (r as f64).sqrt().round() as usize;
        if d * d != r || !d.is_power_of_two() {
            return Err(Error::Dimension(format!("superoperator dimension {r} is not 4^n")));
        }
        Ok(Self { n_qubits: d.trailing_zeros() as usize, mat })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d4 = 1usize << (2 * n_qubits);
        Self { n_qubits, mat: CMat::eye(d4) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Hilbert-space dimension 2^n.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Apply to a density matrix.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let d = self.dim();
        if rho.dim() != (d, d) {
            return Err(Error::Dimension(format!(
                "superoperator on {d}x{d} states applied to {:?}",
                rho.dim()
            )));
        }
        let v = vectorize(rho);
        let v = ndarray::Array1::from_vec(v);
        let w = self.mat.dot(&v);
        Ok(unvectorize(w.as_slice().unwrap(), d))
    }

    /// Composition: `self` after `other`.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension("composing superoperators of different sizes".into()));
        }
        Ok(Superoperator { n_qubits: self.n_qubits, mat: self.mat.dot(&other.mat) })
    }

    /// Trace preservation defect: max column sum deviation of the map applied
    /// to the identity functional, `|| vec(I)^T L - vec(I)^T ||_inf` for a
    /// channel or `|| vec(I)^T L ||_inf` for a generator.
    pub fn trace_defect(&self, is_generator: bool) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for col in 0..d * d {
            let mut s = ZERO;
            for i in 0..d {
                // row index of diagonal element (i, i) in column stacking
                s += self.mat[[i * d + i, col]];
            }
            let target = if is_generator {
                ZERO
            } else if col % (d + 1) == 0 {
                ONE
            } else {
                ZERO
            };
            let dev = (s - target).norm();
            if dev > worst {
                worst = dev;
            }
        }
        worst
    }

    /// Choi matrix (column-stacking convention), `d^2 x d^2`.
    pub fn choi(&self) -> CMat {
        let d = self.dim();
        let mut choi = CMat::zeros((d * d, d * d));
        // Choi = sum_{ij} |i><j| (x) L(|i><j|)
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros((d, d));
                e[[i, j]] = ONE;
                let le = self.apply(&e).unwrap();
                for k in 0..d {
                    for l in 0..d {
                        choi[[i * d + k, j * d + l]] = le[[k, l]];
                    }
                }
            }
        }
        choi
    }
}

/// Superoperator of the unitary conjugation `rho -> U rho U^dagger`.
pub fn unitary_superoperator(u: &CMat) -> Result<Superoperator> {
    let (r, c) = u.dim();
    if r != c {
        return Err(Error::Dimension(format!("unitary must be square, got {r}x{c}")));
    }
    // unitarity check: max |U^dagger U - I|
    let udu = u.t().mapv(|z| z.conj()).dot(u);
    let defect = linalg::max_abs(&(&udu - &CMat::eye(r)));
    if defect > 1e-9 {
        return Err(Error::Validation(format!(
            "matrix is not unitary: ||U^H U - I||_max = {defect:.3e}"
        )));
    }
    let ubar = u.mapv(|z| z.conj());
    Superoperator::new(kron(&ubar, u))
}

/// Lindblad generator superoperator for Hamiltonian `h` and jump operators
/// with nonnegative rates: `L[rho] = i[rho, h] + sum_k rate_k D[A_k] rho`
/// where `D[A] rho = A rho A^dag - (A^dag A rho + rho A^dag A)/2`.
pub fn lindblad_superoperator(h: &CMat, jumps: &[(CMat, f64)]) -> Result<Superoperator> {
    let (r, c) = h.dim();
    if r != c {
        return Err(Error::Dimension(format!("Hamiltonian must be square, got {r}x{c}")));
    }
    let herm_defect = linalg::max_abs(&(h - &h.t().mapv(|z| z.conj())));
    if herm_defect > 1e-9 {
        return Err(Error::Validation(format!(
            "Hamiltonian not Hermitian: deviation {herm_defect:.3e}"
        )));
    }
    let d = r;
    let id = CMat::eye(d);
    // i [rho, H] = -i H rho + i rho H  ->  -i (I (x) H) + i (H^T (x) I)
    let mut l = kron(&id, h).mapv(|z| z * C64::new(0.0, -1.0))
        + kron(&h.t().to_owned(), &id).mapv(|z| z * C64::new(0.0, 1.0));
    for (a, rate) in jumps {
        if a.dim() != (d, d) {
            return Err(Error::Dimension(format!(
                "jump operator is {:?}, expected {d}x{d}",
                a.dim()
            )));
        }
        if *rate < 0.0 {
            return Err(Error::Validation(format!("negative jump rate {rate}")));
        }
        if *rate == 0.0 {
            continue;
        }
        let adag = a.t().mapv(|z| z.conj());
        let ada = adag.dot(a);
        let abar = a.mapv(|z| z.conj());
        // A rho A^dag -> (conj(A) (x) A)
        l = l + kron(&abar, a).mapv(|z| z * rate);
        // -1/2 {A^dag A, rho}
        l = l - kron(&id, &ada).mapv(|z| z * (0.5 * rate));
        l = l - kron(&ada.t().to_owned(), &id).mapv(|z| z * (0.5 * rate));
    }
    Superoperator::new(l)
}

/// Reduced state on the kept qubits (ascending logical indices).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return Err(Error::Validation("partial_trace: keep set is empty".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::Validation("partial_trace: duplicate qubit in keep set".into()));
    }
    if *keep_sorted.last().unwrap() >= n {
        return Err(Error::Validation(format!(
            "partial_trace: qubit {} out of range for {n} qubits",
            keep_sorted.last().unwrap()
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep_sorted.contains(q)).collect();
    let nk = keep_sorted.len();
    let dk = 1usize << nk;
    let dt = 1usize << traced.len();
    let shift = |q: usize| n - 1 - q;
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in keep_sorted.iter().enumerate() {
            idx |= ((kept_bits >> (nk - 1 - pos)) & 1) << shift(q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            idx |= ((traced_bits >> (traced.len() - 1 - pos)) & 1) << shift(q);
        }
        idx
    };
    let m = rho.matrix();
    let mut out = CMat::zeros((dk, dk));
    for ik in 0..dk {
        for jk in 0..dk {
            let mut s = ZERO;
            for it in 0..dt {
                s += m[[compose(ik, it), compose(jk, it)]];
            }
            out[[ik, jk]] = s;
        }
    }
    DensityMatrix::new_unchecked(out)
}

/// Purity `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = rho.dim();
    let mut s = ZERO;
    for i in 0..d {
        for j in 0..d {
            s += m[[i, j]] * m[[j, i]];
        }
    }
    s.re
}

/// Expectation value `Tr(rho P)` of a Pauli string. Returns the real part;
/// for Hermitian strings the imaginary part vanishes to numerical precision.
pub fn expectation(rho: &DensityMatrix, p: &PauliString) -> Result<f64> {
    if p.n_qubits() != rho.n_qubits() {
        return Err(Error::Dimension(format!(
            "expectation: string on {} qubits, state on {}",
            p.n_qubits(),
            rho.n_qubits()
        )));
    }
    let n = rho.n_qubits();
    let m = rho.matrix();
    let d = rho.dim();
    // Tr(rho P) = sum_{i,j} rho[i,j] P[j,i]; each column i of P has at most
    // one nonzero entry at row j = i with flipped bits.
    let mut total = ZERO;
    for i in 0..d {
        let mut j = i;
        let mut amp = ONE;
        let mut vanish = false;
        for (q, f) in p.factors().iter().enumerate() {
            let bit = (i >> (n - 1 - q)) & 1;
            match f {
                PauliFactor::I => {}
                PauliFactor::X => j ^= 1 << (n - 1 - q),
                PauliFactor::Y => {
                    j ^= 1 << (n - 1 - q);
                    // Y = [[0,-i],[i,0]]: Y[1,0] = i, Y[0,1] = -i; entry P[j_bit, i_bit]
                    amp *= if bit == 0 { I_UNIT } else { -I_UNIT };
                }
                PauliFactor::Z => {
                    if bit == 1 {
                        amp = -amp;
                    }
                }
                PauliFactor::Minus => {
                    // sigma- = |0><1| (damping towards |0> = |up>): column 1 -> row 0
                    if bit == 1 {
                        j &= !(1 << (n - 1 - q));
                    } else {
                        vanish = true;
                        break;
                    }
                }
                PauliFactor::Plus => {
                    // sigma+ = |1><0| (excitation): column 0 -> row 1
                    if bit == 0 {
                        j |= 1 << (n - 1 - q);
                    } else {
                        vanish = true;
                        break;
                    }
                }
            }
        }
        if !vanish {
            total += m[[i, j]] * amp;
        }
    }
    Ok(total.re)
}

#[cfg(test)]
pub(crate) mod tests;
