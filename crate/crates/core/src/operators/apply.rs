//! In-place structured application of local operators and noise channels to
//! a dense density matrix, avoiding full 2^n x 2^n embeddings on hot paths.
//!
//! Qubit `q` of an `n`-qubit register corresponds to bit `n-1-q` of a basis
//! index (qubit 0 is the most significant bit).

use crate::linalg::CMat;

use super::{C64, ZERO};

#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

/// rho <- (M on qubit q) * rho
pub fn left_mul_1q(rho: &mut CMat, n: usize, q: usize, m: &CMat) {
    let d = 1usize << n;
    let mask = qubit_mask(n, q);
    let (m00, m01, m10, m11) = (m[[0, 0]], m[[0, 1]], m[[1, 0]], m[[1, 1]]);
    for i in 0..d {
        if i & mask != 0 {
            continue;
        }
        let i1 = i | mask;
        for j in 0..d {
            let r0 = rho[[i, j]];
            let r1 = rho[[i1, j]];
            rho[[i, j]] = m00 * r0 + m01 * r1;
            rho[[i1, j]] = m10 * r0 + m11 * r1;
        }
    }
}

/// rho <- rho * (M on qubit q)
pub fn right_mul_1q(rho: &mut CMat, n: usize, q: usize, m: &CMat) {
    let d = 1usize << n;
    let mask = qubit_mask(n, q);
    let (m00, m01, m10, m11) = (m[[0, 0]], m[[0, 1]], m[[1, 0]], m[[1, 1]]);
    for j in 0..d {
        if j & mask != 0 {
            continue;
        }
        let j1 = j | mask;
        for i in 0..d {
            let c0 = rho[[i, j]];
            let c1 = rho[[i, j1]];
            rho[[i, j]] = c0 * m00 + c1 * m10;
            rho[[i, j1]] = c0 * m01 + c1 * m11;
        }
    }
}

/// rho <- (M on qubits q1,q2) * rho, with `m` indexed as bits (q1 q2).
pub fn left_mul_2q(rho: &mut CMat, n: usize, q1: usize, q2: usize, m: &CMat) {
    let d = 1usize << n;
    let m1 = qubit_mask(n, q1);
    let m2 = qubit_mask(n, q2);
    let both = m1 | m2;
    for i in 0..d {
        if i & both != 0 {
            continue;
        }
        let idx = [i, i | m2, i | m1, i | both];
        for j in 0..d {
            let mut out = [ZERO; 4];
            for (a, oa) in out.iter_mut().enumerate() {
                let mut s = ZERO;
                for b in 0..4 {
                    let mv = m[[a, b]];
                    if mv != ZERO {
                        s += mv * rho[[idx[b], j]];
                    }
                }
                *oa = s;
            }
            for a in 0..4 {
                rho[[idx[a], j]] = out[a];
            }
        }
    }
}

/// rho <- rho * (M on qubits q1,q2)
pub fn right_mul_2q(rho: &mut CMat, n: usize, q1: usize, q2: usize, m: &CMat) {
    let d = 1usize << n;
    let m1 = qubit_mask(n, q1);
    let m2 = qubit_mask(n, q2);
    let both = m1 | m2;
    for j in 0..d {
        if j & both != 0 {
            continue;
        }
        let idx = [j, j | m2, j | m1, j | both];
        for i in 0..d {
            let mut out = [ZERO; 4];
            for (b, ob) in out.iter_mut().enumerate() {
                let mut s = ZERO;
                for a in 0..4 {
                    let mv = m[[a, b]];
                    if mv != ZERO {
                        s += rho[[i, idx[a]]] * mv;
                    }
                }
                *ob = s;
            }
            for b in 0..4 {
                rho[[i, idx[b]]] = out[b];
            }
        }
    }
}

/// rho <- U rho U^dagger for a single-qubit unitary.
pub fn conjugate_1q(rho: &mut CMat, n: usize, q: usize, u: &CMat) {
    left_mul_1q(rho, n, q, u);
    let udag = u.t().mapv(|z| z.conj());
    right_mul_1q(rho, n, q, &udag);
}

/// rho <- U rho U^dagger for a two-qubit unitary on (q1, q2).
pub fn conjugate_2q(rho: &mut CMat, n: usize, q1: usize, q2: usize, u: &CMat) {
    left_mul_2q(rho, n, q1, q2, u);
    let udag = u.t().mapv(|z| z.conj());
    right_mul_2q(rho, n, q1, q2, &udag);
}

/// Exact damping + pure-dephasing channel on one qubit.
///
/// `e1 = exp(-gamma1 t)` scales the excited population and `e2` scales the
/// coherences; for rates `gamma1 = 1/T1`, `gamma_phi` (sigma_z jump rate) the
/// coherence factor is `e2 = exp(-(gamma1/2 + 2 gamma_phi) t)` so that the
/// off-diagonals decay as `exp(-t/T2)`.
pub fn damping_dephasing(rho: &mut CMat, n: usize, q: usize, e1: f64, e2: f64) {
    let d = 1usize << n;
    let mask = qubit_mask(n, q);
    for i in 0..d {
        if i & mask != 0 {
            continue;
        }
        let i1 = i | mask;
        for j in 0..d {
            if j & mask != 0 {
                continue;
            }
            let j1 = j | mask;
            let r11 = rho[[i1, j1]];
            rho[[i, j]] += (1.0 - e1) * r11;
            rho[[i1, j1]] = r11 * e1;
            rho[[i, j1]] *= e2;
            rho[[i1, j]] *= e2;
        }
    }
}

/// Partial trace over the listed qubits of a raw matrix, returning the
/// reduced matrix on the remaining qubits (in their original order).
pub fn trace_out(rho: &CMat, n: usize, traced: &[usize]) -> CMat {
    let kept: Vec<usize> = (0..n).filter(|q| !traced.contains(q)).collect();
    let nk = kept.len();
    let dk = 1usize << nk;
    let dt = 1usize << traced.len();
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            idx |= ((kept_bits >> (nk - 1 - pos)) & 1) << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            idx |= ((traced_bits >> (traced.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        idx
    };
    let mut out = CMat::zeros((dk, dk));
    for ik in 0..dk {
        for jk in 0..dk {
            let mut s = ZERO;
            for it in 0..dt {
                s += rho[[compose(ik, it), compose(jk, it)]];
            }
            out[[ik, jk]] = s;
        }
    }
    out
}

/// Uniform depolarizing channel on a set of qubits:
/// `rho -> f rho + (1-f) (I/d_q (x) tr_q rho)`.
pub fn depolarize(rho: &mut CMat, n: usize, qubits: &[usize], f: f64) {
    if (1.0 - f).abs() == 0.0 {
        return;
    }
    let reduced = trace_out(rho, n, qubits);
    let k = qubits.len();
    let dq = 1usize << k;
    let d = 1usize << n;
    let kept: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
    let nk = kept.len();
    // index of (i) restricted to kept qubits
    let restrict = |i: usize| -> usize {
        let mut r = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            r |= ((i >> (n - 1 - q)) & 1) << (nk - 1 - pos);
        }
        r
    };
    let qubit_bits = |i: usize| -> usize {
        let mut r = 0usize;
        for (pos, &q) in qubits.iter().enumerate() {
            r |= ((i >> (n - 1 - q)) & 1) << (k - 1 - pos);
        }
        r
    };
    let fc = C64::new(f, 0.0);
    let blend = C64::new((1.0 - f) / dq as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            let mut v = rho[[i, j]] * fc;
            if qubit_bits(i) == qubit_bits(j) {
                v += blend * reduced[[restrict(i), restrict(j)]];
            }
            rho[[i, j]] = v;
        }
    }
}
