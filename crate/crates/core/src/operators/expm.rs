//! Matrix exponential and logarithm.
//!
//! The exponential uses scaling-and-squaring with a Pade(13) approximant
//! (Higham 2005). Dimensions in this crate stay at or below 4^n for small n,
//! so robustness is preferred over specialised fast paths.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

use super::{C64, ONE, ZERO};

const PADE13_THETA: f64 = 5.371920351148152;

const PADE13_COEFFS: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &CMat) -> f64 {
    let (r, c) = a.dim();
    let mut worst = 0.0f64;
    for j in 0..c {
        let mut s = 0.0;
        for i in 0..r {
            s += a[[i, j]].norm();
        }
        if s > worst {
            worst = s;
        }
    }
    worst
}

/// `e^A` for a square complex matrix.
pub fn matrix_exponential(a: &CMat) -> Result<CMat> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::Dimension(format!("matrix_exponential: input is {r}x{c}")));
    }
    if r == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    let norm = one_norm(a);
    let s = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new(1.0 / 2f64.powi(s as i32), 0.0);
    let a_scaled = a.mapv(|z| z * scale);

    let id = CMat::eye(r);
    let a2 = a_scaled.dot(&a_scaled);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b = &PADE13_COEFFS;
    let u_inner = a6.mapv(|z| z * b[13])
        + a4.mapv(|z| z * b[11])
        + a2.mapv(|z| z * b[9]);
    let u_small =
        a6.mapv(|z| z * b[7]) + a4.mapv(|z| z * b[5]) + a2.mapv(|z| z * b[3]) + id.mapv(|z| z * b[1]);
    let u = a_scaled.dot(&(a6.dot(&u_inner) + u_small));
    let v_inner = a6.mapv(|z| z * b[12]) + a4.mapv(|z| z * b[10]) + a2.mapv(|z| z * b[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * b[6])
        + a4.mapv(|z| z * b[4])
        + a2.mapv(|z| z * b[2])
        + id.mapv(|z| z * b[0]);

    // exp(A_s) ~= (V - U)^{-1} (V + U)
    let num = &v + &u;
    let den = &v - &u;
    let mut result = linalg::solve(&den, &num)?;
    for _ in 0..s {
        result = result.dot(&result);
    }
    Ok(result)
}

/// Principal matrix logarithm via eigendecomposition, with branch checking.
///
/// Fails explicitly when an eigenvalue lies within `branch_margin` (radians)
/// of the negative real axis or at the origin, where the principal branch is
/// ambiguous.
pub fn matrix_log(a: &CMat, branch_margin: f64) -> Result<CMat> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::Dimension(format!("matrix_log: input is {r}x{c}")));
    }
    let (w, v) = linalg::eig(a)?;
    let mut logw = Vec::with_capacity(r);
    for lam in w.iter() {
        let modulus = lam.norm();
        if modulus < 1e-14 {
            return Err(Error::LogBranch { value: format!("{lam}"), margin: branch_margin });
        }
        let arg = lam.im.atan2(lam.re);
        if std::f64::consts::PI - arg.abs() < branch_margin {
            return Err(Error::LogBranch { value: format!("{lam}"), margin: branch_margin });
        }
        logw.push(C64::new(modulus.ln(), arg));
    }
    // log A = V log(Lambda) V^{-1}; computed as solve against V^T on the left
    let mut vl = CMat::zeros((r, r));
    for j in 0..r {
        for i in 0..r {
            vl[[i, j]] = v[[i, j]] * logw[j];
        }
    }
    // X = V logLambda V^{-1}  <=>  X V = V logLambda  <=>  V^T X^T = (V logLambda)^T
    let xt = linalg::solve(&v.t().to_owned(), &vl.t().to_owned())?;
    Ok(xt.t().to_owned())
}

/// Hermitian part `(A + A^H)/2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    let ah = a.t().mapv(|z| z.conj());
    (a + &ah).mapv(|z| z * 0.5)
}

/// Strip a global phase so that the largest-magnitude entry is real positive.
pub fn fix_global_phase(a: &CMat) -> CMat {
    let mut best = ZERO;
    let mut best_norm = 0.0;
    for z in a.iter() {
        if z.norm() > best_norm {
            best_norm = z.norm();
            best = *z;
        }
    }
    if best_norm == 0.0 {
        return a.clone();
    }
    let phase = best / best_norm;
    a.mapv(|z| z * phase.conj())
}

/// Distance up to a global phase: `min_phi || e^{i phi} A - B ||_max`.
pub fn phase_distance(a: &CMat, b: &CMat) -> f64 {
    // tr(A^H B) fixes the optimal phase
    let mut overlap = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        overlap += x.conj() * y;
    }
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = (x * phase - y).norm();
        if d > worst {
            worst = d;
        }
    }
    worst
}
