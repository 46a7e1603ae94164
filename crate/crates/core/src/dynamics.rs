//! Reference continuous-time dynamics: Lindblad propagation, the Pauli
//! master equation with golden-rule rates, the bath spectral function and
//! steady-state extraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{system_spectrum, SpectrumEntry, SpinModel};
use crate::operators::{
    lindblad_superoperator, matrix_exponential, partial_trace, unvectorize, vectorize,
    DensityMatrix, C64,
};

/// One Lorentzian peak of the bath spectral function.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SpectralPeak {
    /// Peak position (auxiliary-spin energy).
    pub center: f64,
    /// Full damping rate of the auxiliary spin (Lorentzian width scale).
    pub width: f64,
    /// System-bath coupling; the peak area is `2 pi v^2`.
    pub coupling: f64,
}

/// Bath spectral function `S(w) = background + sum of Lorentzians`.
///
/// `S(w) = gamma_bg + sum_p v_p^2 w_p / ((w_p/2)^2 + (w - c_p)^2)` where
/// `w_p` is the peak width and `c_p` its center. Positive frequencies
/// describe absorption by the bath, negative frequencies emission.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectralFunction {
    pub gamma_background: f64,
    pub peaks: Vec<SpectralPeak>,
}

impl SpectralFunction {
    pub fn background_only(gamma: f64) -> Self {
        SpectralFunction { gamma_background: gamma, peaks: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_background < 0.0 {
            return Err(Error::Validation("background rate must be nonnegative".into()));
        }
        for p in &self.peaks {
            if p.width <= 0.0 {
                return Err(Error::Validation("peak width must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Evaluate the spectral function at frequency `omega`.
pub fn spectral_function(sf: &SpectralFunction, omega: f64) -> f64 {
    let mut s = sf.gamma_background;
    for p in &sf.peaks {
        let half = p.width / 2.0;
        s += p.coupling * p.coupling * p.width / (half * half + (omega - p.center).powi(2));
    }
    s
}

/// Rough steady-state population ratio `p1/p0 ~= S(-eps_s)/S(eps_s)` for a
/// single system spin.
pub fn population_ratio_estimate(sf: &SpectralFunction, eps_s: f64) -> Result<f64> {
    if eps_s <= 0.0 {
        return Err(Error::Validation("eps_s must be positive".into()));
    }
    let down = spectral_function(sf, eps_s);
    if down == 0.0 {
        return Err(Error::Numerical("S(eps_s) = 0, population ratio undefined".into()));
    }
    Ok(spectral_function(sf, -eps_s) / down)
}

/// Golden-rule transition rates between system eigenstates.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    /// `rates[(n, k)] = Gamma_{n <- k}`, indexed by the entries order.
    pub rates: ndarray::Array2<f64>,
    /// Product eigenstates in the same order as the matrix indices.
    pub states: Vec<SpectrumEntry>,
}

impl RateMatrix {
    /// Population derivative `dp/dt` of the Pauli master equation.
    pub fn population_rhs(&self, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        let mut dp = vec![0.0; n];
        for i in 0..n {
            for k in 0..n {
                if i == k {
                    continue;
                }
                dp[i] += self.rates[[i, k]] * p[k] - self.rates[[k, i]] * p[i];
            }
        }
        dp
    }

    /// Generator matrix `M` with `dp/dt = M p`.
    pub fn generator(&self) -> ndarray::Array2<f64> {
        let n = self.states.len();
        let mut m = ndarray::Array2::zeros((n, n));
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    m[[i, k]] += self.rates[[i, k]];
                    m[[k, k]] -= self.rates[[i, k]];
                }
            }
        }
        m
    }

    /// Stationary population vector (unique nullspace direction, normalized
    /// to unit sum).
    pub fn steady_populations(&self) -> Result<Vec<f64>> {
        let m = self.generator().mapv(|x| C64::new(x, 0.0));
        let v = nullspace_vector(&m, 1e-9)?;
        let sum: C64 = v.iter().sum();
        if sum.norm() < 1e-12 {
            return Err(Error::Numerical("stationary vector has zero total population".into()));
        }
        Ok(v.iter().map(|z| (z / sum).re).collect())
    }
}

/// Golden-rule rates `Gamma_{n<-k} = sum_i |<n|sigma_x_i|k>|^2 S_i(E_k - E_n)`
/// over the product eigenbasis of the (diagonal) system Hamiltonian.
///
/// `site_spectral` gives the spectral function seen by each system spin;
/// flipping spin `i` changes the state by exactly one spin direction, so
/// the matrix element is 1 for single-flip pairs and 0 otherwise.
pub fn golden_rule_rates(
    model: &SpinModel,
    site_spectral: &[SpectralFunction],
) -> Result<RateMatrix> {
    if site_spectral.len() != model.system_count() {
        return Err(Error::Dimension(format!(
            "need one spectral function per system spin ({} given, {} spins)",
            site_spectral.len(),
            model.system_count()
        )));
    }
    for sf in site_spectral {
        sf.validate()?;
    }
    let states = system_spectrum(model)?;
    let n = states.len();
    let mut rates = ndarray::Array2::zeros((n, n));
    for to in 0..n {
        for from in 0..n {
            if to == from {
                continue;
            }
            // which spins differ
            let diff: Vec<usize> = (0..model.system_count())
                .filter(|&i| states[to].spins[i] != states[from].spins[i])
                .collect();
            if diff.len() != 1 {
                continue;
            }
            let omega = states[from].energy - states[to].energy;
            rates[[to, from]] = spectral_function(&site_spectral[diff[0]], omega);
        }
    }
    Ok(RateMatrix { rates, states })
}

/// A point of a propagated trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: DensityMatrix,
}

/// Propagate the Lindblad equation `drho/dt = i[rho, H] + sum dissipators`
/// with time-independent generator, sampling every `dt` up to `t_final`.
///
/// Uses the exact exponential of the dense Liouvillian for registers up to
/// five qubits and fourth-order Runge-Kutta beyond.
pub fn propagate_lindblad(
    rho0: &DensityMatrix,
    h: &CMat,
    jumps: &[(CMat, f64)],
    t_final: f64,
    dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if dt <= 0.0 || t_final < 0.0 {
        return Err(Error::Validation("need dt > 0 and t_final >= 0".into()));
    }
    let d = rho0.dim();
    if d <= 32 {
        propagate_exact(rho0, h, jumps, t_final, dt)
    } else {
        propagate_rk4(rho0, h, jumps, t_final, dt)
    }
}

/// Exact-exponential propagation (dense Liouvillian).
pub fn propagate_exact(
    rho0: &DensityMatrix,
    h: &CMat,
    jumps: &[(CMat, f64)],
    t_final: f64,
    dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    let l = lindblad_superoperator(h, jumps)?;
    let step = matrix_exponential(&l.matrix().mapv(|z| z * dt))?;
    let d = rho0.dim();
    let steps = (t_final / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut v = ndarray::Array1::from_vec(vectorize(rho0.matrix()));
    out.push(TrajectoryPoint { t: 0.0, state: rho0.clone() });
    for k in 1..=steps {
        v = step.dot(&v);
        let rho = unvectorize(v.as_slice().unwrap(), d);
        out.push(TrajectoryPoint { t: k as f64 * dt, state: DensityMatrix::new_unchecked(rho)? });
    }
    Ok(out)
}

fn lindblad_rhs(rho: &CMat, h: &CMat, jump_ops: &[(CMat, CMat, f64)]) -> CMat {
    // i [rho, H] + sum_k r_k (A rho A^dag - 1/2 {A^dag A, rho})
    let comm = rho.dot(h) - h.dot(rho);
    let mut out = comm.mapv(|z| z * C64::new(0.0, 1.0));
    for (a, ada, rate) in jump_ops {
        let sandwich = a.dot(rho).dot(&a.t().mapv(|z| z.conj()));
        let anti = ada.dot(rho) + rho.dot(ada);
        out = out + sandwich.mapv(|z| z * *rate) - anti.mapv(|z| z * (0.5 * rate));
    }
    out
}

/// Fourth-order Runge-Kutta propagation.
pub fn propagate_rk4(
    rho0: &DensityMatrix,
    h: &CMat,
    jumps: &[(CMat, f64)],
    t_final: f64,
    dt: f64,
) -> Result<Vec<TrajectoryPoint>> {
    let jump_ops: Vec<(CMat, CMat, f64)> = jumps
        .iter()
        .map(|(a, r)| {
            let ada = a.t().mapv(|z| z.conj()).dot(a);
            (a.clone(), ada, *r)
        })
        .collect();
    let steps = (t_final / dt).round() as usize;
    let mut rho = rho0.matrix().clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(TrajectoryPoint { t: 0.0, state: rho0.clone() });
    for k in 1..=steps {
        let k1 = lindblad_rhs(&rho, h, &jump_ops);
        let k2 = lindblad_rhs(&(&rho + &k1.mapv(|z| z * (dt / 2.0))), h, &jump_ops);
        let k3 = lindblad_rhs(&(&rho + &k2.mapv(|z| z * (dt / 2.0))), h, &jump_ops);
        let k4 = lindblad_rhs(&(&rho + &k3.mapv(|z| z * dt)), h, &jump_ops);
        rho = &rho
            + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (dt / 6.0));
        out.push(TrajectoryPoint {
            t: k as f64 * dt,
            state: DensityMatrix::new_unchecked(rho.clone())?,
        });
    }
    Ok(out)
}

/// Unique nullspace direction of a square matrix via SVD; errors when the
/// nullspace dimension differs from one at the tolerance.
fn nullspace_vector(m: &CMat, tol: f64) -> Result<Vec<C64>> {
    let (_, s, vh) = linalg::svd(m)?;
    let n = s.len();
    let scale = s[0].max(1.0);
    let null_count = s.iter().filter(|&&x| x <= tol * scale).count();
    if null_count != 1 {
        return Err(Error::DegenerateSteadyState(null_count));
    }
    // last right singular vector
    Ok((0..n).map(|j| vh[[n - 1, j]].conj()).collect())
}

/// Stationary density matrix of a Lindblad generator superoperator.
///
/// Returns the trace-one stationary state; the residual `||L[rho_ss]||` is
/// checked against the generator scale.
pub fn steady_state(generator: &crate::operators::Superoperator) -> Result<DensityMatrix> {
    let d = generator.dim();
    let v = nullspace_vector(generator.matrix(), 1e-9)?;
    let rho = unvectorize(&v, d);
    // normalize to unit trace, make exactly Hermitian
    let tr: C64 = rho.diag().sum();
    if tr.norm() < 1e-12 {
        return Err(Error::Numerical("stationary direction is traceless".into()));
    }
    let rho = rho.mapv(|z| z / tr);
    let rho = (&rho + &rho.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    // residual check
    let lv = generator.matrix().dot(&ndarray::Array1::from_vec(vectorize(&rho)));
    let res = lv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = linalg::max_abs(generator.matrix());
    if res > 1e-9 * scale.max(1.0) {
        return Err(Error::Numerical(format!("steady-state residual {res:.3e} too large")));
    }
    DensityMatrix::new_unchecked(rho)
}

/// Jump operators of the simulated open-system model: bath damping
/// `gamma_minus` per auxiliary spin and system Pauli noise
/// (`gamma_x = gamma_y = gamma_xy`, optional `gamma_z`).
pub fn standard_jump_set(
    model: &SpinModel,
    gamma_minus: f64,
    gamma_xy: f64,
    gamma_z: f64,
) -> Result<Vec<(CMat, f64)>> {
    use crate::operators::embed_operator;
    use crate::operators::pauli::{pauli_x, pauli_y, pauli_z, sigma_minus};
    let n = model.total_qubits();
    let mut jumps = Vec::new();
    for j in 0..model.bath_count() {
        jumps.push((embed_operator(&sigma_minus(), &[model.bath_qubit(j)], n)?, gamma_minus));
    }
    for i in 0..model.system_count() {
        let q = model.system_qubit(i);
        jumps.push((embed_operator(&pauli_x(), &[q], n)?, gamma_xy));
        jumps.push((embed_operator(&pauli_y(), &[q], n)?, gamma_xy));
        if gamma_z > 0.0 {
            jumps.push((embed_operator(&pauli_z(), &[q], n)?, gamma_z));
        }
    }
    Ok(jumps)
}

/// Reduced-system populations of a global state, in product-basis order.
pub fn system_populations(model: &SpinModel, rho: &DensityMatrix) -> Result<Vec<f64>> {
    let keep: Vec<usize> = (0..model.system_count()).collect();
    let reduced = partial_trace(rho, &keep)?;
    Ok((0..reduced.dim()).map(|i| reduced.matrix()[[i, i]].re).collect())
}

/// Trapezoid quadrature of the spectral function, for peak-area checks and
/// CSV sampling.
pub fn integrate_spectral_function(sf: &SpectralFunction, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = 0.5 * (spectral_function(sf, lo) + spectral_function(sf, hi));
    for k in 1..n {
        acc += spectral_function(sf, lo + k as f64 * h);
    }
    acc * h
}
