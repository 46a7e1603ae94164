//! Declarative spin-model description and Hamiltonian construction.
//!
//! The global Hamiltonian is
//!
//! ```text
//! H = -sum_i eps_s[i]/2 Z_si  +  sum_<ii'> g[ii'] Z_si Z_si'
//!     -sum_j eps_b[j]/2 Z_bj  +  sum_ij v[ij] X_si X_bj
//! ```
//!
//! with hbar = 1 and all energies in units of the inverse simulated
//! time-step. Logical qubit order is system spins first, then bath spins.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::operators::pauli::{pauli_x, pauli_z};
use crate::operators::{embed_operator, PauliFactor, PauliString};

/// System/bath energies and couplings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpinModel {
    /// Energy splitting per system spin.
    pub system_splittings: Vec<f64>,
    /// Longitudinal nearest-neighbor couplings, keyed by system-spin pair
    /// (ascending chain order).
    pub system_couplings: BTreeMap<(usize, usize), f64>,
    /// Energy splitting per bath (auxiliary) spin.
    pub bath_splittings: Vec<f64>,
    /// Transverse couplings keyed by (system index, bath index).
    pub sb_couplings: BTreeMap<(usize, usize), f64>,
}

impl SpinModel {
    pub fn system_count(&self) -> usize {
        self.system_splittings.len()
    }

    pub fn bath_count(&self) -> usize {
        self.bath_splittings.len()
    }

    pub fn total_qubits(&self) -> usize {
        self.system_count() + self.bath_count()
    }

    /// Logical qubit index of system spin `i`.
    pub fn system_qubit(&self, i: usize) -> usize {
        i
    }

    /// Logical qubit index of bath spin `j`.
    pub fn bath_qubit(&self, j: usize) -> usize {
        self.system_count() + j
    }

    pub fn validate(&self) -> Result<()> {
        let ns = self.system_count();
        let nb = self.bath_count();
        for (&(i, ip), _) in &self.system_couplings {
            if i >= ns || ip >= ns {
                return Err(Error::Validation(format!(
                    "system coupling ({i},{ip}) references spin outside 0..{ns}"
                )));
            }
            if ip != i + 1 {
                return Err(Error::Validation(format!(
                    "system coupling ({i},{ip}) is not nearest-neighbor in chain order"
                )));
            }
        }
        for (&(i, j), _) in &self.sb_couplings {
            if i >= ns {
                return Err(Error::Validation(format!(
                    "system-bath coupling ({i},{j}) references system spin outside 0..{ns}"
                )));
            }
            if j >= nb {
                return Err(Error::Validation(format!(
                    "system-bath coupling ({i},{j}) references bath spin outside 0..{nb}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SpinModelFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SpinModelFile = serde_json::from_str(s)?;
        let model = f.into_model()?;
        model.validate()?;
        Ok(model)
    }
}

/// JSON document mirroring [`SpinModel`]; coupling keys are encoded as
/// `"i-j"` strings for map compatibility.
#[derive(Debug, Serialize, Deserialize)]
struct SpinModelFile {
    system_splittings: Vec<f64>,
    system_couplings: BTreeMap<String, f64>,
    bath_splittings: Vec<f64>,
    sb_couplings: BTreeMap<String, f64>,
}

impl From<&SpinModel> for SpinModelFile {
    fn from(m: &SpinModel) -> Self {
        let enc = |map: &BTreeMap<(usize, usize), f64>| {
            map.iter().map(|(&(a, b), &v)| (format!("{a}-{b}"), v)).collect()
        };
        Self {
            system_splittings: m.system_splittings.clone(),
            system_couplings: enc(&m.system_couplings),
            bath_splittings: m.bath_splittings.clone(),
            sb_couplings: enc(&m.sb_couplings),
        }
    }
}

impl SpinModelFile {
    fn into_model(self) -> Result<SpinModel> {
        let dec = |map: BTreeMap<String, f64>| -> Result<BTreeMap<(usize, usize), f64>> {
            map.into_iter()
                .map(|(k, v)| {
                    let (a, b) = k
                        .split_once('-')
                        .ok_or_else(|| Error::Config(format!("bad coupling key '{k}'")))?;
                    let a = a
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad coupling key '{k}'")))?;
                    let b = b
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad coupling key '{k}'")))?;
                    Ok(((a, b), v))
                })
                .collect()
        };
        Ok(SpinModel {
            system_splittings: self.system_splittings,
            system_couplings: dec(self.system_couplings)?,
            bath_splittings: self.bath_splittings,
            sb_couplings: dec(self.sb_couplings)?,
        })
    }
}

/// Physical qubit placement: which device qubits hold the system and bath
/// spins and which directed CNOT edges are available.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QubitLayout {
    /// Physical qubit per system spin.
    pub system_qubits: Vec<usize>,
    /// Physical qubit per bath spin.
    pub bath_qubits: Vec<usize>,
    /// Directed edges (control, target) with calibrated CNOTs.
    pub connectivity: Vec<(usize, usize)>,
}

impl QubitLayout {
    pub fn validate(&self, model: &SpinModel) -> Result<()> {
        if self.system_qubits.len() != model.system_count() {
            return Err(Error::Validation(format!(
                "layout has {} system qubits, model has {} system spins",
                self.system_qubits.len(),
                model.system_count()
            )));
        }
        if self.bath_qubits.len() != model.bath_count() {
            return Err(Error::Validation(format!(
                "layout has {} bath qubits, model has {} bath spins",
                self.bath_qubits.len(),
                model.bath_count()
            )));
        }
        let mut all = self.system_qubits.clone();
        all.extend_from_slice(&self.bath_qubits);
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != all.len() {
            return Err(Error::Validation("layout assigns one physical qubit twice".into()));
        }
        // every nonzero coupling must map onto a connectivity edge
        for (&(i, ip), &g) in &model.system_couplings {
            if g != 0.0 && self.directed_edge(self.system_qubits[i], self.system_qubits[ip]).is_none()
            {
                return Err(Error::Validation(format!(
                    "no connectivity edge for system coupling ({i},{ip}) on physical qubits \
                     {}-{}",
                    self.system_qubits[i], self.system_qubits[ip]
                )));
            }
        }
        for (&(i, j), &v) in &model.sb_couplings {
            if v != 0.0 && self.directed_edge(self.system_qubits[i], self.bath_qubits[j]).is_none()
            {
                return Err(Error::Validation(format!(
                    "no connectivity edge for system-bath coupling ({i},{j}) on physical qubits \
                     {}-{}",
                    self.system_qubits[i], self.bath_qubits[j]
                )));
            }
        }
        Ok(())
    }

    /// The calibrated orientation of the edge between two physical qubits,
    /// if any.
    pub fn directed_edge(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        self.connectivity
            .iter()
            .copied()
            .find(|&(c, t)| (c == a && t == b) || (c == b && t == a))
    }

    /// Physical qubit holding logical qubit `q` (system-first ordering).
    pub fn physical(&self, model: &SpinModel, q: usize) -> usize {
        let ns = model.system_count();
        if q < ns {
            self.system_qubits[q]
        } else {
            self.bath_qubits[q - ns]
        }
    }
}

/// Global Hamiltonian matrix on `system_count + bath_count` qubits,
/// logical order system then bath.
pub fn total_hamiltonian(model: &SpinModel) -> Result<CMat> {
    model.validate()?;
    let n = model.total_qubits();
    let d = 1usize << n;
    let mut h = CMat::zeros((d, d));
    let z = pauli_z();
    let x = pauli_x();
    for (i, &eps) in model.system_splittings.iter().enumerate() {
        if eps != 0.0 {
            h = h + embed_operator(&z, &[model.system_qubit(i)], n)?.mapv(|v| v * (-eps / 2.0));
        }
    }
    for (j, &eps) in model.bath_splittings.iter().enumerate() {
        if eps != 0.0 {
            h = h + embed_operator(&z, &[model.bath_qubit(j)], n)?.mapv(|v| v * (-eps / 2.0));
        }
    }
    let zz = crate::operators::kron(&z, &z);
    for (&(i, ip), &g) in &model.system_couplings {
        if g != 0.0 {
            h = h
                + embed_operator(&zz, &[model.system_qubit(i), model.system_qubit(ip)], n)?
                    .mapv(|v| v * g);
        }
    }
    let xx = crate::operators::kron(&x, &x);
    for (&(i, j), &v) in &model.sb_couplings {
        if v != 0.0 {
            h = h
                + embed_operator(&xx, &[model.system_qubit(i), model.bath_qubit(j)], n)?
                    .mapv(|w| w * v);
        }
    }
    Ok(h)
}

/// The system block `H_S` alone, on `system_count` qubits.
pub fn system_hamiltonian(model: &SpinModel) -> Result<CMat> {
    let ns = model.system_count();
    let d = 1usize << ns;
    let mut h = CMat::zeros((d, d));
    let z = pauli_z();
    for (i, &eps) in model.system_splittings.iter().enumerate() {
        if eps != 0.0 {
            h = h + embed_operator(&z, &[i], ns)?.mapv(|v| v * (-eps / 2.0));
        }
    }
    let zz = crate::operators::kron(&z, &z);
    for (&(i, ip), &g) in &model.system_couplings {
        if g != 0.0 {
            h = h + embed_operator(&zz, &[i, ip], ns)?.mapv(|v| v * g);
        }
    }
    Ok(h)
}

/// One entry of the system spectrum: a z-product eigenstate and its energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    /// Spin directions, `false = up`.
    pub spins: Vec<bool>,
    /// Eigenenergy of `H_S`.
    pub energy: f64,
    /// Label such as `"ud d"`-free compact form, e.g. `"udd"`.
    pub label: String,
}

/// All 2^system_count product eigenstates of the (diagonal) system
/// Hamiltonian with their energies, sorted ascending by energy.
pub fn system_spectrum(model: &SpinModel) -> Result<Vec<SpectrumEntry>> {
    model.validate()?;
    let ns = model.system_count();
    let mut entries = Vec::with_capacity(1 << ns);
    for idx in 0..(1usize << ns) {
        let spins: Vec<bool> = (0..ns).map(|i| (idx >> (ns - 1 - i)) & 1 == 1).collect();
        // sigma_z eigenvalue: up (false) -> +1, down (true) -> -1
        let zval = |i: usize| if spins[i] { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for (i, &eps) in model.system_splittings.iter().enumerate() {
            e += -eps / 2.0 * zval(i);
        }
        for (&(i, ip), &g) in &model.system_couplings {
            e += g * zval(i) * zval(ip);
        }
        let label: String = spins.iter().map(|&s| if s { 'd' } else { 'u' }).collect();
        entries.push(SpectrumEntry { spins, energy: e, label });
    }
    entries.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap());
    Ok(entries)
}

/// Ground-state set (all entries within `tol` of the minimum energy).
pub fn ground_states(spectrum: &[SpectrumEntry], tol: f64) -> Vec<&SpectrumEntry> {
    let emin = spectrum.first().map(|e| e.energy).unwrap_or(0.0);
    spectrum.iter().filter(|e| e.energy - emin <= tol).collect()
}

/// Named model presets matching the three hardware demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// One system spin and one bath spin (eps_s = 1.0, v = 0.1,
    /// sweepable eps_b).
    OneOne,
    /// Two system spins, two bath spins (g = +/-0.5, eps_b = 1.0, v = 0.2).
    TwoTwo,
    /// Three system spins, four bath spins (|g12| = |g23| = 0.5,
    /// eps_b = 2g, v = 0.2).
    ThreeFour,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "one_one" => Ok(Preset::OneOne),
            "two_two" => Ok(Preset::TwoTwo),
            "three_four" => Ok(Preset::ThreeFour),
            _ => Err(Error::Config(format!(
                "unknown preset '{name}'; available: one_one, two_two, three_four"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::OneOne => "one_one",
            Preset::TwoTwo => "two_two",
            Preset::ThreeFour => "three_four",
        }
    }
}

/// Build the preset model and its device layout.
///
/// * `one_one`: eps_s = 1.0, eps_b = 1.0 (sweepable), v = 0.1; system on
///   physical qubit 4, bath on qubit 5.
/// * `two_two`: eps_s = 0, g = 0.5, eps_b = 1.0, v = 0.2; system on qubits
///   3 and 5, baths on 1 and 4.
/// * `three_four`: eps_s = 0, g12 = g23 = 0.5, eps_b = 1.0, v = 0.2; system
///   on qubits 1, 3, 5, baths on 0, 2, 4, 6.
pub fn preset(p: Preset) -> (SpinModel, QubitLayout) {
    match p {
        Preset::OneOne => {
            let model = SpinModel {
                system_splittings: vec![1.0],
                system_couplings: BTreeMap::new(),
                bath_splittings: vec![1.0],
                sb_couplings: [((0, 0), 0.1)].into_iter().collect(),
            };
            let layout = QubitLayout {
                system_qubits: vec![4],
                bath_qubits: vec![5],
                connectivity: vec![(4, 5)],
            };
            (model, layout)
        }
        Preset::TwoTwo => {
            let model = SpinModel {
                system_splittings: vec![0.0, 0.0],
                system_couplings: [((0, 1), 0.5)].into_iter().collect(),
                bath_splittings: vec![1.0, 1.0],
                sb_couplings: [((0, 0), 0.2), ((1, 1), 0.2)].into_iter().collect(),
            };
            let layout = QubitLayout {
                system_qubits: vec![3, 5],
                bath_qubits: vec![1, 4],
                connectivity: vec![(3, 5), (3, 1), (5, 4)],
            };
            (model, layout)
        }
        Preset::ThreeFour => {
            let model = SpinModel {
                system_splittings: vec![0.0, 0.0, 0.0],
                system_couplings: [((0, 1), 0.5), ((1, 2), 0.5)].into_iter().collect(),
                bath_splittings: vec![1.0; 4],
                sb_couplings: [((0, 0), 0.2), ((0, 1), 0.2), ((2, 2), 0.2), ((2, 3), 0.2)]
                    .into_iter()
                    .collect(),
            };
            let layout = QubitLayout {
                system_qubits: vec![1, 3, 5],
                bath_qubits: vec![0, 2, 4, 6],
                connectivity: vec![(5, 3), (3, 1), (1, 0), (1, 2), (5, 4), (5, 6)],
            };
            (model, layout)
        }
    }
}

/// Observable helper: `sigma_z` on system spin `i` as a global Pauli string.
pub fn system_z(model: &SpinModel, i: usize) -> PauliString {
    PauliString::single(model.total_qubits(), model.system_qubit(i), PauliFactor::Z)
}

/// Observable helper: `sigma_z sigma_z` correlator between system spins.
pub fn system_zz(model: &SpinModel, i: usize, j: usize) -> PauliString {
    PauliString::two(
        model.total_qubits(),
        model.system_qubit(i),
        PauliFactor::Z,
        model.system_qubit(j),
        PauliFactor::Z,
    )
}
