//! Target pairing model and hardware chain model.
//!
//! All energies are angular frequencies with ħ = 1. Only products such as
//! `ω τ` enter the dynamics, so any consistent rescaling is allowed.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{DenseOperator, Pauli, PauliString, PauliSum, MAX_QUBITS};
use crate::scalar::Real;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidModel("need at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_QUBITS));
    }
    Ok(())
}

fn check_finite<T: Real>(what: &str, xs: impl IntoIterator<Item = T>) -> Result<()> {
    if xs.into_iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidModel(format!("{what} contains a non-finite value")));
    }
    Ok(())
}

fn check_symmetric<T: Real>(v: &DMatrix<T>, n: usize) -> Result<()> {
    if v.nrows() != n || v.ncols() != n {
        return Err(Error::InvalidModel(format!(
            "coupling matrix is {}x{}, expected {n}x{n}",
            v.nrows(),
            v.ncols()
        )));
    }
    check_finite("coupling matrix", v.iter().copied())?;
    let scale = v.iter().fold(T::one(), |acc, x| acc.max(x.abs()));
    let tol = T::tolerance(1e-12) * scale;
    for r in 0..n {
        for c in r + 1..n {
            if (v[(r, c)] - v[(c, r)]).abs() > tol {
                return Err(Error::InvalidModel(format!(
                    "coupling matrix is not symmetric at ({}, {})",
                    r + 1,
                    c + 1
                )));
            }
        }
    }
    Ok(())
}

/// Qubit form of the pairing Hamiltonian:
/// `H_p = Σ_m ε_m/2 σ^z_m + Σ_{m<l} V_ml/2 (σ^x_m σ^x_l + σ^y_m σ^y_l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingModel<T: Real> {
    epsilon: Vec<T>,
    v: DMatrix<T>,
}

impl<T: Real> PairingModel<T> {
    /// Builds a model from qubit energies `ε_m` and couplings `V_ml`.
    ///
    /// The diagonal of `v` must be zero: on-site terms belong in `epsilon`
    /// (use [`FermionicInput`] to fold them in).
    pub fn new(epsilon: Vec<T>, v: DMatrix<T>) -> Result<Self> {
        let n = epsilon.len();
        check_n(n)?;
        check_finite("epsilon", epsilon.iter().copied())?;
        check_symmetric(&v, n)?;
        if (0..n).any(|m| v[(m, m)] != T::zero()) {
            return Err(Error::InvalidModel(
                "diagonal couplings must be folded into epsilon; supply a fermionic input instead".into(),
            ));
        }
        Ok(Self { epsilon, v })
    }

    pub fn uncoupled(epsilon: Vec<T>) -> Result<Self> {
        let n = epsilon.len();
        Self::new(epsilon, DMatrix::zeros(n, n))
    }

    /// Uniform `ε` on every site and uniform `V` between every pair.
    pub fn uniform(n: usize, epsilon: T, v: T) -> Result<Self> {
        let mut m = DMatrix::from_element(n, n, v);
        m.fill_diagonal(T::zero());
        Self::new(vec![epsilon; n], m)
    }

    pub fn n_qubits(&self) -> usize {
        self.epsilon.len()
    }

    pub fn epsilon(&self) -> &[T] {
        &self.epsilon
    }

    pub fn v(&self) -> &DMatrix<T> {
        &self.v
    }

    /// `V_ml` with 1-based indices.
    pub fn coupling(&self, m: usize, l: usize) -> T {
        self.v[(m - 1, l - 1)]
    }

    /// Nonzero couplings `(m, l, V_ml)` with `m < l`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize, T)> {
        let n = self.n_qubits();
        let mut out = Vec::new();
        for m in 1..=n {
            for l in m + 1..=n {
                let v = self.coupling(m, l);
                if v != T::zero() {
                    out.push((m, l, v));
                }
            }
        }
        out
    }

    pub fn z_part(&self) -> PauliSum<T> {
        let n = self.n_qubits();
        let half = T::lit(0.5);
        let mut sum = PauliSum::new(n);
        for (m, &e) in self.epsilon.iter().enumerate() {
            if e != T::zero() {
                sum.push(PauliString::single(n, m + 1, Pauli::Z, e * half).expect("in range"))
                    .expect("same register");
            }
        }
        sum
    }

    pub fn interaction_part(&self) -> PauliSum<T> {
        let n = self.n_qubits();
        let half = T::lit(0.5);
        let mut sum = PauliSum::new(n);
        for (m, l, v) in self.pairs() {
            for p in [Pauli::X, Pauli::Y] {
                sum.push(PauliString::pair(n, m, p, l, p, v * half).expect("in range"))
                    .expect("same register");
            }
        }
        sum
    }

    pub fn hamiltonian(&self) -> DenseOperator<T> {
        pairing_hamiltonian(self)
    }
}

pub fn pairing_hamiltonian<T: Real>(p: &PairingModel<T>) -> DenseOperator<T> {
    let mut h = p.z_part().to_matrix();
    let hi = p.interaction_part().to_matrix();
    *h.matrix_mut() += hi.matrix();
    h
}

/// Fermionic parameters `ϵ_m`, `V_ml` before the on-site shift.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionicInput<T: Real> {
    pub eps_fermionic: Vec<T>,
    pub v: DMatrix<T>,
}

impl<T: Real> FermionicInput<T> {
    pub fn new(eps_fermionic: Vec<T>, v: DMatrix<T>) -> Result<Self> {
        let n = eps_fermionic.len();
        check_n(n)?;
        check_finite("eps", eps_fermionic.iter().copied())?;
        check_symmetric(&v, n)?;
        Ok(Self { eps_fermionic, v })
    }

    pub fn n_qubits(&self) -> usize {
        self.eps_fermionic.len()
    }
}

/// `ε_m = ϵ_m + V_mm`; the returned coupling matrix has a zero diagonal.
pub fn from_fermionic<T: Real>(f: &FermionicInput<T>) -> Result<PairingModel<T>> {
    let n = f.n_qubits();
    check_symmetric(&f.v, n)?;
    let epsilon = (0..n).map(|m| f.eps_fermionic[m] + f.v[(m, m)]).collect();
    let mut v = f.v.clone();
    v.fill_diagonal(T::zero());
    PairingModel::new(epsilon, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardwareKind {
    #[serde(alias = "ising_l", alias = "ising-l")]
    IsingLongitudinal,
    #[serde(alias = "ising_t", alias = "ising-t")]
    IsingTransverse,
    #[serde(alias = "XY")]
    Xy,
    Heisenberg,
}

impl HardwareKind {
    pub const ALL: [HardwareKind; 4] = [
        HardwareKind::IsingLongitudinal,
        HardwareKind::IsingTransverse,
        HardwareKind::Xy,
        HardwareKind::Heisenberg,
    ];

    /// Interaction axes `(x, y, z)` switched on for this kind.
    pub fn axes(self) -> [bool; 3] {
        match self {
            HardwareKind::IsingLongitudinal => [false, false, true],
            HardwareKind::IsingTransverse => [true, false, false],
            HardwareKind::Xy => [true, true, false],
            HardwareKind::Heisenberg => [true, true, true],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HardwareKind::IsingLongitudinal => "ising_longitudinal",
            HardwareKind::IsingTransverse => "ising_transverse",
            HardwareKind::Xy => "xy",
            HardwareKind::Heisenberg => "heisenberg",
        }
    }
}

impl fmt::Display for HardwareKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HardwareKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ising_longitudinal" | "ising_l" => Ok(HardwareKind::IsingLongitudinal),
            "ising_transverse" | "ising_t" => Ok(HardwareKind::IsingTransverse),
            "xy" => Ok(HardwareKind::Xy),
            "heisenberg" => Ok(HardwareKind::Heisenberg),
            other => Err(Error::InvalidConfig(format!("unknown hardware kind {other:?}"))),
        }
    }
}

/// Parameter overrides for one free-evolution segment.
///
/// `omega` replaces the frequencies (requires tunable frequencies unless it
/// equals the base values); `j_on[l-1] = false` switches bond `l` off
/// (requires switchable couplings).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Overrides<T: Real> {
    pub omega: Option<Vec<T>>,
    pub j_on: Option<Vec<bool>>,
}

impl<T: Real> Overrides<T> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_none() && self.j_on.is_none()
    }
}

/// Nearest-neighbor qubit chain `H = Σ ω_l/2 σ^z_l + Σ_l J_l Σ_{a on} σ^a_l σ^a_{l+1}`.
///
/// One coupling per bond; the active axes follow from `kind`, so the axis
/// pattern of each interaction type holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HardwareModel<T: Real> {
    pub kind: HardwareKind,
    omega: Vec<T>,
    j: Vec<T>,
    pub freq_tunable: bool,
    pub couplings_switchable: bool,
}

impl<T: Real> HardwareModel<T> {
    pub fn new(
        kind: HardwareKind,
        omega: Vec<T>,
        j: Vec<T>,
        freq_tunable: bool,
        couplings_switchable: bool,
    ) -> Result<Self> {
        let n = omega.len();
        check_n(n)?;
        if j.len() != n - 1 {
            return Err(Error::InvalidModel(format!(
                "{} couplings given for {n} qubits, expected {}",
                j.len(),
                n - 1
            )));
        }
        check_finite("omega", omega.iter().copied())?;
        check_finite("j", j.iter().copied())?;
        Ok(Self {
            kind,
            omega,
            j,
            freq_tunable,
            couplings_switchable,
        })
    }

    pub fn uniform(kind: HardwareKind, n: usize, omega: T, j: T, freq_tunable: bool, couplings_switchable: bool) -> Result<Self> {
        Self::new(
            kind,
            vec![omega; n],
            vec![j; n.saturating_sub(1)],
            freq_tunable,
            couplings_switchable,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn j(&self) -> &[T] {
        &self.j
    }

    /// Largest `|J_l|`, the scale used in error-order statements.
    pub fn j_max(&self) -> T {
        self.j.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn fully_tunable(&self) -> bool {
        self.freq_tunable && self.couplings_switchable
    }

    /// Same chain with a different interaction type.
    pub fn with_kind(&self, kind: HardwareKind) -> Self {
        Self { kind, ..self.clone() }
    }

    pub fn with_flags(&self, freq_tunable: bool, couplings_switchable: bool) -> Self {
        Self {
            freq_tunable,
            couplings_switchable,
            ..self.clone()
        }
    }

    /// Checks an override against the tunability flags and the register size.
    pub fn check_overrides(&self, ov: &Overrides<T>) -> Result<()> {
        let n = self.n_qubits();
        if let Some(w) = &ov.omega {
            if w.len() != n {
                return Err(Error::InvalidInstruction(format!(
                    "omega override has {} entries, expected {n}",
                    w.len()
                )));
            }
            check_finite("omega override", w.iter().copied())?;
            if !self.freq_tunable && w.as_slice() != self.omega.as_slice() {
                return Err(Error::Constraint("frequency override on hardware with fixed frequencies".into()));
            }
        }
        if let Some(on) = &ov.j_on {
            if on.len() != n - 1 {
                return Err(Error::InvalidInstruction(format!(
                    "coupling mask has {} entries, expected {}",
                    on.len(),
                    n - 1
                )));
            }
            if !self.couplings_switchable && on.iter().any(|b| !b) {
                return Err(Error::Constraint("coupling switched off on hardware with fixed couplings".into()));
            }
        }
        Ok(())
    }

    /// Frequencies and couplings in force under `ov` (switched-off bonds read 0).
    pub fn effective(&self, ov: Option<&Overrides<T>>) -> Result<(Vec<T>, Vec<T>)> {
        let mut omega = self.omega.clone();
        let mut j = self.j.clone();
        if let Some(ov) = ov {
            self.check_overrides(ov)?;
            if let Some(w) = &ov.omega {
                omega.clone_from(w);
            }
            if let Some(on) = &ov.j_on {
                for (jl, &b) in j.iter_mut().zip(on) {
                    if !b {
                        *jl = T::zero();
                    }
                }
            }
        }
        Ok((omega, j))
    }

    pub fn pauli_terms(&self, ov: Option<&Overrides<T>>) -> Result<PauliSum<T>> {
        let (omega, j) = self.effective(ov)?;
        let n = self.n_qubits();
        let half = T::lit(0.5);
        let mut sum = PauliSum::new(n);
        for (l, &w) in omega.iter().enumerate() {
            if w != T::zero() {
                sum.push(PauliString::single(n, l + 1, Pauli::Z, w * half)?)?;
            }
        }
        let axes = self.kind.axes();
        for (l, &jl) in j.iter().enumerate() {
            if jl == T::zero() {
                continue;
            }
            for (p, on) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().zip(axes) {
                if on {
                    sum.push(PauliString::pair(n, l + 1, p, l + 2, p, jl)?)?;
                }
            }
        }
        Ok(sum)
    }

    /// Diagonal of `H` when every active term is diagonal, else `None`.
    pub fn diagonal(&self, ov: Option<&Overrides<T>>) -> Result<Option<Vec<T>>> {
        let (omega, j) = self.effective(ov)?;
        let zz_only = self.kind == HardwareKind::IsingLongitudinal || j.iter().all(|&x| x == T::zero());
        if !zz_only {
            return Ok(None);
        }
        let n = self.n_qubits();
        let half = T::lit(0.5);
        let diag = (0..1usize << n)
            .map(|idx| {
                let s = |q: usize| if (idx >> (n - q)) & 1 == 0 { T::one() } else { -T::one() };
                let mut e = T::zero();
                for (l, &w) in omega.iter().enumerate() {
                    e += w * half * s(l + 1);
                }
                for (l, &jl) in j.iter().enumerate() {
                    e += jl * s(l + 1) * s(l + 2);
                }
                e
            })
            .collect();
        Ok(Some(diag))
    }
}

pub fn hardware_hamiltonian<T: Real>(h: &HardwareModel<T>, ov: Option<&Overrides<T>>) -> Result<DenseOperator<T>> {
    Ok(h.pauli_terms(ov)?.to_matrix())
}

/// Outer Trotter step count `m` and subdivision `g` of fixed-coupling quarter-turn blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterOptions {
    pub m: usize,
    pub g: usize,
}

impl TrotterOptions {
    pub fn new(m: usize, g: usize) -> Result<Self> {
        if m == 0 || g == 0 {
            return Err(Error::InvalidConfig("trotter m and g must be positive".into()));
        }
        Ok(Self { m, g })
    }
}

impl Default for TrotterOptions {
    fn default() -> Self {
        Self { m: 1, g: 1 }
    }
}

/// `Σ_l σ^z_l`, the pair-number generator.
pub fn total_z<T: Real>(n: usize) -> DenseOperator<T> {
    let mut sum = PauliSum::new(n);
    for q in 1..=n {
        sum.push(PauliString::single(n, q, Pauli::Z, T::one()).expect("in range"))
            .expect("same register");
    }
    sum.to_matrix()
}
