//! Exact execution of gate schedules.
//!
//! Free evolutions are exponentiated exactly per segment. Each execution
//! keeps a private cache of Hamiltonian spectra keyed by the override, so a
//! long Trotter schedule diagonalizes each distinct Hamiltonian once.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::models::{hardware_hamiltonian, HardwareModel, Overrides};
use crate::pauli::{
    apply_gate_to_columns, apply_gate_to_vector, hermitian_eigendecompose, hermitian_expm, rotation_gate,
    DenseOperator, HermitianEigen, StateVector,
};
use crate::scalar::{cis, Real};
use crate::schedule::{GateSchedule, Instruction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Unitary,
    State,
}

#[derive(Clone, Debug)]
pub struct ExecutionResult<T: Real> {
    pub mode: Mode,
    pub unitary: Option<DenseOperator<T>>,
    pub state: Option<StateVector<T>>,
    pub instructions_executed: usize,
}

impl<T: Real> ExecutionResult<T> {
    pub fn into_unitary(self) -> DenseOperator<T> {
        self.unitary.expect("unitary-mode result")
    }

    pub fn into_state(self) -> StateVector<T> {
        self.state.expect("state-mode result")
    }
}

enum Spectrum<T: Real> {
    Diagonal(Vec<T>),
    Full(HermitianEigen<T>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    omega: Option<Vec<u64>>,
    j_on: Option<Vec<bool>>,
}

impl Key {
    fn of<T: Real>(ov: &Overrides<T>) -> Self {
        Key {
            omega: ov.omega.as_ref().map(|w| w.iter().map(|x| x.as_f64().to_bits()).collect()),
            j_on: ov.j_on.clone(),
        }
    }
}

/// Per-execution cache of chain spectra and propagators.
struct Evolver<'a, T: Real> {
    hardware: &'a HardwareModel<T>,
    spectra: HashMap<Key, Spectrum<T>>,
    propagators: HashMap<(Key, u64), DenseOperator<T>>,
}

impl<'a, T: Real> Evolver<'a, T> {
    fn new(hardware: &'a HardwareModel<T>) -> Self {
        Self {
            hardware,
            spectra: HashMap::new(),
            propagators: HashMap::new(),
        }
    }

    fn spectrum(&mut self, ov: &Overrides<T>) -> Result<(&Spectrum<T>, Key)> {
        let key = Key::of(ov);
        if !self.spectra.contains_key(&key) {
            let sp = match self.hardware.diagonal(Some(ov))? {
                Some(d) => Spectrum::Diagonal(d),
                None => Spectrum::Full(hermitian_eigendecompose(&hardware_hamiltonian(self.hardware, Some(ov))?)?),
            };
            self.spectra.insert(key.clone(), sp);
        }
        Ok((&self.spectra[&key], key))
    }

    /// Chain propagator `e^{−iτH}` (chain register only).
    fn propagator(&mut self, tau: T, ov: &Overrides<T>) -> Result<&DenseOperator<T>> {
        let (_, key) = self.spectrum(ov)?;
        let pk = (key.clone(), tau.as_f64().to_bits());
        if !self.propagators.contains_key(&pk) {
            let u = match &self.spectra[&key] {
                Spectrum::Diagonal(d) => {
                    let ph: Vec<Complex<T>> = d.iter().map(|&e| cis(-e * tau)).collect();
                    DenseOperator::from_diagonal(&ph)?
                }
                Spectrum::Full(e) => e.propagator(tau),
            };
            self.propagators.insert(pk.clone(), u);
        }
        Ok(&self.propagators[&pk])
    }

    /// Applies `e^{−iτH}` to every length-`2^N` block of `v`.
    fn apply_to_vector(&mut self, tau: T, ov: &Overrides<T>, v: &mut DVector<Complex<T>>) -> Result<()> {
        let d = 1usize << self.hardware.n_qubits();
        let (sp, _) = self.spectrum(ov)?;
        for start in (0..v.len()).step_by(d) {
            let mut block = v.rows_mut(start, d);
            match sp {
                Spectrum::Diagonal(e) => {
                    for (z, &ei) in block.iter_mut().zip(e) {
                        *z *= cis(-ei * tau);
                    }
                }
                Spectrum::Full(eig) => {
                    let vecs = eig.vectors.matrix();
                    let mut coeffs = vecs.ad_mul(&block);
                    for (c, &lam) in coeffs.iter_mut().zip(&eig.values) {
                        *c *= cis(-lam * tau);
                    }
                    block.copy_from(&(vecs * coeffs));
                }
            }
        }
        Ok(())
    }
}

fn apply_cnot_to_columns<T: Real>(m: &mut DMatrix<Complex<T>>, cbit: usize, tbit: usize) {
    let (cm, tm) = (1usize << cbit, 1usize << tbit);
    for mut col in m.column_iter_mut() {
        for i in 0..col.len() {
            if i & cm != 0 && i & tm == 0 {
                col.swap_rows(i, i | tm);
            }
        }
    }
}

/// Runs `s` on `h`. With `initial` the state is propagated instruction by
/// instruction; without it the full unitary is accumulated.
///
/// `h` must describe the same chain length as the schedule; every
/// instruction is re-checked against `h`'s tunability flags.
pub fn execute<T: Real>(
    s: &GateSchedule<T>,
    h: &HardwareModel<T>,
    initial: Option<&StateVector<T>>,
) -> Result<ExecutionResult<T>> {
    if h.n_qubits() != s.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: s.n_qubits(),
            found: h.n_qubits(),
        });
    }
    let width = s.register_width();
    let checked = s.clone_for(h);
    checked.validate()?;
    let mut ev = Evolver::new(h);
    let bit = |q: usize| width - 1 - s.slot(q);

    match initial {
        Some(psi) => {
            if psi.n_qubits() != width {
                return Err(Error::DimensionMismatch {
                    expected: 1 << width,
                    found: psi.dim(),
                });
            }
            let mut v = psi.amplitudes().clone();
            for ins in s.instructions() {
                match ins {
                    Instruction::Rotation { axis, angle, qubits } => {
                        let g = rotation_gate(axis.pauli(), *angle);
                        for &q in qubits {
                            apply_gate_to_vector(&mut v, bit(q), &g);
                        }
                    }
                    Instruction::Evolve { duration, overrides } => {
                        if *duration != T::zero() {
                            ev.apply_to_vector(*duration, overrides, &mut v)?;
                        }
                    }
                    Instruction::Cnot { control, target } => {
                        let (cm, tm) = (1usize << bit(*control), 1usize << bit(*target));
                        for i in 0..v.len() {
                            if i & cm != 0 && i & tm == 0 {
                                v.swap_rows(i, i | tm);
                            }
                        }
                    }
                }
            }
            Ok(ExecutionResult {
                mode: Mode::State,
                unitary: None,
                state: Some(StateVector::from_vector(v)?),
                instructions_executed: s.len(),
            })
        }
        None => {
            let mut u = DenseOperator::identity(width);
            let anc = s.allows_cnot();
            for ins in s.instructions() {
                match ins {
                    Instruction::Rotation { axis, angle, qubits } => {
                        let g = rotation_gate(axis.pauli(), *angle);
                        for &q in qubits {
                            apply_gate_to_columns(u.matrix_mut(), bit(q), &g);
                        }
                    }
                    Instruction::Evolve { duration, overrides } => {
                        if *duration == T::zero() {
                            continue;
                        }
                        let p = ev.propagator(*duration, overrides)?;
                        u = if anc {
                            &DenseOperator::identity(1).kron(p) * &u
                        } else {
                            p * &u
                        };
                    }
                    Instruction::Cnot { control, target } => {
                        apply_cnot_to_columns(u.matrix_mut(), bit(*control), bit(*target));
                    }
                }
            }
            Ok(ExecutionResult {
                mode: Mode::Unitary,
                unitary: Some(u),
                state: None,
                instructions_executed: s.len(),
            })
        }
    }
}

/// Unitary realized by `s` on its own hardware.
pub fn schedule_unitary<T: Real>(s: &GateSchedule<T>) -> Result<DenseOperator<T>> {
    Ok(execute(s, s.hardware(), None)?.into_unitary())
}

/// `e^{−i t H}`.
pub fn exact_propagator<T: Real>(hm: &DenseOperator<T>, t: T) -> Result<DenseOperator<T>> {
    hermitian_expm(hm, t)
}

impl<T: Real> GateSchedule<T> {
    /// Same instructions rebound to other hardware, for legality checks.
    fn clone_for(&self, h: &HardwareModel<T>) -> GateSchedule<T> {
        let mut out = if self.allows_cnot() {
            GateSchedule::with_ancilla(h)
        } else {
            GateSchedule::new(h)
        };
        out.extend_unchecked(self.instructions().iter().cloned());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HardwareKind, PairingModel};
    use crate::pauli::{Pauli, PauliString};
    use crate::schedule::{semantics, Axis};
    use std::f64::consts::FRAC_PI_2;

    fn hw() -> HardwareModel<f64> {
        HardwareModel::new(HardwareKind::Heisenberg, vec![1.0, 1.7, 0.4], vec![0.3, -0.2], true, true).unwrap()
    }

    fn sample(h: &HardwareModel<f64>) -> GateSchedule<f64> {
        let mut s = GateSchedule::new(h);
        s.rot(Axis::X, 0.4, [1, 3]).unwrap();
        s.evolve(0.7, Overrides::none()).unwrap();
        s.rot(Axis::Y, -1.1, [2]).unwrap();
        s.evolve(
            0.3,
            Overrides {
                omega: Some(vec![0.0, -1.7, 0.4]),
                j_on: Some(vec![false, true]),
            },
        )
        .unwrap();
        s.rot(Axis::Z, 0.9, [1, 2, 3]).unwrap();
        s.evolve(0.7, Overrides::none()).unwrap();
        s
    }

    #[test]
    fn empty_schedule_is_identity() {
        let h = hw();
        let u = schedule_unitary(&GateSchedule::new(&h)).unwrap();
        assert_eq!(u, DenseOperator::identity(3));
    }

    #[test]
    fn inverse_rotations_cancel() {
        let h = hw();
        let mut s = GateSchedule::new(&h);
        s.rot(Axis::X, FRAC_PI_2, [1]).unwrap();
        s.rot(Axis::X, -FRAC_PI_2, [1]).unwrap();
        assert!(schedule_unitary(&s).unwrap().max_diff(&DenseOperator::identity(3)) < 1e-14);
    }

    #[test]
    fn matches_product_of_semantics() {
        let h = hw();
        let s = sample(&h);
        let mut want = DenseOperator::identity(3);
        for ins in s.instructions() {
            want = &semantics(&s, ins).unwrap() * &want;
        }
        assert!(schedule_unitary(&s).unwrap().max_diff(&want) < 1e-12);
    }

    #[test]
    fn state_mode_matches_unitary_mode() {
        let h = hw();
        let s = sample(&h);
        let psi = StateVector::plus(3);
        let u = schedule_unitary(&s).unwrap();
        let via_u = u.apply(&psi).unwrap();
        let via_s = execute(&s, &h, Some(&psi)).unwrap().into_state();
        let diff = (via_u.amplitudes() - via_s.amplitudes()).camax();
        assert!(diff < 1e-12);
        assert!((via_s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ancilla_register() {
        let h = hw();
        let mut s = GateSchedule::with_ancilla(&h);
        s.rot(Axis::Y, 0.3, [0]).unwrap();
        s.cnot(0, 1).unwrap();
        s.evolve(0.5, Overrides::none()).unwrap();
        s.cnot(0, 2).unwrap();
        s.rot(Axis::X, 0.2, [3]).unwrap();
        let mut want = DenseOperator::identity(4);
        for ins in s.instructions() {
            want = &semantics(&s, ins).unwrap() * &want;
        }
        let u = schedule_unitary(&s).unwrap();
        assert!(u.max_diff(&want) < 1e-12);
        let psi = StateVector::basis(4, 5).unwrap();
        let st = execute(&s, &h, Some(&psi)).unwrap().into_state();
        let diff = (u.apply(&psi).unwrap().amplitudes() - st.amplitudes()).camax();
        assert!(diff < 1e-12);
    }

    #[test]
    fn rejects_schedule_illegal_on_target_hardware() {
        let h = hw();
        let s = sample(&h);
        let fixed = h.with_flags(false, false);
        assert!(matches!(execute(&s, &fixed, None), Err(Error::Constraint(_))));
    }

    #[test]
    fn exact_propagator_of_diagonal_model() {
        let p = PairingModel::uncoupled(vec![1.0, 3.0]).unwrap();
        let t = 0.37;
        let u = exact_propagator(&p.hamiltonian(), t).unwrap();
        for idx in 0..4usize {
            let s1 = if idx & 2 == 0 { 1.0 } else { -1.0 };
            let s2 = if idx & 1 == 0 { 1.0 } else { -1.0 };
            let e: f64 = 0.5 * (s1 * 1.0 + s2 * 3.0);
            let want = Complex::new((e * t).cos(), -(e * t).sin());
            assert!((u.get(idx, idx) - want).norm() < 1e-14);
        }
        let z = PauliString::<f64>::single(2, 1, Pauli::Z, 1.0).unwrap();
        assert!(exact_propagator(&z.to_matrix(), 0.0).unwrap() == DenseOperator::identity(2));
    }
}
