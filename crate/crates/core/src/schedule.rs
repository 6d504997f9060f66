//! Gate schedules: the compiler's output language.
//!
//! Instructions are listed in time order. The first instruction acts first,
//! so the schedule `[A, B, C]` realizes the operator `C·B·A`.
//!
//! Text dump, one instruction per line:
//!
//! ```text
//! # pairsim schedule n_qubits=4 allows_cnot=false
//! ROT x +1.5707963267948966 qubits=1,3
//! EVOLVE 0.25 omega_override=5,-5,5,-5 j_on=1,0,1
//! CNOT 0 1
//! ```

use std::fmt::{self, Write as _};
use std::ops::{Add, AddAssign};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{hardware_hamiltonian, HardwareModel, Overrides};
use crate::pauli::{apply_gate_to_columns, hermitian_expm, rotation_gate, DenseOperator, Pauli};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    fn parse(s: &str) -> Option<Axis> {
        match s {
            "x" | "X" => Some(Axis::X),
            "y" | "Y" => Some(Axis::Y),
            "z" | "Z" => Some(Axis::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction<T: Real> {
    /// `⊗_{q ∈ qubits} e^{+i angle σ^axis_q}`.
    Rotation { axis: Axis, angle: T, qubits: Vec<usize> },
    /// `e^{−i duration H(overrides)}`.
    Evolve { duration: T, overrides: Overrides<T> },
    /// Idealized CNOT; only legal in schedules that allow it.
    Cnot { control: usize, target: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub single_qubit_gates: usize,
    pub free_evolutions: usize,
    pub cnots: usize,
}

impl Add for GateCount {
    type Output = GateCount;
    fn add(self, rhs: Self) -> Self {
        GateCount {
            single_qubit_gates: self.single_qubit_gates + rhs.single_qubit_gates,
            free_evolutions: self.free_evolutions + rhs.free_evolutions,
            cnots: self.cnots + rhs.cnots,
        }
    }
}

impl AddAssign for GateCount {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl GateCount {
    pub fn scaled(self, k: usize) -> Self {
        GateCount {
            single_qubit_gates: self.single_qubit_gates * k,
            free_evolutions: self.free_evolutions * k,
            cnots: self.cnots * k,
        }
    }
}

/// Ordered instruction list bound to one hardware chain.
///
/// When `allows_cnot` is set the register gains an ancilla at index 0 placed
/// as the most significant tensor factor; the chain qubits keep indices `1..=N`
/// and free evolution acts as the identity on the ancilla.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSchedule<T: Real> {
    hardware: HardwareModel<T>,
    instructions: Vec<Instruction<T>>,
    allows_cnot: bool,
}

impl<T: Real> GateSchedule<T> {
    pub fn new(hardware: &HardwareModel<T>) -> Self {
        Self {
            hardware: hardware.clone(),
            instructions: Vec::new(),
            allows_cnot: false,
        }
    }

    /// Schedule on the chain plus an ancilla at index 0.
    pub fn with_ancilla(hardware: &HardwareModel<T>) -> Self {
        Self {
            allows_cnot: true,
            ..Self::new(hardware)
        }
    }

    pub fn hardware(&self) -> &HardwareModel<T> {
        &self.hardware
    }

    pub fn n_qubits(&self) -> usize {
        self.hardware.n_qubits()
    }

    pub fn allows_cnot(&self) -> bool {
        self.allows_cnot
    }

    /// Qubits in the simulated register, ancilla included.
    pub fn register_width(&self) -> usize {
        self.n_qubits() + usize::from(self.allows_cnot)
    }

    /// Tensor slot of qubit index `q` (slot 0 is most significant).
    pub fn slot(&self, q: usize) -> usize {
        if self.allows_cnot {
            q
        } else {
            q - 1
        }
    }

    pub fn instructions(&self) -> &[Instruction<T>] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Appends an instruction after checking it against the hardware flags.
    pub fn push(&mut self, ins: Instruction<T>) -> Result<()> {
        self.check(&ins)?;
        self.instructions.push(ins);
        Ok(())
    }

    /// Rotation layer; an empty qubit set or zero angle adds nothing.
    pub fn rot(&mut self, axis: Axis, angle: T, qubits: impl IntoIterator<Item = usize>) -> Result<()> {
        let mut qubits: Vec<usize> = qubits.into_iter().collect();
        if qubits.is_empty() || angle == T::zero() {
            return Ok(());
        }
        qubits.sort_unstable();
        self.push(Instruction::Rotation { axis, angle, qubits })
    }

    pub fn evolve(&mut self, duration: T, overrides: Overrides<T>) -> Result<()> {
        self.push(Instruction::Evolve { duration, overrides })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(Instruction::Cnot { control, target })
    }

    /// Appends every instruction of `other` (which must target the same chain).
    pub fn append(&mut self, other: &GateSchedule<T>) -> Result<()> {
        if other.hardware != self.hardware {
            return Err(Error::InvalidInstruction("appending a schedule for different hardware".into()));
        }
        for ins in &other.instructions {
            self.push(ins.clone())?;
        }
        Ok(())
    }

    /// Appends a chain-only schedule into an ancilla schedule (or any
    /// schedule on the same chain); chain qubit indices are shared.
    pub fn append_chain(&mut self, other: &GateSchedule<T>) -> Result<()> {
        if other.hardware != self.hardware {
            return Err(Error::InvalidInstruction("appending a schedule for different hardware".into()));
        }
        if other.allows_cnot && !self.allows_cnot {
            return Err(Error::InvalidInstruction("appending an ancilla schedule into a chain-only one".into()));
        }
        for ins in &other.instructions {
            self.push(ins.clone())?;
        }
        Ok(())
    }

    pub(crate) fn extend_unchecked(&mut self, it: impl IntoIterator<Item = Instruction<T>>) {
        self.instructions.extend(it);
    }

    fn check(&self, ins: &Instruction<T>) -> Result<()> {
        let lo = if self.allows_cnot { 0 } else { 1 };
        let hi = self.n_qubits();
        let in_range = |q: usize| q >= lo && q <= hi;
        match ins {
            Instruction::Rotation { angle, qubits, .. } => {
                if !angle.is_finite() {
                    return Err(Error::InvalidInstruction("non-finite rotation angle".into()));
                }
                if let Some(&q) = qubits.iter().find(|&&q| !in_range(q)) {
                    return Err(Error::InvalidInstruction(format!("qubit {q} outside {lo}..={hi}")));
                }
                let mut s = qubits.clone();
                s.sort_unstable();
                s.dedup();
                if s.len() != qubits.len() {
                    return Err(Error::InvalidInstruction("repeated qubit in rotation layer".into()));
                }
            }
            Instruction::Evolve { duration, overrides } => {
                if !duration.is_finite() || *duration < T::zero() {
                    return Err(Error::InvalidInstruction(format!("free evolution duration {duration}")));
                }
                self.hardware.check_overrides(overrides)?;
            }
            Instruction::Cnot { control, target } => {
                if !self.allows_cnot {
                    return Err(Error::InvalidInstruction("CNOT in a schedule without ancilla".into()));
                }
                if control == target || !in_range(*control) || !in_range(*target) {
                    return Err(Error::InvalidInstruction(format!("CNOT {control} {target}")));
                }
            }
        }
        Ok(())
    }

    /// Re-checks every instruction; schedules built through `push` always pass.
    pub fn validate(&self) -> Result<()> {
        self.instructions.iter().try_for_each(|i| self.check(i))
    }

    pub fn count_gates(&self) -> GateCount {
        count_gates(self)
    }

    /// Peephole pass: merges adjacent rotation layers with equal axis and
    /// qubit set, and adjacent evolutions with equal overrides. Layers whose
    /// merged angle vanishes are dropped.
    pub fn merged(&self) -> GateSchedule<T> {
        let mut out: Vec<Instruction<T>> = Vec::with_capacity(self.instructions.len());
        for ins in &self.instructions {
            match (out.last_mut(), ins) {
                (
                    Some(Instruction::Rotation { axis: a, angle: acc, qubits: q }),
                    Instruction::Rotation { axis, angle, qubits },
                ) if a == axis && q == qubits => {
                    *acc += *angle;
                    if *acc == T::zero() {
                        out.pop();
                    }
                }
                (
                    Some(Instruction::Evolve { duration: acc, overrides: o }),
                    Instruction::Evolve { duration, overrides },
                ) if o == overrides => *acc += *duration,
                _ => out.push(ins.clone()),
            }
        }
        GateSchedule {
            instructions: out,
            ..self.clone()
        }
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "# pairsim schedule n_qubits={} allows_cnot={}",
            self.n_qubits(),
            self.allows_cnot
        )
        .unwrap();
        for ins in &self.instructions {
            writeln!(s, "{}", DisplayIns(ins)).unwrap();
        }
        s
    }

    /// Parses a dump produced by [`GateSchedule::dump`] against `hardware`.
    pub fn parse(text: &str, hardware: &HardwareModel<T>) -> Result<Self> {
        let mut sched: Option<GateSchedule<T>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let ln = i + 1;
            let perr = |message: String| Error::Parse { line: ln, message };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if sched.is_none() {
                    let mut n = None;
                    let mut anc = false;
                    for tok in rest.split_whitespace() {
                        if let Some(v) = tok.strip_prefix("n_qubits=") {
                            n = Some(v.parse::<usize>().map_err(|e| perr(e.to_string()))?);
                        } else if let Some(v) = tok.strip_prefix("allows_cnot=") {
                            anc = v.parse::<bool>().map_err(|e| perr(e.to_string()))?;
                        }
                    }
                    if let Some(n) = n {
                        if n != hardware.n_qubits() {
                            return Err(perr(format!(
                                "schedule has {n} qubits, hardware has {}",
                                hardware.n_qubits()
                            )));
                        }
                        sched = Some(if anc {
                            GateSchedule::with_ancilla(hardware)
                        } else {
                            GateSchedule::new(hardware)
                        });
                    }
                }
                continue;
            }
            let s = sched.get_or_insert_with(|| GateSchedule::new(hardware));
            let ins = parse_instruction(line).map_err(perr)?;
            s.push(ins).map_err(|e| match e {
                Error::Constraint(_) => e,
                other => perr(other.to_string()),
            })?;
        }
        Ok(sched.unwrap_or_else(|| GateSchedule::new(hardware)))
    }
}

/// Shortest round-trip text, switching to exponent form for very small or large magnitudes.
pub(crate) fn fmt_real<T: Real>(x: T) -> String {
    let a = x.abs();
    if a != T::zero() && (a < T::lit(1e-4) || a >= T::lit(1e16)) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn fmt_list<I: IntoIterator<Item = S>, S: fmt::Display>(items: I) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

struct DisplayIns<'a, T: Real>(&'a Instruction<T>);

impl<T: Real> fmt::Display for DisplayIns<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Instruction::Rotation { axis, angle, qubits } => {
                let sign = if angle.is_sign_negative() { "" } else { "+" };
                write!(f, "ROT {} {sign}{} qubits={}", axis.as_char(), fmt_real(*angle), fmt_list(qubits))
            }
            Instruction::Evolve { duration, overrides } => {
                write!(f, "EVOLVE {}", fmt_real(*duration))?;
                if let Some(w) = &overrides.omega {
                    write!(f, " omega_override={}", fmt_list(w.iter().map(|&x| fmt_real(x))))?;
                }
                if let Some(on) = &overrides.j_on {
                    write!(f, " j_on={}", fmt_list(on.iter().map(|&b| u8::from(b))))?;
                }
                Ok(())
            }
            Instruction::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
        }
    }
}

impl<T: Real> fmt::Display for Instruction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        DisplayIns(self).fmt(f)
    }
}

fn parse_real<T: Real>(s: &str) -> std::result::Result<T, String> {
    let x: f64 = s.parse().map_err(|e| format!("bad number {s:?}: {e}"))?;
    Ok(T::lit(x))
}

fn parse_instruction<T: Real>(line: &str) -> std::result::Result<Instruction<T>, String> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks.first().copied() {
        Some("ROT") => {
            if toks.len() != 4 {
                return Err(format!("ROT expects 3 fields, got {}", toks.len() - 1));
            }
            let axis = Axis::parse(toks[1]).ok_or_else(|| format!("bad axis {:?}", toks[1]))?;
            let angle = parse_real(toks[2])?;
            let list = toks[3].strip_prefix("qubits=").ok_or("missing qubits=")?;
            let qubits = list
                .split(',')
                .map(|q| q.parse::<usize>().map_err(|e| format!("bad qubit {q:?}: {e}")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(Instruction::Rotation { axis, angle, qubits })
        }
        Some("EVOLVE") => {
            let duration = parse_real(toks.get(1).ok_or("EVOLVE needs a duration")?)?;
            let mut overrides = Overrides::none();
            for tok in &toks[2..] {
                if let Some(v) = tok.strip_prefix("omega_override=") {
                    overrides.omega = Some(v.split(',').map(parse_real).collect::<std::result::Result<_, _>>()?);
                } else if let Some(v) = tok.strip_prefix("j_on=") {
                    overrides.j_on = Some(
                        v.split(',')
                            .map(|b| match b {
                                "1" => Ok(true),
                                "0" => Ok(false),
                                _ => Err(format!("bad coupling flag {b:?}")),
                            })
                            .collect::<std::result::Result<_, _>>()?,
                    );
                } else {
                    return Err(format!("unknown EVOLVE field {tok:?}"));
                }
            }
            Ok(Instruction::Evolve { duration, overrides })
        }
        Some("CNOT") => {
            if toks.len() != 3 {
                return Err("CNOT expects control and target".into());
            }
            let c = toks[1].parse().map_err(|e| format!("bad control: {e}"))?;
            let t = toks[2].parse().map_err(|e| format!("bad target: {e}"))?;
            Ok(Instruction::Cnot { control: c, target: t })
        }
        Some(other) => Err(format!("unknown instruction {other:?}")),
        None => Err("empty line".into()),
    }
}

pub fn count_gates<T: Real>(s: &GateSchedule<T>) -> GateCount {
    let mut c = GateCount::default();
    for ins in &s.instructions {
        match ins {
            Instruction::Rotation { qubits, .. } => c.single_qubit_gates += qubits.len(),
            Instruction::Evolve { .. } => c.free_evolutions += 1,
            Instruction::Cnot { .. } => c.cnots += 1,
        }
    }
    c
}

/// Dense matrix of one instruction on the schedule's full register.
pub fn semantics<T: Real>(s: &GateSchedule<T>, ins: &Instruction<T>) -> Result<DenseOperator<T>> {
    s.check(ins)?;
    let width = s.register_width();
    match ins {
        Instruction::Rotation { axis, angle, qubits } => {
            let g = rotation_gate(axis.pauli(), *angle);
            let mut m = DenseOperator::identity(width);
            for &q in qubits {
                apply_gate_to_columns(m.matrix_mut(), width - 1 - s.slot(q), &g);
            }
            Ok(m)
        }
        Instruction::Evolve { duration, overrides } => {
            let h = hardware_hamiltonian(&s.hardware, Some(overrides))?;
            let u = hermitian_expm(&h, *duration)?;
            Ok(if s.allows_cnot {
                DenseOperator::identity(1).kron(&u)
            } else {
                u
            })
        }
        Instruction::Cnot { control, target } => {
            let dim = 1usize << width;
            let cb = 1usize << (width - 1 - s.slot(*control));
            let tb = 1usize << (width - 1 - s.slot(*target));
            let mut m = DenseOperator::zeros(width);
            for col in 0..dim {
                let row = if col & cb != 0 { col ^ tb } else { col };
                m.matrix_mut()[(row, col)] = Complex::new(T::one(), T::zero());
            }
            Ok(m)
        }
    }
}
