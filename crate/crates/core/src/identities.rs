//! Self-checks of every synthesis identity against dense Pauli exponentials.
//!
//! Each construction must either reproduce its target to round-off or
//! converge to it at second order in the angle.

use serde::Serialize;

use crate::analysis::phase_aligned_distance;
use crate::compiler::{extend_range, synth_pair_xxyy, synth_pair_zz, synth_single_z, CompileOptions, Compiler};
use crate::error::{Error, Result};
use crate::models::{HardwareKind, HardwareModel};
use crate::pauli::{hermitian_expm, DenseOperator, Pauli, PauliString, PauliSum};
use crate::schedule::GateSchedule;
use crate::simulator::schedule_unitary;

pub const EXACT_TOL: f64 = 1e-10;
const ORDER_RANGE: (f64, f64) = (1.7, 2.3);
const PROBE: (f64, f64) = (1e-3, 2e-3);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Outcome {
    Exact,
    /// Convergence order estimated from two probe angles.
    SecondOrder(f64),
    /// The backend rejects the target; expected for some flag combinations.
    Unsupported,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub backend: HardwareKind,
    pub freq_tunable: bool,
    pub couplings_switchable: bool,
    pub outcome: Outcome,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        !matches!(self.outcome, Outcome::Failed(_))
    }
}

fn z_target(n: usize, l: usize, theta: f64) -> Result<DenseOperator<f64>> {
    let z = PauliString::single(n, l, Pauli::Z, 1.0)?.to_matrix();
    hermitian_expm(&z, theta / 2.0)
}

fn pair_target(n: usize, a: usize, b: usize, paulis: &[Pauli], phi: f64) -> Result<DenseOperator<f64>> {
    let mut sum = PauliSum::new(n);
    for &p in paulis {
        sum.push(PauliString::pair(n, a, p, b, p, 1.0)?)?;
    }
    hermitian_expm(&sum.to_matrix(), phi)
}

fn classify(
    build: impl Fn(f64) -> Result<GateSchedule<f64>>,
    target: impl Fn(f64) -> Result<DenseOperator<f64>>,
    must_be_exact: bool,
) -> Outcome {
    let dist = |x: f64| -> Result<f64> {
        let s = build(x)?;
        phase_aligned_distance(&schedule_unitary(&s)?, &target(x)?)
    };
    let (d1, d2) = match (dist(PROBE.0), dist(PROBE.1)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) if e.is_constraint() => return Outcome::Unsupported,
        (Err(e), _) | (_, Err(e)) => return Outcome::Failed(e.to_string()),
    };
    if d1 < EXACT_TOL && d2 < EXACT_TOL {
        return Outcome::Exact;
    }
    if must_be_exact {
        return Outcome::Failed(format!("expected exact, distance {d2:e}"));
    }
    let order = (d2 / d1).log2();
    if (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&order) {
        Outcome::SecondOrder(order)
    } else {
        Outcome::Failed(format!("order {order:.3} ({d1:e}, {d2:e})"))
    }
}

/// Test chain: uniform `ω = 5`, couplings `0.03, 0.04, …`.
pub fn test_chain(kind: HardwareKind, n: usize, f: bool, c: bool) -> Result<HardwareModel<f64>> {
    let j = (0..n.saturating_sub(1)).map(|i| 0.03 + 0.01 * i as f64).collect();
    HardwareModel::new(kind, vec![5.0; n], j, f, c)
}

/// Runs every identity on every backend and flag combination of an
/// `n`-qubit chain.
pub fn identity_checks(n: usize) -> Result<Vec<IdentityCheck>> {
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidConfig(format!("identity checks need 2 ≤ n ≤ 8, got {n}")));
    }
    let mut out = Vec::new();
    for kind in HardwareKind::ALL {
        for (f, c) in [(false, false), (true, false), (false, true), (true, true)] {
            let h = test_chain(kind, n, f, c)?;
            let exact_kind = kind == HardwareKind::IsingLongitudinal;
            let mut push = |identity: String, outcome: Outcome| {
                out.push(IdentityCheck {
                    identity,
                    backend: kind,
                    freq_tunable: f,
                    couplings_switchable: c,
                    outcome,
                })
            };
            for l in 1..=n {
                for sign in [1.0, -1.0] {
                    let o = classify(
                        |x| synth_single_z(&h, l, 10.0 * sign * x),
                        |x| z_target(n, l, 10.0 * sign * x),
                        exact_kind,
                    );
                    push(format!("single_z(l={l}, sign={sign:+})"), o);
                }
            }
            for l in 1..n {
                let o = classify(
                    |x| synth_pair_zz(&h, l, x),
                    |x| pair_target(n, l, l + 1, &[Pauli::Z], x),
                    exact_kind,
                );
                push(format!("pair_zz(l={l})"), o);
                let o = classify(
                    |x| synth_pair_xxyy(&h, l, x),
                    |x| pair_target(n, l, l + 1, &[Pauli::X, Pauli::Y], x),
                    exact_kind,
                );
                push(format!("pair_xxyy(l={l})"), o);
            }
        }
    }
    // Range extension on the exact backend: U_{1,2} hopped to U_{1,n}.
    let h = test_chain(HardwareKind::IsingLongitudinal, n, false, false)?;
    for phi in [0.1, 0.5, 1.0] {
        let outcome = (|| -> Result<Outcome> {
            let mut s = synth_pair_zz(&h, 1, phi)?;
            for l in 2..n {
                s = extend_range(&s, l, CompileOptions::default())?;
            }
            let d = phase_aligned_distance(&schedule_unitary(&s)?, &pair_target(n, 1, n, &[Pauli::Z], phi)?)?;
            Ok(if d < 1e-8 { Outcome::Exact } else { Outcome::Failed(format!("distance {d:e}")) })
        })()
        .unwrap_or_else(|e| Outcome::Failed(e.to_string()));
        out.push(IdentityCheck {
            identity: format!("extend zz(1,2)→zz(1,{n}), φ={phi}"),
            backend: HardwareKind::IsingLongitudinal,
            freq_tunable: false,
            couplings_switchable: false,
            outcome,
        });
    }
    // Long-range xx+yy assembled by the compiler on the same chain.
    let comp = Compiler::new(&h, CompileOptions::default());
    let outcome = (|| -> Result<Outcome> {
        let mut s = GateSchedule::new(&h);
        comp.xxyy_long(&mut s, 1, n, 0.3)?;
        let d = phase_aligned_distance(&schedule_unitary(&s)?, &pair_target(n, 1, n, &[Pauli::X, Pauli::Y], 0.3)?)?;
        Ok(if d < 1e-8 { Outcome::Exact } else { Outcome::Failed(format!("distance {d:e}")) })
    })()
    .unwrap_or_else(|e| Outcome::Failed(e.to_string()));
    out.push(IdentityCheck {
        identity: format!("xxyy(1,{n}), φ=0.3"),
        backend: HardwareKind::IsingLongitudinal,
        freq_tunable: false,
        couplings_switchable: false,
        outcome,
    });
    Ok(out)
}
