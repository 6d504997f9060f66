use pairsim::analysis::{operator_fidelity, phase_aligned_distance};
use pairsim::compiler::*;
use pairsim::models::*;
use pairsim::pauli::*;
use pairsim::simulator::{exact_propagator, schedule_unitary};
use pairsim::{Error, GateSchedule};

const N: usize = 4;

fn chain(kind: HardwareKind, f: bool, c: bool) -> HardwareModel<f64> {
    HardwareModel::new(kind, vec![5.0; N], vec![0.03, 0.04, 0.05], f, c).unwrap()
}

fn flags() -> [(bool, bool); 4] {
    [(false, false), (true, false), (false, true), (true, true)]
}

fn z_target(n: usize, l: usize, theta: f64) -> DenseOperator<f64> {
    let z = PauliString::single(n, l, Pauli::Z, 1.0).unwrap().to_matrix();
    hermitian_expm(&z, theta / 2.0).unwrap()
}

fn pair_target(n: usize, a: usize, b: usize, paulis: &[Pauli], phi: f64) -> DenseOperator<f64> {
    let mut sum = PauliSum::new(n);
    for &p in paulis {
        sum.push(PauliString::pair(n, a, p, b, p, 1.0).unwrap()).unwrap();
    }
    hermitian_expm(&sum.to_matrix(), phi).unwrap()
}

fn dist(s: &GateSchedule, target: &DenseOperator<f64>) -> f64 {
    phase_aligned_distance(&schedule_unitary(s).unwrap(), target).unwrap()
}

/// Either exact, or second order in the angle. Angles are small enough that
/// the matching segment durations keep `ωτ ≪ 1`.
fn exact_or_quadratic(label: &str, d: impl Fn(f64) -> f64) -> bool {
    let (d1, d2) = (d(1e-3), d(2e-3));
    if d1 < 1e-12 && d2 < 1e-12 {
        return true;
    }
    let order = (d2 / d1).log2();
    assert!((1.7..=2.3).contains(&order), "{label}: error order {order} ({d1:e}, {d2:e})");
    false
}

#[test]
fn ising_longitudinal_constructions_are_exact() {
    let taus = [1e-3, 1e-2, 1e-1, 1.0];
    for (f, c) in flags() {
        let h = chain(HardwareKind::IsingLongitudinal, f, c);
        for l in 1..=N {
            for &t in &taus {
                for theta in [t, -t] {
                    let s = synth_single_z(&h, l, theta).unwrap();
                    assert!(dist(&s, &z_target(N, l, theta)) < 1e-10, "z l={l} θ={theta} f={f} c={c}");
                }
            }
        }
        for l in 1..N {
            for &t in &taus {
                for phi in [t, -t] {
                    let s = synth_pair_zz(&h, l, phi).unwrap();
                    assert!(dist(&s, &pair_target(N, l, l + 1, &[Pauli::Z], phi)) < 1e-10);
                    let s = synth_pair_xxyy(&h, l, phi).unwrap();
                    assert!(dist(&s, &pair_target(N, l, l + 1, &[Pauli::X, Pauli::Y], phi)) < 1e-10);
                }
            }
        }
    }
}

#[test]
fn single_z_circuit_count_matches_the_four_segment_circuit() {
    let h = chain(HardwareKind::IsingLongitudinal, false, false);
    let g = synth_single_z(&h, 2, 0.3).unwrap().count_gates();
    assert_eq!((g.single_qubit_gates, g.free_evolutions, g.cnots), (6, 4, 0));
}

#[test]
fn single_z_is_exact_or_second_order_everywhere() {
    for kind in HardwareKind::ALL {
        for (f, c) in flags() {
            let h = chain(kind, f, c);
            for l in [1, 2, N] {
                for sign in [1.0, -1.0] {
                    let exact = exact_or_quadratic(&format!("{kind} f={f} c={c} l={l}"), |x| {
                        let theta = sign * 10.0 * x;
                        dist(&synth_single_z(&h, l, theta).unwrap(), &z_target(N, l, theta))
                    });
                    let expect_exact =
                        kind == HardwareKind::IsingLongitudinal || c || kind == HardwareKind::Xy;
                    assert_eq!(exact, expect_exact, "{kind} f={f} c={c} l={l} sign={sign}");
                }
            }
        }
    }
}

#[test]
fn xxyy_routes_match_their_exactness_claims() {
    for kind in HardwareKind::ALL {
        for (f, c) in flags() {
            let h = chain(kind, f, c);
            for route in XxyyRoute::ALL {
                let opts = CompileOptions {
                    xxyy_route: Some(route),
                    ..Default::default()
                };
                let comp = Compiler::new(&h, opts);
                if !comp.route_allowed(route) {
                    assert!(synth_pair_xxyy_with(&h, 1, 0.1, opts).is_err());
                    continue;
                }
                for l in 1..N {
                    let Ok(claimed) = comp.xxyy_exact(l) else {
                        assert!(synth_pair_xxyy_with(&h, l, 0.1, opts).unwrap_err().is_constraint());
                        continue;
                    };
                    for sign in [1.0, -1.0] {
                        let exact = exact_or_quadratic(&format!("{kind} {route} f={f} c={c} l={l}"), |x| {
                            let s = synth_pair_xxyy_with(&h, l, sign * x, opts).unwrap();
                            dist(&s, &pair_target(N, l, l + 1, &[Pauli::X, Pauli::Y], sign * x))
                        });
                        assert_eq!(exact, claimed, "{kind} {route} f={f} c={c} l={l}");
                    }
                }
            }
        }
    }
}

#[test]
fn zz_is_exact_or_second_order_everywhere() {
    for kind in HardwareKind::ALL {
        for (f, c) in flags() {
            let h = chain(kind, f, c);
            for route in [ZzRoute::GlobalRefocus, ZzRoute::IsingReduction] {
                let opts = CompileOptions {
                    zz_route: Some(route),
                    ..Default::default()
                };
                for l in 1..N {
                    if let Err(e) = synth_pair_zz_with(&h, l, 0.01, opts) {
                        assert!(e.is_constraint(), "{kind} f={f} c={c}: {e}");
                        continue;
                    }
                    let exact = exact_or_quadratic(&format!("zz {kind} f={f} c={c} l={l}"), |x| {
                        let s = synth_pair_zz_with(&h, l, -x, opts).unwrap();
                        dist(&s, &pair_target(N, l, l + 1, &[Pauli::Z], -x))
                    });
                    if kind == HardwareKind::IsingLongitudinal || (f && c) {
                        assert!(exact, "{kind} f={f} c={c} should be exact");
                    }
                }
            }
        }
    }
}

#[test]
fn transverse_ising_without_tunable_frequencies_names_the_target() {
    let h = chain(HardwareKind::IsingTransverse, false, false);
    let err = synth_pair_xxyy(&h, 2, 0.1).unwrap_err();
    assert!(matches!(err, Error::Unsupported { .. }));
    assert!(err.to_string().contains("PairXXYY(l=2, m=3"), "{err}");
}

#[test]
fn zero_angles_give_identity() {
    let id = DenseOperator::identity(N);
    for kind in HardwareKind::ALL {
        let h = chain(kind, true, true);
        assert!(synth_single_z(&h, 2, 0.0).unwrap().is_empty());
        assert!(dist(&synth_pair_zz(&h, 2, 0.0).unwrap(), &id) < 1e-12);
        assert!(dist(&synth_pair_xxyy(&h, 2, 0.0).unwrap(), &id) < 1e-12);
    }
}

#[test]
fn range_extension_hops_to_the_far_end() {
    let h = chain(HardwareKind::IsingLongitudinal, false, false);
    for phi in [0.1, 0.5, 1.0] {
        let mut s = synth_pair_zz(&h, 1, phi).unwrap();
        for hop in [2, 3] {
            s = extend_range(&s, hop, CompileOptions::default()).unwrap();
        }
        assert!(dist(&s, &pair_target(N, 1, 4, &[Pauli::Z], phi)) < 1e-8);
    }
    let base = synth_pair_zz(&h, 1, 0.1).unwrap();
    assert!(extend_range(&base, N, CompileOptions::default()).is_err());
}

#[test]
fn long_range_targets_on_exact_chains() {
    for (kind, f, c) in [
        (HardwareKind::IsingLongitudinal, false, false),
        (HardwareKind::Xy, true, true),
        (HardwareKind::Heisenberg, true, true),
        (HardwareKind::IsingTransverse, true, true),
    ] {
        let h = chain(kind, f, c);
        let comp = Compiler::new(&h, CompileOptions::default());
        for (m, l) in [(1, 3), (1, 4), (2, 4)] {
            let s = comp.compile(SynthesisTarget::PairXxyy { l: m, m: l, phi: 0.37 }, None).unwrap();
            assert!(dist(&s, &pair_target(N, m, l, &[Pauli::X, Pauli::Y], 0.37)) < 1e-9, "{kind} {m}-{l}");
            let s = comp.compile(SynthesisTarget::PairZz { l: m, m: l, phi: -0.2 }, None).unwrap();
            assert!(dist(&s, &pair_target(N, m, l, &[Pauli::Z], -0.2)) < 1e-9, "{kind} {m}-{l}");
        }
    }
}

#[test]
fn uncoupled_pairing_on_longitudinal_chain_is_exact() {
    let h = chain(HardwareKind::IsingLongitudinal, false, false);
    let p = PairingModel::uncoupled(vec![2000.0, 1500.0, 900.0, 300.0]).unwrap();
    for t in [0.01, 0.3, 1.7, 5.0] {
        let s = compile_pairing(&p, &h, CompileOptions::default(), t).unwrap();
        let exact = exact_propagator(&p.hamiltonian(), t).unwrap();
        let f = operator_fidelity(&schedule_unitary(&s).unwrap(), &exact).unwrap();
        assert!(f > 1.0 - 1e-10, "t={t}: {f}");
    }
}

#[test]
fn pairing_at_time_zero_is_empty() {
    let h = chain(HardwareKind::Heisenberg, false, false);
    let p = PairingModel::uniform(N, 2000.0, -0.2).unwrap();
    assert!(compile_pairing(&p, &h, CompileOptions::default(), 0.0).unwrap().is_empty());
}

#[test]
fn trotter_steps_scale_counts() {
    let h = chain(HardwareKind::Xy, false, false);
    let p = PairingModel::uniform(N, 2000.0, -0.2).unwrap();
    let one = compile_pairing(&p, &h, CompileOptions::default(), 1.0).unwrap().count_gates();
    for m in [2, 5] {
        let o = CompileOptions::with_trotter(TrotterOptions::new(m, 1).unwrap());
        assert_eq!(compile_pairing(&p, &h, o, 1.0).unwrap().count_gates(), one.scaled(m));
    }
}

#[test]
fn subdivision_only_touches_inexact_swaps() {
    let p = PairingModel::uniform(N, 2000.0, -0.2).unwrap();
    let count = |h: &HardwareModel<f64>, g| {
        let o = CompileOptions::with_trotter(TrotterOptions::new(1, g).unwrap());
        compile_pairing(&p, h, o, 1.0).unwrap().count_gates()
    };
    let tunable = chain(HardwareKind::Xy, true, true);
    assert_eq!(count(&tunable, 1), count(&tunable, 10));
    let fixed = chain(HardwareKind::Xy, false, false);
    assert!(count(&fixed, 10).single_qubit_gates > count(&fixed, 1).single_qubit_gates);
}

#[test]
fn mismatched_pairing_size_is_rejected() {
    let h = chain(HardwareKind::Xy, true, true);
    let p = PairingModel::uniform(3, 1.0, 0.1).unwrap();
    assert!(compile_pairing(&p, &h, CompileOptions::default(), 1.0).is_err());
}
