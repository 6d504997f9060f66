use std::f64::consts::PI;

use num_complex::Complex;
use pairsim::analysis::*;
use pairsim::compiler::CompileOptions;
use pairsim::models::*;
use pairsim::pauli::*;
use pairsim::Error;
use proptest::prelude::*;

fn random_hermitian(n: usize, entries: &[f64]) -> DenseOperator<f64> {
    let d = 1 << n;
    let mut m = nalgebra::DMatrix::<Complex<f64>>::zeros(d, d);
    let mut it = entries.iter().cycle();
    for r in 0..d {
        for c in r..d {
            let re = *it.next().unwrap();
            let im = if r == c { 0.0 } else { *it.next().unwrap() };
            m[(r, c)] = Complex::new(re, im);
            m[(c, r)] = Complex::new(re, -im);
        }
    }
    DenseOperator::from_matrix(m).unwrap()
}

fn random_unitary(n: usize, entries: &[f64]) -> DenseOperator<f64> {
    hermitian_expm(&random_hermitian(n, entries), 1.0).unwrap()
}

#[test]
fn operator_fidelity_examples() {
    let x = PauliString::single(1, 1, Pauli::X, 1.0).unwrap().to_matrix();
    let id = DenseOperator::<f64>::identity(1);
    assert_eq!(operator_fidelity(&id, &id).unwrap(), 1.0);
    assert!(operator_fidelity(&id, &x).unwrap().abs() < 1e-15);
    let phased = x.scale(Complex::from_polar(1.0, 0.7));
    assert!((operator_fidelity(&x, &phased).unwrap() - 1.0).abs() < 1e-14);
    assert!(matches!(
        operator_fidelity(&id, &DenseOperator::identity(2)),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn state_fidelity_examples() {
    let up = StateVector::<f64>::from_spins("u").unwrap();
    let down = StateVector::<f64>::from_spins("d").unwrap();
    let plus = StateVector::<f64>::plus(1);
    assert!((state_fidelity(&up, &up).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(state_fidelity(&up, &down).unwrap(), 0.0);
    assert!((state_fidelity(&up, &plus).unwrap() - 0.5).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fidelity_is_symmetric_and_left_invariant(
        a in prop::collection::vec(-1.0f64..1.0, 36),
        b in prop::collection::vec(-1.0f64..1.0, 36),
        c in prop::collection::vec(-1.0f64..1.0, 36),
    ) {
        let (u, v, w) = (random_unitary(2, &a), random_unitary(2, &b), random_unitary(2, &c));
        let f = operator_fidelity(&u, &v).unwrap();
        prop_assert!((f - operator_fidelity(&v, &u).unwrap()).abs() < 1e-12);
        prop_assert!((f - operator_fidelity(&(&w * &u), &(&w * &v)).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        // ‖u − e^{iα}v‖²/d at the optimal phase equals 2(1 − F).
        let d = phase_aligned_distance(&u, &v).unwrap();
        prop_assert!((d * d - 2.0 * (1.0 - f)).abs() < 1e-10);
    }

    #[test]
    fn unitary_log_inverts_small_exponentials(a in prop::collection::vec(-0.2f64..0.2, 36)) {
        let h = random_hermitian(2, &a);
        let w = hermitian_expm(&h, 1.0).unwrap();
        let d = unitary_log(&w).unwrap();
        let want = h.scale(Complex::new(0.0, -1.0));
        prop_assert!(d.max_diff(&want) < 1e-10);
    }
}

#[test]
fn distance_vanishes_only_at_unit_fidelity() {
    let u = random_unitary(2, &[0.3, -0.2, 0.5, 0.1, 0.7, -0.4]);
    let v = u.scale(Complex::from_polar(1.0, -1.1));
    assert!(phase_aligned_distance(&u, &v).unwrap() < 1e-12);
    let w = random_unitary(2, &[0.1, 0.9, -0.3]);
    assert!(phase_aligned_distance(&u, &w).unwrap() > 1e-3);
    assert!(operator_fidelity(&u, &w).unwrap() < 1.0 - 1e-7);
}

#[test]
fn fits_recover_known_slopes() {
    let x = [1.0, 2.0, 4.0, 8.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
    assert!((loglog_slope(&x, &y).unwrap() + 1.5).abs() < 1e-12);
    assert!(matches!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::DegenerateFit(_))));
    assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
}

#[test]
fn moving_average_uses_trailing_window() {
    let m = moving_average(&[1.0, 3.0, 5.0, 7.0], 2);
    assert_eq!(m, vec![1.0, 2.0, 4.0, 6.0]);
}

#[test]
fn uncoupled_sweep_on_longitudinal_chain_is_flat() {
    let h = HardwareModel::uniform(HardwareKind::IsingLongitudinal, 3, 5.0, 0.03, false, false).unwrap();
    let p = PairingModel::uncoupled(vec![2000.0, 1200.0, 700.0]).unwrap();
    let grid: Vec<f64> = (0..12).map(|k| k as f64 * 0.4).collect();
    for metric in [Metric::Operator, Metric::State] {
        let c = fidelity_sweep(&p, &h, CompileOptions::default(), &grid, metric, true).unwrap();
        assert_eq!(c.t, grid);
        assert!(c.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-10));
        assert!(c.smoothed.unwrap().iter().all(|f| (f - 1.0).abs() < 1e-10));
    }
}

#[test]
fn exact_chains_give_degenerate_trotter_fit() {
    let h = HardwareModel::uniform(HardwareKind::IsingLongitudinal, 3, 5.0, 0.03, false, false).unwrap();
    let p = PairingModel::uncoupled(vec![2000.0, 1200.0, 700.0]).unwrap();
    let r = trotter_order_fit(&p, &h, CompileOptions::default(), 2.0, &[1, 2, 4, 8]);
    assert!(matches!(r, Err(Error::DegenerateFit(_))));
    let r = trotter_order_fit(&p, &h, CompileOptions::default(), 2.0, &[1, 2, 4]);
    assert!(matches!(r, Err(Error::DegenerateFit(_))));
}

#[test]
fn trotter_infidelity_falls_quadratically_on_tunable_chains() {
    // The operator infidelity is quadratic in the first-order O(t²/M) operator error.
    for kind in [HardwareKind::IsingTransverse, HardwareKind::Heisenberg] {
        let h = HardwareModel::uniform(kind, 4, 5.0, 0.03, true, true).unwrap();
        let p = PairingModel::uniform(4, 2000.0, -0.2).unwrap();
        let fit = trotter_order_fit(&p, &h, CompileOptions::default(), 2.0, &[5, 10, 20, 40]).unwrap();
        assert!((-2.2..=-1.8).contains(&fit.slope), "{kind}: {}", fit.slope);
        assert!(fit.infidelity.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn more_qubits_lower_fidelity() {
    let opts = CompileOptions::with_trotter(TrotterOptions::new(20, 1).unwrap());
    let mut prev = f64::INFINITY;
    for n in 2..=5 {
        let h = HardwareModel::uniform(HardwareKind::IsingTransverse, n, 5.0, 0.03, true, true).unwrap();
        let p = PairingModel::uniform(n, 2000.0, -0.2).unwrap();
        let f = pairing_fidelity(&p, &h, opts, 5.0, Metric::Operator).unwrap();
        assert!(f <= prev + 1e-12, "N={n}: {f} > {prev}");
        prev = f;
    }
}

#[test]
fn fluctuation_expansion_matches_closed_form() {
    let w = 5.0;
    let taus: Vec<f64> = (1..=40).map(|k| k as f64 * PI / w / 40.0).collect();
    let r = fluctuation_expansion_check(&[w; 2], &[0.03], &taus).unwrap();
    assert!(r.max_ratio < 0.1, "ratio {}", r.max_ratio);
    let zero = fluctuation_expansion_check(&[w; 3], &[0.0; 2], &taus).unwrap();
    assert!(zero.points.iter().all(|p| p.defect < 1e-13 && p.predicted == 0.0));
    assert!(fluctuation_expansion_check(&[5.0, 4.0], &[0.03], &taus).is_err());
    assert!(fluctuation_expansion_check(&[5.0, 5.0], &[0.03, 0.03], &taus).is_err());
}

#[test]
fn at_half_periods_only_the_linear_drift_survives() {
    let (w, j) = (5.0, 0.03);
    let tau = PI / w;
    let r = fluctuation_expansion_check(&[w; 2], &[j], &[tau]).unwrap();
    // Largest entry of τJ(xx − yy)/2 on two qubits is τJ.
    assert!((r.points[0].predicted - tau * j).abs() < 1e-14);
}

#[test]
fn fluctuation_frequencies() {
    let w = 5.0;
    let taus: Vec<f64> = (0..256).map(|k| k as f64 * 40.0 * PI / w / 256.0).collect();
    let c = fluctuation_curves(4, w, 0.03, &taus).unwrap();
    let (fa, bin) = fluctuation_frequency(&taus, &c.splitting).unwrap();
    let (fb, _) = fluctuation_frequency(&taus, &c.refocusing).unwrap();
    assert!((fa - 2.0 * w).abs() <= bin);
    assert!((fb - w).abs() <= bin);
}

fn template(kind: HardwareKind, f: bool, c: bool) -> SweepTemplate<f64> {
    SweepTemplate {
        kind,
        omega: 5.0,
        j: 0.03,
        freq_tunable: f,
        couplings_switchable: c,
        epsilon: 2000.0,
        v: -0.2,
    }
}

#[test]
fn complexity_grows_as_fourth_power_on_longitudinal_chain() {
    let ns: Vec<usize> = (4..=10).collect();
    let s = complexity_sweep(&template(HardwareKind::IsingLongitudinal, false, false), &ns, CompileOptions::default()).unwrap();
    assert!((s.fitted_exponent - 4.0).abs() <= 0.3, "{}", s.fitted_exponent);
    assert!(s.counts.windows(2).all(|w| w[1].single_qubit_gates > w[0].single_qubit_gates));
}

#[test]
fn longitudinal_chain_is_cheapest() {
    let ns: Vec<usize> = (4..=10).collect();
    let base = complexity_sweep(&template(HardwareKind::IsingLongitudinal, false, false), &ns, CompileOptions::default()).unwrap();
    for (kind, f) in [
        (HardwareKind::IsingTransverse, true),
        (HardwareKind::Xy, false),
        (HardwareKind::Heisenberg, false),
    ] {
        let other = complexity_sweep(&template(kind, f, false), &ns, CompileOptions::default()).unwrap();
        for (a, b) in base.counts.iter().zip(&other.counts) {
            assert!(a.single_qubit_gates <= b.single_qubit_gates, "{kind}");
        }
    }
}

#[test]
fn tunable_xy_counts_ignore_subdivision() {
    let ns = [3, 5, 7];
    let count = |g| {
        let o = CompileOptions::with_trotter(TrotterOptions::new(1, g).unwrap());
        complexity_sweep(&template(HardwareKind::Xy, true, true), &ns, o).unwrap().counts
    };
    assert_eq!(count(1), count(10));
    assert_eq!(count(1), count(100));
}

#[test]
fn fixed_chain_counts_grow_with_subdivision() {
    let ns = [3, 4];
    let count = |g| {
        let o = CompileOptions::with_trotter(TrotterOptions::new(1, g).unwrap());
        complexity_sweep(&template(HardwareKind::Heisenberg, false, false), &ns, o).unwrap().counts
    };
    let (a, b) = (count(1), count(4));
    assert!(a.iter().zip(&b).all(|(x, y)| y.single_qubit_gates > x.single_qubit_gates));
}
