use nalgebra::DMatrix;
use num_complex::Complex;
use pairsim::compiler::CompileOptions;
use pairsim::models::*;
use pairsim::pauli::*;
use pairsim::simulator::exact_propagator;
use pairsim::spectroscopy::*;
use pairsim::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_level_model() -> PairingModel<f64> {
    let v = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]);
    PairingModel::new(vec![3.0, 1.0], v).unwrap()
}

fn random_model(n: usize, rng: &mut ChaCha8Rng) -> PairingModel<f64> {
    let eps = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    let mut v = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let x = rng.random_range(-1.0..1.0);
            v[(a, b)] = x;
            v[(b, a)] = x;
        }
    }
    PairingModel::new(eps, v).unwrap()
}

/// Random normalized state with qubit 1 spin up.
fn random_up_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector<f64> {
    let half = 1usize << (n - 1);
    let mut amps = vec![Complex::new(0.0, 0.0); 1 << n];
    for a in amps.iter_mut().take(half) {
        *a = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    StateVector::from_amplitudes(amps).unwrap().normalized().unwrap()
}

fn assert_probability_sanity(s: &ProtocolSeries<f64>) {
    for (a, b) in s.p_plus.iter().zip(&s.p_minus) {
        assert!((a + b - 1.0).abs() < 1e-12);
        assert!((0.0..=1.0).contains(a));
    }
}

fn assert_even(spec: &Spectrum) {
    let n = spec.amplitude.len();
    for k in 1..n {
        assert!((spec.amplitude[k] - spec.amplitude[n - k]).abs() < 1e-10);
    }
}

#[test]
fn protocol_starts_at_one() {
    let p = two_level_model();
    let s = run_protocol(&p, &ProtocolConfig::exact(10.0, 16, StateVector::from_spins("ud").unwrap())).unwrap();
    assert_eq!(s.t[0], 0.0);
    assert!((s.p_plus[0] - 1.0).abs() < 1e-14);
    assert!((correlation_formula(&p, &StateVector::from_spins("ud").unwrap(), 0.0).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn single_qubit_protocol_is_a_cosine() {
    let eps: f64 = 2.5;
    let p = PairingModel::uncoupled(vec![eps]).unwrap();
    let up = StateVector::from_spins("u").unwrap();
    let s = run_protocol(&p, &ProtocolConfig::exact(20.0, 64, up.clone())).unwrap();
    for (t, v) in s.t.iter().zip(&s.p_plus) {
        let want = 0.5 + 0.5 * (eps * t).cos();
        assert!((v - want).abs() < 1e-12);
        assert!((correlation_formula(&p, &up, *t).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn protocol_matches_correlation_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = random_model(3, &mut rng);
    let eig = hermitian_eigendecompose(&p.hamiltonian()).unwrap();
    for _ in 0..3 {
        let psi = random_up_state(3, &mut rng);
        let s = run_protocol(&p, &ProtocolConfig::exact(15.0, 64, psi.clone())).unwrap();
        assert_probability_sanity(&s);
        for (t, v) in s.t.iter().zip(&s.p_plus) {
            assert!((v - correlation_with(&eig, &psi, *t).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn correlation_stays_a_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = random_model(3, &mut rng);
    let eig = hermitian_eigendecompose(&p.hamiltonian()).unwrap();
    for _ in 0..1000 {
        let psi = random_up_state(3, &mut rng);
        let t = rng.random_range(0.0..50.0);
        let v = correlation_with(&eig, &psi, t).unwrap();
        assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{v}");
    }
}

#[test]
fn spin_down_first_qubit_is_rejected() {
    let p = two_level_model();
    for label in ["du", "dd"] {
        let cfg = ProtocolConfig::exact(10.0, 16, StateVector::from_spins(label).unwrap());
        assert!(matches!(run_protocol(&p, &cfg), Err(Error::InvalidConfig(_))));
    }
    let mixed = InitialState::Superposition(vec![
        Component { spins: "uu".into(), re: 1.0, im: 0.0 },
        Component { spins: "du".into(), re: 0.1, im: 0.0 },
    ]);
    let cfg = ProtocolConfig::exact(10.0, 16, mixed.build().unwrap());
    assert!(run_protocol(&p, &cfg).is_err());
}

#[test]
fn bad_grids_are_rejected() {
    let p = two_level_model();
    let psi = StateVector::from_spins("ud").unwrap();
    for n in [8, 24] {
        assert!(run_protocol(&p, &ProtocolConfig::exact(10.0, n, psi.clone())).is_err());
    }
    assert!(run_protocol(&p, &ProtocolConfig::exact(0.0, 16, psi.clone())).is_err());
    assert!(dft_spectrum(&[0.0, 1.0, 3.0, 4.0], &[1.0; 4], 0.05).is_err());
}

#[test]
fn superposition_states_are_normalized() {
    let s = InitialState::Superposition(vec![
        Component { spins: "uu".into(), re: 1.0, im: 0.0 },
        Component { spins: "ud".into(), re: 0.0, im: 1.0 },
    ])
    .build::<f64>()
    .unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-15);
    let amp = s.amplitudes()[1];
    assert!((amp - Complex::new(0.0, 0.5f64.sqrt())).norm() < 1e-15);
}

#[test]
fn constant_series_has_only_a_dc_line() {
    let t: Vec<f64> = (0..32).map(|k| k as f64 * 0.1).collect();
    let (spec, peaks) = dft_spectrum(&t, &[0.7; 32], DEFAULT_PEAK_THRESHOLD).unwrap();
    assert_eq!(peaks.len(), 1);
    assert_eq!(peaks[0].omega, 0.0);
    assert!((peaks[0].amplitude - 0.7).abs() < 1e-12);
    assert_even(&spec);
}

#[test]
fn single_qubit_line_sits_at_epsilon() {
    let eps: f64 = 2.5;
    let p = PairingModel::uncoupled(vec![eps]).unwrap();
    let cfg = ProtocolConfig::exact(40.0, 256, StateVector::from_spins("u").unwrap());
    let r = run_spectroscopy(&p, &cfg, DEFAULT_PEAK_THRESHOLD).unwrap();
    let bin = r.spectrum.resolution;
    let lines: Vec<f64> = r.peaks.iter().map(|p| p.omega).filter(|w| *w != 0.0).collect();
    assert_eq!(lines.len(), 2, "{:?}", r.peaks);
    assert!((lines[0] + eps).abs() <= bin && (lines[1] - eps).abs() <= bin);
    assert!(r.gaps.is_empty());
    assert_probability_sanity(&r.series);
    assert_even(&r.spectrum);
}

#[test]
fn sector_table_examples() {
    let t = sector_eigenvalues(&two_level_model()).unwrap();
    let one = t.sector(1).unwrap();
    assert_eq!(one.levels.len(), 2);
    assert!((one.levels[0].0 + 5f64.sqrt()).abs() < 1e-12);
    assert!((one.levels[1].0 - 5f64.sqrt()).abs() < 1e-12);
    assert!((t.sector(0).unwrap().levels[0].0 + 2.0).abs() < 1e-12);
    assert!((t.sector(2).unwrap().levels[0].0 - 2.0).abs() < 1e-12);

    let eps = [1.0, 2.5, 4.0, 0.5];
    let table = sector_eigenvalues(&PairingModel::uncoupled(eps.to_vec()).unwrap()).unwrap();
    let binom = [1, 4, 6, 4, 1];
    for s in &table.sectors {
        assert_eq!(s.dim(), binom[s.n]);
        let mut want: Vec<f64> = (0..16u32)
            .filter(|m| m.count_ones() as usize == s.n)
            .map(|m| (0..4).map(|q| if m >> q & 1 == 1 { eps[q] / 2.0 } else { -eps[q] / 2.0 }).sum())
            .collect();
        want.sort_by(f64::total_cmp);
        let got: Vec<f64> = s.levels.iter().flat_map(|&(e, k)| std::iter::repeat_n(e, k)).collect();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn gap_of_two_level_model() {
    let p = two_level_model();
    let cfg = ProtocolConfig::exact(50.0, 512, StateVector::from_spins("ud").unwrap());
    let r = run_spectroscopy(&p, &cfg, DEFAULT_PEAK_THRESHOLD).unwrap();
    let bin = r.spectrum.resolution;
    let g = r.gaps.iter().find(|g| g.n == 1).unwrap();
    let two_delta = g.two_delta.expect("both lines resolved");
    assert!((two_delta - 2.0 * 5f64.sqrt()).abs() <= bin, "{two_delta}");
    assert_probability_sanity(&r.series);
    assert_even(&r.spectrum);
}

#[test]
fn degenerate_sector_reports_zero_gap() {
    let p = PairingModel::uncoupled(vec![1.0, 1.0]).unwrap();
    let cfg = ProtocolConfig::exact(50.0, 256, StateVector::from_spins("ud").unwrap());
    let r = run_spectroscopy(&p, &cfg, DEFAULT_PEAK_THRESHOLD).unwrap();
    assert_eq!(r.gaps, vec![Gap { n: 1, two_delta: Some(0.0) }]);
}

#[test]
fn unresolved_lines_give_absent_gap() {
    let table = sector_eigenvalues(&two_level_model()).unwrap();
    let gaps = extract_gaps(&[Peak { omega: 0.0, amplitude: 1.0 }], &table, 0.1);
    assert_eq!(gaps, vec![Gap { n: 1, two_delta: None }]);
}

#[test]
fn every_peak_is_a_transition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        let p = random_model(n, &mut rng);
        let psi = random_up_state(n, &mut rng);
        let cfg = ProtocolConfig::exact(60.0, 1024, psi);
        let r = run_spectroscopy(&p, &cfg, DEFAULT_PEAK_THRESHOLD).unwrap();
        let lines: Vec<f64> = sector_eigenvalues(&p)
            .unwrap()
            .transitions()
            .iter()
            .map(|t| t.3.abs())
            .chain([0.0])
            .collect();
        for pk in &r.peaks {
            let near = lines.iter().any(|w| (pk.omega.abs() - w).abs() <= r.spectrum.resolution);
            assert!(near, "N={n}: peak {pk:?} matches no transition");
        }
        assert_even(&r.spectrum);
        assert_probability_sanity(&r.series);
    }
}

#[test]
fn evolution_conserves_pair_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = random_model(4, &mut rng);
    let u = exact_propagator(&p.hamiltonian(), 1.3).unwrap();
    for r in 0..16usize {
        for c in 0..16usize {
            if r.count_ones() != c.count_ones() {
                assert!(u.get(r, c).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn compiled_source_tracks_exact_source() {
    let p = PairingModel::<f64>::uncoupled(vec![2.0, 1.2]).unwrap();
    let h = HardwareModel::uniform(HardwareKind::IsingLongitudinal, 2, 5.0, 0.03, false, false).unwrap();
    let psi = StateVector::from_spins("ud").unwrap();
    let exact = run_protocol(&p, &ProtocolConfig::exact(10.0, 16, psi.clone())).unwrap();
    let cfg = ProtocolConfig {
        source: PropagatorSource::Compiled {
            hardware: h,
            opts: CompileOptions::default(),
        },
        ..ProtocolConfig::exact(10.0, 16, psi)
    };
    let compiled = run_protocol(&p, &cfg).unwrap();
    for (a, b) in exact.p_plus.iter().zip(&compiled.p_plus) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn shot_sampling_is_seeded() {
    let p = two_level_model();
    let mut cfg = ProtocolConfig::exact(10.0, 32, StateVector::from_spins("ud").unwrap());
    cfg.shots = Some(200);
    cfg.seed = 42;
    let a = run_protocol(&p, &cfg).unwrap();
    let b = run_protocol(&p, &cfg).unwrap();
    assert_eq!(a, b);
    assert_probability_sanity(&a);
    assert!(a.p_plus.iter().all(|v| ((v * 200.0).round() - v * 200.0).abs() < 1e-9));
    cfg.seed = 43;
    assert_ne!(run_protocol(&p, &cfg).unwrap(), a);
}
