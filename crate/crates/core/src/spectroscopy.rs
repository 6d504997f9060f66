//! Ancilla measurement protocol and spectrum/gap extraction.
//!
//! The register is `|+⟩_0 ⊗ |ψ⟩` with the ancilla as the most significant
//! factor. A CNOT from the ancilla onto qubit 1, the pairing evolution, and a
//! second CNOT are followed by a measurement of the ancilla in the `|±⟩`
//! basis. The resulting `P⁺(t)` oscillates at the transition frequencies
//! `E_{n,j} − E_{n−1,i}` between pair-number sectors.

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{compile_pairing, CompileOptions};
use crate::error::{Error, Result};
use crate::fourier;
use crate::models::{HardwareModel, PairingModel};
use crate::pauli::{hermitian_eigendecompose, DenseOperator, HermitianEigen, Pauli, PauliString, StateVector};
use crate::scalar::{cplx, Real};
use crate::schedule::GateSchedule;
use crate::simulator::execute;

/// Largest register (chain plus ancilla) the protocol will build.
pub const MAX_REGISTER: usize = 13;

/// One term of a superposition initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    /// Spin label such as `"udu"`.
    pub spins: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Basis(String),
    /// Normalized after summation.
    Superposition(Vec<Component>),
}

impl InitialState {
    pub fn build<T: Real>(&self) -> Result<StateVector<T>> {
        match self {
            InitialState::Basis(s) => StateVector::from_spins(s),
            InitialState::Superposition(terms) => {
                let first = terms
                    .first()
                    .ok_or_else(|| Error::InvalidConfig("empty superposition".into()))?;
                let dim = StateVector::<T>::from_spins(&first.spins)?.dim();
                let mut acc = nalgebra::DVector::<num_complex::Complex<T>>::zeros(dim);
                for c in terms {
                    let b = StateVector::<T>::from_spins(&c.spins)?;
                    if b.dim() != acc.len() {
                        return Err(Error::InvalidConfig("superposition terms differ in length".into()));
                    }
                    acc += b.into_vector() * cplx(T::lit(c.re), T::lit(c.im));
                }
                StateVector::from_vector(acc)?.normalized()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PropagatorSource<T: Real> {
    /// `e^{−itH_p}` from exact diagonalization.
    Exact,
    /// Compiled schedule executed on the given chain.
    Compiled { hardware: HardwareModel<T>, opts: CompileOptions },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig<T: Real> {
    pub t_max: T,
    /// Grid `t_k = k·t_max/n_samples`, `k = 0..n_samples`; power of two, at least 16.
    pub n_samples: usize,
    pub initial_state: StateVector<T>,
    pub source: PropagatorSource<T>,
    /// Finite-shot estimate of `P⁺` instead of exact probabilities.
    pub shots: Option<u64>,
    pub seed: u64,
}

impl<T: Real> ProtocolConfig<T> {
    pub fn exact(t_max: T, n_samples: usize, initial_state: StateVector<T>) -> Self {
        Self {
            t_max,
            n_samples,
            initial_state,
            source: PropagatorSource::Exact,
            shots: None,
            seed: 0,
        }
    }

    pub fn times(&self) -> Vec<T> {
        let dt = self.t_max / T::count(self.n_samples);
        (0..self.n_samples).map(|k| dt * T::count(k)).collect()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.n_samples < 16 || !self.n_samples.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "n_samples must be a power of two ≥ 16, got {}",
                self.n_samples
            )));
        }
        if !self.t_max.is_finite() || self.t_max <= T::zero() {
            return Err(Error::InvalidConfig(format!("t_max must be positive, got {}", self.t_max)));
        }
        if n + 1 > MAX_REGISTER {
            return Err(Error::TooManyQubits(n + 1, MAX_REGISTER));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidConfig("shots must be positive".into()));
        }
        check_initial_state(&self.initial_state, n)
    }
}

/// The protocol assumes `σ^z_1|ψ⟩ = |ψ⟩`: no weight on qubit 1 spin down.
pub fn check_initial_state<T: Real>(psi: &StateVector<T>, n: usize) -> Result<()> {
    if psi.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: psi.dim(),
        });
    }
    if (psi.norm() - T::one()).abs() > T::tolerance(1e-10) {
        return Err(Error::InvalidConfig("initial state is not normalized".into()));
    }
    let down = 1usize << (n - 1);
    let leak = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & down != 0)
        .fold(T::zero(), |a, (_, z)| a + z.norm_sqr());
    if leak > T::tolerance(1e-12) {
        return Err(Error::InvalidConfig(format!(
            "initial state has weight {leak:e} on qubit 1 spin down; qubit 1 must be spin up"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSeries<T: Real> {
    pub t: Vec<T>,
    pub p_plus: Vec<T>,
    pub p_minus: Vec<T>,
}

fn sigma_x1<T: Real>(n: usize) -> DenseOperator<T> {
    PauliString::single(n, 1, Pauli::X, T::one())
        .expect("qubit 1 exists")
        .to_matrix()
}

/// Swaps amplitude pairs differing in `target` where `control` is set.
fn cnot_in_place<T: Real>(v: &mut nalgebra::DVector<num_complex::Complex<T>>, control: usize, target: usize) {
    for i in 0..v.len() {
        if i & control != 0 && i & target == 0 {
            v.swap_rows(i, i | target);
        }
    }
}

/// `P⁺` after the ancilla circuit with an exact evolution `u` on the chain.
fn exact_circuit<T: Real>(u: &DenseOperator<T>, psi: &StateVector<T>) -> Result<T> {
    let n = psi.n_qubits();
    let mut reg = StateVector::plus(1).kron(psi).into_vector();
    let (anc, q1) = (1usize << n, 1usize << (n - 1));
    cnot_in_place(&mut reg, anc, q1);
    let d = 1usize << n;
    for block in 0..2 {
        let part = reg.rows(block * d, d).clone_owned();
        reg.rows_mut(block * d, d).copy_from(&(u.matrix() * part));
    }
    cnot_in_place(&mut reg, anc, q1);
    ancilla_plus_probability(&reg, d)
}

/// `‖(⟨+|⊗I)Ψ‖²`.
fn ancilla_plus_probability<T: Real>(reg: &nalgebra::DVector<num_complex::Complex<T>>, d: usize) -> Result<T> {
    if reg.len() != 2 * d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            found: reg.len(),
        });
    }
    let half = T::lit(0.5);
    Ok((0..d).fold(T::zero(), |a, i| a + (reg[i] + reg[i + d]).norm_sqr() * half))
}

fn compiled_circuit<T: Real>(
    p: &PairingModel<T>,
    h: &HardwareModel<T>,
    opts: CompileOptions,
    t: T,
    psi: &StateVector<T>,
) -> Result<T> {
    let mut s = GateSchedule::with_ancilla(h);
    s.cnot(0, 1)?;
    s.append_chain(&compile_pairing(p, h, opts, t)?)?;
    s.cnot(0, 1)?;
    let reg = StateVector::plus(1).kron(psi);
    let out = execute(&s, h, Some(&reg))?.into_state();
    ancilla_plus_probability(out.amplitudes(), psi.dim())
}

/// Runs the measurement protocol at every grid time. Exact probabilities
/// unless `shots` is set, in which case each point is a seeded binomial
/// estimate.
pub fn run_protocol<T: Real>(p: &PairingModel<T>, cfg: &ProtocolConfig<T>) -> Result<ProtocolSeries<T>> {
    let n = p.n_qubits();
    cfg.validate(n)?;
    let t = cfg.times();
    let psi = &cfg.initial_state;
    let mut p_plus = match &cfg.source {
        PropagatorSource::Exact => {
            let eig = hermitian_eigendecompose(&p.hamiltonian())?;
            t.par_iter()
                .map(|&tk| exact_circuit(&eig.propagator(tk), psi))
                .collect::<Result<Vec<_>>>()?
        }
        PropagatorSource::Compiled { hardware, opts } => {
            if hardware.n_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: hardware.n_qubits(),
                });
            }
            t.par_iter()
                .map(|&tk| compiled_circuit(p, hardware, *opts, tk, psi))
                .collect::<Result<Vec<_>>>()?
        }
    };
    for v in &mut p_plus {
        *v = v.max(T::zero()).min(T::one());
    }
    if let Some(shots) = cfg.shots {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for v in &mut p_plus {
            let dist = Bernoulli::new(v.as_f64()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let hits = (0..shots).filter(|_| dist.sample(&mut rng)).count();
            *v = T::count(hits) / T::lit(shots as f64);
        }
    }
    let p_minus = p_plus.iter().map(|&v| T::one() - v).collect();
    Ok(ProtocolSeries { t, p_plus, p_minus })
}

/// `1/2 + 1/4(⟨ψ|σ^x_1(t)σ^x_1|ψ⟩ + c.c.)` with `σ^x_1(t) = U†σ^x_1U`.
pub fn correlation_formula<T: Real>(p: &PairingModel<T>, psi: &StateVector<T>, t: T) -> Result<T> {
    let eig = hermitian_eigendecompose(&p.hamiltonian())?;
    correlation_with(&eig, psi, t)
}

/// [`correlation_formula`] reusing a diagonalized Hamiltonian.
pub fn correlation_with<T: Real>(eig: &HermitianEigen<T>, psi: &StateVector<T>, t: T) -> Result<T> {
    let n = psi.n_qubits();
    let u = eig.propagator(t);
    let x = sigma_x1::<T>(n);
    let xt = &(&u.adjoint() * &x) * &u;
    let c = psi.expectation(&(&xt * &x))?;
    Ok(T::lit(0.5) + T::lit(0.5) * c.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Angular frequency (signed).
    pub omega: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Angular frequency per bin in FFT order; bins above `n/2` are negative.
    pub omega: Vec<f64>,
    /// `|X_k| / n`.
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    /// Bin width `2π/t_max`.
    pub resolution: f64,
}

impl Spectrum {
    /// Indices ordered by increasing frequency.
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.omega.len()).collect();
        idx.sort_by(|&a, &b| self.omega[a].total_cmp(&self.omega[b]));
        idx
    }
}

pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.05;

/// Rectangular-window DFT of a uniformly sampled series covering
/// `[0, n·dt)`, with peaks at local amplitude maxima above `threshold` times
/// the largest nonzero-frequency amplitude. Maxima in neighboring bins merge
/// into the larger one. The zero-frequency bin is a peak whenever it clears
/// the same bar.
pub fn dft_spectrum<T: Real>(t: &[T], series: &[T], threshold: f64) -> Result<(Spectrum, Vec<Peak>)> {
    if t.len() != series.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            found: series.len(),
        });
    }
    let x: Vec<f64> = t.iter().map(|v| v.as_f64()).collect();
    let dt = fourier::uniform_step(&x)?;
    let n = x.len();
    if !n.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("series length {n} is not a power of two")));
    }
    let y: Vec<f64> = series.iter().map(|v| v.as_f64()).collect();
    let raw = fourier::dft(&y);
    let spectrum = Spectrum {
        omega: (0..n).map(|k| fourier::bin_frequency(k, n, dt)).collect(),
        amplitude: raw.iter().map(|c| c.norm() / n as f64).collect(),
        phase: raw.iter().map(|c| c.arg()).collect(),
        resolution: fourier::bin_frequency(1, n, dt),
    };
    let amp = &spectrum.amplitude;
    let top = amp.iter().skip(1).fold(0.0f64, |a, &b| a.max(b));
    let floor = 1e-9 * amp.iter().fold(0.0f64, |a, &b| a.max(b));
    let bar = (threshold * top).max(floor);
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| {
            let (l, r) = (amp[(k + n - 1) % n], amp[(k + 1) % n]);
            amp[k] > bar && amp[k] >= l && amp[k] >= r
        })
        .collect();
    // Merge maxima that sit in adjacent bins (flat tops between two bins).
    peaks.sort_by(|&a, &b| amp[b].total_cmp(&amp[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for k in peaks {
        let near = kept.iter().any(|&j| {
            let d = k.abs_diff(j);
            d.min(n - d) <= 1
        });
        if !near {
            kept.push(k);
        }
    }
    let mut out: Vec<Peak> = kept
        .into_iter()
        .map(|k| Peak {
            omega: spectrum.omega[k],
            amplitude: amp[k],
        })
        .collect();
    out.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    Ok((spectrum, out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector<T: Real> {
    /// Number of spin-up qubits (pairs).
    pub n: usize,
    /// Distinct eigenvalues ascending, each with its multiplicity.
    pub levels: Vec<(T, usize)>,
}

impl<T: Real> Sector<T> {
    pub fn dim(&self) -> usize {
        self.levels.iter().map(|l| l.1).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSectorTable<T: Real> {
    pub sectors: Vec<Sector<T>>,
}

impl<T: Real> EigenSectorTable<T> {
    pub fn sector(&self, n: usize) -> Option<&Sector<T>> {
        self.sectors.iter().find(|s| s.n == n)
    }

    /// Every `E_{n,j} − E_{n−1,i}` as `(n, i, j, ω)`.
    pub fn transitions(&self) -> Vec<(usize, usize, usize, T)> {
        let mut out = Vec::new();
        for s in &self.sectors {
            let Some(below) = s.n.checked_sub(1).and_then(|m| self.sector(m)) else {
                continue;
            };
            for (i, lo) in below.levels.iter().enumerate() {
                for (j, hi) in s.levels.iter().enumerate() {
                    out.push((s.n, i, j, hi.0 - lo.0));
                }
            }
        }
        out
    }
}

/// Spectrum of `H_p` within each fixed pair-number block.
pub fn sector_eigenvalues<T: Real>(p: &PairingModel<T>) -> Result<EigenSectorTable<T>> {
    let n = p.n_qubits();
    if n > MAX_REGISTER {
        return Err(Error::TooManyQubits(n, MAX_REGISTER));
    }
    let h = p.hamiltonian();
    let d = 1usize << n;
    let mut sectors = Vec::with_capacity(n + 1);
    for ups in 0..=n {
        // Spin up is bit value 0.
        let idx: Vec<usize> = (0..d).filter(|&i| n - i.count_ones() as usize == ups).collect();
        let block = nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |r, c| h.get(idx[r], idx[c]));
        // Sector blocks are not qubit-sized, so they go straight to nalgebra.
        let mut values: Vec<T> = nalgebra::SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let scale = values.iter().fold(T::one(), |a, v| a.max(v.abs()));
        let tol = T::tolerance(1e-9) * scale;
        let mut levels: Vec<(T, usize)> = Vec::new();
        for v in values {
            match levels.last_mut() {
                Some(last) if (v - last.0).abs() <= tol => last.1 += 1,
                _ => levels.push((v, 1)),
            }
        }
        sectors.push(Sector { n: ups, levels });
    }
    Ok(EigenSectorTable { sectors })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub n: usize,
    /// `2Δ_n` from the measured peaks; `None` when the lines are not resolved.
    pub two_delta: Option<f64>,
}

/// `2Δ_n = ω⁺_{n,i,1} − ω⁺_{n,i,0}` for every sector with at least two
/// levels. The table only labels peaks: both lines must be observed within
/// `tolerance` of the predicted `E_{n,j} − E_{n−1,i}` for a common reference
/// level `i`, and the gap is the difference of the observed frequencies.
/// A degenerate lowest level makes both lines coincide and gives 0.
pub fn extract_gaps<T: Real>(peaks: &[Peak], table: &EigenSectorTable<T>, tolerance: f64) -> Vec<Gap> {
    let find = |w: f64| {
        peaks
            .iter()
            .filter(|p| (p.omega - w).abs() <= tolerance)
            .min_by(|a, b| (a.omega - w).abs().total_cmp(&(b.omega - w).abs()))
    };
    let mut gaps = Vec::new();
    for s in &table.sectors {
        if s.dim() < 2 {
            continue;
        }
        let Some(below) = s.n.checked_sub(1).and_then(|m| table.sector(m)) else {
            continue;
        };
        let e0 = s.levels[0].0.as_f64();
        let degenerate = s.levels[0].1 > 1;
        let mut two_delta = None;
        for lo in &below.levels {
            let r = lo.0.as_f64();
            let Some(p0) = find(e0 - r) else { continue };
            if degenerate {
                two_delta = Some(0.0);
                break;
            }
            if let Some(p1) = find(s.levels[1].0.as_f64() - r) {
                two_delta = Some(p1.omega - p0.omega);
                break;
            }
        }
        gaps.push(Gap { n: s.n, two_delta });
    }
    gaps
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyResult<T: Real> {
    pub series: ProtocolSeries<T>,
    pub spectrum: Spectrum,
    pub peaks: Vec<Peak>,
    pub gaps: Vec<Gap>,
}

/// Protocol, spectrum, and gap labeling in one pass; peaks are matched
/// to the eigen table within one frequency bin.
pub fn run_spectroscopy<T: Real>(
    p: &PairingModel<T>,
    cfg: &ProtocolConfig<T>,
    threshold: f64,
) -> Result<SpectroscopyResult<T>> {
    let series = run_protocol(p, cfg)?;
    let (spectrum, peaks) = dft_spectrum(&series.t, &series.p_plus, threshold)?;
    let table = sector_eigenvalues(p)?;
    let gaps = extract_gaps(&peaks, &table, spectrum.resolution);
    Ok(SpectroscopyResult {
        series,
        spectrum,
        peaks,
        gaps,
    })
}
