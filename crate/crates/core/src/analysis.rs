//! Fidelity metrics, Trotter and fluctuation studies, and gate-count sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{compile_pairing, synth_global_z, CompileOptions};
use crate::error::{Error, Result};
use crate::fourier;
use crate::models::{hardware_hamiltonian, total_z, HardwareKind, HardwareModel, PairingModel};
use crate::pauli::{hermitian_eigendecompose, DenseOperator, Pauli, PauliString, PauliSum, StateVector};
use crate::scalar::{cabs, carg, cis, cplx, Real};
use crate::schedule::GateCount;
use crate::simulator::{execute, exact_propagator, schedule_unitary};

/// `|Tr(u†v)| / 2^N`.
pub fn operator_fidelity<T: Real>(u: &DenseOperator<T>, v: &DenseOperator<T>) -> Result<T> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let tr = u.matrix().dotc(v.matrix());
    Ok(cabs(tr) / T::count(u.dim()))
}

/// `|⟨ψ|φ⟩|²`.
pub fn state_fidelity<T: Real>(psi: &StateVector<T>, phi: &StateVector<T>) -> Result<T> {
    Ok(psi.inner(phi)?.norm_sqr())
}

/// `min_α ‖u − e^{iα}v‖_F / √d`, computed directly rather than from the
/// fidelity so that small distances keep full precision.
pub fn phase_aligned_distance<T: Real>(u: &DenseOperator<T>, v: &DenseOperator<T>) -> Result<T> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let tr = v.matrix().dotc(u.matrix());
    let ph = if tr.norm_sqr() == T::zero() { cis(T::zero()) } else { cis(carg(tr)) };
    let mut acc = T::zero();
    for (a, b) in u.matrix().iter().zip(v.matrix().iter()) {
        acc += (*a - *b * ph).norm_sqr();
    }
    Ok((acc / T::count(u.dim())).sqrt())
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<(T, T)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least two paired points, got {}", x.len())));
    }
    let n = T::count(x.len());
    let mx = x.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = y.iter().fold(T::zero(), |a, &b| a + b) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == T::zero() {
        return Err(Error::DegenerateFit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `log y` against `log x`; every point must be positive.
pub fn loglog_slope<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.iter().chain(y).any(|&v| v <= T::zero() || !v.is_finite()) {
        return Err(Error::DegenerateFit("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Operator,
    /// Overlap of the evolved `|+⟩^{⊗N}`.
    State,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "operator" => Ok(Metric::Operator),
            "state" => Ok(Metric::State),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve<T: Real> {
    pub t: Vec<T>,
    pub fidelity: Vec<T>,
    pub metric: Metric,
    pub smoothed: Option<Vec<T>>,
}

/// Fidelity of the compiled schedule for `e^{−itH_p}` against the exact propagator.
pub fn pairing_fidelity<T: Real>(
    p: &PairingModel<T>,
    h: &HardwareModel<T>,
    opts: CompileOptions,
    t: T,
    metric: Metric,
) -> Result<T> {
    let s = compile_pairing(p, h, opts, t)?;
    let exact = exact_propagator(&p.hamiltonian(), t)?;
    match metric {
        Metric::Operator => operator_fidelity(&execute(&s, h, None)?.into_unitary(), &exact),
        Metric::State => {
            let psi = StateVector::plus(p.n_qubits());
            let got = execute(&s, h, Some(&psi))?.into_state();
            state_fidelity(&exact.apply(&psi)?, &got)
        }
    }
}

/// Trailing moving average over `window` samples (shorter at the start).
pub fn moving_average<T: Real>(values: &[T], window: usize) -> Vec<T> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = T::zero();
    for (i, &v) in values.iter().enumerate() {
        acc += v;
        if i >= w {
            acc -= values[i - w];
        }
        out.push(acc / T::count((i + 1).min(w)));
    }
    out
}

/// Compiles, executes and scores each grid point in parallel; output order
/// follows `t_grid`. With `smooth`, the moving-average window spans one
/// period `2π/ω̄` of the mean hardware frequency.
pub fn fidelity_sweep<T: Real>(
    p: &PairingModel<T>,
    h: &HardwareModel<T>,
    opts: CompileOptions,
    t_grid: &[T],
    metric: Metric,
    smooth: bool,
) -> Result<FidelityCurve<T>> {
    let fidelity = t_grid
        .par_iter()
        .map(|&t| pairing_fidelity(p, h, opts, t, metric))
        .collect::<Result<Vec<_>>>()?;
    let smoothed = if smooth && t_grid.len() > 1 {
        let mean_w = h.omega().iter().fold(T::zero(), |a, &w| a + w.abs()) / T::count(h.n_qubits());
        let dt = (t_grid[t_grid.len() - 1] - t_grid[0]) / T::count(t_grid.len() - 1);
        let window = if mean_w > T::zero() && dt > T::zero() {
            (T::two_pi() / mean_w / dt).round().as_f64().max(1.0) as usize
        } else {
            1
        };
        Some(moving_average(&fidelity, window))
    } else {
        None
    };
    Ok(FidelityCurve {
        t: t_grid.to_vec(),
        fidelity,
        metric,
        smoothed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterFit<T: Real> {
    pub m: Vec<usize>,
    pub infidelity: Vec<T>,
    pub slope: T,
}

/// Slope of `log(1 − F)` against `log M` at fixed `t`.
pub fn trotter_order_fit<T: Real>(
    p: &PairingModel<T>,
    h: &HardwareModel<T>,
    base: CompileOptions,
    t: T,
    m_list: &[usize],
) -> Result<TrotterFit<T>> {
    if m_list.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 values of M, got {}", m_list.len())));
    }
    let infidelity = m_list
        .par_iter()
        .map(|&m| {
            let mut o = base;
            o.trotter.m = m;
            pairing_fidelity(p, h, o, t, Metric::Operator).map(|f| T::one() - f)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(i) = infidelity.iter().position(|&x| x < T::lit(1e-12)) {
        return Err(Error::DegenerateFit(format!(
            "infidelity {:e} at M = {} is indistinguishable from zero",
            infidelity[i], m_list[i]
        )));
    }
    let ms: Vec<T> = m_list.iter().map(|&m| T::count(m)).collect();
    let slope = loglog_slope(&ms, &infidelity)?;
    Ok(TrotterFit {
        m: m_list.to_vec(),
        infidelity,
        slope,
    })
}

/// Principal logarithm `D` of a unitary `w = e^D` whose eigenphases lie in
/// `(−π/2, π/2)`. Eigenvectors come from the Hermitian part `(w − w†)/2i`,
/// whose spectrum `sin θ` is injective on that range.
pub fn unitary_log<T: Real>(w: &DenseOperator<T>) -> Result<DenseOperator<T>> {
    let i2 = cplx(T::zero(), T::lit(2.0));
    let s = DenseOperator::from_matrix((w.matrix() - w.matrix().adjoint()) / i2)?;
    let eig = hermitian_eigendecompose(&s)?;
    if eig.values.iter().any(|v| v.abs() >= T::one()) {
        return Err(Error::DegenerateFit("eigenphase outside (−π/2, π/2)".into()));
    }
    let v = eig.vectors.matrix();
    let mut scaled = v.clone();
    for j in 0..v.ncols() {
        let col = v.column(j);
        let lam = col.dotc(&(w.matrix() * col));
        let phase = cplx(T::zero(), carg(lam));
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    DenseOperator::from_matrix(scaled * v.adjoint())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationPoint<T: Real> {
    pub tau: T,
    /// Largest entry of the measured splitting defect.
    pub defect: T,
    /// Largest entry of the closed-form first-order correction.
    pub predicted: T,
    /// Largest entry of their difference.
    pub residual: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport<T: Real> {
    pub points: Vec<FluctuationPoint<T>>,
    pub max_residual: T,
    /// Largest `residual / predicted` over points with a nonzero prediction.
    pub max_ratio: T,
}

fn bond_sum<T: Real>(n: usize, a: Pauli, b: Pauli) -> Result<DenseOperator<T>> {
    let mut s = PauliSum::new(n);
    for l in 1..n {
        s.push(PauliString::pair(n, l, a, l + 1, b, T::one())?)?;
    }
    Ok(s.to_matrix())
}

/// Compares the defect `D = log(e^{iτH} e^{−iτH_0} e^{−iτJΣxx})` of the
/// transverse-Ising field/coupling splitting with its first-order closed form
/// `−iτJ(xx−yy)/2 + iJ sin(2ωτ)/(4ω)(xx−yy) + iJ(cos 2ωτ − 1)/(4ω)(xy+yx)`.
pub fn fluctuation_expansion_check<T: Real>(omega: &[T], j: &[T], taus: &[T]) -> Result<FluctuationReport<T>> {
    let n = omega.len();
    if n < 2 || j.len() != n - 1 {
        return Err(Error::InvalidModel(format!(
            "need N ≥ 2 fields and N − 1 couplings, got {} and {}",
            n,
            j.len()
        )));
    }
    if omega.iter().any(|&w| w != omega[0]) || j.iter().any(|&x| x != j[0]) {
        return Err(Error::InvalidModel("fluctuation expansion needs uniform ω and J".into()));
    }
    let (w, jj) = (omega[0], j[0]);
    let h = HardwareModel::uniform(HardwareKind::IsingTransverse, n, w, jj, false, false)?;
    let h_full = hardware_hamiltonian(&h, None)?;
    let h0 = total_z::<T>(n).scale_real(w * T::lit(0.5));
    let xx = bond_sum::<T>(n, Pauli::X, Pauli::X)?;
    let yy = bond_sum::<T>(n, Pauli::Y, Pauli::Y)?;
    let xy = &bond_sum::<T>(n, Pauli::X, Pauli::Y)? + &bond_sum::<T>(n, Pauli::Y, Pauli::X)?;
    let diff = &xx - &yy;
    let e_full = hermitian_eigendecompose(&h_full)?;
    let e0 = hermitian_eigendecompose(&h0)?;
    let ex = hermitian_eigendecompose(&xx.scale_real(jj))?;
    let points = taus
        .iter()
        .map(|&tau| {
            let w_split = &e_full.propagator(-tau) * &(&e0.propagator(tau) * &ex.propagator(tau));
            let d = unitary_log(&w_split)?;
            let q = jj / (T::lit(4.0) * w);
            let two = T::lit(2.0) * w * tau;
            let pred = &(&diff.scale(cplx(T::zero(), -tau * jj * T::lit(0.5)))
                + &diff.scale(cplx(T::zero(), q * two.sin())))
                + &xy.scale(cplx(T::zero(), q * (two.cos() - T::one())));
            Ok(FluctuationPoint {
                tau,
                defect: d.max_abs(),
                predicted: pred.max_abs(),
                residual: d.max_diff(&pred),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = points.iter().fold(T::zero(), |a, p| a.max(p.residual));
    let max_ratio = points
        .iter()
        .filter(|p| p.predicted > T::zero())
        .fold(T::zero(), |a, p| a.max(p.residual / p.predicted));
    Ok(FluctuationReport {
        points,
        max_residual,
        max_ratio,
    })
}

/// Raw infidelity curves behind the fluctuation study on a uniform
/// transverse-Ising chain: the direct splitting `e^{−iτH_0}e^{−iτJΣxx}`
/// against `e^{−iτH}`, and the even-qubit refocusing circuit for
/// `e^{−iτH_0}` against its target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationCurves<T: Real> {
    pub tau: Vec<T>,
    pub splitting: Vec<T>,
    pub refocusing: Vec<T>,
}

pub fn fluctuation_curves<T: Real>(n: usize, omega: T, j: T, taus: &[T]) -> Result<FluctuationCurves<T>> {
    let h = HardwareModel::uniform(HardwareKind::IsingTransverse, n, omega, j, false, false)?;
    let e_full = hermitian_eigendecompose(&hardware_hamiltonian(&h, None)?)?;
    let h0 = total_z::<T>(n).scale_real(omega * T::lit(0.5));
    let e0 = hermitian_eigendecompose(&h0)?;
    let ex = hermitian_eigendecompose(&bond_sum::<T>(n, Pauli::X, Pauli::X)?.scale_real(j))?;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let split = &e0.propagator(tau) * &ex.propagator(tau);
            let a = T::one() - operator_fidelity(&split, &e_full.propagator(tau))?;
            let circuit = schedule_unitary(&synth_global_z(&h, tau)?)?;
            let b = T::one() - operator_fidelity(&circuit, &e0.propagator(tau))?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FluctuationCurves {
        tau: taus.to_vec(),
        splitting: rows.iter().map(|r| r.0).collect(),
        refocusing: rows.iter().map(|r| r.1).collect(),
    })
}

/// Dominant nonzero angular frequency of a uniformly sampled curve after
/// removing a cubic trend, with the bin width `2π/(n·dt)`.
pub fn fluctuation_frequency<T: Real>(tau: &[T], values: &[T]) -> Result<(f64, f64)> {
    let x: Vec<f64> = tau.iter().map(|v| v.as_f64()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let dt = fourier::uniform_step(&x)?;
    let flat = fourier::detrend(&x, &y, 3)?;
    fourier::dominant_frequency(&flat, dt)
}

/// Parameters shared by every chain size in a complexity sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate<T: Real> {
    pub kind: HardwareKind,
    pub omega: T,
    pub j: T,
    pub freq_tunable: bool,
    pub couplings_switchable: bool,
    pub epsilon: T,
    pub v: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySweep {
    pub kind: HardwareKind,
    pub n_values: Vec<usize>,
    pub counts: Vec<GateCount>,
    /// Log-log slope of single-qubit gate count against `N`.
    pub fitted_exponent: f64,
}

/// Compiles the full pairing evolution at each `N` (no simulation) and fits
/// the growth of the single-qubit gate count.
pub fn complexity_sweep<T: Real>(
    template: &SweepTemplate<T>,
    n_list: &[usize],
    opts: CompileOptions,
) -> Result<ComplexitySweep> {
    let counts = n_list
        .par_iter()
        .map(|&n| {
            let h = HardwareModel::uniform(
                template.kind,
                n,
                template.omega,
                template.j,
                template.freq_tunable,
                template.couplings_switchable,
            )?;
            let p = PairingModel::uniform(n, template.epsilon, template.v)?;
            Ok(compile_pairing(&p, &h, opts, T::one())?.count_gates())
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let gs: Vec<f64> = counts.iter().map(|c| c.single_qubit_gates as f64).collect();
    Ok(ComplexitySweep {
        kind: template.kind,
        n_values: n_list.to_vec(),
        counts,
        fitted_exponent: loglog_slope(&ns, &gs)?,
    })
}
