use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use pairsim::analysis::{complexity_sweep, fidelity_sweep, loglog_slope, trotter_order_fit, SweepTemplate};
use pairsim::compiler::Compiler;
use pairsim::identities::{identity_checks, Outcome};
use pairsim::simulator::execute;
use pairsim::spectroscopy::{run_spectroscopy, sector_eigenvalues};
use pairsim::{Config, Error, GateSchedule, HardwareKind, Metric, StateVector};

use crate::output::{csv_row, num, OutDir};
use crate::CliError;

/// Command-line overrides applied on top of the config document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub backend: Option<HardwareKind>,
    pub m: Option<usize>,
    pub g: Option<usize>,
    pub metric: Option<Metric>,
}

pub fn load_config(path: &Path, ov: &Overrides) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Core(Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))))?;
    let mut c = Config::from_json(&text)?;
    if let Some(k) = ov.backend {
        c.hardware.kind = k;
    }
    if let Some(m) = ov.m {
        c.trotter.m = m;
    }
    if let Some(g) = ov.g {
        c.trotter.g = g;
    }
    if let Some(metric) = ov.metric {
        c.run.metric = Some(metric);
    }
    c.validate()?;
    Ok(c)
}

pub fn compile(c: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let h = c.hardware_model()?;
    let p = c.pairing_model()?;
    let target = c.synthesis_target()?;
    let s = Compiler::new(&h, c.compile_options()).compile(target, Some(&p))?;
    out.write("schedule.txt", s.dump().as_bytes())?;
    let counts = s.count_gates();
    out.write_json(
        "gate_count.json",
        &json!({
            "target": format!("{target:?}"),
            "backend": h.kind.as_str(),
            "instructions": s.len(),
            "single_qubit_gates": counts.single_qubit_gates,
            "free_evolutions": counts.free_evolutions,
            "cnots": counts.cnots,
        }),
    )?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum DumpFormat {
    Text,
    Binary,
}

pub struct SimulateArgs<'a> {
    pub schedule: &'a Path,
    /// Spin label or `plus`; `None` accumulates the unitary.
    pub initial: Option<&'a str>,
    pub format: DumpFormat,
}

pub fn simulate(c: &Config, a: &SimulateArgs, out: &mut OutDir) -> Result<(), CliError> {
    let h = c.hardware_model()?;
    let text = std::fs::read_to_string(a.schedule).map_err(|e| CliError::io(a.schedule, e))?;
    let s = GateSchedule::parse(&text, &h)?;
    let width = s.register_width();
    let psi = match a.initial {
        None => None,
        Some("plus") => Some(StateVector::plus(width)),
        Some(label) => Some(StateVector::from_spins(label)?),
    };
    if let Some(p) = &psi {
        if p.n_qubits() != width {
            return Err(Error::DimensionMismatch { expected: width, found: p.n_qubits() }.into());
        }
    }
    let r = execute(&s, &h, psi.as_ref())?;
    let (stem, entries): (&str, Vec<(usize, usize, f64, f64)>) = match (r.state, r.unitary) {
        (Some(st), _) => (
            "state",
            st.amplitudes().iter().enumerate().map(|(i, z)| (i, 0, z.re, z.im)).collect(),
        ),
        (None, Some(u)) => {
            let m = u.matrix();
            let d = u.dim();
            ("unitary", (0..d).flat_map(|r| (0..d).map(move |k| (r, k))).map(|(r, k)| (r, k, m[(r, k)].re, m[(r, k)].im)).collect())
        }
        (None, None) => unreachable!("execute returns a state or a unitary"),
    };
    match a.format {
        DumpFormat::Text => {
            let mut body = if stem == "state" {
                format!("# state n_qubits={width}\nindex,re,im\n")
            } else {
                format!("# unitary n_qubits={width}\nrow,col,re,im\n")
            };
            for (r, k, re, im) in entries {
                if stem == "state" {
                    body.push_str(&csv_row(&[r.to_string(), num(re), num(im)]));
                } else {
                    body.push_str(&csv_row(&[r.to_string(), k.to_string(), num(re), num(im)]));
                }
            }
            out.write(&format!("{stem}.txt"), body.as_bytes())?;
        }
        DumpFormat::Binary => {
            // Row-major interleaved (re, im) little-endian f64.
            let mut bytes = Vec::with_capacity(entries.len() * 16);
            for (_, _, re, im) in entries {
                bytes.extend_from_slice(&re.to_le_bytes());
                bytes.extend_from_slice(&im.to_le_bytes());
            }
            out.write(&format!("{stem}.bin"), &bytes)?;
        }
    }
    Ok(())
}

pub fn fidelity_sweep_cmd(c: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let grid = c
        .run
        .t_grid
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("run.t_grid is required".into()))?
        .values()?;
    let metric = c.run.metric.unwrap_or(Metric::Operator);
    let curve = fidelity_sweep(&c.pairing_model()?, &c.hardware_model()?, c.compile_options(), &grid, metric, c.run.smooth)?;
    let smoothed = curve.smoothed.clone().unwrap_or_else(|| curve.fidelity.clone());
    let mut body = String::from("t,fidelity,fidelity_smoothed\n");
    for ((t, f), s) in curve.t.iter().zip(&curve.fidelity).zip(&smoothed) {
        body.push_str(&csv_row(&[num(*t), num(*f), num(*s)]));
    }
    out.write("fidelity.csv", body.as_bytes())?;

    // Infidelity growth with t, when every point is resolvable.
    let pts: Vec<(f64, f64)> = curve
        .t
        .iter()
        .zip(&curve.fidelity)
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &f)| (t, 1.0 - f))
        .collect();
    let slope = if pts.len() >= 4 && pts.iter().all(|p| p.1 > 1e-12) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        loglog_slope(&x, &y).ok()
    } else {
        None
    };
    let min = curve.fidelity.iter().cloned().fold(f64::INFINITY, f64::min);
    out.write_json(
        "summary.json",
        &json!({
            "metric": metric,
            "points": curve.t.len(),
            "min_fidelity": min,
            "final_fidelity": curve.fidelity.last(),
            "infidelity_vs_t_slope": slope,
        }),
    )?;
    Ok(())
}

pub const DEFAULT_M_LIST: [usize; 5] = [5, 10, 20, 40, 80];

pub fn trotter_fit_cmd(c: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let t = c.evolution_time()?;
    let m_list = c.run.m_list.clone().unwrap_or_else(|| DEFAULT_M_LIST.to_vec());
    let fit = trotter_order_fit(&c.pairing_model()?, &c.hardware_model()?, c.compile_options(), t, &m_list)?;
    let mut body = String::from("m,infidelity\n");
    for (m, e) in fit.m.iter().zip(&fit.infidelity) {
        body.push_str(&csv_row(&[m.to_string(), num(*e)]));
    }
    out.write("trotter.csv", body.as_bytes())?;
    out.write_json("summary.json", &json!({ "t": t, "m": fit.m, "slope": fit.slope }))?;
    Ok(())
}

pub const DEFAULT_N_LIST: [usize; 7] = [4, 5, 6, 7, 8, 9, 10];

pub fn complexity_sweep_cmd(c: &Config, out: &mut OutDir) -> Result<(), CliError> {
    let n_list = c.run.n_list.clone().unwrap_or_else(|| DEFAULT_N_LIST.to_vec());
    if n_list.iter().any(|&n| !(2..=10).contains(&n)) {
        return Err(Error::InvalidConfig("run.n_list entries must lie in 2..=10".into()).into());
    }
    let backends = c.run.backends.clone().unwrap_or_else(|| vec![c.hardware.kind]);
    // Per-site parameters of the configured chain and model seed every N.
    let h = c.hardware_model()?;
    let p = c.pairing_model()?;
    let mut body = String::from("n,backend,single_qubit_gates,free_evolutions\n");
    let mut fits = Vec::new();
    for kind in backends {
        let template = SweepTemplate {
            kind,
            omega: h.omega()[0],
            j: h.j().first().copied().unwrap_or(0.0),
            freq_tunable: h.freq_tunable,
            couplings_switchable: h.couplings_switchable,
            epsilon: p.epsilon()[0],
            v: if p.n_qubits() > 1 { p.coupling(1, 2) } else { 0.0 },
        };
        let sweep = complexity_sweep(&template, &n_list, c.compile_options())?;
        for (n, g) in sweep.n_values.iter().zip(&sweep.counts) {
            body.push_str(&csv_row(&[
                n.to_string(),
                kind.as_str().to_string(),
                g.single_qubit_gates.to_string(),
                g.free_evolutions.to_string(),
            ]));
        }
        fits.push(json!({ "backend": kind.as_str(), "fitted_exponent": sweep.fitted_exponent }));
    }
    out.write("complexity.csv", body.as_bytes())?;
    out.write_json("summary.json", &json!({ "n": n_list, "fits": fits }))?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    peaks: &'a [pairsim::Peak],
    gaps: &'a [pairsim::Gap],
    resolution: f64,
    /// Exact `2Δ_n` per sector from diagonalization, for comparison.
    expected_gaps: Vec<serde_json::Value>,
}

pub fn spectroscopy_cmd(c: &Config, seed: u64, out: &mut OutDir) -> Result<(), CliError> {
    let p = c.pairing_model()?;
    let (cfg, threshold) = c.protocol(seed)?;
    let r = run_spectroscopy(&p, &cfg, threshold)?;
    let mut body = String::from("t,p_plus,p_minus\n");
    for i in 0..r.series.t.len() {
        body.push_str(&csv_row(&[num(r.series.t[i]), num(r.series.p_plus[i]), num(r.series.p_minus[i])]));
    }
    out.write("series.csv", body.as_bytes())?;
    let mut body = String::from("omega,amplitude,phase\n");
    for k in r.spectrum.sorted_indices() {
        body.push_str(&csv_row(&[num(r.spectrum.omega[k]), num(r.spectrum.amplitude[k]), num(r.spectrum.phase[k])]));
    }
    out.write("spectrum.csv", body.as_bytes())?;
    let table = sector_eigenvalues(&p)?;
    let expected_gaps = table
        .sectors
        .iter()
        .filter(|s| s.dim() >= 2)
        .map(|s| {
            let g = if s.levels[0].1 >= 2 { 0.0 } else { s.levels[1].0 - s.levels[0].0 };
            json!({ "n": s.n, "two_delta": g })
        })
        .collect();
    out.write_json(
        "spectrum.json",
        &SpectrumJson {
            peaks: &r.peaks,
            gaps: &r.gaps,
            resolution: r.spectrum.resolution,
            expected_gaps,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct IdentityRow {
    identity: String,
    backend: &'static str,
    freq_tunable: bool,
    couplings_switchable: bool,
    result: String,
    passed: bool,
}

/// Prints the table and returns whether every check passed.
pub fn validate_identities(n: usize, out: Option<&mut OutDir>) -> Result<bool, CliError> {
    let checks = identity_checks(n)?;
    let rows: Vec<IdentityRow> = checks
        .iter()
        .map(|c| IdentityRow {
            identity: c.identity.clone(),
            backend: c.backend.as_str(),
            freq_tunable: c.freq_tunable,
            couplings_switchable: c.couplings_switchable,
            result: match &c.outcome {
                Outcome::Exact => "exact".into(),
                Outcome::SecondOrder(o) => format!("order {o:.3}"),
                Outcome::Unsupported => "unsupported".into(),
                Outcome::Failed(m) => format!("FAILED: {m}"),
            },
            passed: c.passed(),
        })
        .collect();
    println!("{:<6} {:<20} {:<2} {:<2} {:<36} result", "status", "backend", "f", "c", "identity");
    for r in &rows {
        println!(
            "{:<6} {:<20} {:<2} {:<2} {:<36} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.backend,
            u8::from(r.freq_tunable),
            u8::from(r.couplings_switchable),
            r.identity,
            r.result
        );
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    println!("{} checks, {} failed", rows.len(), failed);
    if let Some(out) = out {
        out.write_json("identities.json", &rows)?;
    }
    Ok(failed == 0)
}

pub fn default_out(sub: &str) -> PathBuf {
    PathBuf::from(format!("pairsim-{sub}"))
}
