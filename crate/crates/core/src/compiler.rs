//! Lowering of target propagators onto hardware gate schedules.
//!
//! Every construction is built from three moves: free evolution under the
//! chain Hamiltonian (optionally with overrides), and conjugation of a block
//! by a Pauli layer. A layer `σ^a_Q` is emitted as `[rot(a, −π/2, Q), block,
//! rot(a, +π/2, Q)]`, which equals `σ_Q · block · σ_Q` and flips the sign of
//! every Hamiltonian term that anticommutes with it. Running a block once
//! plain and once flipped cancels the flipped terms.
//!
//! Notation used in the comments: `K_l = σ^x_l σ^x_{l+1} + σ^y_l σ^y_{l+1}`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{HardwareKind, HardwareModel, Overrides, PairingModel, TrotterOptions};
use crate::scalar::Real;
use crate::schedule::{Axis, GateSchedule};

/// Construction used for a nearest-neighbor `e^{−iφK_l}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XxyyRoute {
    /// Two basis-rotated `zz` blocks, `e^{−iφxx} e^{−iφyy}`.
    FromZz,
    /// Two `xx` blocks, the second rotated into `yy` by `√Z` layers.
    FromXx,
    /// Whole-chain `K` evolution followed by a Z-flip extraction of bond `l`.
    GlobalRefocus,
    /// Only bond `l` switched on.
    Native,
}

impl XxyyRoute {
    pub const ALL: [XxyyRoute; 4] = [
        XxyyRoute::Native,
        XxyyRoute::GlobalRefocus,
        XxyyRoute::FromXx,
        XxyyRoute::FromZz,
    ];
}

impl fmt::Display for XxyyRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            XxyyRoute::FromZz => "from_zz",
            XxyyRoute::FromXx => "from_xx",
            XxyyRoute::GlobalRefocus => "global_refocus",
            XxyyRoute::Native => "native",
        })
    }
}

impl FromStr for XxyyRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "from_zz" => Ok(XxyyRoute::FromZz),
            "from_xx" => Ok(XxyyRoute::FromXx),
            "global_refocus" => Ok(XxyyRoute::GlobalRefocus),
            "native" => Ok(XxyyRoute::Native),
            other => Err(Error::InvalidConfig(format!("unknown xxyy route {other:?}"))),
        }
    }
}

/// Construction used for `e^{−iφ zz}` on a Heisenberg chain with fixed couplings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZzRoute {
    /// Whole-chain `zz` evolution, then a flip extraction of bond `l`.
    GlobalRefocus,
    /// Longitudinal-Ising emulation fed into the Ising circuit.
    IsingReduction,
}

impl FromStr for ZzRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "global_refocus" => Ok(ZzRoute::GlobalRefocus),
            "ising_reduction" => Ok(ZzRoute::IsingReduction),
            other => Err(Error::InvalidConfig(format!("unknown zz route {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileOptions {
    #[serde(default)]
    pub trotter: TrotterOptions,
    /// Forces the nearest-neighbor `K_l` construction; cheapest legal route when `None`.
    #[serde(default)]
    pub xxyy_route: Option<XxyyRoute>,
    #[serde(default)]
    pub zz_route: Option<ZzRoute>,
}

impl CompileOptions {
    pub fn with_trotter(trotter: TrotterOptions) -> Self {
        Self {
            trotter,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SynthesisTarget<T: Real> {
    /// `e^{−iθσ^z_l/2}`.
    SingleZ { l: usize, theta: T },
    /// `e^{−iφσ^z_l σ^z_m}`.
    PairZz { l: usize, m: usize, phi: T },
    /// `e^{−iφ(σ^x_l σ^x_m + σ^y_l σ^y_m)}`.
    PairXxyy { l: usize, m: usize, phi: T },
    /// `e^{−itH_p}`.
    FullPairing { t: T },
}

impl<T: Real> fmt::Display for SynthesisTarget<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthesisTarget::SingleZ { l, theta } => write!(f, "SingleZ(l={l}, theta={theta})"),
            SynthesisTarget::PairZz { l, m, phi } => write!(f, "PairZZ(l={l}, m={m}, phi={phi})"),
            SynthesisTarget::PairXxyy { l, m, phi } => write!(f, "PairXXYY(l={l}, m={m}, phi={phi})"),
            SynthesisTarget::FullPairing { t } => write!(f, "FullPairing(t={t})"),
        }
    }
}

fn odd(q: usize) -> bool {
    q % 2 == 1
}

/// Stateful emitter bound to one hardware chain and option set.
pub struct Compiler<'h, T: Real> {
    h: &'h HardwareModel<T>,
    opts: CompileOptions,
    xxyy_choice: RefCell<HashMap<usize, XxyyRoute>>,
}

impl<'h, T: Real> Compiler<'h, T> {
    pub fn new(h: &'h HardwareModel<T>, opts: CompileOptions) -> Self {
        Self {
            h,
            opts,
            xxyy_choice: RefCell::new(HashMap::new()),
        }
    }

    fn n(&self) -> usize {
        self.h.n_qubits()
    }

    fn c(&self) -> bool {
        self.h.couplings_switchable
    }

    fn f(&self) -> bool {
        self.h.freq_tunable
    }

    fn fully(&self) -> bool {
        self.h.fully_tunable()
    }

    fn uniform_omega(&self) -> bool {
        let w = self.h.omega();
        w.iter().all(|&x| x == w[0])
    }

    fn all(&self) -> Vec<usize> {
        (1..=self.n()).collect()
    }

    fn parity(&self, want_odd: bool) -> Vec<usize> {
        (1..=self.n()).filter(|&q| odd(q) == want_odd).collect()
    }

    fn empty(&self) -> GateSchedule<T> {
        GateSchedule::new(self.h)
    }

    // ---- overrides -------------------------------------------------------

    fn bonds_only(&self, on: &[usize]) -> Vec<bool> {
        (1..self.n()).map(|b| on.contains(&b)).collect()
    }

    fn ov(&self, omega: Option<Vec<T>>, j_on: Option<Vec<bool>>) -> Overrides<T> {
        Overrides { omega, j_on }
    }

    fn zero_omega(&self) -> Vec<T> {
        vec![T::zero(); self.n()]
    }

    // ---- layers ----------------------------------------------------------

    /// `σ_Q · block · σ_Q` for a set of simultaneous layers on disjoint qubits.
    fn flip(
        &self,
        s: &mut GateSchedule<T>,
        layers: &[(Axis, Vec<usize>)],
        block: impl FnOnce(&mut GateSchedule<T>) -> Result<()>,
    ) -> Result<()> {
        let half = T::frac_pi_2();
        for (a, q) in layers {
            s.rot(*a, -half, q.iter().copied())?;
        }
        block(s)?;
        for (a, q) in layers {
            s.rot(*a, half, q.iter().copied())?;
        }
        Ok(())
    }

    /// Basis change `R^+ block R^-` with `R^± = e^{±iπ/4 σ^a}` on `q`.
    fn quarter(
        &self,
        s: &mut GateSchedule<T>,
        axis: Axis,
        q: &[usize],
        block: impl FnOnce(&mut GateSchedule<T>) -> Result<()>,
    ) -> Result<()> {
        let a = T::frac_pi_4();
        s.rot(axis, -a, q.iter().copied())?;
        block(s)?;
        s.rot(axis, a, q.iter().copied())
    }

    fn evolve(&self, s: &mut GateSchedule<T>, tau: T, ov: &Overrides<T>) -> Result<()> {
        if tau == T::zero() {
            return Ok(());
        }
        s.evolve(tau, ov.clone())
    }

    /// `[E(τ/2), flip(E(τ/2))]`: removes every term the layer anticommutes with.
    fn refocus(&self, s: &mut GateSchedule<T>, tau: T, ov: &Overrides<T>, layers: &[(Axis, Vec<usize>)]) -> Result<()> {
        let half = tau * T::lit(0.5);
        self.evolve(s, half, ov)?;
        self.flip(s, layers, |s| self.evolve(s, half, ov))
    }

    /// Evolution under bond `b` alone with the on-site fields removed:
    /// zeroed when fully tunable, refocused by `X_all` otherwise (exact for
    /// uniform fields, which commute with every bond term).
    fn bond_segment(&self, s: &mut GateSchedule<T>, tau: T, b: usize) -> Result<()> {
        let mask = Some(self.bonds_only(&[b]));
        if self.f() {
            self.evolve(s, tau, &self.ov(Some(self.zero_omega()), mask))
        } else {
            let ov = self.ov(None, mask);
            self.refocus(s, tau, &ov, &[(Axis::X, self.all())])
        }
    }

    // ---- single-qubit z --------------------------------------------------

    /// Appends `e^{−iθσ^z_l/2}`.
    pub fn single_z(&self, s: &mut GateSchedule<T>, l: usize, theta: T) -> Result<()> {
        let target = || SynthesisTarget::SingleZ { l, theta }.to_string();
        if l == 0 || l > self.n() {
            return Err(Error::unsupported(target(), format!("qubit outside 1..={}", self.n())));
        }
        if theta == T::zero() {
            return Ok(());
        }
        let w = self.h.omega()[l - 1];
        if w == T::zero() {
            return Err(Error::unsupported(target(), "qubit frequency is zero"));
        }
        let mut tau = theta / w;
        let mut omega = None;
        if tau < T::zero() {
            // An inverted field on one qubit spoils the uniform-field
            // refocusing used by the other chains, so only diagonal or fully
            // tunable chains invert ω_l. Elsewhere σx_l conjugation reverses
            // the rotation at the same duration.
            let invert = self.f() && (self.fully() || self.h.kind == HardwareKind::IsingLongitudinal);
            if !invert {
                return self.flip(s, &[(Axis::X, vec![l])], |s| self.single_z(s, l, -theta));
            }
            let mut v = self.h.omega().to_vec();
            v[l - 1] = -w;
            omega = Some(v);
            tau = -tau;
        }
        let n = self.n();
        if n == 1 {
            return self.evolve(s, tau, &self.ov(omega, None));
        }
        let others: Vec<usize> = (1..=n).filter(|&q| q != l).collect();
        if self.fully() {
            let mut v = self.zero_omega();
            v[l - 1] = omega.as_ref().map_or(w, |o| o[l - 1]);
            return self.evolve(s, tau, &self.ov(Some(v), Some(vec![false; n - 1])));
        }
        if self.c() {
            let ov = self.ov(omega, Some(vec![false; n - 1]));
            return self.refocus(s, tau, &ov, &[(Axis::X, others)]);
        }
        let ov = self.ov(omega, None);
        match self.h.kind {
            HardwareKind::IsingLongitudinal => self.select_z(s, l, tau, &|s, t| self.evolve(s, t, &ov)),
            HardwareKind::Heisenberg => self.select_z(s, l, tau, &|s, t| self.ising_emulation(s, t, &ov)),
            HardwareKind::Xy | HardwareKind::IsingTransverse => {
                let half = tau * T::lit(0.5);
                self.global_z_with(s, half, &ov)?;
                self.flip(s, &[(Axis::X, others)], |s| self.global_z_with(s, half, &ov))
            }
        }
    }

    /// Four quarter segments of a diagonal block with `X` flips on the
    /// opposite-parity set `J'` and same-parity set `J''` (excluding `l`):
    /// only the field on `l` survives.
    fn select_z(
        &self,
        s: &mut GateSchedule<T>,
        l: usize,
        tau: T,
        seg: &dyn Fn(&mut GateSchedule<T>, T) -> Result<()>,
    ) -> Result<()> {
        let jp = self.parity(!odd(l));
        let jpp: Vec<usize> = self.parity(odd(l)).into_iter().filter(|&q| q != l).collect();
        let q = tau * T::lit(0.25);
        self.four_segments(s, q, &jp, &jpp, seg)
    }

    /// `[E, X−_A, E, X−_B, E, X+_A, E, X+_B]`: qubits in `A` see signs
    /// `(+,−,−,+)`, qubits in `B` see `(+,+,−,−)` across the four segments.
    fn four_segments(
        &self,
        s: &mut GateSchedule<T>,
        q: T,
        a: &[usize],
        b: &[usize],
        seg: &dyn Fn(&mut GateSchedule<T>, T) -> Result<()>,
    ) -> Result<()> {
        let h = T::frac_pi_2();
        seg(s, q)?;
        s.rot(Axis::X, -h, a.iter().copied())?;
        seg(s, q)?;
        s.rot(Axis::X, -h, b.iter().copied())?;
        seg(s, q)?;
        s.rot(Axis::X, h, a.iter().copied())?;
        seg(s, q)?;
        s.rot(Axis::X, h, b.iter().copied())
    }

    /// Longitudinal-Ising evolution from a Heisenberg chain: `Z` on even
    /// qubits flips `xx + yy` on every bond and keeps `zz` and the fields.
    fn ising_emulation(&self, s: &mut GateSchedule<T>, tau: T, ov: &Overrides<T>) -> Result<()> {
        self.refocus(s, tau, ov, &[(Axis::Z, self.parity(false))])
    }

    fn global_z_with(&self, s: &mut GateSchedule<T>, tau: T, ov: &Overrides<T>) -> Result<()> {
        self.refocus(s, tau, ov, &[(Axis::Z, self.parity(false))])
    }

    /// Appends an approximation of `e^{−iτ Σ ω_l σ^z_l/2}` on an XY or
    /// transverse-Ising chain: `Z` on even qubits flips every bond term.
    /// Exact for XY with uniform fields; first order for transverse Ising.
    pub fn global_z(&self, s: &mut GateSchedule<T>, tau: T) -> Result<()> {
        match self.h.kind {
            HardwareKind::Xy | HardwareKind::IsingTransverse => self.global_z_with(s, tau, &Overrides::none()),
            k => Err(Error::unsupported(
                "GlobalZ",
                format!("even-qubit Z refocusing does not remove the {k} interaction"),
            )),
        }
    }

    // ---- zz --------------------------------------------------------------

    fn bond_tau(&self, l: usize, phi: T, target: impl Fn() -> String) -> Result<(T, bool)> {
        if l == 0 || l >= self.n() {
            return Err(Error::unsupported(target(), format!("bond {l} outside 1..{}", self.n())));
        }
        let j = self.h.j()[l - 1];
        if j == T::zero() {
            return Err(Error::unsupported(target(), format!("coupling on bond {l} is zero")));
        }
        let tau = phi / j;
        Ok((tau.abs(), tau < T::zero()))
    }

    fn require_transverse_tunable(&self, target: impl Fn() -> String) -> Result<()> {
        if self.h.kind == HardwareKind::IsingTransverse && !self.f() {
            return Err(Error::unsupported(
                target(),
                "transverse Ising two-qubit synthesis needs tunable (sign-invertible) frequencies",
            ));
        }
        Ok(())
    }

    /// Appends `e^{−iφσ^z_l σ^z_{l+1}}`.
    pub fn zz(&self, s: &mut GateSchedule<T>, l: usize, phi: T) -> Result<()> {
        let target = || SynthesisTarget::PairZz { l, m: l + 1, phi }.to_string();
        self.require_transverse_tunable(target)?;
        if phi == T::zero() {
            return Ok(());
        }
        let (tau, neg) = self.bond_tau(l, phi, target)?;
        if neg {
            self.flip(s, &[(Axis::X, vec![l])], |s| self.zz_pos(s, l, tau))
        } else {
            self.zz_pos(s, l, tau)
        }
    }

    /// `e^{−iτJ_l zz}` for `τ ≥ 0`.
    fn zz_pos(&self, s: &mut GateSchedule<T>, l: usize, tau: T) -> Result<()> {
        match self.h.kind {
            HardwareKind::IsingLongitudinal => {
                if self.fully() {
                    self.evolve(s, tau, &self.ov(Some(self.zero_omega()), Some(self.bonds_only(&[l]))))
                } else if self.c() {
                    let ov = self.ov(None, Some(self.bonds_only(&[l])));
                    self.refocus(s, tau, &ov, &[(Axis::X, self.all())])
                } else {
                    self.select_zz(s, l, tau, &|s, t| self.evolve(s, t, &Overrides::none()))
                }
            }
            HardwareKind::Heisenberg => {
                if self.c() {
                    let half = tau * T::lit(0.5);
                    self.bond_segment(s, half, l)?;
                    self.flip(s, &[(Axis::Z, vec![l])], |s| self.bond_segment(s, half, l))
                } else {
                    match self.heisenberg_zz_route() {
                        ZzRoute::GlobalRefocus => {
                            let half = tau * T::lit(0.5);
                            let f = self.f_set(l);
                            self.global_zz(s, half)?;
                            self.flip(s, &[(Axis::X, f)], |s| self.global_zz(s, half))
                        }
                        ZzRoute::IsingReduction => {
                            let none = Overrides::none();
                            self.select_zz(s, l, tau, &|s, t| self.ising_emulation(s, t, &none))
                        }
                    }
                }
            }
            HardwareKind::Xy | HardwareKind::IsingTransverse => {
                self.quarter(s, Axis::Y, &[l, l + 1], |s| self.xx_pos(s, l, tau))
            }
        }
    }

    fn heisenberg_zz_route(&self) -> ZzRoute {
        // Global refocusing costs about 4N gates against 6N for the reduction.
        self.opts.zz_route.unwrap_or(ZzRoute::GlobalRefocus)
    }

    /// Flip sets that keep only `zz` on bond `l` from a diagonal block.
    fn select_zz(
        &self,
        s: &mut GateSchedule<T>,
        l: usize,
        tau: T,
        seg: &dyn Fn(&mut GateSchedule<T>, T) -> Result<()>,
    ) -> Result<()> {
        let n = self.n();
        let same = |q: usize| odd(q) == odd(l);
        let a: Vec<usize> = (1..=n).filter(|&q| (q <= l && same(q)) || (q > l && !same(q))).collect();
        let b: Vec<usize> = (1..=n).filter(|&q| (q < l && !same(q)) || (q > l + 1 && same(q))).collect();
        self.four_segments(s, tau * T::lit(0.25), &a, &b, seg)
    }

    /// Qubits whose flip cancels every bond term except bond `l`.
    fn f_set(&self, l: usize) -> Vec<usize> {
        (1..=self.n())
            .filter(|&q| (q < l && odd(l - q)) || (q > l + 1 && !odd(q - l)))
            .collect()
    }

    /// `≈ e^{−iτ Σ J_b zz_b}` on a Heisenberg chain: `X` on even and `Y` on
    /// odd qubits flips `xx`, `yy` and the fields, keeping `zz`.
    fn global_zz(&self, s: &mut GateSchedule<T>, tau: T) -> Result<()> {
        let layers = [(Axis::X, self.parity(false)), (Axis::Y, self.parity(true))];
        self.refocus(s, tau, &Overrides::none(), &layers)
    }

    // ---- xx (XY and transverse Ising) ------------------------------------

    /// `e^{−iτJ_l xx}` for `τ ≥ 0`.
    fn xx_pos(&self, s: &mut GateSchedule<T>, l: usize, tau: T) -> Result<()> {
        match self.h.kind {
            HardwareKind::Xy if self.c() => {
                let half = tau * T::lit(0.5);
                self.bond_segment(s, half, l)?;
                self.flip(s, &[(Axis::X, vec![l])], |s| self.bond_segment(s, half, l))
            }
            HardwareKind::IsingTransverse if self.fully() => {
                self.evolve(s, tau, &self.ov(Some(self.zero_omega()), Some(self.bonds_only(&[l]))))
            }
            HardwareKind::Xy | HardwareKind::IsingTransverse => {
                let half = tau * T::lit(0.5);
                let layers = self.xx_extraction(l);
                self.global_xxyy(s, half)?;
                self.flip(s, &layers, |s| self.global_xxyy(s, half))
            }
            k => Err(Error::unsupported(
                format!("PairXX(l={l})"),
                format!("no xx primitive on {k} hardware"),
            )),
        }
    }

    /// Layers keeping only `xx` on bond `l` out of `Σ K_b`.
    fn xx_extraction(&self, l: usize) -> Vec<(Axis, Vec<usize>)> {
        let n = self.n();
        let mut x = vec![l];
        let mut y = Vec::new();
        let mut z = Vec::new();
        for q in 1..l {
            if odd(l - q) {
                y.push(q);
            } else {
                x.push(q);
            }
        }
        for q in l + 2..=n {
            if !odd(q - l) {
                z.push(q);
            }
        }
        x.sort_unstable();
        vec![(Axis::X, x), (Axis::Y, y), (Axis::Z, z)]
    }

    /// `≈ e^{−iτ Σ J_b K_b}` from the whole chain.
    fn global_xxyy(&self, s: &mut GateSchedule<T>, tau: T) -> Result<()> {
        match self.h.kind {
            // X_all flips the fields and keeps K; exact for uniform fields.
            HardwareKind::Xy => self.refocus(s, tau, &Overrides::none(), &[(Axis::X, self.all())]),
            HardwareKind::Heisenberg => {
                // Remove the fields with X_all, then undo Σ zz with an
                // X_even-flipped global zz evolution.
                let half = tau * T::lit(0.5);
                let none = Overrides::none();
                let pi2 = T::frac_pi_2();
                self.evolve(s, half, &none)?;
                s.rot(Axis::X, -pi2, self.all())?;
                self.evolve(s, half, &none)?;
                s.rot(Axis::X, pi2, self.parity(true))?;
                self.global_zz(s, tau)?;
                s.rot(Axis::X, pi2, self.parity(false))
            }
            HardwareKind::IsingTransverse => {
                // e^{−iτ(−Σω/2 σz + Σ J yy)} via √Z-rotated xx with inverted
                // fields, then the plain chain: the fields cancel to first order.
                let inverted: Vec<T> = self.h.omega().iter().map(|&w| -w).collect();
                let ov = self.ov(Some(inverted), None);
                self.quarter(s, Axis::Z, &self.all(), |s| self.evolve(s, tau, &ov))?;
                self.evolve(s, tau, &Overrides::none())
            }
            HardwareKind::IsingLongitudinal => Err(Error::unsupported(
                "GlobalXXYY",
                "longitudinal Ising chains carry no xx + yy terms",
            )),
        }
    }

    // ---- xx + yy ---------------------------------------------------------

    pub fn route_allowed(&self, route: XxyyRoute) -> bool {
        use HardwareKind::*;
        let kind = self.h.kind;
        if kind == IsingTransverse && !self.f() {
            return false;
        }
        match route {
            XxyyRoute::FromZz => true,
            XxyyRoute::FromXx => matches!(kind, Xy | IsingTransverse),
            XxyyRoute::GlobalRefocus => kind != IsingLongitudinal,
            XxyyRoute::Native => match kind {
                IsingLongitudinal => false,
                IsingTransverse => self.fully(),
                Xy | Heisenberg => self.c(),
            },
        }
    }

    /// Route used for `K_l`: the forced one, or the cheapest legal one.
    pub fn xxyy_route(&self, l: usize) -> Result<XxyyRoute> {
        if let Some(r) = self.opts.xxyy_route {
            if !self.route_allowed(r) {
                return Err(Error::unsupported(
                    format!("PairXXYY(l={l}, m={})", l + 1),
                    format!("route {r} is not available on {} hardware with these tunability flags", self.h.kind),
                ));
            }
            return Ok(r);
        }
        if let Some(r) = self.xxyy_choice.borrow().get(&l) {
            return Ok(*r);
        }
        let mut best: Option<(usize, XxyyRoute)> = None;
        for r in XxyyRoute::ALL {
            if !self.route_allowed(r) {
                continue;
            }
            let mut trial = self.empty();
            self.xxyy_pos(&mut trial, l, T::one(), r)?;
            let cost = trial.count_gates().single_qubit_gates;
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, r));
            }
        }
        let (_, r) = best.ok_or_else(|| {
            Error::unsupported(
                format!("PairXXYY(l={l}, m={})", l + 1),
                format!("no construction available on {} hardware", self.h.kind),
            )
        })?;
        self.xxyy_choice.borrow_mut().insert(l, r);
        Ok(r)
    }

    /// Whether the chosen `K_l` construction is exact (for uniform fields).
    pub fn xxyy_exact(&self, l: usize) -> Result<bool> {
        use HardwareKind::*;
        let field_free = self.f() || self.uniform_omega();
        let xx_exact = match self.h.kind {
            Xy => self.c() && field_free,
            IsingTransverse => self.fully(),
            _ => false,
        };
        let zz_exact = match self.h.kind {
            IsingLongitudinal => true,
            Heisenberg => self.c() && field_free,
            _ => xx_exact,
        };
        Ok(match self.xxyy_route(l)? {
            XxyyRoute::FromZz => zz_exact,
            XxyyRoute::FromXx => xx_exact,
            XxyyRoute::GlobalRefocus => false,
            XxyyRoute::Native => field_free,
        })
    }

    /// Appends `e^{−iφK_l}`.
    pub fn xxyy(&self, s: &mut GateSchedule<T>, l: usize, phi: T) -> Result<()> {
        let target = || SynthesisTarget::PairXxyy { l, m: l + 1, phi }.to_string();
        self.require_transverse_tunable(target)?;
        if phi == T::zero() {
            return Ok(());
        }
        let route = self.xxyy_route(l)?;
        if route == XxyyRoute::FromZz {
            if l == 0 || l >= self.n() {
                return Err(Error::unsupported(target(), format!("bond {l} outside 1..{}", self.n())));
            }
            return self.xxyy_from_zz(s, l, l + 1, &|s| self.zz(s, l, phi));
        }
        let (tau, neg) = self.bond_tau(l, phi, target)?;
        if neg {
            self.flip(s, &[(Axis::Z, vec![l])], |s| self.xxyy_pos(s, l, tau, route))
        } else {
            self.xxyy_pos(s, l, tau, route)
        }
    }

    /// `e^{−iφK}` on qubits `(a, b)` from a `zz` block: `X(π/4)` turns
    /// `zz` into `yy`, `Y(π/4)` turns it into `xx`, and the two commute.
    fn xxyy_from_zz(
        &self,
        s: &mut GateSchedule<T>,
        a: usize,
        b: usize,
        zz: &dyn Fn(&mut GateSchedule<T>) -> Result<()>,
    ) -> Result<()> {
        self.quarter(s, Axis::X, &[a, b], zz)?;
        self.quarter(s, Axis::Y, &[a, b], zz)
    }

    /// `e^{−iτJ_l K_l}` for `τ ≥ 0`.
    fn xxyy_pos(&self, s: &mut GateSchedule<T>, l: usize, tau: T, route: XxyyRoute) -> Result<()> {
        if l == 0 || l >= self.n() {
            return Err(Error::unsupported(format!("PairXXYY(l={l})"), "bond out of range"));
        }
        match route {
            XxyyRoute::FromZz => {
                let j = self.h.j()[l - 1];
                self.xxyy_from_zz(s, l, l + 1, &|s| self.zz(s, l, tau * j))
            }
            XxyyRoute::FromXx => {
                self.quarter(s, Axis::Z, &[l, l + 1], |s| self.xx_pos(s, l, tau))?;
                self.xx_pos(s, l, tau)
            }
            XxyyRoute::GlobalRefocus => {
                let half = tau * T::lit(0.5);
                let f = self.f_set(l);
                self.global_xxyy(s, half)?;
                self.flip(s, &[(Axis::Z, f)], |s| self.global_xxyy(s, half))
            }
            XxyyRoute::Native => match self.h.kind {
                HardwareKind::Xy => self.bond_segment(s, tau, l),
                HardwareKind::Heisenberg => {
                    // (xx+yy+zz)τ + (xx−yy−zz)τ/2 + (−xx+yy−zz)τ/2 = Kτ.
                    let half = tau * T::lit(0.5);
                    self.bond_segment(s, tau, l)?;
                    self.flip(s, &[(Axis::X, vec![l])], |s| self.bond_segment(s, half, l))?;
                    self.flip(s, &[(Axis::Y, vec![l])], |s| self.bond_segment(s, half, l))
                }
                HardwareKind::IsingTransverse => {
                    let ov = self.ov(Some(self.zero_omega()), Some(self.bonds_only(&[l])));
                    self.evolve(s, tau, &ov)?;
                    self.quarter(s, Axis::Z, &[l, l + 1], |s| self.evolve(s, tau, &ov))
                }
                HardwareKind::IsingLongitudinal => Err(Error::unsupported(
                    format!("PairXXYY(l={l})"),
                    "no native xx + yy on longitudinal Ising hardware",
                )),
            },
        }
    }

    // ---- range extension -------------------------------------------------

    /// `e^{±i(π/4)K_k}`, split into `G` pieces when the construction is inexact.
    fn swap_block(&self, s: &mut GateSchedule<T>, k: usize, sign: T) -> Result<()> {
        let g = if self.xxyy_exact(k)? { 1 } else { self.opts.trotter.g };
        let piece = sign * T::frac_pi_4() / T::count(g);
        for _ in 0..g {
            self.xxyy(s, k, piece)?;
        }
        Ok(())
    }

    /// Wraps `base` (realizing `U_{m,k}`) as `e^{iπ/4 K_k} base e^{−iπ/4 K_k}`,
    /// which realizes `U_{m,k+1}`.
    pub fn extend(&self, base: &GateSchedule<T>, k: usize) -> Result<GateSchedule<T>> {
        if k == 0 || k + 1 > self.n() {
            return Err(Error::unsupported(
                format!("ExtendRange(l={k})"),
                format!("qubit {} outside 1..={}", k + 1, self.n()),
            ));
        }
        let mut s = self.empty();
        self.swap_block(&mut s, k, T::one())?;
        s.append(base)?;
        self.swap_block(&mut s, k, -T::one())?;
        Ok(s)
    }

    /// Appends `e^{−iφσ^z_m σ^z_l}` for any `m < l`.
    pub fn zz_long(&self, s: &mut GateSchedule<T>, m: usize, l: usize, phi: T) -> Result<()> {
        if m == 0 || m >= l || l > self.n() {
            return Err(Error::unsupported(
                SynthesisTarget::PairZz { l: m, m: l, phi }.to_string(),
                "need 1 ≤ l < m ≤ N",
            ));
        }
        let mut cur = self.empty();
        self.zz(&mut cur, m, phi)?;
        for k in m + 1..l {
            cur = self.extend(&cur, k)?;
        }
        s.append(&cur)
    }

    /// Appends `e^{−iφ(σ^x_m σ^x_l + σ^y_m σ^y_l)}` for any `m < l`.
    pub fn xxyy_long(&self, s: &mut GateSchedule<T>, m: usize, l: usize, phi: T) -> Result<()> {
        if l == m + 1 {
            return self.xxyy(s, m, phi);
        }
        if m == 0 || m >= l || l > self.n() {
            return Err(Error::unsupported(
                SynthesisTarget::PairXxyy { l: m, m: l, phi }.to_string(),
                "need 1 ≤ l < m ≤ N",
            ));
        }
        if phi == T::zero() {
            return Ok(());
        }
        let mut zz = self.empty();
        self.zz_long(&mut zz, m, l, phi)?;
        self.xxyy_from_zz(s, m, l, &|s| s.append(&zz))
    }

    // ---- full pairing evolution -----------------------------------------

    /// One first-order Trotter step of length `dt`: pair terms in
    /// lexicographic order, then the on-site fields.
    pub fn pairing_step(&self, s: &mut GateSchedule<T>, p: &PairingModel<T>, dt: T) -> Result<()> {
        let half = T::lit(0.5);
        for (m, l, v) in p.pairs() {
            self.xxyy_long(s, m, l, v * dt * half)?;
        }
        for (m, &e) in p.epsilon().iter().enumerate() {
            self.single_z(s, m + 1, e * dt)?;
        }
        Ok(())
    }

    pub fn pairing(&self, p: &PairingModel<T>, t: T) -> Result<GateSchedule<T>> {
        if p.n_qubits() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: p.n_qubits(),
            });
        }
        let mut out = self.empty();
        if t == T::zero() {
            return Ok(out);
        }
        let m = self.opts.trotter.m;
        let mut step = self.empty();
        self.pairing_step(&mut step, p, t / T::count(m))?;
        for _ in 0..m {
            out.append(&step)?;
        }
        Ok(out)
    }

    pub fn compile(&self, target: SynthesisTarget<T>, p: Option<&PairingModel<T>>) -> Result<GateSchedule<T>> {
        let mut s = self.empty();
        match target {
            SynthesisTarget::SingleZ { l, theta } => self.single_z(&mut s, l, theta)?,
            SynthesisTarget::PairZz { l, m, phi } => self.zz_long(&mut s, l, m, phi)?,
            SynthesisTarget::PairXxyy { l, m, phi } => self.xxyy_long(&mut s, l, m, phi)?,
            SynthesisTarget::FullPairing { t } => {
                let p = p.ok_or_else(|| Error::InvalidConfig("full pairing target needs a pairing model".into()))?;
                return self.pairing(p, t);
            }
        }
        Ok(s)
    }
}

/// Schedule realizing `e^{−iθσ^z_l/2}`.
pub fn synth_single_z<T: Real>(h: &HardwareModel<T>, l: usize, theta: T) -> Result<GateSchedule<T>> {
    Compiler::new(h, CompileOptions::default()).compile(SynthesisTarget::SingleZ { l, theta }, None)
}

/// Schedule realizing `e^{−iφσ^z_l σ^z_{l+1}}`.
pub fn synth_pair_zz<T: Real>(h: &HardwareModel<T>, l: usize, phi: T) -> Result<GateSchedule<T>> {
    synth_pair_zz_with(h, l, phi, CompileOptions::default())
}

pub fn synth_pair_zz_with<T: Real>(h: &HardwareModel<T>, l: usize, phi: T, opts: CompileOptions) -> Result<GateSchedule<T>> {
    let c = Compiler::new(h, opts);
    let mut s = c.empty();
    c.zz(&mut s, l, phi)?;
    Ok(s)
}

/// Schedule realizing `e^{−iφK_l}` by the cheapest legal construction.
pub fn synth_pair_xxyy<T: Real>(h: &HardwareModel<T>, l: usize, phi: T) -> Result<GateSchedule<T>> {
    synth_pair_xxyy_with(h, l, phi, CompileOptions::default())
}

pub fn synth_pair_xxyy_with<T: Real>(
    h: &HardwareModel<T>,
    l: usize,
    phi: T,
    opts: CompileOptions,
) -> Result<GateSchedule<T>> {
    let c = Compiler::new(h, opts);
    let mut s = c.empty();
    c.xxyy(&mut s, l, phi)?;
    Ok(s)
}

/// Wraps `base` (realizing `U_{m,l}`) so that it realizes `U_{m,l+1}`.
pub fn extend_range<T: Real>(base: &GateSchedule<T>, l: usize, opts: CompileOptions) -> Result<GateSchedule<T>> {
    Compiler::new(base.hardware(), opts).extend(base, l)
}

/// First-order Trotter schedule for `e^{−itH_p}`.
pub fn compile_pairing<T: Real>(
    p: &PairingModel<T>,
    h: &HardwareModel<T>,
    opts: CompileOptions,
    t: T,
) -> Result<GateSchedule<T>> {
    Compiler::new(h, opts).pairing(p, t)
}

/// Schedule approximating `e^{−iτH_0}` by even-qubit `Z` refocusing.
pub fn synth_global_z<T: Real>(h: &HardwareModel<T>, tau: T) -> Result<GateSchedule<T>> {
    let c = Compiler::new(h, CompileOptions::default());
    let mut s = c.empty();
    c.global_z(&mut s, tau)?;
    Ok(s)
}
