//! Pauli strings and dense complex operators.
//!
//! Qubits are numbered from 1 and qubit 1 is the most significant tensor
//! factor: in a register of `n` qubits, qubit `q` owns bit `n - q` of a basis
//! index. Spin up is bit value 0, so `Z|↑⟩ = +|↑⟩`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cis, Real};

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Product `self * other` as `(phase exponent k, result)` with phase `i^k`.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// The 2x2 matrix in the `(↑, ↓)` basis.
    pub fn matrix<T: Real>(self) -> [[Complex<T>; 2]; 2] {
        let o = Complex::new(T::zero(), T::zero());
        let l = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

fn i_pow<T: Real>(k: u8) -> Complex<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

/// A coefficient times a tensor product of single-qubit Pauli factors.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString<T: Real> {
    factors: Vec<Pauli>,
    coeff: Complex<T>,
}

impl<T: Real> PauliString<T> {
    pub fn new(factors: Vec<Pauli>, coeff: Complex<T>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidModel("Pauli string needs at least one qubit".into()));
        }
        if factors.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits(factors.len(), MAX_QUBITS));
        }
        Ok(Self { factors, coeff })
    }

    /// Parses a label such as `"XIZ"` with unit coefficient.
    pub fn parse(label: &str) -> Result<Self> {
        let factors = label
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidModel(format!("bad Pauli label {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors, Complex::new(T::one(), T::zero()))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; n], Complex::new(T::one(), T::zero()))
    }

    /// `coeff * p` acting on qubit `q` (1-based).
    pub fn single(n: usize, q: usize, p: Pauli, coeff: T) -> Result<Self> {
        Self::with_factors(n, &[(q, p)], coeff)
    }

    /// `coeff * pa_a * pb_b`.
    pub fn pair(n: usize, a: usize, pa: Pauli, b: usize, pb: Pauli, coeff: T) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidModel(format!("repeated qubit {a} in two-body term")));
        }
        Self::with_factors(n, &[(a, pa), (b, pb)], coeff)
    }

    fn with_factors(n: usize, ops: &[(usize, Pauli)], coeff: T) -> Result<Self> {
        let mut factors = vec![Pauli::I; n];
        for &(q, p) in ops {
            if q == 0 || q > n {
                return Err(Error::InvalidModel(format!("qubit {q} outside 1..={n}")));
            }
            factors[q - 1] = p;
        }
        Self::new(factors, Complex::new(coeff, T::zero()))
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn coeff(&self) -> Complex<T> {
        self.coeff
    }

    pub fn scaled(mut self, c: Complex<T>) -> Self {
        self.coeff *= c;
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.coeff.im == T::zero()
    }

    /// Operator product `self * rhs`, tracking the `±1, ±i` phase.
    pub fn product(&self, rhs: &Self) -> Result<Self> {
        if self.len() != rhs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: rhs.len(),
            });
        }
        let mut k = 0u8;
        let factors = self
            .factors
            .iter()
            .zip(&rhs.factors)
            .map(|(&a, &b)| {
                let (e, p) = a.mul(b);
                k += e;
                p
            })
            .collect();
        Ok(Self {
            factors,
            coeff: self.coeff * rhs.coeff * i_pow(k),
        })
    }

    /// Adds this string's matrix into `m`, which must be `2^n` square.
    fn accumulate(&self, m: &mut DMatrix<Complex<T>>) {
        let n = self.len();
        let dim = 1usize << n;
        let mut flip = 0usize;
        let mut ymask = 0usize;
        let mut zmask = 0usize;
        for (slot, p) in self.factors.iter().enumerate() {
            let bit = 1usize << (n - 1 - slot);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    ymask |= bit;
                }
                Pauli::Z => zmask |= bit,
            }
        }
        let n_y = ymask.count_ones() as u8;
        for col in 0..dim {
            // Y|0> = i|1>, Y|1> = -i|0>: each Y gives i, times -1 when its bit is set.
            let sign_bits = (col & (zmask | ymask)).count_ones();
            let mut ph = i_pow::<T>(n_y);
            if sign_bits % 2 == 1 {
                ph = -ph;
            }
            m[(col ^ flip, col)] += self.coeff * ph;
        }
    }

    pub fn to_matrix(&self) -> DenseOperator<T> {
        let dim = 1usize << self.len();
        let mut m = DMatrix::zeros(dim, dim);
        self.accumulate(&mut m);
        DenseOperator(m)
    }
}

impl<T: Real> fmt::Display for PauliString<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{:+}i)·", self.coeff.re, self.coeff.im)?;
        for p in &self.factors {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

/// Sum of Pauli strings on a common register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum<T: Real> {
    n: usize,
    terms: Vec<PauliString<T>>,
}

impl<T: Real> PauliSum<T> {
    pub fn new(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn push(&mut self, term: PauliString<T>) -> Result<()> {
        if term.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: term.len(),
            });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn terms(&self) -> &[PauliString<T>] {
        &self.terms
    }

    pub fn to_matrix(&self) -> DenseOperator<T> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            t.accumulate(&mut m);
        }
        DenseOperator(m)
    }
}

/// Free-function form of [`PauliString::to_matrix`].
pub fn pauli_to_matrix<T: Real>(p: &PauliString<T>) -> DenseOperator<T> {
    p.to_matrix()
}

/// Square complex matrix of dimension `2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator<T: Real>(DMatrix<Complex<T>>);

impl<T: Real> DenseOperator<T> {
    pub fn from_matrix(m: DMatrix<Complex<T>>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        Ok(Self(m))
    }

    pub fn from_real(m: &DMatrix<T>) -> Result<Self> {
        Self::from_matrix(m.map(|x| Complex::new(x, T::zero())))
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self(DMatrix::identity(d, d))
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self(DMatrix::zeros(d, d))
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag))))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.0
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex<T>> {
        &mut self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.0
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.0[(r, c)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex<T> {
        self.0.trace()
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self(self.0.map(|z| z * c))
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.scale(Complex::new(c, T::zero()))
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn hermitian_deviation(&self) -> T {
        let n = self.dim();
        let mut dev = T::zero();
        for r in 0..n {
            for c in r..n {
                dev = dev.max(cabs(self.0[(r, c)] - self.0[(c, r)].conj()));
            }
        }
        dev
    }

    /// Hermitian within `1e-12` relative to `max(1, ‖A‖_max)`.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= hermitian_tol(self.max_abs())
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> T {
        let p = self.0.adjoint() * &self.0;
        let mut dev = T::zero();
        for r in 0..p.nrows() {
            for c in 0..p.ncols() {
                let target = if r == c { T::one() } else { T::zero() };
                dev = dev.max(cabs(p[(r, c)] - Complex::new(target, T::zero())));
            }
        }
        dev
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_deviation() < tol
    }

    /// `‖self − other‖_max`.
    pub fn max_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max(cabs(*a - *b)))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Tensor product `self ⊗ other` (self is the more significant factor).
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn apply(&self, psi: &StateVector<T>) -> Result<StateVector<T>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(StateVector(&self.0 * &psi.0))
    }
}

impl<T: Real> Mul for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn mul(self, rhs: Self) -> DenseOperator<T> {
        DenseOperator(&self.0 * &rhs.0)
    }
}

impl<T: Real> Add for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn add(self, rhs: Self) -> DenseOperator<T> {
        DenseOperator(&self.0 + &rhs.0)
    }
}

impl<T: Real> Sub for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn sub(self, rhs: Self) -> DenseOperator<T> {
        DenseOperator(&self.0 - &rhs.0)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    let n = d.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n, MAX_QUBITS));
    }
    Ok(())
}

fn hermitian_tol<T: Real>(scale: T) -> T {
    T::tolerance(1e-12) * scale.max(T::one())
}

/// Complex amplitude vector of dimension `2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real>(DVector<Complex<T>>);

impl<T: Real> StateVector<T> {
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amps.len())?;
        Ok(Self(DVector::from_vec(amps)))
    }

    pub fn from_vector(v: DVector<Complex<T>>) -> Result<Self> {
        check_dim(v.len())?;
        Ok(Self(v))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut v = DVector::zeros(dim);
        v[index] = Complex::new(T::one(), T::zero());
        Ok(Self(v))
    }

    /// Product state from a spin label, e.g. `"udd"` or `"↑↓↓"` (qubit 1 first).
    /// `0`/`1` are accepted as aliases for up/down.
    pub fn from_spins(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n == 0 {
            return Err(Error::InvalidModel("empty spin label".into()));
        }
        let mut index = 0usize;
        for c in label.chars() {
            index <<= 1;
            match c {
                'u' | 'U' | '0' | '↑' => {}
                'd' | 'D' | '1' | '↓' => index |= 1,
                _ => return Err(Error::InvalidModel(format!("bad spin label {c:?}"))),
            }
        }
        Self::basis(n, index)
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = T::one() / T::count(dim).sqrt();
        Self(DVector::from_element(dim, Complex::new(a, T::zero())))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.0
    }

    pub fn amplitudes_mut(&mut self) -> &mut DVector<Complex<T>> {
        &mut self.0
    }

    pub fn into_vector(self) -> DVector<Complex<T>> {
        self.0
    }

    pub fn norm(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return Err(Error::InvalidModel("cannot normalize the zero vector".into()));
        }
        let inv = T::one() / n;
        self.0.iter_mut().for_each(|z| *z = z.scale(inv));
        Ok(self)
    }

    /// `max_i |a_i − b_i|`.
    pub fn max_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(T::zero(), |acc, (a, b)| acc.max(cabs(*a - *b)))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.0.dotc(&other.0))
    }

    /// `⟨self|A|self⟩`.
    pub fn expectation(&self, a: &DenseOperator<T>) -> Result<Complex<T>> {
        let av = a.apply(self)?;
        self.inner(&av)
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

/// Eigendecomposition `A = V diag(λ) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: DenseOperator<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(λ) V†` for a complex-valued spectral function.
    pub fn spectral_map(&self, f: impl Fn(T) -> Complex<T>) -> DenseOperator<T> {
        let v = self.vectors.matrix();
        let mut scaled = v.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let c = f(lam);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= c);
        }
        DenseOperator(scaled * v.adjoint())
    }

    /// `e^{−i t A}`.
    pub fn propagator(&self, t: T) -> DenseOperator<T> {
        self.spectral_map(|lam| cis(-lam * t))
    }

    pub fn reconstruct(&self) -> DenseOperator<T> {
        self.spectral_map(|lam| Complex::new(lam, T::zero()))
    }
}

pub fn hermitian_eigendecompose<T: Real>(a: &DenseOperator<T>) -> Result<HermitianEigen<T>> {
    let dev = a.hermitian_deviation();
    if dev > hermitian_tol(a.max_abs()) {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    let eig = SymmetricEigen::new(a.0.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let d = a.dim();
    let mut vectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen {
        values,
        vectors: DenseOperator(vectors),
    })
}

/// `e^{−i t A}` for Hermitian `A`.
pub fn hermitian_expm<T: Real>(a: &DenseOperator<T>, t: T) -> Result<DenseOperator<T>> {
    if t == T::zero() {
        if a.hermitian_deviation() > hermitian_tol(a.max_abs()) {
            return Err(Error::NotHermitian {
                deviation: a.hermitian_deviation().as_f64(),
            });
        }
        return Ok(DenseOperator::identity(a.n_qubits()));
    }
    Ok(hermitian_eigendecompose(a)?.propagator(t))
}

/// 2x2 complex matrix acting on one tensor slot.
pub type Gate1<T> = [[Complex<T>; 2]; 2];

/// `e^{+iθσ^a}` as a 2x2 matrix.
pub fn rotation_gate<T: Real>(axis: Pauli, theta: T) -> Gate1<T> {
    let c = Complex::new(theta.cos(), T::zero());
    let s = Complex::new(T::zero(), theta.sin());
    let p = axis.matrix::<T>();
    let mut g = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            let id = if r == k { c } else { Complex::new(T::zero(), T::zero()) };
            g[r][k] = id + s * p[r][k];
        }
    }
    g
}

/// Applies `g` to bit `bit` of every column of `m` (left multiplication by the embedded gate).
pub fn apply_gate_to_columns<T: Real>(m: &mut DMatrix<Complex<T>>, bit: usize, g: &Gate1<T>) {
    let mask = 1usize << bit;
    let rows = m.nrows();
    for mut col in m.column_iter_mut() {
        for i in 0..rows {
            if i & mask == 0 {
                let j = i | mask;
                let a = col[i];
                let b = col[j];
                col[i] = g[0][0] * a + g[0][1] * b;
                col[j] = g[1][0] * a + g[1][1] * b;
            }
        }
    }
}

pub fn apply_gate_to_vector<T: Real>(v: &mut DVector<Complex<T>>, bit: usize, g: &Gate1<T>) {
    let mask = 1usize << bit;
    for i in 0..v.len() {
        if i & mask == 0 {
            let j = i | mask;
            let a = v[i];
            let b = v[j];
            v[i] = g[0][0] * a + g[0][1] * b;
            v[j] = g[1][0] * a + g[1][1] * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_string() {
        let m = PauliString::<f64>::parse("II").unwrap().to_matrix();
        assert_eq!(m, DenseOperator::identity(2));
    }

    #[test]
    fn z_is_diag_plus_minus() {
        let m = PauliString::<f64>::parse("Z").unwrap().to_matrix();
        assert_eq!(m.get(0, 0), c(1.0, 0.0));
        assert_eq!(m.get(1, 1), c(-1.0, 0.0));
        assert_eq!(m.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn xx_is_antidiagonal() {
        let m = PauliString::<f64>::parse("XX").unwrap().to_matrix();
        for r in 0..4 {
            for col in 0..4 {
                let want = if r + col == 3 { 1.0 } else { 0.0 };
                assert_eq!(m.get(r, col), c(want, 0.0));
            }
        }
    }

    #[test]
    fn y_matches_textbook() {
        let m = PauliString::<f64>::parse("Y").unwrap().to_matrix();
        assert_eq!(m.get(0, 1), c(0.0, -1.0));
        assert_eq!(m.get(1, 0), c(0.0, 1.0));
    }

    #[test]
    fn qubit_one_is_most_significant() {
        // Z on qubit 1 of 2: diag(1, 1, -1, -1).
        let m = PauliString::<f64>::single(2, 1, Pauli::Z, 1.0).unwrap().to_matrix();
        let d: Vec<f64> = (0..4).map(|i| m.get(i, i).re).collect();
        assert_eq!(d, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn two_qubit_products_match_matrix_products() {
        for &a1 in &ALL {
            for &a2 in &ALL {
                for &b1 in &ALL {
                    for &b2 in &ALL {
                        let a = PauliString::<f64>::new(vec![a1, a2], c(1.0, 0.0)).unwrap();
                        let b = PauliString::<f64>::new(vec![b1, b2], c(1.0, 0.0)).unwrap();
                        let prod = a.product(&b).unwrap().to_matrix();
                        let direct = &a.to_matrix() * &b.to_matrix();
                        assert!(prod.max_diff(&direct) < 1e-15, "{a} * {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn eigen_of_diag_swaps_columns() {
        let z = PauliString::<f64>::parse("Z").unwrap().to_matrix();
        let e = hermitian_eigendecompose(&z).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        assert!((cabs(e.vectors.get(1, 0)) - 1.0).abs() < 1e-15);
        assert!((cabs(e.vectors.get(0, 1)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_of_x() {
        let x = PauliString::<f64>::parse("X").unwrap().to_matrix();
        let e = hermitian_eigendecompose(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let y = PauliString::<f64>::parse("Y").unwrap().scaled(c(0.0, 1.0)).to_matrix();
        assert!(matches!(hermitian_eigendecompose(&y), Err(Error::NotHermitian { .. })));
        assert!(hermitian_expm(&y, 0.0).is_err());
    }

    #[test]
    fn expm_zero_time_is_identity() {
        let x = PauliString::<f64>::parse("XZ").unwrap().to_matrix();
        assert_eq!(hermitian_expm(&x, 0.0).unwrap(), DenseOperator::identity(2));
    }

    #[test]
    fn expm_x_quarter_turn() {
        let x = PauliString::<f64>::parse("X").unwrap().to_matrix();
        let u = hermitian_expm(&x, std::f64::consts::FRAC_PI_2).unwrap();
        let want = x.scale(c(0.0, -1.0));
        assert!(u.max_diff(&want) < 1e-14);
    }

    #[test]
    fn rotation_gate_convention() {
        let g = rotation_gate::<f64>(Pauli::X, std::f64::consts::FRAC_PI_2);
        assert!(cabs(g[0][1] - c(0.0, 1.0)) < 1e-15);
        assert!(cabs(g[0][0]) < 1e-15);
    }

    #[test]
    fn spins_label_indexing() {
        let s = StateVector::<f64>::from_spins("ud").unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
        let z1 = PauliString::<f64>::single(2, 1, Pauli::Z, 1.0).unwrap().to_matrix();
        assert_eq!(s.expectation(&z1).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn generic_over_f32() {
        let x = PauliString::<f32>::parse("XY").unwrap().to_matrix();
        let u = hermitian_expm(&x, 0.3f32).unwrap();
        assert!(u.is_unitary(1e-5));
    }
}
