//! Dense density matrices over small qubit registers and the elementary gates
//! that act on them.
//!
//! Basis order is big-endian: the qubit at register position 0 is the most
//! significant bit of a basis index, so `a.tensor(&b)` concatenates bit strings
//! left to right. Matrices are immutable values; every operation returns a new
//! matrix.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, UnitBall};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest register a dense matrix may span (4096 × 4096 entries).
pub const MAX_QUBITS: usize = 12;

/// Tolerance for Hermiticity, trace and gate unitarity checks.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Slack allowed below zero for the smallest eigenvalue.
pub const PSD_TOL: f64 = 1e-10;

/// An ordered list of distinct qubit positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterIndex(Vec<usize>);

impl RegisterIndex {
    pub fn new(positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        let positions: Vec<usize> = positions.into_iter().collect();
        for (k, p) in positions.iter().enumerate() {
            if positions[..k].contains(p) {
                return Err(Error::DuplicatePosition(*p));
            }
        }
        Ok(Self(positions))
    }

    /// Positions `0..n`.
    pub fn all(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_within(&self, n_qubits: usize) -> Result<()> {
        match self.0.iter().find(|&&p| p >= n_qubits) {
            Some(&position) => Err(Error::InvalidPosition { position, n_qubits }),
            None => Ok(()),
        }
    }

    /// Reads the bits at these positions out of `index` (first position is the
    /// most significant bit of the result).
    fn gather(&self, index: usize, n_qubits: usize) -> usize {
        self.0.iter().fold(0, |acc, &p| {
            (acc << 1) | ((index >> (n_qubits - 1 - p)) & 1)
        })
    }

    /// Inverse of [`gather`](Self::gather): places the bits of `sub` at these
    /// positions of an otherwise zero index.
    fn scatter(&self, sub: usize, n_qubits: usize) -> usize {
        let k = self.0.len();
        self.0.iter().enumerate().fold(0, |acc, (j, &p)| {
            acc | (((sub >> (k - 1 - j)) & 1) << (n_qubits - 1 - p))
        })
    }

    fn mask(&self, n_qubits: usize) -> usize {
        self.0
            .iter()
            .fold(0, |acc, &p| acc | (1 << (n_qubits - 1 - p)))
    }
}

/// State of an `n`-qubit register: a `2ⁿ × 2ⁿ` positive, Hermitian, trace-one
/// complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Scalar = f64> {
    n_qubits: usize,
    entries: Vec<Complex<T>>,
}

fn c<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

fn cabs<T: Scalar>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

fn check_cap(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            requested: n_qubits,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

impl<T: Scalar> DensityMatrix<T> {
    /// Builds a density matrix from row-major entries, checking finiteness,
    /// Hermiticity and unit trace within [`STRUCTURAL_TOL`].
    pub fn from_entries(n_qubits: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        check_cap(n_qubits)?;
        let dim = 1 << n_qubits;
        if entries.len() != dim * dim {
            return Err(Error::InvalidState(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(z) = entries
            .iter()
            .find(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite(if z.re.is_finite() {
                z.im.to_f64()
            } else {
                z.re.to_f64()
            }));
        }
        let s = Self { n_qubits, entries };
        let herm = s.hermiticity_defect();
        if herm > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = s.trace();
        if (tr.re - T::one()).abs().to_f64() > STRUCTURAL_TOL
            || tr.im.abs().to_f64() > STRUCTURAL_TOL
        {
            return Err(Error::InvalidState(format!(
                "trace is {} + {}i",
                tr.re, tr.im
            )));
        }
        Ok(s)
    }

    /// Diagonal state with the given probabilities.
    pub fn from_diagonal(probs: &[T]) -> Result<Self> {
        let dim = probs.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_cap(n_qubits)?;
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::OutOfRange {
                    value: p.to_f64(),
                    min: 0.0,
                    max: 1.0,
                });
            }
            entries[i * dim + i] = c(p);
        }
        Self::from_entries(n_qubits, entries)
    }

    /// The classical state `⊗ᵢ |bᵢ⟩⟨bᵢ|`.
    pub fn classical(bits: &[bool]) -> Result<Self> {
        check_cap(bits.len())?;
        let dim = 1usize << bits.len();
        let index = bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b));
        let mut probs = vec![T::zero(); dim];
        probs[index] = T::one();
        Self::from_diagonal(&probs)
    }

    /// Pure single-qubit state `√(1−p)|0⟩ + √p|1⟩`, whose `S₁₁` is exactly `p`.
    pub fn pure_qubit(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::OutOfRange {
                value: p.to_f64(),
                min: 0.0,
                max: 1.0,
            });
        }
        let q = T::one() - p;
        let off = c((p * q).sqrt());
        Self::from_entries(1, vec![c(q), off, off, c(p)])
    }

    /// Single-qubit state `½(I + r·σ)` for a Bloch vector with `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > 1.0 + STRUCTURAL_TOL {
            return Err(Error::OutOfRange {
                value: norm,
                min: 0.0,
                max: 1.0,
            });
        }
        let half = T::from_f64(0.5);
        let [x, y, z] = r.map(T::from_f64);
        Self::from_entries(
            1,
            vec![
                c(half * (T::one() + z)),
                Complex::new(half * x, -(half * y)),
                Complex::new(half * x, half * y),
                c(half * (T::one() - z)),
            ],
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim() + col]
    }

    /// Real part of the `i`-th diagonal entry: the probability of basis state `i`.
    pub fn probability(&self, i: usize) -> T {
        self.get(i, i).re
    }

    /// For a single qubit, `S₁₁`: the probability of measuring `|1⟩`.
    pub fn p_one(&self) -> T {
        self.probability(self.dim() - 1)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim()).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self.get(i, i)
        })
    }

    /// `max |S[i][j] − conj(S[j][i])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = T::zero();
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max(cabs(self.get(i, j) - self.get(j, i).conj()));
            }
        }
        worst.to_f64()
    }

    /// Largest entrywise modulus of `self − other`; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n_qubits != other.n_qubits {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| cabs(*a - *b))
            .fold(T::zero(), Scalar::max)
            .to_f64()
    }

    /// Positive semidefiniteness up to `slack`: succeeds iff `S + slack·I`
    /// admits a Cholesky factorisation.
    pub fn is_positive_semidefinite(&self, slack: f64) -> bool {
        let dim = self.dim();
        let slack = T::from_f64(slack);
        let mut l = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for j in 0..dim {
            let mut d = self.get(j, j).re + slack;
            for k in 0..j {
                d = d - l[j * dim + k].norm_sqr();
            }
            if d.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
                return false;
            }
            let d = d.sqrt();
            l[j * dim + j] = c(d);
            for i in j + 1..dim {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v = v - l[i * dim + k] * l[j * dim + k].conj();
                }
                l[i * dim + j] = v / c(d);
            }
        }
        true
    }

    /// Full admissibility check, including positivity within [`PSD_TOL`].
    pub fn verify(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - T::one()).abs().to_f64() > STRUCTURAL_TOL {
            return Err(Error::InvalidState(format!("trace is {}", tr.re)));
        }
        if !self.is_positive_semidefinite(PSD_TOL) {
            return Err(Error::InvalidState("not positive semidefinite".into()));
        }
        Ok(())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n_qubits = self.n_qubits + other.n_qubits;
        check_cap(n_qubits)?;
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            let (ia, ib) = (i / db, i % db);
            for j in 0..dim {
                let (ja, jb) = (j / db, j % db);
                entries.push(self.get(ia, ja) * other.get(ib, jb));
            }
        }
        Ok(Self { n_qubits, entries })
    }

    /// Restriction to the qubits in `keep`, in that order: the trace over every
    /// other position.
    pub fn partial_trace(&self, keep: &RegisterIndex) -> Result<Self> {
        let n = self.n_qubits;
        keep.check_within(n)?;
        let traced = RegisterIndex((0..n).filter(|p| !keep.0.contains(p)).collect());
        let dk = 1 << keep.len();
        let dt = 1 << traced.len();
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dk * dk];
        for i in 0..dk {
            let bi = keep.scatter(i, n);
            for j in 0..dk {
                let bj = keep.scatter(j, n);
                let mut acc = Complex::new(T::zero(), T::zero());
                for t in 0..dt {
                    let bt = traced.scatter(t, n);
                    acc = acc + self.get(bi | bt, bj | bt);
                }
                entries[i * dk + j] = acc;
            }
        }
        Ok(Self {
            n_qubits: keep.len(),
            entries,
        })
    }

    /// `S ↦ (U ⊗ I) S (U ⊗ I)†` with `U` acting on the positions in `at`.
    pub fn conjugate<G: Operator<T> + ?Sized>(&self, gate: &G, at: &RegisterIndex) -> Result<Self> {
        if gate.arity() != at.len() {
            return Err(Error::ArityMismatch {
                gate: gate.label().to_string(),
                expected: gate.arity(),
                got: at.len(),
            });
        }
        at.check_within(self.n_qubits)?;
        Ok(gate.conjugate_embedded(self, at))
    }

    /// True iff every off-diagonal entry has modulus at most `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let dim = self.dim();
        let tol = T::from_f64(tol);
        (0..dim).all(|i| (0..dim).all(|j| i == j || cabs(self.get(i, j)) <= tol))
    }

    /// Compares the state with the tensor product of its marginals over `parts`,
    /// which must partition every position exactly once.
    pub fn decompose(&self, parts: &[RegisterIndex], tol: f64) -> Result<Decomposition<T>> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        for part in parts {
            part.check_within(n)?;
            for &p in part.positions() {
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::NotAPartition { n_qubits: n });
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::NotAPartition { n_qubits: n });
        }

        let factors = parts
            .iter()
            .map(|part| self.partial_trace(part))
            .collect::<Result<Vec<_>>>()?;
        let dim = self.dim();
        let mut worst = T::zero();
        for i in 0..dim {
            for j in 0..dim {
                let product = parts
                    .iter()
                    .zip(&factors)
                    .fold(c(T::one()), |acc, (part, f)| {
                        acc * f.get(part.gather(i, n), part.gather(j, n))
                    });
                worst = worst.max(cabs(product - self.get(i, j)));
            }
        }
        let max_deviation = worst.to_f64();
        Ok(Decomposition {
            decomposable: max_deviation <= tol,
            max_deviation,
            factors,
        })
    }

    pub fn is_decomposable(&self, parts: &[RegisterIndex], tol: f64) -> Result<bool> {
        Ok(self.decompose(parts, tol)?.decomposable)
    }

    /// Narrowed to `f64`.
    pub fn to_f64(&self) -> DensityMatrix<f64> {
        DensityMatrix {
            n_qubits: self.n_qubits,
            entries: self
                .entries
                .iter()
                .map(|z| Complex::new(z.re.to_f64(), z.im.to_f64()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> MatrixJson {
        let dim = self.dim();
        let row = |i: usize, part: fn(&Complex<T>) -> T| -> Vec<f64> {
            self.entries[i * dim..(i + 1) * dim]
                .iter()
                .map(|z| part(z).to_f64())
                .collect()
        };
        MatrixJson {
            n: self.n_qubits,
            re: (0..dim).map(|i| row(i, |z| z.re)).collect(),
            im: (0..dim).map(|i| row(i, |z| z.im)).collect(),
        }
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        check_cap(json.n)?;
        let dim = 1 << json.n;
        if json.re.len() != dim
            || json.im.len() != dim
            || json.re.iter().chain(&json.im).any(|r| r.len() != dim)
        {
            return Err(Error::InvalidState(format!(
                "expected {dim}x{dim} re/im arrays"
            )));
        }
        let entries = json
            .re
            .iter()
            .flatten()
            .zip(json.im.iter().flatten())
            .map(|(&re, &im)| Complex::new(T::from_f64(re), T::from_f64(im)))
            .collect();
        Self::from_entries(json.n, entries)
    }
}

/// Serialised form of a density matrix: `{"n":k,"re":[[...]],"im":[[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T: Scalar = f64> {
    pub decomposable: bool,
    /// Largest entrywise deviation of the reassembled product from the state.
    pub max_deviation: f64,
    /// Marginal on each part, in the order the parts were given.
    pub factors: Vec<DensityMatrix<T>>,
}

/// Samples a single-qubit state with its Bloch vector uniform in the unit ball.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix<f64> {
    let r: [f64; 3] = UnitBall.sample(rng);
    DensityMatrix::from_bloch(r).expect("unit-ball sample is a valid Bloch vector")
}

/// A gate that can act on a register by conjugation.
pub trait Operator<T: Scalar> {
    fn label(&self) -> &str;

    /// Number of qubits the gate acts on.
    fn arity(&self) -> usize;

    /// Row-major `2^arity × 2^arity` matrix.
    fn matrix(&self) -> Vec<Complex<T>>;

    /// `(U ⊗ I) S (U ⊗ I)†`; positions are already validated.
    fn conjugate_embedded(&self, s: &DensityMatrix<T>, at: &RegisterIndex) -> DensityMatrix<T> {
        dense_conjugate(&self.matrix(), s, at)
    }
}

fn dense_conjugate<T: Scalar>(
    u: &[Complex<T>],
    s: &DensityMatrix<T>,
    at: &RegisterIndex,
) -> DensityMatrix<T> {
    let n = s.n_qubits;
    let dim = s.dim();
    let k = 1 << at.len();
    let clear = !at.mask(n);
    let zero = Complex::new(T::zero(), T::zero());

    // left = (U ⊗ I) S
    let mut left = vec![zero; dim * dim];
    for i in 0..dim {
        let (si, rest) = (at.gather(i, n), i & clear);
        for a in 0..k {
            let uia = u[si * k + a];
            if uia == zero {
                continue;
            }
            let row = rest | at.scatter(a, n);
            for j in 0..dim {
                left[i * dim + j] = left[i * dim + j] + uia * s.get(row, j);
            }
        }
    }
    // out = left (U ⊗ I)†
    let mut entries = vec![zero; dim * dim];
    for j in 0..dim {
        let (sj, rest) = (at.gather(j, n), j & clear);
        for b in 0..k {
            let ujb = u[sj * k + b].conj();
            if ujb == zero {
                continue;
            }
            let col = rest | at.scatter(b, n);
            for i in 0..dim {
                entries[i * dim + j] = entries[i * dim + j] + left[i * dim + col] * ujb;
            }
        }
    }
    DensityMatrix {
        n_qubits: n,
        entries,
    }
}

/// Gate given by an explicit unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryGate<T: Scalar = f64> {
    label: String,
    arity: usize,
    matrix: Vec<Complex<T>>,
}

impl<T: Scalar> UnitaryGate<T> {
    /// Checks shape and `‖U†U − I‖_max ≤ 1e−12`.
    pub fn new(label: impl Into<String>, arity: usize, matrix: Vec<Complex<T>>) -> Result<Self> {
        let label = label.into();
        let k = 1 << arity;
        if matrix.len() != k * k {
            return Err(Error::InvalidGate {
                gate: label,
                reason: format!("expected {} entries, got {}", k * k, matrix.len()),
            });
        }
        let gate = Self {
            label,
            arity,
            matrix,
        };
        let defect = unitarity_defect(&gate.matrix, arity);
        if defect > STRUCTURAL_TOL {
            return Err(Error::InvalidGate {
                gate: gate.label,
                reason: format!("not unitary (defect {defect:e})"),
            });
        }
        Ok(gate)
    }
}

impl<T: Scalar> Operator<T> for UnitaryGate<T> {
    fn label(&self) -> &str {
        &self.label
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn matrix(&self) -> Vec<Complex<T>> {
        self.matrix.clone()
    }

    fn conjugate_embedded(&self, s: &DensityMatrix<T>, at: &RegisterIndex) -> DensityMatrix<T> {
        dense_conjugate(&self.matrix, s, at)
    }
}

/// `‖U†U − I‖_max` for a row-major matrix on `arity` qubits.
pub fn unitarity_defect<T: Scalar>(u: &[Complex<T>], arity: usize) -> f64 {
    let k = 1 << arity;
    let mut worst = T::zero();
    for i in 0..k {
        for j in 0..k {
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 0..k {
                acc = acc + u[r * k + i].conj() * u[r * k + j];
            }
            if i == j {
                acc = acc - c(T::one());
            }
            worst = worst.max(cabs(acc));
        }
    }
    worst.to_f64()
}

/// A classical operator: the unitary induced by a bijection of basis states,
/// `U|i⟩ = |perm[i]⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationGate {
    label: String,
    arity: usize,
    perm: Vec<usize>,
}

impl PermutationGate {
    pub fn new(label: impl Into<String>, perm: Vec<usize>) -> Result<Self> {
        let label = label.into();
        if !perm.len().is_power_of_two() {
            return Err(Error::InvalidGate {
                gate: label,
                reason: format!("{} images is not a power of two", perm.len()),
            });
        }
        let mut hit = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut hit[p], true) {
                return Err(Error::InvalidGate {
                    gate: label,
                    reason: "not a bijection".into(),
                });
            }
        }
        Ok(Self {
            arity: perm.len().trailing_zeros() as usize,
            label,
            perm,
        })
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            label: "I".into(),
            arity,
            perm: (0..1 << arity).collect(),
        }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Image of basis index `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.perm[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                gate: self.label.clone(),
                expected: self.arity,
                got: other.arity,
            });
        }
        Self::new(
            format!("{}*{}", self.label, other.label),
            other.perm.iter().map(|&i| self.perm[i]).collect(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }
}

impl<T: Scalar> Operator<T> for PermutationGate {
    fn label(&self) -> &str {
        &self.label
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn matrix(&self) -> Vec<Complex<T>> {
        let k = self.perm.len();
        let mut m = vec![Complex::new(T::zero(), T::zero()); k * k];
        for (i, &p) in self.perm.iter().enumerate() {
            m[p * k + i] = c(T::one());
        }
        m
    }

    /// Permutes rows and columns: `S'[π(i)][π(j)] = S[i][j]`, no arithmetic.
    fn conjugate_embedded(&self, s: &DensityMatrix<T>, at: &RegisterIndex) -> DensityMatrix<T> {
        let n = s.n_qubits;
        let dim = s.dim();
        let clear = !at.mask(n);
        let image: Vec<usize> = (0..dim)
            .map(|i| (i & clear) | at.scatter(self.perm[at.gather(i, n)], n))
            .collect();
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[image[i] * dim + image[j]] = s.get(i, j);
            }
        }
        DensityMatrix {
            n_qubits: n,
            entries,
        }
    }
}

/// Negation: `|0⟩ ↦ |1⟩`, `|1⟩ ↦ |0⟩`.
pub fn gate_not() -> PermutationGate {
    PermutationGate {
        label: "NOT".into(),
        arity: 1,
        perm: vec![1, 0],
    }
}

/// Controlled NOT on (control, target): `|x, y⟩ ↦ |x, x ⊕ y⟩`.
pub fn gate_cnot() -> PermutationGate {
    PermutationGate {
        label: "CNOT".into(),
        arity: 2,
        perm: vec![0, 1, 3, 2],
    }
}

/// Classical operator whose second output qubit carries `1 − (x+y) + 2xy`:
/// `|1,1⟩ ↦ |1,1⟩`, `|1,0⟩ ↦ |0,0⟩`, `|0,0⟩ ↦ |0,1⟩`, `|0,1⟩ ↦ |1,0⟩`.
pub fn gate_sigma2() -> PermutationGate {
    PermutationGate {
        label: "SIGMA2".into(),
        arity: 2,
        perm: vec![1, 2, 0, 3],
    }
}

/// 45° rotation in `span{|01⟩, |10⟩}` fixing `|00⟩` and `|11⟩`:
/// `|1,0⟩ ↦ λ(|1,0⟩ + |0,1⟩)`, `|0,1⟩ ↦ λ(−|1,0⟩ + |0,1⟩)`, `λ = 1/√2`.
/// On diagonal product inputs both output marginals carry `(x+y)/2`.
pub fn gate_mean_unitary<T: Scalar>() -> UnitaryGate<T> {
    let zero = c(T::zero());
    let one = c(T::one());
    let lambda = c(T::one() / T::from_f64(2.0).sqrt());
    #[rustfmt::skip]
    let matrix = vec![
        one,  zero,    zero,   zero,
        zero, lambda,  lambda, zero,
        zero, -lambda, lambda, zero,
        zero, zero,    zero,   one,
    ];
    UnitaryGate {
        label: "MEAN".into(),
        arity: 2,
        matrix,
    }
}
