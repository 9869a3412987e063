//! Jacobi matrices, their spectral measures, and the maps between them.
//!
//! A Jacobi matrix is stored by its diagonal `b_1..b_n` and non-negative
//! off-diagonal `a_1..a_{n-1}`. Its spectral measure with respect to `e_1` has
//! atoms at the eigenvalues, weighted by squared first eigenvector components.

mod householder;
mod lanczos;
mod tql;

pub use householder::{tridiagonalize, DenseHermitian, Tridiagonalization};
pub use lanczos::reconstruct_jacobi;
pub use tql::symmetric_tridiagonal_eigen;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::poly::ComplexPoly;

/// Atoms closer than this fraction of the spectral diameter count as one.
pub const ATOM_SEPARATION: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJacobi")]
pub struct JacobiMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

#[derive(Deserialize)]
struct RawJacobi {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TryFrom<RawJacobi> for JacobiMatrix {
    type Error = Error;

    fn try_from(raw: RawJacobi) -> Result<Self> {
        JacobiMatrix::new(raw.diag, raw.offdiag)
    }
}

impl JacobiMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Empty("Jacobi diagonal"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(param(format!("off-diagonal has length {}, expected {}", offdiag.len(), diag.len() - 1)));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(param("Jacobi coefficients must be finite"));
        }
        if let Some(i) = offdiag.iter().position(|&a| a < 0.0) {
            return Err(param(format!("off-diagonal {i} is negative")));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = self.diag[i];
            if i + 1 < n {
                m[i * n + i + 1] = self.offdiag[i];
                m[(i + 1) * n + i] = self.offdiag[i];
            }
        }
        m
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i] } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Splits at exactly-zero couplings into irreducible diagonal blocks.
    pub fn blocks(&self) -> Vec<JacobiMatrix> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 0..self.n() {
            if i + 1 == self.n() || self.offdiag[i] == 0.0 {
                out.push(JacobiMatrix { diag: self.diag[start..=i].to_vec(), offdiag: self.offdiag[start..i].to_vec() });
                start = i + 1;
            }
        }
        out
    }

    /// The block that `e_1` lives in.
    pub fn leading_block(&self) -> JacobiMatrix {
        self.blocks().swap_remove(0)
    }

    /// `<e_1, J^k e_1>` for `k = 0..count`.
    pub fn e1_moments(&self, count: usize) -> Vec<f64> {
        let n = self.n();
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(v[0]);
            let mut next = vec![0.0; n];
            for i in 0..n {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * v[i + 1];
                }
                next[i] = s;
            }
            v = next;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bidiagonal {
    main: Vec<f64>,
    upper: Vec<f64>,
}

impl Bidiagonal {
    pub fn new(main: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if main.is_empty() {
            return Err(Error::Empty("bidiagonal main diagonal"));
        }
        if upper.len() + 1 != main.len() {
            return Err(param("bidiagonal upper diagonal must have length n-1"));
        }
        if main.iter().chain(&upper).any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(param("bidiagonal entries must be finite and non-negative"));
        }
        Ok(Self { main, upper })
    }

    pub fn n(&self) -> usize {
        self.main.len()
    }

    pub fn main(&self) -> &[f64] {
        &self.main
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

/// `J = Bᵀ B`: `b_j = x_j² + y_{j-1}²`, `a_j = x_j y_j`.
pub fn bidiag_square(b: &Bidiagonal) -> JacobiMatrix {
    let n = b.n();
    let diag = (0..n)
        .map(|j| {
            let y_prev = if j > 0 { b.upper[j - 1] } else { 0.0 };
            b.main[j] * b.main[j] + y_prev * y_prev
        })
        .collect();
    let offdiag = (0..n - 1).map(|j| b.main[j] * b.upper[j]).collect();
    JacobiMatrix { diag, offdiag }
}

/// Discrete probability measure `Σ w_j δ_{λ_j}`, atoms sorted by λ descending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<RawMeasure> for SpectralMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        SpectralMeasure::new(raw.atoms)
    }
}

impl SpectralMeasure {
    /// Validates positivity, unit mass (to 1e-12) and distinct atoms.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = Self::from_atoms_unchecked(atoms);
        m.validate()?;
        Ok(m)
    }

    /// Sorts the atoms but skips validation.
    pub fn from_atoms_unchecked(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self { atoms }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::Empty("spectral measure"));
        }
        if self.atoms.iter().any(|&(l, w)| !l.is_finite() || !w.is_finite()) {
            return Err(param("spectral measure atoms must be finite"));
        }
        if let Some(&(l, w)) = self.atoms.iter().find(|a| a.1 <= 0.0) {
            return Err(Error::DegenerateMeasure(format!("atom at {l} has weight {w}")));
        }
        let total: f64 = self.weights().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateMeasure(format!("weights sum to {total}")));
        }
        self.check_separation()
    }

    fn check_separation(&self) -> Result<()> {
        let diameter = self.atoms[0].0 - self.atoms[self.atoms.len() - 1].0;
        let tol = ATOM_SEPARATION * diameter;
        for pair in self.atoms.windows(2) {
            if pair[0].0 - pair[1].0 <= tol {
                return Err(Error::DegenerateMeasure(format!("atoms {} and {} coincide", pair[0].0, pair[1].0)));
            }
        }
        Ok(())
    }

    /// Rescales weights to sum to exactly one (up to rounding).
    pub fn normalized(mut self) -> Self {
        let total: f64 = self.weights().sum();
        for a in &mut self.atoms {
            a.1 /= total;
        }
        self
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn lambdas(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.0)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.1)
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|&(l, w)| w * l.powi(k)).sum()
    }

    /// Index of the atom closest to zero.
    pub fn zero_atom(&self) -> usize {
        (0..self.atoms.len()).min_by(|&i, &j| self.atoms[i].0.abs().total_cmp(&self.atoms[j].0.abs())).expect("non-empty measure")
    }
}

/// Spectral measure of an irreducible Jacobi matrix.
pub fn spectral_measure(j: &JacobiMatrix) -> Result<SpectralMeasure> {
    if let Some(index) = j.offdiag.iter().position(|&a| a == 0.0) {
        return Err(Error::Reducible { index });
    }
    let (vals, first) = symmetric_tridiagonal_eigen(&j.diag, &j.offdiag)?;
    let atoms = vals.into_iter().zip(first).map(|(l, u)| (l, u * u)).collect();
    Ok(SpectralMeasure::from_atoms_unchecked(atoms).normalized())
}

/// Monic coefficients `κ_0..κ_n` of `det(z - J - shift·E₁₁)`.
pub fn char_poly_coeffs(j: &JacobiMatrix, shift: Complex64) -> ComplexPoly {
    let n = j.n();
    // D_k = (z - b_k) D_{k-1} - a_{k-1}² D_{k-2}, entry (1,1) carries the shift
    let mut prev: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    let mut cur: Vec<Complex64> = vec![-(j.diag[0] + shift), Complex64::new(1.0, 0.0)];
    for k in 1..n {
        let a2 = j.offdiag[k - 1] * j.offdiag[k - 1];
        let mut next = vec![Complex64::new(0.0, 0.0); k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * j.diag[k];
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c * a2;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    ComplexPoly::from_monic(cur).expect("recurrence yields a monic polynomial")
}
