//! Product-state detection and bipartite Schmidt ranks.
//!
//! A general `d`-qubit state needs `2^d` complex amplitudes; a product of
//! single-qubit states needs only `2d`. The routines here decide which case a
//! state falls into and recover the single-qubit factors when it factorizes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevec::{outcome_index, PureState};

/// Default relative singular-value cutoff.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// A bipartition: `left` qubits against everything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSpec {
    left: Vec<usize>,
}

impl CutSpec {
    pub fn new(left: Vec<usize>) -> Self {
        CutSpec { left }
    }

    /// The cut `{1..k} | {k+1..d}`.
    pub fn prefix(k: usize) -> Self {
        CutSpec {
            left: (1..=k).collect(),
        }
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    fn masks(&self, s: &PureState) -> Result<(Vec<usize>, Vec<usize>)> {
        let d = s.num_qubits();
        if self.left.is_empty() || self.left.len() >= d {
            return Err(Error::domain(
                "schmidt_rank",
                format!(
                    "cut {:?} is not a proper non-empty subset of {d} qubits",
                    self.left
                ),
            ));
        }
        let mut left = Vec::with_capacity(self.left.len());
        for (i, &q) in self.left.iter().enumerate() {
            if q == 0 || q > d || self.left[..i].contains(&q) {
                return Err(Error::domain(
                    "schmidt_rank",
                    format!("cut {:?} has invalid qubit {q}", self.left),
                ));
            }
            left.push(s.qubit_mask(q));
        }
        let right = (1..=d)
            .filter(|q| !self.left.contains(q))
            .map(|q| s.qubit_mask(q))
            .collect();
        Ok((left, right))
    }
}

/// Amplitudes reshaped with left-side labels as rows, right-side labels as columns.
pub fn amplitude_matrix(s: &PureState, cut: &CutSpec) -> Result<DMatrix<Complex64>> {
    let (left, right) = cut.masks(s)?;
    let mut m = DMatrix::zeros(1 << left.len(), 1 << right.len());
    for (x, a) in s.amplitudes().iter().enumerate() {
        m[(outcome_index(x, &left), outcome_index(x, &right))] = *a;
    }
    Ok(m)
}

/// Singular values of the amplitude matrix across `cut`, largest first.
pub fn schmidt_coefficients(s: &PureState, cut: &CutSpec) -> Result<Vec<f64>> {
    let m = amplitude_matrix(s, cut)?;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Number of singular values above `tol * sigma_max`. Rank 1 means the cut factorizes.
pub fn schmidt_rank(s: &PureState, cut: &CutSpec, tol: f64) -> Result<usize> {
    check_tol("schmidt_rank", tol)?;
    let sv = schmidt_coefficients(s, cut)?;
    let cutoff = tol * sv[0];
    Ok(sv.iter().filter(|&&x| x > cutoff).count())
}

fn check_tol(op: &'static str, tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain(op, format!("tolerance {tol} outside (0, 1)")));
    }
    Ok(())
}

/// Ranks at every prefix cut `{1..k} | {k+1..d}`, `k = 1..d-1`.
pub fn prefix_schmidt_ranks(s: &PureState, tol: f64) -> Result<Vec<usize>> {
    (1..s.num_qubits())
        .map(|k| schmidt_rank(s, &CutSpec::prefix(k), tol))
        .collect()
}

/// Outcome of [`factor_product`].
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub is_product: bool,
    /// `(alpha_i, beta_i)` per qubit, present only for product states.
    pub factors: Option<Vec<(Complex64, Complex64)>>,
    pub prefix_schmidt_ranks: Vec<usize>,
    /// `1 - |<product of peeled factors|input>|^2`.
    pub residual: f64,
}

/// Peels qubits left to right and reports whether the state is a full product.
///
/// Each step takes the leading left singular vector of the `2 x 2^{rest}`
/// amplitude matrix as the qubit's factor and projects it out. Factors carry
/// the phase convention that the first non-negligible component is real and
/// positive. A tolerance outside `(0, 1)` falls back to [`DEFAULT_TOLERANCE`].
pub fn factor_product(s: &PureState, tol: f64) -> FactorizationReport {
    let tol = if tol > 0.0 && tol < 1.0 {
        tol
    } else {
        DEFAULT_TOLERANCE
    };
    let ranks = prefix_schmidt_ranks(s, tol).expect("prefix cuts are always valid");
    let factors = peel_factors(s);
    let rebuilt = product_state(&factors);
    let fidelity = rebuilt
        .fidelity(s)
        .expect("peeled product has the input's qubit count");
    let residual = (1.0 - fidelity).max(0.0);
    let is_product = ranks.iter().all(|&r| r == 1) && residual < tol;
    FactorizationReport {
        is_product,
        factors: is_product.then_some(factors),
        prefix_schmidt_ranks: ranks,
        residual,
    }
}

fn peel_factors(s: &PureState) -> Vec<(Complex64, Complex64)> {
    let mut rest: Vec<Complex64> = s.amplitudes().to_vec();
    let mut factors = Vec::with_capacity(s.num_qubits());
    while rest.len() > 2 {
        let half = rest.len() / 2;
        let (top, bottom) = rest.split_at(half);
        let g00: f64 = top.iter().map(|z| z.norm_sqr()).sum();
        let g11: f64 = bottom.iter().map(|z| z.norm_sqr()).sum();
        let g01: Complex64 = top.iter().zip(bottom).map(|(a, b)| a * b.conj()).sum();
        let (u0, u1) = leading_eigvec(g00, g11, g01);
        let next: Vec<Complex64> = top
            .iter()
            .zip(bottom)
            .map(|(a, b)| u0.conj() * a + u1.conj() * b)
            .collect();
        factors.push(phase_fix(u0, u1));
        rest = normalize(next);
    }
    let last = normalize(rest);
    factors.push(phase_fix(last[0], last[1]));
    factors
}

/// Leading eigenvector of the Hermitian matrix `[[g00, g01], [conj g01, g11]]`.
fn leading_eigvec(g00: f64, g11: f64, g01: Complex64) -> (Complex64, Complex64) {
    let mean = 0.5 * (g00 + g11);
    let half_gap = 0.5 * (g00 - g11);
    let lambda = mean + (half_gap * half_gap + g01.norm_sqr()).sqrt();
    // two algebraically equivalent candidates; take the better conditioned one
    let a = (g01, Complex64::new(lambda - g00, 0.0));
    let b = (Complex64::new(lambda - g11, 0.0), g01.conj());
    let na = a.0.norm_sqr() + a.1.norm_sqr();
    let nb = b.0.norm_sqr() + b.1.norm_sqr();
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    if n == 0.0 {
        // degenerate Gram matrix: any unit vector is leading
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    let n = n.sqrt();
    (v.0 / n, v.1 / n)
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
    v
}

const PHASE_FLOOR: f64 = 1e-10;

fn phase_fix(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let pivot = if a.norm() > PHASE_FLOOR { a } else { b };
    let rot = pivot.conj() / pivot.norm();
    let (a, b) = (a * rot, b * rot);
    if a.norm() > PHASE_FLOOR {
        (Complex64::new(a.norm(), 0.0), b)
    } else {
        (a, Complex64::new(b.norm(), 0.0))
    }
}

/// Tensor product of single-qubit factors, qubit 1 first.
pub fn product_state(factors: &[(Complex64, Complex64)]) -> PureState {
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for &(alpha, beta) in factors {
        amps = amps.iter().flat_map(|&z| [z * alpha, z * beta]).collect();
    }
    PureState::normalized(factors.len(), amps).expect("factors are unit vectors")
}

/// `|a00 a11 - a01 a10|`; zero exactly when a two-qubit state is a product.
pub fn two_qubit_tangle(s: &PureState) -> Result<f64> {
    if s.num_qubits() != 2 {
        return Err(Error::domain(
            "two_qubit_tangle",
            format!("needs 2 qubits, state has {}", s.num_qubits()),
        ));
    }
    let a = s.amplitudes();
    Ok((a[0] * a[3] - a[1] * a[2]).norm())
}

/// Complex parameters needed to write down a `d`-qubit state: `2^d` in
/// general, `2d` for a product state.
pub fn description_length(d: u32, product: bool) -> Result<u64> {
    if d == 0 {
        return Err(Error::domain("description_length", "d must be at least 1"));
    }
    let n = if product {
        2u64.checked_mul(u64::from(d))
    } else {
        1u64.checked_shl(d)
    };
    n.ok_or_else(|| Error::capacity("description_length", format!("2^{d} overflows u64")))
}
