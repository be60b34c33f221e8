//! Dense pure states of `d` qubits.
//!
//! Basis labels follow the register pictures: qubit 1 is the most significant
//! bit of the label, so `|x_1 x_2 ... x_d>` reads left to right as a binary
//! number. Every operation returns a fresh state; the `*_in_place` variants
//! exist for pipelines that own their state.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex probability amplitude.
pub type Amplitude = Complex64;

/// Default qubit cap: 2^24 amplitudes is about 268 MB.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Tolerance on `sum |a_x|^2 = 1` when a state is constructed from raw data.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Unitarity tolerance for gate matrices, entrywise on `U^dagger U - I`.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// Outcomes with probability at or below this are left out of distribution maps.
pub const DISTRIBUTION_FLOOR: f64 = 1e-15;

/// Post-selection refuses outcomes at or below this probability.
pub const POSTSELECT_FLOOR: f64 = 1e-12;

static MAX_QUBITS: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_QUBITS);

/// Current process-wide qubit cap.
pub fn max_qubits() -> usize {
    MAX_QUBITS.load(Ordering::Relaxed)
}

/// Overrides the qubit cap (the CLI wires `QUNIP_MAX_QUBITS` here).
pub fn set_max_qubits(n: usize) {
    MAX_QUBITS.store(n.max(1), Ordering::Relaxed);
}

pub(crate) fn check_capacity(op: &'static str, d: usize) -> Result<()> {
    let cap = max_qubits();
    if d == 0 {
        return Err(Error::domain(op, "qubit count must be at least 1"));
    }
    if d > cap {
        return Err(Error::capacity(
            op,
            format!("{d} qubits requested, cap is {cap}"),
        ));
    }
    Ok(())
}

/// A 2x2 unitary acting on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitGate {
    m: [[Complex64; 2]; 2],
}

impl SingleQubitGate {
    /// Builds a gate from its entries, rejecting non-unitary matrices.
    pub fn new(u00: Complex64, u01: Complex64, u10: Complex64, u11: Complex64) -> Result<Self> {
        let gate = SingleQubitGate {
            m: [[u00, u01], [u10, u11]],
        };
        if gate.m.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::validation("gate", "non-finite matrix entry"));
        }
        let dev = gate.unitarity_defect();
        if dev > UNITARY_TOLERANCE {
            return Err(Error::validation(
                "gate",
                format!("matrix is not unitary (max |U^dagger U - I| = {dev:e})"),
            ));
        }
        Ok(gate)
    }

    pub fn identity() -> Self {
        Self::diag(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        SingleQubitGate {
            m: [[h, h], [h, -h]],
        }
    }

    pub fn pauli_x() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        SingleQubitGate {
            m: [[z, o], [o, z]],
        }
    }

    pub fn pauli_z() -> Self {
        Self::diag(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    /// `diag(1, e^{i theta})`.
    pub fn phase(theta: f64) -> Self {
        Self::diag(Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, theta))
    }

    /// `e^{i alpha} R_z(beta) R_y(gamma) R_z(delta)`; covers every 2x2 unitary.
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        let (c, s) = ((gamma / 2.0).cos(), (gamma / 2.0).sin());
        let e = |t: f64| Complex64::from_polar(1.0, t);
        SingleQubitGate {
            m: [
                [
                    e(alpha - beta / 2.0 - delta / 2.0) * c,
                    -e(alpha - beta / 2.0 + delta / 2.0) * s,
                ],
                [
                    e(alpha + beta / 2.0 - delta / 2.0) * s,
                    e(alpha + beta / 2.0 + delta / 2.0) * c,
                ],
            ],
        }
    }

    fn diag(a: Complex64, b: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        SingleQubitGate {
            m: [[a, z], [z, b]],
        }
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        SingleQubitGate {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    fn unitarity_defect(&self) -> f64 {
        let m = &self.m;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let entry = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((entry - target).norm());
            }
        }
        worst
    }
}

/// A normalized state vector over `2^d` basis labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<Amplitude>,
}

impl PureState {
    /// Wraps raw amplitudes, checking length, finiteness, and unit norm.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Amplitude>) -> Result<Self> {
        let state = Self::checked_shape("state", num_qubits, amps)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::validation(
                "state",
                format!("squared norm is {norm}, expected 1 within {NORM_TOLERANCE:e}"),
            ));
        }
        Ok(state)
    }

    /// Like [`PureState::from_amplitudes`] but rescales to unit norm first.
    pub fn normalized(num_qubits: usize, amps: Vec<Amplitude>) -> Result<Self> {
        let mut state = Self::checked_shape("state", num_qubits, amps)?;
        let norm = state.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::validation("state", "all amplitudes are zero"));
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn checked_shape(op: &'static str, num_qubits: usize, amps: Vec<Amplitude>) -> Result<Self> {
        check_capacity(op, num_qubits)?;
        if amps.len() != 1usize << num_qubits {
            return Err(Error::validation(
                op,
                format!(
                    "{} amplitudes supplied for {num_qubits} qubits (need {})",
                    amps.len(),
                    1usize << num_qubits
                ),
            ));
        }
        if let Some(i) = amps.iter().position(|a| !a.is_finite()) {
            return Err(Error::validation(
                op,
                format!("amplitude {i} is not finite"),
            ));
        }
        Ok(PureState { num_qubits, amps })
    }

    /// The computational basis state `|x>` on `d` qubits.
    pub fn basis(d: usize, x: usize) -> Result<Self> {
        check_capacity("basis_state", d)?;
        if x >= 1usize << d {
            return Err(Error::domain(
                "basis_state",
                format!("label {x} out of range for {d} qubits"),
            ));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << d];
        amps[x] = Complex64::new(1.0, 0.0);
        Ok(PureState {
            num_qubits: d,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, x: usize) -> Amplitude {
        self.amps[x]
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask of 1-based qubit `q` inside a basis label.
    pub fn qubit_mask(&self, q: usize) -> usize {
        1usize << (self.num_qubits - q)
    }

    fn check_qubit(&self, op: &'static str, q: usize) -> Result<usize> {
        if q == 0 || q > self.num_qubits {
            return Err(Error::domain(
                op,
                format!("qubit {q} out of range 1..={}", self.num_qubits),
            ));
        }
        Ok(self.qubit_mask(q))
    }

    /// `self ⊗ other`; `self` supplies the high-order qubits.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let d = self.num_qubits + other.num_qubits;
        check_capacity("tensor", d)?;
        let mut amps = Vec::with_capacity(1 << d);
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(PureState {
            num_qubits: d,
            amps,
        })
    }

    pub fn apply_single(&self, q: usize, gate: &SingleQubitGate) -> Result<PureState> {
        let mut out = self.clone();
        out.apply_single_in_place(q, gate)?;
        Ok(out)
    }

    pub fn apply_single_in_place(&mut self, q: usize, gate: &SingleQubitGate) -> Result<()> {
        let mask = self.check_qubit("apply_single", q)?;
        self.mix_pairs(mask, 0, gate);
        Ok(())
    }

    /// Applies `gate` to `target` in the branches where every control qubit is 1.
    pub fn apply_controlled(
        &self,
        controls: &[usize],
        target: usize,
        gate: &SingleQubitGate,
    ) -> Result<PureState> {
        let mut out = self.clone();
        out.apply_controlled_in_place(controls, target, gate)?;
        Ok(out)
    }

    pub fn apply_controlled_in_place(
        &mut self,
        controls: &[usize],
        target: usize,
        gate: &SingleQubitGate,
    ) -> Result<()> {
        let op = "apply_controlled";
        let tmask = self.check_qubit(op, target)?;
        let mut cmask = 0usize;
        for &c in controls {
            let m = self.check_qubit(op, c)?;
            if c == target {
                return Err(Error::domain(
                    op,
                    format!("qubit {c} is both control and target"),
                ));
            }
            cmask |= m;
        }
        self.mix_pairs(tmask, cmask, gate);
        Ok(())
    }

    fn mix_pairs(&mut self, tmask: usize, cmask: usize, gate: &SingleQubitGate) {
        let [[u00, u01], [u10, u11]] = gate.m;
        #[cfg(debug_assertions)]
        let before = self.norm_sqr();
        for i in 0..self.amps.len() {
            if i & tmask != 0 || i & cmask != cmask {
                continue;
            }
            let j = i | tmask;
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = u00 * a + u01 * b;
            self.amps[j] = u10 * a + u11 * b;
        }
        #[cfg(debug_assertions)]
        debug_assert!(
            (self.norm_sqr() - before).abs() < 1e-9,
            "gate broke normalization"
        );
    }

    /// Negates every amplitude whose label satisfies `predicate`.
    pub fn phase_flip(&self, predicate: impl Fn(usize) -> bool) -> PureState {
        let mut out = self.clone();
        out.phase_flip_in_place(predicate);
        out
    }

    pub fn phase_flip_in_place(&mut self, predicate: impl Fn(usize) -> bool) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            if predicate(x) {
                *a = -*a;
            }
        }
    }

    /// `<self|other> = sum conj(a_x) b_x`.
    pub fn inner(&self, other: &PureState) -> Result<Amplitude> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::domain(
                "inner",
                format!(
                    "qubit counts differ ({} vs {})",
                    self.num_qubits, other.num_qubits
                ),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`, the phase-blind comparison used throughout.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn check_subset(&self, op: &'static str, qubits: &[usize]) -> Result<Vec<usize>> {
        if qubits.is_empty() {
            return Err(Error::domain(op, "qubit subset is empty"));
        }
        let mut masks = Vec::with_capacity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            masks.push(self.check_qubit(op, q)?);
            if qubits[..i].contains(&q) {
                return Err(Error::domain(op, format!("qubit {q} listed twice")));
            }
        }
        Ok(masks)
    }

    /// Marginal probabilities of the listed qubits, indexed by the outcome
    /// read as a binary number in the listed order.
    pub fn marginal_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let masks = self.check_subset("measure_distribution", qubits)?;
        let mut probs = vec![0.0; 1 << masks.len()];
        for (x, a) in self.amps.iter().enumerate() {
            probs[outcome_index(x, &masks)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Exact Born-rule distribution over the listed qubits, keyed by bitstring.
    /// Outcomes at or below [`DISTRIBUTION_FLOOR`] are omitted.
    pub fn measure_distribution(&self, qubits: &[usize]) -> Result<BTreeMap<String, f64>> {
        let probs = self.marginal_probabilities(qubits)?;
        Ok(probs
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > DISTRIBUTION_FLOOR)
            .map(|(k, p)| (bitstring(k, qubits.len()), p))
            .collect())
    }

    /// Post-selects `qubits` on `outcome` and returns the renormalized state
    /// of the remaining qubits, in their original order.
    pub fn conditional_state(&self, qubits: &[usize], outcome: &str) -> Result<PureState> {
        let op = "conditional_state";
        let masks = self.check_subset(op, qubits)?;
        if masks.len() == self.num_qubits {
            return Err(Error::domain(op, "no qubits left after conditioning"));
        }
        let want = parse_bitstring(op, outcome, masks.len())?;
        let measured: usize = masks.iter().fold(0, |acc, m| acc | m);
        let kept: Vec<usize> = (1..=self.num_qubits)
            .map(|q| self.qubit_mask(q))
            .filter(|m| measured & m == 0)
            .collect();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << kept.len()];
        for (x, a) in self.amps.iter().enumerate() {
            if outcome_index(x, &masks) == want {
                amps[outcome_index(x, &kept)] = *a;
            }
        }
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob <= POSTSELECT_FLOOR {
            return Err(Error::PostSelection {
                op,
                outcome: outcome.to_string(),
                probability: prob,
            });
        }
        let norm = prob.sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(PureState {
            num_qubits: kept.len(),
            amps,
        })
    }
}

/// Gathers the bits selected by `masks` (most significant first) into an index.
pub(crate) fn outcome_index(x: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0, |acc, m| (acc << 1) | usize::from(x & m != 0))
}

/// `width`-character binary rendering of `k`, most significant bit first.
pub fn bitstring(k: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|i| if (k >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a `0`/`1` string of exactly `width` characters.
pub fn parse_bitstring(op: &'static str, s: &str, width: usize) -> Result<usize> {
    if s.len() != width {
        return Err(Error::domain(
            op,
            format!("bitstring {s:?} has length {}, expected {width}", s.len()),
        ));
    }
    s.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::domain(op, format!("bitstring {s:?} contains {c:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> PureState {
        PureState::from_amplitudes(1, vec![c(H, 0.0), c(H, 0.0)]).unwrap()
    }

    fn bell() -> PureState {
        PureState::from_amplitudes(2, vec![c(H, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(H, 0.0)]).unwrap()
    }

    fn assert_amps(s: &PureState, expected: &[Complex64], tol: f64) {
        assert_eq!(s.dim(), expected.len());
        for (x, (a, e)) in s.amplitudes().iter().zip(expected).enumerate() {
            assert!((a - e).norm() <= tol, "amp {x}: {a} vs {e}");
        }
    }

    #[test]
    fn basis_states() {
        assert_amps(
            &PureState::basis(1, 0).unwrap(),
            &[c(1.0, 0.0), c(0.0, 0.0)],
            0.0,
        );
        let s = PureState::basis(2, 3).unwrap();
        assert_amps(&s, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)], 0.0);
        let s = PureState::basis(3, 5).unwrap();
        assert_eq!(s.amplitude(5), c(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn basis_state_errors() {
        assert!(matches!(PureState::basis(2, 4), Err(Error::Domain { .. })));
        assert!(matches!(PureState::basis(0, 0), Err(Error::Domain { .. })));
        assert!(matches!(
            PureState::basis(DEFAULT_MAX_QUBITS + 1, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn from_amplitudes_rejects_bad_input() {
        let err = PureState::from_amplitudes(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
        let err = PureState::from_amplitudes(2, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
        let err = PureState::from_amplitudes(1, vec![c(f64::NAN, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn tensor_products() {
        let z = PureState::basis(1, 0).unwrap();
        let o = PureState::basis(1, 1).unwrap();
        assert_eq!(z.tensor(&o).unwrap(), PureState::basis(2, 1).unwrap());

        let s = plus().tensor(&z).unwrap();
        assert_amps(&s, &[c(H, 0.), c(0., 0.), c(H, 0.), c(0., 0.)], 1e-15);

        let mut acc = plus();
        for _ in 1..5 {
            acc = acc.tensor(&plus()).unwrap();
        }
        let expect = 2f64.powf(-2.5);
        assert!(acc
            .amplitudes()
            .iter()
            .all(|a| (a.re - expect).abs() < 1e-15 && a.im == 0.0));
    }

    #[test]
    fn single_qubit_gates() {
        let s = PureState::basis(1, 0)
            .unwrap()
            .apply_single(1, &SingleQubitGate::hadamard())
            .unwrap();
        assert_amps(&s, &[c(H, 0.), c(H, 0.)], 1e-12);

        let s = PureState::basis(2, 0b10)
            .unwrap()
            .apply_single(2, &SingleQubitGate::pauli_x())
            .unwrap();
        assert_eq!(s, PureState::basis(2, 0b11).unwrap());

        let err = s.apply_single(3, &SingleQubitGate::hadamard()).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn non_unitary_gate_rejected() {
        let one = c(1.0, 0.0);
        let err = SingleQubitGate::new(one, one, c(0.0, 0.0), one).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
        assert!(SingleQubitGate::new(c(0., 0.), c(0., 1.), c(0., 1.), c(0., 0.)).is_ok());
    }

    #[test]
    fn controlled_gates() {
        let x = SingleQubitGate::pauli_x();
        let input =
            PureState::from_amplitudes(2, vec![c(H, 0.), c(0., 0.), c(H, 0.), c(0., 0.)]).unwrap();
        let out = input.apply_controlled(&[1], 2, &x).unwrap();
        assert_eq!(out, bell());

        let s = PureState::basis(2, 0b01).unwrap();
        assert_eq!(s.apply_controlled(&[1], 2, &x).unwrap(), s);

        let h = SingleQubitGate::hadamard();
        assert_eq!(
            bell().apply_controlled(&[], 1, &h).unwrap(),
            bell().apply_single(1, &h).unwrap()
        );

        let err = bell().apply_controlled(&[2], 2, &x).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn phase_flips() {
        assert_eq!(bell().phase_flip(|_| false), bell());

        let flipped = bell().phase_flip(|_| true);
        assert!((flipped.fidelity(&bell()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(flipped.amplitude(0), c(-H, 0.0));

        let u = PureState::from_amplitudes(2, vec![c(0.5, 0.); 4]).unwrap();
        let f = u.phase_flip(|x| x == 3);
        assert_amps(&f, &[c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(-0.5, 0.)], 0.0);
    }

    #[test]
    fn inner_products() {
        let b = bell();
        assert!((b.inner(&b).unwrap() - 1.0).norm() < 1e-12);
        let z = PureState::basis(1, 0).unwrap();
        let o = PureState::basis(1, 1).unwrap();
        assert_eq!(z.inner(&o).unwrap(), c(0.0, 0.0));
        assert!((z.inner(&plus()).unwrap() - c(H, 0.)).norm() < 1e-12);
        assert!(matches!(z.inner(&b), Err(Error::Domain { .. })));
    }

    #[test]
    fn distributions() {
        let d = bell().measure_distribution(&[1, 2]).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d["00"] - 0.5).abs() < 1e-15 && (d["11"] - 0.5).abs() < 1e-15);

        let d = PureState::basis(3, 6)
            .unwrap()
            .measure_distribution(&[1, 2, 3])
            .unwrap();
        assert_eq!(d, BTreeMap::from([("110".to_string(), 1.0)]));

        let d = bell().measure_distribution(&[1]).unwrap();
        assert!((d["0"] - 0.5).abs() < 1e-15 && (d["1"] - 0.5).abs() < 1e-15);

        // listed order decides bit order
        let d = PureState::basis(2, 0b01)
            .unwrap()
            .measure_distribution(&[2, 1])
            .unwrap();
        assert_eq!(d, BTreeMap::from([("10".to_string(), 1.0)]));

        assert!(bell().measure_distribution(&[]).is_err());
        assert!(bell().measure_distribution(&[1, 1]).is_err());
        assert!(bell().measure_distribution(&[3]).is_err());
    }

    #[test]
    fn conditional_states() {
        let rest = bell().conditional_state(&[1], "0").unwrap();
        assert_eq!(rest, PureState::basis(1, 0).unwrap());

        let f = PureState::from_amplitudes(1, vec![c(0.6, 0.), c(0.0, 0.8)]).unwrap();
        let prod = plus().tensor(&f).unwrap();
        for outcome in ["0", "1"] {
            let r = prod.conditional_state(&[1], outcome).unwrap();
            assert!((r.fidelity(&f).unwrap() - 1.0).abs() < 1e-12);
        }

        let mut ghz = vec![c(0., 0.); 8];
        ghz[0] = c(H, 0.);
        ghz[7] = c(H, 0.);
        let ghz = PureState::from_amplitudes(3, ghz).unwrap();
        let err = ghz.conditional_state(&[1, 2], "01").unwrap_err();
        assert!(matches!(err, Error::PostSelection { .. }));

        assert!(matches!(
            bell().conditional_state(&[1, 2], "00"),
            Err(Error::Domain { .. })
        ));
        assert!(bell().conditional_state(&[1], "2").is_err());
    }

    #[test]
    fn bitstrings() {
        assert_eq!(bitstring(5, 3), "101");
        assert_eq!(bitstring(1, 4), "0001");
        assert_eq!(parse_bitstring("t", "0110", 4).unwrap(), 6);
        assert!(parse_bitstring("t", "011", 4).is_err());
    }

    fn random_state(d: usize, raw: &[(f64, f64)]) -> PureState {
        let amps = raw.iter().take(1 << d).map(|&(r, i)| c(r, i)).collect();
        PureState::normalized(d, amps).unwrap()
    }

    fn arb_state() -> impl Strategy<Value = PureState> {
        (1usize..=5).prop_flat_map(|d| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << d)
                .prop_filter("nonzero", |v| {
                    v.iter().any(|&(r, i)| r.abs() + i.abs() > 1e-3)
                })
                .prop_map(move |v| random_state(d, &v))
        })
    }

    fn arb_gate() -> impl Strategy<Value = SingleQubitGate> {
        (0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64)
            .prop_map(|(a, b, g, d)| SingleQubitGate::from_euler(a, b, g, d))
    }

    proptest! {
        #[test]
        fn gates_preserve_norm_and_invert(s in arb_state(), g in arb_gate(), q in 1usize..=5) {
            let q = 1 + (q - 1) % s.num_qubits();
            let out = s.apply_single(q, &g).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
            let back = out.apply_single(q, &g.dagger()).unwrap();
            prop_assert!(back.fidelity(&s).unwrap() >= 1.0 - 1e-10);
            let hh = s.apply_single(q, &SingleQubitGate::hadamard()).unwrap()
                .apply_single(q, &SingleQubitGate::hadamard()).unwrap();
            for (a, b) in hh.amplitudes().iter().zip(s.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn gates_are_linear(
            s in arb_state(), t_raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32),
            g in arb_gate(), alpha in (-1.0f64..1.0, -1.0f64..1.0), beta in (-1.0f64..1.0, -1.0f64..1.0),
        ) {
            let d = s.num_qubits();
            let t = random_state(d, &t_raw);
            let (alpha, beta) = (c(alpha.0, alpha.1), c(beta.0, beta.1));
            let combo: Vec<Complex64> = s.amplitudes().iter().zip(t.amplitudes())
                .map(|(a, b)| alpha * a + beta * b).collect();
            let norm = combo.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let combo = PureState::normalized(d, combo).unwrap();
            let lhs = combo.apply_single(1, &g).unwrap();
            let gs = s.apply_single(1, &g).unwrap();
            let gt = t.apply_single(1, &g).unwrap();
            for x in 0..lhs.dim() {
                let rhs = (alpha * gs.amplitude(x) + beta * gt.amplitude(x)) / norm;
                prop_assert!((lhs.amplitude(x) - rhs).norm() < 1e-12);
            }
        }

        #[test]
        fn basis_measures_to_itself(d in 1usize..=8, x in 0usize..256) {
            let x = x % (1 << d);
            let qubits: Vec<usize> = (1..=d).collect();
            let dist = PureState::basis(d, x).unwrap().measure_distribution(&qubits).unwrap();
            prop_assert_eq!(dist, BTreeMap::from([(bitstring(x, d), 1.0)]));
        }

        #[test]
        fn distributions_sum_to_one(s in arb_state(), pick in 1usize..32) {
            let qubits: Vec<usize> = (1..=s.num_qubits()).filter(|q| pick >> (q - 1) & 1 == 1).collect();
            prop_assume!(!qubits.is_empty());
            let total: f64 = s.marginal_probabilities(&qubits).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn deterministic(s in arb_state(), g in arb_gate()) {
            let a = s.apply_single(1, &g).unwrap();
            let b = s.apply_single(1, &g).unwrap();
            let bits = |p: &PureState| p.amplitudes().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
        }
    }
}
