//! Algorithm suite: database-state preparation, the Boolean-function lookup
//! circuit built from it, Bernstein-Vazirani, Deutsch-Jozsa, and Grover.
//!
//! Every run records the state after each logical stage and audits it with
//! [`factor_product`], so the entanglement present at each stage is part of
//! the result rather than something to be inferred.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::boolean::{classify, full_pattern_set, parity, FunctionClass, PatternSet, TruthTable};
use crate::entanglement::{factor_product, FactorizationReport, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::statevec::{bitstring, check_capacity, PureState, SingleQubitGate};

/// Probability mass at which an outcome counts as certain.
pub const CERTAINTY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub label: String,
    pub state: PureState,
}

/// The states a run passed through, plus its two cost meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    /// Pattern-insertion steps charged to database preparation.
    pub prep_step_count: usize,
    pub oracle_calls: usize,
}

impl RunTrace {
    fn new() -> Self {
        RunTrace {
            steps: Vec::new(),
            prep_step_count: 0,
            oracle_calls: 0,
        }
    }

    fn record(&mut self, label: impl Into<String>, state: &PureState) {
        debug_assert!(self
            .steps
            .first()
            .is_none_or(|s| s.state.num_qubits() == state.num_qubits()));
        self.steps.push(TraceStep {
            label: label.into(),
            state: state.clone(),
        });
    }

    pub fn final_state(&self) -> &PureState {
        &self.steps.last().expect("traces are never empty").state
    }
}

/// A trace with one factorization report per recorded step.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditedRun {
    pub trace: RunTrace,
    pub audits: Vec<FactorizationReport>,
}

impl AuditedRun {
    pub fn audit(trace: RunTrace, tol: f64) -> Self {
        let audits = trace
            .steps
            .iter()
            .map(|s| factor_product(&s.state, tol))
            .collect();
        AuditedRun { trace, audits }
    }

    pub fn steps(&self) -> impl Iterator<Item = (&TraceStep, &FactorizationReport)> {
        self.trace.steps.iter().zip(&self.audits)
    }
}

/// All `2^d` amplitudes equal to `2^{-d/2}`.
pub fn uniform_superposition(d: usize) -> Result<PureState> {
    check_capacity("uniform_superposition", d)?;
    let amp = Complex64::new((-(d as f64) / 2.0).exp2(), 0.0);
    PureState::from_amplitudes(d, vec![amp; 1 << d])
}

/// Applies a Hadamard to each of `qubits`.
pub fn hadamard_layer(s: &PureState, qubits: impl IntoIterator<Item = usize>) -> Result<PureState> {
    let h = SingleQubitGate::hadamard();
    let mut out = s.clone();
    for q in qubits {
        out.apply_single_in_place(q, &h)?;
    }
    Ok(out)
}

/// Database state on `d + 2` qubits:
/// `(2|p|)^{-1/2} sum_{(x,b) in p} |x> (|0> - |1>) |b>`.
///
/// Qubit `d + 1` is the ancilla and qubit `d + 2` carries `B(x)`. The
/// preparation is charged one step per pattern.
pub fn prepare_database(p: &PatternSet) -> Result<(PureState, usize)> {
    let d = p.d();
    check_capacity("prepare_database", d + 2)?;
    if p.is_empty() {
        return Err(Error::domain("prepare_database", "pattern set is empty"));
    }
    let amp = (2.0 * p.len() as f64).sqrt().recip();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (d + 2)];
    for &(x, b) in p.pairs() {
        let base = (x << 2) | usize::from(b);
        amps[base] = Complex64::new(amp, 0.0);
        amps[base | 0b10] = Complex64::new(-amp, 0.0);
    }
    Ok((PureState::from_amplitudes(d + 2, amps)?, p.len()))
}

fn check_register(op: &'static str, s: &PureState, a: usize, d: usize) -> Result<()> {
    if d == 0 || d > s.num_qubits() {
        return Err(Error::domain(
            op,
            format!(
                "register width {d} invalid for a {}-qubit state",
                s.num_qubits()
            ),
        ));
    }
    if a >> d != 0 {
        return Err(Error::domain(
            op,
            format!("hidden string {a} out of range for d = {d}"),
        ));
    }
    Ok(())
}

/// Phase oracle `|x> -> (-1)^{x.a} |x>` on the first `d` qubits.
///
/// Equal to a cascade of CNOTs from every qubit with `a_i = 1` onto an
/// ancilla prepared in `(|0> - |1>)/sqrt 2`; see [`bv_oracle_cnot_cascade`].
pub fn bv_oracle(s: &PureState, a: usize, d: usize) -> Result<PureState> {
    check_register("bv_oracle", s, a, d)?;
    let shift = s.num_qubits() - d;
    Ok(s.phase_flip(|label| parity((label >> shift) & a)))
}

/// The gate-level oracle: CNOTs controlled by each qubit `i` with `a_i = 1`,
/// all targeting `ancilla`.
pub fn bv_oracle_cnot_cascade(
    s: &PureState,
    a: usize,
    d: usize,
    ancilla: usize,
) -> Result<PureState> {
    check_register("bv_oracle", s, a, d)?;
    if ancilla <= d {
        return Err(Error::domain(
            "bv_oracle",
            format!("ancilla {ancilla} overlaps the {d}-qubit register"),
        ));
    }
    let x = SingleQubitGate::pauli_x();
    let mut out = s.clone();
    for i in 1..=d {
        if (a >> (d - i)) & 1 == 1 {
            out.apply_controlled_in_place(&[i], ancilla, &x)?;
        }
    }
    Ok(out)
}

fn argmax(probs: &[f64]) -> usize {
    probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Single-query recovery of a hidden string `a`.
pub fn bernstein_vazirani(d: usize, a: usize) -> Result<(usize, AuditedRun)> {
    let mut trace = RunTrace::new();
    let s = uniform_superposition(d)?;
    trace.record("uniform superposition", &s);
    let s = bv_oracle(&s, a, d)?;
    trace.oracle_calls += 1;
    trace.record(
        format!("oracle: CNOT cascade on a = {}", bitstring(a, d)),
        &s,
    );
    let s = hadamard_layer(&s, 1..=d)?;
    trace.record("hadamard layer", &s);
    let register: Vec<usize> = (1..=d).collect();
    let recovered = argmax(&s.marginal_probabilities(&register)?);
    Ok((recovered, AuditedRun::audit(trace, DEFAULT_TOLERANCE)))
}

/// Result of the lookup circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupOutcome {
    pub final_state: PureState,
    /// Distribution over the argument register (qubits `1..=d`).
    pub first_register: BTreeMap<String, f64>,
    /// Distribution of the `B` qubit given the register reads `a`; `None`
    /// when that reading has zero probability.
    pub conditional_b: Option<BTreeMap<String, f64>>,
    pub postselection_failed: bool,
    pub run: AuditedRun,
}

/// Database preparation from the full table, oracle on the argument
/// register, then a Hadamard layer on the argument register.
pub fn lookup_pipeline(t: &TruthTable, a: usize) -> Result<LookupOutcome> {
    check_capacity("lookup_pipeline", t.d() + 2)?;
    lookup_pipeline_patterns(&full_pattern_set(t)?, a)
}

/// Same circuit over a restricted pattern set.
pub fn lookup_pipeline_patterns(p: &PatternSet, a: usize) -> Result<LookupOutcome> {
    let d = p.d();
    if a >> d != 0 {
        return Err(Error::domain(
            "lookup_pipeline",
            format!("stimulus {a} out of range for d = {d}"),
        ));
    }
    let mut trace = RunTrace::new();
    let (s, steps) = prepare_database(p)?;
    trace.prep_step_count = steps;
    trace.record(format!("database preparation ({steps} pattern steps)"), &s);
    let s = bv_oracle(&s, a, d)?;
    trace.oracle_calls += 1;
    trace.record(
        format!("oracle: CNOT cascade on a = {}", bitstring(a, d)),
        &s,
    );
    let s = hadamard_layer(&s, 1..=d)?;
    trace.record("hadamard layer on argument register", &s);

    let register: Vec<usize> = (1..=d).collect();
    let first_register = s.measure_distribution(&register)?;
    let (conditional_b, postselection_failed) =
        match s.conditional_state(&register, &bitstring(a, d)) {
            Ok(rest) => (Some(rest.measure_distribution(&[2])?), false),
            Err(Error::PostSelection { .. }) => (None, true),
            Err(e) => return Err(e),
        };
    Ok(LookupOutcome {
        final_state: s,
        first_register,
        conditional_b,
        postselection_failed,
        run: AuditedRun::audit(trace, DEFAULT_TOLERANCE),
    })
}

/// Phase-oracle Deutsch-Jozsa on the `d`-qubit register.
pub fn deutsch_jozsa(t: &TruthTable) -> Result<(FunctionClass, AuditedRun)> {
    let class = classify(t);
    if class == FunctionClass::Neither {
        return Err(Error::Precondition {
            op: "deutsch_jozsa",
            detail: format!(
                "function with {} ones of {} is neither constant nor balanced",
                t.ones(),
                t.values().len()
            ),
        });
    }
    let d = t.d();
    let mut trace = RunTrace::new();
    let s = uniform_superposition(d)?;
    trace.record("uniform superposition", &s);
    let s = s.phase_flip(|x| t.eval(x));
    trace.oracle_calls += 1;
    trace.record("phase oracle (-1)^B(x)", &s);
    let s = hadamard_layer(&s, 1..=d)?;
    trace.record("hadamard layer", &s);
    let verdict = if s.amplitude(0).norm_sqr() >= 1.0 - CERTAINTY_TOLERANCE {
        FunctionClass::Constant
    } else {
        FunctionClass::Balanced
    };
    Ok((verdict, AuditedRun::audit(trace, DEFAULT_TOLERANCE)))
}

/// Textbook Grover search: `iterations` rounds of marked-sign flip followed
/// by inversion about the mean. Returns the final probability of `marked`.
pub fn grover(d: usize, marked: usize, iterations: usize) -> Result<(f64, AuditedRun)> {
    if d > 0 && marked >> d != 0 {
        return Err(Error::domain(
            "grover",
            format!("marked item {marked} out of range for d = {d}"),
        ));
    }
    let mut trace = RunTrace::new();
    let mut s = uniform_superposition(d)?;
    trace.record("uniform superposition", &s);
    let mut amps = s.clone().into_amplitudes();
    for k in 1..=iterations {
        amps[marked] = -amps[marked];
        trace.oracle_calls += 1;
        s = PureState::from_amplitudes(d, amps.clone())?;
        trace.record(format!("iteration {k}: oracle"), &s);
        let mean: Complex64 = amps.iter().sum::<Complex64>() / amps.len() as f64;
        amps.iter_mut().for_each(|z| *z = 2.0 * mean - *z);
        s = PureState::from_amplitudes(d, amps.clone())?;
        trace.record(format!("iteration {k}: diffusion"), &s);
    }
    let p = s.amplitude(marked).norm_sqr();
    Ok((p, AuditedRun::audit(trace, DEFAULT_TOLERANCE)))
}

/// `floor(pi/4 * sqrt(2^d))`.
pub fn optimal_grover_iterations(d: usize) -> usize {
    (FRAC_PI_4 * (d as f64 / 2.0).exp2()).floor() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::{schmidt_rank, two_qubit_tangle, CutSpec};

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn uniform_states() {
        let s = uniform_superposition(1).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - H).abs() < 1e-12));
        let s = uniform_superposition(3).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|a| (a.re - 0.35355339).abs() < 1e-8));
        let dist = s.measure_distribution(&[1, 2, 3]).unwrap();
        assert_eq!(dist.len(), 8);
        assert!(dist.values().all(|p| (p - 0.125).abs() < 1e-15));
        assert!(matches!(
            uniform_superposition(99),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn database_single_pattern() {
        let p = PatternSet::new(1, vec![(0, true)]).unwrap();
        let (s, steps) = prepare_database(&p).unwrap();
        assert_eq!(steps, 1);
        assert_eq!(s.num_qubits(), 3);
        let mut expect = vec![c(0.0); 8];
        expect[0b001] = c(H);
        expect[0b011] = c(-H);
        for (a, e) in s.amplitudes().iter().zip(&expect) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn database_full_constant_table() {
        let t = TruthTable::constant(1, false).unwrap();
        let (s, steps) = prepare_database(&full_pattern_set(&t).unwrap()).unwrap();
        assert_eq!(steps, 2);
        let mut expect = vec![c(0.0); 8];
        expect[0b000] = c(0.5);
        expect[0b010] = c(-0.5);
        expect[0b100] = c(0.5);
        expect[0b110] = c(-0.5);
        for (a, e) in s.amplitudes().iter().zip(&expect) {
            assert!((a - e).norm() < 1e-15);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_sign_pattern() {
        let u = uniform_superposition(2).unwrap();
        assert_eq!(bv_oracle(&u, 0, 2).unwrap(), u);
        let s = bv_oracle(&u, 0b11, 2).unwrap();
        let expect = [0.5, -0.5, -0.5, 0.5];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
        assert_eq!(bv_oracle(&s, 0b11, 2).unwrap(), u);
        assert!(bv_oracle(&u, 4, 2).is_err());
        assert!(bv_oracle(&u, 0, 3).is_err());
    }

    #[test]
    fn oracle_matches_cnot_cascade() {
        // register (x) |->, compare the phase oracle with the literal gate cascade
        let minus = PureState::from_amplitudes(1, vec![c(H), c(-H)]).unwrap();
        for d in 1..=4 {
            let reg = uniform_superposition(d).unwrap();
            let s = reg.tensor(&minus).unwrap();
            for a in 0..(1 << d) {
                let phase = bv_oracle(&s, a, d).unwrap();
                let gates = bv_oracle_cnot_cascade(&s, a, d, d + 1).unwrap();
                for (x, y) in phase.amplitudes().iter().zip(gates.amplitudes()) {
                    assert!((x - y).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn bv_recovers_hidden_strings() {
        let (r, run) = bernstein_vazirani(3, 0b101).unwrap();
        assert_eq!(r, 0b101);
        assert_eq!(run.trace.oracle_calls, 1);
        assert_eq!(run.trace.steps.len(), 3);
        assert!(run.audits.iter().all(|a| a.is_product));
        assert_eq!(bernstein_vazirani(4, 0).unwrap().0, 0);
        let (r, run) = bernstein_vazirani(1, 1).unwrap();
        assert_eq!(r, 1);
        assert!((run.trace.final_state().amplitude(1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lookup_constant_zero() {
        let t = TruthTable::constant(1, false).unwrap();
        let out = lookup_pipeline(&t, 1).unwrap();
        let mut expect = vec![c(0.0); 8];
        expect[0b100] = c(H);
        expect[0b110] = c(-H);
        let claimed = PureState::from_amplitudes(3, expect).unwrap();
        assert!(out.final_state.fidelity(&claimed).unwrap() >= 1.0 - 1e-12);
        assert_eq!(out.run.trace.prep_step_count, 2);
        assert_eq!(out.run.trace.oracle_calls, 1);
        assert!(!out.postselection_failed);
    }

    #[test]
    fn lookup_constant_one() {
        let t = TruthTable::constant(2, true).unwrap();
        for a in 0..4 {
            let out = lookup_pipeline(&t, a).unwrap();
            assert_eq!(out.first_register.len(), 1);
            assert!((out.first_register[&bitstring(a, 2)] - 1.0).abs() < 1e-12);
            let cond = out.conditional_b.unwrap();
            assert_eq!(cond.len(), 1);
            assert!((cond["1"] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lookup_linear_splits() {
        let t = crate::boolean::linear_table(1, 1).unwrap();
        let out = lookup_pipeline(&t, 0).unwrap();
        assert!((out.first_register["0"] - 0.5).abs() < 1e-12);
        assert!((out.first_register["1"] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lookup_conditional_b_ignores_stimulus() {
        // reading the stimulus leaves B in proportion N_0 : N_1 (value counts),
        // whatever a is; for AND that is 3 : 1 in amplitude
        let and = TruthTable::from_values(vec![false, false, false, true]).unwrap();
        for a in 0..4 {
            let out = lookup_pipeline(&and, a).unwrap();
            assert!(!out.postselection_failed);
            let cond = out.conditional_b.unwrap();
            assert!((cond["0"] - 0.9).abs() < 1e-12);
            assert!((cond["1"] - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn deutsch_jozsa_cases() {
        let (v, run) = deutsch_jozsa(&TruthTable::constant(2, false).unwrap()).unwrap();
        assert_eq!(v, FunctionClass::Constant);
        assert_eq!(run.audits.len(), 3);
        assert!(run
            .audits
            .iter()
            .all(|a| a.is_product && a.residual < 1e-10));

        let parity2 = crate::boolean::linear_table(0b11, 2).unwrap();
        let (v, run) = deutsch_jozsa(&parity2).unwrap();
        assert_eq!(v, FunctionClass::Balanced);
        let post = &run.trace.steps[1].state;
        let expect = [0.5, -0.5, -0.5, 0.5];
        for (a, e) in post.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
        assert!(run.audits[1].is_product);

        let (v, _) = deutsch_jozsa(&crate::boolean::linear_table(1, 1).unwrap()).unwrap();
        assert_eq!(v, FunctionClass::Balanced);

        let and = TruthTable::from_values(vec![false, false, false, true]).unwrap();
        assert!(matches!(
            deutsch_jozsa(&and),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn grover_cases() {
        let (p, run) = grover(2, 3, 1).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(run.trace.oracle_calls, 1);
        assert_eq!(run.trace.steps.len(), 3);
        let tangle = two_qubit_tangle(&run.trace.steps[1].state).unwrap();
        assert!((tangle - 0.5).abs() < 1e-12);
        assert!(!run.audits[1].is_product);

        for d in 1..=5 {
            let (p, _) = grover(d, 0, 0).unwrap();
            assert!((p - (-(d as f64)).exp2()).abs() < 1e-15);
        }

        let (p, _) = grover(3, 5, 2).unwrap();
        assert!((p - 0.94531).abs() < 1e-4);
        assert!(grover(2, 4, 1).is_err());
    }

    #[test]
    fn optimal_iterations() {
        assert_eq!(optimal_grover_iterations(2), 1);
        assert_eq!(optimal_grover_iterations(4), 3);
        assert_eq!(optimal_grover_iterations(10), 25);
    }

    #[test]
    fn database_entangles_arguments_with_values() {
        let t = TruthTable::from_values(vec![false, true, true, true]).unwrap();
        let (s, _) = prepare_database(&full_pattern_set(&t).unwrap()).unwrap();
        assert!(schmidt_rank(&s, &CutSpec::prefix(2), 1e-8).unwrap() >= 2);
        let c0 = TruthTable::constant(2, true).unwrap();
        let (s, _) = prepare_database(&full_pattern_set(&c0).unwrap()).unwrap();
        assert_eq!(schmidt_rank(&s, &CutSpec::prefix(2), 1e-8).unwrap(), 1);
    }
}
