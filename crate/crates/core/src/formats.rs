//! On-disk and wire formats.
//!
//! JSON documents carry complex numbers as `[re, im]` pairs. Floats are
//! written in shortest round-trip form, so every emitted value parses back
//! to the identical `f64`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::approximator::{InterferenceNeuron, TrainingSet};
use crate::boolean::{PatternSet, TruthTable};
use crate::circuits::AuditedRun;
use crate::entanglement::FactorizationReport;
use crate::error::{Error, Result};
use crate::interference::SlitLattice;
use crate::statevec::{parse_bitstring, PureState};

type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// `{"d": int, "amps": [[re, im], ...]}` in basis-label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub d: usize,
    pub amps: Vec<Pair>,
}

impl From<&PureState> for StateDump {
    fn from(s: &PureState) -> Self {
        StateDump {
            d: s.num_qubits(),
            amps: s.amplitudes().iter().copied().map(pair).collect(),
        }
    }
}

impl StateDump {
    pub fn into_state(self) -> Result<PureState> {
        PureState::from_amplitudes(self.d, self.amps.iter().map(complex).collect())
    }
}

/// `{"is_product", "ranks", "residual", "factors": [[re,im,re,im], ...] | null}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDump {
    pub is_product: bool,
    pub ranks: Vec<usize>,
    pub residual: f64,
    pub factors: Option<Vec<[f64; 4]>>,
}

impl From<&FactorizationReport> for ReportDump {
    fn from(r: &FactorizationReport) -> Self {
        ReportDump {
            is_product: r.is_product,
            ranks: r.prefix_schmidt_ranks.clone(),
            residual: r.residual,
            factors: r
                .factors
                .as_ref()
                .map(|fs| fs.iter().map(|(a, b)| [a.re, a.im, b.re, b.im]).collect()),
        }
    }
}

impl ReportDump {
    pub fn into_report(self) -> FactorizationReport {
        FactorizationReport {
            is_product: self.is_product,
            factors: self.factors.map(|fs| {
                fs.iter()
                    .map(|f| (Complex64::new(f[0], f[1]), Complex64::new(f[2], f[3])))
                    .collect()
            }),
            prefix_schmidt_ranks: self.ranks,
            residual: self.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDump {
    pub label: String,
    pub state: StateDump,
    pub audit: ReportDump,
}

/// `{"steps": [{"label", "state", "audit"}], "prep_steps", "oracle_calls"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDump {
    pub steps: Vec<StepDump>,
    pub prep_steps: usize,
    pub oracle_calls: usize,
}

impl From<&AuditedRun> for RunDump {
    fn from(run: &AuditedRun) -> Self {
        RunDump {
            steps: run
                .steps()
                .map(|(step, audit)| StepDump {
                    label: step.label.clone(),
                    state: (&step.state).into(),
                    audit: audit.into(),
                })
                .collect(),
            prep_steps: run.trace.prep_step_count,
            oracle_calls: run.trace.oracle_calls,
        }
    }
}

/// `{"slits": [...], "source": [[re,im],...], "transfers": [[[[re,im],...],...],...], "detector": [...]}`;
/// `transfers[k][i][j]` is the leg from slit `i` to slit `j` of the next barrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDump {
    pub slits: Vec<usize>,
    pub source: Vec<Pair>,
    pub transfers: Vec<Vec<Vec<Pair>>>,
    pub detector: Vec<Pair>,
}

impl From<&SlitLattice> for LatticeDump {
    fn from(l: &SlitLattice) -> Self {
        let transfers = l
            .transfers()
            .iter()
            .enumerate()
            .map(|(k, t)| {
                t.chunks(l.slits()[k + 1])
                    .map(|row| row.iter().copied().map(pair).collect())
                    .collect()
            })
            .collect();
        LatticeDump {
            slits: l.slits().to_vec(),
            source: l.source().iter().copied().map(pair).collect(),
            transfers,
            detector: l.detector().iter().copied().map(pair).collect(),
        }
    }
}

impl LatticeDump {
    pub fn into_lattice(self) -> Result<SlitLattice> {
        let mut transfers = Vec::with_capacity(self.transfers.len());
        for (k, stage) in self.transfers.iter().enumerate() {
            let cols = self.slits.get(k + 1).copied().unwrap_or(0);
            if let Some(row) = stage.iter().position(|r| r.len() != cols) {
                return Err(Error::parse(
                    "lattice",
                    format!(
                        "stage {} row {row} has {} legs, expected {cols}",
                        k + 1,
                        stage[row].len()
                    ),
                ));
            }
            transfers.push(stage.iter().flatten().map(complex).collect());
        }
        SlitLattice::new(
            self.slits,
            self.source.iter().map(complex).collect(),
            transfers,
            self.detector.iter().map(complex).collect(),
        )
    }
}

/// `{"K": int, "m": int, "c": [[re,im],...], "w": [[...],...], "phi": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
    pub c: Vec<Pair>,
    pub w: Vec<Vec<f64>>,
    pub phi: Vec<f64>,
}

impl From<&InterferenceNeuron> for ModelDump {
    fn from(n: &InterferenceNeuron) -> Self {
        ModelDump {
            k: n.paths(),
            m: n.input_dim(),
            c: n.c.iter().copied().map(pair).collect(),
            w: n.w.clone(),
            phi: n.phi.clone(),
        }
    }
}

impl ModelDump {
    pub fn into_neuron(self) -> Result<InterferenceNeuron> {
        if self.c.len() != self.k {
            return Err(Error::parse(
                "model",
                format!("K = {} but {} path weights", self.k, self.c.len()),
            ));
        }
        InterferenceNeuron::new(
            self.c.iter().map(complex).collect(),
            self.w,
            self.phi,
            self.m,
        )
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(format: &'static str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(format, e.to_string()))
}

pub fn parse_state(text: &str) -> Result<PureState> {
    from_json::<StateDump>("state", text)?.into_state()
}

pub fn parse_lattice(text: &str) -> Result<SlitLattice> {
    from_json::<LatticeDump>("lattice", text)?.into_lattice()
}

pub fn parse_model(text: &str) -> Result<InterferenceNeuron> {
    from_json::<ModelDump>("model", text)?.into_neuron()
}

pub fn parse_report(text: &str) -> Result<FactorizationReport> {
    Ok(from_json::<ReportDump>("report", text)?.into_report())
}

pub fn parse_run(text: &str) -> Result<RunDump> {
    from_json("run", text)
}

/// A single line of `2^d` bits in basis order. Whitespace is ignored.
pub fn parse_truth_table(text: &str) -> Result<TruthTable> {
    let bits = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::parse(
                "truth table",
                format!("unexpected character {other:?}"),
            )),
        })
        .collect::<Result<Vec<bool>>>()?;
    TruthTable::from_values(bits).map_err(|e| Error::parse("truth table", e.to_string()))
}

pub fn write_truth_table(t: &TruthTable) -> String {
    let mut s: String = t
        .values()
        .iter()
        .map(|&b| if b { '1' } else { '0' })
        .collect();
    s.push('\n');
    s
}

/// One `bitstring bit` pair per line, e.g. `101 1`. Blank lines are skipped.
pub fn parse_patterns(text: &str) -> Result<PatternSet> {
    let mut d = None;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(arg), Some(val), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(
                "patterns",
                format!("line {}: expected `bitstring bit`", n + 1),
            ));
        };
        let width = *d.get_or_insert(arg.len());
        let x = parse_bitstring("patterns", arg, width)
            .map_err(|e| Error::parse("patterns", format!("line {}: {e}", n + 1)))?;
        let b = match val {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    "patterns",
                    format!("line {}: value {other:?} is not 0 or 1", n + 1),
                ))
            }
        };
        pairs.push((x, b));
    }
    let d = d.ok_or_else(|| Error::parse("patterns", "no patterns"))?;
    PatternSet::new(d, pairs).map_err(|e| Error::parse("patterns", e.to_string()))
}

pub fn write_patterns(p: &PatternSet) -> String {
    p.pairs()
        .iter()
        .map(|&(x, b)| format!("{} {}\n", crate::statevec::bitstring(x, p.d()), u8::from(b)))
        .collect()
}

/// CSV with a header row: `m` feature columns, then the target column.
pub fn parse_training_csv(text: &str) -> Result<TrainingSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let width = reader
        .headers()
        .map_err(|e| Error::parse("training data", e.to_string()))?
        .len();
    if width == 0 {
        return Err(Error::parse("training data", "missing header"));
    }
    let mut samples = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse("training data", e.to_string()))?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::parse(
                        "training data",
                        format!("row {}: {f:?} is not a number", n + 1),
                    )
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let (y, u) = row.split_last().expect("csv enforces header width");
        samples.push((u.to_vec(), *y));
    }
    TrainingSet::new(samples).map_err(|e| Error::parse("training data", e.to_string()))
}

pub fn write_training_csv(t: &TrainingSet) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=t.input_dim()).map(|i| format!("u{i}")).collect();
    header.push("y".into());
    w.write_record(&header).expect("in-memory write");
    for (u, y) in t.samples() {
        let row: Vec<String> = u
            .iter()
            .chain(std::iter::once(y))
            .map(|v| v.to_string())
            .collect();
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::grover;
    use crate::entanglement::factor_product;
    use crate::interference::phase_mesh;
    use proptest::prelude::*;

    #[test]
    fn state_dump_shape() {
        let s = PureState::basis(2, 1).unwrap();
        let text = serde_json::to_string(&StateDump::from(&s)).unwrap();
        assert_eq!(
            text,
            r#"{"d":2,"amps":[[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]]}"#
        );
        assert_eq!(parse_state(&text).unwrap(), s);
        assert!(parse_state(r#"{"d":1,"amps":[[1,0],[1,0]]}"#).is_err());
        assert!(matches!(parse_state("{"), Err(Error::Parse { .. })));
    }

    #[test]
    fn report_and_run_dumps() {
        let (_, run) = grover(2, 1, 1).unwrap();
        let text = serde_json::to_string(&RunDump::from(&run)).unwrap();
        let back = parse_run(&text).unwrap();
        assert_eq!(back.oracle_calls, 1);
        assert_eq!(back.prep_steps, 0);
        assert_eq!(back.steps.len(), 3);
        assert_eq!(
            back.steps[1].state.clone().into_state().unwrap(),
            run.trace.steps[1].state
        );
        assert_eq!(back.steps[1].audit.ranks, vec![2]);
        assert!(back.steps[1].audit.factors.is_none());

        let prod = PureState::basis(3, 5).unwrap();
        let report = factor_product(&prod, 1e-8);
        let text = serde_json::to_string(&ReportDump::from(&report)).unwrap();
        let dump: ReportDump = serde_json::from_str(&text).unwrap();
        assert_eq!(dump.factors.as_ref().map(Vec::len), Some(3));
        assert_eq!(parse_report(&text).unwrap(), report);
    }

    #[test]
    fn lattice_round_trip() {
        let l = phase_mesh(4, 3, 9).unwrap();
        let text = serde_json::to_string(&LatticeDump::from(&l)).unwrap();
        assert_eq!(parse_lattice(&text).unwrap(), l);
        let ragged = r#"{"slits":[2,1],"source":[[1,0],[0,1]],"transfers":[[[[1,0]],[[0.5,0]]]],"detector":[[1,0]]}"#;
        let l = parse_lattice(ragged).unwrap();
        assert_eq!(l.leg(0, 1, 0), Complex64::new(0.5, 0.0));
        let bad = r#"{"slits":[2,1],"source":[[1,0],[0,1]],"transfers":[[[[1,0],[2,0]],[[0.5,0]]]],"detector":[[1,0]]}"#;
        assert!(parse_lattice(bad).is_err());
    }

    #[test]
    fn text_formats() {
        let t = parse_truth_table("0110\n").unwrap();
        assert_eq!(t.d(), 2);
        assert_eq!(parse_truth_table(&write_truth_table(&t)).unwrap(), t);
        assert!(parse_truth_table("011").is_err());
        assert!(parse_truth_table("01a1").is_err());

        let p = parse_patterns("101 1\n000 0\n\n111 1\n").unwrap();
        assert_eq!(p.d(), 3);
        assert_eq!(p.pairs(), &[(5, true), (0, false), (7, true)]);
        assert_eq!(parse_patterns(&write_patterns(&p)).unwrap(), p);
        assert!(parse_patterns("101 1\n00 0\n").is_err());
        assert!(parse_patterns("101 2\n").is_err());
        assert!(parse_patterns("101 1\n101 0\n").is_err());
        assert!(parse_patterns("").is_err());
    }

    #[test]
    fn training_csv() {
        let t = parse_training_csv("u,y\n0.0,0.0\n1.5,0.25\n").unwrap();
        assert_eq!(t.input_dim(), 1);
        assert_eq!(t.samples()[1], (vec![1.5], 0.25));
        assert_eq!(parse_training_csv(&write_training_csv(&t)).unwrap(), t);
        assert!(parse_training_csv("u,y\n0.0,zero\n").is_err());
        assert!(parse_training_csv("u,y\n0.0\n").is_err());
        assert!(parse_training_csv("u,y\n").is_err());
    }

    #[test]
    fn model_round_trip() {
        let n = InterferenceNeuron::random(3, 2, 4).unwrap();
        let text = serde_json::to_string(&ModelDump::from(&n)).unwrap();
        assert!(text.starts_with(r#"{"K":3,"m":2,"#));
        assert_eq!(parse_model(&text).unwrap(), n);
        assert!(parse_model(r#"{"K":2,"m":0,"c":[[1,0]],"w":[[]],"phi":[0]}"#).is_err());
    }

    proptest! {
        #[test]
        fn states_round_trip_exactly(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)) {
            prop_assume!(raw.iter().any(|&(r, i)| r.abs() + i.abs() > 1e-3));
            let s = PureState::normalized(3, raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
            let text = serde_json::to_string(&StateDump::from(&s)).unwrap();
            prop_assert_eq!(parse_state(&text).unwrap(), s);
        }
    }
}
