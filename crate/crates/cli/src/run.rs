use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use qunip_core::approximator::{loss, resource_report, train_seeded, TrainingSet};
use qunip_core::boolean::{classify, PatternSet};
use qunip_core::circuits::{
    bernstein_vazirani, deutsch_jozsa, grover, lookup_pipeline_patterns, AuditedRun,
};
use qunip_core::entanglement::{description_length, factor_product, two_qubit_tangle};
use qunip_core::formats::{
    parse_lattice, parse_patterns, parse_state, parse_training_csv, parse_truth_table, ModelDump,
    ReportDump, RunDump, StateDump,
};
use qunip_core::interference::{
    amplitude_bruteforce_parallel, amplitude_imbedded, intensity, parameter_count,
};
use qunip_core::statevec::{bitstring, parse_bitstring, set_max_qubits};
use qunip_core::PureState;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::args::{Command, CommandPlan, Format};
use crate::bench::{bench_sweep, write_csv, BenchSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qunip_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for usage problems, 1 for everything found while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn meta() -> Value {
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    json!({
        "tool": "qunip",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": ts,
    })
}

fn sample(
    dist: &BTreeMap<String, f64>,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<String, u64>, CliError> {
    let keys: Vec<&String> = dist.keys().collect();
    let index = WeightedIndex::new(dist.values().copied())
        .map_err(|e| CliError::Usage(format!("cannot sample distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts
            .entry(keys[index.sample(&mut rng)].clone())
            .or_insert(0) += 1;
    }
    Ok(counts)
}

fn run_json(run: &AuditedRun) -> Value {
    serde_json::to_value(RunDump::from(run)).expect("dump serializes")
}

fn state_json(s: &PureState) -> Value {
    serde_json::to_value(StateDump::from(s)).expect("dump serializes")
}

/// Computes the primary document for `plan` without writing it anywhere.
pub fn render(plan: &CommandPlan) -> Result<String, CliError> {
    set_max_qubits(plan.max_qubits);
    let mut doc = Map::new();
    doc.insert("command".into(), plan.command.name().into());
    let mut dist: Option<BTreeMap<String, f64>> = None;
    match &plan.command {
        Command::Bv { d, a } => {
            let (recovered, run) = bernstein_vazirani(*d, *a)?;
            let reg: Vec<usize> = (1..=*d).collect();
            let p = run.trace.final_state().measure_distribution(&reg)?;
            doc.insert("d".into(), json!(d));
            doc.insert("a".into(), json!(bitstring(*a, *d)));
            doc.insert("recovered".into(), json!(bitstring(recovered, *d)));
            doc.insert("oracle_calls".into(), json!(run.trace.oracle_calls));
            doc.insert("distribution".into(), json!(p));
            doc.insert("run".into(), run_json(&run));
            dist = Some(p);
        }
        Command::Dj { table } => {
            let t = parse_truth_table(&read(table)?)?;
            let (class, run) = deutsch_jozsa(&t)?;
            let reg: Vec<usize> = (1..=t.d()).collect();
            let p = run.trace.final_state().measure_distribution(&reg)?;
            doc.insert("d".into(), json!(t.d()));
            doc.insert("verdict".into(), json!(class));
            doc.insert("oracle_calls".into(), json!(run.trace.oracle_calls));
            doc.insert("distribution".into(), json!(p));
            doc.insert("run".into(), run_json(&run));
            dist = Some(p);
        }
        Command::Grover {
            d,
            marked,
            iterations,
        } => {
            let (p_marked, run) = grover(*d, *marked, *iterations)?;
            let reg: Vec<usize> = (1..=*d).collect();
            let p = run.trace.final_state().measure_distribution(&reg)?;
            doc.insert("d".into(), json!(d));
            doc.insert("marked".into(), json!(bitstring(*marked, *d)));
            doc.insert("iterations".into(), json!(iterations));
            doc.insert("success_probability".into(), json!(p_marked));
            doc.insert("oracle_calls".into(), json!(run.trace.oracle_calls));
            if *d == 2 {
                let tangles: Vec<f64> = run
                    .trace
                    .steps
                    .iter()
                    .map(|s| two_qubit_tangle(&s.state))
                    .collect::<Result<_, _>>()?;
                doc.insert("step_tangles".into(), json!(tangles));
            }
            doc.insert("distribution".into(), json!(p));
            doc.insert("run".into(), run_json(&run));
            dist = Some(p);
        }
        Command::Db { table, a, patterns } => {
            let t = parse_truth_table(&read(table)?)?;
            let a_idx = parse_bitstring("db", a, t.d())?;
            let p = match patterns {
                None => qunip_core::boolean::full_pattern_set(&t)?,
                Some(path) => {
                    let p = parse_patterns(&read(path)?)?;
                    if p.d() != t.d() || !p.consistent_with(&t) {
                        return Err(CliError::Usage(format!(
                            "{} disagrees with the truth table",
                            path.display()
                        )));
                    }
                    p
                }
            };
            let out = lookup_pipeline_patterns(&p, a_idx)?;
            doc.insert("d".into(), json!(t.d()));
            doc.insert("a".into(), json!(a));
            doc.insert("class".into(), json!(classify(&t)));
            doc.insert("patterns".into(), json!(PatternSet::len(&p)));
            doc.insert("prep_steps".into(), json!(out.run.trace.prep_step_count));
            doc.insert("oracle_calls".into(), json!(out.run.trace.oracle_calls));
            doc.insert("first_register".into(), json!(out.first_register));
            doc.insert("conditional_b".into(), json!(out.conditional_b));
            doc.insert(
                "postselection_failed".into(),
                json!(out.postselection_failed),
            );
            doc.insert("final_state".into(), state_json(&out.final_state));
            doc.insert("run".into(), run_json(&out.run));
            dist = Some(out.first_register);
        }
        Command::Entangle { state, tol } => {
            let s = parse_state(&read(state)?)?;
            let report = factor_product(&s, *tol);
            let d = s.num_qubits() as u32;
            doc.insert("d".into(), json!(d));
            doc.insert("report".into(), json!(ReportDump::from(&report)));
            doc.insert(
                "description_length".into(),
                json!({
                    "general": description_length(d, false)?,
                    "product": description_length(d, true)?,
                }),
            );
            if d == 2 {
                doc.insert("tangle".into(), json!(two_qubit_tangle(&s)?));
            }
        }
        Command::Interfere {
            lattice,
            bruteforce,
        } => {
            let l = parse_lattice(&read(lattice)?)?;
            let r = amplitude_imbedded(&l);
            let (family, legs) = parameter_count(&l);
            doc.insert("barriers".into(), json!(l.barriers()));
            doc.insert("amplitude".into(), json!([r.amplitude.re, r.amplitude.im]));
            doc.insert("intensity".into(), json!(intensity(&l)));
            doc.insert(
                "multiply_adds".into(),
                json!(r.multiply_add_count.to_string()),
            );
            doc.insert(
                "paths".into(),
                json!(l
                    .path_count()
                    .map_or_else(|| "overflow".to_string(), |p| p.to_string())),
            );
            doc.insert(
                "parameters".into(),
                json!({"family": family.to_string(), "legs": legs.to_string()}),
            );
            if *bruteforce {
                let b = amplitude_bruteforce_parallel(&l, plan.threads)?;
                doc.insert(
                    "bruteforce".into(),
                    json!({
                        "amplitude": [b.amplitude.re, b.amplitude.im],
                        "paths_enumerated": b.paths_enumerated.to_string(),
                        "multiply_adds": b.multiply_add_count.to_string(),
                    }),
                );
            }
        }
        Command::Bench {
            b_values,
            n,
            compare,
            seed,
        } => {
            let rows = bench_sweep(&BenchSpec {
                b_values: b_values.clone(),
                n: *n,
                compare: *compare,
                seed: *seed,
                threads: plan.threads,
            })?;
            if plan.format == Format::Csv {
                return Ok(write_csv(&rows)?);
            }
            doc.insert("seed".into(), json!(seed));
            doc.insert("rows".into(), json!(rows));
        }
        Command::Fit {
            data,
            k,
            lr,
            epochs,
            seed,
            d_equiv,
        } => {
            let t: TrainingSet = parse_training_csv(&read(data)?)?;
            let model = train_seeded(*k, &t, *lr, *epochs, *seed)?;
            if plan.format == Format::Csv {
                let mut out = String::from("epoch,loss\n");
                for (e, l) in model.loss_history.iter().enumerate() {
                    out.push_str(&format!("{e},{l}\n"));
                }
                return Ok(out);
            }
            let final_loss = loss(&model.neuron, &t)?;
            let d = d_equiv.unwrap_or(t.input_dim().max(1) as u32);
            doc.insert("model".into(), json!(ModelDump::from(&model.neuron)));
            doc.insert("final_loss".into(), json!(final_loss));
            doc.insert("rmse".into(), json!(final_loss.sqrt()));
            doc.insert("loss_history".into(), json!(model.loss_history));
            doc.insert(
                "resource".into(),
                json!(resource_report(*k as u64, t.len() as u64, d)?),
            );
            doc.insert(
                "init".into(),
                json!({"scheme": "c uniform in disk radius 1/K; w, phi uniform in [-1, 1]", "seed": seed, "lr": lr, "epochs": epochs}),
            );
        }
    }
    if let (Some(shots), Some(p)) = (plan.shots, &dist) {
        doc.insert(
            "shots".into(),
            json!({"count": shots, "seed": plan.shots_seed}),
        );
        doc.insert("samples".into(), json!(sample(p, shots, plan.shots_seed)?));
    }
    if plan.meta {
        doc.insert("meta".into(), meta());
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json renders");
    text.push('\n');
    Ok(text)
}

/// Runs `plan`, writes the result, and returns the process exit code.
pub fn execute(plan: &CommandPlan) -> i32 {
    let result = render(plan).and_then(|text| match &plan.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qunip: {e}");
            e.exit_code()
        }
    }
}
