use std::time::Instant;

use qunip_core::interference::{
    amplitude_bruteforce_parallel, amplitude_imbedded, phase_mesh, PathSumResult,
    MAX_ENUMERATED_PATHS,
};
use qunip_core::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Imbedded,
    Bruteforce,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Imbedded => "imbedded",
            Method::Bruteforce => "bruteforce",
        }
    }
}

/// One timed amplitude evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub b: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub method: Method,
    pub multiply_adds: u128,
    /// Exact path count when it fits in 128 bits, otherwise `N^b`.
    pub paths: String,
    pub nanoseconds: u128,
    pub amp_re: f64,
    pub amp_im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub b_values: Vec<usize>,
    pub n: usize,
    pub compare: bool,
    pub seed: u64,
    pub threads: usize,
}

pub const CSV_HEADER: [&str; 8] = [
    "b",
    "N",
    "method",
    "multiply_adds",
    "paths",
    "nanoseconds",
    "amp_re",
    "amp_im",
];

fn path_label(n: usize, b: usize) -> String {
    u32::try_from(b)
        .ok()
        .and_then(|e| (n as u128).checked_pow(e))
        .map_or_else(|| format!("{n}^{b}"), |p| p.to_string())
}

fn exact_paths(n: usize, b: usize) -> Option<u128> {
    u32::try_from(b)
        .ok()
        .and_then(|e| (n as u128).checked_pow(e))
}

/// Lattice seed for barrier count `b`, so every row is reproducible alone.
pub fn lattice_seed(seed: u64, b: usize) -> u64 {
    seed ^ (b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn row(b: usize, n: usize, method: Method, r: &PathSumResult, ns: u128) -> BenchRow {
    BenchRow {
        b,
        n,
        method,
        multiply_adds: r.multiply_add_count,
        paths: path_label(n, b),
        nanoseconds: ns,
        amp_re: r.amplitude.re,
        amp_im: r.amplitude.im,
    }
}

/// Times the recursion (and with `compare`, full enumeration) on a seeded
/// phase mesh for each barrier count. With `compare`, every requested size
/// is checked against the enumeration guard before any work starts.
pub fn bench_sweep(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    if spec.compare {
        for &b in &spec.b_values {
            if exact_paths(spec.n, b).is_none_or(|p| p > MAX_ENUMERATED_PATHS) {
                return Err(Error::Capacity {
                    op: "bench_sweep",
                    detail: format!(
                        "brute force at b = {b}, N = {} needs {} paths, above the guard of {MAX_ENUMERATED_PATHS}",
                        spec.n,
                        path_label(spec.n, b)
                    ),
                });
            }
        }
    }
    let mut rows = Vec::new();
    for &b in &spec.b_values {
        let lattice = phase_mesh(b, spec.n, lattice_seed(spec.seed, b))?;
        let start = Instant::now();
        let fast = amplitude_imbedded(&lattice);
        rows.push(row(
            b,
            spec.n,
            Method::Imbedded,
            &fast,
            start.elapsed().as_nanos(),
        ));
        if spec.compare {
            let start = Instant::now();
            let slow = amplitude_bruteforce_parallel(&lattice, spec.threads)?;
            rows.push(row(
                b,
                spec.n,
                Method::Bruteforce,
                &slow,
                start.elapsed().as_nanos(),
            ));
        }
    }
    Ok(rows)
}

pub fn write_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Parse {
        format: "csv",
        detail: e.to_string(),
    };
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.b.to_string(),
            r.n.to_string(),
            r.method.as_str().to_string(),
            r.multiply_adds.to_string(),
            r.paths.clone(),
            r.nanoseconds.to_string(),
            r.amp_re.to_string(),
            r.amp_im.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse {
        format: "csv",
        detail: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
