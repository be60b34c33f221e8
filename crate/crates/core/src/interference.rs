//! Photon amplitudes through a stack of multi-slit barriers.
//!
//! Two routes to the same number: enumerating every slit-choice path
//! (`prod N_k` terms), and the forward recursion that carries the amplitude
//! to reach each slit of one barrier to the next (`sum N_k N_{k+1}` work).
//! Only forward legs exist, so the recursion is exact.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::statevec::Amplitude;

/// Brute-force enumeration refuses lattices with more paths than this.
pub const MAX_ENUMERATED_PATHS: u128 = 100_000_000;

/// Feed-forward interference graph.
///
/// `transfers[k]` is the `N_{k+1} x N_{k+2}` leg matrix between barriers
/// `k + 1` and `k + 2` (1-based barriers), stored row-major: entry
/// `i * N_{k+2} + j` is the leg from slit `i` to slit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitLattice {
    slits: Vec<usize>,
    source: Vec<Amplitude>,
    transfers: Vec<Vec<Amplitude>>,
    detector: Vec<Amplitude>,
}

impl SlitLattice {
    pub fn new(
        slits: Vec<usize>,
        source: Vec<Amplitude>,
        transfers: Vec<Vec<Amplitude>>,
        detector: Vec<Amplitude>,
    ) -> Result<Self> {
        let op = "slit_lattice";
        if slits.is_empty() {
            return Err(Error::validation(op, "at least one barrier is required"));
        }
        if let Some(k) = slits.iter().position(|&n| n == 0) {
            return Err(Error::validation(
                op,
                format!("barrier {} has no slits", k + 1),
            ));
        }
        if source.len() != slits[0] {
            return Err(Error::validation(
                op,
                format!("{} source legs for {} slits", source.len(), slits[0]),
            ));
        }
        if detector.len() != *slits.last().unwrap() {
            return Err(Error::validation(
                op,
                format!(
                    "{} detector legs for {} slits",
                    detector.len(),
                    slits.last().unwrap()
                ),
            ));
        }
        if transfers.len() != slits.len() - 1 {
            return Err(Error::validation(
                op,
                format!(
                    "{} transfer stages for {} barriers",
                    transfers.len(),
                    slits.len()
                ),
            ));
        }
        for (k, t) in transfers.iter().enumerate() {
            if t.len() != slits[k] * slits[k + 1] {
                return Err(Error::validation(
                    op,
                    format!(
                        "stage {} has {} legs, expected {} x {}",
                        k + 1,
                        t.len(),
                        slits[k],
                        slits[k + 1]
                    ),
                ));
            }
        }
        let finite = source
            .iter()
            .chain(transfers.iter().flatten())
            .chain(&detector)
            .all(|z| z.is_finite());
        if !finite {
            return Err(Error::validation(op, "non-finite leg amplitude"));
        }
        Ok(SlitLattice {
            slits,
            source,
            transfers,
            detector,
        })
    }

    pub fn barriers(&self) -> usize {
        self.slits.len()
    }

    pub fn slits(&self) -> &[usize] {
        &self.slits
    }

    pub fn source(&self) -> &[Amplitude] {
        &self.source
    }

    pub fn transfers(&self) -> &[Vec<Amplitude>] {
        &self.transfers
    }

    pub fn detector(&self) -> &[Amplitude] {
        &self.detector
    }

    /// Leg from slit `i` of barrier `stage + 1` to slit `j` of barrier `stage + 2`.
    pub fn leg(&self, stage: usize, i: usize, j: usize) -> Amplitude {
        self.transfers[stage][i * self.slits[stage + 1] + j]
    }

    /// Number of source-to-detector paths, `None` if it overflows `u128`.
    pub fn path_count(&self) -> Option<u128> {
        self.slits
            .iter()
            .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
    }

    /// Same lattice with the detector legs swapped out.
    pub fn with_detector(&self, detector: Vec<Amplitude>) -> Result<Self> {
        Self::new(
            self.slits.clone(),
            self.source.clone(),
            self.transfers.clone(),
            detector,
        )
    }

    /// The sub-lattice from barrier `k` (1-based) onward, fed by `source`.
    pub fn suffix(&self, k: usize, source: Vec<Amplitude>) -> Result<Self> {
        check_barrier("suffix", self, k)?;
        Self::new(
            self.slits[k - 1..].to_vec(),
            source,
            self.transfers[k - 1..].to_vec(),
            self.detector.clone(),
        )
    }
}

fn check_barrier(op: &'static str, l: &SlitLattice, k: usize) -> Result<()> {
    if k == 0 || k > l.barriers() {
        return Err(Error::domain(
            op,
            format!("barrier {k} out of range 1..={}", l.barriers()),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSumResult {
    pub amplitude: Amplitude,
    /// Paths summed one by one; zero for the recursion, which never enumerates.
    pub paths_enumerated: u128,
    /// Complex multiply-adds performed.
    pub multiply_add_count: u128,
}

/// Sums `a_{i_1} t_1[i_1][i_2] ... d_{i_b}` over every path.
///
/// Paths are visited in lexicographic order with an odometer over slit
/// indices and cached prefix products. Partial sums are kept per first-barrier
/// slit and reduced in slit order, so [`amplitude_bruteforce_parallel`]
/// returns bit-identical results for any worker count.
pub fn amplitude_bruteforce(l: &SlitLattice) -> Result<PathSumResult> {
    amplitude_bruteforce_parallel(l, 1)
}

pub fn amplitude_bruteforce_parallel(l: &SlitLattice, threads: usize) -> Result<PathSumResult> {
    let paths = match l.path_count() {
        Some(p) if p <= MAX_ENUMERATED_PATHS => p,
        Some(p) => {
            return Err(Error::capacity(
                "amplitude_bruteforce",
                format!("{p} paths exceed the guard of {MAX_ENUMERATED_PATHS}"),
            ))
        }
        None => {
            return Err(Error::capacity(
                "amplitude_bruteforce",
                format!("path count overflows ({} barriers)", l.barriers()),
            ))
        }
    };
    let n1 = l.slits[0];
    let threads = threads.clamp(1, n1);
    let mut partials = vec![(Complex64::new(0.0, 0.0), 0u128); n1];
    if threads == 1 {
        for (i, slot) in partials.iter_mut().enumerate() {
            *slot = paths_from(l, i);
        }
    } else {
        std::thread::scope(|scope| {
            let chunk = n1.div_ceil(threads);
            for (t, part) in partials.chunks_mut(chunk).enumerate() {
                scope.spawn(move || {
                    for (off, slot) in part.iter_mut().enumerate() {
                        *slot = paths_from(l, t * chunk + off);
                    }
                });
            }
        });
    }
    let mut amplitude = Complex64::new(0.0, 0.0);
    let mut ops = 0u128;
    for (z, n) in partials {
        amplitude += z;
        ops += n + 1;
    }
    Ok(PathSumResult {
        amplitude,
        paths_enumerated: paths,
        multiply_add_count: ops,
    })
}

/// Sum over every path whose first slit is `first`, with its operation count.
fn paths_from(l: &SlitLattice, first: usize) -> (Complex64, u128) {
    let b = l.barriers();
    let mut idx = vec![0usize; b];
    idx[0] = first;
    // prefix[k] = amplitude to reach slit idx[k] of barrier k+1 along this path
    let mut prefix = vec![Complex64::new(0.0, 0.0); b];
    prefix[0] = l.source[first];
    let mut ops = 0u128;
    for k in 1..b {
        prefix[k] = prefix[k - 1] * l.leg(k - 1, idx[k - 1], idx[k]);
        ops += 1;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    loop {
        sum += prefix[b - 1] * l.detector[idx[b - 1]];
        ops += 1;
        // advance the odometer over barriers 2..=b
        let mut k = b - 1;
        loop {
            if k == 0 {
                return (sum, ops);
            }
            idx[k] += 1;
            if idx[k] < l.slits[k] {
                break;
            }
            idx[k] = 0;
            k -= 1;
        }
        for j in k..b {
            prefix[j] = prefix[j - 1] * l.leg(j - 1, idx[j - 1], idx[j]);
            ops += 1;
        }
    }
}

fn propagate(v: &[Complex64], t: &[Complex64], cols: usize) -> Vec<Complex64> {
    let mut next = vec![Complex64::new(0.0, 0.0); cols];
    for (vi, row) in v.iter().zip(t.chunks_exact(cols)) {
        for (nj, tij) in next.iter_mut().zip(row) {
            *nj += vi * tij;
        }
    }
    next
}

/// Forward recursion: `v^(1) = source`, `v^(k+1)_j = sum_i v^(k)_i t_k[i][j]`,
/// amplitude `= sum_i v^(b)_i d_i`.
pub fn amplitude_imbedded(l: &SlitLattice) -> PathSumResult {
    let last = final_slit_amplitudes(l);
    let amplitude = last.iter().zip(&l.detector).map(|(v, d)| v * d).sum();
    PathSumResult {
        amplitude,
        paths_enumerated: 0,
        multiply_add_count: imbedded_cost(l.slits()),
    }
}

/// `sum_k N_k N_{k+1} + N_b`.
pub fn imbedded_cost(slits: &[usize]) -> u128 {
    let stages: u128 = slits.windows(2).map(|w| w[0] as u128 * w[1] as u128).sum();
    stages + *slits.last().unwrap_or(&0) as u128
}

fn final_slit_amplitudes(l: &SlitLattice) -> Vec<Complex64> {
    let mut v = l.source.clone();
    for (k, t) in l.transfers.iter().enumerate() {
        v = propagate(&v, t, l.slits[k + 1]);
    }
    v
}

/// Amplitudes to reach each slit of barrier `k` (1-based).
pub fn slit_amplitudes(l: &SlitLattice, k: usize) -> Result<Vec<Amplitude>> {
    check_barrier("slit_amplitudes", l, k)?;
    let mut v = l.source.clone();
    for (s, t) in l.transfers[..k - 1].iter().enumerate() {
        v = propagate(&v, t, l.slits[s + 1]);
    }
    Ok(v)
}

/// Detector intensity `|amplitude|^2`. Legs are not required to be unitary,
/// so this can exceed 1.
pub fn intensity(l: &SlitLattice) -> f64 {
    amplitude_imbedded(l).amplitude.norm_sqr()
}

/// `(sum_k N_k, N_1 + sum_k N_k N_{k+1} + N_b)`: the imbedded family size and
/// the raw leg count.
pub fn parameter_count(l: &SlitLattice) -> (u128, u128) {
    let family = l.slits.iter().map(|&n| n as u128).sum();
    let legs = l.slits[0] as u128 + imbedded_cost(&l.slits);
    (family, legs)
}

/// Random lossless mesh: uniform-`N` barriers whose stages are a unitary
/// DFT followed by random per-slit phases, with unit-norm source and
/// detector vectors of random phase. The detector amplitude stays bounded
/// by 1 for any depth, which keeps deep benchmark runs finite.
pub fn phase_mesh(b: usize, n: usize, seed: u64) -> Result<SlitLattice> {
    if b == 0 || n == 0 {
        return Err(Error::domain("phase_mesh", "b and N must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (n as f64).sqrt().recip();
    let tau = std::f64::consts::TAU;
    let mut random_phases = |len: usize| -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::from_polar(scale, tau * rng.random::<f64>()))
            .collect()
    };
    let source = random_phases(n);
    let detector = random_phases(n);
    let dft: Vec<Complex64> = (0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            Complex64::from_polar(scale, -tau * (i * j) as f64 / n as f64)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let transfers = (1..b)
        .map(|_| {
            let phases: Vec<Complex64> = (0..n)
                .map(|_| Complex64::from_polar(1.0, tau * rng.random::<f64>()))
                .collect();
            dft.iter()
                .enumerate()
                .map(|(ij, f)| f * phases[ij % n])
                .collect()
        })
        .collect();
    SlitLattice::new(vec![n; b], source, transfers, detector)
}
