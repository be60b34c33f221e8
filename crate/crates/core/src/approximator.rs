//! A single neuron whose output is the detector intensity of `K` interfering
//! paths with input-dependent phases:
//!
//! `f(u) = |sum_k c_k exp(i (w_k . u + phi_k))|^2`
//!
//! It is fitted to a handful of examples by full-batch gradient descent.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceNeuron {
    /// Complex path weights `c_k`.
    pub c: Vec<Complex64>,
    /// Phase weights `w_k`, one length-`m` row per path.
    pub w: Vec<Vec<f64>>,
    /// Phase offsets `phi_k`.
    pub phi: Vec<f64>,
    m: usize,
}

impl InterferenceNeuron {
    pub fn new(c: Vec<Complex64>, w: Vec<Vec<f64>>, phi: Vec<f64>, m: usize) -> Result<Self> {
        let op = "interference_neuron";
        let k = c.len();
        if k == 0 {
            return Err(Error::validation(op, "needs at least one path"));
        }
        if w.len() != k || phi.len() != k {
            return Err(Error::validation(
                op,
                format!(
                    "{k} path weights but {} phase rows and {} offsets",
                    w.len(),
                    phi.len()
                ),
            ));
        }
        if let Some(row) = w.iter().position(|r| r.len() != m) {
            return Err(Error::validation(
                op,
                format!("phase row {row} has length {}, expected {m}", w[row].len()),
            ));
        }
        let finite = c.iter().all(|z| z.is_finite())
            && w.iter().flatten().all(|x| x.is_finite())
            && phi.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::validation(op, "non-finite parameter"));
        }
        Ok(InterferenceNeuron { c, w, phi, m })
    }

    /// Seeded initialization: `c_k` uniform on the disk of radius `1/K`,
    /// `w_k` and `phi_k` uniform on `[-1, 1]`.
    pub fn random(k: usize, m: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("interference_neuron", "K must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radius = 1.0 / k as f64;
        let c = (0..k)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
            })
            .collect();
        let w = (0..k)
            .map(|_| (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        let phi = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self::new(c, w, phi, m)
    }

    pub fn paths(&self) -> usize {
        self.c.len()
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    /// Flat parameter vector: per path `Re c, Im c, w_1..w_m, phi`.
    pub fn to_params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.paths() * (self.m + 3));
        for k in 0..self.paths() {
            p.push(self.c[k].re);
            p.push(self.c[k].im);
            p.extend_from_slice(&self.w[k]);
            p.push(self.phi[k]);
        }
        p
    }

    /// Inverse of [`InterferenceNeuron::to_params`] for the same shape.
    pub fn from_params(k: usize, m: usize, p: &[f64]) -> Result<Self> {
        let stride = m + 3;
        if p.len() != k * stride {
            return Err(Error::validation(
                "interference_neuron",
                format!("{} parameters for K = {k}, m = {m}", p.len()),
            ));
        }
        let mut c = Vec::with_capacity(k);
        let mut w = Vec::with_capacity(k);
        let mut phi = Vec::with_capacity(k);
        for chunk in p.chunks_exact(stride) {
            c.push(Complex64::new(chunk[0], chunk[1]));
            w.push(chunk[2..2 + m].to_vec());
            phi.push(chunk[2 + m]);
        }
        Self::new(c, w, phi, m)
    }

    /// Unit phases `e^{i theta_k}` and the total amplitude `z`.
    fn paths_at(&self, u: &[f64]) -> (Vec<Complex64>, Complex64) {
        let phases: Vec<Complex64> = (0..self.paths())
            .map(|k| Complex64::from_polar(1.0, dot(&self.w[k], u) + self.phi[k]))
            .collect();
        let z = self.c.iter().zip(&phases).map(|(c, e)| c * e).sum();
        (phases, z)
    }

    pub fn predict(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.m {
            return Err(Error::domain(
                "predict",
                format!("input has {} features, neuron expects {}", u.len(), self.m),
            ));
        }
        Ok(self.paths_at(u).1.norm_sqr())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `P` examples `(u_p, y_p)` sharing one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    samples: Vec<(Vec<f64>, f64)>,
    m: usize,
}

impl TrainingSet {
    pub fn new(samples: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::domain("training_set", "no samples"));
        };
        let m = first.0.len();
        for (p, (u, y)) in samples.iter().enumerate() {
            if u.len() != m {
                return Err(Error::validation(
                    "training_set",
                    format!("sample {p} has {} features, expected {m}", u.len()),
                ));
            }
            if !y.is_finite() || u.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation(
                    "training_set",
                    format!("sample {p} is not finite"),
                ));
            }
        }
        Ok(TrainingSet { samples, m })
    }

    pub fn samples(&self) -> &[(Vec<f64>, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }
}

fn check_dims(op: &'static str, n: &InterferenceNeuron, t: &TrainingSet) -> Result<()> {
    if n.m != t.m {
        return Err(Error::domain(
            op,
            format!("neuron takes {} features, data has {}", n.m, t.m),
        ));
    }
    Ok(())
}

/// Mean squared error over the examples.
pub fn loss(n: &InterferenceNeuron, t: &TrainingSet) -> Result<f64> {
    check_dims("loss", n, t)?;
    let sum: f64 = t
        .samples
        .iter()
        .map(|(u, y)| {
            let r = n.paths_at(u).1.norm_sqr() - y;
            r * r
        })
        .sum();
    Ok(sum / t.len() as f64)
}

/// Partial derivatives of [`loss`], shaped like the neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronGradient {
    /// `dL/dRe c_k + i dL/dIm c_k`.
    pub c: Vec<Complex64>,
    pub w: Vec<Vec<f64>>,
    pub phi: Vec<f64>,
}

impl NeuronGradient {
    /// Flattened in the order of [`InterferenceNeuron::to_params`].
    pub fn to_params(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for k in 0..self.c.len() {
            p.push(self.c[k].re);
            p.push(self.c[k].im);
            p.extend_from_slice(&self.w[k]);
            p.push(self.phi[k]);
        }
        p
    }

    pub fn norm(&self) -> f64 {
        self.to_params().iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Exact gradient of the mean squared error.
///
/// With `z = sum_k c_k e^{i theta_k}` and `f = |z|^2`:
/// `df/dRe c_k = 2 Re(conj z e^{i theta_k})`,
/// `df/dIm c_k = -2 Im(conj z e^{i theta_k})`,
/// `df/dtheta_k = -2 Im(conj z c_k e^{i theta_k})`.
pub fn gradient(n: &InterferenceNeuron, t: &TrainingSet) -> Result<NeuronGradient> {
    check_dims("gradient", n, t)?;
    let k = n.paths();
    let mut g = NeuronGradient {
        c: vec![Complex64::new(0.0, 0.0); k],
        w: vec![vec![0.0; n.m]; k],
        phi: vec![0.0; k],
    };
    let scale = 2.0 / t.len() as f64;
    for (u, y) in &t.samples {
        let (phases, z) = n.paths_at(u);
        let r = scale * (z.norm_sqr() - y);
        let zc = z.conj();
        for (j, phase) in phases.iter().enumerate() {
            let e = zc * phase;
            g.c[j] += Complex64::new(2.0 * r * e.re, -2.0 * r * e.im);
            let dtheta = -2.0 * r * (e * n.c[j]).im;
            g.phi[j] += dtheta;
            for (gw, ui) in g.w[j].iter_mut().zip(u) {
                *gw += dtheta * ui;
            }
        }
    }
    Ok(g)
}

/// Outcome of [`train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub neuron: InterferenceNeuron,
    /// Loss before the first step and after every epoch (`epochs + 1` entries).
    pub loss_history: Vec<f64>,
}

/// Full-batch, fixed-step gradient descent from `n`.
pub fn train(
    n: &InterferenceNeuron,
    t: &TrainingSet,
    lr: f64,
    epochs: usize,
) -> Result<TrainedModel> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::domain(
            "train",
            format!("learning rate {lr} must be positive"),
        ));
    }
    if epochs == 0 {
        return Err(Error::domain("train", "epochs must be positive"));
    }
    let (k, m) = (n.paths(), n.m);
    let mut params = n.to_params();
    let mut current = n.clone();
    let mut history = Vec::with_capacity(epochs + 1);
    history.push(loss(&current, t)?);
    for epoch in 1..=epochs {
        let g = gradient(&current, t)?.to_params();
        params.iter_mut().zip(&g).for_each(|(p, gi)| *p -= lr * gi);
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        current = InterferenceNeuron::from_params(k, m, &params)?;
        let l = loss(&current, t)?;
        if !l.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        history.push(l);
    }
    Ok(TrainedModel {
        neuron: current,
        loss_history: history,
    })
}

/// [`train`] from a seeded [`InterferenceNeuron::random`] initialization.
pub fn train_seeded(
    k: usize,
    t: &TrainingSet,
    lr: f64,
    epochs: usize,
    seed: u64,
) -> Result<TrainedModel> {
    let init = InterferenceNeuron::random(k, t.input_dim(), seed)?;
    train(&init, t, lr, epochs)
}

/// Resource figures side by side: paths actually trained, the `ceil(sqrt P)`
/// hidden-unit reference for a 2-layer net, and the `2^d` units an exact
/// realization of a `d`-input Boolean function needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ResourceReport {
    pub trained_paths: u64,
    pub sqrt_p_reference: u64,
    pub exact_realization_units: u64,
}

pub fn resource_report(k: u64, p: u64, d_equiv: u32) -> Result<ResourceReport> {
    if k == 0 || p == 0 || d_equiv == 0 {
        return Err(Error::domain(
            "resource_report",
            "K, P and d must be positive",
        ));
    }
    let root = p.isqrt();
    let sqrt_p_reference = if root * root == p { root } else { root + 1 };
    let exact_realization_units = 1u64
        .checked_shl(d_equiv)
        .ok_or_else(|| Error::capacity("resource_report", format!("2^{d_equiv} overflows u64")))?;
    Ok(ResourceReport {
        trained_paths: k,
        sqrt_p_reference,
        exact_realization_units,
    })
}
