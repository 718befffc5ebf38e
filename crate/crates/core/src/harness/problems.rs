//! Convex cost sequences f_1, f_2, … used by the OCO loop.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numerics::{project_box, FeasibleBox, Vector};

/// A sequence of convex costs over a box, queried by step index `t ≥ 1`.
///
/// Implementations must be deterministic: the same `(t, x)` always returns
/// the same value, so paired optimizer runs see the same cost sequence.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize {
        self.feasible().dim()
    }

    fn cost(&self, t: usize, x: &Vector) -> f64;

    fn grad(&self, t: usize, x: &Vector) -> Vector;

    fn feasible(&self) -> &FeasibleBox;

    /// Uniform bound G∞ on ‖∇f_t(x)‖∞ over the box.
    fn g_inf(&self) -> f64;

    /// Default starting point x₁.
    fn initial_point(&self) -> Vector {
        self.feasible().center()
    }

    /// argmin over the box of Σ_{t≤horizon} f_t, when the family knows it.
    fn comparator(&self, _horizon: usize) -> Option<Vector> {
        None
    }

    /// Whether Σ_t f_t separates into a sum of per-coordinate terms.
    fn is_separable(&self) -> bool {
        false
    }
}

/// The periodic linear sequence on [−1, 1]:
/// f_t(x) = 1010·x when t mod 101 = 1, −10·x otherwise.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    feasible: FeasibleBox,
}

pub const SYNTHETIC_SPIKE: f64 = 1010.0;
pub const SYNTHETIC_DRIFT: f64 = -10.0;
pub const SYNTHETIC_PERIOD: usize = 101;

pub fn synthetic_problem() -> SyntheticProblem {
    SyntheticProblem {
        feasible: FeasibleBox::cube(1, -1.0, 1.0).expect("unit interval"),
    }
}

impl SyntheticProblem {
    pub fn slope(t: usize) -> f64 {
        if t % SYNTHETIC_PERIOD == 1 {
            SYNTHETIC_SPIKE
        } else {
            SYNTHETIC_DRIFT
        }
    }
}

impl Problem for SyntheticProblem {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn cost(&self, t: usize, x: &Vector) -> f64 {
        Self::slope(t) * x[0]
    }

    fn grad(&self, t: usize, _x: &Vector) -> Vector {
        Vector::new(vec![Self::slope(t)])
    }

    fn feasible(&self) -> &FeasibleBox {
        &self.feasible
    }

    fn g_inf(&self) -> f64 {
        SYNTHETIC_SPIKE
    }

    fn initial_point(&self) -> Vector {
        Vector::new(vec![1.0])
    }

    // Every window of 101 steps contains one spike, so the summed slope is
    // at least 10 per spike and stays positive for any horizon.
    fn comparator(&self, _horizon: usize) -> Option<Vector> {
        Some(Vector::new(vec![-1.0]))
    }

    fn is_separable(&self) -> bool {
        true
    }
}

/// f_t(x) = ½‖x − c_t‖² with centers c_t drawn uniformly in the box.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    feasible: FeasibleBox,
    centers: CenterSource,
}

#[derive(Debug, Clone)]
enum CenterSource {
    Seeded(u64),
    Fixed(Vector),
}

pub fn quadratic_problem(seed: u64, dim: usize, feasible: FeasibleBox) -> Result<QuadraticProblem> {
    if dim == 0 || feasible.dim() != dim {
        return Err(Error::contract(format!(
            "quadratic problem needs dimension ≥ 1 matching the box (got {dim}, box {})",
            feasible.dim()
        )));
    }
    Ok(QuadraticProblem {
        feasible,
        centers: CenterSource::Seeded(seed),
    })
}

impl QuadraticProblem {
    /// Every f_t shares the center `c`.
    pub fn fixed_center(c: Vector, feasible: FeasibleBox) -> Result<Self> {
        if !feasible.contains(&c) {
            return Err(Error::contract("fixed center must lie in the box"));
        }
        Ok(QuadraticProblem {
            feasible,
            centers: CenterSource::Fixed(c),
        })
    }

    pub fn center(&self, t: usize) -> Vector {
        match &self.centers {
            CenterSource::Fixed(c) => c.clone(),
            CenterSource::Seeded(seed) => {
                let mut rng = stream_rng(*seed, t);
                let lo = self.feasible.lower();
                let hi = self.feasible.upper();
                Vector::new(
                    (0..self.feasible.dim())
                        .map(|i| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>())
                        .collect(),
                )
            }
        }
    }
}

impl Problem for QuadraticProblem {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn cost(&self, t: usize, x: &Vector) -> f64 {
        let r = x.sub(&self.center(t));
        0.5 * r.dot(&r)
    }

    fn grad(&self, t: usize, x: &Vector) -> Vector {
        x.sub(&self.center(t))
    }

    fn feasible(&self) -> &FeasibleBox {
        &self.feasible
    }

    fn g_inf(&self) -> f64 {
        self.feasible.diameter()
    }

    fn comparator(&self, horizon: usize) -> Option<Vector> {
        if let CenterSource::Fixed(c) = &self.centers {
            return Some(c.clone());
        }
        let d = self.feasible.dim();
        let mut mean = vec![0.0; d];
        for t in 1..=horizon {
            let c = self.center(t);
            for (acc, ci) in mean.iter_mut().zip(c.iter()) {
                *acc += ci;
            }
        }
        let n = horizon.max(1) as f64;
        let mean = Vector::new(mean.into_iter().map(|s| s / n).collect());
        project_box(&mean, &self.feasible).ok()
    }

    fn is_separable(&self) -> bool {
        true
    }
}

/// 1-d piecewise-linear costs f_t(x) = w_t·|x − c_t| on [−1, 1].
///
/// Has no closed-form comparator here, so [`comparator_oracle`] falls back
/// to its numerical search.
///
/// [`comparator_oracle`]: super::comparator_oracle
#[derive(Debug, Clone)]
pub struct AbsDeviationProblem {
    feasible: FeasibleBox,
    seed: u64,
}

pub fn abs_deviation_problem(seed: u64) -> AbsDeviationProblem {
    AbsDeviationProblem {
        feasible: FeasibleBox::cube(1, -1.0, 1.0).expect("unit interval"),
        seed,
    }
}

impl AbsDeviationProblem {
    /// (weight, kink) of f_t; weights lie in [0.5, 2).
    pub fn piece(&self, t: usize) -> (f64, f64) {
        let mut rng = stream_rng(self.seed, t);
        let w = 0.5 + 1.5 * rng.random::<f64>();
        let c = -1.0 + 2.0 * rng.random::<f64>();
        (w, c)
    }
}

impl Problem for AbsDeviationProblem {
    fn name(&self) -> &str {
        "abs_deviation"
    }

    fn cost(&self, t: usize, x: &Vector) -> f64 {
        let (w, c) = self.piece(t);
        w * (x[0] - c).abs()
    }

    fn grad(&self, t: usize, x: &Vector) -> Vector {
        let (w, c) = self.piece(t);
        let s = if x[0] > c {
            1.0
        } else if x[0] < c {
            -1.0
        } else {
            0.0
        };
        Vector::new(vec![w * s])
    }

    fn feasible(&self) -> &FeasibleBox {
        &self.feasible
    }

    fn g_inf(&self) -> f64 {
        2.0
    }

    fn is_separable(&self) -> bool {
        true
    }
}

/// Binary logistic regression on a seeded two-cluster Gaussian mixture.
///
/// Parameters are (w₀, w₁, b). f_t is the mean log-loss on minibatch t.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    feasible: FeasibleBox,
    features: Vec<[f64; 2]>,
    labels: Vec<f64>,
    batch_size: usize,
    seed: u64,
    g_inf: f64,
}

pub const LOGISTIC_POINTS: usize = 200;
pub const LOGISTIC_BATCH: usize = 16;

pub fn toy_training_problem(seed: u64) -> LogisticProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut features = Vec::with_capacity(LOGISTIC_POINTS);
    let mut labels = Vec::with_capacity(LOGISTIC_POINTS);
    for j in 0..LOGISTIC_POINTS {
        let label = (j % 2) as f64;
        let (cx, cy) = if label == 1.0 { (1.0, 0.5) } else { (-1.0, -0.5) };
        features.push([cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]);
        labels.push(label);
    }
    // |∂/∂w_k| ≤ |σ − y|·|x_k| ≤ max |x_k|; the bias coordinate is bounded by 1.
    let g_inf = features
        .iter()
        .flat_map(|p| p.iter().map(|v: &f64| v.abs()))
        .fold(1.0, f64::max);
    LogisticProblem {
        feasible: FeasibleBox::cube(3, -10.0, 10.0).expect("weight box"),
        features,
        labels,
        batch_size: LOGISTIC_BATCH,
        seed,
        g_inf,
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticProblem {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Indices of the minibatch that defines f_t.
    pub fn batch(&self, t: usize) -> Vec<usize> {
        let mut rng = stream_rng(self.seed ^ 0x9e37_79b9_7f4a_7c15, t);
        index::sample(&mut rng, self.features.len(), self.batch_size).into_vec()
    }

    fn point_loss(&self, j: usize, w: &Vector) -> f64 {
        let [a, b] = self.features[j];
        let z = w[0] * a + w[1] * b + w[2];
        // −[y ln σ(z) + (1−y) ln(1−σ(z))]
        softplus(z) - self.labels[j] * z
    }

    fn point_grad(&self, j: usize, w: &Vector, out: &mut [f64; 3], scale: f64) {
        let [a, b] = self.features[j];
        let z = w[0] * a + w[1] * b + w[2];
        let r = (sigmoid(z) - self.labels[j]) * scale;
        out[0] += r * a;
        out[1] += r * b;
        out[2] += r;
    }

    /// Mean log-loss over the whole data set.
    pub fn full_loss(&self, w: &Vector) -> f64 {
        (0..self.len()).map(|j| self.point_loss(j, w)).sum::<f64>() / self.len() as f64
    }

    fn batch_counts(&self, horizon: usize) -> Vec<f64> {
        let mut counts = vec![0.0; self.len()];
        for t in 1..=horizon {
            for j in self.batch(t) {
                counts[j] += 1.0;
            }
        }
        counts
    }

    fn weighted_grad_hessian(&self, counts: &[f64], w: &Vector) -> ([f64; 3], [[f64; 3]; 3]) {
        let mut g = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for (j, &c) in counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let [a, b] = self.features[j];
            let feat = [a, b, 1.0];
            let z = w[0] * a + w[1] * b + w[2];
            let s = sigmoid(z);
            let r = (s - self.labels[j]) * c;
            let k = s * (1.0 - s) * c;
            for p in 0..3 {
                g[p] += r * feat[p];
                for q in 0..3 {
                    hess[p][q] += k * feat[p] * feat[q];
                }
            }
        }
        (g, hess)
    }

    fn weighted_loss(&self, counts: &[f64], w: &Vector) -> f64 {
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(j, &c)| c * self.point_loss(j, w))
            .sum()
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = b[r];
        }
        *xk = det(m) / d;
    }
    Some(x)
}

impl Problem for LogisticProblem {
    fn name(&self) -> &str {
        "logistic"
    }

    fn cost(&self, t: usize, x: &Vector) -> f64 {
        let batch = self.batch(t);
        batch.iter().map(|&j| self.point_loss(j, x)).sum::<f64>() / batch.len() as f64
    }

    fn grad(&self, t: usize, x: &Vector) -> Vector {
        let batch = self.batch(t);
        let scale = 1.0 / batch.len() as f64;
        let mut out = [0.0; 3];
        for j in batch {
            self.point_grad(j, x, &mut out, scale);
        }
        Vector::new(out.to_vec())
    }

    fn feasible(&self) -> &FeasibleBox {
        &self.feasible
    }

    fn g_inf(&self) -> f64 {
        self.g_inf
    }

    /// Σ_{t≤T} f_t is a count-weighted log-loss; damped Newton with
    /// backtracking, projected onto the box.
    fn comparator(&self, horizon: usize) -> Option<Vector> {
        let counts = self.batch_counts(horizon);
        let mut w = Vector::zeros(3);
        let mut f = self.weighted_loss(&counts, &w);
        for _ in 0..100 {
            let (g, hess) = self.weighted_grad_hessian(&counts, &w);
            let dir = solve3(hess, g).unwrap_or(g);
            let mut step = 1.0;
            let mut improved = false;
            while step > 1e-12 {
                let cand = Vector::new((0..3).map(|k| w[k] - step * dir[k]).collect());
                let cand = project_box(&cand, &self.feasible).ok()?;
                let fc = self.weighted_loss(&counts, &cand);
                if fc < f {
                    w = cand;
                    f = fc;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Some(w)
    }
}

/// A ChaCha stream keyed by step index, so costs are pure functions of `t`.
fn stream_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}
