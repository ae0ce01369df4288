use std::collections::BTreeSet;

use crate::dense::Matrix;
use crate::optim::Objective;
use crate::rng::Rng;

/// Below `1 + LORENTZ_GUARD` the arccosh derivative is dropped.
pub const LORENTZ_GUARD: f64 = 1e-8;

/// `−⟨x, y⟩_L = x₀y₀ − Σ_{s≥1} x_s y_s`.
pub fn minus_lorentz(x: &[f64], y: &[f64]) -> f64 {
    x[0] * y[0] - x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum::<f64>()
}

/// `arccosh(−⟨x, y⟩_L)`, with arguments below 1 treated as coincident points.
pub fn lorentz_distance(x: &[f64], y: &[f64]) -> f64 {
    minus_lorentz(x, y).max(1.0).acosh()
}

/// Softmax embedding loss over a product of hyperboloids, one row per word.
///
/// For each related pair `(u, v)` the term is `−log softmax` of `−dist(u, v)`
/// against `{v} ∪ Neg(u)`.
#[derive(Clone, Debug)]
pub struct LorentzEmbedding {
    pub dim: usize,
    pub words: usize,
    /// Tree edges `(child, parent)`.
    pub edges: Vec<(usize, usize)>,
    /// Related pairs in both directions.
    pub pairs: Vec<(usize, usize)>,
    pub negatives: Vec<Vec<usize>>,
}

impl LorentzEmbedding {
    /// A random recursive tree: node `k ≥ 1` picks a uniform parent among
    /// `0..k`. `Neg(u)` is a seeded sample of up to `negatives` non-neighbours.
    pub fn generate(dim: usize, words: usize, negatives: usize, seed: u64) -> Self {
        let mut rng = Rng::derived(seed, 0x10E2);
        let edges: Vec<(usize, usize)> = (1..words).map(|k| (k, rng.index(k))).collect();
        let mut adjacent = vec![BTreeSet::new(); words];
        for &(c, p) in &edges {
            adjacent[c].insert(p);
            adjacent[p].insert(c);
        }
        let pairs = edges.iter().flat_map(|&(c, p)| [(c, p), (p, c)]).collect();
        let negatives = (0..words)
            .map(|u| {
                let mut pool: Vec<usize> = (0..words).filter(|&v| v != u && !adjacent[u].contains(&v)).collect();
                rng.shuffle(&mut pool);
                pool.truncate(negatives);
                pool.sort_unstable();
                pool
            })
            .collect();
        Self {
            dim,
            words,
            edges,
            pairs,
            negatives,
        }
    }

    /// Each row is `exp` of a Gaussian tangent vector of scale `scale` at the origin.
    pub fn initial_point(&self, scale: f64, seed: u64) -> Matrix {
        let mut rng = Rng::derived(seed, 0x10E3);
        let mut x = Matrix::zeros(self.words, self.dim);
        for w in 0..self.words {
            let v: Vec<f64> = (1..self.dim).map(|_| scale * rng.normal()).collect();
            let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let row = x.row_mut(w);
            row[0] = r.cosh();
            for (d, a) in row[1..].iter_mut().zip(&v) {
                *d = if r > 0.0 { r.sinh() * a / r } else { 0.0 };
            }
        }
        x
    }

    fn terms(&self) -> usize {
        self.pairs.iter().map(|&(u, _)| 1 + self.negatives[u].len()).sum()
    }

    /// Mean distance over tree edges and over sampled non-edges.
    pub fn separation(&self, x: &Matrix) -> (f64, f64) {
        let edge = self.edges.iter().map(|&(c, p)| lorentz_distance(x.row(c), x.row(p))).sum::<f64>()
            / self.edges.len().max(1) as f64;
        let mut total = 0.0;
        let mut count = 0usize;
        for (u, neg) in self.negatives.iter().enumerate() {
            for &v in neg {
                total += lorentz_distance(x.row(u), x.row(v));
                count += 1;
            }
        }
        (edge, total / count.max(1) as f64)
    }

    /// Candidate set of pair `(u, v)`: `v` first, then `Neg(u)`.
    fn candidates(&self, u: usize, v: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(v).chain(self.negatives[u].iter().copied())
    }

    /// Loss of one pair and the softmax weights of its candidates.
    fn pair_loss(&self, x: &Matrix, u: usize, v: usize) -> (f64, Vec<f64>) {
        let d: Vec<f64> = self.candidates(u, v).map(|w| lorentz_distance(x.row(u), x.row(w))).collect();
        let m = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = d.iter().map(|&di| (m - di).exp()).collect();
        let z: f64 = weights.iter().sum();
        let loss = d[0] - m + z.ln();
        (loss, weights.into_iter().map(|w| w / z).collect())
    }
}

impl Objective for LorentzEmbedding {
    fn value(&self, x: &Matrix) -> f64 {
        self.pairs.iter().map(|&(u, v)| self.pair_loss(x, u, v).0).sum()
    }

    fn gradient(&self, x: &Matrix) -> Matrix {
        let mut g = Matrix::zeros(self.words, self.dim);
        for &(u, v) in &self.pairs {
            let (_, weights) = self.pair_loss(x, u, v);
            for (q, (w, sm)) in self.candidates(u, v).zip(weights).enumerate() {
                // ∂loss/∂dist: 1 − softmax for the related word, −softmax otherwise.
                let dl = if q == 0 { 1.0 - sm } else { -sm };
                let z = minus_lorentz(x.row(u), x.row(w));
                if z < 1.0 + LORENTZ_GUARD || dl == 0.0 {
                    continue;
                }
                let c = dl / (z * z - 1.0).sqrt();
                for k in 0..self.dim {
                    let sign = if k == 0 { 1.0 } else { -1.0 };
                    let (xu, xw) = (x[(u, k)], x[(w, k)]);
                    g[(u, k)] += c * sign * xw;
                    g[(w, k)] += c * sign * xu;
                }
            }
        }
        g
    }

    fn gradient_flops(&self) -> u64 {
        // Per candidate: the form (2n), arccosh and exp, the weight, and two
        // row accumulations (4n).
        self.terms() as u64 * (6 * self.dim as u64 + 30)
    }
}
