#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sparseq::linalg::SparseColumnMatrix;
use sparseq::{LossKind, LossModel, Problem, SubspaceView};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, scale: f64) -> SparseColumnMatrix {
    let data: Vec<f64> = (0..m * n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    SparseColumnMatrix::from_dense(m, n, &data).unwrap()
}

pub fn targets(rng: &mut ChaCha8Rng, kind: LossKind, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| match kind {
            LossKind::LeastSquares => rng.sample(StandardNormal),
            LossKind::Logistic => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect()
}

/// A problem with `n = s + extra` features and a point supported on `s`
/// random coordinates with magnitudes in `[0.1, 2]`.
pub struct SubspaceCase {
    pub problem: Problem,
    pub x: Vec<f64>,
}

impl SubspaceCase {
    pub fn view(&self) -> SubspaceView {
        SubspaceView::at(&self.x, &self.problem).unwrap()
    }
}

pub fn subspace_case(seed: u64, kind: LossKind, m: usize, s: usize, extra: usize) -> SubspaceCase {
    let mut rng = rng(seed);
    let n = s + extra;
    let a = gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt());
    let b = targets(&mut rng, kind, m);
    let lam = 10f64.powf(rng.random_range(-2.0..0.0));
    let q = rng.random_range(0.1..0.9);
    let mut support = rand::seq::index::sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    let mut x = vec![0.0; n];
    for j in support {
        let mag: f64 = rng.random_range(0.1..2.0);
        x[j] = if rng.random::<bool>() { mag } else { -mag };
    }
    let problem = Problem::new(a, LossModel::new(kind, b).unwrap(), lam, q).unwrap();
    SubspaceCase { problem, x }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}
