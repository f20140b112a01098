use rand_distr::{Distribution, StandardNormal};

use crate::preprocess::TensorImage;
use crate::rng::seeded;

const POOL: usize = 4;

/// Seeded stand-in for a pretrained CNN: 4x4 average pooling, a fixed random
/// projection to `d` dimensions plus bias, then ReLU.
#[derive(Debug, Clone)]
pub struct ToyExtractor {
    seed: u64,
    d: usize,
    input_side: usize,
    cells_per_row: usize,
    /// `d` rows of `cells_per_row^2` weights.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

/// Builds the toy extractor; weights depend on `seed` only.
pub fn toy_extractor(seed: u64, d: usize, input_side: usize) -> ToyExtractor {
    assert!(d >= 1, "toy extractor needs d >= 1");
    assert!(input_side >= 1, "toy extractor needs a positive input side");
    let cells_per_row = input_side.div_ceil(POOL);
    let fan_in = cells_per_row * cells_per_row;
    let scale = 1.0 / (fan_in as f64).sqrt();
    let mut rng = seeded(seed, 0);
    let weights = (0..d * fan_in)
        .map(|_| {
            let w: f64 = StandardNormal.sample(&mut rng);
            w * scale
        })
        .collect();
    let bias = (0..d)
        .map(|_| {
            let b: f64 = StandardNormal.sample(&mut rng);
            0.1 * b
        })
        .collect();
    ToyExtractor { seed, d, input_side, cells_per_row, weights, bias }
}

impl ToyExtractor {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn output_dim(&self) -> usize {
        self.d
    }

    pub fn input_side(&self) -> usize {
        self.input_side
    }

    /// Block means; edge blocks average over the pixels they actually cover.
    pub fn pool(&self, img: &TensorImage) -> Vec<f64> {
        let c = self.cells_per_row;
        let mut sums = vec![0.0; c * c];
        let mut counts = vec![0usize; c * c];
        for y in 0..img.side {
            for x in 0..img.side {
                let cell = (y / POOL) * c + x / POOL;
                sums[cell] += f64::from(img.get(x, y));
                counts[cell] += 1;
            }
        }
        sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect()
    }

    pub fn extract(&self, img: &TensorImage) -> Vec<f32> {
        let pooled = self.pool(img);
        let fan_in = pooled.len();
        (0..self.d)
            .map(|j| {
                let w = &self.weights[j * fan_in..(j + 1) * fan_in];
                let z: f64 = self.bias[j] + w.iter().zip(&pooled).map(|(a, b)| a * b).sum::<f64>();
                z.max(0.0) as f32
            })
            .collect()
    }
}
