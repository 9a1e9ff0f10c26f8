#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhor_core::{
    hermitize, normalize, CMatrix, Complex64, Dataset, DensityMatrix, HermitianOperator,
    PovmElement,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussianish(rng: &mut ChaCha8Rng) -> f64 {
    // sum of uniforms is plenty for generic matrices
    (0..4).map(|_| rng.gen::<f64>() - 0.5).sum()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(gaussianish(rng), gaussianish(rng))
    })
}

/// Full-rank random state `A A† / Tr(A A†)`.
pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
    let a = random_matrix(rng, n);
    normalize(&hermitize(&a.matmul(&a.adjoint())).unwrap()).unwrap()
}

/// Random complete POVM: `G^{-1/2} B_j B_j† G^{-1/2}` with `G = Σ B_j B_j†`.
pub fn random_povm(rng: &mut ChaCha8Rng, n: usize, outcomes: usize) -> Vec<PovmElement> {
    let raw: Vec<HermitianOperator> = (0..outcomes)
        .map(|_| {
            let b = random_matrix(rng, n);
            hermitize(&b.matmul(&b.adjoint())).unwrap()
        })
        .collect();
    let mut sum = CMatrix::zeros(n, n);
    for r in &raw {
        sum.add_scaled_assign(1.0, r.matrix());
    }
    let g = hermitize(&sum).unwrap();
    let g_inv_sqrt = g.map_spectrum(|l| 1.0 / l.sqrt());
    raw.iter()
        .map(|r| {
            let m = g_inv_sqrt
                .matrix()
                .matmul(r.matrix())
                .matmul(g_inv_sqrt.matrix());
            PovmElement::new(hermitize(&m).unwrap()).unwrap()
        })
        .collect()
}

/// Random state plus random dataset (complete POVM, positive real counts).
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (DensityMatrix, Dataset) {
    let outcomes = n + rng.gen_range(1..=n + 2);
    let povm = random_povm(rng, n, outcomes);
    let pairs: Vec<(PovmElement, f64)> = povm
        .into_iter()
        .map(|e| (e, rng.gen_range(1.0..50.0)))
        .collect();
    let data = Dataset::from_pairs(pairs).unwrap();
    (random_density(rng, n), data)
}

/// Computational-basis projectors with random positive integer counts.
pub fn random_projective_dataset(rng: &mut ChaCha8Rng, n: usize) -> (Dataset, Vec<f64>) {
    let counts: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=100) as f64).collect();
    let pairs = (0..n).map(|i| {
        let mut d = vec![0.0; n];
        d[i] = 1.0;
        (PovmElement::from_diagonal(&d).unwrap(), counts[i])
    });
    let data = Dataset::from_pairs(pairs).unwrap();
    let total: f64 = counts.iter().sum();
    (data, counts.iter().map(|c| c / total).collect())
}
