#![allow(dead_code)]

use levy_ifpt_core::{ExpTerm, MixedExpLevy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn side(rng: &mut ChaCha8Rng, kind: usize) -> Vec<ExpTerm> {
    let base = rng.random_range(2.0..8.0);
    match kind {
        0 => vec![ExpTerm::new(1.0, base)],
        1 => {
            let w = rng.random_range(0.2..0.8);
            vec![ExpTerm::new(w, base), ExpTerm::new(1.0 - w, base * rng.random_range(1.5..3.0))]
        }
        // Gamma(2)-like signed mixture: 2αe^{-αx} - 2αe^{-2αx} >= 0.
        _ => vec![ExpTerm::new(2.0, base), ExpTerm::new(-1.0, 2.0 * base)],
    }
}

/// Admissible model number `index`: even indices are Kou, odd ones carry
/// two-term (possibly signed) mixtures.
pub fn random_model(index: u64) -> MixedExpLevy {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + index);
    let (up_kind, down_kind) = if index.is_multiple_of(2) { (0, 0) } else { (rng.random_range(1..3), rng.random_range(1..3)) };
    let sigma = rng.random_range(0.1..0.5);
    let ell = rng.random_range(0.3..2.0);
    let p = rng.random_range(0.2..0.8);
    let up = side(&mut rng, up_kind);
    let down = side(&mut rng, down_kind);
    let mean_jump = |t: &[ExpTerm]| t.iter().map(|t| t.weight / t.rate).sum::<f64>();
    let jumps = ell * p * mean_jump(&up) - ell * (1.0 - p) * mean_jump(&down);
    let eta = -jumps - rng.random_range(0.1..0.5);
    let m = MixedExpLevy::new(sigma, eta, ell, p, up, down).unwrap();
    m.ensure_admissible().unwrap();
    m
}

pub fn kou_baseline() -> MixedExpLevy {
    MixedExpLevy::kou(0.3, -0.1, 1.0, 0.4, 5.0, 4.0).unwrap()
}
