//! Seeded generators for random unitaries, states and events.
//!
//! Everything here takes an explicit RNG so test and CLI runs are reproducible
//! from a recorded seed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::pathspace::{CylinderEvent, PathSpace, SiteCount};
use crate::unitary::{ComplexMatrix, FiniteUnitarySystem, InitialState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unitary from modified Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(m: SiteCount, rng: &mut R) -> ComplexMatrix {
    let n = m.get();
    loop {
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|_| (0..n).map(|_| gaussian(rng)).collect()).collect();
        let mut ok = true;
        for k in 0..n {
            // two passes keep the columns orthogonal to ~1 ulp
            for _ in 0..2 {
                for j in 0..k {
                    let proj: Complex64 = (0..n).map(|i| cols[j][i].conj() * cols[k][i]).sum();
                    let (head, tail) = cols.split_at_mut(k);
                    for (x, v) in tail[0].iter_mut().zip(&head[j]) {
                        *x -= proj * v;
                    }
                }
            }
            let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[k].iter_mut().for_each(|z| *z /= norm);
        }
        if ok {
            return ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

pub fn random_state<R: Rng + ?Sized>(m: SiteCount, rng: &mut R) -> InitialState {
    let v: Vec<Complex64> = (0..m.get()).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    InitialState::new(v.into_iter().map(|z| z / norm).collect()).expect("normalized")
}

/// Non-stationary system with independent random steps.
pub fn random_system<R: Rng + ?Sized>(m: SiteCount, steps: usize, rng: &mut R) -> FiniteUnitarySystem {
    let steps = steps.max(1);
    FiniteUnitarySystem::from_steps((0..steps).map(|_| random_unitary(m, rng)).collect())
        .expect("random steps are unitary")
}

pub fn random_stationary<R: Rng + ?Sized>(m: SiteCount, rng: &mut R) -> FiniteUnitarySystem {
    FiniteUnitarySystem::stationary(random_unitary(m, rng)).expect("random unitary")
}

/// Random subset of Ωₙ, each path kept with probability `density`.
pub fn random_event<R: Rng + ?Sized>(space: PathSpace, rank: usize, density: f64, rng: &mut R) -> CylinderEvent {
    let len = space.checked_len(rank).expect("rank within budget");
    let idx: Vec<u64> = (0..len).filter(|_| rng.random::<f64>() < density).collect();
    CylinderEvent::from_indices(space, rank, idx).expect("indices in range")
}

/// Random ordered partition of Ωₙ into `parts` disjoint events (some may be empty).
pub fn random_partition<R: Rng + ?Sized>(
    space: PathSpace,
    rank: usize,
    parts: usize,
    rng: &mut R,
) -> Vec<CylinderEvent> {
    let len = space.checked_len(rank).expect("rank within budget");
    let mut buckets: Vec<Vec<u64>> = vec![Vec::new(); parts];
    for i in 0..len {
        // one extra bucket is left out, so unions need not cover Ωₙ
        let b = rng.random_range(0..=parts);
        if b < parts {
            buckets[b].push(i);
        }
    }
    buckets
        .into_iter()
        .map(|v| CylinderEvent::from_indices(space, rank, v).expect("indices in range"))
        .collect()
}
