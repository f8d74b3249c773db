//! The n-decoherence matrix, decoherence functional and quantum measure.
//!
//! `D̂ₙ(γ,γ') = a(γ) conj(a(γ')) δ(γₙ,γ'ₙ)` is a sum of `m` rank-one blocks, one
//! per final site, so the state keeps only the amplitude vector over Ωₙ.
//! Every query works on the per-site sums `Σ_{γ∈A, γₙ=i} a(γ)` and costs
//! O(|A|); the dense matrix exists for oracle checks on small ranks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pathspace::{CylinderEvent, PathSpace};
use crate::unitary::{ComplexMatrix, FiniteUnitarySystem, InitialState};

/// μ values this close to zero are reported as zero.
pub const MEASURE_CLAMP: f64 = 1e-12;

/// Default cap on |Ωₙ| for dense materialization.
pub const DEFAULT_DENSE_CAP: usize = 4096;

const TRACE_TOLERANCE: f64 = 1e-10;

pub(crate) fn clamp_measure(x: f64) -> f64 {
    if (-MEASURE_CLAMP..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// Rank-≤m representation of D̂ₙ.
#[derive(Debug, Clone)]
pub struct DecoherenceState {
    space: PathSpace,
    rank: usize,
    amplitudes: Vec<Complex64>,
}

impl DecoherenceState {
    pub fn build(
        sys: &FiniteUnitarySystem,
        psi: &InitialState,
        space: &PathSpace,
        n: usize,
    ) -> Result<Self> {
        if let Some(s) = space.fixed_initial() {
            let outside: f64 = (0..psi.dim())
                .filter(|&i| i != s)
                .map(|i| psi.get(i).norm_sqr())
                .sum();
            if outside > TRACE_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "initial state has weight {outside:e} outside the pinned site {s}"
                )));
            }
        }
        let amplitudes = sys.amplitudes(psi, space, n)?;
        let state = DecoherenceState {
            space: *space,
            rank: n,
            amplitudes,
        };
        let tr = state.trace();
        if tr.is_nan() || (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NotNormalized { norm: tr.sqrt() });
        }
        Ok(state)
    }

    pub fn space(&self) -> &PathSpace {
        &self.space
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `a_ψ(γ)` for every γ in index order.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn final_site(&self, index: u64) -> usize {
        self.space.final_site(self.rank, index)
    }

    /// Indices and amplitudes of the paths ending at `site`.
    pub fn group(&self, site: usize) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| (i as u64, a))
            .filter(move |&(i, _)| self.final_site(i) == site)
    }

    pub fn trace(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_event(&self, event: &CylinderEvent) -> Result<()> {
        if event.rank() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                actual: event.rank(),
            });
        }
        let es = event.space();
        if es.m() != self.space.m() || es.fixed_initial() != self.space.fixed_initial() {
            return Err(Error::InvalidArgument(
                "event and state live on different path spaces".into(),
            ));
        }
        Ok(())
    }

    /// `Σ_{γ∈A, γₙ=i} a(γ)` for each final site `i`.
    pub fn site_sums(&self, event: &CylinderEvent) -> Result<Vec<Complex64>> {
        self.check_event(event)?;
        let mut sums = vec![Complex64::new(0.0, 0.0); self.m()];
        for idx in event.iter() {
            sums[self.final_site(idx)] += self.amplitudes[idx as usize];
        }
        Ok(sums)
    }

    /// `Dₙ(A,B) = Σ_{γ∈A, γ'∈B} a(γ) conj(a(γ')) δ(γₙ,γ'ₙ)`.
    pub fn decoherence_functional(&self, a: &CylinderEvent, b: &CylinderEvent) -> Result<Complex64> {
        let sa = self.site_sums(a)?;
        let sb = self.site_sums(b)?;
        Ok(sa.iter().zip(&sb).map(|(x, y)| x * y.conj()).sum())
    }

    /// `μₙ(A) = Σᵢ |Σ_{γ∈A, γₙ=i} a(γ)|²`.
    pub fn q_measure(&self, event: &CylinderEvent) -> Result<f64> {
        let s = self.site_sums(event)?;
        Ok(clamp_measure(s.iter().map(|z| z.norm_sqr()).sum()))
    }

    /// `pₙ(i) = μₙ({γ : γₙ = i})`.
    pub fn position_distribution(&self) -> Vec<f64> {
        let mut sums = vec![Complex64::new(0.0, 0.0); self.m()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            sums[self.final_site(i as u64)] += a;
        }
        sums.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Eigenpairs of D̂ₙ: λᵢ is the weight of the paths ending at `i`, and vᵢ
    /// the normalized amplitude vector restricted to them.
    pub fn spectrum(&self) -> SpectralDecomposition {
        let m = self.m();
        let mut indices: Vec<Vec<u64>> = vec![Vec::new(); m];
        let mut values: Vec<Vec<Complex64>> = vec![Vec::new(); m];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let site = self.final_site(i as u64);
            indices[site].push(i as u64);
            values[site].push(a);
        }
        let mut eigenvalues = Vec::with_capacity(m);
        let mut pairs = Vec::with_capacity(m);
        for (site, (idx, mut vals)) in indices.into_iter().zip(values).enumerate() {
            let lambda: f64 = vals.iter().map(|z| z.norm_sqr()).sum();
            eigenvalues.push(lambda);
            if lambda == 0.0 {
                pairs.push(None);
                continue;
            }
            let norm = lambda.sqrt();
            let lead = vals
                .iter()
                .find(|z| z.norm() > PHASE_THRESHOLD * norm)
                .copied()
                .unwrap_or(Complex64::new(norm, 0.0));
            let phase = lead.conj() / lead.norm();
            for v in vals.iter_mut() {
                *v = *v * phase / norm;
            }
            pairs.push(Some(Eigenpair {
                site,
                eigenvalue: lambda,
                indices: idx,
                vector: vals,
            }));
        }
        SpectralDecomposition { eigenvalues, pairs }
    }

    /// `μₙ(A) = Σᵢ λᵢ |Σ_{γ∈A} ⟨χ_γ, vᵢ⟩|²` through the spectral decomposition.
    pub fn q_measure_spectral(&self, spectrum: &SpectralDecomposition, event: &CylinderEvent) -> Result<f64> {
        self.check_event(event)?;
        let mut total = 0.0;
        for pair in spectrum.pairs.iter().flatten() {
            let mut overlap = Complex64::new(0.0, 0.0);
            for idx in event.iter() {
                if let Some(z) = pair.entry(idx) {
                    overlap += z;
                }
            }
            total += pair.eigenvalue * overlap.norm_sqr();
        }
        Ok(clamp_measure(total))
    }

    /// Full |Ωₙ| × |Ωₙ| matrix of D̂ₙ.
    pub fn dense_matrix(&self, cap: usize) -> Result<ComplexMatrix> {
        let n = self.amplitudes.len();
        if n > cap {
            return Err(Error::DenseCapExceeded {
                size: n as u128,
                cap,
            });
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| {
            if self.final_site(i as u64) == self.final_site(j as u64) {
                self.amplitudes[i] * self.amplitudes[j].conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }
}

const PHASE_THRESHOLD: f64 = 1e-14;

/// One eigenpair of D̂ₙ, stored on its support `{γ : γₙ = site}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub site: usize,
    pub eigenvalue: f64,
    /// Path indices of the support, increasing.
    pub indices: Vec<u64>,
    /// Unit vector entries aligned with `indices`; the first entry above
    /// the phase threshold is real and positive.
    pub vector: Vec<Complex64>,
}

impl Eigenpair {
    pub fn entry(&self, index: u64) -> Option<Complex64> {
        self.indices.binary_search(&index).ok().map(|k| self.vector[k])
    }

    /// Number of support paths with nonzero amplitude.
    pub fn support_size(&self) -> usize {
        self.vector.iter().filter(|z| z.norm() > 0.0).count()
    }

    pub fn to_dense(&self, len: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); len];
        for (&i, &z) in self.indices.iter().zip(&self.vector) {
            v[i as usize] = z;
        }
        v
    }
}

/// λᵢ for each final site and the eigenvectors with λᵢ > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// λᵢ indexed by final site, zeros included.
    pub eigenvalues: Vec<f64>,
    /// `None` where the amplitude restriction vanishes.
    pub pairs: Vec<Option<Eigenpair>>,
}

impl SpectralDecomposition {
    pub fn eigenvalue_sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `Σ λᵢ |vᵢ⟩⟨vᵢ|` over Ωₙ.
    pub fn reconstruct(&self, len: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(len, len);
        for p in self.pairs.iter().flatten() {
            for (a, &i) in p.indices.iter().enumerate() {
                for (b, &j) in p.indices.iter().enumerate() {
                    out[(i as usize, j as usize)] += p.eigenvalue * p.vector[a] * p.vector[b].conj();
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathspace::SiteCount;
    use crate::random;
    use crate::unitary::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn walk_state(n: usize) -> DecoherenceState {
        let sys = FiniteUnitarySystem::two_site_walk();
        let m = SiteCount::new(2).unwrap();
        let space = PathSpace::with_fixed_initial(m, 0).unwrap();
        DecoherenceState::build(&sys, &InitialState::basis(m, 0).unwrap(), &space, n).unwrap()
    }

    #[test]
    fn walk_singletons_have_equal_measure() {
        let st = walk_state(5);
        for i in 0..32 {
            let e = CylinderEvent::from_indices(*st.space(), 5, [i]).unwrap();
            assert!((st.q_measure(&e).unwrap() - 1.0 / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_zero_is_a_single_entry() {
        let st = walk_state(0);
        let d = st.dense_matrix(DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(d.nrows(), 1);
        assert_eq!(d[(0, 0)], Complex64::new(1.0, 0.0));

        let m = SiteCount::new(2).unwrap();
        let free = PathSpace::new(m);
        let sys = FiniteUnitarySystem::two_site_walk();
        let st = DecoherenceState::build(&sys, &InitialState::basis(m, 0).unwrap(), &free, 0).unwrap();
        let d = st.dense_matrix(DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(d[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(d[(1, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(st.position_distribution(), [1.0, 0.0]);
    }

    #[test]
    fn walk_positions_and_measures() {
        let p1 = walk_state(1).position_distribution();
        assert!((p1[0] - 0.5).abs() < 1e-15 && (p1[1] - 0.5).abs() < 1e-15);
        let p2 = walk_state(2).position_distribution();
        assert!(p2[0].abs() < 1e-15 && (p2[1] - 1.0).abs() < 1e-15);
        let st = walk_state(2);
        let e2 = CylinderEvent::final_site(*st.space(), 2, 1).unwrap();
        assert!((st.q_measure(&e2).unwrap() - 1.0).abs() < 1e-15);
        let all = CylinderEvent::all(*st.space(), 2).unwrap();
        assert!((st.decoherence_functional(&all, &all).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn walk_spectrum() {
        for n in 1..6 {
            let st = walk_state(n);
            let sp = st.spectrum();
            for l in &sp.eigenvalues {
                assert!((l - 0.5).abs() < 1e-14);
            }
            for t in [1usize, 3] {
                if t == n {
                    let e = CylinderEvent::final_site(*st.space(), n, 1).unwrap();
                    assert!((st.q_measure_spectral(&sp, &e).unwrap() - 0.5).abs() < 1e-14);
                }
            }
            let empty = CylinderEvent::empty(*st.space(), n);
            assert_eq!(st.q_measure_spectral(&sp, &empty).unwrap(), 0.0);
        }
        // listed unit eigenvector for the odd-indexed paths at rank 2: (0, i, 0, i)/√2,
        // shown here after fixing the phase so its first entry is positive
        let sp = walk_state(2).spectrum();
        let v1 = sp.pairs[1].as_ref().unwrap();
        assert_eq!(v1.indices, [1, 3]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v1.vector[0] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((v1.vector[1] - Complex64::new(s, 0.0)).norm() < 1e-15);
        let v0 = sp.pairs[0].as_ref().unwrap();
        assert!((v0.vector[1] - Complex64::new(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn absent_eigenpairs() {
        // identity dynamics from e_0 never leaves site 0
        let m = SiteCount::new(3).unwrap();
        let sys = FiniteUnitarySystem::stationary(ComplexMatrix::identity(3, 3)).unwrap();
        let space = PathSpace::new(m);
        let st = DecoherenceState::build(&sys, &InitialState::basis(m, 0).unwrap(), &space, 2).unwrap();
        let sp = st.spectrum();
        assert!(sp.pairs[0].is_some());
        assert!(sp.pairs[1].is_none() && sp.pairs[2].is_none());
        assert_eq!(sp.eigenvalues, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn reconstruction_and_dense_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = SiteCount::new(3).unwrap();
        let sys = random::random_system(m, 3, &mut rng);
        let psi = random::random_state(m, &mut rng);
        let space = PathSpace::new(m);
        let st = DecoherenceState::build(&sys, &psi, &space, 3).unwrap();
        let d = st.dense_matrix(DEFAULT_DENSE_CAP).unwrap();
        assert!(max_abs_diff(&d, &d.adjoint()) <= 1e-14);
        let tr: f64 = (0..d.nrows()).map(|i| d[(i, i)].re).sum();
        assert!((tr - 1.0).abs() < 1e-12);
        let rec = st.spectrum().reconstruct(st.len());
        assert!(max_abs_diff(&d, &rec) < 1e-10);
        assert!(matches!(st.dense_matrix(80), Err(Error::DenseCapExceeded { .. })));
    }

    #[test]
    fn rank_mismatch_is_an_error() {
        let st = walk_state(3);
        let e = CylinderEvent::empty(*st.space(), 2);
        assert!(matches!(st.q_measure(&e), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn pinned_site_requires_supported_state() {
        let m = SiteCount::new(2).unwrap();
        let space = PathSpace::with_fixed_initial(m, 0).unwrap();
        let sys = FiniteUnitarySystem::two_site_walk();
        let psi = InitialState::basis(m, 1).unwrap();
        assert!(DecoherenceState::build(&sys, &psi, &space, 2).is_err());
    }
}
