//! Finite unitary systems on ℂ^m, path amplitudes and class operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pathspace::{CylinderEvent, NPath, PathSpace, SiteCount};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Tolerance for `max |U†U - I|` when a matrix is accepted as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

/// Tolerance for `| ‖ψ‖ - 1 |` on initial states.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry of `|U†U - I|`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest entry-wise distance between two matrices.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn check_unitary(u: &ComplexMatrix, m: usize) -> Result<()> {
    if u.nrows() != m || u.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: if u.nrows() != m { u.nrows() } else { u.ncols() },
        });
    }
    let residual = unitarity_residual(u);
    if residual.is_nan() || residual > UNITARITY_TOLERANCE {
        return Err(Error::NotUnitary {
            residual,
            tolerance: UNITARITY_TOLERANCE,
        });
    }
    Ok(())
}

/// Step operators `U(k+1,k)` on ℂ^m, either one fixed `U` or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteUnitarySystem {
    m: SiteCount,
    steps: Vec<ComplexMatrix>,
    stationary: Option<ComplexMatrix>,
}

impl FiniteUnitarySystem {
    /// `U(s,r) = U^(s-r)`.
    pub fn stationary(u: ComplexMatrix) -> Result<Self> {
        let m = SiteCount::new(u.nrows())?;
        check_unitary(&u, m.get())?;
        Ok(FiniteUnitarySystem {
            m,
            steps: Vec::new(),
            stationary: Some(u),
        })
    }

    /// `steps[k]` is `U(k+1,k)`; propagators beyond the list are unavailable.
    pub fn from_steps(steps: Vec<ComplexMatrix>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one step matrix is required".into()))?;
        let m = SiteCount::new(first.nrows())?;
        for u in &steps {
            check_unitary(u, m.get())?;
        }
        Ok(FiniteUnitarySystem {
            m,
            steps,
            stationary: None,
        })
    }

    /// The two-site hopper `(1/√2)[[1, i], [i, 1]]`.
    pub fn two_site_walk() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)]);
        Self::stationary(u).expect("two-site walk is unitary")
    }

    pub fn m(&self) -> SiteCount {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.get()
    }

    pub fn is_stationary(&self) -> bool {
        self.stationary.is_some()
    }

    pub fn stationary_operator(&self) -> Option<&ComplexMatrix> {
        self.stationary.as_ref()
    }

    /// Number of available steps, `None` when unbounded.
    pub fn available_steps(&self) -> Option<usize> {
        if self.stationary.is_some() {
            None
        } else {
            Some(self.steps.len())
        }
    }

    /// `U(k+1,k)`.
    pub fn step(&self, k: usize) -> Result<&ComplexMatrix> {
        if let Some(u) = &self.stationary {
            return Ok(u);
        }
        self.steps.get(k).ok_or(Error::MissingStep {
            step: k,
            available: self.steps.len(),
        })
    }

    pub fn check_rank(&self, n: usize) -> Result<()> {
        if n > 0 {
            self.step(n - 1)?;
        }
        Ok(())
    }

    /// `U(s,r) = U(s,s-1)⋯U(r+1,r)`, with `U(r,r) = I`.
    pub fn propagator(&self, s: usize, r: usize) -> Result<ComplexMatrix> {
        if r > s {
            return Err(Error::InvalidTimeRange { r, s });
        }
        let mut acc = ComplexMatrix::identity(self.dim(), self.dim());
        for k in r..s {
            acc = self.step(k)? * acc;
        }
        Ok(acc)
    }

    /// `b(γ) = ∏ₖ ⟨e_{γₖ}, U(k,k-1) e_{γₖ₋₁}⟩`.
    pub fn path_weight(&self, path: &NPath) -> Result<Complex64> {
        self.sites_weight(path.sites())
    }

    pub(crate) fn sites_weight(&self, sites: &[usize]) -> Result<Complex64> {
        let mut b = Complex64::new(1.0, 0.0);
        for (k, w) in sites.windows(2).enumerate() {
            b *= self.step(k)?[(w[1], w[0])];
        }
        Ok(b)
    }

    /// `a_ψ(γ) = b(γ) ψ(γ₀)`.
    pub fn amplitude(&self, psi: &InitialState, path: &NPath) -> Result<Complex64> {
        self.check_state(psi)?;
        Ok(self.path_weight(path)? * psi.get(path.initial()))
    }

    fn check_state(&self, psi: &InitialState) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        Ok(())
    }

    /// All amplitudes of Ωₙ in index order.
    ///
    /// Built rank by rank: the amplitude of `γj` is the amplitude of `γ` times
    /// one step matrix element, so each prefix product is computed once.
    pub fn amplitudes(&self, psi: &InitialState, space: &PathSpace, n: usize) -> Result<Vec<Complex64>> {
        self.check_state(psi)?;
        if space.m() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: space.m(),
            });
        }
        space.checked_len(n)?;
        self.check_rank(n)?;
        let m = self.dim();
        let mut layer: Vec<Complex64> = match space.fixed_initial() {
            Some(s) => vec![psi.get(s)],
            None => psi.as_slice().to_vec(),
        };
        for k in 0..n {
            let u = self.step(k)?;
            let mut next = Vec::with_capacity(layer.len() * m);
            for (idx, &a) in layer.iter().enumerate() {
                let last = space.final_site(k, idx as u64);
                for j in 0..m {
                    next.push(a * u[(j, last)]);
                }
            }
            layer = next;
        }
        Ok(layer)
    }

    /// `Cₙ(A) = Σ_{γ∈A} b(γ) |e_{γₙ}⟩⟨e_{γ₀}|`.
    pub fn class_operator(&self, event: &CylinderEvent) -> Result<ComplexMatrix> {
        let n = event.rank();
        self.check_rank(n)?;
        let m = self.dim();
        let mut out = ComplexMatrix::zeros(m, m);
        let mut buf = Vec::with_capacity(n + 1);
        for idx in event.iter() {
            event.space().decode_into(n, idx, &mut buf);
            let b = self.sites_weight(&buf)?;
            out[(buf[n], buf[0])] += b;
        }
        Ok(out)
    }
}

/// Unit vector ψ ∈ ℂ^m.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    psi: ComplexVector,
}

impl InitialState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("initial state must be non-empty".into()));
        }
        let psi = ComplexVector::from_vec(amplitudes);
        let norm = psi.norm();
        if norm.is_nan() || (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(InitialState { psi })
    }

    /// Standard basis vector `e_j`.
    pub fn basis(m: SiteCount, j: usize) -> Result<Self> {
        if j >= m.get() {
            return Err(Error::SiteOutOfRange { site: j, m: m.get() });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); m.get()];
        v[j] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.psi.len()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.psi[i]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.psi.as_slice()
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.psi
    }
}
