//! Quantization of random variables on finite probability spaces.
//!
//! An operator `f̂` acts on L²(ν) by `(f̂g)(y) = Σₓ min[f(x), f(y)] g(x) ν(x)`
//! for `f ≥ 0`, and `f̂ = (f⁺)^ − (f⁻)^` in general. Matrices here are written
//! in the orthonormal point basis `eₓ/√νₓ`, so a function `g` becomes the
//! vector `√νₓ g(x)` and every operator is a plain symmetric matrix.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::decoherence::DecoherenceState;
use crate::error::{Error, Result};
use crate::process::{QProcess, Verdict};

/// Tolerance for Σν = 1 and for state validation.
pub const SPACE_TOLERANCE: f64 = 1e-12;

/// A finite probability space; zero-weight points are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasureSpace {
    labels: Vec<usize>,
    weights: Vec<f64>,
}

impl DiscreteMeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidArgument(format!("point weight {w} is not a non-negative real")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SPACE_TOLERANCE {
            return Err(Error::NotNormalized { norm: total });
        }
        let (labels, weights): (Vec<usize>, Vec<f64>) =
            weights.into_iter().enumerate().filter(|&(_, w)| w > 0.0).unzip();
        Ok(DiscreteMeasureSpace { labels, weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("a probability space needs a point".into()));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Position of each kept point in the weight list given at construction.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn measure(&self, set: &[usize]) -> Result<f64> {
        self.check_set(set)?;
        Ok(set.iter().map(|&x| self.weights[x]).sum())
    }

    fn check_set(&self, set: &[usize]) -> Result<()> {
        match set.iter().find(|&&x| x >= self.len()) {
            Some(&x) => Err(Error::IndexOutOfRange { index: x as u64, rank: 0 }),
            None => Ok(()),
        }
    }

    /// `χ_A` in the orthonormal basis.
    pub fn indicator_vector(&self, set: &[usize]) -> Result<Vec<f64>> {
        self.check_set(set)?;
        let mut v = vec![0.0; self.len()];
        for &x in set {
            v[x] = self.weights[x].sqrt();
        }
        Ok(v)
    }

    pub fn l2_norm(&self, f: &RandomVariable) -> Result<f64> {
        self.check_var(f)?;
        Ok(f.values.iter().zip(&self.weights).map(|(v, w)| v * v * w).sum::<f64>().sqrt())
    }

    fn check_var(&self, f: &RandomVariable) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: f.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("random variable value {v} is not finite")));
        }
        Ok(RandomVariable { values })
    }

    /// `Σ αᵢχ_{Aᵢ}` over `n` points.
    pub fn simple(n: usize, sets: &[Vec<usize>], alphas: &[f64]) -> Result<Self> {
        if sets.len() != alphas.len() {
            return Err(Error::DimensionMismatch {
                expected: sets.len(),
                actual: alphas.len(),
            });
        }
        let mut v = vec![0.0; n];
        for (set, &a) in sets.iter().zip(alphas) {
            for &x in set {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x as u64, rank: 0 });
                }
                v[x] += a;
            }
        }
        Self::new(v)
    }

    pub fn indicator(n: usize, set: &[usize]) -> Result<Self> {
        Self::simple(n, &[set.to_vec()], &[1.0])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn positive_part(&self) -> RandomVariable {
        RandomVariable {
            values: self.values.iter().map(|&v| v.max(0.0)).collect(),
        }
    }

    pub fn negative_part(&self) -> RandomVariable {
        RandomVariable {
            values: self.values.iter().map(|&v| (-v).max(0.0)).collect(),
        }
    }
}

/// `f̂` in the orthonormal point basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedOperator {
    matrix: DMatrix<f64>,
}

impl QuantizedOperator {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        QuantizedOperator { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &QuantizedOperator) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }
}

/// `f̂` from the min kernel.
pub fn quantize(space: &DiscreteMeasureSpace, f: &RandomVariable) -> Result<QuantizedOperator> {
    space.check_var(f)?;
    let n = space.len();
    let sq: Vec<f64> = space.weights.iter().map(|w| w.sqrt()).collect();
    let p = f.positive_part();
    let q = f.negative_part();
    let mat = DMatrix::from_fn(n, n, |x, y| {
        let k = p.values[x].min(p.values[y]) - q.values[x].min(q.values[y]);
        sq[x] * sq[y] * k
    });
    Ok(QuantizedOperator { matrix: mat })
}

/// `χ̂_A = |χ_A⟩⟨χ_A|`.
pub fn indicator_operator(space: &DiscreteMeasureSpace, set: &[usize]) -> Result<QuantizedOperator> {
    let u = space.indicator_vector(set)?;
    let n = space.len();
    Ok(QuantizedOperator {
        matrix: DMatrix::from_fn(n, n, |x, y| u[x] * u[y]),
    })
}

/// A density operator in the orthonormal point basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateOperator {
    rho: DMatrix<Complex64>,
}

impl StateOperator {
    pub fn new(rho: DMatrix<Complex64>) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::DimensionMismatch {
                expected: rho.nrows(),
                actual: rho.ncols(),
            });
        }
        let herm = (&rho - rho.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if herm > SPACE_TOLERANCE {
            return Err(Error::InvalidArgument(format!("state is not Hermitian (residual {herm:e})")));
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > SPACE_TOLERANCE {
            return Err(Error::NotNormalized { norm: tr });
        }
        let min = SymmetricEigen::new(rho.clone()).eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        if min < -SPACE_TOLERANCE {
            return Err(Error::InvalidArgument(format!("state has negative eigenvalue {min:e}")));
        }
        Ok(StateOperator { rho })
    }

    /// `|v⟩⟨v|` for `v` normalized first.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        let n = v.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / (norm * norm)))
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::new(DMatrix::from_diagonal_element(n, n, Complex64::new(1.0 / n as f64, 0.0)))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// `tr(ρ T)`.
    pub fn trace_with(&self, op: &QuantizedOperator) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: op.dim(),
            });
        }
        let n = self.dim();
        let mut acc = 0.0;
        for x in 0..n {
            for y in 0..n {
                acc += (self.rho[(x, y)] * op.matrix[(y, x)]).re;
            }
        }
        Ok(acc)
    }

    /// `μ_ρ(A) = ⟨ρχ_A, χ_A⟩`.
    pub fn q_measure(&self, space: &DiscreteMeasureSpace, set: &[usize]) -> Result<f64> {
        if space.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: space.len(),
            });
        }
        let u = space.indicator_vector(set)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in set {
            for &y in set {
                acc += self.rho[(x, y)] * u[x] * u[y];
            }
        }
        Ok(acc.re)
    }
}

/// `∫f dμ_ρ = tr(ρf̂)`.
pub fn q_integral(rho: &StateOperator, space: &DiscreteMeasureSpace, f: &RandomVariable) -> Result<f64> {
    rho.trace_with(&quantize(space, f)?)
}

/// `∫₀^∞ μ_ρ{f > λ}dλ − ∫₀^∞ μ_ρ{f < −λ}dλ` as a finite sum over level sets.
pub fn tail_sum_integral(rho: &StateOperator, space: &DiscreteMeasureSpace, f: &RandomVariable) -> Result<f64> {
    space.check_var(f)?;
    let half = |g: &RandomVariable| -> Result<f64> {
        let mut levels: Vec<f64> = g.values.iter().copied().filter(|&v| v > 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut prev = 0.0;
        let mut acc = 0.0;
        for v in levels {
            let set: Vec<usize> = (0..g.len()).filter(|&x| g.values[x] >= v).collect();
            acc += (v - prev) * rho.q_measure(space, &set)?;
            prev = v;
        }
        Ok(acc)
    };
    Ok(half(&f.positive_part())? - half(&f.negative_part())?)
}

/// Nonzero spectrum of `(αχ_A + βχ_B)^` for disjoint `A`, `B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoValuedSpectrum {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Eigenfunctions as values per point, not normalized.
    pub g_plus: Vec<f64>,
    pub g_minus: Vec<f64>,
    /// The same eigenfunctions as unit vectors in the orthonormal basis.
    pub u_plus: Vec<f64>,
    pub u_minus: Vec<f64>,
}

fn check_disjoint(space: &DiscreteMeasureSpace, sets: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; space.len()];
    for set in sets {
        space.check_set(set)?;
        for &x in set.iter() {
            if seen[x] {
                return Err(Error::NotDisjoint);
            }
            seen[x] = true;
        }
    }
    Ok(())
}

fn to_unit(space: &DiscreteMeasureSpace, g: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = g.iter().zip(&space.weights).map(|(g, w)| g * w.sqrt()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Closed-form spectrum of `(αχ_A + βχ_B)^`.
///
/// For `0 < α < β` the eigenvalues are `α·λ` for the roots `λ` of
/// `λ² − [ν(A) + β'ν(B)]λ + (β' − 1)ν(A)ν(B)` with `β' = β/α`, and the
/// eigenfunctions are `χ_A + b·χ_B` with `b = (λ − ν(A))/ν(B)`. Opposite signs
/// split into `αν(A)` and `βν(B)`; two negative coefficients negate the
/// positive case. `α > β > 0` swaps the roles of the sets.
pub fn two_valued_spectrum(
    space: &DiscreteMeasureSpace,
    a: &[usize],
    b: &[usize],
    alpha: f64,
    beta: f64,
) -> Result<TwoValuedSpectrum> {
    check_disjoint(space, &[a, b])?;
    if !(alpha.is_finite() && beta.is_finite()) || alpha == 0.0 || beta == 0.0 {
        return Err(Error::InvalidArgument("coefficients must be finite and nonzero".into()));
    }
    if alpha == beta {
        return Err(Error::InvalidArgument("equal coefficients give a rank-1 operator".into()));
    }
    let na = space.measure(a)?;
    let nb = space.measure(b)?;
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidArgument("both sets need positive measure".into()));
    }
    let n = space.len();
    let chi = |set: &[usize], c: f64| {
        let mut g = vec![0.0; n];
        for &x in set {
            g[x] = c;
        }
        g
    };
    if alpha.signum() != beta.signum() {
        let ga = chi(a, 1.0);
        let gb = chi(b, 1.0);
        let (pos, neg, lp, lm) = if alpha > 0.0 {
            (ga, gb, alpha * na, beta * nb)
        } else {
            (gb, ga, beta * nb, alpha * na)
        };
        return Ok(TwoValuedSpectrum {
            lambda_plus: lp,
            lambda_minus: lm,
            u_plus: to_unit(space, &pos),
            u_minus: to_unit(space, &neg),
            g_plus: pos,
            g_minus: neg,
        });
    }
    if alpha < 0.0 {
        let s = two_valued_spectrum(space, a, b, -alpha, -beta)?;
        return Ok(TwoValuedSpectrum {
            lambda_plus: -s.lambda_minus,
            lambda_minus: -s.lambda_plus,
            g_plus: s.g_minus,
            g_minus: s.g_plus,
            u_plus: s.u_minus,
            u_minus: s.u_plus,
        });
    }
    if alpha > beta {
        return two_valued_spectrum(space, b, a, beta, alpha);
    }
    let r = beta / alpha;
    let s = na + r * nb;
    let disc = (na - r * nb).powi(2) + 4.0 * na * nb;
    let roots = [(s + disc.sqrt()) / 2.0, (s - disc.sqrt()) / 2.0];
    let g: Vec<Vec<f64>> = roots
        .iter()
        .map(|&l| {
            let coef = (l - na) / nb;
            let mut g = chi(a, 1.0);
            for &x in b {
                g[x] = coef;
            }
            g
        })
        .collect();
    Ok(TwoValuedSpectrum {
        lambda_plus: alpha * roots[0],
        lambda_minus: alpha * roots[1],
        u_plus: to_unit(space, &g[0]),
        u_minus: to_unit(space, &g[1]),
        g_plus: g[0].clone(),
        g_minus: g[1].clone(),
    })
}

fn outer(u: &[f64], scale: f64) -> DMatrix<f64> {
    let n = u.len();
    DMatrix::from_fn(n, n, |x, y| scale * u[x] * u[y])
}

/// `(αχ_A + βχ_B)^` assembled from its closed-form spectrum.
fn pair_operator(space: &DiscreteMeasureSpace, a: &[usize], b: &[usize], alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
    let na = space.measure(a)?;
    let nb = space.measure(b)?;
    let single = |set: &[usize], c: f64| -> Result<DMatrix<f64>> {
        Ok(indicator_operator(space, set)?.matrix * c)
    };
    if alpha == 0.0 || na == 0.0 {
        return single(b, beta);
    }
    if beta == 0.0 || nb == 0.0 {
        return single(a, alpha);
    }
    if alpha == beta {
        let union: Vec<usize> = a.iter().chain(b).copied().collect();
        return single(&union, alpha);
    }
    let s = two_valued_spectrum(space, a, b, alpha, beta)?;
    Ok(outer(&s.u_plus, s.lambda_plus) + outer(&s.u_minus, s.lambda_minus))
}

/// `f̂` for `f = Σαᵢχ_{Aᵢ}` from the pair expansion
/// `Σ_{i<j}(αᵢχ_{Aᵢ} + αⱼχ_{Aⱼ})^ − (n − 2)Σαᵢχ̂_{Aᵢ}`.
pub fn simple_expansion(space: &DiscreteMeasureSpace, sets: &[Vec<usize>], alphas: &[f64]) -> Result<QuantizedOperator> {
    if sets.len() != alphas.len() {
        return Err(Error::DimensionMismatch {
            expected: sets.len(),
            actual: alphas.len(),
        });
    }
    let refs: Vec<&[usize]> = sets.iter().map(|s| s.as_slice()).collect();
    check_disjoint(space, &refs)?;
    let n = sets.len();
    let dim = space.len();
    let mut acc = DMatrix::zeros(dim, dim);
    if n == 1 {
        acc += indicator_operator(space, &sets[0])?.matrix * alphas[0];
        return Ok(QuantizedOperator { matrix: acc });
    }
    for i in 0..n {
        for j in i + 1..n {
            acc += pair_operator(space, &sets[i], &sets[j], alphas[i], alphas[j])?;
        }
    }
    let k = n as f64 - 2.0;
    for (set, &a) in sets.iter().zip(alphas) {
        acc -= indicator_operator(space, set)?.matrix * (k * a);
    }
    Ok(QuantizedOperator { matrix: acc })
}

pub type RankFn = Arc<dyn Fn(usize, &[usize]) -> f64 + Send + Sync>;

/// A random variable on Ω seen through the process.
#[derive(Clone)]
pub enum ProcessVariable {
    /// Depends on the first `rank + 1` coordinates; values indexed by Ω_rank.
    Cylinder { rank: usize, values: Vec<f64> },
    /// A value for each rank-t path, for every t.
    PerRank(RankFn),
}

impl ProcessVariable {
    pub fn cylinder(proc: &QProcess, rank: usize, values: Vec<f64>) -> Result<Self> {
        let len = proc.space().checked_len(rank)?;
        if values.len() as u64 != len {
            return Err(Error::DimensionMismatch {
                expected: len as usize,
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("random variable value {v} is not finite")));
        }
        Ok(ProcessVariable::Cylinder { rank, values })
    }

    fn first_rank(&self) -> usize {
        match self {
            ProcessVariable::Cylinder { rank, .. } => *rank,
            ProcessVariable::PerRank(_) => 0,
        }
    }

    fn values_at(&self, st: &DecoherenceState) -> Vec<f64> {
        let t = st.rank();
        match self {
            ProcessVariable::Cylinder { rank, values } => {
                let factor = st.space().pow_m(t - rank);
                (0..st.len() as u64).map(|i| values[(i / factor) as usize]).collect()
            }
            ProcessVariable::PerRank(f) => {
                let mut buf = Vec::with_capacity(t + 1);
                (0..st.len() as u64)
                    .map(|i| {
                        st.space().decode_into(t, i, &mut buf);
                        f(t, &buf)
                    })
                    .collect()
            }
        }
    }
}

/// `tr(D̂ₜ f̂)` with the min kernel on Ωₜ.
///
/// Within a final-site group sorted by increasing `f`, `min(f_j, f_k) = f_j`
/// for `k > j`, so each group costs a sort and one suffix sum.
pub fn trace_at(st: &DecoherenceState, values: &[f64]) -> f64 {
    let mut total = 0.0;
    for site in 0..st.m() {
        for sign in [1.0, -1.0] {
            let mut grp: Vec<(f64, Complex64)> = st
                .group(site)
                .map(|(i, a)| (sign * values[i as usize], a))
                .filter(|&(v, _)| v > 0.0)
                .collect();
            grp.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut suffix = Complex64::new(0.0, 0.0);
            let mut acc = 0.0;
            for &(v, a) in grp.iter().rev() {
                acc += v * (a.norm_sqr() + 2.0 * (a * suffix.conj()).re);
                suffix += a;
            }
            total += sign * acc;
        }
    }
    total
}

/// The same trace from the tail-sum formula over the level sets of `f`.
pub fn tail_sum_at(st: &DecoherenceState, values: &[f64]) -> f64 {
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let mut levels: Vec<f64> = values.iter().map(|v| sign * v).filter(|&v| v > 0.0).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut prev = 0.0;
        for v in levels {
            let mut sums = vec![Complex64::new(0.0, 0.0); st.m()];
            for (i, &a) in st.amplitudes().iter().enumerate() {
                if sign * values[i] >= v {
                    sums[st.final_site(i as u64)] += a;
                }
            }
            total += sign * (v - prev) * sums.iter().map(|z| z.norm_sqr()).sum::<f64>();
            prev = v;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralReport {
    pub values: Vec<(usize, f64)>,
    pub verdict: Verdict,
    pub limit: Option<f64>,
    pub spread: Option<f64>,
    pub window: usize,
    pub tolerance: f64,
}

/// `∫f dμ̃` as the windowed limit of `tr(D̂ₜ f̂)` over `t ≤ t_max`.
pub fn process_integral(
    proc: &QProcess,
    f: &ProcessVariable,
    t_max: usize,
    window: usize,
    tol: f64,
) -> Result<IntegralReport> {
    if window < 2 {
        return Err(Error::InvalidArgument("integral window must be at least 2".into()));
    }
    let mut values = Vec::new();
    let mut exhausted = false;
    for t in f.first_rank()..=t_max.max(f.first_rank()) {
        let st = match proc.state(t) {
            Ok(s) => s,
            Err(Error::BudgetExceeded { .. }) | Err(Error::MissingStep { .. }) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        };
        values.push((t, trace_at(&st, &f.values_at(&st))));
    }
    let trailing: Vec<f64> = values.iter().rev().take(window).map(|&(_, v)| v).collect();
    let spread = (trailing.len() >= window).then(|| {
        let hi = trailing.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = trailing.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    });
    let (verdict, limit) = match spread {
        Some(s) if s <= tol => (Verdict::Suitable, Some(trailing.iter().sum::<f64>() / trailing.len() as f64)),
        _ if exhausted => (Verdict::BudgetExhausted, None),
        _ => (Verdict::NotConverged, None),
    };
    Ok(IntegralReport {
        values,
        verdict,
        limit,
        spread,
        window,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_eig(op: &QuantizedOperator) -> Vec<f64> {
        op.eigenvalues()
    }

    #[test]
    fn zero_weights_are_dropped() {
        let s = DiscreteMeasureSpace::new(vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.labels(), &[0, 2]);
        assert!(DiscreteMeasureSpace::new(vec![0.5, 0.4]).is_err());
        assert!(DiscreteMeasureSpace::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn indicator_is_rank_one() {
        let s = DiscreteMeasureSpace::new(vec![0.25, 0.25, 0.25, 0.0625, 0.0625, 0.0625, 0.0625]).unwrap();
        let a = [0, 3, 4];
        let op = quantize(&s, &RandomVariable::indicator(7, &a).unwrap()).unwrap();
        assert_eq!(op, indicator_operator(&s, &a).unwrap());
        let ev = dense_eig(&op);
        assert!((ev[0] - 0.375).abs() < 1e-14);
        assert!(ev[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn homogeneous_and_disjoint_supports() {
        let s = DiscreteMeasureSpace::uniform(5).unwrap();
        let g = RandomVariable::new(vec![1.0, -2.0, 0.5, 0.0, 3.0]).unwrap();
        let scaled = RandomVariable::new(g.values().iter().map(|v| -1.5 * v).collect()).unwrap();
        let lhs = quantize(&s, &scaled).unwrap();
        let rhs = QuantizedOperator::from_matrix(quantize(&s, &g).unwrap().matrix * -1.5);
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        let f1 = RandomVariable::new(vec![1.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        let f2 = RandomVariable::new(vec![0.0, 0.0, 0.0, 4.0, 1.0]).unwrap();
        let (q1, q2) = (quantize(&s, &f1).unwrap(), quantize(&s, &f2).unwrap());
        assert!((q1.matrix() * q2.matrix()).amax() < 1e-14);
        let sum = QuantizedOperator::from_matrix(q1.matrix() + q2.matrix());
        assert!((sum.operator_norm() - q1.operator_norm().max(q2.operator_norm())).abs() < 1e-12);
    }

    #[test]
    fn two_valued_example() {
        let s = DiscreteMeasureSpace::uniform(2).unwrap();
        let sp = two_valued_spectrum(&s, &[0], &[1], 1.0, 2.0).unwrap();
        let disc = 1.25f64.sqrt();
        assert!((sp.lambda_plus - (1.5 + disc) / 2.0).abs() < 1e-15);
        assert!((sp.lambda_minus - (1.5 - disc) / 2.0).abs() < 1e-15);
        assert!((sp.lambda_plus - 1.309017).abs() < 1e-6);
        assert!((sp.lambda_minus - 0.190983).abs() < 1e-6);
        let op = quantize(&s, &RandomVariable::new(vec![1.0, 2.0]).unwrap()).unwrap();
        let ev = dense_eig(&op);
        assert!((ev[0] - sp.lambda_plus).abs() < 1e-12 && (ev[1] - sp.lambda_minus).abs() < 1e-12);
        assert_eq!(sp.g_plus[0], 1.0);
        assert!(two_valued_spectrum(&s, &[0], &[0, 1], 1.0, 2.0).is_err());
        assert!(two_valued_spectrum(&s, &[0], &[1], 1.0, 1.0).is_err());
    }

    #[test]
    fn mixed_sign_spectrum() {
        let s = DiscreteMeasureSpace::new(vec![0.2, 0.3, 0.5]).unwrap();
        let sp = two_valued_spectrum(&s, &[0, 1], &[2], 2.0, -3.0).unwrap();
        assert!((sp.lambda_plus - 1.0).abs() < 1e-15);
        assert!((sp.lambda_minus + 1.5).abs() < 1e-15);
        let unit_a = [0.2f64.sqrt() / 0.5f64.sqrt(), 0.3f64.sqrt() / 0.5f64.sqrt(), 0.0];
        for (u, e) in sp.u_plus.iter().zip(unit_a) {
            assert!((u - e).abs() < 1e-15);
        }
    }

    #[test]
    fn expansion_n1_is_scaled_indicator() {
        let s = DiscreteMeasureSpace::uniform(4).unwrap();
        let e = simple_expansion(&s, &[vec![1, 2]], &[2.5]).unwrap();
        let d = quantize(&s, &RandomVariable::simple(4, &[vec![1, 2]], &[2.5]).unwrap()).unwrap();
        assert!(e.max_abs_diff(&d) < 1e-15);
        assert!(matches!(
            simple_expansion(&s, &[vec![1, 2], vec![2]], &[1.0, 2.0]),
            Err(Error::NotDisjoint)
        ));
    }

    #[test]
    fn tail_sum_matches_trace() {
        let s = DiscreteMeasureSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let v = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5), Complex64::new(0.7, 0.0), Complex64::new(0.1, -0.4)];
        let rho = StateOperator::pure(&v).unwrap();
        let f = RandomVariable::new(vec![1.0, -2.0, 3.0, 1.0]).unwrap();
        let a = q_integral(&rho, &s, &f).unwrap();
        let b = tail_sum_integral(&rho, &s, &f).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        let neg = RandomVariable::new(vec![-1.0, 0.0, -2.0, -0.5]).unwrap();
        let pos = RandomVariable::new(vec![1.0, 0.0, 2.0, 0.5]).unwrap();
        let l = tail_sum_integral(&rho, &s, &neg).unwrap();
        let r = tail_sum_integral(&rho, &s, &pos).unwrap();
        assert!((l + r).abs() < 1e-15);
    }

    #[test]
    fn state_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-0.5, 0.0)]);
        assert!(StateOperator::new(bad).is_err());
        assert!(StateOperator::maximally_mixed(3).is_ok());
    }

    #[test]
    fn walk_position_integral() {
        let proc = QProcess::two_site_walk();
        for t in 1..=6 {
            let st = proc.state(t).unwrap();
            let vals: Vec<f64> = (0..st.len() as u64).map(|i| (st.final_site(i) == 1) as u8 as f64).collect();
            let f = ProcessVariable::cylinder(&proc, t, vals).unwrap();
            let r = process_integral(&proc, &f, t + 4, 4, 1e-12).unwrap();
            let e = crate::pathspace::CylinderEvent::final_site(*proc.space(), t, 1).unwrap();
            assert_eq!(r.verdict, Verdict::Suitable);
            assert!((r.limit.unwrap() - proc.q_measure(&e).unwrap()).abs() < 1e-12);
        }
        let one = ProcessVariable::cylinder(&proc, 0, vec![1.0]).unwrap();
        let r = process_integral(&proc, &one, 6, 4, 1e-12).unwrap();
        assert!((r.limit.unwrap() - 1.0).abs() < 1e-12);
        let zero = ProcessVariable::cylinder(&proc, 2, vec![0.0; 4]).unwrap();
        assert_eq!(process_integral(&proc, &zero, 6, 4, 1e-12).unwrap().limit, Some(0.0));
        let moving = ProcessVariable::PerRank(Arc::new(|t, s: &[usize]| (s[t] == 0) as u8 as f64));
        let r = process_integral(&proc, &moving, 12, 4, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::NotConverged);
    }
}
