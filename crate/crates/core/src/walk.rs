//! The two-site hopper `U = (1/√2)[[1, i], [i, 1]]` from the origin.
//!
//! Path amplitudes are `2^{-t/2} i^{c(γ)}` with `c` the flip count, so the site
//! sums are Gaussian integers scaled by `2^{-t/2}`: `G(t)` over paths ending at
//! site 1 and `F(t)` over paths ending at site 0. They obey
//! `G(t) = G(t−1) + iF(t−1)`, `F(t) = F(t−1) + iG(t−1)` and
//! `μₜ(Eₜ) = |G(t)|²/2ᵗ`, `μₜ(Gₜ) = |F(t)|²/2ᵗ`.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathspace::rational_to_f64;
use crate::process::{EventFamily, QProcess};
use crate::unitary::{max_abs_diff, FiniteUnitarySystem};

pub type GaussianInt = Complex<BigInt>;

/// Largest rank evaluated by enumeration unless told otherwise.
pub const DEFAULT_DIRECT_CAP: usize = 16;

fn gi(re: i64, im: i64) -> GaussianInt {
    Complex::new(BigInt::from(re), BigInt::from(im))
}

/// `(G(t), F(t))` for `t = 0..=t_max` by the recursion.
pub fn gf_sequence(t_max: usize) -> Vec<(GaussianInt, GaussianInt)> {
    let i = gi(0, 1);
    let mut out = Vec::with_capacity(t_max + 1);
    let (mut g, mut f) = (gi(0, 0), gi(1, 0));
    out.push((g.clone(), f.clone()));
    for _ in 0..t_max {
        let ng = &g + &i * &f;
        let nf = &f + &i * &g;
        g = ng;
        f = nf;
        out.push((g.clone(), f.clone()));
    }
    out
}

/// `G(4k+j) = (−4)^k G(j)`, from the seeds `G(0..3) = 0, i, 2i, 2i`.
pub fn g_closed_form(t: usize) -> GaussianInt {
    const SEEDS: [(i64, i64); 4] = [(0, 0), (0, 1), (0, 2), (0, 2)];
    scaled_seed(SEEDS[t % 4], t / 4)
}

/// `F(4k+j) = (−4)^k F(j)`, from the seeds `F(0..3) = 1, 1, 0, −2`.
pub fn f_closed_form(t: usize) -> GaussianInt {
    const SEEDS: [(i64, i64); 4] = [(1, 0), (1, 0), (0, 0), (-2, 0)];
    scaled_seed(SEEDS[t % 4], t / 4)
}

fn scaled_seed(seed: (i64, i64), k: usize) -> GaussianInt {
    let s = BigInt::from(-4).pow(k as u32);
    Complex::new(&s * seed.0, &s * seed.1)
}

/// `|z|² / 2ᵗ` exactly.
pub fn scaled_norm(z: &GaussianInt, t: usize) -> BigRational {
    let n = &z.re * &z.re + &z.im * &z.im;
    BigRational::new(n, BigInt::one() << t)
}

/// True for the shipped hopper started at site 0.
pub fn is_two_site_walk(proc: &QProcess) -> bool {
    let sys = proc.system();
    let Some(u) = sys.stationary_operator() else {
        return false;
    };
    if sys.dim() != 2 {
        return false;
    }
    let reference = FiniteUnitarySystem::two_site_walk();
    let walk_u = reference.stationary_operator().expect("stationary");
    max_abs_diff(u, walk_u) <= 1e-15
        && (proc.initial_state().get(0).norm_sqr() - 1.0).abs() <= 1e-12
        && proc.space().fixed_initial().unwrap_or(0) == 0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkRow {
    pub t: usize,
    pub g: Option<(String, String)>,
    pub f: Option<(String, String)>,
    /// `μₜ(Eₜ)` and `μₜ(Gₜ)` from the Gaussian integers, as reduced fractions.
    pub mu_e_exact: Option<String>,
    pub mu_g_exact: Option<String>,
    pub mu_e: Option<f64>,
    pub mu_g: Option<f64>,
    /// The same measures from the decoherence functional.
    pub direct_mu_e: Option<f64>,
    pub direct_mu_g: Option<f64>,
    /// Largest absolute gap between the two routes.
    pub diff: Option<f64>,
    /// `ν(Cₜ)`, the classical chance of being at site 1 at time t.
    pub classical_nu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkTable {
    pub exact_route: bool,
    pub direct_cap: usize,
    pub rows: Vec<WalkRow>,
}

impl WalkTable {
    pub fn max_diff(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.diff).fold(0.0, f64::max)
    }
}

/// `μₜ(Eₜ)` and `μₜ(Gₜ)` for `t ≤ t_max`.
///
/// Any two-site process gets the direct route up to `direct_cap`; the exact
/// Gaussian-integer columns are filled only for the shipped hopper.
pub fn walk_table(proc: &QProcess, t_max: usize, direct_cap: usize) -> Result<WalkTable> {
    if proc.m() != 2 {
        return Err(Error::InvalidArgument(format!(
            "the walk table needs a two-site system, got m = {}",
            proc.m()
        )));
    }
    let exact = is_two_site_walk(proc);
    let seq = if exact { gf_sequence(t_max) } else { Vec::new() };
    let m2 = proc.system().m();
    let mut rows = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let mut row = WalkRow {
            t,
            g: None,
            f: None,
            mu_e_exact: None,
            mu_g_exact: None,
            mu_e: None,
            mu_g: None,
            direct_mu_e: None,
            direct_mu_g: None,
            diff: None,
            classical_nu: EventFamily::position_at(m2, t, 1)?.classical_measure(proc.space()),
        };
        if let Some((g, f)) = seq.get(t) {
            let me = scaled_norm(g, t);
            let mg = scaled_norm(f, t);
            row.g = Some((g.re.to_string(), g.im.to_string()));
            row.f = Some((f.re.to_string(), f.im.to_string()));
            row.mu_e = Some(rational_to_f64(&me));
            row.mu_g = Some(rational_to_f64(&mg));
            row.mu_e_exact = Some(fraction(&me));
            row.mu_g_exact = Some(fraction(&mg));
        }
        if t <= direct_cap {
            let st = proc.state(t)?;
            let pos = st.position_distribution();
            row.direct_mu_e = Some(pos[1]);
            row.direct_mu_g = Some(pos[0]);
            if let (Some(a), Some(b)) = (row.mu_e, row.mu_g) {
                row.diff = Some((a - pos[1]).abs().max((b - pos[0]).abs()));
            }
        }
        rows.push(row);
    }
    Ok(WalkTable {
        exact_route: exact,
        direct_cap,
        rows,
    })
}

fn fraction(r: &BigRational) -> String {
    if r.is_zero() || r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds() {
        let s = gf_sequence(3);
        let g: Vec<_> = s.iter().map(|p| p.0.clone()).collect();
        let f: Vec<_> = s.iter().map(|p| p.1.clone()).collect();
        assert_eq!(g, [gi(0, 0), gi(0, 1), gi(0, 2), gi(0, 2)]);
        assert_eq!(f, [gi(1, 0), gi(1, 0), gi(0, 0), gi(-2, 0)]);
    }

    #[test]
    fn recursion_matches_closed_form() {
        for (t, (g, f)) in gf_sequence(40).into_iter().enumerate() {
            assert_eq!(g, g_closed_form(t));
            assert_eq!(f, f_closed_form(t));
        }
    }

    #[test]
    fn period_four_table() {
        let proc = QProcess::two_site_walk();
        let tab = walk_table(&proc, 8, 8).unwrap();
        assert!(tab.exact_route);
        let e: Vec<f64> = tab.rows.iter().map(|r| r.mu_e.unwrap()).collect();
        assert_eq!(e, [0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0, 0.5, 0.0]);
        assert_eq!(tab.rows[2].mu_e_exact.as_deref(), Some("1"));
        assert_eq!(tab.rows[1].mu_e_exact.as_deref(), Some("1/2"));
        assert!(tab.max_diff() <= 1e-12);
        assert_eq!(tab.rows[0].classical_nu, Some(0.0));
        assert_eq!(tab.rows[3].classical_nu, Some(0.5));
    }
}
