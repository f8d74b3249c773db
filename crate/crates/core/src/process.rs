//! Finite unitary processes: consistent local states, suitable sets and the
//! extended quantum measure.
//!
//! An event `A ⊆ Ω` enters through its coverage fractions
//! `w_t(γ) = ν(A ∩ cyl γ) / ν(cyl γ)` over the rank-t prefixes. The local
//! expectation is `Λₜ(A) = ⟨D̂ₜ w_t, w_t⟩`; for a cylinder event at or past its
//! native rank the weights are a 0/1 indicator and `Λₜ` is the quantum measure
//! `μₜ(A)`. An event is suitable when `Λₜ` settles, and the limit is `μ̃(A)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decoherence::{clamp_measure, DecoherenceState};
use crate::error::{Error, Result};
use crate::pathspace::{rational_to_f64, CylinderEvent, NPath, PathSpace, SiteCount};
use crate::unitary::{FiniteUnitarySystem, InitialState};

/// Largest |Ωₜ| whose decoherence state is kept in the per-rank cache.
const CACHE_LIMIT: u64 = 1 << 20;

/// Tolerance for the consistency identity between ranks t and t+1.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

pub const DEFAULT_WINDOW: usize = 4;
pub const DEFAULT_SUITABILITY_TOLERANCE: f64 = 1e-9;

/// A unitary system, its initial state and the path space it runs on.
pub struct QProcess {
    sys: FiniteUnitarySystem,
    psi: InitialState,
    space: PathSpace,
    cache: Mutex<BTreeMap<usize, Arc<DecoherenceState>>>,
}

impl fmt::Debug for QProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QProcess")
            .field("m", &self.space.m())
            .field("fixed_initial", &self.space.fixed_initial())
            .field("stationary", &self.sys.is_stationary())
            .finish()
    }
}

impl QProcess {
    pub fn new(sys: FiniteUnitarySystem, psi: InitialState, space: PathSpace) -> Result<Self> {
        if psi.dim() != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                actual: psi.dim(),
            });
        }
        if space.m() != sys.dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.dim(),
                actual: space.m(),
            });
        }
        let proc = QProcess {
            sys,
            psi,
            space,
            cache: Mutex::new(BTreeMap::new()),
        };
        // validates the pinned site against ψ
        proc.state(0)?;
        Ok(proc)
    }

    /// The two-site hopper started at the origin on `{0}×S×S×⋯`.
    pub fn two_site_walk() -> Self {
        let m = SiteCount::new(2).expect("two sites");
        QProcess::new(
            FiniteUnitarySystem::two_site_walk(),
            InitialState::basis(m, 0).expect("basis state"),
            PathSpace::with_fixed_initial(m, 0).expect("site 0"),
        )
        .expect("walk process")
    }

    pub fn system(&self) -> &FiniteUnitarySystem {
        &self.sys
    }

    pub fn initial_state(&self) -> &InitialState {
        &self.psi
    }

    pub fn space(&self) -> &PathSpace {
        &self.space
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    /// D̂ₜ, built on first use.
    pub fn state(&self, t: usize) -> Result<Arc<DecoherenceState>> {
        if let Some(s) = self.cache.lock().expect("cache lock").get(&t) {
            return Ok(Arc::clone(s));
        }
        let st = Arc::new(DecoherenceState::build(&self.sys, &self.psi, &self.space, t)?);
        if st.len() as u64 <= CACHE_LIMIT {
            self.cache.lock().expect("cache lock").insert(t, Arc::clone(&st));
        }
        Ok(st)
    }

    pub fn q_measure(&self, event: &CylinderEvent) -> Result<f64> {
        self.state(event.rank())?.q_measure(event)
    }

    /// `U(t,0)ψ`, with ψ restricted to the pinned site when there is one.
    fn evolved(&self, t: usize) -> Result<Vec<Complex64>> {
        let u = self.sys.propagator(t, 0)?;
        let m = self.m();
        let psi: Vec<Complex64> = (0..m)
            .map(|i| match self.space.fixed_initial() {
                Some(s) if s != i => Complex64::new(0.0, 0.0),
                _ => self.psi.get(i),
            })
            .collect();
        Ok((0..m)
            .map(|i| (0..m).map(|j| u[(i, j)] * psi[j]).sum())
            .collect())
    }

    /// `Λₜ(A) = ⟨D̂ₜ w, w⟩` with `w` the rank-t coverage of the family.
    pub fn local_expectation(&self, family: &EventFamily, t: usize) -> Result<f64> {
        match family.weights(t)? {
            RankWeights::Affine { constant, terms } => self.affine_expectation(t, constant, &terms),
            RankWeights::PerPath(f) => self.enumerated_expectation(t, |sites| f(sites)),
        }
    }

    /// `Λₜ(A)` by enumerating Ωₜ and evaluating the coverage pointwise.
    pub fn local_expectation_enumerated(&self, family: &EventFamily, t: usize) -> Result<f64> {
        let weights = family.weights(t)?;
        self.enumerated_expectation(t, |sites| weights.eval(sites))
    }

    fn enumerated_expectation(&self, t: usize, mut w: impl FnMut(&[usize]) -> f64) -> Result<f64> {
        let st = self.state(t)?;
        let mut sums = vec![Complex64::new(0.0, 0.0); self.m()];
        let mut buf = Vec::with_capacity(t + 1);
        for (idx, &a) in st.amplitudes().iter().enumerate() {
            self.space.decode_into(t, idx as u64, &mut buf);
            let wt = w(&buf);
            if wt != 0.0 {
                sums[buf[t]] += a * wt;
            }
        }
        Ok(clamp_measure(sums.iter().map(|z| z.norm_sqr()).sum()))
    }

    fn affine_expectation(&self, t: usize, constant: f64, terms: &[(Vec<usize>, f64)]) -> Result<f64> {
        self.sys.check_rank(t)?;
        let m = self.m();
        let mut sums = vec![Complex64::new(0.0, 0.0); m];
        if constant != 0.0 {
            for (s, e) in sums.iter_mut().zip(self.evolved(t)?) {
                *s += e * constant;
            }
        }
        for (prefix, coef) in terms {
            let n = prefix.len() - 1;
            if n > t {
                return Err(Error::InvalidArgument(format!(
                    "prefix of rank {n} used at rank {t}"
                )));
            }
            if let Some(s) = self.space.fixed_initial() {
                if prefix[0] != s {
                    continue;
                }
            }
            let a = self.sys.sites_weight(prefix)? * self.psi.get(prefix[0]);
            let u = self.sys.propagator(t, n)?;
            let last = prefix[n];
            for (i, s) in sums.iter_mut().enumerate() {
                *s += a * u[(i, last)] * *coef;
            }
        }
        Ok(clamp_measure(sums.iter().map(|z| z.norm_sqr()).sum()))
    }

    /// Λₜ for `t ≤ t_max` and a trailing-window Cauchy verdict.
    pub fn evaluate_suitability(
        &self,
        family: &EventFamily,
        t_max: usize,
        window: usize,
        tol: f64,
    ) -> Result<SuitabilityReport> {
        if window < 2 {
            return Err(Error::InvalidArgument("suitability window must be at least 2".into()));
        }
        let mut values = Vec::new();
        let mut exhausted = false;
        for t in 0..=t_max {
            match self.local_expectation(family, t) {
                Ok(v) => values.push((t, v)),
                Err(Error::CoverageUnavailable { .. }) => {}
                Err(Error::BudgetExceeded { .. }) | Err(Error::MissingStep { .. }) => {
                    exhausted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let trailing: Vec<f64> = values.iter().rev().take(window).map(|&(_, v)| v).collect();
        let spread = if trailing.len() >= window {
            let hi = trailing.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = trailing.iter().cloned().fold(f64::INFINITY, f64::min);
            Some(hi - lo)
        } else {
            None
        };
        let (verdict, limit) = match spread {
            Some(s) if s <= tol => (
                Verdict::Suitable,
                Some(trailing.iter().sum::<f64>() / trailing.len() as f64),
            ),
            _ if exhausted => (Verdict::BudgetExhausted, None),
            _ => (Verdict::NotConverged, None),
        };
        Ok(SuitabilityReport {
            family: family.name().to_string(),
            values,
            verdict,
            limit,
            spread,
            window,
            tolerance: tol,
        })
    }

    /// Checks `Dₜ(γ,γ') = Σⱼ D_{t+1}(γj, γ'j)` on all pairs when there are at
    /// most `samples` of them, otherwise on `samples` seeded random pairs.
    pub fn verify_consistency(&self, t: usize, samples: usize, seed: u64) -> Result<ConsistencyReport> {
        let lo = self.state(t)?;
        let hi = self.state(t + 1)?;
        let n = lo.len() as u64;
        let m = self.m() as u64;
        let a = lo.amplitudes();
        let b = hi.amplitudes();
        let residual = |g: u64, h: u64| -> f64 {
            let lhs = if lo.final_site(g) == lo.final_site(h) {
                a[g as usize] * a[h as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            };
            let rhs: Complex64 = (0..m)
                .map(|j| b[(g * m + j) as usize] * b[(h * m + j) as usize].conj())
                .sum();
            (lhs - rhs).norm()
        };
        let total = (n as u128) * (n as u128);
        let (pairs, worst, exhaustive) = if total <= samples as u128 {
            let mut worst = 0.0f64;
            for g in 0..n {
                for h in 0..n {
                    worst = worst.max(residual(g, h));
                }
            }
            (total as u64, worst, true)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for _ in 0..samples {
                let g = rng.random_range(0..n);
                let h = rng.random_range(0..n);
                worst = worst.max(residual(g, h));
            }
            (samples as u64, worst, false)
        };
        Ok(ConsistencyReport {
            rank: t,
            pairs,
            exhaustive,
            max_residual: worst,
            tolerance: CONSISTENCY_TOLERANCE,
            passed: worst <= CONSISTENCY_TOLERANCE,
        })
    }

    /// `|μ(A∪B∪C) - μ(A∪B) - μ(A∪C) - μ(B∪C) + μ(A) + μ(B) + μ(C)|` for
    /// mutually disjoint cylinder events.
    pub fn grade2_residual(&self, a: &CylinderEvent, b: &CylinderEvent, c: &CylinderEvent) -> Result<f64> {
        let ab = a.disjoint_union(b)?;
        let ac = a.disjoint_union(c)?;
        let bc = b.disjoint_union(c)?;
        let abc = ab.disjoint_union(c)?;
        let st = self.state(a.rank())?;
        let mu = |e: &CylinderEvent| st.q_measure(e);
        Ok((mu(&abc)? - mu(&ab)? - mu(&ac)? - mu(&bc)? + mu(a)? + mu(b)? + mu(c)?).abs())
    }

    /// The same residual for event families at rank `t`; disjointness is the
    /// caller's responsibility.
    pub fn grade2_residual_families(
        &self,
        a: &EventFamily,
        b: &EventFamily,
        c: &EventFamily,
        t: usize,
    ) -> Result<f64> {
        let ab = a.disjoint_union(b);
        let ac = a.disjoint_union(c);
        let bc = b.disjoint_union(c);
        let abc = ab.disjoint_union(c);
        let l = |f: &EventFamily| self.local_expectation(f, t);
        Ok((l(&abc)? - l(&ab)? - l(&ac)? - l(&bc)? + l(a)? + l(b)? + l(c)?).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Suitable,
    NotConverged,
    BudgetExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Suitable => "suitable",
            Verdict::NotConverged => "not-converged",
            Verdict::BudgetExhausted => "budget-exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuitabilityReport {
    pub family: String,
    /// `(t, Λₜ)` for every evaluated rank.
    pub values: Vec<(usize, f64)>,
    pub verdict: Verdict,
    /// Mean of the trailing window when suitable.
    pub limit: Option<f64>,
    /// Max minus min over the trailing window, when the window is full.
    pub spread: Option<f64>,
    pub window: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub rank: usize,
    pub pairs: u64,
    pub exhaustive: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Cylinder,
    Tail,
    Countable,
    Complement,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Cylinder => "cylinder",
            FamilyKind::Tail => "tail",
            FamilyKind::Countable => "countable",
            FamilyKind::Complement => "complement",
        })
    }
}

pub type PathWeight = Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>;

/// Coverage at one rank.
#[derive(Clone)]
pub enum RankWeights {
    /// `constant + Σ coef·χ_{cyl(prefix)}`; evaluated without enumerating Ωₜ.
    Affine {
        constant: f64,
        terms: Vec<(Vec<usize>, f64)>,
    },
    /// Arbitrary per-path values.
    PerPath(PathWeight),
}

impl RankWeights {
    pub fn eval(&self, sites: &[usize]) -> f64 {
        match self {
            RankWeights::Affine { constant, terms } => {
                constant
                    + terms
                        .iter()
                        .filter(|(p, _)| sites.len() >= p.len() && sites[..p.len()] == p[..])
                        .map(|(_, c)| c)
                        .sum::<f64>()
            }
            RankWeights::PerPath(f) => f(sites),
        }
    }

    fn add(self, other: RankWeights) -> RankWeights {
        match (self, other) {
            (
                RankWeights::Affine { constant: c1, terms: mut t1 },
                RankWeights::Affine { constant: c2, terms: t2 },
            ) => {
                t1.extend(t2);
                RankWeights::Affine {
                    constant: c1 + c2,
                    terms: t1,
                }
            }
            (a, b) => RankWeights::PerPath(Arc::new(move |s| a.eval(s) + b.eval(s))),
        }
    }
}

/// Explicit per-prefix coverage values keyed by rank and path index.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    space: PathSpace,
    ranks: BTreeMap<usize, HashMap<u64, f64>>,
}

impl CoverageTable {
    pub fn new(space: PathSpace) -> Self {
        CoverageTable {
            space,
            ranks: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, rank: usize, index: u64, coverage: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&coverage) {
            return Err(Error::InvalidArgument(format!(
                "coverage {coverage} at rank {rank}, index {index} is outside [0, 1]"
            )));
        }
        if index as u128 >= self.space.cardinality(rank) {
            return Err(Error::IndexOutOfRange { index, rank });
        }
        self.ranks.entry(rank).or_default().insert(index, coverage);
        Ok(())
    }

    /// Reads `rank,path_index,coverage` rows; a leading header row is skipped.
    pub fn from_csv<R: Read>(space: PathSpace, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut table = CoverageTable::new(space);
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidArgument(format!("coverage table: {e}")))?;
            if rec.len() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "coverage table row {} has {} fields, expected 3",
                    line + 1,
                    rec.len()
                )));
            }
            let parsed = (
                rec[0].parse::<usize>(),
                rec[1].parse::<u64>(),
                rec[2].parse::<f64>(),
            );
            match parsed {
                (Ok(r), Ok(i), Ok(c)) => table.insert(r, i, c)?,
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "coverage table row {} is not numeric",
                        line + 1
                    )))
                }
            }
        }
        Ok(table)
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranks.keys().copied()
    }
}

#[derive(Clone)]
enum Coverage {
    Constant(f64),
    Cylinder(CylinderEvent),
    FirstVisit { site: usize, time: usize },
    PositionAt { time: usize, site: usize },
    Points { prefixes: Vec<Vec<usize>>, complement: bool },
    Table(Arc<CoverageTable>),
    Union(Vec<EventFamily>),
}

/// An event `A ⊆ Ω` described by its coverage fractions at every rank.
#[derive(Clone)]
pub struct EventFamily {
    name: String,
    kind: FamilyKind,
    m: usize,
    coverage: Coverage,
}

impl fmt::Debug for EventFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventFamily")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

fn check_site(site: usize, m: usize) -> Result<()> {
    if site >= m {
        return Err(Error::SiteOutOfRange { site, m });
    }
    Ok(())
}

impl EventFamily {
    /// A cylinder event lifted to every rank.
    pub fn cylinder(event: CylinderEvent) -> Self {
        EventFamily {
            name: format!("cylinder(rank={}, |A|={})", event.rank(), event.len()),
            kind: FamilyKind::Cylinder,
            m: event.space().m(),
            coverage: Coverage::Cylinder(event),
        }
    }

    /// "The system visits site j." Every prefix eventually reaches `j`
    /// ν-almost surely, so the coverage is identically 1.
    pub fn visits_site(m: SiteCount, site: usize) -> Result<Self> {
        check_site(site, m.get())?;
        Ok(EventFamily {
            name: format!("visits_site({site})"),
            kind: FamilyKind::Tail,
            m: m.get(),
            coverage: Coverage::Constant(1.0),
        })
    }

    /// "The system never visits site j", the ν-null complement of the above.
    pub fn never_visits_site(m: SiteCount, site: usize) -> Result<Self> {
        check_site(site, m.get())?;
        Ok(EventFamily {
            name: format!("never_visits_site({site})"),
            kind: FamilyKind::Tail,
            m: m.get(),
            coverage: Coverage::Constant(0.0),
        })
    }

    /// `Bₜ = C×⋯×C×{j}×S×⋯` with `t` factors `C = S∖{j}`.
    pub fn first_visit_at(m: SiteCount, site: usize, time: usize) -> Result<Self> {
        check_site(site, m.get())?;
        Ok(EventFamily {
            name: format!("first_visit_at(site={site}, t={time})"),
            kind: FamilyKind::Cylinder,
            m: m.get(),
            coverage: Coverage::FirstVisit { site, time },
        })
    }

    /// "The particle is at site j at time t."
    pub fn position_at(m: SiteCount, time: usize, site: usize) -> Result<Self> {
        check_site(site, m.get())?;
        Ok(EventFamily {
            name: format!("position_at(t={time}, site={site})"),
            kind: FamilyKind::Cylinder,
            m: m.get(),
            coverage: Coverage::PositionAt { time, site },
        })
    }

    /// The singleton `{γ}` of an infinite path known through `prefix`.
    ///
    /// Up to the prefix rank the weights are those of `cyl(prefix)`. Past it
    /// each extension carries `m^-(t-n)`, the chance that a uniformly drawn
    /// continuation of the prefix passes through it.
    pub fn singleton(m: SiteCount, prefix: NPath) -> Result<Self> {
        let mut f = Self::countable(m, vec![prefix])?;
        f.name = format!("singleton({})", f.prefix_label());
        Ok(f)
    }

    /// A finite set of singletons; no prefix may extend another.
    pub fn countable(m: SiteCount, prefixes: Vec<NPath>) -> Result<Self> {
        let prefixes = Self::check_prefixes(m, prefixes)?;
        let mut f = EventFamily {
            name: String::new(),
            kind: FamilyKind::Countable,
            m: m.get(),
            coverage: Coverage::Points {
                prefixes,
                complement: false,
            },
        };
        f.name = format!("countable({})", f.prefix_label());
        Ok(f)
    }

    pub fn complement_of_countable(m: SiteCount, prefixes: Vec<NPath>) -> Result<Self> {
        let prefixes = Self::check_prefixes(m, prefixes)?;
        let mut f = EventFamily {
            name: String::new(),
            kind: FamilyKind::Complement,
            m: m.get(),
            coverage: Coverage::Points {
                prefixes,
                complement: true,
            },
        };
        f.name = format!("complement_of_countable({})", f.prefix_label());
        Ok(f)
    }

    fn check_prefixes(m: SiteCount, prefixes: Vec<NPath>) -> Result<Vec<Vec<usize>>> {
        let raw: Vec<Vec<usize>> = prefixes.into_iter().map(|p| p.sites().to_vec()).collect();
        for s in raw.iter().flatten() {
            check_site(*s, m.get())?;
        }
        for (i, p) in raw.iter().enumerate() {
            for (j, q) in raw.iter().enumerate() {
                if i != j && q.len() >= p.len() && q[..p.len()] == p[..] {
                    return Err(Error::InvalidArgument(
                        "countable prefixes must not extend one another".into(),
                    ));
                }
            }
        }
        Ok(raw)
    }

    fn prefix_label(&self) -> String {
        match &self.coverage {
            Coverage::Points { prefixes, .. } => prefixes
                .iter()
                .map(|p| p.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(""))
                .collect::<Vec<_>>()
                .join(";"),
            _ => String::new(),
        }
    }

    pub fn coverage_table(table: CoverageTable, name: impl Into<String>) -> Self {
        EventFamily {
            name: name.into(),
            kind: FamilyKind::Tail,
            m: table.space.m(),
            coverage: Coverage::Table(Arc::new(table)),
        }
    }

    /// Family of `A ∪ B` for disjoint `A`, `B`: coverages add.
    pub fn disjoint_union(&self, other: &EventFamily) -> EventFamily {
        let mut parts = Vec::new();
        for f in [self, other] {
            match &f.coverage {
                Coverage::Union(v) => parts.extend(v.iter().cloned()),
                _ => parts.push(f.clone()),
            }
        }
        let kind = if parts.iter().all(|f| f.kind == FamilyKind::Cylinder) {
            FamilyKind::Cylinder
        } else {
            FamilyKind::Tail
        };
        EventFamily {
            name: format!("{} + {}", self.name, other.name),
            kind,
            m: self.m,
            coverage: Coverage::Union(parts),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Coverage fraction at rank `t` of the path `sites` (length t+1).
    pub fn coverage(&self, t: usize, sites: &[usize]) -> Result<f64> {
        if sites.len() != t + 1 {
            return Err(Error::RankMismatch {
                expected: t,
                actual: sites.len().saturating_sub(1),
            });
        }
        Ok(self.weights(t)?.eval(sites))
    }

    /// The coverage function at rank `t`.
    pub fn weights(&self, t: usize) -> Result<RankWeights> {
        let m = self.m;
        Ok(match &self.coverage {
            Coverage::Constant(c) => RankWeights::Affine {
                constant: *c,
                terms: Vec::new(),
            },
            Coverage::Cylinder(event) => {
                let event = event.clone();
                let space = *event.space();
                let n = event.rank();
                if t >= n {
                    RankWeights::PerPath(Arc::new(move |sites: &[usize]| {
                        match space.index_of_sites(&sites[..=n]) {
                            Some(i) if event.contains(i) => 1.0,
                            _ => 0.0,
                        }
                    }))
                } else {
                    let factor = space.pow_m(n - t);
                    RankWeights::PerPath(Arc::new(move |sites: &[usize]| {
                        match space.index_of_sites(sites) {
                            Some(i) => {
                                event.count_in_range(i * factor, (i + 1) * factor) as f64 / factor as f64
                            }
                            None => 0.0,
                        }
                    }))
                }
            }
            Coverage::FirstVisit { site, time } => {
                let (site, time) = (*site, *time);
                if t >= time {
                    RankWeights::PerPath(Arc::new(move |s: &[usize]| {
                        if s[..time].iter().all(|&x| x != site) && s[time] == site {
                            1.0
                        } else {
                            0.0
                        }
                    }))
                } else {
                    let tail = ((m - 1) as f64 / m as f64).powi((time - 1 - t) as i32) / m as f64;
                    RankWeights::PerPath(Arc::new(move |s: &[usize]| {
                        if s.contains(&site) {
                            0.0
                        } else {
                            tail
                        }
                    }))
                }
            }
            Coverage::PositionAt { time, site } => {
                let (site, time) = (*site, *time);
                if t >= time {
                    RankWeights::PerPath(Arc::new(move |s: &[usize]| if s[time] == site { 1.0 } else { 0.0 }))
                } else {
                    RankWeights::Affine {
                        constant: 1.0 / m as f64,
                        terms: Vec::new(),
                    }
                }
            }
            Coverage::Points {
                prefixes,
                complement,
            } => {
                let sign = if *complement { -1.0 } else { 1.0 };
                let terms = prefixes
                    .iter()
                    .map(|p| {
                        let n = p.len() - 1;
                        if t < n {
                            (p[..=t].to_vec(), sign * (m as f64).powi(-((n - t) as i32)))
                        } else {
                            (p.clone(), sign * (m as f64).powi(-((t - n) as i32)))
                        }
                    })
                    .collect();
                RankWeights::Affine {
                    constant: if *complement { 1.0 } else { 0.0 },
                    terms,
                }
            }
            Coverage::Table(table) => {
                let values = table.ranks.get(&t).cloned().ok_or_else(|| Error::CoverageUnavailable {
                    family: self.name.clone(),
                    rank: t,
                })?;
                let space = table.space;
                RankWeights::PerPath(Arc::new(move |s: &[usize]| {
                    match space.index_of_sites(s) {
                        Some(i) => values.get(&i).copied().unwrap_or(0.0),
                        None => 0.0,
                    }
                }))
            }
            Coverage::Union(parts) => {
                let mut acc = RankWeights::Affine {
                    constant: 0.0,
                    terms: Vec::new(),
                };
                for p in parts {
                    acc = acc.add(p.weights(t)?);
                }
                acc
            }
        })
    }

    /// Classical weight ν(A) on the given path space, when it is known exactly.
    pub fn classical_measure_exact(&self, space: &PathSpace) -> Option<BigRational> {
        let m = BigInt::from(self.m);
        let one = BigRational::one();
        let from_f = |c: f64| BigRational::from_float(c);
        match &self.coverage {
            Coverage::Constant(c) => from_f(*c),
            Coverage::Cylinder(e) => Some(e.classical_measure_exact()),
            Coverage::FirstVisit { site, time } => {
                let frac = |num: BigInt, k: usize| BigRational::new(num, m.pow(k as u32));
                Some(match space.fixed_initial() {
                    None => frac((&m - 1u32).pow(*time as u32), time + 1),
                    Some(s) if s == *site => {
                        if *time == 0 {
                            one
                        } else {
                            BigRational::zero()
                        }
                    }
                    Some(_) if *time == 0 => BigRational::zero(),
                    Some(_) => frac((&m - 1u32).pow((time - 1) as u32), *time),
                })
            }
            Coverage::PositionAt { time, site } => Some(match (space.fixed_initial(), time) {
                (Some(s), 0) if s == *site => one,
                (Some(_), 0) => BigRational::zero(),
                _ => BigRational::new(BigInt::one(), m),
            }),
            Coverage::Points { complement, .. } => Some(if *complement { one } else { BigRational::zero() }),
            Coverage::Table(_) => None,
            Coverage::Union(parts) => parts
                .iter()
                .map(|p| p.classical_measure_exact(space))
                .try_fold(BigRational::zero(), |acc, x| x.map(|x| acc + x)),
        }
    }

    pub fn classical_measure(&self, space: &PathSpace) -> Option<f64> {
        self.classical_measure_exact(space).map(|r| rational_to_f64(&r))
    }
}

/// The built-in event families over `m` sites, for site 0 and small times.
pub fn builtin_families(m: SiteCount) -> Vec<EventFamily> {
    let mut out = vec![
        EventFamily::visits_site(m, 0).expect("site 0"),
        EventFamily::never_visits_site(m, 0).expect("site 0"),
    ];
    for t in 0..4 {
        out.push(EventFamily::first_visit_at(m, 0, t).expect("site 0"));
        out.push(EventFamily::position_at(m, t, m.get() - 1).expect("last site"));
    }
    let p = |v: Vec<usize>| NPath::new(v, m).expect("valid sites");
    out.push(EventFamily::singleton(m, p(vec![0, 0])).expect("prefix"));
    let last = m.get() - 1;
    let pts = vec![p(vec![0, last]), p(vec![0, 0, last])];
    out.push(EventFamily::countable(m, pts.clone()).expect("prefixes"));
    out.push(EventFamily::complement_of_countable(m, pts).expect("prefixes"));
    out
}
