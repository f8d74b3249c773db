//! Finite path spaces over `m` sites.
//!
//! An n-path is a string of sites `γ₀γ₁…γₙ`. Paths are indexed in base `m`
//! with `γ₀` as the most significant digit. When the space pins the initial
//! site, the index only encodes the free digits `γ₁…γₙ`, so the two-site walk
//! started at the origin identifies its rank-n paths with `0..2ⁿ`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default cap on the number of paths any single enumeration may touch.
pub const DEFAULT_PATH_BUDGET: u64 = 1 << 24;

/// Member count above which cylinder events switch from a sorted index list to a bitmap.
pub const BITMAP_THRESHOLD: usize = 1 << 16;

/// Number of sites `m` of the position space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteCount(usize);

impl SiteCount {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("site count must be at least 1".into()));
        }
        Ok(SiteCount(m))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// The shape of Ωₙ: site count, optional pinned initial site, enumeration budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathSpace {
    m: usize,
    fixed_initial: Option<usize>,
    budget: u64,
}

impl PathSpace {
    /// Paths with unrestricted `γ₀`.
    pub fn new(m: SiteCount) -> Self {
        PathSpace {
            m: m.get(),
            fixed_initial: None,
            budget: DEFAULT_PATH_BUDGET,
        }
    }

    /// Paths with `γ₀` pinned to `site`.
    pub fn with_fixed_initial(m: SiteCount, site: usize) -> Result<Self> {
        if site >= m.get() {
            return Err(Error::SiteOutOfRange { site, m: m.get() });
        }
        Ok(PathSpace {
            m: m.get(),
            fixed_initial: Some(site),
            budget: DEFAULT_PATH_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn fixed_initial(&self) -> Option<usize> {
        self.fixed_initial
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Number of free base-m digits in a rank-n index.
    fn free_digits(&self, n: usize) -> usize {
        if self.fixed_initial.is_some() {
            n
        } else {
            n + 1
        }
    }

    /// |Ωₙ| without any budget check (saturating in `u128`).
    pub fn cardinality(&self, n: usize) -> u128 {
        let mut c: u128 = 1;
        for _ in 0..self.free_digits(n) {
            c = c.saturating_mul(self.m as u128);
        }
        c
    }

    /// |Ωₙ|, failing when it exceeds the enumeration budget.
    pub fn checked_len(&self, n: usize) -> Result<u64> {
        let c = self.cardinality(n);
        if c > self.budget as u128 {
            return Err(Error::BudgetExceeded {
                m: self.m,
                n,
                needed: c,
                cap: self.budget,
            });
        }
        Ok(c as u64)
    }

    /// `m^k` as u64; callers have already bounded it by the budget.
    pub(crate) fn pow_m(&self, k: usize) -> u64 {
        (self.m as u64).pow(k as u32)
    }

    /// Final site `γₙ` of the path with the given index.
    pub fn final_site(&self, n: usize, index: u64) -> usize {
        match (n, self.fixed_initial) {
            (0, Some(s)) => s,
            _ => (index % self.m as u64) as usize,
        }
    }

    /// Decodes an index into its sites, writing into `out` (resized to n+1).
    pub fn decode_into(&self, n: usize, index: u64, out: &mut Vec<usize>) {
        out.clear();
        out.resize(n + 1, 0);
        let mut rest = index;
        let digits = self.free_digits(n);
        for k in 0..digits {
            out[n - k] = (rest % self.m as u64) as usize;
            rest /= self.m as u64;
        }
        if let Some(s) = self.fixed_initial {
            out[0] = s;
        }
    }

    pub fn path_at(&self, index: PathIndex) -> Result<NPath> {
        if index.value as u128 >= self.cardinality(index.rank) {
            return Err(Error::IndexOutOfRange {
                index: index.value,
                rank: index.rank,
            });
        }
        let mut sites = Vec::new();
        self.decode_into(index.rank, index.value, &mut sites);
        Ok(NPath { sites })
    }

    pub fn index_of(&self, path: &NPath) -> Result<PathIndex> {
        let mut value: u64 = 0;
        let start = match self.fixed_initial {
            Some(s) => {
                if path.sites[0] != s {
                    return Err(Error::InvalidArgument(format!(
                        "path starts at site {} but the space pins site {}",
                        path.sites[0], s
                    )));
                }
                1
            }
            None => 0,
        };
        for &site in &path.sites[start..] {
            if site >= self.m {
                return Err(Error::SiteOutOfRange { site, m: self.m });
            }
            value = value
                .checked_mul(self.m as u64)
                .and_then(|v| v.checked_add(site as u64))
                .ok_or_else(|| Error::InvalidArgument("path index overflows u64".into()))?;
        }
        Ok(PathIndex {
            value,
            rank: path.rank(),
        })
    }

    /// Index of a raw site string, or `None` if it is not in this space.
    pub(crate) fn index_of_sites(&self, sites: &[usize]) -> Option<u64> {
        let start = match self.fixed_initial {
            Some(s) if sites.first() != Some(&s) => return None,
            Some(_) => 1,
            None => 0,
        };
        let mut value: u64 = 0;
        for &site in &sites[start..] {
            if site >= self.m {
                return None;
            }
            value = value.checked_mul(self.m as u64)?.checked_add(site as u64)?;
        }
        Some(value)
    }

    /// All paths of Ωₙ in increasing index order.
    pub fn paths(&self, n: usize) -> Result<impl Iterator<Item = NPath> + '_> {
        let len = self.checked_len(n)?;
        Ok((0..len).map(move |i| {
            let mut sites = Vec::with_capacity(n + 1);
            self.decode_into(n, i, &mut sites);
            NPath { sites }
        }))
    }

    /// ν(cyl(γ)) for any γ ∈ Ωₙ of this space.
    pub fn cylinder_weight(&self, n: usize) -> f64 {
        1.0 / self.cardinality(n) as f64
    }

    pub fn cylinder_weight_exact(&self, n: usize) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.cardinality(n)))
    }
}

/// Enumerates Ωₙ over `m` free sites, γ₀ included.
pub fn enumerate_paths(m: SiteCount, n: usize) -> Result<Vec<NPath>> {
    Ok(PathSpace::new(m).paths(n)?.collect())
}

/// ν(cyl(γ)) = m^-(n+1) under the uniform product measure.
pub fn path_measure(m: SiteCount, n: usize) -> f64 {
    (m.get() as f64).powi(-((n + 1) as i32))
}

pub fn path_measure_exact(m: SiteCount, n: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(m.get()).pow((n + 1) as u32))
}

/// A finite string of sites γ₀…γₙ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NPath {
    sites: Vec<usize>,
}

impl NPath {
    pub fn new(sites: Vec<usize>, m: SiteCount) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("a path has at least one site".into()));
        }
        if let Some(&site) = sites.iter().find(|&&s| s >= m.get()) {
            return Err(Error::SiteOutOfRange { site, m: m.get() });
        }
        Ok(NPath { sites })
    }

    pub fn rank(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn initial(&self) -> usize {
        self.sites[0]
    }

    pub fn last(&self) -> usize {
        self.sites[self.sites.len() - 1]
    }

    pub fn is_prefix_of(&self, other: &[usize]) -> bool {
        other.len() >= self.sites.len() && other[..self.sites.len()] == self.sites[..]
    }
}

impl fmt::Display for NPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.sites.iter().any(|&s| s >= 10) { "," } else { "" };
        let parts: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(sep))
    }
}

/// Canonical index of an n-path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathIndex {
    pub value: u64,
    pub rank: usize,
}

/// Steps that change site, `|{i : γᵢ ≠ γᵢ₊₁}|`.
pub fn flip_count(path: &NPath) -> usize {
    flip_count_sites(path.sites())
}

pub(crate) fn flip_count_sites(sites: &[usize]) -> usize {
    sites.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `c_n` for the two-site walk pinned at the origin, generated by reflection:
/// `c_{n+1}` is `c_n` followed by `c_n` reversed with every entry incremented.
pub fn flip_count_vector(n: usize) -> Vec<u32> {
    let mut c = vec![0u32];
    for _ in 0..n {
        let upper: Vec<u32> = c.iter().rev().map(|v| v + 1).collect();
        c.extend(upper);
    }
    c
}

/// Both sides of `c_{n+1}(2^{n+1}-1-j) = c_n(j) + 1`, each computed by direct
/// flip counting on a two-site space pinned at the origin.
pub fn flip_count_reflection(m: SiteCount, n: usize, j: u64) -> Result<(usize, usize)> {
    if m.get() != 2 {
        return Err(Error::InvalidArgument(format!(
            "flip-count reflection is defined for two sites, got m={}",
            m.get()
        )));
    }
    if n >= 63 || j >= (1u64 << n) {
        return Err(Error::IndexOutOfRange { index: j, rank: n });
    }
    let space = PathSpace::with_fixed_initial(m, 0)?;
    let mut buf = Vec::new();
    space.decode_into(n + 1, (1u64 << (n + 1)) - 1 - j, &mut buf);
    let lhs = flip_count_sites(&buf);
    space.decode_into(n, j, &mut buf);
    let rhs = flip_count_sites(&buf) + 1;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Members {
    Sparse(Vec<u64>),
    Bitmap { words: Vec<u64>, count: usize },
}

/// A subset of Ωₙ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderEvent {
    space: PathSpace,
    rank: usize,
    members: Members,
}

impl CylinderEvent {
    pub fn empty(space: PathSpace, rank: usize) -> Self {
        CylinderEvent {
            space,
            rank,
            members: Members::Sparse(Vec::new()),
        }
    }

    /// Ωₙ itself.
    pub fn all(space: PathSpace, rank: usize) -> Result<Self> {
        let len = space.checked_len(rank)?;
        Self::from_sorted_unique(space, rank, (0..len).collect())
    }

    pub fn from_indices(
        space: PathSpace,
        rank: usize,
        indices: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        let card = space.cardinality(rank);
        let mut v: Vec<u64> = indices.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&i| i as u128 >= card) {
            return Err(Error::IndexOutOfRange { index: bad, rank });
        }
        v.sort_unstable();
        v.dedup();
        Self::from_sorted_unique(space, rank, v)
    }

    pub fn from_paths<'a>(
        space: PathSpace,
        rank: usize,
        paths: impl IntoIterator<Item = &'a NPath>,
    ) -> Result<Self> {
        let mut idx = Vec::new();
        for p in paths {
            if p.rank() != rank {
                return Err(Error::RankMismatch {
                    expected: rank,
                    actual: p.rank(),
                });
            }
            idx.push(space.index_of(p)?.value);
        }
        Self::from_indices(space, rank, idx)
    }

    /// `{γ ∈ Ωₙ : pred(γ)}`, enumerating Ωₙ under the budget.
    pub fn from_predicate(
        space: PathSpace,
        rank: usize,
        mut pred: impl FnMut(&[usize]) -> bool,
    ) -> Result<Self> {
        let len = space.checked_len(rank)?;
        let mut buf = Vec::with_capacity(rank + 1);
        let mut v = Vec::new();
        for i in 0..len {
            space.decode_into(rank, i, &mut buf);
            if pred(&buf) {
                v.push(i);
            }
        }
        Self::from_sorted_unique(space, rank, v)
    }

    /// `{γ ∈ Ωₙ : γₙ = site}`.
    pub fn final_site(space: PathSpace, rank: usize, site: usize) -> Result<Self> {
        if site >= space.m() {
            return Err(Error::SiteOutOfRange { site, m: space.m() });
        }
        if rank == 0 {
            let len = space.checked_len(0)?;
            return Self::from_indices(
                space,
                0,
                (0..len).filter(|&i| space.final_site(0, i) == site),
            );
        }
        let len = space.checked_len(rank)?;
        let m = space.m() as u64;
        Self::from_sorted_unique(space, rank, (site as u64..len).step_by(m as usize).collect())
    }

    fn from_sorted_unique(space: PathSpace, rank: usize, v: Vec<u64>) -> Result<Self> {
        let members = if v.len() > BITMAP_THRESHOLD {
            let card = space.cardinality(rank) as usize;
            let mut words = vec![0u64; card.div_ceil(64)];
            for &i in &v {
                words[(i / 64) as usize] |= 1 << (i % 64);
            }
            Members::Bitmap {
                words,
                count: v.len(),
            }
        } else {
            Members::Sparse(v)
        };
        Ok(CylinderEvent {
            space,
            rank,
            members,
        })
    }

    pub fn space(&self) -> &PathSpace {
        &self.space
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        match &self.members {
            Members::Sparse(v) => v.len(),
            Members::Bitmap { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_bitmap(&self) -> bool {
        matches!(self.members, Members::Bitmap { .. })
    }

    pub fn contains(&self, index: u64) -> bool {
        match &self.members {
            Members::Sparse(v) => v.binary_search(&index).is_ok(),
            Members::Bitmap { words, .. } => words
                .get((index / 64) as usize)
                .is_some_and(|w| w & (1 << (index % 64)) != 0),
        }
    }

    /// Member indices in increasing order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.members {
            Members::Sparse(v) => Box::new(v.iter().copied()),
            Members::Bitmap { words, .. } => Box::new(words.iter().enumerate().flat_map(|(wi, &w)| {
                let mut w = w;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let b = w.trailing_zeros() as u64;
                    w &= w - 1;
                    Some(wi as u64 * 64 + b)
                })
            })),
        }
    }

    /// Number of members in `[lo, hi)`.
    pub fn count_in_range(&self, lo: u64, hi: u64) -> usize {
        match &self.members {
            Members::Sparse(v) => {
                let a = v.partition_point(|&x| x < lo);
                let b = v.partition_point(|&x| x < hi);
                b - a
            }
            Members::Bitmap { .. } => (lo..hi).filter(|&i| self.contains(i)).count(),
        }
    }

    fn check_compatible(&self, other: &CylinderEvent) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                actual: other.rank,
            });
        }
        if self.space.m() != other.space.m()
            || self.space.fixed_initial() != other.space.fixed_initial()
        {
            return Err(Error::InvalidArgument("events live on different path spaces".into()));
        }
        Ok(())
    }

    pub fn is_disjoint(&self, other: &CylinderEvent) -> Result<bool> {
        self.check_compatible(other)?;
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(!small.iter().any(|i| large.contains(i)))
    }

    pub fn union(&self, other: &CylinderEvent) -> Result<CylinderEvent> {
        self.check_compatible(other)?;
        let mut v: Vec<u64> = self.iter().chain(other.iter()).collect();
        v.sort_unstable();
        v.dedup();
        Self::from_sorted_unique(self.space, self.rank, v)
    }

    /// Union of mutually disjoint events; fails on overlap.
    pub fn disjoint_union(&self, other: &CylinderEvent) -> Result<CylinderEvent> {
        if !self.is_disjoint(other)? {
            return Err(Error::NotDisjoint);
        }
        self.union(other)
    }

    pub fn complement(&self) -> Result<CylinderEvent> {
        let len = self.space.checked_len(self.rank)?;
        let v: Vec<u64> = (0..len).filter(|&i| !self.contains(i)).collect();
        Self::from_sorted_unique(self.space, self.rank, v)
    }

    /// `A × S^k` as an event of rank n+k.
    pub fn extend(&self, k: usize) -> Result<CylinderEvent> {
        self.space.checked_len(self.rank + k)?;
        let factor = self.space.pow_m(k);
        let v: Vec<u64> = self
            .iter()
            .flat_map(|i| (0..factor).map(move |r| i * factor + r))
            .collect();
        Self::from_sorted_unique(self.space, self.rank + k, v)
    }

    /// Classical weight ν(A) under the uniform product measure.
    pub fn classical_measure(&self) -> f64 {
        self.len() as f64 / self.space.cardinality(self.rank) as f64
    }

    pub fn classical_measure_exact(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.len()),
            BigInt::from(self.space.cardinality(self.rank)),
        )
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    r.to_f64().unwrap_or(f64::NAN)
}
