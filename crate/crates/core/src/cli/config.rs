//! JSON experiment configs.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major lists of
//! rows. Unknown keys are rejected everywhere.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pathspace::{CylinderEvent, NPath, PathSpace, SiteCount};
use crate::process::{CoverageTable, EventFamily, QProcess};
use crate::unitary::{ComplexMatrix, FiniteUnitarySystem, InitialState};

pub type ComplexPair = [f64; 2];
pub type MatrixSpec = Vec<Vec<ComplexPair>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub initial_state: Vec<ComplexPair>,
    #[serde(default)]
    pub fixed_initial_site: Option<usize>,
    #[serde(default)]
    pub path_budget: Option<u64>,
    #[serde(default)]
    pub walk: Option<WalkSpec>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub integrate: Option<IntegrateSpec>,
    #[serde(default)]
    pub check: Option<CheckSpec>,
    /// Directory that relative file references resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SystemSpec {
    pub m: usize,
    #[serde(default)]
    pub stationary: Option<MatrixSpec>,
    #[serde(default)]
    pub steps: Option<Vec<MatrixSpec>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WalkSpec {
    pub t_max: Option<usize>,
    pub direct_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpectrumSpec {
    pub rank: Option<usize>,
    pub dense_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MeasureSpec {
    pub events: Vec<EventSpec>,
    pub t_max: Option<usize>,
    pub window: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum EventSpec {
    #[serde(rename_all = "camelCase")]
    Cylinder {
        rank: usize,
        #[serde(default)]
        paths: Vec<Vec<usize>>,
        #[serde(default)]
        indices: Vec<u64>,
        name: Option<String>,
    },
    FinalSite {
        rank: usize,
        site: usize,
        name: Option<String>,
    },
    Empty {
        rank: usize,
        name: Option<String>,
    },
    All {
        rank: usize,
        name: Option<String>,
    },
    VisitsSite {
        site: usize,
        name: Option<String>,
    },
    NeverVisitsSite {
        site: usize,
        name: Option<String>,
    },
    FirstVisitAt {
        site: usize,
        time: usize,
        name: Option<String>,
    },
    PositionAt {
        time: usize,
        site: usize,
        name: Option<String>,
    },
    Singleton {
        prefix: Vec<usize>,
        name: Option<String>,
    },
    Countable {
        prefixes: Vec<Vec<usize>>,
        name: Option<String>,
    },
    ComplementOfCountable {
        prefixes: Vec<Vec<usize>>,
        name: Option<String>,
    },
    CoverageTable {
        file: PathBuf,
        name: Option<String>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IntegrateSpec {
    #[serde(default)]
    pub finite: Option<FiniteIntegral>,
    #[serde(default)]
    pub cylinder: Option<CylinderIntegral>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FiniteIntegral {
    pub weights: Vec<f64>,
    pub f: Vec<f64>,
    #[serde(default)]
    pub state: StateSpec,
    #[serde(default)]
    pub scale: Option<f64>,
}

/// A density operator; neither field means the maximally mixed state.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StateSpec {
    pub pure: Option<Vec<ComplexPair>>,
    pub matrix: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CylinderIntegral {
    pub rank: usize,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// Shorthand for the indicator of "at this site at time `rank`".
    #[serde(default)]
    pub final_site: Option<usize>,
    #[serde(default)]
    pub scale: Option<f64>,
    pub t_max: Option<usize>,
    pub window: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CheckSpec {
    pub t_max: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub triples: Option<usize>,
}

pub(crate) fn complex(p: &ComplexPair) -> Result<Complex64> {
    if !(p[0].is_finite() && p[1].is_finite()) {
        return Err(Error::InvalidArgument("complex entries must be finite".into()));
    }
    Ok(Complex64::new(p[0], p[1]))
}

pub(crate) fn matrix(spec: &MatrixSpec, n: usize) -> Result<ComplexMatrix> {
    if spec.len() != n || spec.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(format!("matrices must be {n}×{n}")));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, row) in spec.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = complex(e)?;
        }
    }
    Ok(m)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// The shipped two-site hopper from the origin.
    pub fn two_site_walk() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ExperimentConfig {
            system: SystemSpec {
                m: 2,
                stationary: Some(vec![vec![[h, 0.0], [0.0, h]], vec![[0.0, h], [h, 0.0]]]),
                steps: None,
            },
            initial_state: vec![[1.0, 0.0], [0.0, 0.0]],
            fixed_initial_site: Some(0),
            path_budget: None,
            walk: None,
            spectrum: None,
            measure: None,
            integrate: None,
            check: None,
            base_dir: PathBuf::new(),
        }
    }

    pub fn site_count(&self) -> Result<SiteCount> {
        SiteCount::new(self.system.m)
    }

    pub fn build_process(&self) -> Result<QProcess> {
        let m = self.site_count()?;
        let n = m.get();
        let sys = match (&self.system.stationary, &self.system.steps) {
            (Some(u), None) => FiniteUnitarySystem::stationary(matrix(u, n)?)?,
            (None, Some(steps)) => FiniteUnitarySystem::from_steps(
                steps.iter().map(|s| matrix(s, n)).collect::<Result<Vec<_>>>()?,
            )?,
            _ => {
                return Err(Error::InvalidArgument(
                    "system needs exactly one of `stationary` or `steps`".into(),
                ))
            }
        };
        let psi = InitialState::new(self.initial_state.iter().map(complex).collect::<Result<Vec<_>>>()?)?;
        let mut space = match self.fixed_initial_site {
            Some(s) => PathSpace::with_fixed_initial(m, s)?,
            None => PathSpace::new(m),
        };
        if let Some(b) = self.path_budget {
            space = space.with_budget(b);
        }
        QProcess::new(sys, psi, space)
    }
}

/// A parsed event: either a cylinder set or a family over all ranks.
#[derive(Debug, Clone)]
pub enum ParsedEvent {
    Cylinder { name: String, event: CylinderEvent },
    Family(EventFamily),
}

impl EventSpec {
    pub fn parse(&self, proc: &QProcess, base_dir: &Path) -> Result<ParsedEvent> {
        let space = *proc.space();
        let m = proc.system().m();
        let path = |sites: &Vec<usize>| NPath::new(sites.clone(), m);
        let named = |f: EventFamily, name: &Option<String>| match name {
            Some(n) => f.with_name(n.clone()),
            None => f,
        };
        let cyl = |event: CylinderEvent, name: &Option<String>, default: String| ParsedEvent::Cylinder {
            name: name.clone().unwrap_or(default),
            event,
        };
        Ok(match self {
            EventSpec::Cylinder {
                rank,
                paths,
                indices,
                name,
            } => {
                let mut idx = indices.clone();
                for p in paths {
                    let p = path(p)?;
                    if p.rank() != *rank {
                        return Err(Error::RankMismatch {
                            expected: *rank,
                            actual: p.rank(),
                        });
                    }
                    idx.push(space.index_of(&p)?.value);
                }
                let e = CylinderEvent::from_indices(space, *rank, idx)?;
                let label = format!("cylinder(rank={rank}, |A|={})", e.len());
                cyl(e, name, label)
            }
            EventSpec::FinalSite { rank, site, name } => cyl(
                CylinderEvent::final_site(space, *rank, *site)?,
                name,
                format!("final_site(rank={rank}, site={site})"),
            ),
            EventSpec::Empty { rank, name } => cyl(CylinderEvent::empty(space, *rank), name, format!("empty(rank={rank})")),
            EventSpec::All { rank, name } => cyl(CylinderEvent::all(space, *rank)?, name, format!("all(rank={rank})")),
            EventSpec::VisitsSite { site, name } => ParsedEvent::Family(named(EventFamily::visits_site(m, *site)?, name)),
            EventSpec::NeverVisitsSite { site, name } => {
                ParsedEvent::Family(named(EventFamily::never_visits_site(m, *site)?, name))
            }
            EventSpec::FirstVisitAt { site, time, name } => {
                ParsedEvent::Family(named(EventFamily::first_visit_at(m, *site, *time)?, name))
            }
            EventSpec::PositionAt { time, site, name } => {
                ParsedEvent::Family(named(EventFamily::position_at(m, *time, *site)?, name))
            }
            EventSpec::Singleton { prefix, name } => {
                ParsedEvent::Family(named(EventFamily::singleton(m, path(prefix)?)?, name))
            }
            EventSpec::Countable { prefixes, name } => ParsedEvent::Family(named(
                EventFamily::countable(m, prefixes.iter().map(path).collect::<Result<_>>()?)?,
                name,
            )),
            EventSpec::ComplementOfCountable { prefixes, name } => ParsedEvent::Family(named(
                EventFamily::complement_of_countable(m, prefixes.iter().map(path).collect::<Result<_>>()?)?,
                name,
            )),
            EventSpec::CoverageTable { file, name } => {
                let full = base_dir.join(file);
                let rdr = fs::File::open(&full)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", full.display())))?;
                let table = CoverageTable::from_csv(space, rdr)?;
                let label = name.clone().unwrap_or_else(|| format!("table({})", file.display()));
                ParsedEvent::Family(EventFamily::coverage_table(table, label))
            }
        })
    }
}
