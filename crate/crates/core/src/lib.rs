//! Quantum measures on finite unitary path spaces.
//!
//! A unitary system on `m` sites and an initial state induce amplitudes on the
//! n-paths `γ₀…γₙ`, a decoherence functional `Dₙ(A, B)` on cylinder events and
//! the quantum measure `μₙ(A) = Dₙ(A, A)`. Those measures fit together across
//! ranks, which lets some non-cylinder events receive a limiting value
//! `μ̃(A)`. A separate module quantizes random variables on finite probability
//! spaces and integrates them against a state.
//!
//! ```
//! use qproc::{process::QProcess, pathspace::CylinderEvent};
//!
//! let walk = QProcess::two_site_walk();
//! let at_one = CylinderEvent::final_site(*walk.space(), 2, 1).unwrap();
//! assert!((walk.q_measure(&at_one).unwrap() - 1.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod decoherence;
pub mod error;
pub mod pathspace;
pub mod process;
pub mod quantization;
pub mod random;
pub mod unitary;
pub mod walk;

pub use decoherence::{DecoherenceState, Eigenpair, SpectralDecomposition};
pub use error::{Error, Result};
pub use pathspace::{CylinderEvent, NPath, PathIndex, PathSpace, SiteCount};
pub use process::{EventFamily, QProcess, SuitabilityReport, Verdict};
pub use quantization::{DiscreteMeasureSpace, QuantizedOperator, RandomVariable, StateOperator};
pub use unitary::{ComplexMatrix, FiniteUnitarySystem, InitialState};
