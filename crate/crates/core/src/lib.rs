//! Quantum-inspired optimization toolkit.
//!
//! Integer linear programs are compiled into Ising models through a
//! squared-residual penalty construction ([`reduction`]) and minimized by a
//! Monte-Carlo annealer ([`annealer`]) or a coherent-Ising-machine amplitude
//! simulator ([`cim`]). Small instances are checked against exhaustive
//! enumeration ([`oracle`]). The [`cli`] module holds file formats, instance
//! generators and the batch pipeline behind the `isingopt` binary.
//!
//! ```
//! use isingopt::{anneal, reduce, AnnealParams, BilpInstance, Constraint, Sense, VarKind};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! // min x0 + 2 x1  subject to  x0 + x1 = 1
//! let instance = BilpInstance::new(
//!     vec![1.0, 2.0],
//!     vec![Constraint::new(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0)],
//!     vec![VarKind::Binary; 2],
//! )?;
//! let artifact = reduce(&instance, None)?;
//! let report = anneal(artifact.ising(), &AnnealParams { seed: 1, ..Default::default() })?;
//! let decoded = artifact.decode(&report.best_state)?;
//! assert!(decoded.feasible && decoded.objective == 1.0);
//! # Ok(())
//! # }
//! ```

pub mod annealer;
pub mod cim;
pub mod cli;
pub mod ising;
pub mod oracle;
pub mod reduction;

pub use annealer::{
    anneal, greedy_descent, AnnealParams, AnnealSchedule, NoiseConfig, SolveReport,
};
pub use cim::{cim_solve, CimParams};
pub use ising::{
    qubo_to_ising, xy_energy, IsingBuilder, IsingError, IsingModel, QuboModel, SpinState, XyModel,
};
pub use oracle::{enumerate_bilp, enumerate_ising, OracleResult};
pub use reduction::{
    reduce, BilpInstance, Constraint, PenaltyWeights, ReductionArtifact, Sense, VarKind,
};
