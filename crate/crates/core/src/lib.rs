//! Closed-loop NMES control design for an electrically stimulated knee joint.
//!
//! The crate bundles everything needed to design and evaluate a pulse-width
//! controller for knee extension at the desk, without hardware in the loop:
//!
//! - [`plant`] — nonlinear musculoskeletal dynamics integrated with fixed-step RK4,
//!   used as the synthetic ground-truth system,
//! - [`controller`] — the RISE control law (robust integral of the sign of the
//!   error) with a filtered error derivative and output saturation,
//! - [`reference`] — sine and smooth-step reference trajectories,
//! - [`ident`] — NARX identification with a single-hidden-layer network,
//!   trained in series-parallel form and simulated in parallel (free-run) form,
//! - [`iga`] — two-phase genetic tuning of the four RISE gains,
//! - [`session`] — excitation generation, CSV session logging, and the
//!   tracking metrics (RMSE, TEC, AvStd OP, Pearson/R²/MSE).
//!
//! A minimal closed-loop run against the synthetic plant:
//!
//! ```
//! use nmeskit_core::controller::{ControllerSettings, RiseGains};
//! use nmeskit_core::plant::{DisturbanceModel, PlantParams};
//! use nmeskit_core::reference::TrajectorySpec;
//! use nmeskit_core::session::{run_closed_loop, PlantSim, CONTROL_TS};
//!
//! let mut knee = PlantSim::new(PlantParams::default(), DisturbanceModel::None, CONTROL_TS)?;
//! let gains = RiseGains::new(2.61, 3.34, 48.94, 1.78);
//! let run = run_closed_loop(
//!     &mut knee,
//!     &gains,
//!     &TrajectorySpec::default(), // 10-40 degree sine, 5 s period
//!     &ControllerSettings::default(),
//!     10.0,
//! )?;
//! assert!(run.diverged_at.is_none());
//! assert!(run.rmse_deg < 10.0);
//! # Ok::<(), nmeskit_core::Error>(())
//! ```

pub mod controller;
mod error;
pub mod ident;
pub mod iga;
pub mod plant;
pub mod reference;
pub mod session;

pub use error::{Error, Result};
