//! Continuous colormap generation by biased simulated annealing in CIE Lab,
//! with CVD-aware costs, soft color preferences and an evaluation harness.
//!
//! The usual entry point is [`annealer::optimize`] with a
//! [`annealer::LuminanceProfile`], an [`annealer::OptimizerConfig`] and a
//! (possibly empty) [`preference::PreferenceShelf`].

pub mod annealer;
pub mod colormap;
pub mod colorspace;
pub mod cost;
pub mod cvd;
pub mod error;
pub mod io;
pub mod metrics;
pub mod preference;
pub mod service;
pub mod suggestions;

pub use colormap::Colormap;
pub use colorspace::{LabColor, LchColor, SrgbColor};
pub use error::{Error, Result};
