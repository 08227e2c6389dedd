//! Shape reconstruction of cables lying on a support plane, from a camera
//! view refined by simulated tactile exploration.

pub mod cloudproc;
pub mod error;
pub mod eval;
pub mod explore;
pub mod fitting;
pub mod geom;
pub mod imgproc;
pub mod params;
pub mod pipeline;
pub mod topology;
pub mod worldsim;

pub use error::{Error, Result};
