//! Command implementations behind the `dlo` binary.

pub mod eval;
pub mod plot;
pub mod run;
pub mod rundir;

pub use eval::{cmd_eval, CableEval, EvalReport};
pub use plot::cmd_plot;
pub use run::{cmd_gen_scene, cmd_run, RunArgs, RunOutcome};
pub use rundir::{RunManifest, RunStatus};
