//! Exact LP/MIP engine for desk-scale models.
//!
//! [`ModelIR`] is the solver-agnostic model; [`solve_lp`] runs the
//! bounded-variable simplex on its relaxation and [`solve_mip`] runs
//! LP-based branch-and-bound with lazy-cut callbacks and a solution pool.

pub mod error;
pub mod lp_format;
pub mod mip;
pub mod model;
pub mod simplex;

pub use error::ModelError;
pub use mip::{
    solve_mip, CutCallback, MipResult, MipStatus, NodeOrder, PoolEntry, SearchOptions,
};
pub use model::{ModelIR, Row, Sense, VarId, Variable};
pub use simplex::{solve_lp, solve_lp_until, LpSolution, LpStatus, SimplexEngine};
