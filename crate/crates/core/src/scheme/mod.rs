//! The forward operator `S(Δ)`, the scheme residual and the two solver
//! backends: an interpolating grid and an exact recombining lattice.

mod grid;
mod lattice;
mod operator;

pub use grid::{Grid, GridFunction, MAX_GRID_DIM};
pub use lattice::{multiset_count, solve_lattice, LatticeSolution, LatticeState, DEFAULT_NODE_CAP};
pub use operator::{
    forward_operator, residuals, scheme_residual, solution_from_steps, solve_grid, Extrapolation, GridSolution,
    SchemeConfig,
};
pub(crate) use operator::{solve_from, steps_in, ShiftTable};
