//! Robust multi-robot hybrid-task allocation for cleaning robots.
//!
//! A heterogeneous fleet (vacuuming robots, mopping robots, ...) must clean
//! a set of zones, where every zone needs several task types in a fixed
//! order. The crate covers the full pipeline:
//!
//! - [`instance`]: problem data, the TOML instance format and generators,
//! - [`gridmap`]: occupancy grids, A* shortest paths and travel times,
//! - [`model`]: the parameter matrices, robust cleaning times over box,
//!   convex-hull and ellipsoidal uncertainty sets, and LP export,
//! - [`schedule`]: the solution-vector encoding and its schedule decoder,
//! - [`solvers`]: simulated annealing, genetic algorithm, particle swarm and
//!   an exhaustive oracle,
//! - [`bench`]: solver sweeps and CSV/JSON reports.

pub mod bench;
pub mod gridmap;
pub mod instance;
pub mod model;
pub mod schedule;
pub mod solvers;

pub use gridmap::{build_travel_times, Cell, GridMap, TravelTimes};
pub use instance::{
    generate_instance, generate_scenarios, load_instance, parse_instance, validate_instance,
    GeneratorParams, ProblemInstance,
};
pub use model::{assemble_matrices, export_lp, ModelMatrices, RobustConfig, UncertaintySet};
pub use schedule::{decode, Schedule, SolutionVector};
pub use solvers::SolveResult;
