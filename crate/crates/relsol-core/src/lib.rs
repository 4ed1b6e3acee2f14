//! Numerics for the one-dimensional pseudo-relativistic focusing NLS
//! i du/dt = H_c u - |u|^{p-1} u on a periodic grid, where
//! H_c = sqrt(-c^2 d_xx + c^4/4) - c^2/2 acts as a Fourier multiplier.
//!
//! The crate covers: the spectral toolbox (grids, fields, multipliers and
//! their operator-bound checks), mass/energy functionals with the sharp
//! interpolation constants and admissibility thresholds, ground-state
//! solvers (Petviashvili with mass matching, normalized gradient flow, the
//! closed-form non-relativistic soliton) together with the non-relativistic
//! limit study, linearized operators with constrained eigenvalue and
//! coercivity computations, split-step time evolution with modulation
//! tracking for orbital-stability experiments, and the on-disk formats the
//! command-line front end speaks.
//!
//! All transforms are unnormalized forward / 1/N inverse; inner products and
//! norms carry the grid weight h, so discrete quantities track their
//! continuum counterparts directly.

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod groundstate;
pub mod io;
pub mod linops;
pub mod spectral;

pub use error::{Error, Result};
pub use evolution::{
    conserved_report, evolve_sampled, gwp_monitor, modulation_distance, stability_experiment,
    step_strang, ConservedReport, EvolutionState, GwpReport, IntegratorConfig, ModulationReport,
    SampleRow, StabilityReport, StrangStepper, Trajectory,
};
pub use functionals::{
    energy_c, energy_inf, functional_i, gn_modified_rhs, kinetic_norm, mass, sharp_c1,
    sharp_c1_closed_form, sharp_c_half, thresholds, Constants, ModelParams, Provenance,
    ProvenanceTags, Thresholds,
};
pub use groundstate::{
    mu_inf_of_mass, nonrel_limit_study, pohozaev_relativistic_residual, scaling_transport,
    solve_gradient_flow, solve_petviashvili, soliton_inf, GroundState, Init, LimitRow, LimitStudy,
    SolveMethod, SolveOptions,
};
pub use linops::{
    apply_linearized, coercivity_ratio, min_eig_constrained, ConstraintSet, EigResult,
    LinearizedOperator, OperatorKind,
};
pub use spectral::{
    apply_multiplier, hc_symbol, hc_symbol_gap, inner, sobolev_norm, symbol_bounds_check, Field,
    Grid, Multiplier, SymbolBoundsReport,
};
