//! Test-function method: exponent bookkeeping, the temporal cutoff and spatial weight, and
//! discrete evaluation of the weak-form functionals.

mod cutoff;
mod functionals;
mod manufactured;
mod params;
mod weight;

pub use cutoff::{admissibility_sup, cutoff_admissibility, temporal_cutoff_eval, TemporalCutoff};
pub use functionals::{
    check_contradiction_bound, contradiction_slope, evaluate_functionals, evaluate_ladder, ContradictionVerdict,
    FunctionalReport, RadialProfile, WeakFormData, LEAKAGE_LIMIT,
};
pub use manufactured::ManufacturedSolution;
pub use params::{
    blow_up_range, critical_exponent, derived_params, existence_exponent_bound, global_solution_decay_exponents,
    lifespan_bound, lifespan_exponent, linear_decay_exponents, young_upper, DecayExponents, ExistenceBound,
    ModelParams,
};
pub use weight::{spatial_weight_for, SpatialWeightChoice, WeightCase};
