//! Monotone symplectic maps, sectors of Lagrangian subspaces and expansion
//! estimates for products of monotone maps.
//!
//! The phase space is `R^d ⊕ R^d` with the form
//! `ω((ξ1, η1), (ξ2, η2)) = ⟨ξ1, η2⟩ - ⟨ξ2, η1⟩` and the quadratic form
//! `Q(ξ, η) = ⟨ξ, η⟩`. A symplectic map is monotone when it carries the cone
//! `C = {Q >= 0}` into itself.

pub mod cli;
pub mod cocycle;
pub mod error;
pub mod expansion;
pub mod factorization;
pub mod lagrangian;
pub mod linalg;
pub mod sampling;
pub mod symplectic;

pub use cocycle::{
    analyze_sequence, build_example69, check_criterion69, limit_subspace, Example69Spec,
    GrowthVerdict, MapSequence, SequenceReport,
};
pub use error::{Result, SectorError};
pub use expansion::{beta, image_distance, mc_inf_beta, sigma, sigma_complementary};
pub use factorization::{
    canonical_form, factor_qpr, monotonicity_class, q_isometry, CanonicalForm, MonotoneClass,
    QprFactorization,
};
pub use lagrangian::{
    distance, inclusion_predicates, mobius, normalize_to_rho, order_compare, z_subspace,
    LagrangianSubspace, Sector, SubspaceOrder,
};
pub use linalg::{classify_definiteness, Definiteness, DefinitenessClass, SymMatrix, Tolerances};
pub use symplectic::{is_symplectic, omega, q_standard, BlockMap, PhaseVector};
