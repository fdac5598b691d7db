//! Finite fields, truncated unramified extensions of `Z_p`, and the p-adic limits
//! of the ratios `I_s / T_s` on the domains where `T_s` is a unit.

pub mod bundle;
pub mod counting;
pub mod domain;
pub mod fq;
pub mod limit;
pub mod zpm;

pub use bundle::{
    sample_admissible, verify_bundle_invariance, verify_limit_relations, PointMatrices,
};
pub use counting::{count_nonvanishing, intersection_degree, intersection_product, CountReport};
pub use domain::{domain_membership, DomainFlags, DomainOracle, DomainPoint};
pub use fq::{Fq, FqElem};
pub use limit::{
    consecutive_gap, eval_family_at, limit_levels, limit_vector, ratios_at_level, FamilyValues,
    LimitVector,
};
pub use zpm::{PadicElem, Unramified};
