//! Exact arithmetic in finite truncations of mixed-characteristic rings.

mod algebra;
pub mod linalg;
mod membership;
pub mod module;
mod monomial;
mod poly;
pub mod text;

pub use algebra::{AlgebraBuilder, Relation, TruncatedAlgebra, Variable, LIFT_EXTRA};
pub use membership::{
    certify_membership, colon_submodule, colon_window, is_unit, solve_linear_membership, solve_linear_membership_many,
    ColonModule, Membership, MembershipCertificate,
};
pub(crate) use membership::{kernel_columns, ring_of, solve_columns};
pub use monomial::Monomial;
pub use poly::{LiftPoly, PolyElement};
pub(crate) use poly::same_ambient;
pub use text::Expr;
