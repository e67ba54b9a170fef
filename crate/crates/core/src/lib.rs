// negated float comparisons reject NaN; index loops mirror the matrix algebra
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod builders;
pub mod complex;
pub mod error;
pub mod geodesic;
pub mod homology;
pub mod model;
pub mod region;
pub mod scenario;
pub mod verify;
