pub mod error;
pub mod combinatorics;
pub mod paintbox;
pub mod dislocation;
pub mod harness;
pub mod growth;
pub mod spine;
pub mod treemetric;
