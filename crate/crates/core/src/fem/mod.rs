pub mod assemble;
pub mod basis;
pub mod field;
pub mod quadrature;
pub mod space;

pub use assemble::{assemble, solve_problem, Constraint, Constraints, DofMap, InterfaceLoad, LinearSystem, Problem, Robin};
pub use field::{Field, InterfaceTrace, NormKind, Sample};
pub use space::Space;
