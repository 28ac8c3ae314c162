//! Lower bounds for polynomials on semialgebraic sets via geometric programming.

pub mod bench;
pub mod bounds;
pub mod gp;
pub mod hypercube;
pub mod io;
pub mod poly;
pub mod verify;
