pub mod campaign;
pub mod cube;
pub mod edge_avoiding;
pub mod error;
pub mod fault;
mod halves;
pub mod io;
pub mod path;
pub mod router;
mod search;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
