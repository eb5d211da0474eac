pub mod bounds;
pub mod cbnorm;
pub mod channels;
pub mod entropy;
pub mod eof;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod parallel;
pub mod random;
pub mod recovery;
pub mod state;
pub mod suite;

pub use error::{Error, Result};
