//! Exact gauge calculus for `sl_n` / `gl_n` connections on the formal
//! punctured disc.

pub mod cyclic;
pub mod error;
pub mod gauge;
pub mod job;
pub mod laurent;
pub mod liealg;
pub mod linalg;
pub mod oper;
pub mod schema;
pub mod springer;

pub use error::{Error, Result};
