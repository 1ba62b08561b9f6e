//! Cache-aided multi-user private information retrieval driven by placement
//! delivery arrays: array validation and constructions, an executable
//! protocol, closed-form performance analysis and a simulation harness.

pub mod analysis;
pub mod constructions;
pub mod error;
pub mod pda;
pub mod protocol;
pub mod sim;

pub use error::{AnalysisError, PdaError, ProtocolError, SimError};
pub use pda::{Cell, Pda, PdaArray, PdaParams};
