//! Parametric channel estimation for time-varying MIMO-OFDM links.
//!
//! The received pilot tensor is split into rank-one components with a complex
//! CP decomposition, the number of paths is picked by MDL on the unfoldings,
//! and each component is turned into path parameters by ESPRIT, closed-form
//! factor refinement, and alternating coordinate ascent over two frequencies.

pub mod bench;
pub mod cp;
pub mod error;
pub mod estimate;
pub mod harmonic;
pub mod io;
pub mod linalg;
pub mod mdl;
pub mod sim;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, ComplexTensor};
