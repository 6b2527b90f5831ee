//! Numerics for self-similar (q-deformed) Schrödinger potentials and the
//! coherent-state hierarchies they support.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! qseries ──> canonical          (q-special functions; oscillator layer)
//!    │            │
//!    ▼            ▼
//!  chain ───> spectral ───> coherent      (superpotentials; eigensolver;
//!    │                          ▲           q-coherent states)
//!    └──────> pantograph ───────┘          (delay/advance equations)
//! ```
//!
//! - [`qseries`]: q-Pochhammer symbols, q-exponentials, basic and bilateral
//!   hypergeometric series, Ramanujan q-beta integral.
//! - [`canonical`]: harmonic-oscillator Fock machinery, canonical/parity/
//!   root-of-unity/Titulaer-Glauber coherent states, moments.
//! - [`chain`]: power-series and delay-marching solutions of the q-closed
//!   dressing chain, plus closed-form special cases.
//! - [`spectral`]: tridiagonal Schrödinger eigensolver, geometric-spectrum
//!   fits, grid ladder operators and algebra residuals.
//! - [`pantograph`]: proportional-delay/advance differential equations for
//!   free-particle coherent states.
//! - [`coherent`]: q-coherent states in Fock and coordinate space.
//! - [`verify`]: the acceptance-criteria runner used by the test suite and
//!   the `verify-all` CLI subcommand.

pub mod canonical;
pub mod chain;
pub mod coherent;
pub mod error;
pub mod grid;
pub mod pantograph;
pub mod qseries;
pub mod quad;
pub mod spectral;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
