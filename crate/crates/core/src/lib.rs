//! Exact oracles and certified bounds behind the general-type inequality
//! `α₀ − α₁ − α₂ − α₃ > 0` for orthogonal modular varieties of the lattice
//! `U ⊕ U ⊕ ⟨−6⟩ ⊕ ⟨−2d⟩`.
//!
//! The crate is organised by subject:
//!
//! * [`arith`]: factorisation, Kronecker symbol, growth constants `K_{ν,ε}`, `K_{σ₀,ε}`.
//! * [`lattice`]: Gram matrices, discriminant forms, congruence counts, `g_Z`.
//! * [`bqf`]: class numbers of negative discriminants and their analytic bound.
//! * [`toric`]: the resolution of `1/6(1,1,1,2)`, Cartier data, Ehrhart counts.
//! * [`modcurve`]: congruence subgroup indices and order-3 elliptic points.
//! * [`bounds`]: the four `α` bounds and the certificate.
//! * [`cli`]: the batch front-end used by the `kgt` binary.

pub mod arith;
pub mod bounds;
pub mod bqf;
pub mod cli;
pub mod lattice;
pub mod modcurve;
pub mod rounding;
pub mod toric;

mod serde_ratio;

pub use rounding::Slack;
