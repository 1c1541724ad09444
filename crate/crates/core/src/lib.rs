//! Explicit period-2 periodic solution of the distributed-delay logistic
//! equation `x′(t) = r·x(t)(1 − ∫₀¹ x(t − s) ds)` and its independent
//! numerical verification.
//!
//! * [`elliptic`]: complete elliptic integrals, Jacobi `sn, cn, dn`,
//!   the bifurcation function `L(k)` and its inverse.
//! * [`closedform`]: the analytic orbit for `r > π²/2`.
//! * [`ddesim`]: fixed-step integrators for the delay system, its ODE
//!   reductions and the SIRS model with temporary immunity.
//! * [`spectrum`]: roots of the characteristic equation of the equilibrium.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod ddesim;
pub mod elliptic;
pub mod export;
pub mod spectrum;
