//! Numerical laboratory for comparing how forward-KL (supervised) and
//! reverse-KL (on-policy RL) optimization forget prior knowledge.
//!
//! The crate has three layers:
//!
//! * [`mixture`] — univariate Gaussian mixtures, sampling, and grid
//!   functionals (overlap area, total variation, KL, entropy).
//! * [`dynamics`] — sample-based gradient estimators for the two KL
//!   directions and the continuous simulation protocols built on them.
//! * [`lab`] — a finite prompt/response world with a shared-parameter
//!   softmax policy and six training procedures (SFT variants, REINFORCE,
//!   GRPO), evaluated exactly by enumeration.

pub mod dynamics;
pub mod lab;
pub mod mixture;
