//! Random subgroups of the rationals at desk scale: profiles decoded from
//! limit-recursive bit sources, stage-wise generating sequences with their
//! word-problem enumerators, learners and adversaries for their finitely
//! generated subgroups, and elementary-equivalence invariants.

pub mod bitstream;
pub mod genseq;
pub mod harness;
pub mod learners;
pub mod qarith;
pub mod theory;
