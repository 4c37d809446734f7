//! Conic geometry in the geometric algebra of conics `Cl(5,3)` and
//! switching-path planning for pairs of planar oscillators.

pub mod clifford;
pub mod contact;
pub mod dynamics;
pub mod gac;
pub mod intersect;
pub mod planner;
