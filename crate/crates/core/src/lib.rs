pub mod families;
pub mod approx;
pub mod experiment;
pub mod funcmodel;
pub mod numerics;
pub mod spaces;
pub mod verify;
