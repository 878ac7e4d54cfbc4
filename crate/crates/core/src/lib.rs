pub mod control;
pub mod dynamics;
pub mod identification;
pub mod kinematics;
pub mod sim;
pub mod spatial;
pub mod trajectory;
