pub mod branch_size;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod linalg;
pub mod sampling;
pub mod speed_limits;
pub mod superposition;
pub mod tolerance;
pub mod verify;
