pub mod bochner;
pub mod cover;
pub mod density;
pub mod periods;
pub mod uc;
pub mod verdict;
