//! Truthful single-item auctions on networks.

pub mod bayes;
pub mod cli;
pub mod experiments;
pub mod mechanisms;
pub mod netcore;
pub mod verify;
