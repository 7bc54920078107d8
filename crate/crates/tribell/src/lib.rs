//! Command-line front end for the three-qubit Mermin and Svetlichny bounds.

pub mod app;
pub mod error;
pub mod evaluate;
pub mod output;
pub mod parse;
pub mod scan;
pub mod verify;
