pub mod error;
pub mod int;
pub mod padic;
pub mod structure;
pub mod witt;
pub mod windows;
pub mod tower;
pub mod ramification;
pub mod normfield;
pub mod suite;

pub use error::{Error, Result};
pub use int::{Int, Rat, RatPair};
pub use padic::{make_ring, LocalRing, RingDoc, RingElt, Valuation};
