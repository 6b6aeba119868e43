//! Piecewise proposals: construction, evaluation, sampling and refinement.

mod construct;
mod line;
mod piece;
mod proposal;
mod support;

pub use construct::{Construction, Procedure, StepBound};
pub use line::Line;
pub use piece::{piece_area, trapezoid_pick, Piece, PieceForm};
pub use proposal::PiecewiseProposal;
pub use support::{duplicate_tolerance, SupportSet};
