//! Bicollapsibility certification, branched presentations and Dehn's
//! algorithm, with desk-scale checks of disk diagrams, walls and dual cube
//! complexes.

pub mod cli;
pub mod collapse;
pub mod complex2;
pub mod dehn;
pub mod diagram;
pub mod geometry;
pub mod smallcancel;
pub mod snf;
pub mod words;
