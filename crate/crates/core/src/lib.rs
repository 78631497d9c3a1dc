//! Level sets, expected sets and expected boundaries of random closed sets
//! on rectangular grids, with simultaneous confidence regions.
//!
//! Sets are represented by their oriented distance functions (ODFs): the
//! distance to the set outside it and minus the distance to its boundary
//! inside. Averaging ODFs gives a mean field whose zero sublevel set and
//! zero level set estimate the expected set and the expected boundary.
//! Sup-quantiles of the fluctuation of the mean, from a bootstrap or from a
//! known Gaussian limit, turn these plug-in estimates into regions that
//! contain the target with a prescribed probability.
//!
//! | module | purpose |
//! |---|---|
//! | [`grid`] | grid domains, masks, fields; PGM and CSV I/O |
//! | [`distance`] | exact distance transform, ODF, Hausdorff distance |
//! | [`levelset`] | sublevel sets, bands, boundaries, closure diagnostics |
//! | [`models`] | built-in random set models and sampling |
//! | [`meanset`] | sample stacks, mean ODFs, expected sets |
//! | [`confidence`] | bootstrap and Gaussian sup-quantiles, confidence regions, coverage |
//! | [`regress`] | covariate domains of normal linear models |
//! | [`cli`] | the `odfset` command-line front end |

pub mod cli;
pub mod confidence;
pub mod distance;
pub mod error;
pub mod grid;
pub mod levelset;
pub mod meanset;
pub mod models;
mod quad;
pub mod regress;
pub mod rng;

pub use error::{Error, Result};
