//! Codebook construction for omni-surface beam training.
//!
//! The coverage region is split into `P` areas: `P/2` on the reflective side
//! and their mirror images on the refractive side. Codewords are synthesized
//! by least squares over the reflective rows; mirrored coverage comes for free
//! because mirrored areas see identical channels.

mod combiner;
mod grid;
mod realize;
mod synth;
mod tree;

use omnisurf_channel::ChannelError;
use omnisurf_geometry::GeometryError;
use omnisurf_surface::SurfaceError;
use thiserror::Error;

pub use combiner::user_combiner_codebook;
pub use grid::{build_area_grid, AreaDescriptor, AreaGrid, GridSpec};
pub use realize::{beam_gain, factorize_codeword_init, realize_codeword, RealizedBeam};
pub use synth::{
    mirrored_coverage, synthesize, synthesize_codeword, Codeword, SynthesisInfo, SynthesisOptions,
};
pub use tree::{build_hierarchical_codebook, layer_coverage, CodebookRow, HierarchicalCodebook};

pub type Coverage = std::collections::BTreeSet<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodebookError {
    #[error("area count {0} must be a power of two and at least 2")]
    NotPowerOfTwo(usize),
    #[error("area count {areas} exceeds the number of surface elements {elements}")]
    TooManyAreas { areas: usize, elements: usize },
    #[error("{cells} reflective areas cannot be split evenly over {rings} rings")]
    UnevenRings { cells: usize, rings: usize },
    #[error("ring distance must be positive and finite (got {0})")]
    BadRing(f64),
    #[error("area {index} is not on the reflective side")]
    NotReflective { index: usize },
    #[error("coverage is empty")]
    EmptyCoverage,
    #[error("coverage index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("Gram matrix is singular (condition estimate {cond:e}) and regularization is disabled")]
    SingularGram { cond: f64 },
    #[error("linear solve failed")]
    SolveFailed,
    #[error("codeword length {got} does not match channel rows {want}")]
    Dimension { got: usize, want: usize },
    #[error("entry {0} of H_BI v is zero; phase alignment undefined")]
    ZeroIllumination(usize),
    #[error("combiner codebook needs at least one antenna and one beam")]
    EmptyCombiner,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}
