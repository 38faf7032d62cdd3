//! Compilation of abstract circuits onto a chip's coupling graph and native
//! gate set.

mod chip;
mod decompose;
mod layout;
mod optimize;
mod pipeline;
mod route;
mod translate;
mod verify;

pub use chip::{ChipModel, UNREACHABLE};
pub use decompose::decompose;
pub use layout::{choose_layout, layout_score, Layout, LayoutStrategy};
pub use optimize::optimize;
pub use pipeline::{transpile_pipeline, PassStats, TranspileOptions, TranspileReport, Transpiled};
pub use route::{route, Routed};
pub use translate::{translate, wrap_angle, BasisSet};
pub use verify::{equivalence_distance, measurements_mapped, respects_connectivity};
