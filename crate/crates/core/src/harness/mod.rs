//! Sweeps, error metrics, datasets and output formats.

pub mod config;
pub mod dataset;
pub mod delta;
pub mod export;
pub mod grid;
pub mod sweep;

pub use config::{GridConfig, McConfig, Method, Model, RunConfig, SourceChoice};
pub use dataset::{fetch_dataset, load_dataset, load_graph_file, DatasetEntry, DatasetManifest, FetchOptions};
pub use delta::{batch_benchmark, benchmark_graph, delta_error, ErrorReport, ErrorRow};
pub use export::Format;
pub use grid::SweepGrid;
pub use sweep::{sweep, Series, SweepPoint, SweepResult};
