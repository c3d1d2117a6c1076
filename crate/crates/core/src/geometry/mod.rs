//! Frames, metrics, dislocation densities and charts of the material
//! manifold.

pub mod burgers;
pub mod chart;
pub mod frame;
pub mod metric;

pub use burgers::{burgers_circuit, density_flux, BurgersVector};
pub use chart::{heisenberg_frame_in_chart, heisenberg_normal_chart, Chart, ChartSample};
pub use frame::{
    affine_frame, dislocation_density, heisenberg_frame, Abelian, AffineGroup, DislocationDensity,
    FrameField, HeisenbergGroup, MaterialFrame, StructureConstants,
};
pub use metric::{hyperbolic_metric, EuclideanMetric, HeisenbergMetric, HyperbolicMetric, MetricField};
