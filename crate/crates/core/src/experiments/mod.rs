//! Scenario runner, trajectory export and design reports.

pub mod config;
pub mod csv;
pub mod plot;
pub mod report;
pub mod scenario;

pub use config::parse_scenario;
pub use csv::{export_csv, parse_csv};
pub use plot::{emit_plot_data, PlotLayout};
pub use report::{design_report, run_counterexample, CounterexampleReport, DesignReport};
pub use scenario::{
    builtin, builtins, run_fig_e, run_scenario, ControllerSpec, CoupledBase, InputProfile, MetricKind, MetricsReport,
    PlantSpec, Scenario, BUILTIN_NAMES,
};
