//! Route configuration, chain construction and plan reports.

mod config;
mod report;

pub use config::{
    assessment_specs, build_chain, load_route, load_route_with, parse_route, FiberTable,
    ParamOverrides, RouteConfig, Site, SiteKind, FIBER_TABLE_SCHEMA_VERSION, ROUTE_SCHEMA_VERSION,
};
pub use report::{
    config_hash, run_plan, simulate_route, span_table, CrossCheck, EndToEndRow, Provenance,
    QkdRow, Report, RunOptions, SpanRow, VerdictRow, ViolationRow, REPORT_SCHEMA,
    REPORT_SCHEMA_VERSION,
};
