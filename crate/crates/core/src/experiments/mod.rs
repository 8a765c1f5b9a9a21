//! Scenario generators, the multi-maze policy suite, the speedup benchmark
//! and the SVG/CSV exporters.

mod bench;
mod generators;
mod render;
mod suite;

pub use bench::{
    benchmark_from_oracle, benchmark_speedup, oracle_table, target_threshold, BenchConfig, BenchError, MazeSpeedup,
    Method, RunRecord, SpeedupReport, PUBLISHED_MEAN_SPEEDUP, PUBLISHED_PEAK_SPEEDUP,
};
pub use generators::{generate_maze, GenerateError, MazeKind, MazeSpec};
pub use render::{
    export_heatmap, export_path_overlay, export_spider, heatmap_svg, parse_path_csv, path_csv, path_overlay_svg,
    ramp_color, spider_svg, ExportError, CELL_PX, WALL_COLOR,
};
pub use suite::{
    run_policy_suite, spider_experiment, suite_mazes, GammaRegime, SpiderConfig, SpiderRow, SpiderRun, SpiderTable,
    SuiteError, DEFAULT_GAMMAS, POLICY_COUNT,
};
