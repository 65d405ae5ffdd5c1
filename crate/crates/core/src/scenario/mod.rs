//! Scenario orchestration behind the command-line tool: configuration,
//! model runs, comparisons and flat-file output.

mod config;
mod output;
mod run;

pub use config::{parse_config_file, ScenarioConfig, CONFIG_KEYS};
pub use output::{
    read_csv, report_path, write_csv, write_csv_to, write_outputs, write_report, CsvTable,
};
pub use run::{compare, run_model, run_scenario, ComparisonReport, ScenarioOutput};
