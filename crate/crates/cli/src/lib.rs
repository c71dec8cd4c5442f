//! Declarative scenario runner for `colombeau-core`.
//!
//! A scenario is a TOML file with a domain, a battery of test functions,
//! named objects and a list of tasks. Running it yields a [`Report`] that
//! is rendered as json, csv or text. Refuted verdicts are results; only
//! engineering failures count as task errors.

pub mod error;
pub mod objects;
pub mod replay;
pub mod report;
pub mod scenario;
pub mod tasks;

use rayon::prelude::*;

pub use error::{CliError, Result};
pub use objects::World;
pub use report::{Format, Report, TaskRecord, TaskStatus, REPORT_SCHEMA};
pub use scenario::{Overrides, Scenario};

/// Scenario files shipped with the crate.
pub const BUNDLED: &[(&str, &str)] = &[
    (
        "delta_squared",
        include_str!("../scenarios/delta_squared.toml"),
    ),
    (
        "pointvalue_heaviside",
        include_str!("../scenarios/pointvalue_heaviside.toml"),
    ),
    (
        "embedding_rates",
        include_str!("../scenarios/embedding_rates.toml"),
    ),
    (
        "special_point_values",
        include_str!("../scenarios/special_point_values.toml"),
    ),
    (
        "invertibility",
        include_str!("../scenarios/invertibility.toml"),
    ),
    ("matrices", include_str!("../scenarios/matrices.toml")),
    ("constants", include_str!("../scenarios/constants.toml")),
    (
        "diffeo_invariant",
        include_str!("../scenarios/diffeo_invariant.toml"),
    ),
    ("empty", include_str!("../scenarios/empty.toml")),
];

pub fn bundled(name: &str) -> Option<Result<Scenario>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| Scenario::parse(text, &format!("bundled:{n}")))
}

/// Execute every task of a scenario, in order or in parallel.
pub fn run_scenario(s: &Scenario, parallel: bool) -> Result<Report> {
    let world = World::build(s)?;
    Ok(run_in(&world, s, parallel))
}

pub fn run_in(world: &World, s: &Scenario, parallel: bool) -> Report {
    let tasks = if parallel {
        s.tasks
            .par_iter()
            .map(|t| tasks::run_task(world, t))
            .collect()
    } else {
        s.tasks.iter().map(|t| tasks::run_task(world, t)).collect()
    };
    Report {
        schema: REPORT_SCHEMA,
        scenario: s.name.clone(),
        description: s.description.clone(),
        battery: world.battery.manifest(),
        config: world.config.clone(),
        tasks,
    }
}
