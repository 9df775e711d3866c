//! `fdpu simulate`: the simulation table.
//!
//! The config is a table config (see [`TableConfig`]); without a config
//! file, or when `models` is absent, all six models are run.

use super::{apply_engine_flags, engine_value, to_value, Execution};
use crate::config::RawConfig;
use crate::error::CliResult;
use crate::SimulateArgs;
use fdpu_core::sim::{table_run, write_csv, ModelKind, TableConfig};

pub fn load(args: &SimulateArgs) -> CliResult<TableConfig> {
    let mut raw = RawConfig::load(args.common.config.as_deref())?;
    if !raw.contains("models") {
        raw.set("models", to_value(&ModelKind::ALL)?);
    }
    apply_engine_flags(&mut raw, &args.engine)?;
    if let Some(e) = args.engine.engine {
        raw.set("engines", vec![engine_value(e.into())?]);
    }
    raw.set_opt("k_deflate", args.factors_removed);
    raw.set_opt("seed", args.common.seed);
    let cfg: TableConfig = raw.parse()?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &SimulateArgs) -> CliResult<Execution> {
    let cfg = load(args)?;
    let artifact = table_run(&cfg)?;
    for row in &artifact.rows {
        if let Some(e) = &row.error {
            eprintln!("fdpu: warning: {} p1={} t={}: {e}", row.model, row.p1, row.t);
        }
    }
    let mut csv = Vec::new();
    write_csv(&artifact.rows, &mut csv)?;
    Ok(Execution {
        command: "simulate",
        config: to_value(&cfg)?,
        seed: cfg.seed,
        inputs: Vec::new(),
        files: vec![
            ("table.csv".into(), csv),
            ("table.json".into(), super::pretty(&artifact.rows)?),
            ("sigmas.json".into(), super::pretty(&artifact.sigmas)?),
        ],
    })
}
