//! Lists the named fields and their parameters.

use conflux::fields::catalog::{describe, CATALOG_NAMES};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::OutDir;
use crate::{Outcome, Phase, RunError};

pub fn run(_cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome, RunError> {
    let entries: Vec<_> = CATALOG_NAMES
        .iter()
        .filter_map(|name| describe(name).map(|(text, params)| json!({"name": name, "description": text, "params": params})))
        .collect();
    for e in &entries {
        let params: Vec<&str> = e["params"].as_array().into_iter().flatten().filter_map(|p| p.as_str()).collect();
        println!("{:<24} {} [{}]", e["name"].as_str().unwrap_or_default(), e["description"].as_str().unwrap_or_default(), params.join(", "));
    }
    let summary = json!({"fields": entries});
    out.write_json("catalog.json", &summary).failure()?;
    Ok(Outcome { pass: true, summary })
}
