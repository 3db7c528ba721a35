use ndbench_core::mining::{project_fp_rate, specificity_floor};

use super::simulate::DEFAULT_FP_RATES;
use super::{input_error, known_keys, warn_unknown};
use crate::error::CliResult;
use crate::params::Params;
use crate::run::Run;
use crate::tables::{write_projection, ProjectionRow};

pub const KEYS: &[&str] = &["k", "m", "fp_rates", "name", "out"];

/// Published benchmark designs: (name, queries `K`, pool `M`).
pub const REFERENCE_DESIGNS: &[(&str, usize, usize)] =
    &[("claims", 4_500, 80_000), ("mfnd", 5_000, 70_000), ("floor-example", 4_400, 80_000)];

/// Specificity floor of a `K × M` design, then the collection FP rate each
/// mined FP rate projects to.
pub fn projection_rows(design: &str, k: usize, m: usize, fp_rates: &[f64]) -> Vec<ProjectionRow> {
    let mut rows = vec![ProjectionRow {
        design: design.into(),
        queries: k,
        pool: m,
        quantity: "specificity_floor".into(),
        mined_fp_rate: None,
        value: specificity_floor(k, m),
    }];
    rows.extend(fp_rates.iter().map(|&r| ProjectionRow {
        design: design.into(),
        queries: k,
        pool: m,
        quantity: "projected_fp_rate".into(),
        mined_fp_rate: Some(r),
        value: project_fp_rate(r, m),
    }));
    rows
}

/// Projection table for one design (`k`, `m`) or, without them, for the
/// reference designs.
pub fn cmd_project(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let out = params.require_path("out")?;
    let rates = params.f64_list_or("fp_rates", &DEFAULT_FP_RATES[1..])?;
    let rows = match (params.contains("k"), params.contains("m")) {
        (true, true) => {
            let k: usize = params.parse_or("k", 0)?;
            let m: usize = params.parse_or("m", 0)?;
            if k == 0 || m == 0 {
                return Err(input_error("`k` and `m` must be >= 1"));
            }
            projection_rows(params.get("name").unwrap_or("design"), k, m, &rates)
        }
        (false, false) => {
            REFERENCE_DESIGNS.iter().flat_map(|&(name, k, m)| projection_rows(name, k, m, &rates)).collect()
        }
        _ => return Err(input_error("give both `k` and `m`, or neither")),
    };
    let run = {
        let mut run = Run::new("project", params);
        write_projection(&out, &rows)?;
        run.output(&out);
        run
    };
    run.finish()?;
    Ok(run)
}
