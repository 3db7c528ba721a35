use serde::Serialize;

use super::{input_error, known_keys, load_index, load_matrix, warn_unknown};
use crate::binary::write_bytes;
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::run::Run;

pub const KEYS: &[&str] = &["db", "queries", "k", "range", "cap", "out"];

#[derive(Serialize)]
struct Hit<'a> {
    query_id: &'a str,
    rank: usize,
    db_id: &'a str,
    distance: f32,
}

/// Exact search of every row of a query matrix against a database matrix:
/// `k` nearest neighbors, or all neighbors closer than `range` (optionally
/// capped). Output: CSV `query_id,rank,db_id,distance`.
pub fn cmd_index(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let db_path = params.require_path("db")?;
    let q_path = params.require_path("queries")?;
    let out = params.require_path("out")?;
    let mut run = Run::new("index", params);
    let db = load_index(&mut run, &db_path)?;
    let queries = load_matrix(&mut run, &q_path)?;
    let refs: Vec<&[f32]> = (0..queries.len()).map(|i| queries.row(i)).collect();

    let hits = match params.get("range") {
        Some(_) => {
            let t: f32 = params.parse_or("range", 0.0)?;
            let cap = params.caps_or("cap", &[None])?;
            if cap.len() != 1 {
                return Err(input_error("`cap` takes a single value here"));
            }
            db.range_batch(&refs, t, cap[0], None)?
        }
        None => db.knn_batch(&refs, params.parse_or("k", 10usize)?, None)?,
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    for (qi, list) in hits.iter().enumerate() {
        for (rank, h) in list.iter().enumerate() {
            w.serialize(Hit { query_id: &queries.ids[qi], rank: rank + 1, db_id: db.id(h.row), distance: h.distance })
                .map_err(|e| CliError::format(&out, e.to_string()))?;
        }
    }
    if hits.iter().all(Vec::is_empty) {
        w.write_record(["query_id", "rank", "db_id", "distance"]).map_err(|e| CliError::format(&out, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::format(&out, e.to_string()))?;
    write_bytes(&out, &bytes)?;
    run.output(&out);
    run.finish()?;
    Ok(run)
}
