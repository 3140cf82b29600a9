//! Sidecar run manifests: what was run, with which flags, seed and build.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Reproducibility record written next to every output file. The data files
/// themselves stay byte-identical across re-runs; the wall-clock start time
/// lives only here.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub master_seed: u64,
    pub tool_version: String,
    pub started_at: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, master_seed: u64) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            master_seed,
            tool_version: tool_version(),
            started_at: iso8601_utc_now(),
        }
    }
}

pub fn tool_version() -> String {
    format!("percq {} ({})", env!("CARGO_PKG_VERSION"), percq_core::git_describe())
}

fn iso8601_utc_now() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    iso8601_utc(secs)
}

/// Seconds since the Unix epoch to `YYYY-MM-DDThh:mm:ssZ`.
fn iso8601_utc(epoch_secs: i64) -> String {
    let days = epoch_secs.div_euclid(86_400);
    let secs_of_day = epoch_secs.rem_euclid(86_400);
    let (year, month, day) = civil_from_days(days);
    format!(
        "{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}Z",
        secs_of_day / 3600,
        (secs_of_day / 60) % 60,
        secs_of_day % 60
    )
}

/// Days since 1970-01-01 to a (year, month, day) civil date, using the
/// 400-year era decomposition of the proleptic Gregorian calendar.
fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097) as u64;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = yoe as i64 + era * 400 + i64::from(month <= 2);
    (year, month, day)
}
