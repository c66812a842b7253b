//! CSV output. Every file starts with `#` metadata lines that record the
//! fully resolved inputs, followed by a header row. Indices are 1-based.

use std::fmt::Write;

use crate::bitchannel::BitChannelEstimate;
use crate::secrecy::BoundResult;

pub type Metadata = Vec<(String, String)>;

fn write_metadata(out: &mut String, metadata: &Metadata) {
    for (k, v) in metadata {
        // keep each entry on one line
        let v = v.replace('\n', " ");
        writeln!(out, "# {k}: {v}").unwrap();
    }
}

pub const BITCHANNEL_HEADER: &str = "index,erasure_prob,std_err,tvd";

/// Bit-channel table. With `sorted`, rows are ordered by ascending TVD
/// (ties by index) instead of by index.
pub fn bitchannel_csv(estimates: &[BitChannelEstimate], metadata: &Metadata, sorted: bool) -> String {
    let mut rows: Vec<&BitChannelEstimate> = estimates.iter().collect();
    if sorted {
        rows.sort_by(|a, b| a.tvd.total_cmp(&b.tvd).then(a.index.cmp(&b.index)));
    } else {
        rows.sort_by_key(|e| e.index);
    }
    let mut out = String::new();
    write_metadata(&mut out, metadata);
    writeln!(out, "{BITCHANNEL_HEADER}").unwrap();
    for e in rows {
        writeln!(out, "{},{},{},{}", e.index + 1, e.erasure_prob, e.std_err, e.tvd).unwrap();
    }
    out
}

pub const BOUND_HEADER: &str = "n,p,delta,rate_converse,rate_achiev_rc,rate_second_order,rate_code,k_converse,k_achiev_rc,k_code,leakage_bound,code";

/// Bound table. `clamp_second_order` floors negative normal-approximation
/// rates at zero, for plotting.
pub fn bound_csv(rows: &[BoundResult], metadata: &Metadata, clamp_second_order: bool) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let mut out = String::new();
    write_metadata(&mut out, metadata);
    writeln!(out, "{BOUND_HEADER}").unwrap();
    for r in rows {
        let second = if clamp_second_order {
            r.rate_second_order.max(0.0)
        } else {
            r.rate_second_order
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.p,
            r.delta,
            r.rate_converse(),
            r.rate_achiev_rc(),
            second,
            opt(r.rate_code().map(|v| v.to_string())),
            r.k_converse,
            r.k_achiev_rc,
            opt(r.k_code.map(|v| v.to_string())),
            opt(r.leakage_bound.map(|v| v.to_string())),
            opt(r.code.clone()),
        )
        .unwrap();
    }
    out
}

/// Splits a report into its metadata entries and body lines.
pub fn split_report(text: &str) -> (Metadata, Vec<&str>) {
    let mut meta = Vec::new();
    let mut body = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(": ") {
                meta.push((k.to_string(), v.to_string()));
            }
        } else {
            body.push(line);
        }
    }
    (meta, body)
}
