//! Bit-stable report serialization.
//!
//! Hand-rolled writers keep the byte stream fully deterministic: keys in
//! fixed order, floats rendered with 17 significant digits, one record per
//! line. Measured wall times are real in memory but serialize as 0 so that
//! identical (argv, seed) runs produce identical files; timings are for
//! humans and go to stderr instead.

use crate::capacity::OptimizeResult;
use crate::experiments::ExperimentReport;

/// Render a float with 17 significant digits (round-trip exact).
pub fn fmt_f64(v: f64) -> String {
    debug_assert!(v.is_finite(), "reports must not contain {v}");
    format!("{v:.16e}")
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// One report as a single-line JSON object with fixed key order.
pub fn report_json(r: &ExperimentReport) -> String {
    let mut params = String::from("{");
    for (i, (k, v)) in r.params.iter().enumerate() {
        if i > 0 {
            params.push(',');
        }
        params.push_str(&format!("\"{}\":\"{}\"", escape_json(k), escape_json(v)));
    }
    params.push('}');
    format!(
        "{{\"name\":\"{}\",\"params\":{},\"estimate\":{},\"std_error\":{},\"bound\":{},\"comparison\":\"{}\",\"pass\":{},\"seed\":[{},{}],\"wall_ms\":0}}",
        escape_json(&r.name),
        params,
        fmt_f64(r.estimate),
        fmt_f64(r.std_error),
        fmt_f64(r.bound_or_target),
        r.comparison.symbol(),
        r.pass,
        r.seed.seed,
        r.seed.stream_id,
    )
}

/// JSON array of reports, one record per line, newline-terminated.
pub fn reports_json(reports: &[ExperimentReport]) -> String {
    if reports.is_empty() {
        return "[]\n".to_string();
    }
    let mut out = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        out.push_str(&report_json(r));
        if i + 1 < reports.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str =
    "name,params,estimate,std_error,bound,comparison,pass,seed,stream_id,wall_ms";

/// CSV with the same columns as the JSON records; params flattened to
/// `k=v;k=v`.
pub fn reports_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let params = r
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},0\n",
            csv_quote(&r.name),
            csv_quote(&params),
            fmt_f64(r.estimate),
            fmt_f64(r.std_error),
            fmt_f64(r.bound_or_target),
            r.comparison.symbol(),
            r.pass,
            r.seed.seed,
            r.seed.stream_id,
        ));
    }
    out
}

/// Optimizer result with the achieving input, one line per top-level key.
pub fn optimizer_result_json(r: &OptimizeResult) -> String {
    let p = r
        .input
        .p
        .iter()
        .map(|&x| fmt_f64(x))
        .collect::<Vec<_>>()
        .join(",");
    let shields = r
        .input
        .shields
        .iter()
        .map(|s| match s {
            None => "null".to_string(),
            Some(phi) => {
                let data = phi
                    .amplitudes()
                    .iter()
                    .map(|z| format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im)))
                    .collect::<Vec<_>>()
                    .join(",");
                format!(
                    "{{\"kind\":\"pure\",\"rows\":{},\"cols\":1,\"data\":[{}]}}",
                    phi.dim(),
                    data
                )
            }
        })
        .collect::<Vec<_>>()
        .join(",");
    let iterations = r
        .iterations
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "{{\n\"value_bits\":{},\n\"kind\":\"{}\",\n\"restarts\":{},\n\"seed\":[{},{}],\n\"input\":{{\"p\":[{}],\"shields\":[{}]}},\n\"iterations\":[{}],\n\"best_restart\":{},\n\"capped_restarts\":{},\n\"provenance\":\"{}\"\n}}\n",
        fmt_f64(r.bound.value_bits),
        r.bound.kind.label(),
        r.iterations.len(),
        r.seed.seed,
        r.seed.stream_id,
        p,
        shields,
        iterations,
        r.best_restart,
        r.capped_restarts,
        escape_json(&r.bound.provenance),
    )
}
