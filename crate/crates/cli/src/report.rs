//! Plot-ready output: one CSV row per policy × threshold, plus a JSON
//! document embedding the full reports and the resolved configuration.

use seqlab_core::MetricsReport;

pub const CSV_HEADER: &str =
    "policy,s,alpha,mean_time,fdp,power,n_disc,m_tau,mean_samples_rej,mean_samples_disc";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn metrics_csv(rows: &[MetricsReport]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.policy,
            r.s,
            r.alpha,
            opt(r.mean_time_to_discovery),
            opt(r.fdp),
            opt(r.power),
            r.n_discoveries,
            r.n_experiments_started,
            opt(r.mean_samples_rejected),
            opt(r.mean_samples_discovered),
        ));
    }
    out
}

pub fn metrics_document(
    config: &serde_json::Value,
    rows: &[MetricsReport],
) -> serde_json::Value {
    serde_json::json!({
        "config": config,
        "results": rows,
    })
}
