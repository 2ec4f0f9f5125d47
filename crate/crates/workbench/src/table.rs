//! Plain-text rendering of per-path simulation results.

use qkdvm_core::sim::PathResult;

const HEADER: [&str; 11] = [
    "path", "medium", "protocol", "sent", "detected", "sifted", "errors", "qber", "secret",
    "fidelity", "feasible",
];

fn row(r: &PathResult) -> [String; 11] {
    let res = &r.result;
    [
        r.path.clone(),
        r.medium.as_str().to_string(),
        res.protocol.as_str().to_string(),
        res.sent.to_string(),
        res.detected.to_string(),
        res.sifted.to_string(),
        res.errors_in_sifted.to_string(),
        format!("{:.4}", res.qber),
        format!("{:.4}", res.secret_fraction),
        res.end_fidelity
            .map_or_else(|| "-".to_string(), |f| format!("{f:.4}")),
        if r.feasible { "yes" } else { "no" }.to_string(),
    ]
}

/// Left-aligned text columns, right-aligned numbers, two spaces apart.
pub fn render(results: &[PathResult]) -> String {
    let rows: Vec<[String; 11]> = results.iter().map(row).collect();
    let mut width = HEADER.map(str::len);
    for r in &rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let mut l = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                l.push_str("  ");
            }
            if i < 3 || i == 10 {
                l.push_str(&format!("{cell:<w$}", w = width[i]));
            } else {
                l.push_str(&format!("{cell:>w$}", w = width[i]));
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(&HEADER);
    for r in &rows {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        line(&cells);
    }
    out
}
