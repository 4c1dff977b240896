//! JSON, CSV and plain-text views of a report.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::Value;

use crate::report::AnalysisReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Six significant digits, switching to exponent form outside `[1e-4, 1e10)`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let e = if x == 0.0 { 0 } else { x.abs().log10().floor() as i32 };
    if (-4..=9).contains(&e) {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn render_report(report: &AnalysisReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
        Format::Text => render_text(report),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (_, Some(i)) => i.to_string(),
            _ => sig6(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        _ => unreachable!("containers are flattened"),
    }
}

fn flatten(v: &Value, path: &str, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if path.is_empty() {
            k.to_string()
        } else {
            format!("{path}/{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(x, &join(k), out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(x, &join(&i.to_string()), out)),
        _ => out.push((path.to_string(), scalar(v))),
    }
}

/// A series becomes a plain `t,count` table that `parse_count_csv` reads
/// back. Anything else is flattened to `section,key,value` rows.
fn render_csv(report: &AnalysisReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if !report.series.is_empty() {
        w.write_record(["t", "count"]).expect("in-memory write");
        for (t, x) in report.series.iter().enumerate() {
            w.write_record([(t + 1).to_string(), x.to_string()])
                .expect("in-memory write");
        }
    } else {
        let value = serde_json::to_value(report).expect("reports serialize");
        let mut rows = Vec::new();
        flatten(&value, "", &mut rows);
        w.write_record(["section", "key", "value"]).expect("in-memory write");
        for (path, v) in rows {
            let (section, key) = path.split_once('/').unwrap_or((path.as_str(), ""));
            w.write_record([section, key, v.as_str()]).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{c:<w$}");
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    let rules: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out += &line(rules.iter().map(String::as_str).collect());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), sig6)
}

fn render_text(report: &AnalysisReport) -> String {
    let mut out = format!("command: {}\n", report.command);
    let cfg = serde_json::to_value(&report.config).expect("config serializes");
    if let Value::Object(map) = cfg {
        let parts: Vec<String> = map
            .iter()
            .map(|(k, v)| match v {
                Value::Array(xs) => format!("{k}={}", xs.iter().map(scalar).collect::<Vec<_>>().join(",")),
                _ => format!("{k}={}", scalar(v)),
            })
            .collect();
        if !parts.is_empty() {
            let _ = writeln!(out, "config: {}", parts.join(" "));
        }
    }

    if !report.series.is_empty() {
        out += "\n";
        let rows: Vec<Vec<String>> = report
            .series
            .iter()
            .enumerate()
            .map(|(t, x)| vec![(t + 1).to_string(), x.to_string()])
            .collect();
        out += &table(&["t", "count"], &rows);
    }

    if !report.fit.is_empty() {
        out += "\n";
        out += &fit_table(report);
        for f in &report.fit {
            for w in &f.warnings {
                let _ = writeln!(out, "warning ({} {}): {w}", f.model, f.method);
            }
        }
    }

    if !report.diagnostics.is_empty() {
        out += "\n";
        out += &diagnostics_text(report);
    }

    if !report.forecasts.is_empty() {
        out += "\n";
        let rows: Vec<Vec<String>> = report
            .forecasts
            .iter()
            .map(|f| {
                vec![
                    f.h.to_string(),
                    f.x_last.to_string(),
                    format!("{} ({:?})", f.point, f.rule).to_lowercase(),
                    format!("[{}, {}]", f.interval.0, f.interval.1),
                    sig6(f.level),
                    sig6(f.pmf.get(f.point as usize).copied().unwrap_or(0.0)),
                ]
            })
            .collect();
        out += &table(&["h", "Last", "Forecast", "Interval", "Level", "P(forecast)"], &rows);
    }

    if !report.backtests.is_empty() {
        out += "\n";
        let rows: Vec<Vec<String>> = report
            .backtests
            .iter()
            .map(|b| {
                let (model, method) = b
                    .fit
                    .as_ref()
                    .map_or(("-".into(), "-".into()), |f| (f.model.to_string(), f.method.to_string()));
                vec![
                    model,
                    method,
                    b.steps.len().to_string(),
                    sig6(b.pmad),
                    format!("{}%", sig6(b.ptp)),
                ]
            })
            .collect();
        out += &table(&["Model", "Method", "Forecasts", "PMAD", "PTP"], &rows);
    }

    if !report.mcstudy.is_empty() {
        out += "\n";
        let rows: Vec<Vec<String>> = report
            .mcstudy
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.method.to_string(),
                    format!("{} ({})", sig6(r.mean_mu), sig6(r.rel_rmse_mu)),
                    format!("{} ({})", sig6(r.mean_alpha), sig6(r.rel_rmse_alpha)),
                    r.replicates.to_string(),
                    r.failures.to_string(),
                    r.excluded.to_string(),
                ]
            })
            .collect();
        out += &table(
            &["n", "Method", "mu (rel. RMSE)", "alpha (rel. RMSE)", "Used", "Failed", "Excluded"],
            &rows,
        );
    }
    out
}

fn fit_table(report: &AnalysisReport) -> String {
    let scores = |f: &geoinar::FitResult| {
        report.backtests.iter().find(|b| {
            b.fit
                .as_ref()
                .is_some_and(|g| g.model == f.model && g.method == f.method)
        })
    };
    let with_scores = report.fit.iter().any(|f| scores(f).is_some());
    let mut rows = Vec::new();
    for f in &report.fit {
        let ci = |c: Option<geoinar::estimation::Interval>| {
            c.map_or_else(|| "-".to_string(), |c| format!("({}, {})", sig6(c.lower), sig6(c.upper)))
        };
        let bt = scores(f);
        let mut first = vec![
            f.model.to_string(),
            f.method.to_string(),
            "mu".to_string(),
            sig6(f.mu_hat),
            opt(f.se_mu),
            ci(f.ci_mu),
            opt(f.aic),
        ];
        let mut second = vec![
            String::new(),
            String::new(),
            "alpha".to_string(),
            sig6(f.alpha_hat),
            opt(f.se_alpha),
            ci(f.ci_alpha),
            String::new(),
        ];
        if with_scores {
            first.push(bt.map_or("-".into(), |b| sig6(b.pmad)));
            first.push(bt.map_or("-".into(), |b| format!("{}%", sig6(b.ptp))));
            second.extend([String::new(), String::new()]);
        }
        rows.push(first);
        rows.push(second);
    }
    let mut headers = vec!["Model", "Method", "Parameter", "Estimate", "Stand. Error", "CI", "AIC"];
    if with_scores {
        headers.extend(["PMAD", "PTP"]);
    }
    let level = report.fit[0].level;
    format!("{}CI level: {}\n", table(&headers, &rows), sig6(level))
}

fn diagnostics_text(report: &AnalysisReport) -> String {
    let diags = &report.diagnostics;
    let first = &diags[0].report;
    let d = &first.dispersion;
    let mut out = format!(
        "Dispersion test: I_d = {}, statistic = {}, p-value = {} (alpha = {})\n\n",
        sig6(d.index),
        sig6(d.statistic),
        sig6(d.p_value),
        sig6(d.alpha)
    );

    let names: Vec<String> = diags
        .iter()
        .map(|m| format!("{} ({})", m.fit.model, m.fit.method))
        .collect();
    let mut headers = vec!["Quantity", "Empirical"];
    headers.extend(names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = first
        .moment_table
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = vec![row.quantity.clone(), sig6(row.empirical)];
            r.extend(diags.iter().map(|m| opt(m.report.moment_table.get(i).and_then(|x| x.theoretical))));
            r
        })
        .collect();
    out += &table(&headers, &rows);

    for (name, m) in names.iter().zip(diags) {
        let r = &m.report;
        let list = |xs: &[f64]| xs.iter().map(|&x| sig6(x)).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "\n{name}");
        let _ = writeln!(out, "  PIT bins: {}", list(&r.pit_bins));
        let _ = writeln!(out, "  Pearson residual variance: {}", sig6(r.residual_stats.pearson_variance));
        let _ = writeln!(out, "  residual ACF (lags 1..): {}", list(&r.residual_stats.residual_acf));
        let _ = writeln!(out, "  Ljung-Box p-values (lags 1..): {}", list(&r.residual_stats.ljung_box_pvalues));
        let j = &r.jump_chart;
        let _ = writeln!(
            out,
            "  jumps: sigma_J = {}, limits = [{}, {}], within = {}",
            sig6(j.sigma_j),
            sig6(j.lower_limit),
            sig6(j.upper_limit),
            sig6(j.fraction_within)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::RunConfig;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1.42391234), "1.42391");
        assert_eq!(sig6(266.1), "266.100");
        assert_eq!(sig6(0.0335), "0.0335000");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(-2.5), "-2.50000");
        assert_eq!(sig6(1.11e-16), "1.11000e-16");
    }

    #[test]
    fn csv_series_is_readable_back() {
        let mut r = AnalysisReport::new("simulate", RunConfig::default());
        r.series = vec![3, 0, 7];
        let csv = render_report(&r, Format::Csv);
        assert_eq!(csv, "t,count\n1,3\n2,0\n3,7\n");
        let back = crate::input::parse_count_csv(csv.as_bytes()).unwrap();
        assert_eq!(back.values(), &[3, 0, 7]);
    }

    #[test]
    fn csv_flattens_sections() {
        let cfg = RunConfig {
            mu: Some(5.0),
            seed: Some(7),
            ..RunConfig::default()
        };
        let r = AnalysisReport::new("mc", cfg);
        let csv = render_report(&r, Format::Csv);
        assert!(csv.contains("config,mu,5.00000\n"));
        assert!(csv.contains("config,seed,7\n"));
        assert!(csv.starts_with("section,key,value\n"));
        assert!(csv.contains("\nschema_version,,1\n"));
    }

    #[test]
    fn text_table_aligns_columns() {
        let t = table(&["a", "bb"], &[vec!["xxx".into(), "y".into()]]);
        assert_eq!(t, "a    bb\n---  --\nxxx  y\n");
    }
}
