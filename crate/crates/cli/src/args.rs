//! Value parsers for command-line flags.

use std::time::Duration;

use pcgm::{Comparison, QualityConstraint};

/// Parses `metric<threshold` (also `<=`, `>`, `>=`). Whitespace around the
/// parts is ignored.
pub fn requirement(text: &str) -> Result<QualityConstraint, String> {
    let at = text.find(['<', '>']).ok_or_else(|| {
        format!(
            "`{text}`: expected metric<threshold, metric<=threshold, metric>threshold or metric>=threshold"
        )
    })?;
    let (metric, rest) = text.split_at(at);
    let op_len = if rest[1..].starts_with('=') { 2 } else { 1 };
    let comparison = Comparison::from_symbol(&rest[..op_len]).expect("operator is one of < <= > >=");
    let metric = metric.trim();
    if metric.is_empty() {
        return Err(format!("`{text}`: missing metric name"));
    }
    let value = rest[op_len..].trim();
    let threshold: f64 = value.parse().map_err(|_| format!("`{text}`: `{value}` is not a number"))?;
    if !threshold.is_finite() {
        return Err(format!("`{text}`: threshold must be finite"));
    }
    Ok(QualityConstraint::new(metric, comparison, threshold))
}

/// Parses a duration such as `10s`, `500ms`, `0.001s`, `250us` or `2m`. A
/// bare number means seconds.
pub fn budget(text: &str) -> Result<Duration, String> {
    let text = text.trim();
    let split = text.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(text.len());
    let (number, unit) = text.split_at(split);
    let value: f64 = number.trim().parse().map_err(|_| format!("`{text}`: not a duration"))?;
    let scale = match unit {
        "" | "s" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        "m" => 60.0,
        _ => return Err(format!("`{text}`: unknown unit `{unit}` (use ns, us, ms, s or m)")),
    };
    Duration::try_from_secs_f64(value * scale).map_err(|_| format!("`{text}`: duration out of range"))
}

/// Splits `C5,C10` into labels. The empty string means no active context.
pub fn context_list(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}
