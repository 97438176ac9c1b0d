use std::path::Path;

use structsolve::SolverConfig;

use crate::CliError;

/// Numeric CSV: one record per line, `#` comment lines, no header.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let shown = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
        // comments are skipped here rather than by the reader so that
        // positions stay true file lines
        if record.get(0).is_some_and(|f| f.starts_with('#')) {
            continue;
        }
        let line = record.position().map_or(0, |p| p.line());
        if let Some(first) = rows.first().map(Vec::len) {
            if record.len() != first {
                return Err(CliError::Input(format!(
                    "{shown}: line {line}: expected {first} fields, found {}",
                    record.len()
                )));
            }
        }
        let row = record
            .iter()
            .map(|field| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(CliError::Input(format!("{shown}: line {line}: non-finite value {field:?}"))),
                Err(_) => Err(CliError::Input(format!("{shown}: line {line}: cannot parse {field:?} as a number"))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{shown}: no data rows")));
    }
    Ok(rows)
}

/// Single-column CSV as a vector.
pub fn read_column(path: &Path) -> Result<Vec<f64>, CliError> {
    let rows = read_rows(path)?;
    if rows[0].len() != 1 {
        return Err(CliError::Input(format!(
            "{}: expected one value per line, found {}",
            path.display(),
            rows[0].len()
        )));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

/// `key=value` lines over the defaults; blank lines and `#` comments skipped.
pub fn read_config(path: Option<&Path>) -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::default();
    let Some(path) = path else {
        return Ok(cfg);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Input(format!("{}: line {}: expected key=value", path.display(), idx + 1))
        })?;
        cfg.set(key, value)
            .map_err(|e| CliError::Input(format!("{}: line {}: {e}", path.display(), idx + 1)))?;
    }
    Ok(cfg)
}
