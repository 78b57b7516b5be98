use std::path::Path;

use graphmetric::Error;

pub type Pairs = Vec<(Vec<f64>, Vec<f64>)>;

/// Comma-separated rows of coordinates. Blank lines and `#` comments are
/// skipped; rows `2k` and `2k + 1` form the `k`-th pair.
pub fn parse_pairs(text: &str) -> Result<Pairs, Error> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    if rows.len() % 2 != 0 {
        return Err(Error::Parse(format!("{} point rows cannot be paired", rows.len())));
    }
    let mut it = rows.into_iter();
    let mut pairs = Vec::new();
    while let (Some(x), Some(y)) = (it.next(), it.next()) {
        pairs.push((x, y));
    }
    Ok(pairs)
}

pub fn read_pairs(path: &Path) -> Result<Pairs, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&text)
}
