//! Parameter grids: one `key=v1,v2,...` line per swept key.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Parameter columns of the sweep CSV, always present and in this order.
pub const TABLE_COLUMNS: [&str; 5] = ["window_len", "sigma_pi", "directions", "scales", "block_size"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<(String, Vec<String>)>,
}

impl SweepGrid {
    pub fn parse(text: &str) -> CliResult<Self> {
        let probe = RunConfig::default();
        let mut axes: Vec<(String, Vec<String>)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, values) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("grid line {}: expected key=v1,v2,...", n + 1))
            })?;
            let key = key.trim();
            if probe.get(key).is_none() && key != "keypoints_dir" {
                return Err(CliError::Config(format!("grid line {}: unknown key '{key}'", n + 1)));
            }
            if axes.iter().any(|(k, _)| k == key) {
                return Err(CliError::Config(format!("grid line {}: duplicate key '{key}'", n + 1)));
            }
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                return Err(CliError::Config(format!("grid line {}: empty value", n + 1)));
            }
            axes.push((key.to_string(), values));
        }
        Ok(Self { axes })
    }

    /// Cartesian product in grid order, first key outermost. An empty grid
    /// yields the base configuration alone.
    pub fn combinations(&self, base: &RunConfig) -> CliResult<Vec<RunConfig>> {
        let mut out = vec![base.clone()];
        for (key, values) in &self.axes {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for cfg in &out {
                for v in values {
                    let mut c = cfg.clone();
                    c.set(key, v)?;
                    next.push(c);
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// CSV columns: the table parameters, then any other swept keys, then accuracy.
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = TABLE_COLUMNS.iter().map(|s| s.to_string()).collect();
        for (k, _) in &self.axes {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
        cols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order_and_columns() {
        let g = SweepGrid::parse("window_len=7,9\nsigma_pi=1.2\ngamma=0.2,0.3\n").unwrap();
        let combos = g.combinations(&RunConfig::default()).unwrap();
        assert_eq!(combos.len(), 4);
        let pairs: Vec<_> = combos.iter().map(|c| (c.window_len, c.gamma)).collect();
        assert_eq!(pairs, vec![(7, 0.2), (7, 0.3), (9, 0.2), (9, 0.3)]);
        assert!(combos.iter().all(|c| c.sigma_pi == 1.2));
        assert_eq!(
            g.columns(),
            vec!["window_len", "sigma_pi", "directions", "scales", "block_size", "gamma"]
        );
    }

    #[test]
    fn empty_grid_is_the_base() {
        let g = SweepGrid::parse("# nothing\n").unwrap();
        assert_eq!(g.combinations(&RunConfig::default()).unwrap().len(), 1);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SweepGrid::parse("nope=1,2").is_err());
        assert!(SweepGrid::parse("scales=1,,2").is_err());
        assert!(SweepGrid::parse("scales=1\nscales=2").is_err());
        assert!(SweepGrid::parse("scales").is_err());
        let g = SweepGrid::parse("scales=x").unwrap();
        assert!(g.combinations(&RunConfig::default()).is_err());
    }
}
