//! CSV persistence for occupancy matrices.
//!
//! ```text
//! # kind=FR gamma=0.95 states=104 actions=none
//! 1,0.95,0.9025,...
//! ```
//!
//! One line per row (`states` rows, or `states * actions` rows ordered by
//! state then action), `states` comma-separated values per line. Values are
//! written in Rust's shortest round-trip form, so a save/load cycle is
//! lossless.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::{OccupancyMatrix, RepKind};

impl OccupancyMatrix {
    pub fn to_csv(&self) -> String {
        let actions = self
            .num_actions()
            .map_or_else(|| "none".to_string(), |m| m.to_string());
        let mut out = format!(
            "# kind={} gamma={} states={} actions={}\n",
            self.kind.as_str(),
            self.gamma,
            self.num_states(),
            actions
        );
        let values = self.values();
        for r in 0..values.nrows() {
            for c in 0..values.ncols() {
                if c > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", values[(r, c)]);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .and_then(|h| h.strip_prefix('#'))
            .ok_or_else(|| Error::Parse("missing `#` header line".into()))?;

        let (mut kind, mut gamma, mut states, mut actions) = (None, None, None, None);
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
            let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("header {key}: {e}"));
            match key {
                "kind" => kind = Some(value.parse::<RepKind>()?),
                "gamma" => gamma = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
                "states" => states = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
                "actions" => {
                    actions = Some(match value {
                        "none" => None,
                        v => Some(v.parse::<usize>().map_err(|e| bad(&e))?),
                    })
                }
                _ => return Err(Error::Parse(format!("unknown header field `{key}`"))),
            }
        }
        let missing = |what: &str| Error::Parse(format!("header is missing `{what}`"));
        let kind = kind.ok_or_else(|| missing("kind"))?;
        let gamma = gamma.ok_or_else(|| missing("gamma"))?;
        let states = states.ok_or_else(|| missing("states"))?;
        let actions = actions.ok_or_else(|| missing("actions"))?;

        let rows = states * actions.unwrap_or(1);
        let mut data = Vec::with_capacity(rows * states);
        let mut count = 0;
        for line in lines {
            let before = data.len();
            for v in line.split(',') {
                data.push(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("row {count}: {e}")))?,
                );
            }
            if data.len() - before != states {
                return Err(Error::Parse(format!(
                    "row {count} has {} values, expected {states}",
                    data.len() - before
                )));
            }
            count += 1;
        }
        if count != rows {
            return Err(Error::Parse(format!("{count} rows, expected {rows}")));
        }
        OccupancyMatrix::from_values(kind, gamma, actions, DMatrix::from_row_slice(rows, states, &data))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}
