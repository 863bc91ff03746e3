// SPDX-License-Identifier: Apache-2.0

pub mod cqed;
pub mod eur;
pub mod junction;
pub mod pulse;
pub mod traj;

use crate::error::CliError;
use serde::de::DeserializeOwned;
use std::fs;
use std::path::Path;

/// Reads a JSON config, or the defaults when no path is given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// Copies every flag that was given onto the config field of the same name.
macro_rules! apply_flags {
    ($cfg:expr, $args:expr; $($field:ident),* $(,)?) => {
        $(if let Some(v) = $args.$field.clone() {
            $cfg.$field = v;
        })*
    };
}
pub(crate) use apply_flags;

/// `n` evenly spaced points over [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
