// SPDX-License-Identifier: Apache-2.0

use super::{apply_flags, load};
use crate::error::CliError;
use crate::output::Artifact;
use crate::{Common, Ctx};
use clap::Args;
use qlab_core::pulse::{compile_rabi, RabiConfig};
use std::path::PathBuf;

fn power_of_two(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n.is_power_of_two() {
        Ok(n)
    } else {
        Err(format!("{n} is not a power of 2"))
    }
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    /// JSON Rabi sequence config.
    config: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_parser = power_of_two)]
    points: Option<usize>,
    #[arg(long)]
    ssm_freq: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn compile(args: &CompileArgs, ctx: &mut Ctx) -> Result<Artifact, CliError> {
    let mut cfg: RabiConfig = load(args.config.as_deref())?;
    apply_flags!(cfg, args; steps, points, ssm_freq);
    cfg.validate().map_err(CliError::config)?;
    if ctx.dry_run {
        return Ok(Artifact::DryRun);
    }
    let (cl, warnings) = compile_rabi(&cfg).map_err(CliError::runtime)?;
    ctx.warnings.extend(warnings);
    Ok(Artifact::Sequence(cl))
}
