//! `readout`: blob fit, assignment matrix and error breakdown of IQ shots.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use purcell_core::readout::{analyze_with, scatter_svg, BlobFit, IQShotSet, DEFAULT_CORE_RADIUS};

use crate::config::{merge, read_input, required, write_output, write_resolved};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BlobMethod {
    /// Moments of each cluster core, corrected for the truncation
    Core,
    /// Plain sample moments of every shot
    Moments,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutArgs {
    /// Shots as `label,i,q` CSV with labels g|e|f (or 0|1|2)
    #[arg(long)]
    pub shots: Option<PathBuf>,
    /// JSON report path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an IQ scatter plot here
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub blob_fit: Option<BlobMethod>,
    /// Core radius in Mahalanobis units for --blob-fit core
    #[arg(long)]
    pub core_radius: Option<f64>,
    /// Shots per label drawn in the scatter plot
    #[arg(long)]
    pub max_points: Option<usize>,
}

impl ReadoutArgs {
    fn resolve(mut self) -> Self {
        self.out.get_or_insert_with(|| PathBuf::from("readout.json"));
        self.blob_fit.get_or_insert(BlobMethod::Core);
        self.core_radius.get_or_insert(DEFAULT_CORE_RADIUS);
        self.max_points.get_or_insert(2000);
        self
    }
}

pub fn run_readout(flags: &ReadoutArgs, config: Option<&Path>) -> CliResult<()> {
    let a = merge("readout", flags, config)?.resolve();
    let out = a.out.clone().expect("resolved");
    write_resolved("readout", &a, &out)?;

    let path = required(a.shots.clone(), "shots")?;
    let shots = IQShotSet::from_csv(&read_input(&path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let method = match a.blob_fit.expect("resolved") {
        BlobMethod::Core => BlobFit::Core { radius: a.core_radius.expect("resolved") },
        BlobMethod::Moments => BlobFit::Moments,
    };
    let report = analyze_with(&shots, method)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(&out, &text)?;
    if let Some(svg) = &a.svg {
        write_output(svg, &scatter_svg(&shots, &report.blobs, a.max_points.expect("resolved")))?;
    }
    let b = &report.breakdown;
    for (k, l) in b.labels.iter().enumerate() {
        println!(
            "{l}: epsilon = {:.5}, separation = {:.5}, state = {:.5}",
            b.epsilon[k], b.epsilon_s[k], b.epsilon_t[k]
        );
    }
    Ok(())
}
