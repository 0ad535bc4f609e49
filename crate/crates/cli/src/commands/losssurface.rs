use clap::Args;
use deeppoly::landscape::{loss_surface, CoupledModel};
use deeppoly::Target;
use serde::{Deserialize, Serialize};

use super::common::{rule, QuadArgs};
use crate::error::CliResult;
use crate::output::{Outcome, Table};
use crate::record::RunRecord;

#[derive(Debug, Clone, Args)]
pub struct LossSurfaceArgs {
    #[arg(long, default_value = "bessel:n=40,c=30,s=1")]
    pub target: Target,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    pub a_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub a_max: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub b_min: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub b_max: f64,
    /// Grid points along `a₁`.
    #[arg(long, default_value_t = 161)]
    pub n_a: usize,
    /// Grid points along `b₁`.
    #[arg(long, default_value_t = 161)]
    pub n_b: usize,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSurfaceConfig {
    pub target: Target,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub n_a: usize,
    pub n_b: usize,
    pub quadrature: usize,
}

impl LossSurfaceArgs {
    pub fn config(&self) -> LossSurfaceConfig {
        LossSurfaceConfig {
            target: self.target.clone(),
            a_range: (self.a_min, self.a_max),
            b_range: (self.b_min, self.b_max),
            n_a: self.n_a,
            n_b: self.n_b,
            quadrature: self.quad.quad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMin {
    pub a1: f64,
    pub b1: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSurfaceOutput {
    pub argmin: GridMin,
    pub max_loss: f64,
    /// Spread of the loss along the grid row closest to `b₁ = 0`.
    pub flattest_row: (f64, f64),
}

pub fn run(cfg: &LossSurfaceConfig) -> CliResult<Outcome> {
    let model = CoupledModel::new(&cfg.target, &rule(cfg.quadrature)?)?;
    let grid = loss_surface(&model, cfg.a_range, cfg.b_range, cfg.n_a, cfg.n_b)?;
    let (a1, b1, loss) = grid.argmin();

    let mut csv = Table::new("surface", &["a1", "b1", "loss"]);
    let mut max_loss = f64::NEG_INFINITY;
    for (i, row) in grid.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            max_loss = max_loss.max(v);
            csv.push_floats(&[grid.a1[j], grid.b1[i], v]);
        }
    }
    let near_zero = (0..grid.b1.len()).min_by(|&i, &j| grid.b1[i].abs().total_cmp(&grid.b1[j].abs())).unwrap_or(0);
    let row = &grid.values[near_zero];
    let spread = row.iter().copied().fold(f64::NEG_INFINITY, f64::max) - row.iter().copied().fold(f64::INFINITY, f64::min);

    let out = LossSurfaceOutput { argmin: GridMin { a1, b1, loss }, max_loss, flattest_row: (grid.b1[near_zero], spread) };
    Ok(Outcome { record: RunRecord::new("losssurface", cfg, &out)?, tables: vec![csv] })
}
