use clap::Args;
use deeppoly::newton_compose::{abs_approx, abs_iterate_expanded, convergence_trace, log_linear_fit, ERROR_FLOOR};
use deeppoly::polynomial::DEFAULT_DEGREE_CAP;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{curve_grid, num, Outcome, Table};
use crate::record::RunRecord;

/// Largest `k` whose expansion is audited (degree 242).
const MAX_EXPANDED_K: usize = 5;

#[derive(Debug, Clone, Args)]
pub struct AbsApproxArgs {
    /// Iterations traced.
    #[arg(long, default_value_t = 12)]
    pub k_max: usize,
    /// Iterates sampled on the curve grid.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub k: Vec<usize>,
    /// Trace points `x = i / points` for `i = 1..=points`.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Point of the log-linear fit of `E_k` against `k`.
    #[arg(long, default_value_t = 0.3)]
    pub fit_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsApproxConfig {
    pub k_max: usize,
    pub curve_ks: Vec<usize>,
    pub points: usize,
    pub fit_x: f64,
}

impl AbsApproxArgs {
    pub fn config(&self) -> AbsApproxConfig {
        AbsApproxConfig { k_max: self.k_max, curve_ks: self.k.clone(), points: self.points, fit_x: self.fit_x }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub k: usize,
    /// Degree of the expanded `f_k`.
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub x: f64,
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsApproxOutput {
    pub degrees: Vec<DegreeRow>,
    /// Largest `E_{k+1} / E_k` over trace rows with `r_k ≥ 1/2`.
    pub max_ratio_upper_half: Option<f64>,
    pub ratio_bound: f64,
    pub error_floor: f64,
    pub log_fit: Option<LogFit>,
    /// Sup error against `|x|` on the curve grid, per curve iterate.
    pub sup_errors: Vec<(usize, f64)>,
}

pub fn run(cfg: &AbsApproxConfig) -> CliResult<Outcome> {
    if cfg.points == 0 {
        return Err(CliError::Config("--points must be positive".into()));
    }
    let xs: Vec<f64> = (1..=cfg.points).map(|i| i as f64 / cfg.points as f64).collect();
    let rows = convergence_trace(cfg.k_max, &xs)?;

    let mut trace = Table::new("trace", &["k", "x", "error", "ratio", "r"]);
    for r in &rows {
        trace.push(vec![r.k.to_string(), num(r.x), num(r.error), r.ratio.map(num).unwrap_or_default(), num(r.r)]);
    }
    let max_ratio = rows.iter().filter(|r| r.r >= 0.5).filter_map(|r| r.ratio).reduce(f64::max);

    let degrees = (0..=cfg.k_max.min(MAX_EXPANDED_K))
        .map(|k| Ok(DegreeRow { k, degree: abs_iterate_expanded(k, DEFAULT_DEGREE_CAP)?.degree() }))
        .collect::<CliResult<Vec<_>>>()?;

    let log_fit = if cfg.fit_x != 0.0 {
        let fit_rows = convergence_trace(cfg.k_max, &[cfg.fit_x])?;
        log_linear_fit(&fit_rows).map(|(slope, r_squared)| LogFit { x: cfg.fit_x, slope, r_squared })
    } else {
        None
    };

    let mut header = vec!["x".to_string(), "abs".to_string()];
    header.extend(cfg.curve_ks.iter().map(|k| format!("k{k}")));
    let mut curve = Table::with_header("curve", header);
    let mut sup = vec![0.0f64; cfg.curve_ks.len()];
    for x in curve_grid() {
        let mut row = vec![x, x.abs()];
        for (j, &k) in cfg.curve_ks.iter().enumerate() {
            let v = abs_approx(k, x);
            sup[j] = sup[j].max((v - x.abs()).abs());
            row.push(v);
        }
        curve.push_floats(&row);
    }

    let out = AbsApproxOutput {
        degrees,
        max_ratio_upper_half: max_ratio,
        ratio_bound: 0.625,
        error_floor: ERROR_FLOOR,
        log_fit,
        sup_errors: cfg.curve_ks.iter().copied().zip(sup).collect(),
    };
    Ok(Outcome { record: RunRecord::new("absapprox", cfg, &out)?, tables: vec![trace, curve] })
}
