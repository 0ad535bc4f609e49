use clap::Args;
use deeppoly::conformal::{convergence_study, critical_crossing, critical_level, cubic_map_poles, MapSpec, PoleReport};
use deeppoly::Target;
use serde::{Deserialize, Serialize};

use super::common::{rule, QuadArgs};
use crate::error::CliResult;
use crate::output::{num, Outcome, Table};
use crate::record::RunRecord;

#[derive(Debug, Clone, Args)]
pub struct ConformalArgs {
    /// Runge parameter of `1 / (1 + a x²)`.
    #[arg(long, default_value_t = 25.0)]
    pub a: f64,
    /// Interpolation degrees.
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20,25,30,35,40")]
    pub ns: Vec<usize>,
    /// Bisection tolerance for the imaginary-axis crossing.
    #[arg(long, default_value_t = 1e-13)]
    pub crossing_tol: f64,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalConfig {
    pub a: f64,
    pub ns: Vec<usize>,
    pub crossing_tol: f64,
    pub quadrature: usize,
}

impl ConformalArgs {
    pub fn config(&self) -> ConformalConfig {
        ConformalConfig { a: self.a, ns: self.ns.clone(), crossing_tol: self.crossing_tol, quadrature: self.quad.quad }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapErrors {
    pub l2_error: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEntry {
    pub n: usize,
    pub cubic: MapErrors,
    pub cosine: MapErrors,
    pub identity: MapErrors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalOutput {
    /// Equispaced potential at `s = 1`.
    pub critical_level: f64,
    /// Imaginary-axis point on the critical level curve.
    pub crossing: f64,
    pub poles: PoleReport,
    pub pole_magnitudes: Vec<f64>,
    pub study: Vec<StudyEntry>,
}

pub fn run(cfg: &ConformalConfig) -> CliResult<Outcome> {
    let rule = rule(cfg.quadrature)?;
    let target = Target::runge(cfg.a);
    let crossing = critical_crossing(0.1, 1.0, cfg.crossing_tol)?;
    let poles = cubic_map_poles(cfg.a)?;

    let study_for = |map| convergence_study(&target, map, &cfg.ns, &rule);
    let (cubic, cosine, identity) = (study_for(MapSpec::Cubic)?, study_for(MapSpec::Cosine)?, study_for(MapSpec::Identity)?);
    let errors = |r: &deeppoly::conformal::StudyRow| MapErrors { l2_error: r.l2_error, sup_error: r.sup_error };

    let mut csv = Table::new(
        "convergence",
        &["n", "l2_error_cubic", "l2_error_cos", "l2_error_identity", "sup_error_cubic", "sup_error_cos", "sup_error_identity"],
    );
    let mut study = Vec::with_capacity(cfg.ns.len());
    for ((c, s), i) in cubic.iter().zip(&cosine).zip(&identity) {
        csv.push(vec![
            c.n.to_string(),
            num(c.l2_error),
            num(s.l2_error),
            num(i.l2_error),
            num(c.sup_error),
            num(s.sup_error),
            num(i.sup_error),
        ]);
        study.push(StudyEntry { n: c.n, cubic: errors(c), cosine: errors(s), identity: errors(i) });
    }

    let mut pole_csv = Table::new("poles", &["re", "im", "modulus", "residual", "in_runge_region"]);
    for ((z, res), inside) in poles.roots.iter().zip(&poles.residuals).zip(&poles.in_runge_region) {
        pole_csv.push(vec![num(z.re), num(z.im), num(z.norm()), num(*res), inside.to_string()]);
    }

    let out = ConformalOutput {
        critical_level: critical_level(),
        crossing,
        pole_magnitudes: poles.roots.iter().map(|z| z.norm()).collect(),
        poles,
        study,
    };
    Ok(Outcome { record: RunRecord::new("conformal", cfg, &out)?, tables: vec![csv, pole_csv] })
}
