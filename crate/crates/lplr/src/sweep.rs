//! Error-versus-rank sweeps. Each `(p, method)` pair is factorised once on the
//! rayon pool and then truncated at every requested rank.

use std::time::Instant;

use lplr_core::{lp_low_rank, LowRankConfig, Method};
use rayon::prelude::*;

use crate::report::{evaluate, EvalReport, ReportError};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub ranks: Vec<usize>,
    pub ps: Vec<f64>,
    pub methods: Vec<Method>,
    pub config: LowRankConfig,
    pub seed: u64,
}

fn job(
    a: &lplr_core::DenseMatrix,
    p: f64,
    method: Method,
    plan: &SweepPlan,
) -> Result<Vec<EvalReport>, ReportError> {
    let start = Instant::now();
    let base = lp_low_rank(a, plan.ranks[0], p, method, &plan.config)?;
    let factor_ms = start.elapsed().as_secs_f64() * 1e3;
    plan.ranks
        .iter()
        .map(|&k| {
            let t = Instant::now();
            let approx = base.with_rank(k)?;
            let mut r = evaluate(a, &approx, p)?;
            r.wall_time_ms = factor_ms + t.elapsed().as_secs_f64() * 1e3;
            r.seed = plan.seed;
            Ok(r)
        })
        .collect()
}

/// Reports ordered by `(k, p, method)` regardless of scheduling.
pub fn sweep(a: &lplr_core::DenseMatrix, plan: &SweepPlan) -> Result<Vec<EvalReport>, ReportError> {
    if plan.ranks.is_empty() {
        return Ok(Vec::new());
    }
    let jobs: Vec<(f64, Method)> = plan
        .ps
        .iter()
        .flat_map(|&p| plan.methods.iter().map(move |&m| (p, m)))
        .collect();
    let results: Vec<Vec<EvalReport>> = jobs
        .par_iter()
        .map(|&(p, m)| job(a, p, m, plan))
        .collect::<Result<_, _>>()?;
    let mut all: Vec<EvalReport> = results.into_iter().flatten().collect();
    all.sort_by(|x, y| {
        x.k.cmp(&y.k)
            .then(x.p.total_cmp(&y.p))
            .then(x.method.cmp(&y.method))
    });
    Ok(all)
}
