use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::local::LocalQuadrature;
use crate::error::{Error, Result};
use crate::field::{apply_field, PolyField};
use crate::geometry::loglog_slope;
use crate::lie::{Frame, GroupElement, LieAlgebra};
use crate::rng::{split, stream_rng, streams};

const BOOTSTRAP_ROUNDS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    /// Slope over the resolved radii; `None` with fewer than two.
    pub alpha_hat: Option<f64>,
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    pub resolved: Vec<bool>,
    pub resolution_limited: bool,
    pub pairs: usize,
    /// 2.5% and 97.5% quantiles of the pair-bootstrap slopes.
    pub bootstrap_interval: Option<(f64, f64)>,
}

/// Slope of `log osc_{B_r} ∇_H u` against `log r`, where the oscillation is
/// the largest `|∇_H u(x) − ∇_H u(y)|` over `pairs` random pairs in each ball.
#[allow(clippy::too_many_arguments)]
pub fn holder_exponent_estimate(
    u: &PolyField,
    frame: &Frame,
    algebra: &LieAlgebra,
    center: &GroupElement,
    radii: &[f64],
    pairs: usize,
    seed: u64,
) -> Result<HolderReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("need at least two descending radii".into()));
    }
    if pairs < 50 {
        return Err(Error::Insufficient(format!("{pairs} pairs per radius; need at least 50")));
    }
    let grad: Vec<PolyField> = frame.horizontal().iter().map(|x| apply_field(x, u)).collect::<Result<_>>()?;
    // diffs[r][i] = |∇_H u(x_i) − ∇_H u(y_i)|
    let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(radii.len());
    let mut scale = 0.0f64;
    for (ri, &r) in radii.iter().enumerate() {
        let q = LocalQuadrature::new(frame, algebra, center, r, 2 * pairs, split(seed, streams::LOCAL_BALL, ri as u64))?;
        let g: Vec<Vec<f64>> = q
            .points()
            .par_iter()
            .map(|p| grad.iter().map(|f| f.evaluate_values(&p.values)).collect())
            .collect();
        scale = g.iter().flatten().fold(scale, |a, b| a.max(b.abs()));
        diffs.push(
            (0..pairs)
                .map(|i| g[2 * i].iter().zip(&g[2 * i + 1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .collect(),
        );
    }
    let floor = 1e-10 * scale.max(1.0);
    let oscillations: Vec<f64> = diffs.iter().map(|d| d.iter().cloned().fold(0.0, f64::max)).collect();
    let resolved: Vec<bool> = oscillations.iter().map(|&o| o > floor).collect();
    let slope_of = |osc: &[f64]| -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) =
            radii.iter().zip(osc).zip(&resolved).filter(|(_, &ok)| ok).map(|((r, o), _)| (*r, *o)).unzip();
        (x.len() >= 2).then(|| loglog_slope(&x, &y))
    };
    let alpha_hat = slope_of(&oscillations);
    let bootstrap_interval = alpha_hat.map(|_| {
        let mut slopes: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
            .into_par_iter()
            .filter_map(|b| {
                let mut rng = stream_rng(seed, streams::BOOTSTRAP, b as u64);
                let osc: Vec<f64> = diffs
                    .iter()
                    .map(|d| (0..pairs).map(|_| d[rng.random_range(0..pairs)]).fold(0.0, f64::max))
                    .collect();
                slope_of(&osc)
            })
            .collect();
        slopes.sort_by(f64::total_cmp);
        let at = |f: f64| slopes[((slopes.len() - 1) as f64 * f).round() as usize];
        (at(0.025), at(0.975))
    });
    Ok(HolderReport {
        alpha_hat,
        radii: radii.to_vec(),
        oscillations,
        resolution_limited: resolved.iter().any(|ok| !ok),
        resolved,
        pairs,
        bootstrap_interval,
    })
}
