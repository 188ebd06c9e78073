//! Classical temporal filters as purification baselines.
//!
//! Filters smooth each dimension along the time axis within every episode;
//! episode boundaries are never mixed, and edges use reflect padding (the
//! sequence `[a, b, c]` padded by one becomes `[a, a, b, c, c]`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::types::DemoSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FilterKind {
    Mean { window: usize },
    Median { window: usize },
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterTarget {
    ActionsOnly,
    StatesAndActions,
}

impl FilterKind {
    /// Half-width of the smoothing window. Gaussian kernels truncate at
    /// three standard deviations.
    fn radius(&self) -> Result<usize> {
        match *self {
            FilterKind::Mean { window } | FilterKind::Median { window } => {
                if window == 0 || window % 2 == 0 {
                    return Err(Error::rejected(format!(
                        "window must be odd and >= 1, got {window}"
                    )));
                }
                Ok(window / 2)
            }
            FilterKind::Gaussian { sigma } => {
                if sigma <= 0.0 || !sigma.is_finite() {
                    return Err(Error::rejected(format!("sigma must be > 0, got {sigma}")));
                }
                Ok((3.0 * sigma).ceil() as usize)
            }
        }
    }
}

/// Smooths a demo set. Cardinality, dims, and episode structure are
/// untouched; only the filtered components change.
pub fn filter_denoise(demos: &DemoSet, kind: FilterKind, target: FilterTarget) -> Result<DemoSet> {
    let radius = kind.radius()?;
    let window = 2 * radius + 1;
    let mut out = demos.clone();
    out.source_label = format!("{}-filtered", demos.source_label);
    for range in demos.episodes() {
        let len = range.len();
        if window > len {
            return Err(Error::rejected(format!(
                "filter window {window} exceeds episode {} length {len}",
                demos.transitions[range.start].episode_id
            )));
        }
        let dims: Vec<(bool, usize)> = match target {
            FilterTarget::ActionsOnly => (0..demos.action_dim).map(|d| (false, d)).collect(),
            FilterTarget::StatesAndActions => (0..demos.state_dim)
                .map(|d| (true, d))
                .chain((0..demos.action_dim).map(|d| (false, d)))
                .collect(),
        };
        for (is_state, d) in dims {
            let series: Vec<f64> = demos.transitions[range.clone()]
                .iter()
                .map(|t| if is_state { t.state[d] } else { t.action[d] })
                .collect();
            let smoothed = smooth(&series, kind, radius);
            for (k, v) in smoothed.into_iter().enumerate() {
                let t = &mut out.transitions[range.start + k];
                if is_state {
                    t.state[d] = v;
                } else {
                    t.action[d] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Reflect index including the edge sample: -1 maps to 0, len maps to
/// len - 1.
fn mirror(pos: isize, len: usize) -> usize {
    let n = len as isize;
    let p = if pos < 0 { -pos - 1 } else { pos };
    let p = if p >= n { 2 * n - 1 - p } else { p };
    p as usize
}

fn smooth(series: &[f64], kind: FilterKind, radius: usize) -> Vec<f64> {
    let len = series.len();
    let r = radius as isize;
    match kind {
        FilterKind::Mean { .. } => (0..len as isize)
            .map(|i| {
                let mut acc = 0.0;
                for j in -r..=r {
                    acc += series[mirror(i + j, len)];
                }
                acc / (2 * r + 1) as f64
            })
            .collect(),
        FilterKind::Median { .. } => (0..len as isize)
            .map(|i| {
                let mut vals: Vec<f64> = (-r..=r).map(|j| series[mirror(i + j, len)]).collect();
                vals.sort_by(f64::total_cmp);
                vals[vals.len() / 2]
            })
            .collect(),
        FilterKind::Gaussian { sigma } => {
            let weights: Vec<f64> = (-r..=r)
                .map(|j| (-(j as f64).powi(2) / (2.0 * sigma * sigma)).exp())
                .collect();
            let norm: f64 = weights.iter().sum();
            (0..len as isize)
                .map(|i| {
                    let mut acc = 0.0;
                    for (w, j) in weights.iter().zip(-r..=r) {
                        acc += w * series[mirror(i + j, len)];
                    }
                    acc / norm
                })
                .collect()
        }
    }
}
