//! Rotated RoI max pooling.
//!
//! A proposal is cut into `pooled_h x pooled_w` subregions that share its
//! orientation. Each subregion's top-left corner is rotated about the
//! proposal center, projected onto the feature map by the spatial scale, and
//! a lattice of points stepping along the rotated axes is sampled with
//! round-half-up. Each output cell is the maximum over its samples.
//!
//! Two implementations share this contract: [`rroi_pool`] hoists the geometry
//! out of the channel loop, [`rroi_pool_oracle`] recomputes everything per
//! channel and per sample. Both evaluate the same floating-point expressions
//! and agree bit for bit.

use ndarray::{Array3, Array4, ArrayView3, Axis};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::RotatedBox;

/// Dense `C x H x W` feature map plus its resolution relative to the image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    values: Array3<f64>,
    spatial_scale: f64,
}

impl FeatureMap {
    pub fn new(values: Array3<f64>, spatial_scale: f64) -> Result<Self> {
        let (c, h, w) = values.dim();
        if c == 0 || h == 0 || w == 0 {
            return Err(invalid(format!("feature map must be non-empty, got {c}x{h}x{w}")));
        }
        if !(spatial_scale.is_finite() && spatial_scale > 0.0) {
            return Err(invalid(format!("spatial scale must be positive, got {spatial_scale}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("feature map values must be finite"));
        }
        let values = values.as_standard_layout().into_owned();
        Ok(Self {
            values,
            spatial_scale,
        })
    }

    pub fn channels(&self) -> usize {
        self.values.dim().0
    }

    pub fn height(&self) -> usize {
        self.values.dim().1
    }

    pub fn width(&self) -> usize {
        self.values.dim().2
    }

    pub fn spatial_scale(&self) -> f64 {
        self.spatial_scale
    }

    pub fn values(&self) -> ArrayView3<'_, f64> {
        self.values.view()
    }

    /// Mutable access for building test fixtures; values must stay finite.
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(invalid("feature map values must be finite"));
        }
        self.values[[c, y, x]] = v;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolConfig {
    pub pooled_h: usize,
    pub pooled_w: usize,
}

impl PoolConfig {
    pub fn new(pooled_h: usize, pooled_w: usize) -> Result<Self> {
        if pooled_h == 0 || pooled_w == 0 {
            return Err(invalid(format!(
                "pooled size must be at least 1x1, got {pooled_h}x{pooled_w}"
            )));
        }
        Ok(Self { pooled_h, pooled_w })
    }
}

/// Number of lattice steps along one subregion axis: `floor(grid * ss - 1) + 1`,
/// with a single sample when the subregion is smaller than one feature cell.
#[inline]
fn sample_count(grid: f64, ss: f64) -> usize {
    let last = (grid * ss - 1.0).floor();
    if last < 0.0 {
        1
    } else {
        last as usize + 1
    }
}

#[inline]
fn clamp_index(v: f64, len: usize) -> usize {
    if v <= 0.0 {
        0
    } else {
        (v as usize).min(len - 1)
    }
}

fn check(cfg: &PoolConfig) -> Result<()> {
    PoolConfig::new(cfg.pooled_h, cfg.pooled_w).map(|_| ())
}

/// Pools `proposal` (image coordinates) into a `pooled_h x pooled_w x C`
/// array.
///
/// Sample positions outside the map are clamped to its border, and
/// subregions too small to hold a sample are read once at their rotated
/// corner.
pub fn rroi_pool(fm: &FeatureMap, proposal: &RotatedBox, cfg: &PoolConfig) -> Result<Array3<f64>> {
    check(cfg)?;
    let (channels, fh, fw) = fm.values.dim();
    let plane = fh * fw;
    let data = fm.values.as_slice().expect("standard layout");
    let ss = fm.spatial_scale;

    let (x, y, h, w, theta) = (proposal.x(), proposal.y(), proposal.h(), proposal.w(), proposal.theta());
    let grid_w = w / cfg.pooled_w as f64;
    let grid_h = h / cfg.pooled_h as f64;
    let (sin_t, cos_t) = (theta.sin(), theta.cos());
    let n_k = sample_count(grid_h, ss);
    let n_l = sample_count(grid_w, ss);

    let mut out = Array3::from_elem((cfg.pooled_h, cfg.pooled_w, channels), f64::NEG_INFINITY);
    let mut offsets: Vec<usize> = Vec::with_capacity(n_k * n_l);
    let mut best = vec![f64::NEG_INFINITY; channels];

    for i in 0..cfg.pooled_h {
        for j in 0..cfg.pooled_w {
            let left = x - w / 2.0 + j as f64 * grid_w;
            let top = y - h / 2.0 + i as f64 * grid_h;
            let l_rot = (left - x) * cos_t + (top - y) * sin_t + x;
            let t_rot = (top - y) * cos_t - (left - x) * sin_t + y;

            offsets.clear();
            for k in 0..n_k {
                let kf = k as f64;
                for l in 0..n_l {
                    let lf = l as f64;
                    let px = (l_rot * ss + lf * cos_t + kf * sin_t + 0.5).floor();
                    let py = (t_rot * ss - lf * sin_t + kf * cos_t + 0.5).floor();
                    offsets.push(clamp_index(py, fh) * fw + clamp_index(px, fw));
                }
            }

            best.fill(f64::NEG_INFINITY);
            for (c, slot) in best.iter_mut().enumerate() {
                let chan = &data[c * plane..(c + 1) * plane];
                for &o in &offsets {
                    let v = chan[o];
                    if v > *slot {
                        *slot = v;
                    }
                }
            }
            for (c, v) in best.iter().enumerate() {
                out[[i, j, c]] = *v;
            }
        }
    }
    Ok(out)
}

/// Reference version of [`rroi_pool`]: one straight pass per channel and
/// output cell, with no hoisting.
pub fn rroi_pool_oracle(fm: &FeatureMap, proposal: &RotatedBox, cfg: &PoolConfig) -> Result<Array3<f64>> {
    check(cfg)?;
    let (channels, fh, fw) = fm.values.dim();
    let ss = fm.spatial_scale;
    let (x, y, h, w, theta) = (proposal.x(), proposal.y(), proposal.h(), proposal.w(), proposal.theta());
    let mut out = Array3::zeros((cfg.pooled_h, cfg.pooled_w, channels));

    for c in 0..channels {
        let grid_w = w / cfg.pooled_w as f64;
        let grid_h = h / cfg.pooled_h as f64;
        for i in 0..cfg.pooled_h {
            for j in 0..cfg.pooled_w {
                let left = x - w / 2.0 + j as f64 * grid_w;
                let top = y - h / 2.0 + i as f64 * grid_h;
                let l_rot = (left - x) * theta.cos() + (top - y) * theta.sin() + x;
                let t_rot = (top - y) * theta.cos() - (left - x) * theta.sin() + y;
                let mut value = f64::NEG_INFINITY;
                let k_last = ((grid_h * ss - 1.0).floor()).max(0.0) as usize;
                let l_last = ((grid_w * ss - 1.0).floor()).max(0.0) as usize;
                for k in 0..=k_last {
                    for l in 0..=l_last {
                        let px = (l_rot * ss + l as f64 * theta.cos() + k as f64 * theta.sin() + 0.5).floor();
                        let py = (t_rot * ss - l as f64 * theta.sin() + k as f64 * theta.cos() + 0.5).floor();
                        let px = px.max(0.0).min((fw - 1) as f64) as usize;
                        let py = py.max(0.0).min((fh - 1) as f64) as usize;
                        let v = fm.values[[c, py, px]];
                        if v > value {
                            value = v;
                        }
                    }
                }
                out[[i, j, c]] = value;
            }
        }
    }
    Ok(out)
}

/// Pools every proposal, returning `N x C x pooled_h x pooled_w` in input
/// order. Proposals are processed in parallel.
pub fn rroi_pool_batch(fm: &FeatureMap, proposals: &[RotatedBox], cfg: &PoolConfig) -> Result<Array4<f64>> {
    check(cfg)?;
    let pooled: Vec<Array3<f64>> = proposals
        .par_iter()
        .map(|p| rroi_pool(fm, p, cfg))
        .collect::<Result<_>>()?;
    let mut out = Array4::zeros((proposals.len(), fm.channels(), cfg.pooled_h, cfg.pooled_w));
    for (mut dst, src) in out.axis_iter_mut(Axis(0)).zip(pooled) {
        dst.assign(&src.permuted_axes([2, 0, 1]));
    }
    Ok(out)
}
