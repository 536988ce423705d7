//! Rotated RoI max pooling of a single proposal and of a batch.

use std::f64::consts::FRAC_PI_6;

use ndarray::Array3;
use skewtext::pooling::{rroi_pool, rroi_pool_batch, FeatureMap, PoolConfig};
use skewtext::RotatedBox;

pub fn run_example() -> skewtext::Result<()> {
    // Two channels over a 32x32 map at 1/4 of the image resolution.
    let values = Array3::from_shape_fn((2, 32, 32), |(c, y, x)| if c == 0 { (x + y) as f64 } else { (x * y % 7) as f64 });
    let fm = FeatureMap::new(values, 0.25)?;
    let cfg = PoolConfig::new(2, 4)?;

    let upright = RotatedBox::new(64.0, 64.0, 24.0, 64.0, 0.0)?;
    let tilted = RotatedBox::new(64.0, 64.0, 24.0, 64.0, FRAC_PI_6)?;
    let out = rroi_pool(&fm, &tilted, &cfg)?;
    println!("pooled shape (rows, cols, channels) = {:?}", out.dim());
    println!("channel 0:\n{}", out.index_axis(ndarray::Axis(2), 0));

    let batch = rroi_pool_batch(&fm, &[upright, tilted], &cfg)?;
    println!("batch shape (proposals, channels, rows, cols) = {:?}", batch.dim());
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
