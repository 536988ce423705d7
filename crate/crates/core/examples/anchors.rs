//! Rotation anchors over a feature map and border filtering.

use skewtext::anchors::{filter_border, generate_anchors, AnchorSpec};
use skewtext::ImageSize;

pub fn run_example() -> skewtext::Result<()> {
    let spec = AnchorSpec::default();
    println!(
        "{} scales x {} ratios x {} orientations = {} anchors per location",
        spec.scales.len(),
        spec.aspect_ratios.len(),
        spec.orientations.len(),
        spec.anchors_per_location()
    );

    // A 600x800 image seen through a stride-16 feature map.
    let grid = generate_anchors(&spec, 50, 38)?;
    println!("{}x{} map -> {} anchors", grid.feat_width, grid.feat_height, grid.len());

    let img = ImageSize::new(800, 600)?;
    for padding in [0.0, 0.25, 1.0] {
        let kept = filter_border(&grid, img, padding);
        println!("padding {padding}: {} anchors inside the border", kept.len());
    }

    for theta in [-0.7, 0.1, 1.5, 2.3] {
        let i = spec.fit_domain(theta);
        println!("theta {theta:+.2} falls in the domain of orientation {:+.4}", spec.orientations[i]);
    }
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
