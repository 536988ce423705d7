//! Joining word-level detections into text lines.

use skewtext::linking::{link_detections, link_text_segments, LinkConfig};
use skewtext::{Detection, RotatedBox};

pub fn run_example() -> skewtext::Result<()> {
    let cfg = LinkConfig::default();
    let pieces = [
        RotatedBox::new(0.0, 0.0, 10.0, 50.0, 0.0)?,
        RotatedBox::new(40.0, 0.0, 10.0, 50.0, 0.0)?,
        RotatedBox::new(90.0, 0.0, 10.0, 50.0, 0.0)?,
        RotatedBox::new(40.0, 300.0, 10.0, 50.0, 0.0)?,
    ];
    for line in link_text_segments(&pieces, &cfg)? {
        println!("line: {:?}", line.to_array());
    }

    let dets = [
        Detection::new(RotatedBox::new(0.0, 0.0, 12.0, 60.0, 0.3)?, 0.7)?,
        Detection::new(RotatedBox::new(48.0, -14.8, 12.0, 60.0, 0.3)?, 0.9)?,
    ];
    for d in link_detections(&dets, &cfg)? {
        println!("linked detection {:?} score {}", d.bbox.to_array(), d.score);
    }
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
