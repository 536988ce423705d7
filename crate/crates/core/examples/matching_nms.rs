//! Labelling anchors against ground truth, then skew NMS over detections.

use std::f64::consts::PI;

use skewtext::matching::{assign_labels, skew_nms, MatchConfig, NmsConfig};
use skewtext::{Detection, RotatedBox};

pub fn run_example() -> skewtext::Result<()> {
    let gt = [RotatedBox::new(50.0, 50.0, 10.0, 60.0, 0.1)?];
    let anchors = [
        RotatedBox::new(50.0, 50.0, 10.0, 60.0, 0.0)?,
        RotatedBox::new(50.0, 50.0, 10.0, 60.0, PI / 3.0)?,
        RotatedBox::new(62.0, 50.0, 12.0, 60.0, 0.0)?,
        RotatedBox::new(300.0, 300.0, 10.0, 60.0, 0.0)?,
    ];
    let labels = assign_labels(&anchors, &gt, &MatchConfig::default())?;
    for (a, l) in anchors.iter().zip(&labels) {
        println!("anchor at ({:.0}, {:.0}) theta {:.2}: {:?}", a.x(), a.y(), a.theta(), l);
    }

    let dets = [
        Detection::new(RotatedBox::new(50.0, 50.0, 10.0, 60.0, 0.1)?, 0.95)?,
        Detection::new(RotatedBox::new(52.0, 51.0, 10.0, 58.0, 0.12)?, 0.90)?,
        // Same place, different orientation: survives the angle rule.
        Detection::new(RotatedBox::new(50.0, 50.0, 10.0, 60.0, 0.9)?, 0.80)?,
        Detection::new(RotatedBox::new(200.0, 80.0, 8.0, 40.0, 0.0)?, 0.60)?,
    ];
    let kept = skew_nms(&dets, &NmsConfig::default())?;
    println!("{} of {} detections kept", kept.len(), dets.len());
    for d in &kept {
        println!("  score {:.2} at ({:.0}, {:.0}) theta {:.2}", d.score, d.bbox.x(), d.bbox.y(), d.bbox.theta());
    }
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
