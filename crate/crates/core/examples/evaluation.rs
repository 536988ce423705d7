//! Precision, recall and F-measure over a small in-memory corpus.

use skewtext::dataset::{parse_detections, parse_gt, GtFormat};
use skewtext::eval::{evaluate, evaluate_corpus};

const GT_A: &str = "0 0 10 10 100 30 0\n1 0 10 100 100 30 0\n";
const DET_A: &str = "60 25 100 30 0 0.95\n";
const GT_B: &str = "0 0 20 20 100 30 0\n1 1 300 300 80 25 0\n";
const DET_B: &str = "70 35 100 30 0 0.9\n340 312.5 80 25 0 0.6\n600 600 40 10 0 0.3\n";

pub fn run_example() -> skewtext::Result<()> {
    let images = vec![
        (parse_detections(DET_A)?, parse_gt(GtFormat::Msra, GT_A)?),
        (parse_detections(DET_B)?, parse_gt(GtFormat::Msra, GT_B)?),
    ];

    let second = evaluate(&images[1].0, &images[1].1, 0.5)?;
    println!("image B matches {:?}, don't-care detections {:?}", second.matches, second.dont_care);

    let (total, per_image) = evaluate_corpus(&images, 0.5)?;
    for (name, r) in ["A", "B"].iter().zip(&per_image) {
        println!("{name}: P={:.4} R={:.4} F={:.4}", r.precision, r.recall, r.f_measure);
    }
    println!("all: P={:.4} R={:.4} F={:.4} ({:?})", total.precision, total.recall, total.f_measure, total.counts);
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
