//! Reading annotations, rotating them with the image, enlarging them and
//! thinning out unreadable instances.

use std::f64::consts::FRAC_PI_2;

use skewtext::dataset::{enlarge_context, filter_unreadable, parse_gt, serialize_gt, to_horizontal, GtFormat};
use skewtext::{rotate_ground_truth, ImageSize};

const ICDAR15: &str = "\
10,20,110,20,110,60,10,60,HELLO
0,0,40,30,28,46,-12,16,word
200,200,260,200,260,220,200,220,###
300,40,340,40,340,52,300,52,###
";

pub fn run_example() -> skewtext::Result<()> {
    let gts = parse_gt(GtFormat::Icdar15, ICDAR15)?;
    for g in &gts {
        println!("{:?} readable={} {:?}", g.bbox.to_array(), g.readable, g.transcription);
    }

    let img = ImageSize::new(400, 300)?;
    let mut rotated = gts.clone();
    for g in &mut rotated {
        g.bbox = enlarge_context(&rotate_ground_truth(&g.bbox, FRAC_PI_2, img)?, 1.4)?;
    }
    print!("rotated and enlarged, as MSRA-TD500:\n{}", serialize_gt(GtFormat::Msra, &rotated));
    print!("as ICDAR2013 rectangles:\n{}", serialize_gt(GtFormat::Icdar13, &rotated));
    println!("horizontal fit of the tilted word: {:?}", to_horizontal(&gts[1].bbox).to_array());

    let thinned = filter_unreadable(&gts, 0.5, 42)?;
    println!("{} -> {} instances after dropping half the unreadable ones", gts.len(), thinned.len());
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
