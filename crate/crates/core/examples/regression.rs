//! Encoding a ground truth against an anchor, decoding it back, and the loss.

use skewtext::regression::{
    decode, encode, multitask_loss, ClassLabel, ClassScore, LossConfig, RegressionTarget,
};
use skewtext::RotatedBox;

pub fn run_example() -> skewtext::Result<()> {
    let anchor = RotatedBox::new(100.0, 80.0, 16.0, 128.0, 0.0)?;
    let gt = RotatedBox::new(108.0, 76.0, 20.0, 150.0, 0.2)?;

    let target = encode(&gt, &anchor)?;
    println!("target offsets: {:?}", target.to_array());
    let back = decode(&anchor, &target)?;
    println!("decoded: {:?}", back.to_array());

    // A prediction that is slightly off in every component.
    let pred = RegressionTarget {
        x: target.x + 0.1,
        y: target.y - 0.2,
        h: target.h,
        w: target.w + 0.05,
        theta: target.theta - 0.1,
    };
    let p = ClassScore::text(0.8)?;
    let cfg = LossConfig::default();
    println!("text sample loss: {:.4}", multitask_loss(&p, ClassLabel::Text, &target, &pred, &cfg)?);
    println!("background sample loss: {:.4}", multitask_loss(&p, ClassLabel::Background, &target, &pred, &cfg)?);
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
