//! Overlap between rotated boxes, singly and as a matrix over `N x 5` arrays.
//!
//! Run with `cargo run --example skew_iou`.

use std::f64::consts::PI;

use ndarray::array;
use skewtext::geometry::{boxes_from_array, boxes_to_array, intersection_polygon, polygon_area};
use skewtext::{skew_iou, skew_iou_matrix, RotatedBox};

pub fn run_example() -> skewtext::Result<()> {
    // Two 8:1 text boxes sharing a center, 15 degrees apart.
    let a = RotatedBox::new(100.0, 100.0, 8.0, 64.0, 0.0)?;
    let b = RotatedBox::new(100.0, 100.0, 8.0, 64.0, PI / 12.0)?;
    let poly = intersection_polygon(&a, &b);
    println!("intersection has {} vertices, area {:.3}", poly.len(), polygon_area(&poly));
    println!("skew IoU = {:.4}", skew_iou(&a, &b));

    // Canonical form: a tall box is stored as a wide one turned a quarter.
    let tall = RotatedBox::new(0.0, 0.0, 30.0, 10.0, 0.0)?;
    println!("tall box canonicalizes to {:?}", tall.to_array());

    let rows = array![
        [0.0, 0.0, 10.0, 40.0, 0.0],
        [5.0, 0.0, 10.0, 40.0, 0.2],
        [200.0, 50.0, 12.0, 30.0, 1.0],
    ];
    let boxes = boxes_from_array(rows.view())?;
    let m = skew_iou_matrix(&boxes, &boxes);
    println!("pairwise IoU:\n{m:.3}");
    assert_eq!(boxes_to_array(&boxes), rows);
    Ok(())
}

fn main() -> skewtext::Result<()> {
    run_example()
}
