//! Scale-invariant box regression targets and the detection losses.

use crate::error::{invalid, Error, Result};
use crate::geometry::{angle_sub, wrap_angle, RotatedBox};

/// Offsets of a box relative to an anchor, `(v_x, v_y, v_h, v_w, v_theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegressionTarget {
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub w: f64,
    pub theta: f64,
}

impl RegressionTarget {
    pub const fn new(x: f64, y: f64, h: f64, w: f64, theta: f64) -> Self {
        Self { x, y, h, w, theta }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.x, self.y, self.h, self.w, self.theta]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Softmax output over `(background, text)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScore {
    p0: f64,
    p1: f64,
}

impl ClassScore {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        let ok = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        if !(ok(p0) && ok(p1)) || (p0 + p1 - 1.0).abs() > 1e-9 {
            return Err(invalid(format!(
                "class probabilities must lie in [0, 1] and sum to 1, got ({p0}, {p1})"
            )));
        }
        Ok(Self { p0, p1 })
    }

    /// Text probability `p`, background `1 - p`.
    pub fn text(p: f64) -> Result<Self> {
        Self::new(1.0 - p, p)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn prob(&self, label: ClassLabel) -> f64 {
        match label {
            ClassLabel::Background => self.p0,
            ClassLabel::Text => self.p1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassLabel {
    Background = 0,
    Text = 1,
}

impl ClassLabel {
    pub fn indicator(self) -> f64 {
        match self {
            ClassLabel::Background => 0.0,
            ClassLabel::Text => 1.0,
        }
    }
}

impl TryFrom<u8> for ClassLabel {
    type Error = Error;

    fn try_from(l: u8) -> Result<Self> {
        match l {
            0 => Ok(ClassLabel::Background),
            1 => Ok(ClassLabel::Text),
            _ => Err(invalid(format!("class label must be 0 or 1, got {l}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Weight of the regression term.
    pub lambda: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { lambda: 1.0 }
    }
}

/// Regression target of `gt` relative to `anchor`.
pub fn encode(gt: &RotatedBox, anchor: &RotatedBox) -> Result<RegressionTarget> {
    Ok(RegressionTarget {
        x: (gt.x() - anchor.x()) / anchor.w(),
        y: (gt.y() - anchor.y()) / anchor.h(),
        h: (gt.h() / anchor.h()).ln(),
        w: (gt.w() / anchor.w()).ln(),
        theta: angle_sub(gt.theta(), anchor.theta())?,
    })
}

/// Applies regression offsets to an anchor. The result is canonicalized, so
/// a prediction with `w < h` comes back with its sides swapped.
pub fn decode(anchor: &RotatedBox, v: &RegressionTarget) -> Result<RotatedBox> {
    if !v.is_finite() {
        return Err(Error::DivergentRegression(format!("non-finite offsets {v:?}")));
    }
    let x = v.x * anchor.w() + anchor.x();
    let y = v.y * anchor.h() + anchor.y();
    let h = anchor.h() * v.h.exp();
    let w = anchor.w() * v.w.exp();
    if !(x.is_finite() && y.is_finite() && h.is_finite() && w.is_finite()) || h <= 0.0 || w <= 0.0 {
        return Err(Error::DivergentRegression(format!(
            "decoded box ({x}, {y}, {h}, {w}) is not finite and positive"
        )));
    }
    RotatedBox::new(x, y, h, w, wrap_angle(v.theta + anchor.theta()))
}

pub fn smooth_l1(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        0.5 * x * x
    } else {
        a - 0.5
    }
}

/// Derivative of [`smooth_l1`].
pub fn smooth_l1_grad(x: f64) -> f64 {
    if x.abs() < 1.0 {
        x
    } else {
        x.signum()
    }
}

pub fn reg_loss(v_star: &RegressionTarget, v: &RegressionTarget) -> f64 {
    v_star
        .to_array()
        .iter()
        .zip(v.to_array())
        .map(|(a, b)| smooth_l1(a - b))
        .sum()
}

/// Probabilities are clamped below at this value before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Negative log-likelihood of the true class.
pub fn cls_loss(p: &ClassScore, l: ClassLabel) -> f64 {
    -p.prob(l).max(PROB_FLOOR).ln()
}

/// Classification loss plus the `lambda`-weighted regression loss, the latter
/// only for text samples.
pub fn multitask_loss(
    p: &ClassScore,
    l: ClassLabel,
    v_star: &RegressionTarget,
    v: &RegressionTarget,
    cfg: &LossConfig,
) -> Result<f64> {
    if !(cfg.lambda.is_finite() && cfg.lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {}", cfg.lambda)));
    }
    let reg = match l {
        ClassLabel::Background => 0.0,
        ClassLabel::Text => cfg.lambda * reg_loss(v_star, v),
    };
    Ok(cls_loss(p, l) + reg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, LN_2};

    fn bx(x: f64, y: f64, h: f64, w: f64, t: f64) -> RotatedBox {
        RotatedBox::new(x, y, h, w, t).unwrap()
    }

    #[test]
    fn encode_examples() {
        let a = bx(0.0, 0.0, 2.0, 4.0, 0.0);
        assert_eq!(encode(&a, &a).unwrap(), RegressionTarget::default());
        let v = encode(&bx(10.0, 0.0, 2.0, 4.0, 0.0), &a).unwrap();
        assert_eq!(v.to_array(), [2.5, 0.0, 0.0, 0.0, 0.0]);

        // (3 - 0)/8, (7 - 0)/2, ln(4/2), ln(16/8), pi/3 - pi/6.
        let v = encode(&bx(3.0, 7.0, 4.0, 16.0, FRAC_PI_3), &bx(0.0, 0.0, 2.0, 8.0, FRAC_PI_6)).unwrap();
        assert_abs_diff_eq!(v.x, 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(v.y, 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v.h, LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(v.w, LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(v.theta, FRAC_PI_6, epsilon = 1e-15);
    }

    #[test]
    fn decode_examples() {
        let a = bx(0.0, 0.0, 2.0, 8.0, FRAC_PI_6);
        assert_eq!(decode(&a, &RegressionTarget::default()).unwrap(), a);

        let d = decode(&a, &RegressionTarget::new(1.0, -1.0, LN_2, 0.0, FRAC_PI_4)).unwrap();
        assert_abs_diff_eq!(d.x(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.y(), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.h(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.w(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.theta(), FRAC_PI_4 + FRAC_PI_6, epsilon = 1e-12);

        let gt = bx(3.0, 7.0, 4.0, 16.0, FRAC_PI_3);
        let back = decode(&a, &encode(&gt, &a).unwrap()).unwrap();
        for (p, q) in back.to_array().iter().zip(gt.to_array()) {
            assert_abs_diff_eq!(*p, q, epsilon = 1e-9);
        }
    }

    #[test]
    fn decode_canonicalizes_swapped_sides() {
        let a = bx(0.0, 0.0, 2.0, 4.0, 0.0);
        // h grows to 8 while w stays 4.
        let d = decode(&a, &RegressionTarget::new(0.0, 0.0, 2.0 * LN_2, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(d.w(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.h(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.theta(), std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn decode_overflow_is_divergent() {
        let a = bx(0.0, 0.0, 2.0, 4.0, 0.0);
        let err = decode(&a, &RegressionTarget::new(0.0, 0.0, 1000.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DivergentRegression(_)));
        let err = decode(&a, &RegressionTarget::new(f64::NAN, 0.0, 0.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DivergentRegression(_)));
    }

    #[test]
    fn smooth_l1_examples() {
        assert_eq!(smooth_l1(0.0), 0.0);
        assert_eq!(smooth_l1(0.5), 0.125);
        assert_eq!(smooth_l1(-2.0), 1.5);
        assert_eq!(smooth_l1(1.0), 0.5);
        assert_eq!(smooth_l1(-1.0), 0.5);
    }

    #[test]
    fn reg_loss_examples() {
        let z = RegressionTarget::default();
        assert_eq!(reg_loss(&z, &z), 0.0);
        assert_eq!(reg_loss(&RegressionTarget::new(0.0, 0.5, 0.0, 0.0, 0.0), &z), 0.125);
        assert_eq!(reg_loss(&RegressionTarget::new(1.0, 1.0, 1.0, 1.0, 1.0), &z), 2.5);
    }

    #[test]
    fn cls_loss_examples() {
        assert_eq!(cls_loss(&ClassScore::text(1.0).unwrap(), ClassLabel::Text), 0.0);
        assert_abs_diff_eq!(cls_loss(&ClassScore::text(0.5).unwrap(), ClassLabel::Text), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            cls_loss(&ClassScore::new(0.9, 0.1).unwrap(), ClassLabel::Background),
            0.10536051565782628,
            epsilon = 1e-12
        );
        let l = cls_loss(&ClassScore::text(0.0).unwrap(), ClassLabel::Text);
        assert!(l.is_finite());
        assert_abs_diff_eq!(l, -(1e-12f64).ln(), epsilon = 1e-9);
    }

    #[test]
    fn class_types_validate() {
        assert!(ClassScore::new(0.5, 0.6).is_err());
        assert!(ClassScore::new(-0.1, 1.1).is_err());
        assert!(ClassLabel::try_from(2).is_err());
        assert_eq!(ClassLabel::try_from(1).unwrap(), ClassLabel::Text);
    }

    #[test]
    fn multitask_examples() {
        let vs = RegressionTarget::new(0.3, -2.0, 0.0, 1.0, 0.1);
        let v = RegressionTarget::default();
        let p = ClassScore::new(0.8, 0.2).unwrap();
        let cfg = LossConfig::default();
        assert_eq!(
            multitask_loss(&p, ClassLabel::Background, &vs, &v, &cfg).unwrap(),
            cls_loss(&p, ClassLabel::Background)
        );
        let p1 = ClassScore::text(1.0).unwrap();
        assert_eq!(multitask_loss(&p1, ClassLabel::Text, &vs, &vs, &cfg).unwrap(), 0.0);

        // cls = 0.1, reg = 0.5 * 0.6 = 0.3, lambda = 2.
        let p = ClassScore::text((-0.1f64).exp()).unwrap();
        let vs = RegressionTarget::new(0.6f64.sqrt(), 0.0, 0.0, 0.0, 0.0);
        let got = multitask_loss(&p, ClassLabel::Text, &vs, &v, &LossConfig { lambda: 2.0 }).unwrap();
        assert_abs_diff_eq!(got, 0.7, epsilon = 1e-12);
        assert!(multitask_loss(&p, ClassLabel::Text, &vs, &v, &LossConfig { lambda: 0.0 }).is_err());
    }
}
