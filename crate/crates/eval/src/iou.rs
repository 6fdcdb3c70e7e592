//! Segmentation overlap scoring.

use std::collections::BTreeMap;

use g2r_core::SemanticMap;
use serde::Serialize;

use crate::error::EvalError;

/// Per-class intersection-over-union between a predicted and a reference
/// labeling. A class absent from both maps has an undefined score; it
/// appears in neither `per_class` nor the mean, so an image without
/// pedestrians never dilutes the pedestrian average.
#[derive(Debug, Clone, Serialize)]
pub struct IouReport {
    pub per_class: BTreeMap<u8, f64>,
    /// Mean over the defined classes, `None` when nothing was defined.
    pub mean_iou: Option<f64>,
}

/// Score `pred` against `gt` for the listed class ids. Both maps must have
/// the same shape.
pub fn iou(pred: &SemanticMap, gt: &SemanticMap, classes: &[u8]) -> Result<IouReport, EvalError> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(EvalError::MapShapeMismatch {
            pred_w: pred.width(),
            pred_h: pred.height(),
            gt_w: gt.width(),
            gt_h: gt.height(),
        });
    }
    let mut pred_count = [0u64; 256];
    let mut gt_count = [0u64; 256];
    let mut inter = [0u64; 256];
    for (&p, &g) in pred.classes().iter().zip(gt.classes()) {
        pred_count[p as usize] += 1;
        gt_count[g as usize] += 1;
        if p == g {
            inter[p as usize] += 1;
        }
    }
    let mut per_class = BTreeMap::new();
    for &c in classes {
        let i = c as usize;
        let union = pred_count[i] + gt_count[i] - inter[i];
        if union > 0 {
            per_class.insert(c, inter[i] as f64 / union as f64);
        }
    }
    let mean_iou = if per_class.is_empty() {
        None
    } else {
        Some(per_class.values().sum::<f64>() / per_class.len() as f64)
    };
    Ok(IouReport {
        per_class,
        mean_iou,
    })
}
