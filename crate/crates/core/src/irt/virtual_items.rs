use alloc::string::String;
use alloc::vec;

use super::ItemParams;
use crate::error::Result;
use crate::response::{ResponseCell, ResponseMatrix};

pub const VIRTUAL_LOW_ID: &str = "__virtual_low";
pub const VIRTUAL_HIGH_ID: &str = "__virtual_high";

/// A matrix with two trailing fixed-parameter anchor items.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMatrix {
    pub matrix: ResponseMatrix,
    /// Easy anchor (answered correctly by everyone), then hard anchor (missed by everyone).
    pub anchors: [ItemParams; 2],
}

impl AugmentedMatrix {
    pub fn real_item_count(&self) -> usize {
        self.matrix.item_count() - 2
    }
}

/// Anchor location one logit beyond each end of the difficulty span.
pub(crate) fn anchors_for_span(b_min: f64, b_max: f64) -> [ItemParams; 2] {
    [ItemParams::rasch(b_min - 1.0), ItemParams::rasch(b_max + 1.0)]
}

/// Appends an easy item everyone answers correctly and a hard item everyone
/// misses, so each examinee has at least one success and one failure.
pub fn augment_virtual_items(matrix: &ResponseMatrix, span: (f64, f64)) -> Result<AugmentedMatrix> {
    let n = matrix.examinee_count();
    let augmented = matrix.with_appended_items(
        vec![String::from(VIRTUAL_LOW_ID), String::from(VIRTUAL_HIGH_ID)],
        &[vec![ResponseCell::Correct; n], vec![ResponseCell::Incorrect; n]],
    )?;
    Ok(AugmentedMatrix { matrix: augmented, anchors: anchors_for_span(span.0, span.1) })
}
