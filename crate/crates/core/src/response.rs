//! Response matrices, item formats, and structural validation.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State of one examinee/item cell.
///
/// `Omitted` means the item was presented and skipped; `NotAdministered`
/// means it was never presented. Guessing correction depends on keeping
/// omitted and incorrect apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResponseCell {
    Correct,
    Incorrect,
    Omitted,
    NotAdministered,
}

impl ResponseCell {
    pub fn is_administered(self) -> bool {
        self != ResponseCell::NotAdministered
    }

    /// Dichotomous score under an omit policy. `None` when the cell does not
    /// enter the statistic at all.
    pub fn score(self, policy: OmitPolicy) -> Option<f64> {
        match self {
            ResponseCell::Correct => Some(1.0),
            ResponseCell::Incorrect => Some(0.0),
            ResponseCell::Omitted => match policy {
                OmitPolicy::OmitAsWrong => Some(0.0),
                OmitPolicy::OmitExcluded => None,
            },
            ResponseCell::NotAdministered => None,
        }
    }
}

/// How omitted cells enter classical statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OmitPolicy {
    /// Number-right scoring: an omission counts as a wrong answer.
    #[default]
    OmitAsWrong,
    /// Omissions are dropped from the denominator.
    OmitExcluded,
}

/// Examinee-by-item response grid, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMatrix {
    examinee_ids: Vec<String>,
    item_ids: Vec<String>,
    cells: Vec<ResponseCell>,
    criterion: Option<Vec<f64>>,
}

fn check_unique(ids: &[String], axis: &'static str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId { axis, id: id.clone() });
        }
    }
    Ok(())
}

impl ResponseMatrix {
    pub fn new(
        examinee_ids: Vec<String>,
        item_ids: Vec<String>,
        cells: Vec<ResponseCell>,
        criterion: Option<Vec<f64>>,
    ) -> Result<Self> {
        let (rows, cols) = (examinee_ids.len(), item_ids.len());
        if cells.len() != rows * cols {
            return Err(Error::Dimension { rows, cols, actual: cells.len() });
        }
        check_unique(&examinee_ids, "examinee")?;
        check_unique(&item_ids, "item")?;
        if let Some(values) = &criterion {
            if values.len() != rows {
                return Err(Error::CriterionLength { expected: rows, actual: values.len() });
            }
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::CriterionNotFinite { examinee: examinee_ids[i].clone() });
            }
        }
        Ok(Self { examinee_ids, item_ids, cells, criterion })
    }

    /// Builds a matrix with generated ids `e1..` and `i1..`.
    pub fn from_rows(rows: &[Vec<ResponseCell>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let examinees = (1..=rows.len()).map(|i| alloc::format!("e{i}")).collect();
        let items = (1..=cols).map(|j| alloc::format!("i{j}")).collect();
        let cells = rows.iter().flatten().copied().collect();
        Self::new(examinees, items, cells, None)
    }

    pub fn with_criterion(self, criterion: Vec<f64>) -> Result<Self> {
        Self::new(self.examinee_ids, self.item_ids, self.cells, Some(criterion))
    }

    pub fn examinee_count(&self) -> usize {
        self.examinee_ids.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_ids.len()
    }

    pub fn examinee_ids(&self) -> &[String] {
        &self.examinee_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn criterion(&self) -> Option<&[f64]> {
        self.criterion.as_deref()
    }

    pub fn cell(&self, examinee: usize, item: usize) -> ResponseCell {
        self.cells[examinee * self.item_ids.len() + item]
    }

    pub fn row(&self, examinee: usize) -> &[ResponseCell] {
        let k = self.item_ids.len();
        &self.cells[examinee * k..(examinee + 1) * k]
    }

    pub fn column(&self, item: usize) -> impl Iterator<Item = ResponseCell> + '_ {
        (0..self.examinee_count()).map(move |i| self.cell(i, item))
    }

    pub fn item_index(&self, id: &str) -> Result<usize> {
        self.item_ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownItem(String::from(id)))
    }

    /// Number-right total per examinee (omissions and unadministered cells add nothing).
    pub fn total_scores(&self) -> Vec<f64> {
        (0..self.examinee_count())
            .map(|i| self.row(i).iter().filter(|c| **c == ResponseCell::Correct).count() as f64)
            .collect()
    }

    /// Appends columns. `columns[j]` holds one cell per examinee.
    pub fn with_appended_items(&self, ids: Vec<String>, columns: &[Vec<ResponseCell>]) -> Result<Self> {
        let mut item_ids = self.item_ids.clone();
        item_ids.extend(ids);
        let mut cells = Vec::with_capacity(self.examinee_count() * item_ids.len());
        for i in 0..self.examinee_count() {
            cells.extend_from_slice(self.row(i));
            for col in columns {
                cells.push(*col.get(i).unwrap_or(&ResponseCell::NotAdministered));
            }
        }
        Self::new(self.examinee_ids.clone(), item_ids, cells, self.criterion.clone())
    }
}

/// Per-axis counts and degenerate-row/column flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub item_administered: Vec<usize>,
    pub examinee_administered: Vec<usize>,
    /// Items whose administered responses all score the same under number-right scoring.
    pub zero_variance_items: Vec<String>,
    pub unadministered_items: Vec<String>,
    pub empty_examinees: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.zero_variance_items.is_empty()
            && self.unadministered_items.is_empty()
            && self.empty_examinees.is_empty()
    }
}

pub fn validate_matrix(matrix: &ResponseMatrix) -> ValidationReport {
    let mut item_administered = Vec::with_capacity(matrix.item_count());
    let mut zero_variance_items = Vec::new();
    let mut unadministered_items = Vec::new();
    for (j, id) in matrix.item_ids().iter().enumerate() {
        let administered = matrix.column(j).filter(|c| c.is_administered()).count();
        let correct = matrix.column(j).filter(|c| *c == ResponseCell::Correct).count();
        item_administered.push(administered);
        if administered == 0 {
            unadministered_items.push(id.clone());
        } else if correct == 0 || correct == administered {
            zero_variance_items.push(id.clone());
        }
    }
    let examinee_administered: Vec<usize> = (0..matrix.examinee_count())
        .map(|i| matrix.row(i).iter().filter(|c| c.is_administered()).count())
        .collect();
    let empty_examinees = examinee_administered
        .iter()
        .zip(matrix.examinee_ids())
        .filter(|(n, _)| **n == 0)
        .map(|(_, id)| id.clone())
        .collect();
    ValidationReport {
        item_administered,
        examinee_administered,
        zero_variance_items,
        unadministered_items,
        empty_examinees,
    }
}

/// Item presentation format; fixes the blind-guess success probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemFormat {
    /// One correct option among `m`.
    SingleChoice { m: u32 },
    /// Any subset of `m` options may be marked; scored all-or-nothing.
    MultiSelect { m: u32 },
    /// `n` prompts matched injectively to `m` responses.
    Matching { n: u32, m: u32 },
    /// `n` elements to be put in order.
    Ordering { n: u32 },
}

impl ItemFormat {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ItemFormat::SingleChoice { m } if m < 2 => Err(Error::InvalidFormat("single choice needs m >= 2")),
            ItemFormat::MultiSelect { m } if m < 2 => Err(Error::InvalidFormat("multi-select needs m >= 2")),
            ItemFormat::Matching { n, m } if n < 1 || n > m => {
                Err(Error::InvalidFormat("matching needs 1 <= n <= m"))
            }
            ItemFormat::Ordering { n } if n < 2 => Err(Error::InvalidFormat("ordering needs n >= 2")),
            _ => Ok(()),
        }
    }

    pub fn family(&self) -> FormatFamily {
        match self {
            ItemFormat::SingleChoice { .. } => FormatFamily::SingleChoice,
            ItemFormat::MultiSelect { .. } => FormatFamily::MultiSelect,
            ItemFormat::Matching { .. } => FormatFamily::Matching,
            ItemFormat::Ordering { .. } => FormatFamily::Ordering,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormatFamily {
    SingleChoice,
    MultiSelect,
    Matching,
    Ordering,
}

/// Item id to format.
pub type FormatMap = BTreeMap<String, ItemFormat>;
