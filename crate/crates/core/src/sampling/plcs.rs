use std::collections::BTreeMap;

use super::score_order;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confident {
    pub id: u64,
    pub pseudo_label: usize,
    pub confidence: f64,
}

/// Per-class confident picks, most confident first within each class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidentSelection {
    pub per_class: Vec<Vec<Confident>>,
    pub kappa_used: f64,
}

impl ConfidentSelection {
    pub fn len(&self) -> usize {
        self.per_class.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(id, pseudo_label)` pairs in class order.
    pub fn picks(&self) -> Vec<(u64, usize)> {
        self.per_class
            .iter()
            .flatten()
            .map(|c| (c.id, c.pseudo_label))
            .collect()
    }
}

/// Number of picks for one class: `ceil(kappa/100 * base)`.
fn quota(kappa: f64, base: usize) -> usize {
    let exact = kappa * base as f64 / 100.0;
    // absorb representation error so integral products are not rounded up
    (exact - 1e-9).ceil().max(0.0) as usize
}

/// Takes the `ceil(kappa% * base_counts[c])` most confident members of each
/// pseudo-class, capped by how many are available.
///
/// `confidences` must only cover the current unlabeled pool.
pub fn plcs_select(confidences: &BTreeMap<u64, (usize, f64)>, kappa: f64, base_counts: &[usize]) -> ConfidentSelection {
    let classes = base_counts.len();
    let mut members: Vec<Vec<(u64, f64)>> = vec![Vec::new(); classes];
    for (&id, &(label, conf)) in confidences {
        if label < classes {
            members[label].push((id, conf));
        }
    }
    let per_class = members
        .into_iter()
        .enumerate()
        .map(|(c, mut m)| {
            m.sort_by(score_order);
            m.truncate(quota(kappa, base_counts[c]));
            m.into_iter()
                .map(|(id, confidence)| Confident {
                    id,
                    pseudo_label: c,
                    confidence,
                })
                .collect()
        })
        .collect();
    ConfidentSelection {
        per_class,
        kappa_used: kappa,
    }
}
