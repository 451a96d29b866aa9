//! Published universal sequences, embedded verbatim (two-decimal ratios).

use std::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::{CompositeSequence, SequenceKind};
use crate::error::{DmcpError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublishedRow {
    pub name: &'static str,
    pub target_angle: f64,
    pub order: u8,
    pub ratios: &'static [f64],
}

pub const PUBLISHED: [PublishedRow; 6] = [
    PublishedRow { name: "pi-n4-o1", target_angle: PI, order: 1, ratios: &[5.52, 0.69, -0.69, -5.52] },
    PublishedRow { name: "pi-n6-o1", target_angle: PI, order: 1, ratios: &[5.89, 1.01, -5.68, 5.68, -1.01, -5.89] },
    PublishedRow { name: "pi-n6-o2", target_angle: PI, order: 2, ratios: &[-4.25, -1.96, 1.65, -1.65, 1.96, 4.25] },
    PublishedRow { name: "pi2-n4-o1", target_angle: FRAC_PI_2, order: 1, ratios: &[11.99, 1.94, -1.94, -11.99] },
    PublishedRow {
        name: "pi2-n6-o1",
        target_angle: FRAC_PI_2,
        order: 1,
        ratios: &[-0.97, 0.97, 0.37, -0.37, -0.97, 0.97],
    },
    PublishedRow {
        name: "pi2-n6-o2",
        target_angle: FRAC_PI_2,
        order: 2,
        ratios: &[-52.23, -6.76, -1.74, 1.74, 6.76, 52.23],
    },
];

impl PublishedRow {
    pub fn sequence(&self) -> CompositeSequence {
        CompositeSequence::from_ratios(self.ratios, self.target_angle, self.order, SequenceKind::Universal)
            .expect("published rows are valid universal sequences")
    }

    /// First half of the row: the point-to-point sub-sequence.
    pub fn half_ratios(&self) -> &'static [f64] {
        &self.ratios[..self.ratios.len() / 2]
    }
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PUBLISHED.iter().map(|r| r.name)
}

pub fn lookup(name: &str) -> Result<&'static PublishedRow> {
    PUBLISHED.iter().find(|r| r.name == name).ok_or_else(|| {
        DmcpError::InvalidInput(format!(
            "unknown table '{name}', expected one of: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })
}
