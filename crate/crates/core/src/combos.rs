//! Combinations of pairwise non-touching loops, order by order.
//!
//! Order 1 is one row per loop and order 2 is a plain pair scan. Every higher
//! order is grown from the previous one: a row `{l1 < .. < lk}` is extended
//! by a loop `j > lk` that touches none of its members. Such a `j` is
//! necessarily the largest member of some order-`k` row (drop any other
//! member of the extended set), so candidates are drawn from the set of
//! row maxima of the previous table. The new row's gain is the parent gain
//! times the loop gain.

use std::collections::BTreeSet;

use crate::loops::{SymbolicGain, TouchMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct ComboRow {
    /// Strictly ascending loop indices.
    pub loops: Vec<usize>,
    pub gain: SymbolicGain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComboTable {
    pub order: usize,
    pub rows: Vec<ComboRow>,
}

impl ComboTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn index_sets(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.loops.clone()).collect()
    }
}

pub fn combos_order1(gains: &[SymbolicGain]) -> ComboTable {
    ComboTable {
        order: 1,
        rows: gains
            .iter()
            .enumerate()
            .map(|(i, g)| ComboRow {
                loops: vec![i],
                gain: g.clone(),
            })
            .collect(),
    }
}

pub fn combos_order2(gains: &[SymbolicGain], touch: &TouchMatrix) -> ComboTable {
    let mut rows = Vec::new();
    for i in 0..gains.len() {
        for j in touch.partners(i).filter(|&j| j > i) {
            rows.push(ComboRow {
                loops: vec![i, j],
                gain: gains[i].mul(&gains[j]),
            });
        }
    }
    ComboTable { order: 2, rows }
}

/// Builds the order `k + 1` table from the order `k` table (`k >= 2`).
pub fn combos_extend(table: &ComboTable, touch: &TouchMatrix, gains: &[SymbolicGain]) -> ComboTable {
    let maxima: BTreeSet<usize> = table
        .rows
        .iter()
        .filter_map(|r| r.loops.last().copied())
        .collect();
    let mut rows = Vec::new();
    for row in &table.rows {
        let top = *row.loops.last().expect("rows are nonempty");
        for &j in maxima.range(top + 1..) {
            if row.loops.iter().all(|&m| !touch.touch(m, j)) {
                let mut loops = row.loops.clone();
                loops.push(j);
                rows.push(ComboRow {
                    loops,
                    gain: row.gain.mul(&gains[j]),
                });
            }
        }
    }
    ComboTable {
        order: table.order + 1,
        rows,
    }
}

/// Every nonempty order, starting at 1. Stops at the first empty order, or
/// returns `None` once the running row count exceeds `row_cap`.
pub fn all_orders(gains: &[SymbolicGain], touch: &TouchMatrix, row_cap: usize) -> Option<Vec<ComboTable>> {
    let mut tables = Vec::new();
    let first = combos_order1(gains);
    if first.is_empty() {
        return Some(tables);
    }
    let mut total = first.len();
    tables.push(first);
    let mut next = combos_order2(gains, touch);
    while !next.is_empty() {
        total += next.len();
        if total > row_cap {
            return None;
        }
        let following = combos_extend(&next, touch, gains);
        tables.push(next);
        next = following;
    }
    Some(tables)
}
