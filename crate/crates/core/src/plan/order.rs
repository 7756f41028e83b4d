use std::collections::{HashMap, VecDeque};

use super::PlanError;
use crate::geometry::{Axial, Column, HexGrid};

/// Breadth-first flood-fill order over hex adjacency, starting from the
/// column nearest the grid center.
///
/// Each connected group of columns is emitted as one contiguous run; groups
/// follow each other by the distance of their nearest column to the center.
/// Ties break on `(q, r)` and neighbors are visited in
/// [`AXIAL_DIRECTIONS`](crate::geometry::AXIAL_DIRECTIONS) order, so the
/// result depends only on the set of cells.
pub fn order_columns(columns: &[Column], grid: &HexGrid) -> Result<Vec<Column>, PlanError> {
    // cell (0, 0) is centered on the grid center, so the axial norm orders
    // cells by exact Euclidean distance to it
    debug_assert_eq!(grid.center(Axial::new(0, 0)), grid.origin());
    let mut index: HashMap<Axial, usize> = HashMap::with_capacity(columns.len());
    for (i, c) in columns.iter().enumerate() {
        if index.insert(c.cell, i).is_some() {
            return Err(PlanError::DuplicateCell(c.cell));
        }
    }
    let mut by_distance: Vec<Axial> = columns.iter().map(|c| c.cell).collect();
    by_distance.sort_by_key(|&c| (c.norm2(), c));

    let mut visited = vec![false; columns.len()];
    let mut order = Vec::with_capacity(columns.len());
    let mut queue = VecDeque::new();
    for root in by_distance {
        let r = index[&root];
        if visited[r] {
            continue;
        }
        visited[r] = true;
        queue.push_back(root);
        while let Some(cell) = queue.pop_front() {
            order.push(columns[index[&cell]].clone());
            for n in cell.neighbors() {
                if let Some(&k) = index.get(&n) {
                    if !visited[k] {
                        visited[k] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
    }
    Ok(order)
}
