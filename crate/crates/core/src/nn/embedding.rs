use std::collections::BTreeMap;

use super::tensor::{axpy, Tensor};
use super::NnError;

/// Row id that never receives gradient.
pub const PAD_ROW: usize = 0;

/// Gathers table rows: `ids` is `[B, T]` flattened, output `[B, T, D]`.
pub fn embedding_forward(ids: &[u32], seq_len: usize, table: &Tensor) -> Result<Tensor, NnError> {
    let (rows, dim) = table.dims2("embedding table")?;
    if seq_len == 0 || ids.len() % seq_len != 0 {
        return Err(NnError::Shape(format!("{} ids do not form rows of length {seq_len}", ids.len())));
    }
    let mut out = Tensor::zeros(&[ids.len() / seq_len, seq_len, dim]);
    let td = table.data();
    for (slot, &id) in out.data_mut().chunks_exact_mut(dim).zip(ids) {
        let id = id as usize;
        if id >= rows {
            return Err(NnError::Index { index: id, bound: rows });
        }
        slot.copy_from_slice(&td[id * dim..(id + 1) * dim]);
    }
    Ok(out)
}

/// Row-sparse embedding gradient.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseRows {
    pub dim: usize,
    pub rows: BTreeMap<usize, Vec<f64>>,
}

impl SparseRows {
    pub fn new(dim: usize) -> Self {
        SparseRows { dim, rows: BTreeMap::new() }
    }

    pub fn merge(&mut self, other: &SparseRows) {
        for (&r, g) in &other.rows {
            let slot = self.rows.entry(r).or_insert_with(|| vec![0.0; self.dim]);
            axpy(1.0, g, slot);
        }
    }

    /// Adds every row into a dense `[V, D]` accumulator.
    pub fn scatter_into(&self, dense: &mut Tensor) {
        let dd = dense.data_mut();
        for (&r, g) in &self.rows {
            axpy(1.0, g, &mut dd[r * self.dim..(r + 1) * self.dim]);
        }
    }
}

/// Scatter-add of `grad_out: [B, T, D]` into the rows named by `ids`.
/// Repeated ids accumulate; the PAD row is skipped.
pub fn embedding_backward(ids: &[u32], grad_out: &Tensor) -> Result<SparseRows, NnError> {
    let (_, _, dim) = grad_out.dims3("embedding grad")?;
    if grad_out.len() != ids.len() * dim {
        return Err(NnError::Shape(format!("{} ids for grad of shape {:?}", ids.len(), grad_out.shape())));
    }
    let mut out = SparseRows::new(dim);
    for (g, &id) in grad_out.data().chunks_exact(dim).zip(ids) {
        let id = id as usize;
        if id == PAD_ROW {
            continue;
        }
        let slot = out.rows.entry(id).or_insert_with(|| vec![0.0; dim]);
        axpy(1.0, g, slot);
    }
    Ok(out)
}
