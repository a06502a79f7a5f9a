use crate::error::{GeometryError, Result};
use crate::numerics::signed_permutations;

/// Generalized Kronecker delta `δ^{upper}_{lower}`: the determinant of the
/// matrix of plain deltas, evaluated as a signed permutation sum.
///
/// Indices are zero-based and must lie in `0..d`. Repeated indices in either
/// list give zero.
pub fn gen_delta(upper: &[usize], lower: &[usize], d: usize) -> Result<i32> {
    if upper.len() != lower.len() {
        return Err(GeometryError::LengthMismatch { upper: upper.len(), lower: lower.len() });
    }
    if let Some(&index) = upper.iter().chain(lower.iter()).find(|&&i| i >= d) {
        return Err(GeometryError::IndexOutOfRange { index, dim: d });
    }
    if has_repeat(upper) || has_repeat(lower) {
        return Ok(0);
    }
    let mut total = 0i32;
    for (perm, sign) in signed_permutations(upper.len()) {
        if perm.iter().enumerate().all(|(row, &col)| upper[col] == lower[row]) {
            total += sign as i32;
        }
    }
    Ok(total)
}

fn has_repeat(indices: &[usize]) -> bool {
    indices.iter().enumerate().any(|(i, a)| indices[i + 1..].contains(a))
}

/// Precomputed index data for contracting a generalized delta of a fixed
/// length in a fixed dimension.
///
/// A term of `δ^{u_0..u_{r-1}}_{w_0..w_{r-1}}` is non-zero only when the
/// `u` are distinct and `w` is a permutation of them, so the contraction runs
/// over injective upper tuples and signed permutations of their positions.
#[derive(Debug, Clone)]
pub struct DeltaTable {
    dim: usize,
    len: usize,
    tuples: Vec<Vec<usize>>,
    perms: Vec<(Vec<usize>, f64)>,
}

impl DeltaTable {
    pub fn new(dim: usize, len: usize) -> Self {
        let mut tuples = Vec::new();
        if len <= dim {
            let mut current = Vec::with_capacity(len);
            injective_tuples(dim, len, &mut current, &mut tuples);
        }
        Self { dim, len, tuples, perms: signed_permutations(len) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Calls `f(upper, lower, sign)` for every non-vanishing delta entry.
    pub fn for_each<F: FnMut(&[usize], &[usize], f64)>(&self, mut f: F) {
        let mut lower = vec![0usize; self.len];
        for upper in &self.tuples {
            for (perm, sign) in &self.perms {
                for (slot, &p) in perm.iter().enumerate() {
                    lower[slot] = upper[p];
                }
                f(upper, &lower, *sign);
            }
        }
    }
}

fn injective_tuples(dim: usize, len: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == len {
        out.push(current.clone());
        return;
    }
    for i in 0..dim {
        if !current.contains(&i) {
            current.push(i);
            injective_tuples(dim, len, current, out);
            current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        assert_eq!(gen_delta(&[0, 1], &[0, 1], 3).unwrap(), 1);
        assert_eq!(gen_delta(&[0, 1], &[1, 0], 3).unwrap(), -1);
        assert_eq!(gen_delta(&[0, 0], &[0, 1], 3).unwrap(), 0);
        assert_eq!(gen_delta(&[0, 1, 2], &[2, 0, 1], 3).unwrap(), 1);
        assert_eq!(gen_delta(&[0, 1], &[0, 2], 3).unwrap(), 0);
        // r = d + 1 always repeats an index
        assert_eq!(gen_delta(&[0, 1, 2, 0], &[0, 1, 2, 0], 3).unwrap(), 0);
    }

    #[test]
    fn delta_errors() {
        assert_eq!(
            gen_delta(&[0, 3], &[0, 1], 3),
            Err(GeometryError::IndexOutOfRange { index: 3, dim: 3 })
        );
        assert!(matches!(gen_delta(&[0], &[0, 1], 3), Err(GeometryError::LengthMismatch { .. })));
    }

    #[test]
    fn full_trace_counts_injections() {
        // δ^{i1..ir}_{i1..ir} summed = d!/(d-r)!
        for (d, r, expected) in [(4, 2, 12), (5, 3, 60), (4, 4, 24)] {
            let table = DeltaTable::new(d, r);
            let mut total = 0.0;
            table.for_each(|u, w, s| {
                if u == w {
                    total += s;
                }
            });
            assert_eq!(total, expected as f64);
        }
    }

    #[test]
    fn table_agrees_with_gen_delta() {
        let table = DeltaTable::new(3, 2);
        table.for_each(|u, w, s| {
            assert_eq!(gen_delta(u, w, 3).unwrap() as f64, s);
        });
        assert!(DeltaTable::new(2, 3).is_empty());
    }
}
