//! Linear algebra over GF(2) on sparse columns stored as sorted index lists.

use std::collections::HashMap;

/// Symmetric difference of two sorted index lists.
pub fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Rank of the matrix whose columns are given as sorted row-index lists.
pub fn rank(columns: Vec<Vec<usize>>) -> usize {
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut r = 0;
    for mut col in columns {
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(p) => col = xor_sorted(&col, p),
                None => {
                    pivots.insert(low, col);
                    r += 1;
                    break;
                }
            }
        }
    }
    r
}

/// Sum of the columns selected by `support`, i.e. the image of a chain.
pub fn apply(columns: &dyn Fn(usize) -> Vec<usize>, support: &[usize]) -> Vec<usize> {
    let mut acc: Vec<usize> = Vec::new();
    for &s in support {
        let mut c = columns(s);
        c.sort_unstable();
        acc = xor_sorted(&acc, &c);
    }
    acc
}

/// Betti numbers of a chain complex given face counts and boundary columns.
pub fn betti(counts: &[usize], boundary: &dyn Fn(usize, usize) -> Vec<usize>) -> Vec<usize> {
    let top = counts.len();
    let mut ranks = vec![0usize; top + 1];
    for d in 1..top {
        let cols = (0..counts[d])
            .map(|i| {
                let mut c = boundary(d, i);
                c.sort_unstable();
                c
            })
            .collect();
        ranks[d] = rank(cols);
    }
    (0..top).map(|d| counts[d] - ranks[d] - ranks[d + 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_of_cycle_boundary() {
        // boundary of the 4-cycle: columns are edges, rows vertices
        let cols = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]];
        assert_eq!(rank(cols), 3);
    }

    proptest! {
        #[test]
        fn xor_is_involutive(mut a in proptest::collection::btree_set(0usize..50, 0..20),
                             b in proptest::collection::btree_set(0usize..50, 0..20)) {
            let a: Vec<usize> = std::mem::take(&mut a).into_iter().collect();
            let b: Vec<usize> = b.into_iter().collect();
            prop_assert_eq!(xor_sorted(&xor_sorted(&a, &b), &b), a);
        }

        #[test]
        fn rank_bounded_by_shape(cols in proptest::collection::vec(
            proptest::collection::btree_set(0usize..12, 0..6), 0..10)) {
            let n = cols.len();
            let cols: Vec<Vec<usize>> = cols.into_iter().map(|s| s.into_iter().collect()).collect();
            let r = rank(cols);
            prop_assert!(r <= n && r <= 12);
        }
    }
}
