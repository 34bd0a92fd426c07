//! Small enumeration helpers shared by the exhaustive checks.

/// All permutations of `items`, in lexicographic order of positions.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    let mut out = vec![idx.iter().map(|&i| items[i].clone()).collect()];
    while next_permutation(&mut idx) {
        out.push(idx.iter().map(|&i| items[i].clone()).collect());
    }
    out
}

/// Rearranges `v` into its lexicographic successor; false at the last permutation.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, |a, b| a.saturating_mul(b))
}

/// Every subset of `items`, as index masks in increasing order.
pub fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    assert!(items.len() < 64);
    (0u64..(1u64 << items.len()))
        .map(|m| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Every function from `0..n` into `0..k`, as value vectors in odometer order.
pub fn functions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            cur[i] += 1;
            if cur[i] < k {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}
