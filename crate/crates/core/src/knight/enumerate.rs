//! Exhaustive enumeration of small class members up to isomorphism.

use std::collections::BTreeSet;

use super::{knight_q_signature, knight_signature, knight_u_signature, G_FN, P_REL, Q_REL, U, X, Y};
use crate::combinatorics::functions;
use crate::knight::amalgam::rebuild_g_family;
use crate::limits::Limits;
use crate::structure::{isomorphic, ElementId, Structure};

/// Every K0 structure with at most `max_size` elements, one per isomorphism type.
///
/// X gets ids `0..nx`, Y gets `nx..nx+ny` in ascending order. Since Y is
/// rigid, two members are isomorphic exactly when their g-rows agree as
/// multisets, so sorted rows serve as the canonical form.
pub fn enumerate_k0(max_size: usize) -> Vec<Structure> {
    let mut out = Vec::new();
    for total in 0..=max_size {
        for ny in 0..=total / 2 {
            let nx = total - ny;
            let columns: Vec<Vec<Vec<usize>>> = (0..ny)
                .map(|j| {
                    functions(nx, j + 1)
                        .into_iter()
                        .filter(|f| (0..=j).all(|z| f.contains(&z)))
                        .collect()
                })
                .collect();
            let mut seen: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
            let mut choice = vec![0usize; ny];
            if columns.iter().any(|c| c.is_empty()) {
                continue;
            }
            loop {
                let mut rows: Vec<Vec<usize>> = (0..nx)
                    .map(|x| (0..ny).map(|j| columns[j][choice[j]][x]).collect())
                    .collect();
                rows.sort();
                if seen.insert(rows.clone()) {
                    out.push(from_rows(nx, ny, &rows));
                }
                let mut j = 0;
                loop {
                    if j == ny {
                        break;
                    }
                    choice[j] += 1;
                    if choice[j] < columns[j].len() {
                        break;
                    }
                    choice[j] = 0;
                    j += 1;
                }
                if j == ny {
                    break;
                }
            }
        }
    }
    out
}

/// Builds the K0 structure whose x-th row lists `g(x, y_j)` as indices into Y.
pub fn from_rows(nx: usize, ny: usize, rows: &[Vec<usize>]) -> Structure {
    let mut s = Structure::new(knight_signature());
    for x in 0..nx {
        s.add_element(x as ElementId, X).unwrap();
    }
    let y = |j: usize| (nx + j) as ElementId;
    for j in 0..ny {
        s.add_element(y(j), Y).unwrap();
    }
    for (x, row) in rows.iter().enumerate() {
        for (j, &z) in row.iter().enumerate() {
            s.insert_tuple(G_FN, vec![x as ElementId, y(j), y(z)]).unwrap();
        }
    }
    rebuild_g_family(&mut s);
    s
}

/// Keeps the first member of every isomorphism class.
pub(crate) fn dedupe_iso(items: Vec<Structure>, limits: &Limits) -> Vec<Structure> {
    let mut kept: Vec<Structure> = Vec::new();
    for s in items {
        let mut dup = false;
        for k in &kept {
            if isomorphic(k, &s, limits).expect("small search").is_some() {
                dup = true;
                break;
            }
        }
        if !dup {
            kept.push(s);
        }
    }
    kept
}

/// Every K1 structure with at most `max_size` elements, up to isomorphism.
pub fn enumerate_k1(max_size: usize) -> Vec<Structure> {
    let mut all = Vec::new();
    for k0 in enumerate_k0(max_size) {
        let base = k0.expand(knight_u_signature()).unwrap();
        let xs = base.elements_of_sort(X);
        for nu in 0..=max_size - base.len() {
            if nu == 0 && !xs.is_empty() {
                continue;
            }
            for f in functions(xs.len(), nu) {
                let mut s = base.clone();
                let first = s.fresh_id();
                for u in 0..nu {
                    s.add_element(first + u as ElementId, U).unwrap();
                }
                for (i, &x) in xs.iter().enumerate() {
                    s.insert_tuple(P_REL, vec![x, first + f[i] as ElementId]).unwrap();
                }
                all.push(s);
            }
        }
    }
    dedupe_iso(all, &Limits::default())
}

/// Every K0' structure with at most `max_size` elements, up to isomorphism.
pub fn enumerate_kprime0(max_size: usize) -> Vec<Structure> {
    let mut out = Vec::new();
    for k0 in enumerate_k0(max_size) {
        let base = k0.expand(knight_q_signature()).unwrap();
        let ys = base.order(Y).unwrap().to_vec();
        for q in 0..=ys.len() {
            let mut s = base.clone();
            for x in s.elements_of_sort(X) {
                s.insert_tuple(Q_REL, vec![x]).unwrap();
            }
            for &y in &ys[..q] {
                s.insert_tuple(Q_REL, vec![y]).unwrap();
            }
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knight::check::{check_k0, check_k1, check_relativized};

    #[test]
    fn small_counts() {
        // sizes 0..=2: empty, {x}, {x,x'}, {x,y}
        assert_eq!(enumerate_k0(2).len(), 4);
        for s in enumerate_k0(4) {
            assert!(check_k0(&s).unwrap().valid);
        }
    }

    #[test]
    fn expansions_are_members() {
        for s in enumerate_k1(3) {
            assert!(check_k1(&s).unwrap().valid);
        }
        for s in enumerate_kprime0(3) {
            assert!(check_relativized(&s).unwrap().valid);
        }
    }
}
