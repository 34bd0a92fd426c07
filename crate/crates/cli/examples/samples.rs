//! Writes the sample inputs under `data/` (or the directory given as argument).

use std::collections::BTreeSet;
use std::path::PathBuf;

use forge_core::knight::amalgam::rebuild_g_family;
use forge_core::knight::{knight_signature, G_FAMILY, G_FN, X, Y};
use forge_core::merger::projection_with_fibers;
use forge_core::structure::{structure_to_json, ElementId, Structure};

fn knight(xs: &[ElementId], ys: &[ElementId], g: &[[ElementId; 3]]) -> Structure {
    let mut s = Structure::new(knight_signature());
    for &x in xs {
        s.add_element(x, X).unwrap();
    }
    for &y in ys {
        s.add_element(y, Y).unwrap();
    }
    for t in g {
        s.insert_tuple(G_FN, t.to_vec()).unwrap();
    }
    rebuild_g_family(&mut s);
    s
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let put = |name: &str, s: &Structure| std::fs::write(dir.join(name), structure_to_json(s)).unwrap();

    let b0 = knight(&[1, 2], &[3, 4], &[[1, 3, 3], [2, 3, 3], [1, 4, 3], [2, 4, 4]]);
    put("b0.json", &b0);
    let mut broken = b0.clone();
    broken.remove_tuple(G_FAMILY, &[1, 4, 3]);
    put("b0_broken.json", &broken);

    put("empty.json", &Structure::new(knight_signature()));
    put("single_b.json", &knight(&[0], &[1], &[[0, 1, 1]]));
    put("single_c.json", &knight(&[0], &[1], &[[0, 1, 1]]));
    put("b0_xy.json", &b0.induced(&BTreeSet::from([1, 3])));
    put("b0_grow.json", &knight(&[1, 6], &[3, 5], &[[1, 3, 3], [6, 3, 3], [1, 5, 3], [6, 5, 5]]));

    let host = projection_with_fibers(&[1, 2]);
    put("projection_1_2.json", &host);
    put("projection_3_1.json", &projection_with_fibers(&[3, 1]));
    let glue: Vec<String> = host
        .elements_of_sort("B")
        .into_iter()
        .zip(b0.elements_of_sort(X))
        .map(|(h, g)| format!("[{h}, {g}]"))
        .collect();
    std::fs::write(
        dir.join("merge_spec.json"),
        format!(
            "{{\n  \"host\": \"projection_1_2.json\",\n  \"guest\": \"b0.json\",\n  \"u\": \"B\",\n  \"q\": \"X\",\n  \"glue\": [{}]\n}}\n",
            glue.join(", ")
        ),
    )
    .unwrap();
}
