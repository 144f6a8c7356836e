use super::layout::{ComponentLayout, LayoutMap};

/// Space between packed component cells, in cell units.
const GAP: f64 = 0.5;

/// Scales `coords` into the unit square, preserving aspect ratio and
/// centering the shorter side. A single point lands at `(0.5, 0.5)`.
pub fn normalize_unit(coords: &[[f64; 2]]) -> Vec<[f64; 2]> {
    fit(coords, 1.0)
}

/// Fits `coords` into a `side x side` box anchored at the origin.
fn fit(coords: &[[f64; 2]], side: f64) -> Vec<[f64; 2]> {
    if coords.is_empty() {
        return Vec::new();
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in coords {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = [hi[0] - lo[0], hi[1] - lo[1]];
    let span = extent[0].max(extent[1]);
    coords
        .iter()
        .map(|p| {
            let mut q = [0.0; 2];
            for a in 0..2 {
                q[a] = if span > 0.0 {
                    ((p[a] - lo[a]) / span + (1.0 - extent[a] / span) / 2.0) * side
                } else {
                    side / 2.0
                };
            }
            q
        })
        .collect()
}

/// Combines per-component layouts into one unit-square map.
///
/// Each component is fitted into a square cell with side
/// `sqrt(vertex count)`. Cells are shelf-packed left to right, largest
/// first (ties keep input order), then the whole drawing is renormalized.
pub fn pack_components(layouts: &[ComponentLayout]) -> LayoutMap {
    let n: usize = layouts.iter().map(|l| l.vertices.len()).sum();
    let mut order: Vec<usize> = (0..layouts.len()).collect();
    order.sort_by(|&a, &b| layouts[b].vertices.len().cmp(&layouts[a].vertices.len()));

    let side = |l: &ComponentLayout| (l.vertices.len() as f64).sqrt();
    let area: f64 = layouts.iter().map(|l| (side(l) + GAP).powi(2)).sum();
    // a shelf about twice as wide as tall keeps pairs side by side
    let width = order
        .first()
        .map_or(0.0, |&i| side(&layouts[i]))
        .max((2.0 * area).sqrt());

    let mut coords = vec![[0.0; 2]; n];
    let (mut x, mut y, mut shelf) = (0.0, 0.0, 0.0);
    for &i in &order {
        let l = &layouts[i];
        let s = side(l);
        if x > 0.0 && x + s > width {
            y += shelf + GAP;
            x = 0.0;
            shelf = 0.0;
        }
        for (k, p) in fit(&l.coords, s).into_iter().enumerate() {
            coords[l.vertices[k]] = [x + p[0], y + p[1]];
        }
        x += s + GAP;
        shelf = f64::max(shelf, s);
    }

    LayoutMap {
        coords: normalize_unit(&coords),
        final_stress: layouts.iter().map(|l| l.stress).sum(),
        converged: layouts.iter().all(|l| l.converged),
        iterations: layouts.iter().map(|l| l.iterations).sum(),
    }
}
