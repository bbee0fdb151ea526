//! Planar polygon clipping plus a small incremental convex hull for the
//! low-dimensional (k ≤ 4) volume computations.

use nalgebra::DMatrix;

/// Clip a convex polygon against the half-plane `n·x ≤ bound`.
/// Sutherland-Hodgman, one half-plane pass.
pub fn clip_halfplane(poly: &[[f64; 2]], n: [f64; 2], bound: f64) -> Vec<[f64; 2]> {
    if poly.is_empty() {
        return Vec::new();
    }
    let len = poly.len();
    let mut out = Vec::with_capacity(len + 1);
    for i in 0..len {
        let s = poly[i];
        let e = poly[(i + 1) % len];
        let sd = n[0] * s[0] + n[1] * s[1] - bound;
        let ed = n[0] * e[0] + n[1] * e[1] - bound;
        let s_in = sd <= 0.0;
        let e_in = ed <= 0.0;
        match (s_in, e_in) {
            (true, true) => out.push(e),
            (true, false) | (false, true) => {
                let denom = sd - ed;
                if denom.abs() > 1e-300 {
                    let t = sd / denom;
                    out.push([s[0] + (e[0] - s[0]) * t, s[1] + (e[1] - s[1]) * t]);
                }
                if e_in {
                    out.push(e);
                }
            }
            (false, false) => {}
        }
    }
    out
}

/// Unsigned area by the shoelace formula.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % poly.len()];
        acc += x0 * y1 - x1 * y0;
    }
    acc.abs() / 2.0
}

/// Convex hull of planar points, counterclockwise (monotone chain).
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Volume of the convex hull of `points` in dimension k ≤ 4, by incremental
/// (beneath-beyond) construction with simplicial facets and a fan
/// decomposition from an interior point. Returns `None` when the point set
/// is not full-dimensional.
pub fn convex_hull_volume(points: &[Vec<f64>]) -> Option<f64> {
    let k = points.first()?.len();
    match k {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            (hi > lo).then(|| hi - lo)
        }
        2 => {
            let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
            let hull = convex_hull_2d(&pts);
            (hull.len() >= 3).then(|| polygon_area(&hull))
        }
        3 | 4 => hull_volume_nd(points, k),
        _ => None,
    }
}

struct Facet {
    verts: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
}

fn hull_volume_nd(points: &[Vec<f64>], k: usize) -> Option<f64> {
    let simplex = initial_simplex(points, k)?;
    let interior: Vec<f64> = (0..k)
        .map(|d| simplex.iter().map(|&i| points[i][d]).sum::<f64>() / (k as f64 + 1.0))
        .collect();

    let mut facets: Vec<Facet> = Vec::new();
    for drop in 0..=k {
        let verts: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|&(pos, _)| pos != drop)
            .map(|(_, &v)| v)
            .collect();
        facets.push(make_facet(points, verts, &interior)?);
    }

    let scale = points
        .iter()
        .flat_map(|p| p.iter().map(|v| v.abs()))
        .fold(1.0, f64::max);
    let tol = 1e-12 * scale;

    for p in 0..points.len() {
        if simplex.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = (0..facets.len())
            .filter(|&f| dist(&facets[f], &points[p]) > tol)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // Horizon ridges occur exactly once among the visible facets.
        let mut ridge_count: std::collections::HashMap<Vec<usize>, usize> =
            std::collections::HashMap::new();
        for &f in &visible {
            for drop in 0..k {
                let mut ridge: Vec<usize> = facets[f]
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(pos, _)| pos != drop)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                *ridge_count.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut keep: Vec<Facet> = Vec::new();
        for (i, f) in facets.drain(..).enumerate() {
            if !visible.contains(&i) {
                keep.push(f);
            }
        }
        facets = keep;
        for (ridge, count) in ridge_count {
            if count == 1 {
                let mut verts = ridge;
                verts.push(p);
                facets.push(make_facet(points, verts, &interior)?);
            }
        }
    }

    let mut volume = 0.0;
    for f in &facets {
        let mut m = DMatrix::zeros(k, k);
        for (col, &v) in f.verts.iter().enumerate() {
            for row in 0..k {
                m[(row, col)] = points[v][row] - interior[row];
            }
        }
        volume += m.determinant().abs();
    }
    let factorial: f64 = (1..=k).product::<usize>() as f64;
    Some(volume / factorial)
}

/// Greedy choice of k+1 affinely independent points (Gram-Schmidt residual
/// maximization); `None` when the set is not full-dimensional.
fn initial_simplex(points: &[Vec<f64>], k: usize) -> Option<Vec<usize>> {
    if points.len() < k + 1 {
        return None;
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter().map(|v| v.abs()))
        .fold(1.0, f64::max);
    let mut chosen = vec![0usize];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < k {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (i, p) in points.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut r: Vec<f64> = p.iter().zip(&points[chosen[0]]).map(|(a, b)| a - b).collect();
            for b in &basis {
                let proj: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
            let n: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if best.as_ref().map(|(_, bn, _)| n > *bn).unwrap_or(true) {
                best = Some((i, n, r));
            }
        }
        let (i, n, mut r) = best?;
        if n < 1e-10 * scale {
            return None;
        }
        for x in r.iter_mut() {
            *x /= n;
        }
        chosen.push(i);
        basis.push(r);
    }
    Some(chosen)
}

fn dist(f: &Facet, p: &[f64]) -> f64 {
    f.normal.iter().zip(p).map(|(n, x)| n * x).sum::<f64>() - f.offset
}

fn make_facet(points: &[Vec<f64>], verts: Vec<usize>, interior: &[f64]) -> Option<Facet> {
    let k = interior.len();
    let base = &points[verts[0]];
    // Padded square so the SVD exposes the full right null space.
    let m = DMatrix::from_fn(k, k, |i, j| {
        if i < k - 1 {
            points[verts[i + 1]][j] - base[j]
        } else {
            0.0
        }
    });
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let normal: Vec<f64> = (0..k).map(|j| v_t[(k - 1, j)]).collect();
    let nn: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nn < 1e-14 {
        return None;
    }
    let mut normal: Vec<f64> = normal.iter().map(|v| v / nn).collect();
    let mut offset: f64 = normal.iter().zip(base.iter()).map(|(n, x)| n * x).sum();
    let side: f64 = normal.iter().zip(interior).map(|(n, x)| n * x).sum::<f64>() - offset;
    if side > 0.0 {
        for v in normal.iter_mut() {
            *v = -*v;
        }
        offset = -offset;
    }
    Some(Facet {
        verts,
        normal,
        offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_square_to_triangle() {
        let square = vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let half = clip_halfplane(&square, [1.0, 1.0], 0.0);
        assert!((polygon_area(&half) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn area_of_unit_square() {
        let square = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!((polygon_area(&square) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hull_2d_filters_interior_points() {
        let pts = vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 2.0],
            [0.0, 2.0],
            [1.0, 1.0],
        ];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 4);
        assert!((polygon_area(&hull) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cross_polytope_volumes() {
        // betaᵏ has volume 2ᵏ/k!.
        let mut pts3 = Vec::new();
        for i in 0..3 {
            for s in [-1.0, 1.0] {
                let mut p = vec![0.0; 3];
                p[i] = s;
                pts3.push(p);
            }
        }
        let v3 = convex_hull_volume(&pts3).unwrap();
        assert!((v3 - 8.0 / 6.0).abs() < 1e-10, "3d cross polytope: {v3}");

        let mut pts4 = Vec::new();
        for i in 0..4 {
            for s in [-1.0, 1.0] {
                let mut p = vec![0.0; 4];
                p[i] = s;
                pts4.push(p);
            }
        }
        let v4 = convex_hull_volume(&pts4).unwrap();
        assert!((v4 - 16.0 / 24.0).abs() < 1e-10, "4d cross polytope: {v4}");
    }

    #[test]
    fn hypercube_volume() {
        let mut pts = Vec::new();
        for mask in 0..16u32 {
            pts.push(
                (0..4)
                    .map(|b| if mask >> b & 1 == 1 { 1.0 } else { -1.0 })
                    .collect::<Vec<f64>>(),
            );
        }
        let v = convex_hull_volume(&pts).unwrap();
        assert!((v - 16.0).abs() < 1e-9, "4-cube volume: {v}");
    }

    #[test]
    fn degenerate_set_rejected() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
        assert!(convex_hull_volume(&pts).is_none());
    }
}
