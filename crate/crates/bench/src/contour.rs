//! Marching-squares contour segments of a function sampled on a square grid.

/// Line segment `(x0, y0) – (x1, y1)` on the level curve.
pub type Segment = [f64; 4];

/// Segments of `{f = level}` for values `f[i][j]` at `(xs[i], ys[j])`.
/// Saddle cells are resolved with the cell-centre average.
pub fn contour_segments(xs: &[f64], ys: &[f64], f: &[Vec<f64>], level: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            // corners counter-clockwise from the lower left
            let corners = [
                (xs[i], ys[j], f[i][j]),
                (xs[i + 1], ys[j], f[i + 1][j]),
                (xs[i + 1], ys[j + 1], f[i + 1][j + 1]),
                (xs[i], ys[j + 1], f[i][j + 1]),
            ];
            let mut hits = Vec::with_capacity(4);
            for e in 0..4 {
                let (ax, ay, av) = corners[e];
                let (bx, by, bv) = corners[(e + 1) % 4];
                if (av >= level) != (bv >= level) {
                    let t = (level - av) / (bv - av);
                    hits.push([ax + t * (bx - ax), ay + t * (by - ay)]);
                }
            }
            match hits.len() {
                2 => out.push([hits[0][0], hits[0][1], hits[1][0], hits[1][1]]),
                4 => {
                    let centre = corners.iter().map(|c| c.2).sum::<f64>() / 4.0;
                    // hit e lies between corners e and e+1; pairing (e, e+1)
                    // cuts off corner e+1. Corners on the centre's side stay
                    // connected, so the other two are cut off.
                    let (a, b) = if (centre >= level) == (corners[0].2 >= level) {
                        (0, 2)
                    } else {
                        (1, 3)
                    };
                    out.push([
                        hits[a][0],
                        hits[a][1],
                        hits[(a + 1) % 4][0],
                        hits[(a + 1) % 4][1],
                    ]);
                    out.push([
                        hits[b][0],
                        hits[b][1],
                        hits[(b + 1) % 4][0],
                        hits[(b + 1) % 4][1],
                    ]);
                }
                _ => {}
            }
        }
    }
    out
}
