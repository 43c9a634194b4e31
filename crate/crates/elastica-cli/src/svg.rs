//! Minimal hand-rolled SVG: equal-aspect view of curves over the obstacle
//! region. Coordinates are fixed-precision so identical runs emit identical
//! bytes.

use elastica::geometry::Obstacle;

const CANVAS: f64 = 640.0;
const PAD_FRAC: f64 = 0.08;
const GRAPH_SAMPLES: usize = 256;

pub struct Figure {
    pub curves: Vec<Vec<[f64; 2]>>,
    pub obstacle: Option<Obstacle>,
    /// Rhomb constraint: the forbidden region is the band |y| < psi(x)
    /// instead of everything below the graph.
    pub mirrored: bool,
}

pub fn render(fig: &Figure) -> String {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut grow = |p: [f64; 2]| {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    };
    for c in &fig.curves {
        for &p in c {
            grow(p);
        }
    }
    // the pinned chord anchors the frame even for curves far from it
    grow([0.0, 0.0]);
    grow([1.0, 0.0]);
    if let Some(obs) = &fig.obstacle {
        let (ax, ay) = obs.apex();
        grow([ax, ay]);
        if fig.mirrored {
            grow([ax, -ay]);
        }
    }

    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let pad = PAD_FRAC * span;
    let (x0, y0, x1, y1) = (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad);
    let scale = CANVAS / span;
    let w = (x1 - x0) * scale;
    let h = (y1 - y0) * scale;
    // world y up, svg y down
    let map = move |p: [f64; 2]| [(p[0] - x0) * scale, (y1 - p[1]) * scale];

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" \
         viewBox=\"0 0 {w:.2} {h:.2}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if let Some(obs) = &fig.obstacle {
        let xs: Vec<f64> = (0..=GRAPH_SAMPLES)
            .map(|i| x0 + (x1 - x0) * i as f64 / GRAPH_SAMPLES as f64)
            .collect();
        let mut poly: Vec<[f64; 2]> = Vec::new();
        if fig.mirrored {
            // band between psi and -psi where psi > 0
            for &x in &xs {
                poly.push([x, obs.psi(x).max(y0)]);
            }
            for &x in xs.iter().rev() {
                poly.push([x, (-obs.psi(x)).min(y1)]);
            }
        } else {
            poly.push([x0, y0]);
            for &x in &xs {
                poly.push([x, obs.psi(x).max(y0)]);
            }
            poly.push([x1, y0]);
        }
        out.push_str("<polygon fill=\"#d4dbe6\" stroke=\"none\" points=\"");
        for (i, &p) in poly.iter().enumerate() {
            let q = map(p);
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{:.2},{:.2}", q[0], q[1]));
        }
        out.push_str("\"/>\n");
    }

    // pinned chord for reference
    let a = map([0.0, 0.0]);
    let b = map([1.0, 0.0]);
    out.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
         stroke=\"#b5b5b5\" stroke-width=\"1\" stroke-dasharray=\"4 4\"/>\n",
        a[0], a[1], b[0], b[1]
    ));

    for c in &fig.curves {
        out.push_str("<polyline fill=\"none\" stroke=\"#1a466b\" stroke-width=\"2\" points=\"");
        for (i, &p) in c.iter().enumerate() {
            let q = map(p);
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{:.2},{:.2}", q[0], q[1]));
        }
        out.push_str("\"/>\n");
    }
    for p in [a, b] {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1a466b\"/>\n",
            p[0], p[1]
        ));
    }
    out.push_str("</svg>\n");
    out
}
