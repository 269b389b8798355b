//! Minimal deterministic SVG figures.

use std::fmt::Write;

use pcmap::analysis::Analysis;
use pcmap::gapflow::GapAtlas;
use pcmap::rational::{to_f64, Rational};
use pcmap::PiecewiseAffineContraction;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

struct Canvas {
    body: String,
    height: f64,
}

impl Canvas {
    fn new(height: f64) -> Self {
        Self { body: String::new(), height }
    }

    fn px(x: f64) -> f64 {
        MARGIN + SIZE * x
    }

    fn py(y: f64) -> f64 {
        MARGIN + SIZE * (1.0 - y)
    }

    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" {style}/>"#,
            Self::px(x0),
            Self::py(y0),
            Self::px(x1),
            Self::py(y1)
        );
    }

    fn dot(&mut self, x: f64, y: f64, filled: bool) {
        let fill = if filled { "black" } else { "white" };
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="{fill}" stroke="black"/>"#,
            Self::px(x),
            Self::py(y)
        );
    }

    fn rect(&mut self, x0: f64, x1: f64, top: f64, height: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.3}" y="{top:.3}" width="{:.3}" height="{height:.3}" fill="{fill}"/>"#,
            Self::px(x0),
            SIZE * (x1 - x0)
        );
    }

    fn frame(&mut self) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
        );
    }

    fn finish(self, title: &str) -> String {
        let w = 2.0 * MARGIN + SIZE;
        format!(
            concat!(
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                "\n<title>{title}</title>\n",
                r#"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" stroke="black"/></pattern></defs>"#,
                "\n{body}</svg>\n"
            ),
            w = w,
            h = self.height,
            title = title,
            body = self.body
        )
    }
}

fn draw_graph(c: &mut Canvas, map: &PiecewiseAffineContraction) {
    c.frame();
    c.line(0.0, 0.0, 1.0, 1.0, r#"stroke="gray" stroke-dasharray="4 4""#);
    for p in map.pieces() {
        let (x0, x1) = (to_f64(&p.domain.lo), to_f64(&p.domain.hi));
        let (y0, y1) = (to_f64(&p.apply(&p.domain.lo)), to_f64(&p.apply(&p.domain.hi)));
        c.line(x0, y0, x1, y1, r#"stroke="black" stroke-width="2""#);
        c.dot(x0, y0, p.domain.lo_closed);
        c.dot(x1, y1, p.domain.hi_closed);
    }
}

/// Pieces with open or closed endpoint markers, over the diagonal.
pub fn graph(map: &PiecewiseAffineContraction, title: &str) -> String {
    let mut c = Canvas::new(2.0 * MARGIN + SIZE);
    draw_graph(&mut c, map);
    c.finish(title)
}

/// Orbit staircase of `x0` over the graph, iterated exactly.
pub fn cobweb(map: &PiecewiseAffineContraction, x0: &Rational, steps: usize, title: &str) -> pcmap::Result<String> {
    let mut c = Canvas::new(2.0 * MARGIN + SIZE);
    draw_graph(&mut c, map);
    let mut x = x0.clone();
    let mut prev = (to_f64(&x), 0.0);
    for _ in 0..steps {
        let y = map.evaluate(&x)?;
        let (xf, yf) = (to_f64(&x), to_f64(&y));
        c.line(prev.0, prev.1, xf, yf, r#"stroke="red""#);
        c.line(xf, yf, yf, yf, r#"stroke="red""#);
        prev = (yf, yf);
        x = y;
    }
    Ok(c.finish(title))
}

/// Graph with a band underneath coloring each stable manifold; residual hatched.
pub fn basins(map: &PiecewiseAffineContraction, analysis: &Analysis, title: &str) -> String {
    let band_top = 2.0 * MARGIN + SIZE - 10.0;
    let mut c = Canvas::new(band_top + 24.0 + MARGIN);
    draw_graph(&mut c, map);
    for (k, w) in analysis.decomposition.manifolds.iter().enumerate() {
        for j in &w.open_intervals {
            c.rect(to_f64(&j.lo), to_f64(&j.hi), band_top, 24.0, PALETTE[k % PALETTE.len()]);
        }
    }
    for r in &analysis.decomposition.residual {
        c.rect(to_f64(&r.interval.lo), to_f64(&r.interval.hi), band_top, 24.0, "url(#hatch)");
    }
    for o in analysis.census.degenerate() {
        for p in &o.points {
            let x = Canvas::px(to_f64(p));
            let _ = writeln!(
                c.body,
                r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="black" stroke-width="2"/>"#,
                band_top - 4.0,
                band_top + 28.0
            );
        }
    }
    c.finish(title)
}

/// One row per depth `ℓ`, one rectangle per layer `f^ℓ(F_j)` colored by `j`.
pub fn gaps(atlas: &GapAtlas, rows: usize, title: &str) -> String {
    let rows = rows.min(atlas.depth + 1);
    let row_h = (SIZE / rows.max(1) as f64).min(12.0);
    let mut c = Canvas::new(2.0 * MARGIN + row_h * rows as f64);
    for (j, layers) in atlas.layers.iter().enumerate() {
        for (l, layer) in layers.iter().take(rows).enumerate() {
            let top = MARGIN + row_h * l as f64;
            c.rect(to_f64(&layer.interval.lo), to_f64(&layer.interval.hi), top, row_h - 1.0, PALETTE[j % PALETTE.len()]);
        }
    }
    c.finish(title)
}
