use std::fmt::Write;

use dde_circle::{Circle, EdgeMap};

/// Edge pixels in white on black with detected circles stroked in red.
pub fn overlay(edges: &EdgeMap, circles: &[Circle]) -> String {
    let (w, h) = (edges.width(), edges.height());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="black"/>"#);
    let _ = writeln!(s, r#"<g fill="white">"#);
    for &(x, y) in edges.points() {
        let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="1" height="1"/>"#);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g fill="none" stroke="red" stroke-width="1">"#);
    for c in circles {
        // Pixel (x, y) covers [x, x+1), so centers shift by half a pixel.
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}"/>"#,
            c.x0 + 0.5,
            c.y0 + 0.5,
            c.r
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
