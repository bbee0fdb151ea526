//! Deterministic SVG rendering of a rank-2 Lyapunov arrangement: hyperplanes
//! as lines through the origin, chambers labeled by sign vector at their
//! representatives. Byte-identical output for identical inputs.

use crate::chambers::{Chamber, HyperplaneArrangement};

#[derive(Debug)]
pub struct RankNotTwo(pub usize);

impl std::fmt::Display for RankNotTwo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RankNotTwo: chamber rendering needs k = 2, got k = {}", self.0)
    }
}

const SIZE: f64 = 600.0;
const SCALE: f64 = 250.0;

fn px(x: f64) -> String {
    format!("{:.2}", SIZE / 2.0 + SCALE * x)
}

fn py(y: f64) -> String {
    // SVG y axis points down.
    format!("{:.2}", SIZE / 2.0 - SCALE * y)
}

pub fn emit_svg_chambers(
    arr: &HyperplaneArrangement,
    chambers: &[Chamber],
) -> Result<String, RankNotTwo> {
    if arr.rank != 2 {
        return Err(RankNotTwo(arr.rank));
    }
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" \
         viewBox=\"0 0 {s} {s}\">\n",
        s = SIZE as u64
    ));
    out.push_str(&format!(
        "  <rect width=\"{s}\" height=\"{s}\" fill=\"#fcfcfa\"/>\n",
        s = SIZE as u64
    ));
    // Light axes for orientation.
    out.push_str(&format!(
        "  <line x1=\"0\" y1=\"{m}\" x2=\"{s}\" y2=\"{m}\" stroke=\"#ddd\" stroke-width=\"1\"/>\n",
        m = (SIZE / 2.0) as u64,
        s = SIZE as u64
    ));
    out.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"0\" x2=\"{m}\" y2=\"{s}\" stroke=\"#ddd\" stroke-width=\"1\"/>\n",
        m = (SIZE / 2.0) as u64,
        s = SIZE as u64
    ));
    // Hyperplanes: ker(n·t) is the line through 0 along (-n_y, n_x).
    for n in &arr.normals {
        let dir = [-n[1], n[0]];
        let r = 1.15;
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#445\" stroke-width=\"1.5\"/>\n",
            px(-r * dir[0]),
            py(-r * dir[1]),
            px(r * dir[0]),
            py(r * dir[1])
        ));
    }
    for c in chambers {
        let norm = (c.representative[0].powi(2) + c.representative[1].powi(2)).sqrt();
        let label_at = [
            0.82 * c.representative[0] / norm,
            0.82 * c.representative[1] / norm,
        ];
        let label: String = c
            .sign_vector
            .iter()
            .map(|&s| if s > 0 { '+' } else { '\u{2212}' })
            .collect();
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"15\" \
             fill=\"#943\" text-anchor=\"middle\">{}</text>\n",
            px(label_at[0]),
            py(label_at[1]),
            label
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
