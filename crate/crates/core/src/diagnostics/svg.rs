use std::fmt::Write;

const CELL: usize = 24;
const MARGIN: usize = 80;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Grayscale heatmap of attention weights: one row per target token, one
/// column per source token, darker for larger weights.
pub fn attention_svg<S: AsRef<str>>(rows: &[Vec<f64>], source: &[S], target: &[S]) -> String {
    let cols = source.len();
    let width = MARGIN + cols * CELL;
    let height = MARGIN + rows.len() * CELL;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"#
    );
    for (j, tok) in source.iter().enumerate() {
        let x = MARGIN + j * CELL + CELL / 2;
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" transform="rotate(-60 {x} {})">{}</text>"#,
            MARGIN - 6,
            MARGIN - 6,
            escape(tok.as_ref())
        );
    }
    for (i, row) in rows.iter().enumerate() {
        let y = MARGIN + i * CELL;
        let label = target.get(i).map_or("", |t| t.as_ref());
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN - 6,
            y + CELL / 2 + 4,
            escape(label)
        );
        for (j, &w) in row.iter().take(cols).enumerate() {
            let shade = (255.0 * (1.0 - w.clamp(0.0, 1.0))).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({shade},{shade},{shade})"><title>{w:.4}</title></rect>"#,
                MARGIN + j * CELL
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
