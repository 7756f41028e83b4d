use std::fmt::Write as _;

use super::JobPlan;

/// Pixels per millimeter.
const SCALE: f64 = 10.0;
const MARGIN: f64 = 20.0;
const GOLDEN_ANGLE: f64 = 137.507_764_050_037_86;

fn file_color(index: usize) -> String {
    format!("hsl({:.1},65%,70%)", (index as f64 * GOLDEN_ANGLE) % 360.0)
}

/// Layered top view: foam outline, hexagon cells colored by print file,
/// injection-order labels and body outlines. Y points up, as on the
/// machine.
pub fn render_preview(plan: &JobPlan) -> String {
    let foam = plan.machine.foam;
    let w = foam.width * SCALE + 2.0 * MARGIN;
    let h = foam.depth * SCALE + 2.0 * MARGIN;
    let px = |x: f64| MARGIN + x * SCALE;
    let py = |y: f64| MARGIN + (foam.depth - y) * SCALE;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    )
    .unwrap();
    writeln!(s, r#"<g id="foam">"#).unwrap();
    writeln!(
        s,
        r##"<rect class="foam" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#f5efe0" stroke="#555" stroke-width="1"/>"##,
        px(0.0),
        py(foam.depth),
        foam.width * SCALE,
        foam.depth * SCALE
    )
    .unwrap();
    writeln!(s, "</g>").unwrap();

    let mut cells = String::new();
    let mut labels = String::new();
    let mut order = 0usize;
    for (fi, f) in plan.files.iter().enumerate() {
        let grid = &plan.groups[f.group].grid;
        let color = file_color(fi);
        let font = (grid.hex_side() * SCALE * 0.7).clamp(2.0, 14.0);
        for col in &f.print.columns {
            order += 1;
            let pts: Vec<String> = grid
                .hexagon(col.cell)
                .iter()
                .map(|p| format!("{:.2},{:.2}", px(p[0]), py(p[1])))
                .collect();
            writeln!(
                cells,
                r##"<polygon class="cell" data-file="{}" data-q="{}" data-r="{}" points="{}" fill="{color}" stroke="#333" stroke-width="0.5"/>"##,
                fi + 1,
                col.cell.q,
                col.cell.r,
                pts.join(" ")
            )
            .unwrap();
            let [x, y] = grid.center(col.cell);
            writeln!(
                labels,
                r#"<text class="order" x="{:.2}" y="{:.2}" font-size="{font:.1}" text-anchor="middle" dominant-baseline="central">{order}</text>"#,
                px(x),
                py(y)
            )
            .unwrap();
        }
    }
    writeln!(s, r#"<g id="cells">"#).unwrap();
    s.push_str(&cells);
    writeln!(s, "</g>").unwrap();
    writeln!(s, r#"<g id="order" font-family="sans-serif">"#).unwrap();
    s.push_str(&labels);
    writeln!(s, "</g>").unwrap();

    writeln!(s, r#"<g id="silhouettes">"#).unwrap();
    for c in &plan.contours {
        let mut d = String::new();
        for (i, p) in c.points.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{:.2} {:.2} ", px(p[0]), py(p[1])).unwrap();
        }
        d.push('Z');
        writeln!(
            s,
            r##"<path class="silhouette" d="{d}" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}
