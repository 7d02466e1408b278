//! Deterministic SVG line plots.
//!
//! Every polyline carries its data-space bounding box in a `data-bounds`
//! attribute (`xmin ymin xmax ymax`), which keeps plots checkable without
//! parsing pixel coordinates back.

use std::fmt::Write as _;

use crate::boundary::BranchKind;
use crate::continuation::Branch;
use crate::dynamics::ReducedState;
use crate::periodic::Trajectory3D;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }

    pub fn bounds(&self) -> Option<[f64; 4]> {
        bounds(self.points.iter())
    }
}

/// A labelled marker drawn as a small circle.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub label: String,
    pub at: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Use the same scale on both axes.
    pub equal_aspect: bool,
}

fn bounds<'a>(pts: impl Iterator<Item = &'a (f64, f64)>) -> Option<[f64; 4]> {
    let mut b: Option<[f64; 4]> = None;
    for &(x, y) in pts {
        if !(x.is_finite() && y.is_finite()) {
            continue;
        }
        b = Some(match b {
            None => [x, y, x, y],
            Some([x0, y0, x1, y1]) => [x0.min(x), y0.min(y), x1.max(x), y1.max(y)],
        });
    }
    b
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Figure {
    pub fn render(&self) -> String {
        let all = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .chain(self.markers.iter().map(|m| &m.at));
        let [mut x0, mut y0, mut x1, mut y1] = bounds(all).unwrap_or([0.0, 0.0, 1.0, 1.0]);
        let pad = |lo: &mut f64, hi: &mut f64| {
            let span = *hi - *lo;
            let extra = if span > 0.0 { 0.05 * span } else { 0.5 * lo.abs().max(1.0) };
            *lo -= extra;
            *hi += extra;
        };
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
        let (mut sx, mut sy) = (pw / (x1 - x0), ph / (y1 - y0));
        if self.equal_aspect {
            let s = sx.min(sy);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            sx = s;
            sy = s;
            x0 = cx - 0.5 * pw / s;
            x1 = cx + 0.5 * pw / s;
            y0 = cy - 0.5 * ph / s;
            y1 = cy + 0.5 * ph / s;
        }
        let px = |x: f64| MARGIN + (x - x0) * sx;
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) * sy;

        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(
            out,
            r##"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
        )
        .unwrap();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                px(xv),
                HEIGHT - MARGIN + 16.0,
                tick(xv)
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN - 6.0,
                py(yv) + 4.0,
                tick(yv)
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        )
        .unwrap();

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let b = s.bounds().unwrap_or([f64::NAN; 4]);
            let mut pts = String::new();
            for &(x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                if !pts.is_empty() {
                    pts.push(' ');
                }
                write!(pts, "{:.2},{:.2}", px(x), py(y)).unwrap();
            }
            writeln!(
                out,
                r#"<polyline class="series" data-label="{}" data-bounds="{:e} {:e} {:e} {:e}" fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>"#,
                escape(&s.label),
                b[0],
                b[1],
                b[2],
                b[3]
            )
            .unwrap();
            let ly = MARGIN + 16.0 + 16.0 * i as f64;
            writeln!(
                out,
                r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" fill="{color}">{}</text>"#,
                WIDTH - MARGIN - 8.0,
                escape(&s.label)
            )
            .unwrap();
        }
        for m in &self.markers {
            let (x, y) = (px(m.at.0), py(m.at.1));
            writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="black"/>"#).unwrap();
            writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 6.0, y - 6.0, escape(&m.label)).unwrap();
        }
        out.push_str("</svg>\n");
        out
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// `F(t)` and `R(t)` overlaid.
pub fn fr_plot(states: &[ReducedState], title: &str) -> String {
    Figure {
        title: title.to_string(),
        x_label: "t".into(),
        y_label: "F, R".into(),
        series: vec![
            Series::new("F", states.iter().map(|s| (s.t, s.f())).collect()),
            Series::new("R", states.iter().map(|s| (s.t, s.r())).collect()),
        ],
        ..Figure::default()
    }
    .render()
}

/// Projection of the three body paths on the x-y plane.
pub fn xy_plot(traj: &Trajectory3D, title: &str) -> String {
    let body = |f: fn(&crate::dynamics::BodyPositions) -> [f64; 3]| -> Vec<(f64, f64)> {
        traj.samples.iter().map(|(_, p)| {
            let q = f(p);
            (q[0], q[1])
        })
        .collect()
    };
    Figure {
        title: title.to_string(),
        x_label: "x".into(),
        y_label: "y".into(),
        series: vec![
            Series::new("body 2", body(|p| p.body2)),
            Series::new("body 3", body(|p| p.body3)),
            Series::new("body 1", body(|p| p.body1)),
        ],
        equal_aspect: true,
        ..Figure::default()
    }
    .render()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchView {
    /// `b` against `a`.
    Ab,
    /// Oblique projection of `(T, a, b)`.
    Axonometric,
}

/// Maps `(T, a, b)` to the plane: `a` and `b` run along the two lower
/// diagonals, `T` straight up.
pub fn axonometric(t: f64, a: f64, b: f64) -> (f64, f64) {
    let (s, c) = (std::f64::consts::FRAC_PI_6.sin(), std::f64::consts::FRAC_PI_6.cos());
    ((a - b) * c, t * 0.5 - (a + b) * s)
}

/// One or more branches, with optional named markers in `(T, a, b)`.
pub fn branch_plot(branches: &[&Branch], markers: &[(&str, [f64; 3])], view: BranchView, title: &str) -> String {
    let project = |c: [f64; 3]| match view {
        BranchView::Ab => (c[1], c[2]),
        BranchView::Axonometric => axonometric(c[0], c[1], c[2]),
    };
    let series = branches
        .iter()
        .map(|br| {
            let label = match br.kind {
                BranchKind::OddEven => "odd/even",
                BranchKind::Odd => "odd",
            };
            Series::new(label, br.points.iter().map(|p| project([p.period(), p.a, p.b])).collect())
        })
        .collect();
    let (x_label, y_label) = match view {
        BranchView::Ab => ("a", "b"),
        BranchView::Axonometric => ("(a - b) cos 30°", "T/2 - (a + b)/2"),
    };
    Figure {
        title: title.to_string(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        series,
        markers: markers
            .iter()
            .map(|(l, c)| Marker {
                label: l.to_string(),
                at: project(*c),
            })
            .collect(),
        equal_aspect: view == BranchView::Ab,
    }
    .render()
}

/// Reads back the `data-bounds` of every series, in document order.
pub fn series_bounds(svg: &str) -> Vec<(String, [f64; 4])> {
    let mut out = Vec::new();
    for chunk in svg.split("<polyline").skip(1) {
        let attr = |name: &str| -> Option<&str> {
            let start = chunk.find(&format!("{name}=\""))? + name.len() + 2;
            let end = chunk[start..].find('"')? + start;
            Some(&chunk[start..end])
        };
        let (Some(label), Some(b)) = (attr("data-label"), attr("data-bounds")) else {
            continue;
        };
        let v: Vec<f64> = b.split(' ').filter_map(|s| s.parse().ok()).collect();
        if v.len() == 4 {
            out.push((label.to_string(), [v[0], v[1], v[2], v[3]]));
        }
    }
    out
}
