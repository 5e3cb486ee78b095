//! Static SVG rendering of a route. Output is byte-identical for identical
//! inputs.

use std::fmt::Write;
use std::path::Path;

use crate::error::Result;
use crate::model::{evaluate_route, Route};
use crate::scenario::{NodeId, Point, Scenario};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 50.0;
const TITLE_BAND: f64 = 30.0;

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: &[Point]) -> Frame {
        let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
        Frame {
            min_x,
            max_y,
            scale: (SIZE - 2.0 * MARGIN - TITLE_BAND) / span,
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min_x) * self.scale,
            MARGIN + TITLE_BAND + (self.max_y - p.y) * self.scale,
        )
    }
}

pub fn render_route_svg(scenario: &Scenario, route: &Route) -> Result<String> {
    let profile = evaluate_route(scenario, route)?;
    let mut points = vec![scenario.data_center()];
    points.extend(scenario.nodes().iter().map(|n| n.position));
    let frame = Frame::fit(&points);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let title = format!("UAV route, N = {}, max AoI \u{3a9} = {:.3} s", scenario.n(), profile.max_aoi);
    let _ = writeln!(svg, "<title>{title}</title>");
    svg.push_str(concat!(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">",
        "<path d=\"M0,0 L10,5 L0,10 z\" fill=\"#1f77b4\"/></marker></defs>\n"
    ));
    let _ = writeln!(svg, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        SIZE / 2.0,
        MARGIN * 0.6
    );

    svg.push_str("<g stroke=\"#1f77b4\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\">\n");
    for leg in route.sequence().windows(2) {
        let (x1, y1) = frame.map(scenario.position(leg[0]));
        let (x2, y2) = frame.map(scenario.position(leg[1]));
        let _ = writeln!(svg, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    svg.push_str("</g>\n");

    svg.push_str("<g font-family=\"sans-serif\" font-size=\"10\">\n");
    for id in 0..=scenario.n() {
        let id = NodeId(id);
        let (cx, cy) = frame.map(scenario.position(id));
        let (r, fill) = if id.is_depot() { (8.0, "#d62728") } else { (4.0, "#2ca02c") };
        let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{fill}"/>"#);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{id}</text>"#, cx + 6.0, cy - 6.0);
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

/// Writes the route plot to `path`: sensor nodes and the depot as circles
/// (the depot larger and red), legs as arrows, and the max AoI in the title.
pub fn plot_route(scenario: &Scenario, route: &Route, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_route_svg(scenario, route)?)?;
    Ok(())
}
