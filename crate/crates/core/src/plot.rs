// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Static SVG of measured payoffs (mean and confidence interval) against the
//! reference curves.

use std::fmt::Write as _;

use crate::stats::{StrategyReport, ValidationReport};

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 48.0;
const Y_MAX: f64 = 3.2;
const COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

fn x_of(gamma: f64, x0: f64) -> f64 {
    x0 + MARGIN + gamma / std::f64::consts::PI * (PANEL_W - 2.0 * MARGIN)
}

fn y_of(payoff: f64, y0: f64) -> f64 {
    y0 + PANEL_H - MARGIN - payoff.clamp(0.0, Y_MAX) / Y_MAX * (PANEL_H - 2.0 * MARGIN)
}

fn panel(out: &mut String, r: &StrategyReport, x0: f64, y0: f64) {
    let left = x0 + MARGIN;
    let right = x0 + PANEL_W - MARGIN;
    let top = y0 + MARGIN;
    let bottom = y0 + PANEL_H - MARGIN;
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        right - left,
        bottom - top
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" text-anchor="middle" font-size="14">{} (RMSE A {:.3}, B {:.3})</text>"##,
        (left + right) / 2.0,
        top - 12.0,
        r.strategy,
        r.rmse_a,
        r.rmse_b
    );
    for tick in 0..=3 {
        let y = y_of(tick as f64, y0);
        let _ = writeln!(
            out,
            r##"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end" font-size="10">{tick}</text>"##,
            left - 4.0,
            y + 3.0
        );
    }
    for (label, g) in [("0", 0.0), ("pi/2", std::f64::consts::FRAC_PI_2), ("pi", std::f64::consts::PI)] {
        let _ = writeln!(
            out,
            r##"<text x="{:.2}" y="{}" text-anchor="middle" font-size="10">{label}</text>"##,
            x_of(g, x0),
            bottom + 14.0
        );
    }
    for (player, color) in COLORS.iter().enumerate() {
        let reference: Vec<String> = r
            .points
            .iter()
            .map(|p| {
                let v = if player == 0 { p.e_a_reference } else { p.e_b_reference };
                format!("{:.2},{:.2}", x_of(p.gamma, x0), y_of(v, y0))
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"##,
            reference.join(" ")
        );
        for p in &r.points {
            let e = if player == 0 { &p.e_a } else { &p.e_b };
            let x = x_of(p.gamma, x0);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"##,
                y_of(e.mean - e.ci_half_width, y0),
                y_of(e.mean + e.ci_half_width, y0),
                y_of(e.mean, y0)
            );
        }
    }
}

/// Two-column grid of panels, one per strategy. Lines are reference curves;
/// points and bars are run means with confidence intervals. Blue is Alice,
/// red is Bob.
pub fn render_svg(report: &ValidationReport) -> String {
    let n = report.strategies.len();
    let cols = n.clamp(1, 2);
    let rows = n.div_ceil(2).max(1);
    let width = PANEL_W * cols as f64;
    let height = PANEL_H * rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    for (i, r) in report.strategies.iter().enumerate() {
        panel(
            &mut out,
            r,
            (i % 2) as f64 * PANEL_W,
            (i / 2) as f64 * PANEL_H,
        );
    }
    out.push_str("</svg>\n");
    out
}
