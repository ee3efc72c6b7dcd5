//! SVG wiring diagrams of sweep histories.
//!
//! Frame pseudolines are horizontal wires that all leave the base point on
//! the left; working pseudolines are vertical wires read top to bottom in
//! sweep order. Every configuration point is a filled disk.

use std::fmt::Write;

use crate::error::DrawError;
use crate::sweep::{replay_trace, Event, LineId};

const DX: f64 = 36.0;
const BAND: f64 = 64.0;
const LEFT: f64 = 72.0;
const TOP: f64 = 32.0;

struct Band {
    before: Vec<LineId>,
    after: Vec<LineId>,
    meets: Vec<Vec<LineId>>,
    frame: bool,
}

/// Renders the wiring diagram of a full sweep history.
pub fn wiring_svg(n: usize, k: usize, history: &[Event]) -> Result<String, DrawError> {
    if history.is_empty() {
        return Err(DrawError::MissingHistory);
    }
    let states = replay_trace(n, k, history)?;
    let params = states[0].params();
    let m = params.m;
    let mut bands = vec![Band {
        before: params.order_before_base.clone(),
        after: states[0].order().to_vec(),
        meets: params.base_groups.clone(),
        frame: true,
    }];
    for (i, event) in history.iter().enumerate().skip(1).take(states.len() - 1) {
        let (meets, frame) = match event {
            Event::WorkingK { chosen, .. } => (vec![chosen.clone()], false),
            Event::FrameSweep { groups, .. } => (groups.clone(), true),
            _ => (Vec::new(), false),
        };
        bands.push(Band { before: states[i - 1].order().to_vec(), after: states[i].order().to_vec(), meets, frame });
    }
    bands.push(Band {
        before: states.last().unwrap().order().to_vec(),
        after: params.order_before_base.iter().rev().copied().collect(),
        meets: Vec::new(),
        frame: false,
    });

    let x = |pos: usize| LEFT + pos as f64 * DX;
    let width = LEFT + m as f64 * DX + DX;
    let height = TOP * 2.0 + bands.len() as f64 * BAND;
    let base = (LEFT / 3.0, height / 2.0);

    let mut wires: Vec<Vec<(f64, f64)>> = vec![Vec::new(); m];
    let mut frames: Vec<f64> = Vec::new();
    let mut disks: Vec<(f64, f64)> = vec![base];
    for (i, band) in bands.iter().enumerate() {
        let y0 = TOP + i as f64 * BAND;
        let ym = y0 + BAND / 2.0;
        let pos_before = positions(&band.before, m);
        let pos_after = positions(&band.after, m);
        let mut meet_x = vec![None; m];
        for group in &band.meets {
            let cx = group.iter().map(|&l| x(pos_after[l as usize])).sum::<f64>() / group.len() as f64;
            for &l in group {
                meet_x[l as usize] = Some(cx);
            }
            disks.push((cx, ym));
        }
        for l in 0..m {
            let (xb, xa) = (x(pos_before[l]), x(pos_after[l]));
            let wire = &mut wires[l];
            if wire.is_empty() {
                wire.push((xb, y0));
            }
            wire.push((meet_x[l].unwrap_or((xb + xa) / 2.0), ym));
            wire.push((xa, y0 + BAND));
        }
        if band.frame {
            frames.push(ym);
        }
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(svg, "<title>({n},{k}) wiring diagram</title>");
    for y in &frames {
        let _ = writeln!(
            svg,
            r##"<polyline class="frame" fill="none" stroke="#888" stroke-width="1.5" points="{:.1},{:.1} {:.1},{y:.1} {:.1},{y:.1}"/>"##,
            base.0,
            base.1,
            LEFT - DX / 2.0,
            width - DX / 2.0
        );
    }
    for (l, wire) in wires.iter().enumerate() {
        let pts: Vec<String> = wire.iter().map(|(px, py)| format!("{px:.1},{py:.1}")).collect();
        let _ = writeln!(
            svg,
            r##"<polyline class="wire" data-line="{l}" fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{}"/>"##,
            pts.join(" ")
        );
    }
    for (cx, cy) in &disks {
        let _ = writeln!(svg, r#"<circle class="point" cx="{cx:.1}" cy="{cy:.1}" r="4"/>"#);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn positions(order: &[LineId], m: usize) -> Vec<usize> {
    let mut pos = vec![0; m];
    for (i, &l) in order.iter().enumerate() {
        pos[l as usize] = i;
    }
    pos
}
