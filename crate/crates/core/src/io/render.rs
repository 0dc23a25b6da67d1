//! ASCII and SVG frames of a configuration.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::grid::{Configuration, Position};

/// Inclusive window `x0..=x1` by `y0..=y1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Viewport {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Viewport {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Result<Self, String> {
        if x0 > x1 || y0 > y1 {
            return Err(format!("empty viewport {x0},{y0},{x1},{y1}"));
        }
        Ok(Viewport { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0 + 1
    }
}

impl FromStr for Viewport {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|_| format!("bad viewport coordinate {p:?}"))
            })
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [x0, y0, x1, y1] => Viewport::new(x0, y0, x1, y1),
            _ => Err(format!("viewport needs x0,y0,x1,y1, got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameFormat {
    Ascii,
    Svg,
}

impl FromStr for FrameFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(FrameFormat::Ascii),
            "svg" => Ok(FrameFormat::Svg),
            _ => Err(format!("unknown format {s:?} (expected ascii or svg)")),
        }
    }
}

pub fn render_frame(c: &Configuration, vp: Viewport, format: FrameFormat) -> String {
    match format {
        FrameFormat::Ascii => render_ascii(c, vp),
        FrameFormat::Svg => render_svg(c, vp),
    }
}

fn render_ascii(c: &Configuration, vp: Viewport) -> String {
    let mut out = String::new();
    for y in (vp.y0..=vp.y1).rev() {
        let row: Vec<char> = (vp.x0..=vp.x1)
            .map(|x| c.get(Position::new(x, y)).map_or('.', |col| col.initial()))
            .collect();
        let mut first = true;
        for ch in row {
            if !first {
                out.push(' ');
            }
            out.push(ch);
            first = false;
        }
        out.push('\n');
    }
    out
}

const CELL: i64 = 32;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#2ca02c", "#d62728", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn render_svg(c: &Configuration, vp: Viewport) -> String {
    let (w, h) = (vp.width() * CELL, vp.height() * CELL);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n<g stroke=\"#cccccc\" stroke-width=\"1\">\n"
    );
    let half = CELL / 2;
    for k in 0..vp.width() {
        let x = k * CELL + half;
        writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{half}\" x2=\"{x}\" y2=\"{}\"/>",
            h - half
        )
        .expect("String write");
    }
    for k in 0..vp.height() {
        let y = k * CELL + half;
        writeln!(
            out,
            "<line x1=\"{half}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\"/>",
            w - half
        )
        .expect("String write");
    }
    out.push_str("</g>\n");
    for (p, col) in c.iter() {
        if p.x < vp.x0 || p.x > vp.x1 || p.y < vp.y0 || p.y > vp.y1 {
            continue;
        }
        let cx = (p.x - vp.x0) * CELL + half;
        let cy = (vp.y1 - p.y) * CELL + half;
        let fill = PALETTE[col.id() as usize % PALETTE.len()];
        writeln!(
            out,
            "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{}\" fill=\"{fill}\"/>\n\
             <text x=\"{cx}\" y=\"{cy}\" fill=\"white\" font-family=\"monospace\" font-size=\"14\" \
             text-anchor=\"middle\" dominant-baseline=\"central\">{}</text>",
            half - 4,
            col.label()
        )
        .expect("String write");
    }
    out.push_str("</svg>\n");
    out
}
