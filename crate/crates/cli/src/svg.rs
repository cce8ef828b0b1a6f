//! Static SVG band diagrams: energy upward, swept parameter to the right.

use std::fmt::Write;

pub const GRAY: &str = "#a0a0a0";
pub const BLUE: &str = "#1f4fd8";
pub const RED: &str = "#d62728";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Original,
    NewPlus,
    NewMinus,
    Flat,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::Original => "original",
            Tag::NewPlus => "new_bc_plus",
            Tag::NewMinus => "new_bc_minus",
            Tag::Flat => "flat",
        }
    }
}

pub struct Segment {
    pub column: usize,
    pub lo: f64,
    pub hi: f64,
    pub tag: Tag,
}

pub struct Diagram {
    pub x_label: String,
    pub x_values: Vec<f64>,
    pub e_min: f64,
    pub e_max: f64,
    pub segments: Vec<Segment>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

fn num(x: f64) -> String {
    format!("{x:.2}")
}

impl Diagram {
    pub fn render(&self) -> String {
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let n = self.x_values.len().max(1);
        let col_w = pw / n as f64;
        let span = self.e_max - self.e_min;
        let y = |e: f64| TOP + ph * (1.0 - (e.clamp(self.e_min, self.e_max) - self.e_min) / span);

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        // gray first so the new bands are drawn over it
        for pass in [Tag::Original, Tag::NewPlus, Tag::NewMinus, Tag::Flat] {
            for seg in self.segments.iter().filter(|s| s.tag == pass) {
                let x = LEFT + col_w * seg.column as f64;
                if seg.tag == Tag::Flat {
                    let yy = y(seg.lo);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{RED}" stroke-width="1.5"/>"#,
                        num(x),
                        num(yy),
                        num(x + col_w),
                        num(yy)
                    );
                    continue;
                }
                let (top, bot) = (y(seg.hi), y(seg.lo));
                let fill = match seg.tag {
                    Tag::Original => GRAY,
                    Tag::NewPlus => BLUE,
                    _ => RED,
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                    num(x),
                    num(top),
                    num(col_w),
                    num((bot - top).max(0.5))
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(pw),
            num(ph)
        );
        for i in 0..=4 {
            let e = self.e_min + span * i as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
                num(LEFT - 6.0),
                num(y(e) + 4.0),
                num(e)
            );
        }
        if let (Some(first), Some(last)) = (self.x_values.first(), self.x_values.last()) {
            let base = HEIGHT - BOTTOM + 16.0;
            let _ = writeln!(s, r#"<text x="{LEFT}" y="{}" font-size="12">{}</text>"#, num(base), num(*first));
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
                num(WIDTH - RIGHT),
                num(base),
                num(*last)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
            num(LEFT + pw / 2.0),
            num(HEIGHT - 12.0),
            self.x_label
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 16 {})">E</text>"#,
            num(TOP + ph / 2.0),
            num(TOP + ph / 2.0)
        );
        s.push_str("</svg>\n");
        s
    }
}
