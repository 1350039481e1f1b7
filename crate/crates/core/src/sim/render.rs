//! Schematic screenshot renderer and a minimal RGB raster with PPM output.

use crate::ax::{is_visible, BBox, ScreenState};

pub type Rgb = [u8; 3];

const DESKTOP: Rgb = [0x3a, 0x3f, 0x4b];
const INK: Rgb = [0x10, 0x10, 0x10];
const HIGHLIGHT: Rgb = [0xe0, 0x10, 0x10];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Self {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&fill);
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return;
        }
        let i = (y as usize * self.width + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb) {
        for y in y0.max(0)..y1.min(self.height as i64) {
            for x in x0.max(0)..x1.min(self.width as i64) {
                self.put(x, y, c);
            }
        }
    }

    pub fn stroke_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, thickness: i64, c: Rgb) {
        self.fill_rect(x0, y0, x1, y0 + thickness, c);
        self.fill_rect(x0, y1 - thickness, x1, y1, c);
        self.fill_rect(x0, y0, x0 + thickness, y1, c);
        self.fill_rect(x1 - thickness, y0, x1, y1, c);
    }

    /// Draws text with the built-in 3x5 font, clipped to `max_x`.
    pub fn draw_text(&mut self, x: i64, y: i64, text: &str, scale: i64, max_x: i64, c: Rgb) {
        let mut cx = x;
        for ch in text.chars() {
            if cx + 3 * scale > max_x {
                break;
            }
            let g = glyph(ch);
            for row in 0..5 {
                for col in 0..3 {
                    if g >> (14 - (row * 3 + col)) & 1 == 1 {
                        self.fill_rect(cx + col * scale, y + row * scale, cx + (col + 1) * scale, y + (row + 1) * scale, c);
                    }
                }
            }
            cx += 4 * scale;
        }
    }

    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Raster {
        let x1 = x1.min(self.width).max(x0.min(self.width));
        let y1 = y1.min(self.height).max(y0.min(self.height));
        let (x0, y0) = (x0.min(x1), y0.min(y1));
        let mut out = Raster::new((x1 - x0).max(1), (y1 - y0).max(1), DESKTOP);
        for y in y0..y1 {
            for x in x0..x1 {
                out.put((x - x0) as i64, (y - y0) as i64, self.pixel(x, y));
            }
        }
        out
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_ppm(bytes: &[u8]) -> Option<Raster> {
        let mut fields = Vec::new();
        let mut i = 0;
        while fields.len() < 4 {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if start == i {
                return None;
            }
            fields.push(std::str::from_utf8(&bytes[start..i]).ok()?.to_string());
        }
        if fields[0] != "P6" || fields[3] != "255" {
            return None;
        }
        let (w, h): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
        let pixels = bytes.get(i + 1..)?.to_vec();
        (pixels.len() == w * h * 3).then_some(Raster { width: w, height: h, pixels })
    }
}

fn role_color(role: &str) -> Rgb {
    // FNV-1a over the role, mapped to a light palette so ink stays legible.
    let mut h: u32 = 0x811c_9dc5;
    for b in role.bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    [0x90 | (h & 0x6f) as u8, 0x90 | ((h >> 8) & 0x6f) as u8, 0x90 | ((h >> 16) & 0x6f) as u8]
}

fn darker(c: Rgb) -> Rgb {
    [c[0] / 2, c[1] / 2, c[2] / 2]
}

/// Pixel rectangle of a point-space box, relative to the window origin.
pub fn pixel_rect(b: &BBox, window: &BBox, scale: f64) -> (i64, i64, i64, i64) {
    let px = |v: f64| (v * scale).round() as i64;
    (px(b.x - window.x), px(b.y - window.y), px(b.right() - window.x), px(b.bottom() - window.y))
}

/// Deterministic schematic screenshot of a state: window-sized, one filled
/// rectangle per visible element, labelled with name and value.
pub fn render(state: &ScreenState) -> Raster {
    let window = state.tree.window_bbox();
    let s = state.scaling_factor;
    let w = (window.w * s).round().max(1.0) as usize;
    let h = (window.h * s).round().max(1.0) as usize;
    let mut img = Raster::new(w, h, DESKTOP);
    let text_scale = (s.floor() as i64).max(1);
    for e in state.tree.root().iter() {
        if !is_visible(e, &window) {
            continue;
        }
        let (x0, y0, x1, y1) = pixel_rect(&e.bbox, &window, s);
        let c = role_color(&e.role);
        img.fill_rect(x0, y0, x1, y1, c);
        img.stroke_rect(x0, y0, x1, y1, 1, darker(c));
        let mut label = e.name.clone().unwrap_or_default();
        if let Some(v) = e.value.as_deref().filter(|v| !v.is_empty()) {
            label.push('=');
            label.push_str(v);
        }
        if !label.is_empty() && y1 - y0 >= 5 * text_scale + 2 {
            img.draw_text(x0 + 2, y0 + 2, &label, text_scale, x1 - 1, INK);
        }
    }
    img
}

/// Full render with the target box outlined in red, plus a crop of the target.
pub fn highlight(state: &ScreenState, target: &BBox) -> (Raster, Raster) {
    let window = state.tree.window_bbox();
    let mut full = render(state);
    let crop = {
        let (x0, y0, x1, y1) = pixel_rect(target, &window, state.scaling_factor);
        full.crop(x0.max(0) as usize, y0.max(0) as usize, x1.max(0) as usize, y1.max(0) as usize)
    };
    let (x0, y0, x1, y1) = pixel_rect(target, &window, state.scaling_factor);
    full.stroke_rect(x0 - 2, y0 - 2, x1 + 2, y1 + 2, 2, HIGHLIGHT);
    (full, crop)
}

/// 3x5 glyphs, row-major, 15 bits, top-left is the most significant bit.
fn glyph(c: char) -> u16 {
    const fn g(rows: [u16; 5]) -> u16 {
        (rows[0] << 12) | (rows[1] << 9) | (rows[2] << 6) | (rows[3] << 3) | rows[4]
    }
    match c.to_ascii_uppercase() {
        'A' => g([0b010, 0b101, 0b111, 0b101, 0b101]),
        'B' => g([0b110, 0b101, 0b110, 0b101, 0b110]),
        'C' => g([0b011, 0b100, 0b100, 0b100, 0b011]),
        'D' => g([0b110, 0b101, 0b101, 0b101, 0b110]),
        'E' => g([0b111, 0b100, 0b110, 0b100, 0b111]),
        'F' => g([0b111, 0b100, 0b110, 0b100, 0b100]),
        'G' => g([0b011, 0b100, 0b101, 0b101, 0b011]),
        'H' => g([0b101, 0b101, 0b111, 0b101, 0b101]),
        'I' => g([0b111, 0b010, 0b010, 0b010, 0b111]),
        'J' => g([0b001, 0b001, 0b001, 0b101, 0b010]),
        'K' => g([0b101, 0b101, 0b110, 0b101, 0b101]),
        'L' => g([0b100, 0b100, 0b100, 0b100, 0b111]),
        'M' => g([0b101, 0b111, 0b111, 0b101, 0b101]),
        'N' => g([0b110, 0b101, 0b101, 0b101, 0b101]),
        'O' => g([0b010, 0b101, 0b101, 0b101, 0b010]),
        'P' => g([0b110, 0b101, 0b110, 0b100, 0b100]),
        'Q' => g([0b010, 0b101, 0b101, 0b110, 0b011]),
        'R' => g([0b110, 0b101, 0b110, 0b101, 0b101]),
        'S' => g([0b011, 0b100, 0b010, 0b001, 0b110]),
        'T' => g([0b111, 0b010, 0b010, 0b010, 0b010]),
        'U' => g([0b101, 0b101, 0b101, 0b101, 0b111]),
        'V' => g([0b101, 0b101, 0b101, 0b101, 0b010]),
        'W' => g([0b101, 0b101, 0b111, 0b111, 0b101]),
        'X' => g([0b101, 0b101, 0b010, 0b101, 0b101]),
        'Y' => g([0b101, 0b101, 0b010, 0b010, 0b010]),
        'Z' => g([0b111, 0b001, 0b010, 0b100, 0b111]),
        '0' => g([0b111, 0b101, 0b101, 0b101, 0b111]),
        '1' => g([0b010, 0b110, 0b010, 0b010, 0b111]),
        '2' => g([0b110, 0b001, 0b010, 0b100, 0b111]),
        '3' => g([0b110, 0b001, 0b010, 0b001, 0b110]),
        '4' => g([0b101, 0b101, 0b111, 0b001, 0b001]),
        '5' => g([0b111, 0b100, 0b110, 0b001, 0b110]),
        '6' => g([0b011, 0b100, 0b111, 0b101, 0b111]),
        '7' => g([0b111, 0b001, 0b010, 0b010, 0b010]),
        '8' => g([0b111, 0b101, 0b111, 0b101, 0b111]),
        '9' => g([0b111, 0b101, 0b111, 0b001, 0b110]),
        ' ' => 0,
        '.' => g([0, 0, 0, 0, 0b010]),
        ',' => g([0, 0, 0, 0b010, 0b100]),
        '-' => g([0, 0, 0b111, 0, 0]),
        '_' => g([0, 0, 0, 0, 0b111]),
        ':' => g([0, 0b010, 0, 0b010, 0]),
        '/' => g([0b001, 0b001, 0b010, 0b100, 0b100]),
        '?' => g([0b110, 0b001, 0b010, 0, 0b010]),
        '!' => g([0b010, 0b010, 0b010, 0, 0b010]),
        '=' => g([0, 0b111, 0, 0b111, 0]),
        '+' => g([0, 0b010, 0b111, 0b010, 0]),
        '(' => g([0b010, 0b100, 0b100, 0b100, 0b010]),
        ')' => g([0b010, 0b001, 0b001, 0b001, 0b010]),
        '@' => g([0b111, 0b101, 0b111, 0b100, 0b011]),
        '&' => g([0b010, 0b101, 0b010, 0b101, 0b011]),
        '\'' => g([0b010, 0b010, 0, 0, 0]),
        '"' => g([0b101, 0b101, 0, 0, 0]),
        _ => g([0b101, 0b010, 0b101, 0b010, 0b101]),
    }
}
