//! Deterministic text artifacts: CSV tables and JSON documents.
//!
//! Every floating-point number is rendered with `spps_core::fmt::g17`
//! (17 significant digits, `%.17g` style), so identical inputs produce
//! byte-identical outputs.

use num_complex::Complex64;
use spps_core::fmt::g17;
use std::fmt::Write as _;

/// A minimal JSON writer with g17 number formatting.
pub struct Json {
    out: String,
}

impl Json {
    pub fn new() -> Json {
        Json { out: String::new() }
    }

    pub fn finish(mut self) -> String {
        self.out.push('\n');
        self.out
    }

    pub fn raw(&mut self, text: &str) {
        self.out.push_str(text);
    }

    pub fn string(&mut self, s: &str) {
        self.out.push('"');
        for c in s.chars() {
            match c {
                '"' => self.out.push_str("\\\""),
                '\\' => self.out.push_str("\\\\"),
                '\n' => self.out.push_str("\\n"),
                '\t' => self.out.push_str("\\t"),
                '\r' => self.out.push_str("\\r"),
                c if (c as u32) < 0x20 => {
                    let _ = write!(self.out, "\\u{:04x}", c as u32);
                }
                c => self.out.push(c),
            }
        }
        self.out.push('"');
    }

    pub fn number(&mut self, x: f64) {
        if x.is_finite() {
            self.out.push_str(&g17(x));
        } else {
            // JSON has no infinities; encode as strings.
            self.string(&format!("{x}"));
        }
    }

    pub fn complex_pair(&mut self, z: Complex64) {
        self.raw("[");
        self.number(z.re);
        self.raw(", ");
        self.number(z.im);
        self.raw("]");
    }

    pub fn bool(&mut self, b: bool) {
        self.out.push_str(if b { "true" } else { "false" });
    }

    pub fn usize(&mut self, n: usize) {
        let _ = write!(self.out, "{n}");
    }
}

/// Build a CSV line from already-formatted fields.
pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

/// Format a complex value as the two CSV fields `re`, `im`.
pub fn csv_complex(z: Complex64) -> [String; 2] {
    [g17(z.re), g17(z.im)]
}
