//! CSV writing: `#` comment headers, one column-name line, and numbers with
//! ten significant digits.

use std::io::{self, Write};

use jost_core::Complex64;

/// `x` with ten significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise.
pub fn sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (9 - exp).max(0) as usize, x)
    } else {
        format!("{x:.9e}")
    }
}

pub struct Csv<'a> {
    out: &'a mut dyn Write,
}

impl<'a> Csv<'a> {
    pub fn new(out: &'a mut dyn Write) -> Self {
        Csv { out }
    }

    pub fn comment(&mut self, text: &str) -> io::Result<()> {
        for line in text.lines() {
            writeln!(self.out, "# {line}")?;
        }
        Ok(())
    }

    pub fn header(&mut self, columns: &[&str]) -> io::Result<()> {
        writeln!(self.out, "{}", columns.join(","))
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        writeln!(self.out, "{}", fields.join(","))
    }
}

/// Real and imaginary parts as two fields.
pub fn parts(z: Complex64) -> [String; 2] {
    [sig(z.re), sig(z.im)]
}
