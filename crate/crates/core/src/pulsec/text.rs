//! Line-oriented text form of pulse sequences.
//!
//! ```text
//! GRAD
//! RF spin=1 flip=90deg phase=-x
//! RF spin=2,3 flip=180deg phase=x
//! DELAY 2.227ms
//! JBLOCK i=1 j=3
//! ZROT spin=1 angle=-90deg
//! CNOT control=2 target=3
//! ```
//!
//! Phases print as `x`, `y`, `-x`, `-y` when they are cardinal and as degrees
//! otherwise. Blank lines and `#` comments are ignored on input.

use std::f64::consts::PI;
use std::fmt::Write;

use super::{PulseElement, PulseSequence};
use crate::error::{Error, Result};

/// Rounds away binary noise from degree conversion so listings stay readable.
fn degrees(rad: f64) -> String {
    let d = rad.to_degrees();
    let r = (d * 1e9).round() / 1e9;
    let v = if (d - r).abs() < 1e-9 { r } else { d };
    format!("{}deg", if v == 0.0 { 0.0 } else { v })
}

fn phase_label(phase: f64) -> String {
    let wrapped = phase.rem_euclid(2.0 * PI);
    let near = |target: f64| (wrapped - target).abs() < 1e-12 || (wrapped - target - 2.0 * PI).abs() < 1e-12;
    if near(0.0) {
        "x".into()
    } else if near(PI / 2.0) {
        "y".into()
    } else if near(PI) {
        "-x".into()
    } else if near(3.0 * PI / 2.0) {
        "-y".into()
    } else {
        degrees(phase)
    }
}

pub fn render_element(e: &PulseElement) -> String {
    match e {
        PulseElement::Rf { spins, flip, phase } => {
            let list: Vec<String> = spins.iter().map(usize::to_string).collect();
            format!("RF spin={} flip={} phase={}", list.join(","), degrees(*flip), phase_label(*phase))
        }
        PulseElement::Delay { duration } => {
            let ms = duration * 1e3;
            // fall back to seconds when the millisecond value would not read back exactly
            if format!("{ms}").parse::<f64>().map(|v| v * 1e-3) == Ok(*duration) {
                format!("DELAY {ms}ms")
            } else {
                format!("DELAY {duration}s")
            }
        }
        PulseElement::JBlock { i, j } => format!("JBLOCK i={i} j={j}"),
        PulseElement::ZRot { spin, angle } => format!("ZROT spin={spin} angle={}", degrees(*angle)),
        PulseElement::Cnot { control, target } => format!("CNOT control={control} target={target}"),
        PulseElement::Gradient => "GRAD".into(),
    }
}

/// One element per line, each line newline-terminated.
pub fn render_sequence(seq: &PulseSequence) -> String {
    let mut out = String::new();
    for e in &seq.elements {
        let _ = writeln!(out, "{}", render_element(e));
    }
    out
}

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    match s {
        "x" | "+x" => return Ok(0.0),
        "y" | "+y" => return Ok(PI / 2.0),
        "-x" => return Ok(PI),
        "-y" => return Ok(-PI / 2.0),
        _ => {}
    }
    let (num, to_rad) = if let Some(v) = s.strip_suffix("deg") {
        (v, true)
    } else if let Some(v) = s.strip_suffix("rad") {
        (v, false)
    } else {
        return Err(format!("angle `{s}` needs a deg or rad suffix"));
    };
    let v: f64 = num.parse().map_err(|_| format!("bad number `{num}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite angle `{s}`"));
    }
    Ok(if to_rad { v.to_radians() } else { v })
}

fn parse_duration(s: &str) -> std::result::Result<f64, String> {
    let units = [("ms", 1e-3), ("us", 1e-6), ("s", 1.0)];
    for (suffix, scale) in units {
        if let Some(num) = s.strip_suffix(suffix) {
            let v: f64 = num.parse().map_err(|_| format!("bad number `{num}`"))?;
            if !v.is_finite() || v < 0.0 {
                return Err(format!("invalid duration `{s}`"));
            }
            return Ok(v * scale);
        }
    }
    Err(format!("duration `{s}` needs a unit (s, ms, us)"))
}

fn parse_index(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("bad spin index `{s}`"))
}

struct Fields<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn new(tokens: &[&'a str]) -> std::result::Result<Self, String> {
        let pairs = tokens
            .iter()
            .map(|t| t.split_once('=').ok_or_else(|| format!("expected key=value, got `{t}`")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { pairs })
    }

    fn take(&mut self, key: &str) -> std::result::Result<&'a str, String> {
        let pos = self.pairs.iter().position(|(k, _)| *k == key).ok_or_else(|| format!("missing `{key}`"))?;
        Ok(self.pairs.remove(pos).1)
    }

    fn finish(self) -> std::result::Result<(), String> {
        match self.pairs.first() {
            Some((k, _)) => Err(format!("unexpected field `{k}`")),
            None => Ok(()),
        }
    }
}

fn parse_line(line: &str) -> std::result::Result<PulseElement, String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let (head, rest) = tokens.split_first().ok_or("empty line")?;
    let element = match head.to_ascii_uppercase().as_str() {
        "GRAD" => {
            if !rest.is_empty() {
                return Err("GRAD takes no arguments".into());
            }
            PulseElement::Gradient
        }
        "DELAY" => match rest {
            [d] => PulseElement::Delay { duration: parse_duration(d)? },
            _ => return Err("DELAY takes one duration".into()),
        },
        "RF" => {
            let mut f = Fields::new(rest)?;
            let spins = f.take("spin")?.split(',').map(parse_index).collect::<std::result::Result<Vec<_>, _>>()?;
            let flip = parse_angle(f.take("flip")?)?;
            let phase = parse_angle(f.take("phase")?)?;
            f.finish()?;
            PulseElement::Rf { spins, flip, phase }
        }
        "JBLOCK" => {
            let mut f = Fields::new(rest)?;
            let e = PulseElement::JBlock { i: parse_index(f.take("i")?)?, j: parse_index(f.take("j")?)? };
            f.finish()?;
            e
        }
        "ZROT" => {
            let mut f = Fields::new(rest)?;
            let e = PulseElement::ZRot { spin: parse_index(f.take("spin")?)?, angle: parse_angle(f.take("angle")?)? };
            f.finish()?;
            e
        }
        "CNOT" => {
            let mut f = Fields::new(rest)?;
            let e = PulseElement::Cnot {
                control: parse_index(f.take("control")?)?,
                target: parse_index(f.take("target")?)?,
            };
            f.finish()?;
            e
        }
        other => return Err(format!("unknown element `{other}`")),
    };
    Ok(element)
}

pub fn parse_sequence(text: &str) -> Result<PulseSequence> {
    let mut elements = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        elements.push(parse_line(line).map_err(|msg| Error::Parse { line: k + 1, msg })?);
    }
    Ok(PulseSequence::new(elements))
}
