//! On-disk formats: ray CSV with JSON sidecars, binary PPM, escape-count CSV
//! and orbit JSON.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use expray_core::param::ParamRayTrace;
use expray_core::rays::{RayTrace, Truncation};
use expray_core::render::{EscapeImage, RgbImage};
use expray_core::OrbitRecord;
use serde_json::{json, Value};

pub const RAY_HEADER: &str = "t,re,im,d_re,d_im,depth,residual";
pub const PARAM_HEADER: &str = "t,re,im,d_re,d_im,depth,residual,newton_iters";

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn ray_csv(trace: &RayTrace) -> String {
    let mut out = String::from(RAY_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.value.re()),
            fmt_f64(s.value.im()),
            fmt_f64(s.dvalue_dkappa.re()),
            fmt_f64(s.dvalue_dkappa.im()),
            s.depth,
            fmt_f64(s.residual)
        );
    }
    out
}

/// `d_re, d_im` hold `d g_s^kappa(t) / d kappa` at the solved parameter.
pub fn param_csv(trace: &ParamRayTrace) -> String {
    let mut out = String::from(PARAM_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.kappa.re()),
            fmt_f64(s.kappa.im()),
            fmt_f64(s.dvalue_dkappa.re()),
            fmt_f64(s.dvalue_dkappa.im()),
            s.depth,
            fmt_f64(s.residual),
            s.newton_iters
        );
    }
    out
}

pub fn truncation_json(t: Truncation) -> Value {
    serde_json::to_value(t).expect("plain enum")
}

pub fn ray_sidecar(trace: &RayTrace) -> Value {
    json!({
        "address": trace.address.literal(),
        "kappa": [trace.kappa.re(), trace.kappa.im()],
        "truncation": truncation_json(trace.truncation),
        "samples": trace.samples.len(),
        "failed": trace.failed,
    })
}

pub fn param_sidecar(trace: &ParamRayTrace) -> Value {
    json!({
        "address": trace.address.literal(),
        "seed": [trace.seed.re(), trace.seed.im()],
        "continuation_steps": trace.continuation_steps,
        "t_s": trace.t_s,
        "samples": trace.samples.len(),
    })
}

/// `foo.csv` -> `foo.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_with_sidecar(csv_path: &Path, csv: &str, sidecar: &Value) -> io::Result<()> {
    fs::write(csv_path, csv)?;
    fs::write(sidecar_path(csv_path), pretty(sidecar))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

pub fn ppm_bytes(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

/// Parse a binary PPM written by [`ppm_bytes`].
pub fn parse_ppm(bytes: &[u8]) -> Option<RgbImage> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?.to_string());
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return None;
    }
    let width: usize = fields[1].parse().ok()?;
    let height: usize = fields[2].parse().ok()?;
    let data = bytes.get(pos..)?.to_vec();
    (data.len() == 3 * width * height).then_some(RgbImage { width, height, data })
}

/// One line per pixel row; `-1` marks pixels that did not escape.
pub fn counts_csv(img: &EscapeImage) -> String {
    let mut out = String::new();
    for row in img.counts.chunks(img.grid.px_w) {
        let line: Vec<String> = row
            .iter()
            .map(|c| c.map_or_else(|| "-1".to_string(), |n| n.to_string()))
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn orbit_json(rec: &OrbitRecord) -> Value {
    serde_json::to_value(rec).expect("orbit record")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(1.5), "1.5");
        assert_eq!(fmt_f64(-2.0), "-2");
        assert_eq!(fmt_f64(1e-20), "1e-20");
        assert_eq!(fmt_f64(3.5e20), "3.5e20");
        assert_eq!(fmt_f64(0.25e-4), "0.000025");
        for x in [1e-300, 0.1, 123456.789, -7.25e-9, 1e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
