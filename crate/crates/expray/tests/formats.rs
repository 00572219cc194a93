use expray::formats::{self, fmt_f64};
use expray_core::render::RgbImage;
use expray_core::{trace_parameter_ray, trace_ray, ComplexPoint, ExternalAddress};

#[test]
fn ppm_round_trip() {
    let data: Vec<u8> = (0..5 * 3 * 3).map(|v| (v * 7 % 256) as u8).collect();
    let img = RgbImage {
        width: 5,
        height: 3,
        data,
    };
    let bytes = formats::ppm_bytes(&img);
    assert!(bytes.starts_with(b"P6\n5 3\n255\n"));
    assert_eq!(formats::parse_ppm(&bytes).unwrap(), img);
    assert!(formats::parse_ppm(&bytes[..bytes.len() - 1]).is_none());
    assert!(formats::parse_ppm(b"P3\n1 1\n255\n\0\0\0").is_none());
}

#[test]
fn ray_csv_schema_and_values() {
    let s: ExternalAddress = "p:|1".parse().unwrap();
    let tr = trace_ray(ComplexPoint::new(1.0, 0.0).unwrap(), &s, 0.5, 6.0, 12).unwrap();
    let csv = formats::ray_csv(&tr);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), formats::RAY_HEADER);
    for (line, sample) in lines.zip(&tr.samples) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 7);
        assert_eq!(f[0].parse::<f64>().unwrap(), sample.t);
        assert_eq!(f[1].parse::<f64>().unwrap(), sample.value.re());
        assert_eq!(f[2].parse::<f64>().unwrap(), sample.value.im());
        assert_eq!(f[5].parse::<usize>().unwrap(), sample.depth);
    }
    let side = formats::ray_sidecar(&tr);
    assert_eq!(side["truncation"]["kind"], "complete");
    assert_eq!(side["samples"], 12);
    assert_eq!(
        formats::sidecar_path("out/ray.csv".as_ref()),
        std::path::Path::new("out/ray.json")
    );
}

#[test]
fn param_csv_rows_follow_samples() {
    let s: ExternalAddress = "p:|-1".parse().unwrap();
    let tr = trace_parameter_ray(&s, 1.0, 8.0, 6).unwrap();
    let csv = formats::param_csv(&tr);
    // Intermediate samples are inserted where consecutive parameters jump.
    assert!(tr.samples.len() >= 6);
    assert_eq!(csv.lines().count(), tr.samples.len() + 1);
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 8);
        let im: f64 = f[2].parse().unwrap();
        assert!(im < -std::f64::consts::PI && im > -3.0 * std::f64::consts::PI);
    }
    let side = formats::param_sidecar(&tr);
    assert_eq!(side["address"], "p:|-1");
    assert!(side["seed"].is_array());
    assert_eq!(side["samples"], tr.samples.len());
}

#[test]
fn floats_round_trip_through_text() {
    for x in [0.1, -3.25, 1e-12, 6.02e23, f64::MIN_POSITIVE, 2.0f64.powi(60)] {
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}
