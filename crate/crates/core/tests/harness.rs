use thinwall::harness::output::{format_table, gnuplot_script};
use thinwall::harness::{fit_slope, parse_config, parse_csv, run_study, write_csv};

const SMALL: &str = "
# hole-free sweep on coarse meshes
hole = none
deltas = 1/4, 1/8
alpha = 0.3
exact.h = 0.08
limit.h = 0.08
reference.check = false
";

#[test]
fn slope_fit_sees_the_log() {
    let d: Vec<f64> = (2..=7).map(|k| 0.5f64.powi(k)).collect();
    let pairs: Vec<(f64, f64)> = d.iter().map(|&x| (x, 0.3 * x * x * x.ln().abs())).collect();
    let f = fit_slope(&pairs).unwrap();
    // ln e = const + 2 ln δ + ln|ln δ|, so the slope is 2 plus the regression slope of ln|ln δ|
    let x: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = x.iter().map(|v| v.abs().ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / 6.0, y.iter().sum::<f64>() / 6.0);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    assert!((f.slope - (2.0 + sxy / sxx)).abs() < 1e-12);
    // the log drags the fitted slope well below 2 on this range
    assert!(f.slope > 1.6 && f.slope < 1.7, "{}", f.slope);
    assert!(f.halfwidth > 0.0);
}

#[test]
fn empty_report_is_header_only() {
    assert_eq!(write_csv(&[]), "delta,dofs,e0,e1,e2,e3\n");
    assert!(parse_csv("delta,dofs,e0,e1,e2,e3\n").unwrap().is_empty());
}

#[test]
fn hole_free_study_is_transparent_and_deterministic() {
    let cfg = parse_config(SMALL).unwrap();
    let a = run_study(&cfg).unwrap();
    assert_eq!(a.rows.len(), 2);
    for r in &a.rows {
        assert!(r.l2[0] > 0.0);
        // all corrections vanish, so every truncation has the same error
        for k in 1..3 {
            assert!((r.l2[k] - r.l2[0]).abs() <= 1e-9 * r.l2[0].max(1e-6), "{:?}", r.l2);
        }
        assert!(r.l2[3].is_nan());
    }
    let csv = write_csv(&a.rows);
    let back = parse_csv(&csv).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back[1].2[..3], a.rows[1].l2[..3]);
    let b = run_study(&cfg).unwrap();
    assert_eq!(csv, write_csv(&b.rows));
    assert!(format_table(&a).contains("L2 slopes"));
    assert!(gnuplot_script(&a, "errors.csv").contains("logscale"));
}

#[test]
fn config_rejects_bad_periods() {
    assert!(parse_config("deltas = 0.3").is_err());
    assert!(parse_config("fit = 1/128").is_err());
    assert!(parse_config("bogus = 1").is_err());
}
