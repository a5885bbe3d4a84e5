use std::fmt::Write as _;
use std::path::Path;

use super::study::{ConvergenceReport, ErrorRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "delta,dofs,e0,e1,e2,e3";

fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

/// CSV of the L² errors; e3 is empty when u₃,₀ is absent. Values round-trip exactly.
pub fn write_csv(rows: &[ErrorRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let e: Vec<String> = r.l2.iter().map(|v| cell(*v)).collect();
        writeln!(s, "{},{},{}", r.delta, r.dofs, e.join(",")).unwrap();
    }
    s
}

/// Parse the CSV back into (δ, dofs, e0..e3) rows; missing values become NaN.
pub fn parse_csv(text: &str) -> Result<Vec<(f64, usize, [f64; 4])>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::ParseError { line: 1, msg: format!("expected header `{CSV_HEADER}`") }),
    }
    let mut out = Vec::new();
    for (i, l) in lines.enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::ParseError { line: i + 2, msg };
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 columns, got {}", f.len())));
        }
        let num = |s: &str| -> Result<f64> {
            if s.trim().is_empty() {
                Ok(f64::NAN)
            } else {
                s.trim().parse().map_err(|e| err(format!("{s}: {e}")))
            }
        };
        let dofs = f[1].trim().parse().map_err(|e| err(format!("{}: {e}", f[1])))?;
        out.push((num(f[0])?, dofs, [num(f[2])?, num(f[3])?, num(f[4])?, num(f[5])?]));
    }
    Ok(out)
}

fn fmt_slope(s: &Option<super::study::SlopeFit>) -> String {
    match s {
        Some(f) => format!("{:.3} ± {:.3}", f.slope, f.halfwidth),
        None => "-".into(),
    }
}

/// Human-readable table with the fitted slopes.
pub fn format_table(r: &ConvergenceReport) -> String {
    let mut s = String::new();
    writeln!(s, "{:>10} {:>9} {:>12} {:>12} {:>12} {:>12} {:>8}", "delta", "dofs", "e0", "e1", "e2", "e3", "seconds").unwrap();
    for row in &r.rows {
        let e: Vec<String> =
            row.l2.iter().map(|v| if v.is_finite() { format!("{v:12.4e}") } else { format!("{:>12}", "-") }).collect();
        writeln!(s, "{:>10.6} {:>9} {} {:>8.1}", row.delta, row.dofs, e.join(" "), row.seconds).unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "L2 slopes over delta in {:?}:", r.fit_deltas).unwrap();
    for (k, f) in r.slopes.iter().enumerate() {
        writeln!(s, "  e{k}: {}   (H1: {}, without largest delta: {})", fmt_slope(f), fmt_slope(&r.h1_slopes[k]), fmt_slope(&r.slopes_tail[k]))
            .unwrap();
    }
    let c = &r.constants;
    writeln!(s).unwrap();
    writeln!(
        s,
        "constants: D1 = {:.6e}, D2 = {:.6e}, N1 = {:.6e}, N2 = {:.6e}, N3 = {:.6e}",
        c.d1.re, c.d2.re, c.n1.re, c.n2.re, c.n3.re
    )
    .unwrap();
    writeln!(s, "ell1(+) = {:.6}, ell1(-) = {:.6}", r.ell1[0], r.ell1[1]).unwrap();
    writeln!(s, "L-1(S1+) = {:.6}, L-1(S1-) = {:.6}", r.l_minus_1[0], r.l_minus_1[1]).unwrap();
    if let Some(e) = r.reference_error {
        writeln!(s, "reference mesh error (L2, smallest delta): {e:.3e}").unwrap();
    }
    writeln!(s, "cascade time: {:.1} s", r.cascade_seconds).unwrap();
    for (col, v, lo, hi, ok) in &r.checks {
        writeln!(s, "check {col}: slope {v:.3} in [{lo}, {hi}]: {}", if *ok { "pass" } else { "FAIL" }).unwrap();
    }
    s
}

/// Gnuplot script drawing the errors against δ on log-log axes with the fitted slopes.
pub fn gnuplot_script(r: &ConvergenceReport, csv_name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "set terminal pngcairo size 800,600").unwrap();
    writeln!(s, "set output 'errors.png'").unwrap();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set logscale xy").unwrap();
    writeln!(s, "set xlabel 'delta'").unwrap();
    writeln!(s, "set ylabel 'L2 error in Omega_alpha'").unwrap();
    writeln!(s, "set key top left").unwrap();
    writeln!(s, "set grid").unwrap();
    let names = ["u00", "u00 + delta u01", "u00 + delta u01 + delta^l2 u20", "+ delta^l3 u30"];
    let mut plots = Vec::new();
    for (k, f) in r.slopes.iter().enumerate() {
        let Some(f) = f else { continue };
        writeln!(s, "f{k}(x) = exp({}) * x**{}", f.intercept, f.slope).unwrap();
        plots.push(format!("'{csv_name}' every ::1 using 1:{} with linespoints pt 7 title '{}'", k + 3, names[k]));
        plots.push(format!("f{k}(x) with lines dt 2 title 'slope {:.2}'", f.slope));
    }
    writeln!(s, "plot {}", plots.join(", \\\n     ")).unwrap();
    s
}

/// Write errors.csv, report.txt, errors.gp and report.json into `dir`.
pub fn emit_outputs(r: &ConvergenceReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("errors.csv"), write_csv(&r.rows))?;
    std::fs::write(dir.join("report.txt"), format_table(r))?;
    std::fs::write(dir.join("errors.gp"), gnuplot_script(r, "errors.csv"))?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(r)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_round_trip() {
        assert_eq!(write_csv(&[]), "delta,dofs,e0,e1,e2,e3\n");
        let rows = vec![ErrorRow { delta: 0.125, dofs: 10, l2: [0.1, 1.0 / 3.0, 2e-5, f64::NAN], h1: [0.0; 4], seconds: 1.0 }];
        let back = parse_csv(&write_csv(&rows)).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].0, 0.125);
        assert_eq!(back[0].1, 10);
        assert_eq!(back[0].2[..3], rows[0].l2[..3]);
        assert!(back[0].2[3].is_nan());
        assert!(parse_csv("a,b\n").is_err());
    }
}
