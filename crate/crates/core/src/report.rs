//! CSV tables and SVG line charts. Floats are written with 17 significant
//! digits so that reruns can be compared byte for byte.

use std::path::Path;

use plotters::prelude::*;

use crate::analysis::{DissipativityReport, EnergyTrace, SweepTable};
use crate::error::{Error, Result};
use crate::spectrum::Eigenpair;

pub const ENERGY_HEADER: [&str; 4] = ["t", "E_weighted", "E_standard", "mean_drift"];
pub const RESOLVENT_HEADER: [&str; 6] = ["b", "a", "sample_id", "residual", "norm_weighted", "criterion_value"];
pub const SPECTRUM_HEADER: [&str; 4] = ["index", "re", "im", "residual"];
pub const DISSIPATIVITY_HEADER: [&str; 4] = ["sample_id", "q_over_norm2", "flow_budget", "pressure_plate_budget"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(format!("{}: {e}", path.display())))
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn write_energy_csv(path: &Path, t: &EnergyTrace) -> Result<()> {
    let rows = (0..t.times.len())
        .map(|k| vec![fmt_f64(t.times[k]), fmt_f64(t.e_weighted[k]), fmt_f64(t.e_standard[k]), fmt_f64(t.mean_drift[k])]);
    write_rows(path, &ENERGY_HEADER, rows)
}

pub fn write_resolvent_csv(path: &Path, t: &SweepTable) -> Result<()> {
    let rows = t.records.iter().map(|r| {
        vec![
            fmt_f64(r.b),
            fmt_f64(r.a),
            r.sample_id.to_string(),
            fmt_f64(r.residual),
            fmt_f64(r.norm_weighted),
            fmt_f64(r.criterion_value),
        ]
    });
    write_rows(path, &RESOLVENT_HEADER, rows)
}

pub fn write_spectrum_csv(path: &Path, ev: &[Eigenpair]) -> Result<()> {
    let rows = ev.iter().enumerate().map(|(k, e)| vec![k.to_string(), fmt_f64(e.re), fmt_f64(e.im), fmt_f64(e.residual)]);
    write_rows(path, &SPECTRUM_HEADER, rows)
}

pub fn write_dissipativity_csv(path: &Path, d: &DissipativityReport) -> Result<()> {
    let rows = d.samples.iter().map(|s| {
        vec![s.sample_id.to_string(), fmt_f64(s.q_over_norm2), fmt_f64(s.flow_budget), fmt_f64(s.pressure_plate_budget)]
    });
    write_rows(path, &DISSIPATIVITY_HEADER, rows)
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series], log_x: bool, log_y: bool) -> ((f64, f64), (f64, f64)) {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if (log_x && x <= 0.0) || (log_y && y <= 0.0) || !x.is_finite() || !y.is_finite() {
                continue;
            }
            xr = (xr.0.min(x), xr.1.max(x));
            yr = (yr.0.min(y), yr.1.max(y));
        }
    }
    let widen = |r: (f64, f64), log: bool| {
        if !r.0.is_finite() {
            return if log { (0.1, 1.0) } else { (0.0, 1.0) };
        }
        if r.0 == r.1 {
            return if log { (r.0 * 0.5, r.1 * 2.0) } else { (r.0 - 0.5, r.1 + 0.5) };
        }
        r
    };
    (widen(xr, log_x), widen(yr, log_y))
}

/// Line chart (or scatter when `points_only`) with optional log axes.
fn line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    log_x: bool,
    log_y: bool,
    points_only: bool,
) -> Result<()> {
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    let err = |e: &dyn std::fmt::Display| io_err(path, e);
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let (xr, yr) = bounds(series, log_x, log_y);
    let mut builder = ChartBuilder::on(&root);
    builder.caption(title, ("sans-serif", 22)).margin(12).x_label_area_size(40).y_label_area_size(70);
    macro_rules! draw {
        ($chart:expr) => {{
            let mut chart = $chart;
            chart.configure_mesh().x_desc(x_label).y_desc(y_label).draw().map_err(|e| err(&e))?;
            for (k, s) in series.iter().enumerate() {
                let color = Palette99::pick(k).to_rgba();
                let pts: Vec<(f64, f64)> = s
                    .points
                    .iter()
                    .copied()
                    .filter(|&(x, y)| x.is_finite() && y.is_finite() && (!log_x || x > 0.0) && (!log_y || y > 0.0))
                    .collect();
                if points_only {
                    chart
                        .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
                        .map_err(|e| err(&e))?
                        .label(s.name.clone())
                        .legend(move |(x, y)| Circle::new((x, y), 3, color.filled()));
                } else {
                    chart
                        .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                        .map_err(|e| err(&e))?
                        .label(s.name.clone())
                        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
                }
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(|e| err(&e))?;
        }};
    }
    match (log_x, log_y) {
        (false, false) => draw!(builder.build_cartesian_2d(xr.0..xr.1, yr.0..yr.1).map_err(|e| err(&e))?),
        (false, true) => draw!(builder.build_cartesian_2d(xr.0..xr.1, (yr.0..yr.1).log_scale()).map_err(|e| err(&e))?),
        (true, false) => draw!(builder.build_cartesian_2d((xr.0..xr.1).log_scale(), yr.0..yr.1).map_err(|e| err(&e))?),
        (true, true) => {
            draw!(builder.build_cartesian_2d((xr.0..xr.1).log_scale(), (yr.0..yr.1).log_scale()).map_err(|e| err(&e))?)
        }
    }
    root.present().map_err(|e| err(&e))?;
    Ok(())
}

pub fn plot_energy(path: &Path, t: &EnergyTrace) -> Result<()> {
    let s = vec![
        Series { name: "E_weighted".into(), points: t.times.iter().copied().zip(t.e_weighted.iter().copied()).collect() },
        Series { name: "E_standard".into(), points: t.times.iter().copied().zip(t.e_standard.iter().copied()).collect() },
    ];
    line_chart(path, "Energy", "t", "energy", &s, false, true, false)
}

/// Criterion value against `a`, averaged over samples, one line per `b`.
pub fn plot_resolvent(path: &Path, t: &SweepTable) -> Result<()> {
    let mut bs: Vec<f64> = Vec::new();
    for r in &t.records {
        if !bs.contains(&r.b) {
            bs.push(r.b);
        }
    }
    let series: Vec<Series> = bs
        .iter()
        .map(|&b| {
            let mut pts: Vec<(f64, f64, usize)> = Vec::new();
            for r in t.records.iter().filter(|r| r.b == b) {
                match pts.iter_mut().find(|p| p.0 == r.a) {
                    Some(p) => {
                        p.1 += r.criterion_value;
                        p.2 += 1;
                    }
                    None => pts.push((r.a, r.criterion_value, 1)),
                }
            }
            Series { name: format!("b = {b}"), points: pts.into_iter().map(|(a, s, c)| (a, s / c as f64)).collect() }
        })
        .collect();
    line_chart(path, "Pointwise resolvent criterion", "a", "sqrt(a) |||R(a+ib) phi|||", &series, true, true, false)
}

pub fn plot_spectrum(path: &Path, ev: &[Eigenpair]) -> Result<()> {
    let s = vec![Series { name: "eigenvalues".into(), points: ev.iter().map(|e| (e.re, e.im)).collect() }];
    line_chart(path, "Rightmost eigenvalues", "Re", "Im", &s, false, false, true)
}

pub fn plot_dissipativity(path: &Path, d: &DissipativityReport) -> Result<()> {
    let s = vec![Series {
        name: "q / |||phi|||^2".into(),
        points: d.samples.iter().map(|s| (s.sample_id as f64, s.q_over_norm2)).collect(),
    }];
    line_chart(path, "Weighted dissipativity", "sample", "q / norm^2", &s, false, false, true)
}
