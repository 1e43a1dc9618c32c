//! SVG figures and equivalent gnuplot scripts for tables that carry a plot description.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::experiments::Report;
use crate::outcome::{HarnessError, Outcome};
use crate::table::{PlotSpec, ResultTable, TableMeta, HASH_COLUMN};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Writes `<stem>.svg` and `<stem>.gp` next to each CSV whose sidecar has a plot spec.
/// Empty tables produce no files; malformed ones are schema errors.
pub fn emit_figures(csvs: &[PathBuf]) -> Result<Report, HarnessError> {
    let mut report = Report::new(Outcome::Pass);
    for path in csvs {
        let (table, meta) = ResultTable::read(path)?;
        let Some(plot) = &table.plot else {
            continue;
        };
        match render_svg(&table, plot, &meta)? {
            Some(svg) => {
                std::fs::write(path.with_extension("svg"), svg)?;
                std::fs::write(path.with_extension("gp"), gnuplot_script(&table, plot, &meta, path)?)?;
                report.messages.push(format!("wrote {}", path.with_extension("svg").display()));
            }
            None => report.messages.push(format!("{}: nothing to plot", path.display())),
        }
    }
    Ok(report)
}

/// All `*.csv` files directly inside `dir`, sorted.
pub fn tables_in(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if !dir.is_dir() {
        return Err(HarnessError::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    out.sort();
    Ok(out)
}

fn schema(table: &ResultTable, msg: String) -> HarnessError {
    HarnessError::Usage(format!("table {}: schema error: {msg}", table.name))
}

type Series = (String, Vec<(f64, f64)>);

fn series(table: &ResultTable, plot: &PlotSpec) -> Result<Vec<Series>, HarnessError> {
    let xs = table
        .numeric_column(&plot.x)
        .ok_or_else(|| schema(table, format!("x column {:?} is missing or not numeric", plot.x)))?;
    let keep = |x: f64, y: f64| x.is_finite() && y.is_finite() && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0);
    plot.y
        .iter()
        .map(|name| {
            let ys = table
                .numeric_column(name)
                .ok_or_else(|| schema(table, format!("y column {name:?} is missing or not numeric")))?;
            let pts = xs.iter().zip(&ys).filter(|(x, y)| keep(**x, **y)).map(|(x, y)| (*x, *y)).collect();
            Ok((name.clone(), pts))
        })
        .collect()
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    ticks: Vec<f64>,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let vals: Vec<f64> = values.map(|v| if log { v.log10() } else { v }).collect();
        let (mut lo, mut hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        if log {
            lo = lo.floor();
            hi = hi.ceil().max(lo + 1.0);
            let ticks = (lo as i64..=hi as i64).map(|k| k as f64).collect();
            return Self { log, lo, hi, ticks };
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5 * lo.abs().max(1.0);
            hi += 0.5 * hi.abs().max(1.0);
        }
        let pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
        let ticks = (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect();
        Self { log, lo, hi, ticks }
    }

    /// Fraction of the axis length at data value `v`.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, t: f64) -> String {
        if self.log {
            format!("1e{}", t as i64)
        } else {
            let s = format!("{t:.3}");
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn unit_of(table: &ResultTable, col: &str) -> String {
    table.column(col).map(|i| table.columns[i].unit.clone()).unwrap_or_default()
}

/// Reference value at `x` for a line of the given slope through `(x0, y0)`: a power law on
/// log-log axes, an exponential on semi-log axes, a straight line otherwise.
fn reference(plot: &PlotSpec, slope: f64, (x0, y0): (f64, f64), x: f64) -> f64 {
    match (plot.log_x, plot.log_y) {
        (true, true) => y0 * (x / x0).powf(slope),
        (false, true) => y0 * 10f64.powf(slope * (x - x0)),
        (true, false) => y0 + slope * (x / x0).log10(),
        (false, false) => y0 + slope * (x - x0),
    }
}

pub fn render_svg(table: &ResultTable, plot: &PlotSpec, meta: &TableMeta) -> Result<Option<String>, HarnessError> {
    let data = series(table, plot)?;
    if data.iter().all(|(_, pts)| pts.is_empty()) {
        return Ok(None);
    }
    let all = || data.iter().flat_map(|(_, p)| p.iter().copied());
    let anchor = data.iter().find_map(|(_, p)| p.first().copied());
    let x_axis = Axis::new(all().map(|p| p.0), plot.log_x);
    let xs_ends = [x_axis.lo, x_axis.hi].map(|v| if plot.log_x { 10f64.powf(v) } else { v });
    let mut y_vals: Vec<f64> = all().map(|p| p.1).collect();
    if let (Some(k), Some(a)) = (plot.reference_slope, anchor) {
        y_vals.extend(
            xs_ends.iter().map(|&x| reference(plot, k, a, x)).filter(|y| y.is_finite() && (!plot.log_y || *y > 0.0)),
        );
    }
    let y_axis = Axis::new(y_vals.into_iter(), plot.log_y);

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + pw * x_axis.frac(x);
    let py = |y: f64| TOP + ph * (1.0 - y_axis.frac(y));

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, "<!-- {HASH_COLUMN}: {} -->", meta.config_hash);
    let _ = writeln!(
        w,
        "<desc>{} (code {}), {HASH_COLUMN} {}</desc>",
        escape(&table.name),
        meta.code_version,
        meta.config_hash
    );
    let _ = writeln!(
        w,
        r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    for &t in &x_axis.ticks {
        let x = LEFT + pw * (t - x_axis.lo) / (x_axis.hi - x_axis.lo);
        let _ = writeln!(w, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + ph);
        let _ = writeln!(
            w,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            x_axis.label(t)
        );
    }
    for &t in &y_axis.ticks {
        let y = TOP + ph * (1.0 - (t - y_axis.lo) / (y_axis.hi - y_axis.lo));
        let _ = writeln!(w, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            y_axis.label(t)
        );
    }
    let _ = writeln!(w, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let xlabel = format!("{} [{}]", plot.x, unit_of(table, &plot.x));
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(&xlabel)
    );

    if let (Some(k), Some(a)) = (plot.reference_slope, anchor) {
        let n = 64;
        let pts: Vec<String> = (0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                let t = x_axis.lo + f * (x_axis.hi - x_axis.lo);
                let x = if plot.log_x { 10f64.powf(t) } else { t };
                (x, reference(plot, k, a, x))
            })
            .filter(|(_, y)| y.is_finite() && (!plot.log_y || *y > 0.0))
            .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline clip-path="url(#plot)" points="{}" fill="none" stroke="gray" stroke-dasharray="6 4"/>"#,
            pts.join(" ")
        );
    }
    for (i, (name, pts)) in data.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            w,
            r#"<polyline clip-path="url(#plot)" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name));
    }
    if let Some(k) = plot.reference_slope {
        let ly = TOP + 16.0 + 16.0 * data.len() as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            lx + 20.0
        );
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">slope {}</text>"#, lx + 26.0, ly + 4.0, fmt_num(k));
    }
    let _ = writeln!(w, "</svg>");
    Ok(Some(s))
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Gnuplot script that draws the same figure from the CSV (data starts on line 3).
pub fn gnuplot_script(
    table: &ResultTable,
    plot: &PlotSpec,
    meta: &TableMeta,
    csv: &Path,
) -> Result<String, HarnessError> {
    let data = series(table, plot)?;
    let col =
        |name: &str| table.column(name).map(|i| i + 1).ok_or_else(|| schema(table, format!("no column {name:?}")));
    let xc = col(&plot.x)?;
    let file = csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = String::new();
    let _ = writeln!(s, "# {HASH_COLUMN}: {}", meta.config_hash);
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal svg size {WIDTH},{HEIGHT}");
    let _ = writeln!(s, "set output '{}.gnuplot.svg'", table.name);
    let _ = writeln!(s, "set title '{}'", plot.title.replace('\'', "''"));
    let _ = writeln!(s, "set xlabel '{} [{}]'", plot.x, unit_of(table, &plot.x));
    if plot.log_x {
        let _ = writeln!(s, "set logscale x");
    }
    if plot.log_y {
        let _ = writeln!(s, "set logscale y");
    }
    let mut parts: Vec<String> = Vec::new();
    for name in &plot.y {
        parts.push(format!("'{file}' every ::2 using {xc}:{} with linespoints title '{name}'", col(name)?));
    }
    if let (Some(k), Some((x0, y0))) = (plot.reference_slope, data.iter().find_map(|(_, p)| p.first().copied())) {
        let f = match (plot.log_x, plot.log_y) {
            (true, true) => format!("{y0:e}*(x/{x0:e})**({k})"),
            (false, true) => format!("{y0:e}*10**(({k})*(x-{x0:e}))"),
            (true, false) => format!("{y0:e}+({k})*log10(x/{x0:e})"),
            (false, false) => format!("{y0:e}+({k})*(x-{x0:e})"),
        };
        parts.push(format!("{f} with lines dashtype 2 title 'slope {}'", fmt_num(k)));
    }
    let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_table() -> ResultTable {
        let mut t = ResultTable::new("decay", &[("t", "time"), ("l2", "1")]);
        for k in 0..5 {
            let x = 10f64.powi(k);
            t.push(vec![x.into(), x.powf(-0.25).into()]).unwrap();
        }
        t.with_plot(PlotSpec {
            x: "t".into(),
            y: vec!["l2".into()],
            log_x: true,
            log_y: true,
            reference_slope: Some(-0.25),
            title: "decay".into(),
        })
    }

    #[test]
    fn writes_svg_with_reference_line_and_hash() {
        let dir = tempfile::tempdir().unwrap();
        let path = decay_table().write(dir.path(), "h42").unwrap();
        let rep = emit_figures(std::slice::from_ref(&path)).unwrap();
        assert_eq!(rep.outcome, Outcome::Pass);
        let svg = std::fs::read_to_string(path.with_extension("svg")).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("config_hash: h42"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("slope -0.25"));
        assert_eq!(svg.matches("<circle").count(), 5);
        let gp = std::fs::read_to_string(path.with_extension("gp")).unwrap();
        assert!(gp.contains("set logscale x") && gp.contains("every ::2 using 1:2"));
        // deterministic
        emit_figures(std::slice::from_ref(&path)).unwrap();
        assert_eq!(std::fs::read_to_string(path.with_extension("svg")).unwrap(), svg);
    }

    #[test]
    fn empty_table_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = decay_table();
        t.rows.clear();
        let path = t.write(dir.path(), "h").unwrap();
        assert_eq!(emit_figures(std::slice::from_ref(&path)).unwrap().outcome, Outcome::Pass);
        assert!(!path.with_extension("svg").exists());
    }

    #[test]
    fn malformed_tables_are_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = decay_table().write(dir.path(), "h").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replacen("1,h", "1,2,h", 1)).unwrap();
        let err = emit_figures(&[path]).unwrap_err();
        assert_eq!(err.outcome(), Outcome::Usage);

        let mut t = decay_table();
        t.plot.as_mut().unwrap().y = vec!["nope".into()];
        let path = t.write(dir.path(), "h").unwrap();
        assert!(emit_figures(&[path]).is_err());
    }
}
