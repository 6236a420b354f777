//! SVG line plots of harness CSVs: one line per series, mean ± standard
//! deviation band.
//!
//! The root element records the data window (`data-xmin`, `data-ymax`, ...)
//! and the plot area in pixels so a reader can map polyline points back to
//! values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::experiments::{mean, sample_std};
use crate::csvio::Table;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const PLOT_W: f64 = 530.0;
const PLOT_H: f64 = 320.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One plotted line: `(x, mean, std)` triples sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedCsv {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

struct Columns<'a> {
    table: &'a Table,
    path: &'a Path,
}

impl Columns<'_> {
    fn index(&self, name: &str) -> Result<usize> {
        self.table
            .column(name)
            .ok_or_else(|| malformed(self.path, format!("missing column {name}")))
    }

    fn num(&self, row: &[String], col: usize) -> Result<f64> {
        row[col]
            .parse()
            .map_err(|_| malformed(self.path, format!("not a number: {}", row[col])))
    }
}

/// Groups `(series, x, y)` observations into mean ± std lines, keeping
/// series in order of first appearance.
fn aggregate(obs: Vec<(String, f64, f64)>) -> Vec<Series> {
    let mut names: Vec<String> = Vec::new();
    for (s, _, _) in &obs {
        if !names.contains(s) {
            names.push(s.clone());
        }
    }
    names
        .into_iter()
        .map(|name| {
            let mut xs: Vec<f64> = obs.iter().filter(|o| o.0 == name).map(|o| o.1).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let points = xs
                .into_iter()
                .map(|x| {
                    let ys: Vec<f64> = obs
                        .iter()
                        .filter(|o| o.0 == name && o.1 == x)
                        .map(|o| o.2)
                        .collect();
                    (x, mean(ys.iter().copied()), sample_std(&ys))
                })
                .collect();
            Series { name, points }
        })
        .collect()
}

/// Builds a figure from any CSV the harness writes.
pub fn figure_from_table(table: &Table, path: &Path) -> Result<Figure> {
    if table.rows.is_empty() {
        return Err(malformed(path, "no data rows"));
    }
    let c = Columns { table, path };
    let header: Vec<&str> = table.header.iter().map(String::as_str).collect();
    let figure = |title: &str, x: &str, y: &str, series| Figure {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        series,
    };
    match header.as_slice() {
        ["eta_initial", "trial", "round", "noise_rate"] => {
            let (e, k, v) = (c.index("eta_initial")?, c.index("round")?, c.index("noise_rate")?);
            let obs = table
                .rows
                .iter()
                .map(|r| Ok((format!("eta={}", c.num(r, e)?), c.num(r, k)?, c.num(r, v)?)))
                .collect::<Result<_>>()?;
            Ok(figure("Noise rate by round", "round", "noise rate", aggregate(obs)))
        }
        ["eta_initial", "mean_final_noise"] => {
            let obs = table
                .rows
                .iter()
                .map(|r| Ok(("final".to_string(), c.num(r, 0)?, c.num(r, 1)?)))
                .collect::<Result<_>>()?;
            Ok(figure("Final vs initial noise", "initial noise", "final noise", aggregate(obs)))
        }
        ["condition", "budget", "trial", "error"] => {
            let obs = table
                .rows
                .iter()
                .map(|r| Ok((r[0].clone(), c.num(r, 1)?, c.num(r, 3)?)))
                .collect::<Result<_>>()?;
            Ok(figure("Generalization error", "labels", "error", aggregate(obs)))
        }
        ["condition", "budget", "trial", "labels_used"] => {
            let obs = table
                .rows
                .iter()
                .map(|r| Ok((r[0].clone(), c.num(r, 1)?, c.num(r, 3)?)))
                .collect::<Result<_>>()?;
            Ok(figure("Labels used", "budget", "labels used", aggregate(obs)))
        }
        ["condition", "budget", "mean_error", "std_error"] => {
            let mut series: Vec<Series> = Vec::new();
            for r in &table.rows {
                let p = (c.num(r, 1)?, c.num(r, 2)?, c.num(r, 3)?);
                match series.iter_mut().find(|s| s.name == r[0]) {
                    Some(s) => s.points.push(p),
                    None => series.push(Series {
                        name: r[0].clone(),
                        points: vec![p],
                    }),
                }
            }
            for s in &mut series {
                s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            Ok(figure("Generalization error", "labels", "error", series))
        }
        ["sweep_param", "value", "condition", "budget", "mean_error", "std_error", "mean_noise_pre", "mean_noise_post"] =>
        {
            let obs = table
                .rows
                .iter()
                .map(|r| Ok((format!("{}@{}", r[2], r[3]), c.num(r, 1)?, c.num(r, 4)?)))
                .collect::<Result<_>>()?;
            let x = table.rows[0][0].clone();
            Ok(figure("Error across the sweep", &x, "mean error", aggregate(obs)))
        }
        ["trial", "noise_pre", "noise_post"] => {
            let mut obs = Vec::new();
            for r in &table.rows {
                let t = c.num(r, 0)?;
                obs.push(("pre".to_string(), t, c.num(r, 1)?));
                obs.push(("post".to_string(), t, c.num(r, 2)?));
            }
            Ok(figure("Noise before and after denoising", "trial", "noise rate", aggregate(obs)))
        }
        _ => Err(malformed(path, format!("unrecognized header {}", table.header.join(",")))),
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a figure as a standalone SVG document.
pub fn render_svg(fig: &Figure) -> String {
    let all = || fig.series.iter().flat_map(|s| s.points.iter());
    let (xmin, xmax) = bounds(all().map(|p| p.0));
    let (ymin, ymax) = bounds(all().flat_map(|p| [p.1 - p.2, p.1 + p.2]));
    let px = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * PLOT_W;
    let py = |y: f64| TOP + PLOT_H - (y - ymin) / (ymax - ymin) * PLOT_H;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-xmin="{xmin:e}" data-xmax="{xmax:e}" data-ymin="{ymin:e}" data-ymax="{ymax:e}" data-left="{LEFT}" data-top="{TOP}" data-width="{PLOT_W}" data-height="{PLOT_H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&fig.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="#444"/>"##
    );
    for (v, anchor_y) in [(ymin, TOP + PLOT_H), (ymax, TOP)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{anchor_y}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.4}</text>"#,
            LEFT - 6.0
        );
    }
    for (v, anchor_x) in [(xmin, LEFT), (xmax, LEFT + PLOT_W)] {
        let _ = writeln!(
            s,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{v}</text>"#,
            TOP + PLOT_H + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        LEFT + PLOT_W / 2.0,
        TOP + PLOT_H + 36.0,
        escape(&fig.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        escape(&fig.y_label)
    );

    for (k, series) in fig.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let upper = series.points.iter().map(|p| (px(p.0), py(p.1 + p.2)));
        let lower = series.points.iter().rev().map(|p| (px(p.0), py(p.1 - p.2)));
        let band: Vec<String> = upper
            .chain(lower)
            .map(|(x, y)| format!("{x:.3},{y:.3}"))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = series
            .points
            .iter()
            .map(|p| format!("{:.3},{:.3}", px(p.0), py(p.1)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline data-series="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            escape(&series.name),
            line.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            LEFT + PLOT_W - 120.0,
            TOP + 16.0 + 14.0 * k as f64,
            escape(&series.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<out>/<stem>.svg` for every input CSV.
pub fn cmd_plot(csvs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    if csvs.is_empty() {
        return Err(Error::Config("plot needs at least one CSV".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    csvs.iter()
        .map(|path| {
            let table = Table::read(path)?;
            let svg = render_svg(&figure_from_table(&table, path)?);
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "plot".into());
            let target = out.join(format!("{stem}.svg"));
            std::fs::write(&target, svg).map_err(|e| Error::io(&target, e))?;
            Ok(target)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Table {
        Table::parse(text, Path::new("t.csv")).unwrap()
    }

    #[test]
    fn header_only_is_an_error() {
        let t = table("condition,budget,trial,error\n");
        assert!(matches!(
            figure_from_table(&t, Path::new("t.csv")),
            Err(Error::MalformedCsv { .. })
        ));
    }

    #[test]
    fn unknown_schema_is_an_error() {
        let t = table("a,b\n1,2\n");
        assert!(figure_from_table(&t, Path::new("t.csv")).is_err());
    }

    #[test]
    fn learn_errors_aggregate_per_condition() {
        let t = table(
            "condition,budget,trial,error\nactive_post,10,0,0.1\nactive_post,10,1,0.3\n\
             passive_post,10,0,0.2\nactive_post,5,0,0.5\n",
        );
        let f = figure_from_table(&t, Path::new("t.csv")).unwrap();
        assert_eq!(f.series.len(), 2);
        let a = &f.series[0];
        assert_eq!(a.name, "active_post");
        assert_eq!(a.points[0], (5.0, 0.5, 0.0));
        assert_eq!(a.points[1].0, 10.0);
        assert!((a.points[1].1 - 0.2).abs() < 1e-12);
        let svg = render_svg(&f);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
