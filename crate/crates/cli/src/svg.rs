//! Hand-rolled SVG line plots: x axis from the `t` column, one polyline per
//! selected column. No dependencies; output is a pure function of the input
//! table so golden-file comparisons are stable.

use crate::trace_io::Table;
use crate::CliError;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn fnum(x: f64) -> String {
    // fixed short float formatting; strip trailing zeros for stability
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn render(table: &Table, cols: &[String]) -> Result<String, CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Parse("empty trace: nothing to plot".into()));
    }
    if cols.is_empty() {
        return Err(CliError::Parse("no columns selected".into()));
    }
    let t = table.column("t")?;
    let series: Vec<(String, Vec<f64>)> = cols
        .iter()
        .map(|c| table.column(c).map(|v| (c.clone(), v)))
        .collect::<Result<_, _>>()?;

    let (tmin, tmax) = bounds(&t);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (_, v) in &series {
        let (lo, hi) = bounds(v);
        ymin = ymin.min(lo);
        ymax = ymax.max(hi);
    }
    let (tmin, tmax) = pad(tmin, tmax);
    let (ymin, ymax) = pad(ymin, ymax);

    let px = |x: f64| MARGIN_L + (x - tmin) / (tmax - tmin) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - ymin) / (ymax - ymin) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fnum(MARGIN_L),
        fnum(HEIGHT - MARGIN_B),
        fnum(WIDTH - MARGIN_R),
        fnum(HEIGHT - MARGIN_B)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fnum(MARGIN_L),
        fnum(MARGIN_T),
        fnum(MARGIN_L),
        fnum(HEIGHT - MARGIN_B)
    ));

    // ticks
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = tmin + f * (tmax - tmin);
        let yv = ymin + f * (ymax - ymin);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{ty}\" text-anchor=\"middle\">{label}</text>\n",
            x = fnum(px(xv)),
            y0 = fnum(HEIGHT - MARGIN_B),
            y1 = fnum(HEIGHT - MARGIN_B + 6.0),
            ty = fnum(HEIGHT - MARGIN_B + 20.0),
            label = fnum(xv)
        ));
        svg.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{tx}\" y=\"{y}\" text-anchor=\"end\" dominant-baseline=\"middle\">{label}</text>\n",
            x0 = fnum(MARGIN_L - 6.0),
            x1 = fnum(MARGIN_L),
            y = fnum(py(yv)),
            tx = fnum(MARGIN_L - 10.0),
            label = fnum(yv)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t</text>\n",
        fnum((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        fnum(HEIGHT - 10.0)
    ));

    // series + legend
    for (idx, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let points: Vec<String> = t
            .iter()
            .zip(values)
            .map(|(&x, &y)| format!("{},{}", fnum(px(x)), fnum(py(y))))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN_T + 16.0 * idx as f64;
        svg.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{tx}\" y=\"{y}\" dominant-baseline=\"middle\">{name}</text>\n",
            x0 = fnum(WIDTH - MARGIN_R + 10.0),
            x1 = fnum(WIDTH - MARGIN_R + 34.0),
            y = fnum(ly + 8.0),
            tx = fnum(WIDTH - MARGIN_R + 40.0),
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn pad(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let d = 0.05 * (hi - lo);
        (lo - d, hi + d)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}
