//! CSV and SVG emission.
//!
//! The CSV header is a stable contract for downstream plotting; disabled
//! columns stay present but empty. Every numeric is written with 17
//! significant digits so a double round-trips exactly and repeated runs are
//! bit-identical.

use std::io::Write;

use crate::run::PointResult;
use crate::CliError;

pub const CSV_HEADER: &str = "sweep_param,sweep_value,p_err_analytic,mi_analytic,p_err_mc,\
p_err_mc_err,mi_mc,mi_mc_err,p_err_helstrom,p_err_homodyne,delta_th";

/// 17 significant digits: one leading digit plus 16 after the point.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(point: &PointResult) -> String {
    let (param, value) = match &point.sweep {
        Some((p, v)) => (p.name().to_string(), g17(*v)),
        None => (String::new(), String::new()),
    };
    let (p_mc, p_mc_err, mi_mc, mi_mc_err) = match &point.mc {
        Some(run) => (
            g17(run.p_err.mean),
            g17(run.p_err.error_bar),
            g17(run.mi.mean),
            g17(run.mi.error_bar),
        ),
        None => (String::new(), String::new(), String::new(), String::new()),
    };
    let delta_th = point.delta_th.map(|d| d.to_string()).unwrap_or_default();
    format!(
        "{param},{value},{},{},{p_mc},{p_mc_err},{mi_mc},{mi_mc_err},{},{},{delta_th}",
        g17(point.fom.p_err),
        g17(point.fom.mi_bits),
        g17(point.p_err_helstrom),
        g17(point.p_err_homodyne),
    )
}

pub fn write_csv(points: &[PointResult], target: Option<&std::path::Path>) -> Result<(), CliError> {
    let mut body = String::with_capacity(64 + 256 * points.len());
    body.push_str(CSV_HEADER);
    body.push('\n');
    for p in points {
        body.push_str(&csv_row(p));
        body.push('\n');
    }
    match target {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Failure(format!("csv: cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body.as_bytes())
                .map_err(|e| CliError::Failure(format!("csv: stdout: {e}")))
        }
    }
}

/// Minimal hand-rendered SVG line plot: error probability and mutual
/// information against the swept value, each normalized to its own range.
/// The CSV remains the authoritative output.
pub fn render_svg(points: &[PointResult], x_label: &str) -> String {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const M: f64 = 64.0;

    let xs: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| p.sweep.map(|(_, v)| v).unwrap_or(i as f64))
        .collect();
    let p_err: Vec<f64> = points.iter().map(|p| p.fom.p_err).collect();
    let mi: Vec<f64> = points.iter().map(|p| p.fom.mi_bits).collect();

    let range = |v: &[f64]| -> (f64, f64) {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if (hi - lo).abs() < f64::EPSILON {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x_lo, x_hi) = range(&xs);
    let scale_x = move |x: f64| M + (x - x_lo) / (x_hi - x_lo) * (W - 2.0 * M);
    let polyline = |v: &[f64]| -> String {
        let (lo, hi) = range(v);
        xs.iter()
            .zip(v)
            .map(|(&x, &y)| {
                let sy = H - M - (y - lo) / (hi - lo) * (H - 2.0 * M);
                format!("{:.2},{:.2}", scale_x(x), sy)
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let (pe_lo, pe_hi) = range(&p_err);
    let (mi_lo, mi_hi) = range(&mi);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n  <g stroke=\"black\" \
         stroke-width=\"1\">\n    <line x1=\"{M}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n    \
         <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\"/>\n  </g>\n",
        H - M,
        W - M,
        H - M,
        H - M
    ));
    for (v, color) in [(&p_err, "crimson"), (&mi, "steelblue")] {
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            polyline(v)
        ));
        for point in polyline(v).split(' ') {
            if let Some((x, y)) = point.split_once(',') {
                svg.push_str(&format!(
                    "  <circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{color}\"/>\n"
                ));
            }
        }
    }
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>\n",
        W / 2.0,
        H - M / 3.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{M}\" y=\"{}\" font-size=\"11\">{x_lo:.4}</text>\n  <text x=\"{}\" \
         y=\"{}\" font-size=\"11\" text-anchor=\"end\">{x_hi:.4}</text>\n",
        H - M / 2.0,
        W - M,
        H - M / 2.0
    ));
    svg.push_str(&format!(
        "  <text x=\"8\" y=\"{M}\" font-size=\"11\" fill=\"crimson\">p_err [{pe_lo:.3e}, \
         {pe_hi:.3e}]</text>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"8\" y=\"{}\" font-size=\"11\" fill=\"steelblue\">mi_bits [{mi_lo:.4}, \
         {mi_hi:.4}]</text>\n",
        M + 16.0
    ));
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(
    points: &[PointResult],
    x_label: &str,
    path: &std::path::Path,
) -> Result<(), CliError> {
    std::fs::write(path, render_svg(points, x_label))
        .map_err(|e| CliError::Failure(format!("svg: cannot write {}: {e}", path.display())))
}
