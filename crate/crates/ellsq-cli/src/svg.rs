//! Minimal self-contained SVG line plot: axes, tick labels at the corners,
//! one polyline. No external assets.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

pub fn polyline_chart(xs: &[f64], ys: &[f64], title: &str) -> String {
    let finite: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let (x0, x1, y0, y1) = bounds(&finite);
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let px = MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);
        (px, py)
    };
    let mut path = String::new();
    for (i, &(x, y)) in finite.iter().enumerate() {
        let (px, py) = to_px(x, y);
        path.push_str(if i == 0 { "M" } else { " L" });
        path.push_str(&format!("{px:.2},{py:.2}"));
    }
    let (ax0, ay0) = (MARGIN_L, HEIGHT - MARGIN_B);
    let (ax1, ay1) = (WIDTH - MARGIN_R, MARGIN_T);
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" ",
            "font-family=\"monospace\" font-size=\"13\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"24\" text-anchor=\"middle\">{title}</text>\n",
            "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax1}\" y2=\"{ay0}\" stroke=\"black\"/>\n",
            "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax0}\" y2=\"{ay1}\" stroke=\"black\"/>\n",
            "<text x=\"{ax0}\" y=\"{xlab_y}\" text-anchor=\"middle\">{x0}</text>\n",
            "<text x=\"{ax1}\" y=\"{xlab_y}\" text-anchor=\"middle\">{x1}</text>\n",
            "<text x=\"{ylab_x}\" y=\"{ay0}\" text-anchor=\"end\">{y0}</text>\n",
            "<text x=\"{ylab_x}\" y=\"{ay1_t}\" text-anchor=\"end\">{y1}</text>\n",
            "<path d=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
            "</svg>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = escape(title),
        ax0 = ax0,
        ay0 = ay0,
        ax1 = ax1,
        ay1 = ay1,
        xlab_y = HEIGHT - MARGIN_B + 22.0,
        ylab_x = MARGIN_L - 8.0,
        ay1_t = MARGIN_T + 5.0,
        x0 = short(x0),
        x1 = short(x1),
        y0 = short(y0),
        y1 = short(y1),
        path = path,
    )
}

fn bounds(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() || x0 == x1 {
        (x0, x1) = (0.0, 1.0);
    }
    if !y0.is_finite() || y0 == y1 {
        (y0, y1) = (0.0, 1.0);
    }
    (x0, x1, y0.min(0.0), y1)
}

fn short(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
