//! Hand-rolled SVG scatter plots for two-objective experiments: start
//! images drawn as plus marks, final images as circles, on labeled axes.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const TICKS: usize = 5;

/// Affine map from a data interval onto a pixel interval.
struct Scale {
    data_lo: f64,
    data_span: f64,
    px_lo: f64,
    px_span: f64,
}

impl Scale {
    /// Covers `[lo, hi]` padded by 5% on both sides (and by a token amount
    /// when the interval is a single point).
    fn fit(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let pad = 0.05 * (hi - lo).max(1e-9);
        Scale {
            data_lo: lo - pad,
            data_span: (hi - lo) + 2.0 * pad,
            px_lo,
            px_span: px_hi - px_lo,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.data_lo) / self.data_span * self.px_span
    }

    fn tick(&self, i: usize) -> f64 {
        self.data_lo + self.data_span * i as f64 / (TICKS - 1) as f64
    }
}

/// Renders start and final images into a self-contained SVG document with
/// exactly one plus mark per start and one circle per final.
pub fn scatter(title: &str, starts: &[[f64; 2]], finals: &[[f64; 2]]) -> String {
    let all = starts.iter().chain(finals);
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in all {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    if !lo[0].is_finite() {
        lo = [0.0; 2];
        hi = [1.0; 2];
    }
    let sx = Scale::fit(lo[0], hi[0], MARGIN, WIDTH - MARGIN);
    // Pixel y grows downward, so the y scale is flipped.
    let sy = Scale::fit(lo[1], hi[1], HEIGHT - MARGIN, MARGIN);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(
        "<style>\
         .axis{stroke:#333;stroke-width:1}\
         .tick{font:11px sans-serif;fill:#333}\
         .label{font:13px sans-serif;fill:#111}\
         .title{font:14px sans-serif;fill:#111}\
         .start{stroke:#1f77b4;stroke-width:1.4;fill:none}\
         .final{stroke:#d62728;stroke-width:1.4;fill:none}\
         </style>\n",
    );
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text class=\"title\" x=\"{}\" y=\"24\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title),
    ));

    // Axes with tick marks and numeric labels.
    let x0 = MARGIN;
    let y0 = HEIGHT - MARGIN;
    out.push_str(&format!(
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\"/>\n",
        WIDTH - MARGIN
    ));
    out.push_str(&format!(
        "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{MARGIN}\"/>\n"
    ));
    for i in 0..TICKS {
        let vx = sx.tick(i);
        let px = sx.map(vx);
        out.push_str(&format!(
            "<line class=\"axis\" x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\"/>\n",
            y0 + 5.0
        ));
        out.push_str(&format!(
            "<text class=\"tick\" x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            y0 + 18.0,
            tick_label(vx),
        ));
        let vy = sy.tick(i);
        let py = sy.map(vy);
        out.push_str(&format!(
            "<line class=\"axis\" x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\"/>\n",
            x0 - 5.0
        ));
        out.push_str(&format!(
            "<text class=\"tick\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            x0 - 8.0,
            py + 4.0,
            tick_label(vy),
        ));
    }
    out.push_str(&format!(
        "<text class=\"label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">f1</text>\n",
        WIDTH / 2.0,
        HEIGHT - 14.0
    ));
    out.push_str(&format!(
        "<text class=\"label\" x=\"18\" y=\"{}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {})\">f2</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));

    // One plus mark per start image, one circle per final image.
    for p in starts {
        let (px, py) = (sx.map(p[0]), sy.map(p[1]));
        out.push_str(&format!(
            "<path class=\"start\" d=\"M{} {py}H{}M{px} {}V{}\"/>\n",
            px - 4.0,
            px + 4.0,
            py - 4.0,
            py + 4.0,
        ));
    }
    for p in finals {
        let (px, py) = (sx.map(p[0]), sy.map(p[1]));
        out.push_str(&format!(
            "<circle class=\"final\" cx=\"{px}\" cy=\"{py}\" r=\"3.5\"/>\n"
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
