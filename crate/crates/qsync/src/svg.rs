//! Minimal native SVG rendering: line charts and heatmaps.

use std::fmt::Write;

use crate::artifact::{SweepTable, SyncSummary, Table};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(width: f64, height: f64, provenance: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<metadata>{}</metadata>", escape(provenance));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    s
}

/// Plot rectangle in pixels with its data ranges.
struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn frame(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            self.x0, self.y0, self.w, self.h
        );
        for k in 0..=4 {
            let fx = self.xr.0 + (self.xr.1 - self.xr.0) * k as f64 / 4.0;
            let fy = self.yr.0 + (self.yr.1 - self.yr.0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                self.px(fx),
                self.y0 + self.h + 15.0,
                tick(fx)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                self.x0 - 4.0,
                self.py(fy) + 4.0,
                tick(fy)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 32.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            self.x0 - 48.0,
            self.y0 + self.h / 2.0,
            self.x0 - 48.0,
            self.y0 + self.h / 2.0,
            escape(ylabel)
        );
    }

    fn polyline(&self, s: &mut String, xs: &[f64], ys: &[Option<f64>], color: &str) {
        let mut segment = String::new();
        let flush = |seg: &mut String, s: &mut String| {
            if !seg.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                    seg.trim_end()
                );
                seg.clear();
            }
        };
        for (x, y) in xs.iter().zip(ys) {
            match y {
                Some(y) if y.is_finite() => {
                    let _ = write!(segment, "{:.2},{:.2} ", self.px(*x), self.py(*y));
                }
                _ => flush(&mut segment, s),
            }
        }
        flush(&mut segment, s);
    }
}

fn tick(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-2) {
        format!("{x:.1e}")
    } else {
        format!("{:.2}", x)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Observables over time, with the Pearson indicators in a second panel.
pub fn trajectory_chart(table: &Table, sync: &[SyncSummary], provenance: &str) -> String {
    let (width, top_h, bottom_h) = (800.0, 320.0, 160.0);
    let height = if sync.is_empty() {
        top_h + 90.0
    } else {
        top_h + bottom_h + 150.0
    };
    let mut s = open(width, height, provenance);
    let xr = range(table.times.iter().copied());
    let top = Panel {
        x0: 70.0,
        y0: 20.0,
        w: width - 200.0,
        h: top_h,
        xr,
        yr: range(table.columns.iter().flat_map(|c| c.values.iter().copied())),
    };
    top.frame(&mut s, "t [1/omega1]", "expectation value");
    for (k, c) in table.columns.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let ys: Vec<Option<f64>> = c.values.iter().map(|v| Some(*v)).collect();
        top.polyline(&mut s, &table.times, &ys, color);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            top.x0 + top.w + 12.0,
            top.y0 + 14.0 + 16.0 * k as f64,
            escape(&c.name)
        );
    }
    if !sync.is_empty() {
        let bottom = Panel {
            x0: 70.0,
            y0: top_h + 80.0,
            w: width - 200.0,
            h: bottom_h,
            xr,
            yr: (-1.0, 1.0),
        };
        bottom.frame(&mut s, "t [1/omega1]", "Pearson C");
        for (k, r) in sync.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            bottom.polyline(&mut s, &table.times, &r.pearson, color);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">C({}, {})</text>"#,
                bottom.x0 + bottom.w + 12.0,
                bottom.y0 + 14.0 + 16.0 * k as f64,
                escape(&r.a),
                escape(&r.b)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Piecewise-linear approximation of the viridis colormap.
fn color(v: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.5, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let v = v.clamp(0.0, 1.0);
    let k = STOPS.iter().position(|(t, _)| *t >= v).unwrap_or(4).max(1);
    let ((t0, c0), (t1, c1)) = (STOPS[k - 1], STOPS[k]);
    let f = (v - t0) / (t1 - t0);
    let mix = |i: usize| (c0[i] + f * (c1[i] - c0[i])).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

/// `|C|` over the coupling-detuning grid; missing cells are grey.
pub fn heatmap(sweep: &SweepTable, provenance: &str) -> String {
    let (width, height) = (640.0, 560.0);
    let mut s = open(width, height, provenance);
    let (nl, nw) = (sweep.lambdas.len(), sweep.omegas.len());
    let half = |v: &[f64]| {
        if v.len() > 1 {
            (v[1] - v[0]).abs() / 2.0
        } else {
            0.5
        }
    };
    let (hl, hw) = (half(&sweep.lambdas), half(&sweep.omegas));
    let lr = range(sweep.lambdas.iter().copied());
    let wr = range(sweep.omegas.iter().copied());
    let panel = Panel {
        x0: 80.0,
        y0: 20.0,
        w: 440.0,
        h: 440.0,
        xr: (lr.0 - hl, lr.1 + hl),
        yr: (wr.0 - hw, wr.1 + hw),
    };
    for i in 0..nl {
        for j in 0..nw {
            let (l, w) = (sweep.lambdas[i], sweep.omegas[j]);
            let fill = sweep.values[i * nw + j].map_or_else(|| "#bbbbbb".to_string(), color);
            let (x0, x1) = (panel.px(l - hl), panel.px(l + hl));
            let (y0, y1) = (panel.py(w + hw), panel.py(w - hw));
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                x0,
                y0,
                x1 - x0,
                y1 - y0
            );
        }
    }
    panel.frame(&mut s, "lambda / omega1^2", "omega2 / omega1");
    for k in 0..=10 {
        let v = k as f64 / 10.0;
        let y = panel.y0 + panel.h * (1.0 - v) - panel.h / 22.0;
        let _ = writeln!(
            s,
            r#"<rect x="550" y="{:.2}" width="20" height="{:.2}" fill="{}"/>"#,
            y,
            panel.h / 11.0,
            color(v)
        );
        let _ = writeln!(s, r#"<text x="576" y="{:.2}">{v:.1}</text>"#, y + panel.h / 22.0 + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="560" y="14" text-anchor="middle">|C| at t = {}</text>"#,
        tick(sweep.eval_time)
    );
    s.push_str("</svg>\n");
    s
}
