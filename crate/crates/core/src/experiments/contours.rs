use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::directions::DirectionSet;
use crate::distributions::SimDistribution;
use crate::error::{Error, Result};
use crate::measures::{MeasureParams, SolvedQuantiles};

/// Estimated isoquantile contour of one sample, centered at its median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub label: String,
    /// Sample median before centering.
    pub median: Vec<f64>,
    /// `q(beta xi_l) - median` for `l = 1..k` in grid order.
    pub vertices: Vec<[f64; 2]>,
}

impl Contour {
    pub fn max_abs_y(&self) -> f64 {
        self.vertices.iter().map(|v| v[1].abs()).fold(0.0, f64::max)
    }

    pub fn radii(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v[0].hypot(v[1])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourArtifact {
    pub beta: f64,
    pub k: usize,
    pub sample_size: usize,
    pub seed: u64,
    pub contours: Vec<Contour>,
}

impl ContourArtifact {
    /// `label,xi,x,y` rows with `xi` counted from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,xi,x,y\n");
        for c in &self.contours {
            for (l, v) in c.vertices.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:?},{:?}", c.label, l + 1, v[0], v[1]);
            }
        }
        out
    }
}

/// Contour of a bivariate sample at level `beta` over `circle_grid(k)`.
pub fn sample_contour(
    data: &crate::Dataset,
    beta: f64,
    k: usize,
    label: String,
) -> Result<Contour> {
    if data.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: data.dim(),
        });
    }
    let params = MeasureParams::new(beta, None, DirectionSet::circle_grid(k)?)?;
    let solved = SolvedQuantiles::compute(data, &params, &[beta], true)?;
    let m = solved.median.as_ref().expect("median requested").p.clone();
    let vertices = (0..k)
        .map(|l| {
            let q = solved.pair(0, l).0;
            [q[0] - m[0], q[1] - m[1]]
        })
        .collect();
    Ok(Contour {
        label,
        median: m,
        vertices,
    })
}

/// One contour per distribution, each from a sample of `sample_size` drawn with `seed`.
pub fn contours(
    dists: &[SimDistribution],
    sample_size: usize,
    beta: f64,
    k: usize,
    seed: u64,
) -> Result<ContourArtifact> {
    let contours = dists
        .iter()
        .map(|d| {
            let data = d.sample(sample_size, seed)?;
            sample_contour(&data, beta, k, format!("{}_nu{}", d.characteristic, d.nu))
        })
        .collect::<Result<_>>()?;
    Ok(ContourArtifact {
        beta,
        k,
        sample_size,
        seed,
        contours,
    })
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 6] = ["orange", "green", "red", "purple", "brown", "teal"];

/// Standalone SVG overlaying every contour on one equal-aspect scale.
pub fn render_svg(artifact: &ContourArtifact) -> String {
    let extent = artifact
        .contours
        .iter()
        .flat_map(|c| c.vertices.iter())
        .map(|v| v[0].abs().max(v[1].abs()))
        .fold(0.0, f64::max);
    let half = SIZE / 2.0;
    let scale = if extent > 0.0 {
        (half - MARGIN) / extent
    } else {
        1.0
    };
    let px = |v: &[f64; 2]| (half + scale * v[0], half - scale * v[1]);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE:.0}" height="{h:.0}" viewBox="0 0 {SIZE:.0} {h:.0}">"#,
        h = SIZE + 30.0
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN:.0}" y1="{half:.0}" x2="{x2:.0}" y2="{half:.0}" stroke="gray" stroke-width="0.5"/>"#,
        x2 = SIZE - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{half:.0}" y1="{MARGIN:.0}" x2="{half:.0}" y2="{y2:.0}" stroke="gray" stroke-width="0.5"/>"#,
        y2 = SIZE - MARGIN
    );
    for (i, c) in artifact.contours.iter().enumerate() {
        let mut d = String::new();
        for (j, v) in c.vertices.iter().enumerate() {
            let (x, y) = px(v);
            let _ = write!(d, "{}{x:.3} {y:.3} ", if j == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.5"><title>{}</title></path>"#,
            COLORS[i % COLORS.len()],
            c.label
        );
    }
    let _ = writeln!(
        s,
        r#"<circle cx="{half:.3}" cy="{half:.3}" r="3" fill="blue"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN:.0}" y="{y:.0}" font-size="12" font-family="sans-serif">beta = {}, k = {}, N = {}; all contours share one scale, medians at the origin</text>"#,
        artifact.beta,
        artifact.k,
        artifact.sample_size,
        y = SIZE + 15.0
    );
    s.push_str("</svg>\n");
    s
}

/// Writes [`render_svg`] to `path`.
pub fn emit_svg(artifact: &ContourArtifact, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(artifact))?;
    Ok(())
}
