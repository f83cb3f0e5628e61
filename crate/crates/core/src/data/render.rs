//! Rasterizes sector-shaped grayscale frames from a view template.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::views::{CriterionKind, Shape, ViewSpec};
use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Relative radius swing of the beating heart over one cycle.
pub const PULSATION: f64 = 0.08;
/// Bearing error applied when the rotation criterion is unmet, degrees.
pub const ROTATION_ERROR: f64 = 24.0;
/// Lateral shift applied when the centring criterion is unmet, image widths.
pub const CENTRING_ERROR: f64 = 0.13;
/// Depth and size factor applied when the depth criterion is unmet.
pub const DEPTH_ERROR: f64 = 0.75;
pub const BACKGROUND: f64 = 0.12;
pub const SPECKLE_SIGMA: f64 = 0.06;

const APEX: (f64, f64) = (0.5, 0.03);
const SECTOR_RADIUS: f64 = 0.94;

/// Row-major grayscale image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    /// 8-bit quantization, round to nearest.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }
}

/// A structure resolved to image coordinates for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Placed {
    pub name: String,
    pub cx: f64,
    pub cy: f64,
    pub shape: Shape,
    pub intensity: f64,
}

pub fn pulsation(phase: f64) -> f64 {
    1.0 + PULSATION * (2.0 * std::f64::consts::PI * phase).sin()
}

fn scale_shape(shape: Shape, factor: f64) -> Shape {
    match shape {
        Shape::Ellipse { rx, ry, tilt } => Shape::Ellipse {
            rx: rx * factor,
            ry: ry * factor,
            tilt,
        },
        Shape::Arc {
            radius,
            thickness,
            start,
            span,
        } => Shape::Arc {
            radius: radius * factor,
            thickness,
            start,
            span,
        },
    }
}

/// Where each visible structure lands, given which criteria are met.
pub fn layout(view: &ViewSpec, criteria_met: &[bool], phase: f64) -> Result<Vec<Placed>> {
    if criteria_met.len() != view.k() {
        return Err(Error::InvalidArgument(format!(
            "view {} has {} criteria, got {} flags",
            view.id,
            view.k(),
            criteria_met.len()
        )));
    }
    let unmet = |kind: CriterionKind| {
        view.checklist
            .iter()
            .zip(criteria_met)
            .any(|(c, &met)| c.kind == kind && !met)
    };
    let rotation = if unmet(CriterionKind::RotationInBand) {
        ROTATION_ERROR
    } else {
        0.0
    };
    let shift = if unmet(CriterionKind::Centered) {
        CENTRING_ERROR
    } else {
        0.0
    };
    let depth = if unmet(CriterionKind::DepthCorrect) {
        DEPTH_ERROR
    } else {
        1.0
    };
    let beat = pulsation(phase);

    Ok(view
        .structures
        .iter()
        .filter(|s| s.criterion.is_none_or(|i| criteria_met[i]))
        .map(|s| {
            let bearing = (s.bearing + rotation).to_radians();
            let r = s.depth * depth * SECTOR_RADIUS;
            Placed {
                name: s.name.clone(),
                cx: APEX.0 + r * bearing.sin() + shift,
                cy: APEX.1 + r * bearing.cos(),
                shape: scale_shape(s.shape, depth * beat),
                intensity: s.intensity,
            }
        })
        .collect())
}

fn in_sector(x: f64, y: f64, half_angle: f64) -> bool {
    let (dx, dy) = (x - APEX.0, y - APEX.1);
    dx.hypot(dy) <= SECTOR_RADIUS && dy >= 0.0 && dx.atan2(dy).to_degrees().abs() <= half_angle
}

fn covers(p: &Placed, x: f64, y: f64) -> bool {
    let (dx, dy) = (x - p.cx, y - p.cy);
    match p.shape {
        Shape::Ellipse { rx, ry, tilt } => {
            let (s, c) = tilt.to_radians().sin_cos();
            let u = c * dx + s * dy;
            let v = -s * dx + c * dy;
            (u / rx).powi(2) + (v / ry).powi(2) <= 1.0
        }
        Shape::Arc {
            radius,
            thickness,
            start,
            span,
        } => {
            if (dx.hypot(dy) - radius).abs() > thickness / 2.0 {
                return false;
            }
            let angle = dy.atan2(dx).to_degrees().rem_euclid(360.0);
            (angle - start).rem_euclid(360.0) <= span
        }
    }
}

/// Renders one `size×size` frame. Pixels outside the sector are 0; inside,
/// structures are drawn over a uniform background and seeded Gaussian
/// speckle is added, clamped to `[0, 1]`.
pub fn render_frame(
    view: &ViewSpec,
    criteria_met: &[bool],
    phase: f64,
    seed: u64,
    size: usize,
) -> Result<GrayImage> {
    if size == 0 {
        return Err(Error::InvalidArgument("image size must be positive".into()));
    }
    let placed = layout(view, criteria_met, phase)?;
    let mut rng = rng_from(seed);
    let noise = Normal::new(0.0, SPECKLE_SIGMA).expect("constant sigma is valid");
    let half = view.sector_angle / 2.0;
    let mut pixels = Vec::with_capacity(size * size);
    for row in 0..size {
        let y = (row as f64 + 0.5) / size as f64;
        for col in 0..size {
            let x = (col as f64 + 0.5) / size as f64;
            if !in_sector(x, y, half) {
                pixels.push(0.0);
                continue;
            }
            let tissue = placed
                .iter()
                .filter(|p| covers(p, x, y))
                .map(|p| p.intensity)
                .fold(BACKGROUND, f64::max);
            let speckle: f64 = noise.sample(&mut rng);
            pixels.push((tissue + speckle).clamp(0.0, 1.0));
        }
    }
    Ok(GrayImage {
        width: size,
        height: size,
        pixels,
    })
}

/// Uniform jitter in `[-amplitude, amplitude)`, shared helper for generators.
pub(crate) fn jitter(rng: &mut impl Rng, amplitude: f64) -> f64 {
    rng.random_range(-amplitude..amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::views::{default_view, default_views, Criterion, Structure};

    #[test]
    fn beating_scales_radii() {
        let view = default_view(3).unwrap();
        let met = vec![true; view.k()];
        let a = layout(&view, &met, 0.0).unwrap();
        let b = layout(&view, &met, 0.25).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!((p.cx, p.cy), (q.cx, q.cy));
            match (p.shape, q.shape) {
                (Shape::Ellipse { rx: r0, .. }, Shape::Ellipse { rx: r1, .. })
                | (Shape::Arc { radius: r0, .. }, Shape::Arc { radius: r1, .. }) => {
                    assert!((r1 / r0 - 1.08).abs() < 1e-12);
                }
                _ => panic!("shape kind changed"),
            }
        }
    }

    #[test]
    fn unmet_visibility_omits_structure() {
        let view = default_view(3).unwrap();
        let mut met = vec![true; 5];
        met[2] = false;
        let names: Vec<String> = layout(&view, &met, 0.0).unwrap().into_iter().map(|p| p.name).collect();
        assert!(!names.iter().any(|n| n == "AV cusps"));
        assert_eq!(names.len(), 2);
    }

    #[test]
    fn structure_only_view_with_nothing_met_is_background() {
        let view = ViewSpec {
            id: 1,
            name: "structures only".into(),
            sector_angle: 80.0,
            structures: vec![Structure {
                name: "blob".into(),
                depth: 0.5,
                bearing: 0.0,
                shape: Shape::Ellipse {
                    rx: 0.2,
                    ry: 0.2,
                    tilt: 0.0,
                },
                intensity: 1.0,
                criterion: Some(0),
            }],
            checklist: vec![Criterion {
                kind: CriterionKind::StructureVisible,
                label: "blob".into(),
            }],
        };
        let img = render_frame(&view, &[false], 0.0, 3, 48).unwrap();
        let inside: Vec<f64> = img.pixels.iter().copied().filter(|&v| v > 0.0).collect();
        let mean = inside.iter().sum::<f64>() / inside.len() as f64;
        assert!((mean - BACKGROUND).abs() < 0.01, "mean {mean}");
        let lit = render_frame(&view, &[true], 0.0, 3, 48).unwrap();
        let lit_mean = lit.pixels.iter().sum::<f64>() / lit.pixels.len() as f64;
        assert!(lit_mean > img.pixels.iter().sum::<f64>() / img.pixels.len() as f64 + 0.05);
    }

    #[test]
    fn deterministic_and_bounded() {
        for view in default_views() {
            let met: Vec<bool> = (0..view.k()).map(|i| i % 2 == 0).collect();
            let a = render_frame(&view, &met, 0.3, 11, 32).unwrap();
            let b = render_frame(&view, &met, 0.3, 11, 32).unwrap();
            assert_eq!(a, b);
            assert!(a.pixels.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert_eq!(a.pixels[0], 0.0, "corner lies outside the sector");
        }
    }

    #[test]
    fn wrong_flag_count_rejected() {
        assert!(render_frame(&default_view(7).unwrap(), &[true; 5], 0.0, 0, 16).is_err());
    }
}
