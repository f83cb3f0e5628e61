//! Default view templates: sector geometry, cardiac structures and the
//! quality checklist of each of the ten exam views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_VIEWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    RotationInBand,
    StructureVisible,
    Centered,
    DepthCorrect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub kind: CriterionKind,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    /// Filled ellipse with semi-axes in image-width units, tilted by `tilt` degrees.
    Ellipse { rx: f64, ry: f64, tilt: f64 },
    /// Ring segment of the given mid-radius and thickness, spanning
    /// `[start, start + span]` degrees.
    Arc {
        radius: f64,
        thickness: f64,
        start: f64,
        span: f64,
    },
}

/// A bright anatomical primitive placed in sector (polar) coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub name: String,
    /// Distance from the probe apex as a fraction of the sector radius.
    pub depth: f64,
    /// Angle from the sector centre line, degrees, positive to the right.
    pub bearing: f64,
    pub shape: Shape,
    pub intensity: f64,
    /// Index of the structure-visible criterion that controls this structure;
    /// `None` for structures that are always drawn.
    pub criterion: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    /// 1-based view id.
    pub id: u8,
    pub name: String,
    /// Full opening angle of the imaging sector, degrees.
    pub sector_angle: f64,
    pub structures: Vec<Structure>,
    pub checklist: Vec<Criterion>,
}

impl ViewSpec {
    /// Number of checklist items.
    pub fn k(&self) -> usize {
        self.checklist.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.checklist.is_empty() {
            return Err(Error::InvalidArgument(format!("view {} has an empty checklist", self.id)));
        }
        for (i, c) in self.checklist.iter().enumerate() {
            let linked = self.structures.iter().any(|s| s.criterion == Some(i));
            let visible = c.kind == CriterionKind::StructureVisible;
            if visible != linked {
                return Err(Error::InvalidArgument(format!(
                    "view {} criterion {} ({}) {} a structure",
                    self.id,
                    i + 1,
                    c.label,
                    if visible { "controls no" } else { "must not control" }
                )));
            }
        }
        for s in &self.structures {
            if let Some(i) = s.criterion {
                if i >= self.k() {
                    return Err(Error::InvalidArgument(format!(
                        "view {} structure {} references criterion {}",
                        self.id, s.name, i
                    )));
                }
            }
        }
        Ok(())
    }
}

fn crit(kind: CriterionKind, label: &str) -> Criterion {
    Criterion {
        kind,
        label: label.to_string(),
    }
}

fn ellipse(
    name: &str,
    depth: f64,
    bearing: f64,
    (rx, ry, tilt): (f64, f64, f64),
    intensity: f64,
    criterion: Option<usize>,
) -> Structure {
    Structure {
        name: name.to_string(),
        depth,
        bearing,
        shape: Shape::Ellipse { rx, ry, tilt },
        intensity,
        criterion,
    }
}

fn arc(
    name: &str,
    depth: f64,
    bearing: f64,
    (radius, start, span): (f64, f64, f64),
    intensity: f64,
    criterion: Option<usize>,
) -> Structure {
    Structure {
        name: name.to_string(),
        depth,
        bearing,
        shape: Shape::Arc {
            radius,
            thickness: 0.035,
            start,
            span,
        },
        intensity,
        criterion,
    }
}

use CriterionKind::{Centered, DepthCorrect, RotationInBand, StructureVisible};

/// The ten views of the exam in acquisition order.
pub fn default_views() -> Vec<ViewSpec> {
    vec![
        ViewSpec {
            id: 1,
            name: "ME 4C (TV)".into(),
            sector_angle: 90.0,
            structures: vec![
                ellipse("LV", 0.62, 12.0, (0.11, 0.17, 10.0), 0.55, None),
                ellipse("RA", 0.40, -18.0, (0.08, 0.08, 0.0), 0.70, Some(1)),
                arc("TV", 0.55, -14.0, (0.07, 200.0, 140.0), 0.95, Some(2)),
            ],
            checklist: vec![
                crit(RotationInBand, "0-10 degree rotation"),
                crit(StructureVisible, "RA visible"),
                crit(StructureVisible, "TV leaflets visible"),
                crit(Centered, "TV centred"),
                crit(DepthCorrect, "apex included"),
            ],
        },
        ViewSpec {
            id: 2,
            name: "ME 2C".into(),
            sector_angle: 75.0,
            structures: vec![
                ellipse("LA", 0.30, 0.0, (0.09, 0.06, 0.0), 0.50, None),
                ellipse("LV", 0.65, 0.0, (0.09, 0.19, 0.0), 0.65, Some(1)),
                ellipse("LAA", 0.32, 20.0, (0.04, 0.03, 30.0), 0.90, Some(2)),
            ],
            checklist: vec![
                crit(RotationInBand, "80-100 degree rotation"),
                crit(StructureVisible, "LV apex visible"),
                crit(StructureVisible, "LA appendage visible"),
                crit(Centered, "LV centred"),
                crit(DepthCorrect, "apex not foreshortened"),
            ],
        },
        ViewSpec {
            id: 3,
            name: "ME AV SAX".into(),
            sector_angle: 60.0,
            structures: vec![
                ellipse("RV", 0.72, 10.0, (0.16, 0.06, -10.0), 0.45, None),
                arc("AV cusps", 0.50, 0.0, (0.08, 0.0, 300.0), 0.95, Some(2)),
                ellipse("LA", 0.22, 0.0, (0.10, 0.05, 0.0), 0.60, Some(4)),
            ],
            checklist: vec![
                crit(RotationInBand, "30-45 degree rotation"),
                crit(Centered, "AV centred in screen"),
                crit(StructureVisible, "3 cusps visible"),
                crit(DepthCorrect, "imaging plane at level of leaflet tips"),
                crit(StructureVisible, "probe tip appropriately behind LA"),
            ],
        },
        ViewSpec {
            id: 4,
            name: "TG mid SAX".into(),
            sector_angle: 100.0,
            structures: vec![
                arc("LV wall", 0.55, 0.0, (0.17, 0.0, 360.0), 0.60, None),
                ellipse("PM ant", 0.50, -16.0, (0.04, 0.04, 0.0), 0.95, Some(1)),
                ellipse("PM post", 0.68, 12.0, (0.04, 0.04, 0.0), 0.95, Some(2)),
            ],
            checklist: vec![
                crit(RotationInBand, "0-20 degree rotation"),
                crit(StructureVisible, "anterolateral papillary muscle"),
                crit(StructureVisible, "posteromedial papillary muscle"),
                crit(DepthCorrect, "LV circular at mid-papillary level"),
            ],
        },
        ViewSpec {
            id: 5,
            name: "ME RV inflow-outflow".into(),
            sector_angle: 80.0,
            structures: vec![
                arc("RV", 0.55, 0.0, (0.19, 20.0, 140.0), 0.55, None),
                ellipse("TV", 0.48, -24.0, (0.05, 0.03, 40.0), 0.90, Some(1)),
                ellipse("PV", 0.48, 24.0, (0.05, 0.03, -40.0), 0.90, Some(3)),
            ],
            checklist: vec![
                crit(RotationInBand, "50-75 degree rotation"),
                crit(StructureVisible, "TV visible"),
                crit(Centered, "AV centred"),
                crit(StructureVisible, "PV visible"),
            ],
        },
        ViewSpec {
            id: 6,
            name: "ME AV LAX".into(),
            sector_angle: 70.0,
            structures: vec![
                ellipse("LA", 0.25, -4.0, (0.10, 0.05, 0.0), 0.50, None),
                ellipse("LVOT", 0.52, 6.0, (0.17, 0.04, 25.0), 0.70, Some(1)),
                ellipse("aortic root", 0.50, 18.0, (0.05, 0.07, 0.0), 0.95, Some(2)),
            ],
            checklist: vec![
                crit(RotationInBand, "120-140 degree rotation"),
                crit(StructureVisible, "LVOT visible"),
                crit(StructureVisible, "aortic root visible"),
                crit(DepthCorrect, "AV in mid-field"),
            ],
        },
        ViewSpec {
            id: 7,
            name: "TG 2C".into(),
            sector_angle: 105.0,
            structures: vec![
                ellipse("LV", 0.62, -10.0, (0.18, 0.10, 80.0), 0.50, Some(1)),
                ellipse("LA", 0.50, 26.0, (0.06, 0.05, 0.0), 0.65, Some(1)),
                arc("MV leaflets", 0.50, 14.0, (0.06, 250.0, 120.0), 0.95, Some(3)),
            ],
            checklist: vec![
                crit(RotationInBand, "85-95 degree rotation"),
                crit(StructureVisible, "LA and LV both visible"),
                crit(Centered, "MV visible on right side of screen"),
                crit(StructureVisible, "post. and ant. MV leaflets seen"),
            ],
        },
        ViewSpec {
            id: 8,
            name: "ME 4C (LV)".into(),
            sector_angle: 85.0,
            structures: vec![
                ellipse("RV", 0.60, -20.0, (0.07, 0.14, -10.0), 0.45, None),
                ellipse("LV", 0.64, 14.0, (0.09, 0.18, 8.0), 0.65, Some(1)),
                arc("MV", 0.42, 8.0, (0.06, 200.0, 140.0), 0.95, Some(2)),
            ],
            checklist: vec![
                crit(RotationInBand, "0-10 degree rotation"),
                crit(StructureVisible, "LV apex visible"),
                crit(StructureVisible, "MV leaflets visible"),
                crit(Centered, "LV centred"),
                crit(DepthCorrect, "apex included"),
            ],
        },
        ViewSpec {
            id: 9,
            name: "dTG LAX".into(),
            sector_angle: 65.0,
            structures: vec![
                ellipse("LV", 0.35, 0.0, (0.12, 0.09, 0.0), 0.50, None),
                ellipse("LVOT", 0.60, -8.0, (0.04, 0.12, 15.0), 0.75, Some(1)),
                arc("AV", 0.74, -6.0, (0.05, 0.0, 360.0), 0.95, Some(2)),
            ],
            checklist: vec![
                crit(RotationInBand, "0-20 degree rotation"),
                crit(StructureVisible, "LVOT aligned with beam"),
                crit(StructureVisible, "AV in far field"),
                crit(DepthCorrect, "full LV length in view"),
            ],
        },
        ViewSpec {
            id: 10,
            name: "ME MV commis".into(),
            sector_angle: 95.0,
            structures: vec![
                ellipse("LA", 0.25, 0.0, (0.12, 0.05, 0.0), 0.50, None),
                arc("MV P1", 0.48, -16.0, (0.05, 180.0, 120.0), 0.95, Some(1)),
                arc("MV P3", 0.48, 16.0, (0.05, 240.0, 120.0), 0.95, Some(2)),
                ellipse("A2", 0.50, 0.0, (0.03, 0.06, 0.0), 0.80, Some(2)),
            ],
            checklist: vec![
                crit(RotationInBand, "50-70 degree rotation"),
                crit(StructureVisible, "P1 scallop visible"),
                crit(StructureVisible, "P3 scallop and A2 visible"),
                crit(Centered, "MV centred"),
                crit(DepthCorrect, "LV inflow included"),
            ],
        },
    ]
}

/// Template for the 1-based `view_id` from the default table.
pub fn default_view(view_id: u8) -> Result<ViewSpec> {
    default_views()
        .into_iter()
        .find(|v| v.id == view_id)
        .ok_or_else(|| Error::InvalidArgument(format!("no view with id {view_id}")))
}
