use serde::{Deserialize, Serialize};

use dde_circle::{Detection, DetectorConfig};

/// JSON document written by `detect`. Field order is fixed so that
/// serializing a parsed document reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub input: String,
    pub seed: u64,
    pub config: DetectorConfig,
    pub detections: Vec<DetectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub x0: f64,
    pub y0: f64,
    pub r: f64,
    pub objective: f64,
    pub hit_ratio: f64,
    pub generations: usize,
    pub elapsed_s: f64,
}

impl DetectionRecord {
    pub fn from_detection(d: &Detection, timing: bool) -> Self {
        Self {
            x0: d.circle.x0,
            y0: d.circle.y0,
            r: d.circle.r,
            objective: d.objective,
            hit_ratio: d.hit_ratio,
            generations: d.generations,
            elapsed_s: if timing { d.elapsed } else { 0.0 },
        }
    }
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}
