//! The catalog of pattern ids, their categories and display names.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::registry::{Actuator, Sensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Bug,
    Smell,
    Perfume,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Bug, Category::Smell, Category::Perfume];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Bug => "BUG",
            Category::Smell => "SMELL",
            Category::Perfume => "PERFUME",
        }
    }

    /// Heading used in text reports, e.g. "Bug Pattern".
    pub fn label(self) -> &'static str {
        match self {
            Category::Bug => "Bug Pattern",
            Category::Smell => "Code Smell",
            Category::Perfume => "Code Perfume",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    /// Accepts `bug`/`bugs`, `smell`/`smells`, `perfume`/`perfumes` in any case.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().trim_end_matches('s') {
            "bug" => Ok(Category::Bug),
            "smell" => Ok(Category::Smell),
            "perfume" => Ok(Category::Perfume),
            _ => Err(format!("unknown category `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pattern {
    pub id: &'static str,
    pub category: Category,
    pub name: &'static str,
}

const fn p(id: &'static str, category: Category, name: &'static str) -> Pattern {
    Pattern { id, category, name }
}

use Category::{Bug, Perfume, Smell};

pub const PATTERNS: [Pattern; 47] = [
    p("action-not-stopped", Bug, "Action Not Stopped"),
    p("led-off-missing", Bug, "LED Off Missing"),
    p("light-off-missing", Bug, "Light Off Missing"),
    p("matrix-off-missing", Bug, "Matrix Off Missing"),
    p("motor-off-missing", Bug, "Motor Off Missing"),
    p("colour-out-of-range", Bug, "Colour Out Of Range"),
    p("interrupted-loop-sensing", Bug, "Interrupted Loop Sensing"),
    p("low-motor-power", Bug, "Low Motor Power"),
    p("missing-loop-sensing", Bug, "Missing Loop Sensing"),
    p("motor-out-of-range", Bug, "Motor Out Of Range"),
    p("parallel-actuator-use", Bug, "Parallel Actuator Use"),
    p("query-in-loop", Bug, "Query In Loop"),
    p("sensor-equals-check", Bug, "Sensor Equals Check"),
    p("several-launches", Bug, "Several Launches"),
    p("stuttering-action", Bug, "Stuttering Action"),
    p("useless-battery-sensing", Bug, "Useless Battery Sensing"),
    p("useless-colour-sensing", Bug, "Useless Colour Sensing"),
    p("useless-distance-sensing", Bug, "Useless Distance Sensing"),
    p("useless-light-sensing", Bug, "Useless Light Sensing"),
    p("useless-line-sensing", Bug, "Useless Line Sensing"),
    p("useless-loudness-sensing", Bug, "Useless Loudness Sensing"),
    p("useless-pitch-angle-sensing", Bug, "Useless Pitch Angle Sensing"),
    p("useless-potentiometer-sensing", Bug, "Useless Potentiometer Sensing"),
    p("useless-roll-angle-sensing", Bug, "Useless Roll Angle Sensing"),
    p("useless-shaking-sensing", Bug, "Useless Shaking Sensing"),
    p("waiting-aborted", Bug, "Waiting Aborted"),
    p("negative-motor-power", Smell, "Negative Motor Power"),
    p("noneffective-modification", Smell, "Non-effective Modification"),
    p("noneffective-time-limit", Smell, "Non-effective Time Limit"),
    p("colour-usage", Perfume, "Colour Usage"),
    p("battery-sensing", Perfume, "Battery Sensing"),
    p("colour-sensing", Perfume, "Colour Sensing"),
    p("distance-sensing", Perfume, "Distance Sensing"),
    p("light-sensing", Perfume, "Light Sensing"),
    p("line-sensing", Perfume, "Line Sensing"),
    p("loudness-sensing", Perfume, "Loudness Sensing"),
    p("pitch-angle-sensing", Perfume, "Pitch Angle Sensing"),
    p("potentiometer-sensing", Perfume, "Potentiometer Sensing"),
    p("roll-angle-sensing", Perfume, "Roll Angle Sensing"),
    p("shaking-sensing", Perfume, "Shaking Sensing"),
    p("led-off", Perfume, "LED Off"),
    p("light-off", Perfume, "Light Off"),
    p("matrix-off", Perfume, "Matrix Off"),
    p("motor-off", Perfume, "Motor Off"),
    p("loop-sensing", Perfume, "Loop Sensing"),
    p("motor-usage", Perfume, "Motor Usage"),
    p("parallelisation", Perfume, "Parallelisation"),
];

pub fn pattern(id: &str) -> Option<&'static Pattern> {
    PATTERNS.iter().find(|p| p.id == id)
}

pub fn patterns_in(category: Category) -> impl Iterator<Item = &'static Pattern> {
    PATTERNS.iter().filter(move |p| p.category == category)
}

fn lookup(id: String) -> &'static str {
    pattern(&id).map(|p| p.id).expect("derived id is registered")
}

pub fn useless_sensing_id(sensor: Sensor) -> &'static str {
    lookup(format!("useless-{}-sensing", sensor.slug()))
}

pub fn sensing_id(sensor: Sensor) -> &'static str {
    lookup(format!("{}-sensing", sensor.slug()))
}

pub fn off_missing_id(actuator: Actuator) -> &'static str {
    lookup(format!("{}-off-missing", actuator.slug()))
}

pub fn off_id(actuator: Actuator) -> &'static str {
    lookup(format!("{}-off", actuator.slug()))
}
