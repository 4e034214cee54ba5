//! Opcode registry and device value tables.
//!
//! Raw opcodes are classified into [`BlockKind`]s through a data file
//! (`data/registry.json` is compiled in; `Registry::load` reads a custom
//! one). Each entry names the input slots that carry power, time, colour,
//! conditions and nested bodies, so the AST builder never hard-codes
//! vendor slot names.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_REGISTRY: &str = include_str!("../data/registry.json");

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("unknown device `{0}` (expected `codey` or `mcore`)")]
    UnknownDevice(String),
    #[error("cannot read registry file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed registry data: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("opcode `{0}` is registered twice")]
    Duplicate(String),
    #[error("opcode `{opcode}` is missing the `{slot}` slot binding required by its kind")]
    MissingSlot { opcode: String, slot: &'static str },
}

/// Robot families with dedicated actors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Device {
    /// Codey Rocky.
    Codey,
    /// mBot (mCore board).
    Mcore,
}

impl Device {
    pub fn from_id(id: &str) -> Option<Device> {
        match id {
            "codey" => Some(Device::Codey),
            "mcore" => Some(Device::Mcore),
            _ => None,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Device::Codey => "codey",
            Device::Mcore => "mcore",
        }
    }
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuator {
    Led,
    Light,
    Matrix,
    Motor,
}

impl Actuator {
    pub const ALL: [Actuator; 4] = [Actuator::Led, Actuator::Light, Actuator::Matrix, Actuator::Motor];

    pub fn slug(self) -> &'static str {
        match self {
            Actuator::Led => "led",
            Actuator::Light => "light",
            Actuator::Matrix => "matrix",
            Actuator::Motor => "motor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sensor {
    Battery,
    Colour,
    Distance,
    AmbientLight,
    Line,
    Loudness,
    PitchAngle,
    Potentiometer,
    RollAngle,
    Shaking,
}

impl Sensor {
    pub const ALL: [Sensor; 10] = [
        Sensor::Battery,
        Sensor::Colour,
        Sensor::Distance,
        Sensor::AmbientLight,
        Sensor::Line,
        Sensor::Loudness,
        Sensor::PitchAngle,
        Sensor::Potentiometer,
        Sensor::RollAngle,
        Sensor::Shaking,
    ];

    /// Kebab-case name used inside pattern ids (`useless-<slug>-sensing`).
    pub fn slug(self) -> &'static str {
        match self {
            Sensor::Battery => "battery",
            Sensor::Colour => "colour",
            Sensor::Distance => "distance",
            Sensor::AmbientLight => "light",
            Sensor::Line => "line",
            Sensor::Loudness => "loudness",
            Sensor::PitchAngle => "pitch-angle",
            Sensor::Potentiometer => "potentiometer",
            Sensor::RollAngle => "roll-angle",
            Sensor::Shaking => "shaking",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Sensor::Battery => "Battery",
            Sensor::Colour => "Colour",
            Sensor::Distance => "Distance",
            Sensor::AmbientLight => "Light",
            Sensor::Line => "Line",
            Sensor::Loudness => "Loudness",
            Sensor::PitchAngle => "Pitch Angle",
            Sensor::Potentiometer => "Potentiometer",
            Sensor::RollAngle => "Roll Angle",
            Sensor::Shaking => "Shaking",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HatEvent {
    GreenFlag,
    BoardLaunch,
    ButtonPressed,
    MessageReceived,
    KeyPressed,
    SensorEvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
    Left,
    Right,
    /// A single wheel or motor port.
    Wheel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BooleanSensorKind {
    Button,
    IrRemote,
    KeyPressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    If,
    IfElse,
    Forever,
    RepeatTimes,
    RepeatUntil,
    Wait,
    WaitUntil,
    StopAll,
    StopOtherScripts,
    StopThisScript,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Eq,
    Gt,
    Lt,
    And,
    Or,
    Not,
    Add,
    Subtract,
    Multiply,
    Divide,
    Modulo,
}

/// Semantic kind of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BlockKind {
    Hat { event: HatEvent },
    ActuatorOn { actuator: Actuator },
    ActuatorOff { actuator: Actuator },
    TimedActuator { actuator: Actuator },
    Move { direction: Direction },
    TimedMove { direction: Direction },
    SensorReporter { sensor: Sensor },
    BooleanSensor { sensor: BooleanSensorKind },
    Control { control: ControlKind },
    Operator { operator: OperatorKind },
    VariableSet,
    VariableChange,
    VariableReporter,
    Unknown,
}

impl BlockKind {
    pub fn is_hat(&self) -> bool {
        matches!(self, BlockKind::Hat { .. })
    }
}

/// Which raw input slot (or field) carries each argument of a block.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlotBindings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub colour: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substack: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substack2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operand: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    /// Field holding a variable name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    /// Input or field selecting which LED/port/matrix the block addresses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

/// Refines an entry's kind by the value of one of its fields
/// (e.g. `control_stop` with `STOP_OPTION`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldVariants {
    pub field: String,
    pub kinds: BTreeMap<String, BlockKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub opcode: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    /// Devices the opcode applies to; empty means every actor.
    #[serde(default)]
    pub devices: Vec<Device>,
    pub kind: BlockKind,
    #[serde(default, skip_serializing_if = "is_default_slots")]
    pub slots: SlotBindings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_variants: Option<FieldVariants>,
}

fn is_default_slots(slots: &SlotBindings) -> bool {
    *slots == SlotBindings::default()
}

impl RegistryEntry {
    pub fn applies_to(&self, device: Option<Device>) -> bool {
        if self.devices.is_empty() {
            return true;
        }
        device.is_some_and(|d| self.devices.contains(&d))
    }

    /// Kind refined by the block's field values.
    pub fn kind_for_fields(&self, fields: &BTreeMap<String, String>) -> BlockKind {
        if let Some(variants) = &self.field_variants {
            if let Some(kind) = fields
                .get(&variants.field)
                .and_then(|value| variants.kinds.get(value))
            {
                return *kind;
            }
        }
        self.kind
    }

    fn validate(&self) -> Result<(), RegistryError> {
        let kinds = std::iter::once(self.kind).chain(
            self.field_variants
                .iter()
                .flat_map(|variants| variants.kinds.values().copied()),
        );
        for kind in kinds {
            for slot in required_slots(kind) {
                if !self.has_slot(slot) {
                    return Err(RegistryError::MissingSlot {
                        opcode: self.opcode.clone(),
                        slot,
                    });
                }
            }
        }
        Ok(())
    }

    fn has_slot(&self, slot: &str) -> bool {
        let s = &self.slots;
        match slot {
            "power" => s.power.is_some(),
            "time" => s.time.is_some(),
            "condition" => s.condition.is_some(),
            "substack" => s.substack.is_some(),
            "substack2" => s.substack2.is_some(),
            "times" => s.times.is_some(),
            "lhs" => s.lhs.is_some(),
            "rhs" => s.rhs.is_some(),
            "operand" => s.operand.is_some(),
            "value" => s.value.is_some(),
            "variable" => s.variable.is_some(),
            _ => false,
        }
    }
}

fn required_slots(kind: BlockKind) -> &'static [&'static str] {
    use ControlKind::*;
    match kind {
        BlockKind::TimedActuator { .. } => &["time"],
        BlockKind::Move { .. } => &["power"],
        BlockKind::TimedMove { .. } => &["power", "time"],
        BlockKind::Control { control } => match control {
            If => &["condition", "substack"],
            IfElse => &["condition", "substack", "substack2"],
            Forever => &["substack"],
            RepeatTimes => &["times", "substack"],
            RepeatUntil => &["condition", "substack"],
            Wait => &["time"],
            WaitUntil => &["condition"],
            StopAll | StopOtherScripts | StopThisScript => &[],
        },
        BlockKind::Operator { operator } => match operator {
            OperatorKind::Not => &["operand"],
            _ => &["lhs", "rhs"],
        },
        BlockKind::VariableSet | BlockKind::VariableChange => &["variable", "value"],
        BlockKind::VariableReporter => &["variable"],
        _ => &[],
    }
}

/// Immutable opcode table.
#[derive(Debug, Clone)]
pub struct Registry {
    entries: Vec<RegistryEntry>,
    index: HashMap<String, Vec<usize>>,
}

impl Registry {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static Registry {
        static BUILTIN: OnceLock<Registry> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Registry::from_json(BUILTIN_REGISTRY).expect("shipped registry data is valid")
        })
    }

    pub fn from_json(text: &str) -> Result<Registry, RegistryError> {
        let entries: Vec<RegistryEntry> = serde_json::from_str(text)?;
        Registry::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Registry, RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Registry::from_json(&text)
    }

    pub fn from_entries(entries: Vec<RegistryEntry>) -> Result<Registry, RegistryError> {
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, entry) in entries.iter().enumerate() {
            entry.validate()?;
            for name in std::iter::once(&entry.opcode).chain(&entry.aliases) {
                let slot = index.entry(name.clone()).or_default();
                // The same opcode may be registered for disjoint device sets only.
                if slot.iter().any(|&j| overlaps(&entries[j].devices, &entry.devices)) {
                    return Err(RegistryError::Duplicate(name.clone()));
                }
                slot.push(i);
            }
        }
        Ok(Registry { entries, index })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("registry entries serialize")
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn entry(&self, opcode: &str, device: Option<Device>) -> Option<&RegistryEntry> {
        self.index
            .get(opcode)?
            .iter()
            .map(|&i| &self.entries[i])
            .find(|entry| entry.applies_to(device))
    }

    /// Kind of `opcode` inside an actor of `device`; `Unknown` when unmapped.
    pub fn classify(&self, opcode: &str, device: Option<Device>) -> BlockKind {
        self.entry(opcode, device)
            .map_or(BlockKind::Unknown, |entry| entry.kind)
    }

    pub fn classify_with_fields(
        &self,
        opcode: &str,
        device: Option<Device>,
        fields: &BTreeMap<String, String>,
    ) -> BlockKind {
        self.entry(opcode, device)
            .map_or(BlockKind::Unknown, |entry| entry.kind_for_fields(fields))
    }
}

fn overlaps(a: &[Device], b: &[Device]) -> bool {
    a.is_empty() || b.is_empty() || a.iter().any(|d| b.contains(d))
}

/// Valid value range of a sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorRange {
    pub lo: f64,
    pub hi: f64,
    /// Only integer readings occur.
    pub discrete: bool,
}

pub fn sensor_range(sensor: Sensor, device: Device) -> SensorRange {
    let continuous = |lo: f64, hi: f64| SensorRange {
        lo,
        hi,
        discrete: false,
    };
    match sensor {
        Sensor::Battery => continuous(0.0, 100.0),
        Sensor::Colour => continuous(0.0, 255.0),
        Sensor::Distance => continuous(3.0, 400.0),
        Sensor::AmbientLight => match device {
            Device::Codey => continuous(0.0, 100.0),
            Device::Mcore => continuous(0.0, 1020.0),
        },
        Sensor::Line => SensorRange {
            lo: 0.0,
            hi: 3.0,
            discrete: true,
        },
        Sensor::Loudness => continuous(0.0, 100.0),
        Sensor::PitchAngle => continuous(-180.0, 180.0),
        Sensor::Potentiometer => continuous(0.0, 100.0),
        Sensor::RollAngle => continuous(-90.0, 90.0),
        Sensor::Shaking => continuous(0.0, 100.0),
    }
}

/// [`sensor_range`] keyed by a raw device id.
pub fn sensor_range_for(sensor: Sensor, device_id: &str) -> Result<SensorRange, RegistryError> {
    let device =
        Device::from_id(device_id).ok_or_else(|| RegistryError::UnknownDevice(device_id.into()))?;
    Ok(sensor_range(sensor, device))
}

/// Motor power limits in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorSpec {
    /// Smallest power magnitude that actually turns the wheels.
    pub min_effective: f64,
    pub max: f64,
}

pub fn motor_spec(device: Device) -> MotorSpec {
    match device {
        Device::Mcore => MotorSpec {
            min_effective: 25.0,
            max: 100.0,
        },
        Device::Codey => MotorSpec {
            min_effective: 0.0,
            max: 100.0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        let reg = Registry::builtin();
        assert_eq!(
            reg.classify("codey.led_off", Some(Device::Codey)),
            BlockKind::ActuatorOff {
                actuator: Actuator::Led
            }
        );
        assert_eq!(
            reg.classify("mcore.move_timed_fwd", Some(Device::Mcore)),
            BlockKind::TimedMove {
                direction: Direction::Forward
            }
        );
        let entry = reg.entry("mcore.move_timed_fwd", Some(Device::Mcore)).unwrap();
        assert_eq!(entry.slots.power.as_deref(), Some("POWER"));
        assert_eq!(entry.slots.time.as_deref(), Some("TIME"));
        assert_eq!(reg.classify("weird.block", Some(Device::Mcore)), BlockKind::Unknown);
    }

    #[test]
    fn device_specific_opcodes_do_not_leak() {
        let reg = Registry::builtin();
        assert_eq!(reg.classify("codey.rocky_light_on", Some(Device::Mcore)), BlockKind::Unknown);
        assert_eq!(reg.classify("mcore.led_on", None), BlockKind::Unknown);
        assert!(reg.classify("control_forever", None) != BlockKind::Unknown);
    }

    #[test]
    fn stop_option_refines_kind() {
        let reg = Registry::builtin();
        let mut fields = BTreeMap::new();
        fields.insert("STOP_OPTION".to_string(), "other scripts in sprite".to_string());
        assert_eq!(
            reg.classify_with_fields("control_stop", Some(Device::Codey), &fields),
            BlockKind::Control {
                control: ControlKind::StopOtherScripts
            }
        );
        fields.insert("STOP_OPTION".to_string(), "this script".to_string());
        assert_eq!(
            reg.classify_with_fields("control_stop", Some(Device::Codey), &fields),
            BlockKind::Control {
                control: ControlKind::StopThisScript
            }
        );
    }

    #[test]
    fn sensor_ranges() {
        let r = sensor_range(Sensor::Distance, Device::Mcore);
        assert_eq!((r.lo, r.hi, r.discrete), (3.0, 400.0, false));
        let r = sensor_range(Sensor::AmbientLight, Device::Codey);
        assert_eq!((r.lo, r.hi, r.discrete), (0.0, 100.0, false));
        let r = sensor_range(Sensor::AmbientLight, Device::Mcore);
        assert_eq!((r.lo, r.hi), (0.0, 1020.0));
        let r = sensor_range(Sensor::Line, Device::Mcore);
        assert_eq!((r.lo, r.hi, r.discrete), (0.0, 3.0, true));
        assert_eq!(sensor_range(Sensor::PitchAngle, Device::Codey).lo, -180.0);
        assert_eq!(sensor_range(Sensor::RollAngle, Device::Codey).hi, 90.0);
        for sensor in Sensor::ALL {
            for device in [Device::Codey, Device::Mcore] {
                let r = sensor_range(sensor, device);
                assert!(r.lo < r.hi);
            }
        }
        assert!(matches!(
            sensor_range_for(Sensor::Distance, "ev3"),
            Err(RegistryError::UnknownDevice(_))
        ));
        assert_eq!(sensor_range_for(Sensor::Distance, "mcore").unwrap().hi, 400.0);
    }

    #[test]
    fn motor_thresholds() {
        assert_eq!(motor_spec(Device::Mcore).min_effective, 25.0);
        assert_eq!(motor_spec(Device::Codey).min_effective, 0.0);
        for d in [Device::Codey, Device::Mcore] {
            let m = motor_spec(d);
            assert!(0.0 <= m.min_effective && m.min_effective < m.max);
        }
    }

    #[test]
    fn round_trip_preserves_classification() {
        let reg = Registry::builtin();
        let reloaded = Registry::from_json(&reg.to_json()).unwrap();
        assert_eq!(reg.entries(), reloaded.entries());
        for entry in reg.entries() {
            for device in [None, Some(Device::Codey), Some(Device::Mcore)] {
                assert_eq!(
                    reg.classify(&entry.opcode, device),
                    reloaded.classify(&entry.opcode, device)
                );
            }
        }
    }

    #[test]
    fn every_kind_constructor_is_reachable() {
        let reg = Registry::builtin();
        let tag = |k: &BlockKind| {
            serde_json::to_value(k).unwrap()["type"]
                .as_str()
                .unwrap()
                .to_string()
        };
        let mut seen: std::collections::BTreeSet<String> = reg
            .entries()
            .iter()
            .flat_map(|e| {
                std::iter::once(e.kind)
                    .chain(e.field_variants.iter().flat_map(|v| v.kinds.values().copied()))
            })
            .map(|k| tag(&k))
            .collect();
        seen.insert(tag(&BlockKind::Unknown));
        for expected in [
            "hat",
            "actuator_on",
            "actuator_off",
            "timed_actuator",
            "move",
            "timed_move",
            "sensor_reporter",
            "boolean_sensor",
            "control",
            "operator",
            "variable_set",
            "variable_change",
            "variable_reporter",
            "unknown",
        ] {
            assert!(seen.contains(expected), "{expected} unreachable");
        }
        let controls: std::collections::HashSet<_> = reg
            .entries()
            .iter()
            .flat_map(|e| {
                std::iter::once(e.kind)
                    .chain(e.field_variants.iter().flat_map(|v| v.kinds.values().copied()))
            })
            .filter_map(|k| match k {
                BlockKind::Control { control } => Some(control),
                _ => None,
            })
            .collect();
        assert_eq!(controls.len(), 10);
        for sensor in Sensor::ALL {
            for device in [Device::Codey, Device::Mcore] {
                assert!(reg.entries().iter().any(|e| e.kind
                    == BlockKind::SensorReporter { sensor }
                    && e.applies_to(Some(device))));
            }
        }
    }

    #[test]
    fn missing_slot_rejected() {
        let text = r#"[{"opcode":"x.move","devices":[],"kind":{"type":"move","direction":"forward"}}]"#;
        assert!(matches!(
            Registry::from_json(text),
            Err(RegistryError::MissingSlot { slot: "power", .. })
        ));
    }

    #[test]
    fn duplicate_opcode_rejected() {
        let text = r#"[
            {"opcode":"a","devices":[],"kind":{"type":"variable_set"},"slots":{"variable":"V","value":"X"}},
            {"opcode":"b","aliases":["a"],"devices":["codey"],"kind":{"type":"unknown"}}
        ]"#;
        assert!(matches!(Registry::from_json(text), Err(RegistryError::Duplicate(op)) if op == "a"));
    }

    #[test]
    fn aliases_classify_like_the_canonical_opcode() {
        let text = r#"[{"opcode":"codey.led_off","aliases":["codey.vendor_led_off"],"devices":["codey"],"kind":{"type":"actuator_off","actuator":"led"}}]"#;
        let reg = Registry::from_json(text).unwrap();
        assert_eq!(
            reg.classify("codey.vendor_led_off", Some(Device::Codey)),
            reg.classify("codey.led_off", Some(Device::Codey))
        );
    }
}
