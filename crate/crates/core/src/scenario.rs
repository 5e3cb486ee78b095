//! Problem instances: sensor placement, UAV kinematics and radio parameters.
//!
//! A [`Scenario`] is immutable once built. Upload durations depend only on
//! per-node parameters, so they are computed once at construction and reused
//! by every route evaluation.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{data_rate, flight_time, upload_duration};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Index of a location in a scenario. `0` is the data center, `1..=N` are
/// sensor nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const DEPOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_depot(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Transmitter and channel parameters shared by all sensor nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    #[serde(rename = "tx_power_w")]
    pub tx_power_watts: f64,
    pub bandwidth_hz: f64,
    #[serde(rename = "noise_power_w")]
    pub noise_power_watts: f64,
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tx_power_w", self.tx_power_watts),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_power_w", self.noise_power_watts),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: NodeId,
    pub position: Point,
    pub data_bits: f64,
    pub ref_gain_linear: f64,
}

/// Non-fatal findings from scenario validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioWarning {
    /// Two locations share a position, so the leg between them takes zero time.
    CoincidentLocations(NodeId, NodeId),
}

impl fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioWarning::CoincidentLocations(a, b) => {
                write!(f, "locations {a} and {b} coincide; the leg between them has zero flight time")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    data_center: Point,
    nodes: Vec<SensorNode>,
    altitude_m: f64,
    speed_mps: f64,
    radio: RadioParams,
    // upload duration per location, index 0 (depot) is always 0
    taus: Vec<f64>,
}

impl Scenario {
    /// Builds a scenario, checking every invariant. `nodes` may be in any
    /// order but their ids must be exactly `1..=N`.
    pub fn new(
        data_center: Point,
        mut nodes: Vec<SensorNode>,
        altitude_m: f64,
        speed_mps: f64,
        radio: RadioParams,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::param("scenario needs at least one sensor node"));
        }
        if !(speed_mps.is_finite() && speed_mps > 0.0) {
            return Err(Error::param(format!("UAV speed must be positive, got {speed_mps}")));
        }
        if !(altitude_m.is_finite() && altitude_m > 0.0) {
            return Err(Error::param(format!("UAV altitude must be positive, got {altitude_m}")));
        }
        if !data_center.is_finite() {
            return Err(Error::param("data center coordinates must be finite"));
        }
        radio.validate()?;

        nodes.sort_by_key(|n| n.id);
        for (i, node) in nodes.iter().enumerate() {
            if node.id.0 != i + 1 {
                return Err(Error::param(format!(
                    "sensor node ids must be exactly 1..={}, found id {} at sorted position {}",
                    nodes.len(),
                    node.id,
                    i + 1
                )));
            }
            if !node.position.is_finite() {
                return Err(Error::param(format!("node {} has non-finite coordinates", node.id)));
            }
            if !(node.data_bits.is_finite() && node.data_bits >= 0.0) {
                return Err(Error::param(format!("node {} has invalid data size {}", node.id, node.data_bits)));
            }
            if !(node.ref_gain_linear.is_finite() && node.ref_gain_linear > 0.0) {
                return Err(Error::param(format!(
                    "node {} has non-positive reference gain {}",
                    node.id, node.ref_gain_linear
                )));
            }
        }

        let mut taus = Vec::with_capacity(nodes.len() + 1);
        taus.push(0.0);
        for node in &nodes {
            let rate = data_rate(&radio, node.ref_gain_linear, altitude_m)?;
            taus.push(upload_duration(node.data_bits, rate)?);
        }

        Ok(Scenario {
            data_center,
            nodes,
            altitude_m,
            speed_mps,
            radio,
            taus,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn data_center(&self) -> Point {
        self.data_center
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn altitude_m(&self) -> f64 {
        self.altitude_m
    }

    pub fn speed_mps(&self) -> f64 {
        self.speed_mps
    }

    pub fn radio(&self) -> &RadioParams {
        &self.radio
    }

    /// Position of a location; id 0 is the data center.
    ///
    /// Panics if `id` is out of range.
    pub fn position(&self, id: NodeId) -> Point {
        if id.is_depot() {
            self.data_center
        } else {
            self.nodes[id.0 - 1].position
        }
    }

    /// Upload duration of a location (0 for the data center).
    pub fn tau(&self, id: NodeId) -> f64 {
        self.taus[id.0]
    }

    /// Sum of all upload durations; the route-independent part of the max AoI.
    pub fn tau_sum(&self) -> f64 {
        self.taus.iter().sum()
    }

    pub fn leg_time(&self, from: NodeId, to: NodeId) -> f64 {
        // speed validated at construction
        flight_time(self.position(from), self.position(to), self.speed_mps).unwrap_or(f64::NAN)
    }

    /// Dense `(N+1) x (N+1)` table of flight times, row-major.
    pub fn leg_matrix(&self) -> Vec<f64> {
        let m = self.n() + 1;
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.leg_time(NodeId(i), NodeId(j));
            }
        }
        out
    }

    pub fn warnings(&self) -> Vec<ScenarioWarning> {
        let mut points: Vec<(NodeId, Point)> = vec![(NodeId::DEPOT, self.data_center)];
        points.extend(self.nodes.iter().map(|n| (n.id, n.position)));
        let mut out = Vec::new();
        for (i, (a, pa)) in points.iter().enumerate() {
            for (b, pb) in &points[i + 1..] {
                if pa == pb {
                    out.push(ScenarioWarning::CoincidentLocations(*a, *b));
                }
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        Scenario::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from(self)).expect("scenario serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// On-disk JSON layout of a scenario. All units SI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub data_center: Point,
    pub uav: UavFile,
    pub radio: RadioParams,
    pub nodes: Vec<NodeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UavFile {
    pub altitude_m: f64,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeFile {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub data_bits: f64,
    pub ref_gain_linear: f64,
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(file: ScenarioFile) -> Result<Self> {
        let nodes = file
            .nodes
            .into_iter()
            .map(|n| SensorNode {
                id: NodeId(n.id),
                position: Point::new(n.x, n.y),
                data_bits: n.data_bits,
                ref_gain_linear: n.ref_gain_linear,
            })
            .collect();
        Scenario::new(file.data_center, nodes, file.uav.altitude_m, file.uav.speed_mps, file.radio)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        ScenarioFile {
            data_center: s.data_center,
            uav: UavFile {
                altitude_m: s.altitude_m,
                speed_mps: s.speed_mps,
            },
            radio: s.radio,
            nodes: s
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id.0,
                    x: n.position.x,
                    y: n.position.y,
                    data_bits: n.data_bits,
                    ref_gain_linear: n.ref_gain_linear,
                })
                .collect(),
        }
    }
}

/// Parameters applied to every generated node.
///
/// The defaults are the reference simulation setup: 3 km radius, UAV at 30 m
/// flying 10 m/s, 0.3 W transmit power, 1 MHz bandwidth, -110 dBm noise,
/// -50 dB gain at 1 m and 0.5 Mb per node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioDefaults {
    pub radius_m: f64,
    pub altitude_m: f64,
    pub speed_mps: f64,
    pub data_bits: f64,
    pub ref_gain_linear: f64,
    pub tx_power_w: f64,
    pub bandwidth_hz: f64,
    pub noise_power_w: f64,
}

impl Default for ScenarioDefaults {
    fn default() -> Self {
        ScenarioDefaults {
            radius_m: 3000.0,
            altitude_m: 30.0,
            speed_mps: 10.0,
            data_bits: 0.5e6,
            ref_gain_linear: db_to_linear(-50.0),
            tx_power_w: 0.3,
            bandwidth_hz: 1e6,
            noise_power_w: dbm_to_watts(-110.0),
        }
    }
}

impl ScenarioDefaults {
    pub fn radio(&self) -> RadioParams {
        RadioParams {
            tx_power_watts: self.tx_power_w,
            bandwidth_hz: self.bandwidth_hz,
            noise_power_watts: self.noise_power_w,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Draws `n` sensor nodes uniformly over the area of a disk of `radius_m`
/// centered on the data center at the origin.
pub fn generate_scenario(n: usize, radius_m: f64, seed: u64, defaults: &ScenarioDefaults) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::param("node count must be at least 1"));
    }
    if !(radius_m.is_finite() && radius_m > 0.0) {
        return Err(Error::param(format!("radius must be positive, got {radius_m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (1..=n)
        .map(|id| {
            // sqrt of a uniform radius fraction gives uniform density over area
            let r = radius_m * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            SensorNode {
                id: NodeId(id),
                position: Point::new(r * theta.cos(), r * theta.sin()),
                data_bits: defaults.data_bits,
                ref_gain_linear: defaults.ref_gain_linear,
            }
        })
        .collect();
    Scenario::new(Point::ORIGIN, nodes, defaults.altitude_m, defaults.speed_mps, defaults.radio())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        assert!((db_to_linear(-50.0) - 1e-5).abs() < 1e-20);
        assert!((dbm_to_watts(-110.0) - 1e-14).abs() < 1e-28);
    }

    #[test]
    fn generation_is_deterministic() {
        let d = ScenarioDefaults::default();
        let a = generate_scenario(20, 3000.0, 7, &d).unwrap();
        let b = generate_scenario(20, 3000.0, 7, &d).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(20, 3000.0, 8, &d).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_nodes_stay_inside_disk() {
        let d = ScenarioDefaults::default();
        for seed in 0..20 {
            let s = generate_scenario(30, 3000.0, seed, &d).unwrap();
            assert_eq!(s.data_center(), Point::ORIGIN);
            for node in s.nodes() {
                let p = node.position;
                assert!(p.x * p.x + p.y * p.y <= 3000.0 * 3000.0);
            }
        }
    }

    #[test]
    fn generation_is_uniform_over_area() {
        let s = generate_scenario(10_000, 1.0, 3, &ScenarioDefaults::default()).unwrap();
        let inner = s
            .nodes()
            .iter()
            .filter(|n| n.position.x.powi(2) + n.position.y.powi(2) <= 0.25)
            .count();
        let frac = inner as f64 / 10_000.0;
        assert!((frac - 0.25).abs() <= 0.02, "inner fraction {frac}");
    }

    #[test]
    fn zero_nodes_rejected() {
        let err = generate_scenario(0, 3000.0, 1, &ScenarioDefaults::default()).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn ids_must_be_contiguous() {
        let radio = ScenarioDefaults::default().radio();
        let node = |id| SensorNode {
            id: NodeId(id),
            position: Point::new(id as f64, 0.0),
            data_bits: 1.0,
            ref_gain_linear: 1e-5,
        };
        assert!(Scenario::new(Point::ORIGIN, vec![node(2), node(1)], 30.0, 10.0, radio).is_ok());
        assert!(Scenario::new(Point::ORIGIN, vec![node(1), node(3)], 30.0, 10.0, radio).is_err());
        assert!(Scenario::new(Point::ORIGIN, vec![node(1), node(1)], 30.0, 10.0, radio).is_err());
        assert!(Scenario::new(Point::ORIGIN, vec![node(1)], 30.0, 0.0, radio).is_err());
        assert!(Scenario::new(Point::ORIGIN, vec![node(1)], -1.0, 10.0, radio).is_err());
    }

    #[test]
    fn coincident_nodes_warn() {
        let radio = ScenarioDefaults::default().radio();
        let at = |id, x| SensorNode {
            id: NodeId(id),
            position: Point::new(x, 0.0),
            data_bits: 1.0,
            ref_gain_linear: 1e-5,
        };
        let s = Scenario::new(Point::ORIGIN, vec![at(1, 5.0), at(2, 5.0)], 30.0, 10.0, radio).unwrap();
        assert_eq!(s.warnings(), vec![ScenarioWarning::CoincidentLocations(NodeId(1), NodeId(2))]);
    }

    #[test]
    fn json_file_round_trip() {
        let s = generate_scenario(5, 100.0, 11, &ScenarioDefaults::default()).unwrap();
        let text = s.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["data_center", "uav", "radio", "nodes"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["radio"].get("tx_power_w").is_some());
        assert!(v["nodes"][0].get("ref_gain_linear").is_some());
        assert_eq!(Scenario::from_json(&text).unwrap(), s);
    }
}
