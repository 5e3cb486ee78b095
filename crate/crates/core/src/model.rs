//! Flight, channel and information-freshness model.
//!
//! A route `[c_0, c_1, .., c_N, c_{N+1}]` starts and ends at the data center.
//! Data from node `c_i` is stamped when the UAV arrives there, so its age at
//! mission end covers the uploads from `c_i` onwards plus the remaining legs
//! back to the depot. The outbound leg `c_0 -> c_1` happens before any data
//! exists and therefore counts toward mission time only.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evo::{VerificationError, VerificationKind};
use crate::scenario::{NodeId, Point, RadioParams, Scenario};

/// Straight-line flight time between two points at constant speed.
pub fn flight_time(a: Point, b: Point, speed_mps: f64) -> Result<f64> {
    if !(speed_mps.is_finite() && speed_mps > 0.0) {
        return Err(Error::param(format!("speed must be positive, got {speed_mps}")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param("points must have finite coordinates"));
    }
    Ok(a.distance(&b) / speed_mps)
}

/// Shannon rate of the line-of-sight link from a ground node to the UAV
/// hovering at `altitude_m`, with channel gain `g / h^2`.
pub fn data_rate(radio: &RadioParams, ref_gain_linear: f64, altitude_m: f64) -> Result<f64> {
    radio.validate()?;
    if !(ref_gain_linear.is_finite() && ref_gain_linear > 0.0) {
        return Err(Error::param(format!("reference gain must be positive, got {ref_gain_linear}")));
    }
    if !(altitude_m.is_finite() && altitude_m > 0.0) {
        return Err(Error::param(format!("altitude must be positive, got {altitude_m}")));
    }
    let snr = radio.tx_power_watts * ref_gain_linear / (radio.noise_power_watts * altitude_m * altitude_m);
    Ok(radio.bandwidth_hz * (1.0 + snr).log2())
}

pub fn upload_duration(data_bits: f64, rate_bps: f64) -> Result<f64> {
    if !(rate_bps.is_finite() && rate_bps > 0.0) {
        return Err(Error::param(format!("data rate must be positive, got {rate_bps}")));
    }
    if !(data_bits.is_finite() && data_bits >= 0.0) {
        return Err(Error::param(format!("data size must be non-negative, got {data_bits}")));
    }
    Ok(data_bits / rate_bps)
}

/// Age at time `t` of data stamped at `stamped_at`; zero before the stamp.
pub fn aoi_at(t: f64, stamped_at: f64) -> f64 {
    (t - stamped_at).max(0.0)
}

/// A closed visiting sequence `[0, c_1, .., c_N, 0]` whose interior is a
/// permutation of `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Route(Vec<NodeId>);

impl Route {
    /// Validates endpoints, length and the interior permutation against a
    /// scenario with `n` sensor nodes. Checks run in that order and the first
    /// failure is returned.
    pub fn new(sequence: &[usize], n: usize) -> Result<Self, VerificationError> {
        check_structure(sequence, n)?;
        Ok(Route(sequence.iter().copied().map(NodeId).collect()))
    }

    /// Wraps a permutation of `1..=N` with depot endpoints.
    pub fn from_interior(interior: &[usize]) -> Result<Self, VerificationError> {
        let mut seq = Vec::with_capacity(interior.len() + 2);
        seq.push(0);
        seq.extend_from_slice(interior);
        seq.push(0);
        Route::new(&seq, interior.len())
    }

    pub fn sequence(&self) -> &[NodeId] {
        &self.0
    }

    /// Sensor nodes in visiting order, without the depot endpoints.
    pub fn interior(&self) -> &[NodeId] {
        &self.0[1..self.0.len() - 1]
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        self.interior().iter().map(|id| id.0).collect()
    }

    pub fn n(&self) -> usize {
        self.0.len() - 2
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.0.iter().map(|id| id.0).collect()
    }
}

impl fmt::Display for Route {
    /// Bracketed id list, e.g. `[0, 2, 1, 0]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("]")
    }
}

impl TryFrom<Vec<usize>> for Route {
    type Error = VerificationError;

    fn try_from(seq: Vec<usize>) -> Result<Self, VerificationError> {
        let n = seq.len().saturating_sub(2);
        Route::new(&seq, n)
    }
}

impl From<Route> for Vec<usize> {
    fn from(r: Route) -> Self {
        r.to_indices()
    }
}

fn check_structure(seq: &[usize], n: usize) -> Result<(), VerificationError> {
    let expected_len = n + 2;
    if n == 0 {
        return Err(VerificationError::new(
            VerificationKind::WrongLength,
            format!("route must visit at least one sensor node, got {} entries", seq.len()),
        ));
    }
    if seq.len() < 2 {
        return Err(wrong_length(seq.len(), n));
    }
    let (first, last) = (seq[0], seq[seq.len() - 1]);
    if first != 0 || last != 0 {
        return Err(VerificationError::new(
            VerificationKind::BadEndpoints,
            format!("route must start and end at the data center 0, but it starts at {first} and ends at {last}"),
        ));
    }
    if seq.len() != expected_len {
        return Err(wrong_length(seq.len(), n));
    }
    let interior = &seq[1..seq.len() - 1];
    let mut seen = vec![false; n + 1];
    for &id in interior {
        if (1..=n).contains(&id) {
            if seen[id] {
                return Err(VerificationError::new(
                    VerificationKind::DuplicateNode,
                    format!("node {id} is visited more than once"),
                ));
            }
            seen[id] = true;
        }
    }
    if let Some(missing) = (1..=n).find(|&id| !seen[id]) {
        let strays: Vec<String> = interior
            .iter()
            .filter(|&&id| !(1..=n).contains(&id))
            .map(|id| id.to_string())
            .collect();
        let mut detail = format!("node {missing} is never visited");
        if !strays.is_empty() {
            detail.push_str(&format!(
                " (interior contains ids outside 1..={n}: {})",
                strays.join(", ")
            ));
        }
        return Err(VerificationError::new(VerificationKind::MissingNode, detail));
    }
    Ok(())
}

fn wrong_length(len: usize, n: usize) -> VerificationError {
    VerificationError::new(
        VerificationKind::WrongLength,
        format!(
            "route must contain {} entries (data center, {n} sensor nodes, data center), got {len}",
            n + 2
        ),
    )
}

/// Per-node ages and aggregate times for one route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoiProfile {
    /// `A_{c_i}` in visiting order.
    pub per_node_aoi: Vec<f64>,
    /// Age of the first-visited node, the largest of all.
    pub max_aoi: f64,
    /// Total flight plus upload time, including the outbound leg.
    pub mission_time: f64,
    pub tau_sum: f64,
    /// Flight time from the first node onwards (outbound leg excluded).
    pub travel_objective: f64,
}

fn ensure_matches(scenario: &Scenario, route: &Route) -> Result<()> {
    if route.n() != scenario.n() {
        return Err(Error::Verification(wrong_length(route.sequence().len(), scenario.n())));
    }
    Ok(())
}

pub fn evaluate_route(scenario: &Scenario, route: &Route) -> Result<AoiProfile> {
    ensure_matches(scenario, route)?;
    let seq = route.sequence();
    let n = scenario.n();

    // suffix sums from the last node back to c_1
    let mut per_node_aoi = vec![0.0; n];
    let mut age = 0.0;
    let mut travel = 0.0;
    let mut tau_sum = 0.0;
    for i in (1..=n).rev() {
        let leg = scenario.leg_time(seq[i], seq[i + 1]);
        let tau = scenario.tau(seq[i]);
        age += tau + leg;
        travel += leg;
        tau_sum += tau;
        per_node_aoi[i - 1] = age;
    }
    let outbound = scenario.leg_time(seq[0], seq[1]);

    Ok(AoiProfile {
        max_aoi: per_node_aoi[0],
        per_node_aoi,
        mission_time: outbound + age,
        tau_sum,
        travel_objective: travel,
    })
}

/// Flight time over legs `c_1 -> c_2 -> .. -> c_N -> c_{N+1}`.
pub fn route_objective(scenario: &Scenario, route: &Route) -> Result<f64> {
    ensure_matches(scenario, route)?;
    let seq = route.sequence();
    Ok(seq[1..].windows(2).map(|w| scenario.leg_time(w[0], w[1])).sum())
}
