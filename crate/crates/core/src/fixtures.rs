//! Small hand-checkable scenarios used by tests, examples and mock runs.

use crate::scenario::{NodeId, Point, RadioParams, Scenario, SensorNode};

/// Radio setup with SNR exactly 1 at 1 m altitude, so every node uploads at
/// exactly 1 Mbit/s and `data_bits = tau * 1e6`.
pub fn unit_radio() -> RadioParams {
    RadioParams {
        tx_power_watts: 1.0,
        bandwidth_hz: 1e6,
        noise_power_watts: 1.0,
    }
}

/// Depot at the origin, nodes at `positions` with upload durations `taus`,
/// UAV speed 10 m/s.
pub fn with_taus(positions: &[(f64, f64)], taus: &[f64]) -> Scenario {
    assert_eq!(positions.len(), taus.len());
    let nodes = positions
        .iter()
        .zip(taus)
        .enumerate()
        .map(|(i, (&(x, y), &tau))| SensorNode {
            id: NodeId(i + 1),
            position: Point::new(x, y),
            data_bits: tau * 1e6,
            ref_gain_linear: 1.0,
        })
        .collect();
    Scenario::new(Point::ORIGIN, nodes, 1.0, 10.0, unit_radio()).expect("fixture scenario is valid")
}

/// `s_0=(0,0)`, `s_1=(0,30)`, `s_2=(40,30)`, v = 10 m/s, both uploads 1 s.
/// Legs are 3 s (0-1), 4 s (1-2) and 5 s (2-0).
pub fn triangle() -> Scenario {
    with_taus(&[(0.0, 30.0), (40.0, 30.0)], &[1.0, 1.0])
}
