use crate::evo::Individual;
use crate::model::Route;
use crate::scenario::{NodeId, Scenario};

/// Nearest-neighbor chain from the data center. Ties go to the lower id.
pub fn solve_greedy(scenario: &Scenario) -> Individual {
    let n = scenario.n();
    let mut visited = vec![false; n + 1];
    let mut current = NodeId::DEPOT;
    let mut interior = Vec::with_capacity(n);
    for _ in 0..n {
        let here = scenario.position(current);
        let mut next = None;
        let mut best = f64::INFINITY;
        for (id, _) in visited.iter().enumerate().skip(1).filter(|(_, &v)| !v) {
            let d = here.distance(&scenario.position(NodeId(id)));
            if d < best {
                best = d;
                next = Some(id);
            }
        }
        let id = next.expect("an unvisited node remains");
        visited[id] = true;
        interior.push(id);
        current = NodeId(id);
    }
    let route = Route::from_interior(&interior).expect("greedy chain is a permutation");
    Individual::evaluate(scenario, route).expect("route matches scenario")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{triangle, with_taus};

    #[test]
    fn triangle_greedy_is_suboptimal() {
        let best = solve_greedy(&triangle());
        assert_eq!(best.route.to_indices(), vec![0, 1, 2, 0]);
        assert_eq!(best.omega, 11.0);
    }

    #[test]
    fn single_node() {
        let s = with_taus(&[(5.0, 5.0)], &[1.0]);
        assert_eq!(solve_greedy(&s).route.to_indices(), vec![0, 1, 0]);
    }

    #[test]
    fn equidistant_tie_picks_lower_id() {
        let s = with_taus(&[(0.0, -10.0), (0.0, 10.0), (10.0, 0.0)], &[1.0; 3]);
        assert_eq!(solve_greedy(&s).route.interior_indices()[0], 1);
        let s = with_taus(&[(50.0, 0.0), (0.0, 10.0), (0.0, -10.0)], &[1.0; 3]);
        assert_eq!(solve_greedy(&s).route.interior_indices()[0], 2);
    }

    #[test]
    fn deterministic() {
        let s = crate::scenario::generate_scenario(30, 3000.0, 5, &Default::default()).unwrap();
        let a = solve_greedy(&s);
        let b = solve_greedy(&s);
        assert_eq!(a.route, b.route);
        assert_eq!(a.omega.to_bits(), b.omega.to_bits());
    }
}
