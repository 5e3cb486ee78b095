//! Prompt documents in three labelled parts: task description, parent
//! solutions (evolution only) and hints. Rendering is a pure function of the
//! inputs.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evo::{Individual, VerificationError};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionLabel {
    TaskDescription,
    ParentSolutions,
    Hints,
}

impl SectionLabel {
    pub fn heading(self) -> &'static str {
        match self {
            SectionLabel::TaskDescription => "Task description",
            SectionLabel::ParentSolutions => "Parent solutions",
            SectionLabel::Hints => "Hints",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptDocument {
    sections: Vec<(SectionLabel, String)>,
}

impl PromptDocument {
    pub fn sections(&self) -> &[(SectionLabel, String)] {
        &self.sections
    }

    pub fn section(&self, label: SectionLabel) -> Option<&str> {
        self.sections.iter().find(|(l, _)| *l == label).map(|(_, t)| t.as_str())
    }

    pub fn labels(&self) -> Vec<SectionLabel> {
        self.sections.iter().map(|(l, _)| *l).collect()
    }

    pub fn rendered(&self) -> String {
        let mut out = String::new();
        for (i, (label, text)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str("### ");
            out.push_str(label.heading());
            out.push('\n');
            out.push_str(text.trim_end());
            out.push('\n');
        }
        out
    }
}

const ROUTE_LINE: &str = "[0, ..., 0] omega = <maximum AoI in seconds>";

fn task_description(scenario: &Scenario) -> String {
    let n = scenario.n();
    let mut t = String::new();
    let _ = writeln!(
        t,
        "A UAV starts at the data center, visits each of {n} ground sensor nodes exactly once to collect \
         their data, and flies back to the data center. It flies in straight lines at {} m/s. At every \
         node it waits for that node's upload to finish before moving on.",
        scenario.speed_mps()
    );
    let _ = writeln!(
        t,
        "The age of information (AoI) of a node is the time from the UAV's arrival at that node until it \
         is back at the data center. The first node visited has the largest AoI:"
    );
    let _ = writeln!(
        t,
        "omega = (sum of all upload times) + (flight time from the first visited node through the rest \
         of the route back to the data center). The flight from the data center to the first node is \
         not counted."
    );
    let _ = writeln!(
        t,
        "Goal: find a visiting order that minimizes omega, i.e. minimizes the flight time from the first \
         visited node onwards. Flight time between two locations is their Euclidean distance divided by \
         the speed."
    );
    let _ = writeln!(t);
    let _ = writeln!(t, "Sum of upload times: {:.6} s", scenario.tau_sum());
    let _ = writeln!(t, "Locations (id: (x, y) in meters):");
    let dc = scenario.data_center();
    let _ = writeln!(t, "depot 0: ({:.3}, {:.3}) data center", dc.x, dc.y);
    for node in scenario.nodes() {
        let _ = writeln!(
            t,
            "node {}: ({:.3}, {:.3}) upload {:.6} s",
            node.id,
            node.position.x,
            node.position.y,
            scenario.tau(node.id)
        );
    }
    let _ = writeln!(t);
    let _ = writeln!(
        t,
        "Route format: a bracketed list of ids that starts with 0, contains every node id from 1 to {n} \
         exactly once, and ends with 0, followed by its omega, for example:"
    );
    let _ = writeln!(t, "{ROUTE_LINE}");
    t
}

/// Prompt asking for `count` distinct starting routes.
pub fn build_init_prompt(scenario: &Scenario, count: usize) -> PromptDocument {
    let hints = format!(
        "Produce {count} distinct routes. Write each route on its own line as\n{ROUTE_LINE}\n\
         Use no other bracketed lists in your answer. Every route must start and end with the data center 0."
    );
    PromptDocument {
        sections: vec![
            (SectionLabel::TaskDescription, task_description(scenario)),
            (SectionLabel::Hints, hints),
        ],
    }
}

/// Prompt asking for one offspring recombined from `parents`.
pub fn build_evolution_prompt(scenario: &Scenario, parents: &[Individual]) -> Result<PromptDocument> {
    if parents.is_empty() {
        return Err(Error::param("evolution prompt needs at least one parent"));
    }
    let mut listing = String::new();
    for (i, p) in parents.iter().enumerate() {
        let _ = writeln!(listing, "parent {}: omega = {:.6} route = {}", i + 1, p.omega, p.route);
    }
    let hints = format!(
        "Act as a crossover operator: keep short, efficient segments from the parents above and \
         recombine them into one new route with a smaller omega. The new route must differ from every \
         parent and must start and end with the data center 0.\n\
         Output exactly one route, on the last line of your answer, as\n{ROUTE_LINE}"
    );
    Ok(PromptDocument {
        sections: vec![
            (SectionLabel::TaskDescription, task_description(scenario)),
            (SectionLabel::ParentSolutions, listing),
            (SectionLabel::Hints, hints),
        ],
    })
}

/// Extends `previous` with the rejection reason; each retry adds one line to
/// the hints.
pub fn build_retry_prompt(previous: &PromptDocument, error: &VerificationError) -> PromptDocument {
    let mut doc = previous.clone();
    let line = format!(
        "Your previous answer was rejected ({}): {}. Fix this and answer again with exactly one route.",
        error.kind, error.detail
    );
    match doc.sections.iter_mut().find(|(l, _)| *l == SectionLabel::Hints) {
        Some((_, text)) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            text.push_str(&line);
            text.push('\n');
        }
        None => doc.sections.push((SectionLabel::Hints, line)),
    }
    doc
}
