//! Extraction of routes from free-form model output.
//!
//! Models wrap answers in prose, reasoning and code fences, so the parser
//! looks for bracketed non-negative integer lists and, for single-route
//! answers, keeps the last one. Only list-ness is checked here; the
//! verifier decides whether the route is valid.

use std::sync::LazyLock;

use regex::Regex;

use crate::evo::{CandidateIndividual, VerificationError, VerificationKind};

static ROUTE_LIST: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\s*(\d+(?:\s*,\s*\d+)*)\s*,?\s*\]").unwrap());

static OMEGA: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:omega|\baoi\b|Ω)[^\d\[\]\n-]{0,24}(-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)").unwrap()
});

const EXCERPT_CHARS: usize = 200;

struct Found {
    ids: Vec<usize>,
    start: usize,
    end: usize,
}

fn route_lists(text: &str) -> Vec<Found> {
    ROUTE_LIST
        .captures_iter(text)
        .filter_map(|c| {
            let whole = c.get(0)?;
            let ids = c[1]
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .ok()?;
            Some(Found {
                ids,
                start: whole.start(),
                end: whole.end(),
            })
        })
        .collect()
}

fn wrap_depot(mut ids: Vec<usize>, n: usize) -> Vec<usize> {
    if ids.len() == n && n > 0 && ids[0] != 0 && ids[n - 1] != 0 {
        ids.insert(0, 0);
        ids.push(0);
    }
    ids
}

fn omega_near(text: &str, found: &Found, next_start: Option<usize>) -> Option<f64> {
    let line_start = text[..found.start].rfind('\n').map_or(0, |i| i + 1);
    let mut line_end = text[found.end..].find('\n').map_or(text.len(), |i| found.end + i);
    if let Some(next) = next_start {
        line_end = line_end.min(next);
    }
    let after = &text[found.end..line_end];
    let before = &text[line_start..found.start];
    OMEGA
        .captures(after)
        .or_else(|| OMEGA.captures_iter(before).last())
        .and_then(|c| c[1].parse::<f64>().ok())
}

fn unparseable(text: &str) -> VerificationError {
    let excerpt: String = text.chars().take(EXCERPT_CHARS).collect();
    VerificationError::new(
        VerificationKind::Unparseable,
        format!("no bracketed list of node ids found in the response: \"{excerpt}\""),
    )
}

/// Last bracketed id list in `text`, wrapped with depot endpoints when it
/// lists exactly the `n` sensor nodes without them. An `omega`/`AoI` number
/// on the same line becomes the claim.
pub fn parse_route_response(text: &str, n: usize) -> Result<CandidateIndividual, VerificationError> {
    let found = route_lists(text);
    let last = found.last().ok_or_else(|| unparseable(text))?;
    let claim = omega_near(text, last, None);
    Ok(CandidateIndividual::new(wrap_depot(last.ids.clone(), n), claim))
}

/// Every bracketed id list in `text`, in order, each with its own claim.
pub fn parse_route_responses(text: &str, n: usize) -> Result<Vec<CandidateIndividual>, VerificationError> {
    let found = route_lists(text);
    if found.is_empty() {
        return Err(unparseable(text));
    }
    Ok(found
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let next = found.get(i + 1).map(|g| g.start);
            CandidateIndividual::new(wrap_depot(f.ids.clone(), n), omega_near(text, f, next))
        })
        .collect())
}
