//! Parsing model output into an action.
//!
//! First attempt: strict JSON extraction between the outermost braces,
//! reading `"action"` and `"reasoning"`. On failure, a fallback scan takes
//! the LAST action keyword mentioned in the raw text (models often restate
//! the options before deciding). If nothing matches, the configured
//! default action is used and the failure is recorded in `parse_status`.

use serde::{Deserialize, Serialize};

use crate::dynamics::Action;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Json,
    Fallback,
    Failed,
}

/// A parsed decision plus provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentDecision {
    pub reasoning: String,
    pub action: Action,
    /// Unparsed model output, kept verbatim for the episode log.
    pub raw: String,
    pub parse_status: ParseStatus,
}

fn action_from_str(s: &str) -> Option<Action> {
    match s.trim().to_ascii_lowercase().replace(' ', "_").as_str() {
        "forward" => Some(Action::Forward),
        "turn_left" => Some(Action::TurnLeft),
        "turn_right" => Some(Action::TurnRight),
        "stop" => Some(Action::Stop),
        _ => None,
    }
}

fn try_json(raw: &str) -> Option<(Action, String)> {
    let start = raw.find('{')?;
    let end = raw.rfind('}')?;
    if end <= start {
        return None;
    }
    let value: serde_json::Value = serde_json::from_str(&raw[start..=end]).ok()?;
    let action = action_from_str(value.get("action")?.as_str()?)?;
    let reasoning = value
        .get("reasoning")
        .and_then(|r| r.as_str())
        .unwrap_or("")
        .to_string();
    Some((action, reasoning))
}

fn keyword_scan(raw: &str) -> Option<Action> {
    let lower = raw.to_ascii_lowercase();
    // Longer keywords first so "turn left" is not shadowed by later
    // single-word matches at the same position.
    const KEYWORDS: [(&str, Action); 6] = [
        ("turn_left", Action::TurnLeft),
        ("turn left", Action::TurnLeft),
        ("turn_right", Action::TurnRight),
        ("turn right", Action::TurnRight),
        ("forward", Action::Forward),
        ("stop", Action::Stop),
    ];
    let mut best: Option<(usize, Action)> = None;
    for (kw, action) in KEYWORDS {
        if let Some(idx) = lower.rfind(kw) {
            if best.map_or(true, |(b, _)| idx > b) {
                best = Some((idx, action));
            }
        }
    }
    best.map(|(_, a)| a)
}

/// Parse a raw model response. Never fails: an unparseable response yields
/// the default action with `parse_status = Failed`.
pub fn parse_decision(raw: &str, default_action: Action) -> AgentDecision {
    if let Some((action, reasoning)) = try_json(raw) {
        return AgentDecision {
            reasoning,
            action,
            raw: raw.to_string(),
            parse_status: ParseStatus::Json,
        };
    }
    if let Some(action) = keyword_scan(raw) {
        return AgentDecision {
            reasoning: String::new(),
            action,
            raw: raw.to_string(),
            parse_status: ParseStatus::Fallback,
        };
    }
    AgentDecision {
        reasoning: String::new(),
        action: default_action,
        raw: raw.to_string(),
        parse_status: ParseStatus::Failed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_json() {
        let d = parse_decision(r#"{"reasoning":"path clear","action":"forward"}"#, Action::TurnRight);
        assert_eq!(d.action, Action::Forward);
        assert_eq!(d.parse_status, ParseStatus::Json);
        assert_eq!(d.reasoning, "path clear");
    }

    #[test]
    fn json_embedded_in_prose() {
        let raw = r#"Here is my plan... {"action":"turn_left","reasoning":"blocked"}"#;
        let d = parse_decision(raw, Action::TurnRight);
        assert_eq!(d.action, Action::TurnLeft);
        assert_eq!(d.parse_status, ParseStatus::Json);
    }

    #[test]
    fn spaced_action_name_in_json() {
        let d = parse_decision(r#"{"action":"turn right","reasoning":""}"#, Action::Forward);
        assert_eq!(d.action, Action::TurnRight);
        assert_eq!(d.parse_status, ParseStatus::Json);
    }

    #[test]
    fn keyword_fallback_takes_last_mention() {
        let d = parse_decision("I will move forward now.", Action::TurnRight);
        assert_eq!(d.action, Action::Forward);
        assert_eq!(d.parse_status, ParseStatus::Fallback);

        let d = parse_decision(
            "Options are forward, turn left, stop. I choose turn left.",
            Action::TurnRight,
        );
        assert_eq!(d.action, Action::TurnLeft);
        assert_eq!(d.parse_status, ParseStatus::Fallback);
    }

    #[test]
    fn garbage_yields_default_and_failed() {
        let d = parse_decision("no idea what to do", Action::TurnRight);
        assert_eq!(d.action, Action::TurnRight);
        assert_eq!(d.parse_status, ParseStatus::Failed);
    }

    #[test]
    fn malformed_json_falls_back_to_scan() {
        let d = parse_decision(r#"{"action": "forward" "#, Action::TurnRight);
        assert_eq!(d.action, Action::Forward);
        assert_eq!(d.parse_status, ParseStatus::Fallback);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parsed_action_is_always_in_the_action_set(raw in ".{0,200}") {
                let d = parse_decision(&raw, Action::TurnRight);
                prop_assert!(Action::ALL.contains(&d.action));
            }
        }
    }
}
