//! Sliding action-state history included in prompts.

use std::collections::VecDeque;

use crate::dynamics::{Action, Heading};
use crate::world::PxPoint;

/// One history line: the pose at decision time, the action taken there,
/// and the distance to the target from that pose.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryEntry {
    pub step: u32,
    pub position: PxPoint,
    pub theta: Heading,
    pub action: Action,
    /// Full-precision distance; rounded only for display.
    pub distance_px: f64,
    pub target: PxPoint,
}

/// Render one entry in the fixed history-line format.
pub fn format_history_entry(e: &HistoryEntry) -> String {
    format!(
        "Step {}: Position ({}, {}), θ = {}°, Action: {}, Distance to target: {}, Target ({}, {})",
        e.step,
        e.position.x,
        e.position.y,
        e.theta.degrees(),
        e.action.history_label(),
        e.distance_px.round() as i64,
        e.target.x,
        e.target.y
    )
}

/// Bounded FIFO of history entries; the oldest entry is evicted when the
/// window is full.
#[derive(Clone, Debug, Default)]
pub struct HistoryWindow {
    entries: VecDeque<HistoryEntry>,
    capacity: usize,
}

impl HistoryWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, entry: HistoryEntry) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() == self.capacity {
            let _ = self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &HistoryEntry> {
        self.entries.iter()
    }

    /// All entries, oldest first, one line each; "(none)" when empty.
    pub fn render_block(&self) -> String {
        if self.entries.is_empty() {
            return "(none)".to_string();
        }
        self.entries
            .iter()
            .map(format_history_entry)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(step: u32) -> HistoryEntry {
        HistoryEntry {
            step,
            position: PxPoint::new(100, 200),
            theta: Heading::North,
            action: Action::TurnLeft,
            distance_px: 30.0,
            target: PxPoint::new(130, 200),
        }
    }

    #[test]
    fn line_format_matches_contract() {
        assert_eq!(
            format_history_entry(&entry(5)),
            "Step 5: Position (100, 200), θ = 90°, Action: turn left, Distance to target: 30, Target (130, 200)"
        );
    }

    #[test]
    fn distance_is_rounded_to_nearest() {
        let mut e = entry(2);
        e.distance_px = 29.6;
        assert!(format_history_entry(&e).contains("Distance to target: 30,"));
        e.distance_px = 29.4;
        assert!(format_history_entry(&e).contains("Distance to target: 29,"));
    }

    #[test]
    fn step_zero_line_prefix() {
        let mut e = entry(0);
        e.action = Action::Forward;
        assert!(format_history_entry(&e).starts_with("Step 0: Position"));
    }

    #[test]
    fn window_evicts_oldest_at_capacity() {
        let mut w = HistoryWindow::new(10);
        for step in 0..15 {
            w.push(entry(step));
        }
        assert_eq!(w.len(), 10);
        let steps: Vec<u32> = w.iter().map(|e| e.step).collect();
        assert_eq!(steps, (5..15).collect::<Vec<_>>());
    }

    #[test]
    fn entry_evicted_exactly_when_ten_newer_arrive() {
        let mut w = HistoryWindow::new(10);
        for step in 0..10 {
            w.push(entry(step));
            assert!(w.iter().any(|e| e.step == 0));
        }
        w.push(entry(10));
        assert!(!w.iter().any(|e| e.step == 0));
    }
}
