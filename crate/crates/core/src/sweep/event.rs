use serde::{Deserialize, Serialize};

use crate::partitions::SegmentTuple;

/// Working-line identifier: the position of the line on the base line, left
/// to right.
pub type LineId = u8;

/// One step of the sweep history.
///
/// Line lists are given in their order on the sweep line just before the
/// event. Lines outside the kernel (left of the leftmost or right of the
/// rightmost line meeting at the event) are implied and never listed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// Base line swept with segment distribution `lambda`.
    BaseInit { lambda: SegmentTuple },
    /// A working k-crossing: `chosen` meet at a new point; kernel lines go to
    /// the `left` or `right` of it.
    WorkingK {
        chosen: Vec<LineId>,
        left: Vec<LineId>,
        right: Vec<LineId>,
    },
    /// A frame pseudoline: `groups` are the k-1 frame k-crossings from left to
    /// right; `gaps[j]` lists kernel lines crossing the frame line in gap `j`.
    FrameSweep {
        groups: Vec<Vec<LineId>>,
        gaps: Vec<Vec<LineId>>,
    },
    /// Remaining working 2-crossings added on each line at closure.
    Close { closing: Vec<u8> },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::BaseInit { .. } => "base_init",
            Event::WorkingK { .. } => "working_k",
            Event::FrameSweep { .. } => "frame_sweep",
            Event::Close { .. } => "close",
        }
    }
}

/// Persistent history list shared between search nodes.
#[derive(Debug)]
pub(crate) struct HistoryNode {
    pub event: Event,
    pub parent: Option<std::sync::Arc<HistoryNode>>,
    pub len: usize,
}

pub(crate) fn push_history(
    parent: &Option<std::sync::Arc<HistoryNode>>,
    event: Event,
) -> Option<std::sync::Arc<HistoryNode>> {
    let len = parent.as_ref().map_or(0, |p| p.len) + 1;
    Some(std::sync::Arc::new(HistoryNode { event, parent: parent.clone(), len }))
}

pub(crate) fn collect_history(head: &Option<std::sync::Arc<HistoryNode>>) -> Vec<Event> {
    let mut out = Vec::with_capacity(head.as_ref().map_or(0, |h| h.len));
    let mut cur = head.as_ref();
    while let Some(node) = cur {
        out.push(node.event.clone());
        cur = node.parent.as_ref();
    }
    out.reverse();
    out
}
