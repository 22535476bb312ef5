//! Task-relevant visual memory.
//!
//! Views captured while an action executes land in a buffer. The buffer is
//! thinned by a sampling period, scored against the question keywords, merged
//! with what the memory already holds, and only the `K` best views survive.
//! Ordering is by score descending, then by capture step ascending.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::geom::CellPose;
use crate::lexicon::{stopwords, tokenize};

pub const DEFAULT_CAPACITY: usize = 2;
pub const DEFAULT_SAMPLING_PERIOD: usize = 3;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MemoryError {
    #[error("question text is empty")]
    EmptyQuestion,
}

/// Structured stand-in for a camera image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub t: usize,
    pub pose: CellPose,
    /// Visible object labels, sorted; duplicates kept.
    pub labels: Vec<String>,
    pub hash: String,
}

impl Snapshot {
    pub fn new(t: usize, pose: CellPose, mut labels: Vec<String>) -> Self {
        labels.sort();
        let mut hasher = Sha256::new();
        hasher.update(format!("{t}|{}|{}|{}|", pose.cell.x, pose.cell.y, pose.heading));
        hasher.update(labels.join("\u{1f}"));
        let digest = hasher.finalize();
        let hash = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        Self { t, pose, labels, hash }
    }

    /// Text sent to planners in place of image bytes.
    pub fn render(&self) -> String {
        let seen = if self.labels.is_empty() {
            "no recognizable objects".to_string()
        } else {
            self.labels.join(", ")
        };
        format!(
            "view {} at step {} from cell ({}, {}) facing {}: {}",
            self.hash, self.t, self.pose.cell.x, self.pose.cell.y, self.pose.heading, seen
        )
    }
}

/// Text-to-view relevance. Implementations must be pure.
pub trait RelevanceScorer: Send + Sync {
    /// Relevance in `[0, 1]`.
    fn score(&self, keywords: &BTreeSet<String>, snapshot: &Snapshot) -> f64;
}

/// Fraction of keywords that equal a token of some visible label.
#[derive(Debug, Default, Clone, Copy)]
pub struct LexicalScorer;

impl RelevanceScorer for LexicalScorer {
    fn score(&self, keywords: &BTreeSet<String>, snapshot: &Snapshot) -> f64 {
        if keywords.is_empty() {
            return 0.0;
        }
        let tokens: BTreeSet<String> = snapshot.labels.iter().flat_map(|l| tokenize(l)).collect();
        let hits = keywords.iter().filter(|k| tokens.contains(*k)).count();
        hits as f64 / keywords.len() as f64
    }
}

/// Lowercased question tokens minus stopwords; all tokens when every token
/// is a stopword.
pub fn extract_keywords(question_text: &str) -> Result<BTreeSet<String>, MemoryError> {
    let tokens = tokenize(question_text);
    if tokens.is_empty() {
        return Err(MemoryError::EmptyQuestion);
    }
    let stop = stopwords();
    let kept: BTreeSet<String> = tokens.iter().filter(|t| !stop.contains(*t)).cloned().collect();
    if kept.is_empty() {
        Ok(tokens.into_iter().collect())
    } else {
        Ok(kept)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub snapshot: Snapshot,
    pub score: f64,
}

fn entry_order(a: &MemoryEntry, b: &MemoryEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.snapshot.t.cmp(&b.snapshot.t))
        .then_with(|| a.snapshot.hash.cmp(&b.snapshot.hash))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisualMemory {
    capacity: usize,
    entries: Vec<MemoryEntry>,
}

impl Default for VisualMemory {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

impl VisualMemory {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &Snapshot> {
        self.entries.iter().map(|e| &e.snapshot)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Keeps snapshots whose step is a multiple of `sampling_period`, plus the
/// last snapshot of the buffer (the end of the executed trajectory).
pub fn thin_buffer(buffer: &[Snapshot], sampling_period: usize) -> Vec<Snapshot> {
    let period = sampling_period.max(1);
    let last = buffer.len().checked_sub(1);
    buffer
        .iter()
        .enumerate()
        .filter(|(i, s)| s.t % period == 0 || Some(*i) == last)
        .map(|(_, s)| s.clone())
        .collect()
}

/// Merges the thinned buffer into the memory and keeps the top `K`.
///
/// Every entry is rescored, so a memory carried across steps stays consistent
/// with the current keyword set.
pub fn update_visual_memory(
    mem: &VisualMemory,
    buffer: &[Snapshot],
    keywords: &BTreeSet<String>,
    scorer: &dyn RelevanceScorer,
    sampling_period: usize,
) -> VisualMemory {
    let mut pool: Vec<MemoryEntry> = mem
        .entries
        .iter()
        .map(|e| e.snapshot.clone())
        .chain(thin_buffer(buffer, sampling_period))
        .map(|snapshot| MemoryEntry {
            score: scorer.score(keywords, &snapshot),
            snapshot,
        })
        .collect();
    pool.sort_by(entry_order);
    pool.truncate(mem.capacity);
    VisualMemory {
        capacity: mem.capacity,
        entries: pool,
    }
}
