use std::collections::HashMap;

use super::{hamming_distance, ContentHash, LogEntry, PerceptualHash, PosterRecord, RejectReason, Rejection};

fn pending_by_id(records: &[PosterRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..records.len()).filter(|&i| records[i].is_pending()).collect();
    order.sort_by(|&a, &b| records[a].id.cmp(&records[b].id));
    order
}

fn reject(record: &mut PosterRecord, log: &mut Vec<LogEntry>, rejection: Rejection) {
    log.push(LogEntry { id: record.id.clone(), rejection: rejection.clone() });
    record.reject(rejection);
}

/// Rejects every pending record whose content hash was already seen on a
/// record with a smaller id.
///
/// Pending records without a hash could not be read and are rejected as
/// `io`.
pub fn exact_dedup(records: &mut [PosterRecord]) -> Vec<LogEntry> {
    let mut log = Vec::new();
    let mut first_seen: HashMap<ContentHash, String> = HashMap::new();
    for i in pending_by_id(records) {
        let record = &mut records[i];
        let Some(hash) = record.content_hash else {
            reject(record, &mut log, Rejection::new(RejectReason::Io, "content hash unavailable"));
            continue;
        };
        match first_seen.get(&hash) {
            Some(keeper) => {
                let detail = format!("same MD5 {hash} as {keeper}");
                reject(record, &mut log, Rejection::new(RejectReason::DuplicateExact, detail));
            }
            None => {
                first_seen.insert(hash, record.id.clone());
            }
        }
    }
    log
}

/// Burkhard-Keller tree over Hamming distance.
#[derive(Default)]
struct BkTree {
    nodes: Vec<BkNode>,
}

struct BkNode {
    hash: PerceptualHash,
    owner: usize,
    children: Vec<(u32, usize)>,
}

impl BkTree {
    fn insert(&mut self, hash: PerceptualHash, owner: usize) {
        let new = self.nodes.len();
        if new == 0 {
            self.nodes.push(BkNode { hash, owner, children: Vec::new() });
            return;
        }
        let mut at = 0;
        loop {
            let d = hamming_distance(hash, self.nodes[at].hash);
            match self.nodes[at].children.iter().find(|(k, _)| *k == d) {
                Some(&(_, child)) => at = child,
                None => {
                    self.nodes[at].children.push((d, new));
                    self.nodes.push(BkNode { hash, owner, children: Vec::new() });
                    return;
                }
            }
        }
    }

    /// The earliest-inserted owner within `radius` of `hash`, if any.
    fn nearest_owner_within(&self, hash: PerceptualHash, radius: u32) -> Option<(usize, u32)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, u32)> = None;
        let mut stack = vec![0usize];
        while let Some(at) = stack.pop() {
            let node = &self.nodes[at];
            let d = hamming_distance(hash, node.hash);
            if d <= radius && best.is_none_or(|(owner, _)| node.owner < owner) {
                best = Some((node.owner, d));
            }
            for &(k, child) in &node.children {
                if k + radius >= d && k <= d + radius {
                    stack.push(child);
                }
            }
        }
        best
    }
}

/// Rejects pending records whose perceptual hash lies within `threshold` bits
/// of a record accepted earlier in id order.
pub fn near_dedup(records: &mut [PosterRecord], threshold: u32) -> Vec<LogEntry> {
    let mut log = Vec::new();
    let mut tree = BkTree::default();
    let mut kept_ids: Vec<String> = Vec::new();
    for i in pending_by_id(records) {
        let record = &mut records[i];
        let Some(hash) = record.phash else {
            reject(record, &mut log, Rejection::new(RejectReason::Io, "perceptual hash unavailable"));
            continue;
        };
        match tree.nearest_owner_within(hash, threshold) {
            Some((owner, distance)) => {
                let detail = format!("{distance} bits from {}", kept_ids[owner]);
                reject(record, &mut log, Rejection::new(RejectReason::DuplicateNear, detail));
            }
            None => {
                tree.insert(hash, kept_ids.len());
                kept_ids.push(record.id.clone());
            }
        }
    }
    log
}
