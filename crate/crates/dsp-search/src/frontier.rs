use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Max-score frontier with deterministic tie-breaking: equal scores pop in
/// insertion order.
#[derive(Default)]
pub(crate) struct Frontier {
    heap: BinaryHeap<Entry>,
    next_seq: u64,
}

struct Entry {
    score: f64,
    seq: u64,
    node_id: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl Frontier {
    pub fn new() -> Self {
        Frontier::default()
    }

    pub fn push(&mut self, node_id: u32, score: f64) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { score, seq, node_id });
    }

    pub fn pop(&mut self) -> Option<u32> {
        self.heap.pop().map(|e| e.node_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_score_first_ties_by_insertion() {
        let mut frontier = Frontier::new();
        frontier.push(1, -1.0);
        frontier.push(2, -0.5);
        frontier.push(3, -0.5);
        frontier.push(4, 0.0);
        assert_eq!(frontier.pop(), Some(4));
        assert_eq!(frontier.pop(), Some(2)); // inserted before 3
        assert_eq!(frontier.pop(), Some(3));
        assert_eq!(frontier.pop(), Some(1));
        assert_eq!(frontier.pop(), None);
    }
}
