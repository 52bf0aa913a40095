use std::collections::{BTreeMap, VecDeque};

use super::PartyId;

/// FIFO byte queues per ordered (from, to) pair with per-pair sequence numbers.
#[derive(Debug, Default)]
pub struct Channels {
    queues: BTreeMap<(PartyId, PartyId), VecDeque<Vec<u8>>>,
    seq: BTreeMap<(PartyId, PartyId), u64>,
}

impl Channels {
    pub fn next_seq(&mut self, from: PartyId, to: PartyId) -> u64 {
        let s = self.seq.entry((from, to)).or_insert(0);
        *s += 1;
        *s
    }

    pub fn push(&mut self, from: PartyId, to: PartyId, bytes: Vec<u8>) {
        self.queues.entry((from, to)).or_default().push_back(bytes);
    }

    pub fn pop(&mut self, from: PartyId, to: PartyId) -> Option<Vec<u8>> {
        self.queues.get_mut(&(from, to)).and_then(|q| q.pop_front())
    }

    pub fn pending(&self) -> usize {
        self.queues.values().map(VecDeque::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_pair_ordering() {
        let mut c = Channels::default();
        let a = PartyId::DEMANDER;
        let (o1, o2) = (PartyId::owner(1), PartyId::owner(2));
        assert_eq!(c.next_seq(a, o1), 1);
        assert_eq!(c.next_seq(a, o2), 1);
        assert_eq!(c.next_seq(a, o1), 2);
        c.push(a, o1, b"x".to_vec());
        c.push(a, o2, b"y".to_vec());
        c.push(a, o1, b"z".to_vec());
        assert_eq!(c.pop(a, o1).unwrap(), b"x");
        assert_eq!(c.pop(a, o1).unwrap(), b"z");
        assert_eq!(c.pop(a, o2).unwrap(), b"y");
        assert!(c.pop(o1, a).is_none());
        assert_eq!(c.pending(), 0);
    }
}
