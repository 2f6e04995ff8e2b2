use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::time::SimTime;
use super::KernelError;

/// An event together with its firing time and insertion sequence number.
#[derive(Debug, Clone)]
pub struct Scheduled<E> {
    pub time: SimTime,
    pub seq: u64,
    pub event: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    // Reversed so that BinaryHeap (a max-heap) pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Time-ordered event queue with a virtual clock.
///
/// Events pop in nondecreasing time order; equal timestamps pop in insertion
/// order. Popping an event advances the clock to its timestamp.
#[derive(Debug)]
pub struct EventQueue<E> {
    heap: BinaryHeap<Scheduled<E>>,
    now: SimTime,
    next_seq: u64,
    processed: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            now: SimTime::ZERO,
            next_seq: 0,
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn schedule(&mut self, time: SimTime, event: E) -> Result<u64, KernelError> {
        if time < self.now {
            return Err(KernelError::PastEvent {
                at: time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Scheduled { time, seq, event });
        Ok(seq)
    }

    pub fn schedule_in(&mut self, delay: SimTime, event: E) -> u64 {
        let at = self.now + delay;
        // now + delay can never be in the past
        self.schedule(at, event).expect("relative schedule is never in the past")
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|s| s.time)
    }

    pub fn pop(&mut self) -> Option<Scheduled<E>> {
        let next = self.heap.pop()?;
        debug_assert!(next.time >= self.now);
        self.now = next.time;
        self.processed += 1;
        Some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_order() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_secs_f64(5.0), "five").unwrap();
        q.schedule(SimTime::from_secs_f64(3.0), "three").unwrap();
        assert_eq!(q.pop().unwrap().event, "three");
        assert_eq!(q.pop().unwrap().event, "five");
        assert!(q.pop().is_none());
    }

    #[test]
    fn equal_times_keep_insertion_order() {
        let mut q = EventQueue::new();
        let t = SimTime::from_secs_f64(2.0);
        q.schedule(t, 1).unwrap();
        q.schedule(t, 2).unwrap();
        q.schedule(t, 3).unwrap();
        let order: Vec<_> = std::iter::from_fn(|| q.pop().map(|e| e.event)).collect();
        assert_eq!(order, vec![1, 2, 3]);
    }

    #[test]
    fn past_event_is_rejected() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_secs_f64(10.0), ()).unwrap();
        q.pop();
        let err = q.schedule(SimTime::from_secs_f64(9.0), ()).unwrap_err();
        assert!(matches!(err, KernelError::PastEvent { .. }));
        // scheduling at exactly now is fine
        q.schedule(SimTime::from_secs_f64(10.0), ()).unwrap();
    }

    #[test]
    fn clock_is_monotone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut q = EventQueue::new();
        for i in 0..500u32 {
            q.schedule(SimTime(rng.gen_range(0..10_000)), i).unwrap();
        }
        let mut last = SimTime::ZERO;
        while let Some(ev) = q.pop() {
            assert!(ev.time >= last);
            last = ev.time;
            if ev.event % 7 == 0 {
                q.schedule_in(SimTime(rng.gen_range(0..100)), 1);
            }
        }
    }
}
