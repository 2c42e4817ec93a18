use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SimTime;
use crate::Error;

/// Identifies a scheduled event by its insertion sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventHandle(pub u64);

/// An event popped from the queue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledEvent<A> {
    pub fire_time: SimTime,
    pub sequence: u64,
    pub action: A,
}

struct Entry<A>(ScheduledEvent<A>);

impl<A> PartialEq for Entry<A> {
    fn eq(&self, other: &Self) -> bool {
        self.0.sequence == other.0.sequence
    }
}

impl<A> Eq for Entry<A> {}

impl<A> PartialOrd for Entry<A> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<A> Ord for Entry<A> {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse so the earliest (time, seq) pops first.
        (other.0.fire_time, other.0.sequence).cmp(&(self.0.fire_time, self.0.sequence))
    }
}

/// Min-priority queue over `(fire_time, sequence)`.
pub struct EventQueue<A> {
    heap: BinaryHeap<Entry<A>>,
    next_sequence: u64,
}

impl<A> Default for EventQueue<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> EventQueue<A> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            next_sequence: 0,
        }
    }

    pub fn push(&mut self, at: SimTime, action: A) -> EventHandle {
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.heap.push(Entry(ScheduledEvent {
            fire_time: at,
            sequence,
            action,
        }));
        EventHandle(sequence)
    }

    pub fn pop(&mut self) -> Option<ScheduledEvent<A>> {
        self.heap.pop().map(|e| e.0)
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.0.fire_time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// A simulation clock plus its pending events.
///
/// The engine does not own model state. [`Engine::run_until`] hands every
/// fired action to a caller-supplied dispatcher together with `&mut self`,
/// so handlers can schedule follow-up events.
pub struct Engine<A> {
    now: SimTime,
    queue: EventQueue<A>,
}

impl<A> Default for Engine<A> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A> Engine<A> {
    pub fn new() -> Self {
        Engine {
            now: SimTime::ZERO,
            queue: EventQueue::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Schedules `action` at absolute time `at`. Scheduling in the past is a
    /// causality violation.
    pub fn schedule(&mut self, at: SimTime, action: A) -> Result<EventHandle, Error> {
        if at < self.now {
            return Err(Error::Causality { at, now: self.now });
        }
        Ok(self.queue.push(at, action))
    }

    /// Schedules `action` `delay` ticks from now.
    pub fn schedule_in(&mut self, delay: SimTime, action: A) -> EventHandle {
        self.queue.push(self.now + delay, action)
    }

    /// Dispatches every event with `fire_time <= end` in order, then sets the
    /// clock to `end`. Events beyond `end` stay queued.
    pub fn run_until<F>(&mut self, end: SimTime, mut dispatch: F) -> Result<u64, Error>
    where
        F: FnMut(&mut Engine<A>, A) -> Result<(), Error>,
    {
        if end < self.now {
            return Err(Error::Causality { at: end, now: self.now });
        }
        let mut fired = 0;
        while let Some(t) = self.queue.peek_time() {
            if t > end {
                break;
            }
            let event = self.queue.pop().expect("peeked");
            self.now = event.fire_time;
            dispatch(self, event.action)?;
            fired += 1;
        }
        self.now = end;
        Ok(fired)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(engine: &mut Engine<&'static str>, end: u64) -> Vec<&'static str> {
        let mut seen = Vec::new();
        engine
            .run_until(SimTime(end), |_, a| {
                seen.push(a);
                Ok(())
            })
            .unwrap();
        seen
    }

    #[test]
    fn fifo_tie_break() {
        let mut e = Engine::new();
        e.schedule(SimTime(5), "t5").unwrap();
        e.schedule(SimTime(3), "t3a").unwrap();
        e.schedule(SimTime(3), "t3b").unwrap();
        assert_eq!(drain(&mut e, 10), vec!["t3a", "t3b", "t5"]);
    }

    #[test]
    fn zero_time_event_fires() {
        let mut e = Engine::new();
        e.schedule(SimTime(0), "now").unwrap();
        let n = e.run_until(SimTime(0), |_, _| Ok(())).unwrap();
        assert_eq!(n, 1);
        assert_eq!(e.now(), SimTime(0));
    }

    #[test]
    fn past_schedule_is_causality_error() {
        let mut e: Engine<()> = Engine::new();
        e.run_until(SimTime(2), |_, _| Ok(())).unwrap();
        assert!(matches!(e.schedule(SimTime(1), ()), Err(Error::Causality { .. })));
    }

    #[test]
    fn empty_run_advances_clock() {
        let mut e: Engine<()> = Engine::new();
        let end = SimTime::from_secs(86_400);
        assert_eq!(e.run_until(end, |_, _| Ok(())).unwrap(), 0);
        assert_eq!(e.now(), end);
    }

    #[test]
    fn inclusive_horizon() {
        let mut e = Engine::new();
        for t in [1, 2, 2] {
            e.schedule(SimTime(t), "x").unwrap();
        }
        assert_eq!(drain(&mut e, 2).len(), 3);
    }

    #[test]
    fn beyond_horizon_is_retained() {
        let mut e = Engine::new();
        e.schedule(SimTime(10), "late").unwrap();
        assert!(drain(&mut e, 5).is_empty());
        assert_eq!(e.pending(), 1);
        assert_eq!(drain(&mut e, 10), vec!["late"]);
    }

    #[test]
    fn handlers_can_schedule_same_tick() {
        let mut e = Engine::new();
        e.schedule(SimTime(4), 0u32).unwrap();
        let mut order = Vec::new();
        e.run_until(SimTime(4), |eng, a| {
            order.push((eng.now().ticks(), a));
            if a < 3 {
                eng.schedule_in(SimTime::ZERO, a + 1);
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(order, vec![(4, 0), (4, 1), (4, 2), (4, 3)]);
    }
}
