//! State space of the controlled queue pool.
//!
//! The system is `n` queues, each described by an integer level in `[-1, B]`:
//! `-1` means the queue is not deployed, `0` means deployed but empty, and
//! `1..=B` counts held tasks up to the buffer size `B`. States map to dense
//! indices by mixed-radix encoding with queue 0 as the most significant
//! digit, so tables exported in index order fall into q0-major blocks.
//!
//! `B >= 2` is required throughout: with `B = 1` a single-task queue would
//! be simultaneously at its keep-or-destroy boundary and at capacity, and
//! the occupancy classes below would no longer partition the levels.

use crate::error::{Error, Result};

/// Level value marking a queue as not deployed.
pub const INACTIVE_LEVEL: i32 = -1;

/// Occupancy classes distinguished by the transition structure.
///
/// For a fixed buffer size `B >= 2` the five classes partition `[-1, B]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueueClass {
    /// Level -1: not deployed; no service, no keep-alive charge.
    Inactive,
    /// Level 0: deployed and empty; charged keep-alive but cannot serve.
    Empty,
    /// Level 1: the next departure empties the queue and opens the
    /// keep-or-destroy decision.
    One,
    /// Levels 2..B-1: a departure cannot empty the queue in one step.
    Normal,
    /// Level B: at capacity; no further admissions.
    Full,
}

/// Classify one queue level against buffer size `buffer`.
pub fn classify(level: i32, buffer: i32) -> Result<QueueClass> {
    if buffer < 2 {
        return Err(Error::BufferTooSmall(buffer));
    }
    if !(INACTIVE_LEVEL..=buffer).contains(&level) {
        return Err(Error::LevelOutOfRange { level, buffer });
    }
    Ok(match level {
        INACTIVE_LEVEL => QueueClass::Inactive,
        0 => QueueClass::Empty,
        1 => QueueClass::One,
        b if b == buffer => QueueClass::Full,
        _ => QueueClass::Normal,
    })
}

/// A joint state: one level per queue.
///
/// Levels are validated against the buffer size at construction; the
/// invariant `level in [-1, B]` holds for every queue afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState {
    levels: Vec<i32>,
}

impl SystemState {
    pub fn new(levels: Vec<i32>, buffer: i32) -> Result<Self> {
        if buffer < 2 {
            return Err(Error::BufferTooSmall(buffer));
        }
        for &level in &levels {
            if !(INACTIVE_LEVEL..=buffer).contains(&level) {
                return Err(Error::LevelOutOfRange { level, buffer });
            }
        }
        Ok(Self { levels })
    }

    /// All queues not deployed.
    pub fn all_inactive(n: usize) -> Self {
        Self { levels: vec![INACTIVE_LEVEL; n] }
    }

    pub fn levels(&self) -> &[i32] {
        &self.levels
    }

    pub fn level(&self, queue: usize) -> i32 {
        self.levels[queue]
    }

    pub fn queue_count(&self) -> usize {
        self.levels.len()
    }

    /// Number of deployed queues (level >= 0).
    pub fn active_count(&self) -> usize {
        self.levels.iter().filter(|&&l| l >= 0).count()
    }

    /// Total tasks held across queues; inactive queues contribute zero.
    pub fn task_total(&self) -> i64 {
        self.levels.iter().filter(|&&l| l > 0).map(|&l| l as i64).sum()
    }
}

/// Dense enumeration of all `(B+2)^n` joint states.
///
/// The index of a state is `sum_i (level_i + 1) * (B+2)^(n-1-i)`: queue 0
/// is the most significant digit and the all-inactive state is index 0.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n: usize,
    buffer: i32,
    cardinality: usize,
    /// weights[i] = (B+2)^(n-1-i), the place value of queue i's digit.
    weights: Vec<usize>,
}

impl StateSpace {
    pub fn new(n: usize, buffer: i32) -> Result<Self> {
        if buffer < 2 {
            return Err(Error::BufferTooSmall(buffer));
        }
        if n == 0 {
            return Err(Error::InvalidParams("queue count n must be at least 1".into()));
        }
        let radix = buffer as usize + 2;
        let mut weights = vec![0usize; n];
        let mut w: usize = 1;
        for i in (0..n).rev() {
            weights[i] = w;
            if i > 0 {
                w = w
                    .checked_mul(radix)
                    .ok_or(Error::StateSpaceOverflow { n, buffer })?;
            }
        }
        let cardinality = w
            .checked_mul(radix)
            .ok_or(Error::StateSpaceOverflow { n, buffer })?;
        Ok(Self { n, buffer, cardinality, weights })
    }

    pub fn queue_count(&self) -> usize {
        self.n
    }

    pub fn buffer(&self) -> i32 {
        self.buffer
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    /// Place value of queue `i`'s digit in the mixed-radix index.
    pub fn weight(&self, queue: usize) -> usize {
        self.weights[queue]
    }

    pub fn encode(&self, state: &SystemState) -> Result<usize> {
        self.encode_levels(state.levels())
    }

    pub fn encode_levels(&self, levels: &[i32]) -> Result<usize> {
        if levels.len() != self.n {
            return Err(Error::QueueCountMismatch { expected: self.n, got: levels.len() });
        }
        let mut index = 0usize;
        for (i, &level) in levels.iter().enumerate() {
            if !(INACTIVE_LEVEL..=self.buffer).contains(&level) {
                return Err(Error::LevelOutOfRange { level, buffer: self.buffer });
            }
            index += (level + 1) as usize * self.weights[i];
        }
        Ok(index)
    }

    pub fn decode(&self, index: usize) -> Result<SystemState> {
        let mut levels = vec![0i32; self.n];
        self.decode_into(index, &mut levels)?;
        Ok(SystemState { levels })
    }

    /// Decode without allocating; `levels` must have length `n`.
    pub fn decode_into(&self, index: usize, levels: &mut [i32]) -> Result<()> {
        if index >= self.cardinality {
            return Err(Error::IndexOutOfRange { index, cardinality: self.cardinality });
        }
        if levels.len() != self.n {
            return Err(Error::QueueCountMismatch { expected: self.n, got: levels.len() });
        }
        let mut rest = index;
        for i in 0..self.n {
            let digit = rest / self.weights[i];
            rest %= self.weights[i];
            levels[i] = digit as i32 - 1;
        }
        Ok(())
    }

    /// Index of the all-inactive state (always 0).
    pub fn all_inactive_index(&self) -> usize {
        0
    }

    /// Iterate all states in index order.
    pub fn states(&self) -> impl Iterator<Item = (usize, SystemState)> + '_ {
        (0..self.cardinality).map(move |idx| (idx, self.decode(idx).expect("index in range")))
    }
}
