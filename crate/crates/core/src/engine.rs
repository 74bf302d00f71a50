//! Shared-memory bulk-synchronous scatter/gather executor.
//!
//! Each iteration drains the active set, runs `scatter` over the frontier,
//! delivers messages into per-vertex inboxes ordered by source rank, runs
//! `gather` over the receivers and finally hands all updates to a sequential
//! `commit`, which seeds the next frontier. Phases are separated by barriers,
//! so results never depend on the thread count.

use std::any::Any;
use std::marker::PhantomData;
use std::ops::AddAssign;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::Rank;

pub type CallbackError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Scatter,
    Gather,
    Commit,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Scatter => "scatter",
            Phase::Gather => "gather",
            Phase::Commit => "commit",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("{phase} failed in iteration {iteration}: {source}")]
    Callback {
        iteration: usize,
        phase: Phase,
        source: CallbackError,
    },
    #[error("{phase} panicked in iteration {iteration}: {message}")]
    Panic {
        iteration: usize,
        phase: Phase,
        message: String,
    },
    #[error("thread count must be at least 1")]
    ZeroThreads,
    #[error("chunk size must be at least 1")]
    ZeroChunk,
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

impl EngineError {
    pub fn iteration(&self) -> Option<usize> {
        match self {
            EngineError::Callback { iteration, .. } | EngineError::Panic { iteration, .. } => Some(*iteration),
            _ => None,
        }
    }
}

/// Frontier with O(1) membership and O(members) clearing: a bitmap paired
/// with a queue of the ranks whose bits are set.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    bits: Vec<u64>,
    queue: Vec<Rank>,
    bits_cleared: u64,
}

impl ActiveSet {
    pub fn new(n: usize) -> Self {
        ActiveSet {
            bits: vec![0; n.div_ceil(64)],
            queue: Vec::new(),
            bits_cleared: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.bits.len() * 64
    }

    /// Adds `v`, returning whether it was absent.
    #[inline]
    pub fn insert(&mut self, v: Rank) -> bool {
        let (w, b) = (v as usize / 64, v % 64);
        let mask = 1u64 << b;
        if self.bits[w] & mask != 0 {
            return false;
        }
        self.bits[w] |= mask;
        self.queue.push(v);
        true
    }

    #[inline]
    pub fn contains(&self, v: Rank) -> bool {
        self.bits[v as usize / 64] & (1u64 << (v % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Members in insertion order.
    pub fn members(&self) -> &[Rank] {
        &self.queue
    }

    /// Removes every member, returning them in insertion order.
    pub fn drain(&mut self) -> Vec<Rank> {
        for &v in &self.queue {
            self.bits[v as usize / 64] &= !(1u64 << (v % 64));
        }
        self.bits_cleared += self.queue.len() as u64;
        std::mem::take(&mut self.queue)
    }

    pub fn drain_sorted(&mut self) -> Vec<Rank> {
        let mut out = self.drain();
        out.sort_unstable();
        out
    }

    pub fn clear(&mut self) {
        self.drain();
    }

    /// Total bits reset by `drain`/`clear` over this set's lifetime.
    pub fn bits_cleared(&self) -> u64 {
        self.bits_cleared
    }

    /// True when no bit is set. Walks the whole bitmap; for tests.
    pub fn bitmap_is_clear(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BspSchedule {
    threads: usize,
    chunk_size: usize,
}

impl Default for BspSchedule {
    fn default() -> Self {
        BspSchedule {
            threads: 1,
            chunk_size: 64,
        }
    }
}

impl BspSchedule {
    pub fn new(threads: usize) -> Result<Self, EngineError> {
        if threads == 0 {
            return Err(EngineError::ZeroThreads);
        }
        Ok(BspSchedule {
            threads,
            ..Self::default()
        })
    }

    pub fn with_chunk_size(mut self, chunk_size: usize) -> Result<Self, EngineError> {
        if chunk_size == 0 {
            return Err(EngineError::ZeroChunk);
        }
        self.chunk_size = chunk_size;
        Ok(self)
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Envelope<M> {
    pub src: Rank,
    pub msg: M,
}

/// Messages emitted by one scatter call.
pub struct Outbox<M> {
    src: Rank,
    items: Vec<(Rank, Envelope<M>)>,
}

impl<M> Outbox<M> {
    #[inline]
    pub fn send(&mut self, dst: Rank, msg: M) {
        self.items.push((dst, Envelope { src: self.src, msg }));
    }
}

/// A computation run by [`Engine`].
///
/// `scatter` may read only its own vertex's state and shared immutable data;
/// `gather` computes an update for its own vertex from the inbox; `commit`
/// applies all updates of the iteration sequentially and fills the next
/// frontier.
pub trait VertexProgram {
    type Message: Copy + Send + Sync;
    type Update: Send;
    type Tally: Default + Send + AddAssign;

    fn scatter(&self, src: Rank, out: &mut Outbox<Self::Message>, tally: &mut Self::Tally) -> Result<(), CallbackError>;

    fn gather(
        &self,
        dst: Rank,
        inbox: &[Envelope<Self::Message>],
        tally: &mut Self::Tally,
    ) -> Result<Option<Self::Update>, CallbackError>;

    /// `retired` is the frontier that scattered this iteration (sorted);
    /// `updates` are sorted by vertex.
    fn commit(
        &mut self,
        iteration: usize,
        retired: &[Rank],
        updates: Vec<(Rank, Self::Update)>,
        tally: Self::Tally,
        next: &mut ActiveSet,
    ) -> Result<(), CallbackError>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub iterations: usize,
    pub messages: u64,
    pub scatter: Duration,
    pub deliver: Duration,
    pub gather: Duration,
    pub commit: Duration,
}

impl AddAssign for RunStats {
    fn add_assign(&mut self, o: Self) {
        self.iterations += o.iterations;
        self.messages += o.messages;
        self.scatter += o.scatter;
        self.deliver += o.deliver;
        self.gather += o.gather;
        self.commit += o.commit;
    }
}

/// Messages tagged with their destination, in scatter order.
type Routed<M> = Vec<(Rank, Envelope<M>)>;

/// Executor state reusable across runs over the same vertex range.
pub struct Engine<M> {
    schedule: BspSchedule,
    pool: Option<rayon::ThreadPool>,
    inbox: Vec<Vec<Envelope<M>>>,
    receivers: ActiveSet,
}

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

type ChunkOut<T, Tally> = Result<(Vec<T>, Tally), CallbackError>;

impl<M: Copy + Send + Sync> Engine<M> {
    pub fn new(n: usize, schedule: BspSchedule) -> Result<Self, EngineError> {
        let pool = if schedule.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(schedule.threads)
                    .build()
                    .map_err(|e| EngineError::Pool(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Engine {
            schedule,
            pool,
            inbox: (0..n).map(|_| Vec::new()).collect(),
            receivers: ActiveSet::new(n),
        })
    }

    pub fn schedule(&self) -> BspSchedule {
        self.schedule
    }

    /// Runs `program` from `active` until no vertex is active.
    pub fn run<P>(&mut self, program: &mut P, active: &mut ActiveSet) -> Result<RunStats, EngineError>
    where
        P: VertexProgram<Message = M> + Sync,
    {
        let mut stats = RunStats::default();
        while !active.is_empty() {
            stats.iterations += 1;
            let iteration = stats.iterations;
            let frontier = active.drain_sorted();

            let t = Instant::now();
            let (sent, scatter_tally) = self.guard(iteration, Phase::Scatter, |eng| eng.scatter(&*program, &frontier))?;
            stats.scatter += t.elapsed();

            let t = Instant::now();
            stats.messages += sent.len() as u64;
            for (dst, env) in sent {
                self.inbox[dst as usize].push(env);
                self.receivers.insert(dst);
            }
            let receivers = self.receivers.drain_sorted();
            stats.deliver += t.elapsed();

            let t = Instant::now();
            let gathered = self.guard(iteration, Phase::Gather, |eng| eng.gather(&*program, &receivers));
            for &v in &receivers {
                self.inbox[v as usize].clear();
            }
            let (updates, gather_tally) = gathered?;
            stats.gather += t.elapsed();

            let t = Instant::now();
            let mut tally = scatter_tally;
            tally += gather_tally;
            let committed = catch_unwind(AssertUnwindSafe(|| {
                program.commit(iteration, &frontier, updates, tally, active)
            }));
            match committed {
                Ok(Ok(())) => {}
                Ok(Err(source)) => {
                    return Err(EngineError::Callback {
                        iteration,
                        phase: Phase::Commit,
                        source,
                    })
                }
                Err(p) => {
                    return Err(EngineError::Panic {
                        iteration,
                        phase: Phase::Commit,
                        message: panic_message(p),
                    })
                }
            }
            stats.commit += t.elapsed();
        }
        Ok(stats)
    }

    fn guard<T>(
        &mut self,
        iteration: usize,
        phase: Phase,
        f: impl FnOnce(&mut Self) -> Result<T, CallbackError>,
    ) -> Result<T, EngineError> {
        match catch_unwind(AssertUnwindSafe(|| f(self))) {
            Ok(Ok(v)) => Ok(v),
            Ok(Err(source)) => Err(EngineError::Callback {
                iteration,
                phase,
                source,
            }),
            Err(p) => Err(EngineError::Panic {
                iteration,
                phase,
                message: panic_message(p),
            }),
        }
    }

    fn scatter<P>(&self, program: &P, frontier: &[Rank]) -> Result<(Routed<M>, P::Tally), CallbackError>
    where
        P: VertexProgram<Message = M> + Sync,
    {
        let run_chunk = |chunk: &[Rank]| -> ChunkOut<(Rank, Envelope<M>), P::Tally> {
            let mut tally = P::Tally::default();
            let mut out = Outbox { src: 0, items: Vec::new() };
            for &v in chunk {
                out.src = v;
                program.scatter(v, &mut out, &mut tally)?;
            }
            Ok((out.items, tally))
        };
        let parts = self.map_chunks(frontier, run_chunk);
        let mut all = Vec::new();
        let mut tally = P::Tally::default();
        for part in parts {
            let (items, t) = part?;
            all.extend(items);
            tally += t;
        }
        Ok((all, tally))
    }

    #[allow(clippy::type_complexity)]
    fn gather<P>(&self, program: &P, receivers: &[Rank]) -> Result<(Vec<(Rank, P::Update)>, P::Tally), CallbackError>
    where
        P: VertexProgram<Message = M> + Sync,
    {
        let inbox = &self.inbox;
        let run_chunk = |chunk: &[Rank]| -> ChunkOut<(Rank, P::Update), P::Tally> {
            let mut tally = P::Tally::default();
            let mut out = Vec::new();
            for &v in chunk {
                if let Some(u) = program.gather(v, &inbox[v as usize], &mut tally)? {
                    out.push((v, u));
                }
            }
            Ok((out, tally))
        };
        let parts = self.map_chunks(receivers, run_chunk);
        let mut all = Vec::new();
        let mut tally = P::Tally::default();
        for part in parts {
            let (items, t) = part?;
            all.extend(items);
            tally += t;
        }
        Ok((all, tally))
    }

    /// Applies `f` to consecutive chunks, returning results in chunk order.
    fn map_chunks<R, F>(&self, items: &[Rank], f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(&[Rank]) -> R + Sync,
    {
        let chunk = self.schedule.chunk_size;
        match &self.pool {
            Some(pool) if items.len() > chunk => pool.install(|| items.par_chunks(chunk).map(&f).collect()),
            _ => items.chunks(chunk).map(&f).collect(),
        }
    }
}

struct FnProgram<M, U, S, G, C> {
    scatter: S,
    gather: G,
    commit: C,
    _types: PhantomData<fn(M) -> U>,
}

/// Tally for programs that count nothing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NoTally;

impl AddAssign for NoTally {
    fn add_assign(&mut self, _: NoTally) {}
}

impl<M, U, S, G, C> VertexProgram for FnProgram<M, U, S, G, C>
where
    M: Copy + Send + Sync,
    U: Send,
    S: Fn(Rank, &mut Outbox<M>) -> Result<(), CallbackError>,
    G: Fn(Rank, &[Envelope<M>]) -> Result<Option<U>, CallbackError>,
    C: FnMut(Vec<(Rank, U)>, &mut ActiveSet) -> Result<(), CallbackError>,
{
    type Message = M;
    type Update = U;
    type Tally = NoTally;

    fn scatter(&self, src: Rank, out: &mut Outbox<M>, _: &mut NoTally) -> Result<(), CallbackError> {
        (self.scatter)(src, out)
    }

    fn gather(&self, dst: Rank, inbox: &[Envelope<M>], _: &mut NoTally) -> Result<Option<U>, CallbackError> {
        (self.gather)(dst, inbox)
    }

    fn commit(
        &mut self,
        _: usize,
        _: &[Rank],
        updates: Vec<(Rank, U)>,
        _: NoTally,
        next: &mut ActiveSet,
    ) -> Result<(), CallbackError> {
        (self.commit)(updates, next)
    }
}

/// Closure form of [`Engine::run`] over `n` vertices. Returns the number of
/// iterations executed.
pub fn run_bsp<M, U, S, G, C>(
    n: usize,
    active: &mut ActiveSet,
    scatter: S,
    gather: G,
    commit: C,
    schedule: BspSchedule,
) -> Result<usize, EngineError>
where
    M: Copy + Send + Sync,
    U: Send,
    S: Fn(Rank, &mut Outbox<M>) -> Result<(), CallbackError> + Sync,
    G: Fn(Rank, &[Envelope<M>]) -> Result<Option<U>, CallbackError> + Sync,
    C: FnMut(Vec<(Rank, U)>, &mut ActiveSet) -> Result<(), CallbackError> + Sync,
{
    let mut engine = Engine::new(n, schedule)?;
    let mut program = FnProgram {
        scatter,
        gather,
        commit,
        _types: PhantomData,
    };
    Ok(engine.run(&mut program, active)?.iterations)
}
