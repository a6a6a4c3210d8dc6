//! In-memory job table and the workers that drive optimization runs.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, watch};

use crate::annealer::{AnnealOutcome, AnnealProgress, CancelToken, LuminanceProfile, Optimizer, OptimizerConfig};
use crate::colormap::Colormap;
use crate::cost::CostBreakdown;
use crate::io::{ColormapDocument, ConfigSnapshot};
use crate::preference::PreferenceShelf;

/// History depth kept in memory.
pub const DEFAULT_JOB_CAPACITY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Cancelled,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Cancelled | JobState::Failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Generate,
    Refine,
}

/// What a worker needs to execute a job.
#[derive(Debug, Clone)]
pub struct JobSpec {
    pub kind: JobKind,
    pub profile: LuminanceProfile,
    pub config: OptimizerConfig,
    pub shelf: PreferenceShelf,
    pub initial: Option<Colormap>,
}

/// One rung's report as sent to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressEvent {
    pub rung: usize,
    pub rungs: usize,
    pub temperature: f64,
    pub iterations: u64,
    pub current: CostBreakdown,
    pub best_cost: CostBreakdown,
    pub best: Colormap,
    pub hex: Vec<String>,
}

impl From<&AnnealProgress> for ProgressEvent {
    fn from(p: &AnnealProgress) -> Self {
        ProgressEvent {
            rung: p.rung,
            rungs: p.rungs,
            temperature: p.temperature,
            iterations: p.iterations,
            current: p.current,
            best_cost: p.best_cost,
            hex: p.best.hex_stops(),
            best: p.best.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndEvent {
    pub state: JobState,
    pub result: Option<ColormapDocument>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobEvent {
    Progress(ProgressEvent),
    End(EndEvent),
}

/// Client-facing job snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    pub kind: JobKind,
    pub state: JobState,
    pub seed: u64,
    pub request: serde_json::Value,
    pub progress: Option<ProgressEvent>,
    pub result: Option<ColormapDocument>,
    pub error: Option<String>,
    pub created_ms: u64,
    pub updated_ms: u64,
}

struct Job {
    view: JobView,
    spec: Option<JobSpec>,
    cancel: CancelToken,
    history: Vec<JobEvent>,
    events: broadcast::Sender<JobEvent>,
    state_tx: watch::Sender<JobState>,
    touched: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

struct Table {
    jobs: HashMap<String, Job>,
    clock: u64,
    capacity: usize,
}

impl Table {
    fn touch(&mut self, id: &str) {
        self.clock += 1;
        let c = self.clock;
        if let Some(j) = self.jobs.get_mut(id) {
            j.touched = c;
        }
    }

    // Evicts least recently used finished jobs; live jobs are never dropped.
    fn evict(&mut self) {
        while self.jobs.len() > self.capacity {
            let victim = self
                .jobs
                .iter()
                .filter(|(_, j)| j.view.state.is_terminal())
                .min_by_key(|(_, j)| j.touched)
                .map(|(id, _)| id.clone());
            match victim {
                Some(id) => {
                    self.jobs.remove(&id);
                }
                None => break,
            }
        }
    }
}

/// Shared job registry plus the execution policy.
#[derive(Clone)]
pub struct JobManager {
    inner: Arc<Inner>,
}

struct Inner {
    table: Mutex<Table>,
    next_id: AtomicU64,
    parallel: bool,
    queue: Mutex<Option<std::sync::mpsc::Sender<String>>>,
}

impl JobManager {
    /// `parallel` runs every job on its own thread; otherwise one worker
    /// thread executes jobs in submission order.
    pub fn new(capacity: usize, parallel: bool) -> Self {
        JobManager {
            inner: Arc::new(Inner {
                table: Mutex::new(Table {
                    jobs: HashMap::new(),
                    clock: 0,
                    capacity: capacity.max(1),
                }),
                next_id: AtomicU64::new(1),
                parallel,
                queue: Mutex::new(None),
            }),
        }
    }

    pub fn submit(&self, spec: JobSpec, request: serde_json::Value) -> JobView {
        let n = self.inner.next_id.fetch_add(1, Ordering::Relaxed);
        let id = format!("job-{n:06}-{:08x}", spec.config.seed as u32);
        let t = now_ms();
        let view = JobView {
            id: id.clone(),
            kind: spec.kind,
            state: JobState::Queued,
            seed: spec.config.seed,
            request,
            progress: None,
            result: None,
            error: None,
            created_ms: t,
            updated_ms: t,
        };
        let (events, _) = broadcast::channel(512);
        let (state_tx, _) = watch::channel(JobState::Queued);
        {
            let mut table = self.inner.table.lock();
            table.jobs.insert(
                id.clone(),
                Job {
                    view: view.clone(),
                    spec: Some(spec),
                    cancel: CancelToken::new(),
                    history: Vec::new(),
                    events,
                    state_tx,
                    touched: 0,
                },
            );
            table.touch(&id);
            table.evict();
        }
        self.dispatch(id);
        view
    }

    fn dispatch(&self, id: String) {
        if self.inner.parallel {
            let me = self.clone();
            std::thread::spawn(move || me.run(&id));
            return;
        }
        let mut queue = self.inner.queue.lock();
        let tx = queue.get_or_insert_with(|| {
            let (tx, rx) = std::sync::mpsc::channel::<String>();
            let me = self.clone();
            std::thread::Builder::new()
                .name("colorforge-worker".into())
                .spawn(move || {
                    for id in rx {
                        me.run(&id);
                    }
                })
                .expect("spawn worker thread");
            tx
        });
        tx.send(id).expect("worker thread lives as long as the manager");
    }

    fn run(&self, id: &str) {
        let (spec, cancel) = {
            let mut table = self.inner.table.lock();
            let Some(job) = table.jobs.get_mut(id) else {
                return;
            };
            if job.view.state != JobState::Queued {
                return;
            }
            let Some(spec) = job.spec.take() else {
                return;
            };
            job.view.state = JobState::Running;
            job.view.updated_ms = now_ms();
            job.state_tx.send_replace(JobState::Running);
            (spec, job.cancel.clone())
        };

        let mut optimizer = Optimizer::new(spec.profile, &spec.config, &spec.shelf).cancel_token(cancel);
        if let Some(map) = spec.initial.clone() {
            optimizer = optimizer.warm_start(map);
        }
        let outcome = optimizer.run(|p| self.record_progress(id, p));
        self.finish(id, &spec, outcome);
    }

    fn record_progress(&self, id: &str, p: &AnnealProgress) {
        let event = ProgressEvent::from(p);
        let mut table = self.inner.table.lock();
        if let Some(job) = table.jobs.get_mut(id) {
            job.view.progress = Some(event.clone());
            job.view.updated_ms = now_ms();
            job.history.push(JobEvent::Progress(event.clone()));
            let _ = job.events.send(JobEvent::Progress(event));
        }
    }

    fn finish(&self, id: &str, spec: &JobSpec, outcome: crate::Result<AnnealOutcome>) {
        let end = match outcome {
            Ok(o) => EndEvent {
                state: if o.cancelled { JobState::Cancelled } else { JobState::Done },
                result: Some(ColormapDocument {
                    colormap: o.colormap,
                    shelf: spec.shelf.clone(),
                    config: Some(ConfigSnapshot::from(&spec.config)),
                    cost: Some(o.cost),
                }),
                error: None,
            },
            Err(e) => EndEvent {
                state: JobState::Failed,
                result: None,
                error: Some(e.to_string()),
            },
        };
        let mut table = self.inner.table.lock();
        if let Some(job) = table.jobs.get_mut(id) {
            Self::terminate(job, end);
        }
        table.evict();
    }

    fn terminate(job: &mut Job, end: EndEvent) {
        job.view.state = end.state;
        job.view.result = end.result.clone();
        job.view.error = end.error.clone();
        job.view.updated_ms = now_ms();
        job.history.push(JobEvent::End(end.clone()));
        let _ = job.events.send(JobEvent::End(end));
        job.state_tx.send_replace(job.view.state);
    }

    pub fn get(&self, id: &str) -> Option<JobView> {
        let mut table = self.inner.table.lock();
        table.touch(id);
        table.jobs.get(id).map(|j| j.view.clone())
    }

    /// Most recently created first.
    pub fn list(&self) -> Vec<JobView> {
        let table = self.inner.table.lock();
        let mut v: Vec<JobView> = table.jobs.values().map(|j| j.view.clone()).collect();
        v.sort_by(|a, b| b.id.cmp(&a.id));
        v
    }

    /// Requests cancellation. A queued job ends at once with no result; a
    /// running job stops at its next iteration and keeps its best map.
    /// Returns a receiver that reports the job state, or `None` if unknown.
    pub fn cancel(&self, id: &str) -> Option<watch::Receiver<JobState>> {
        let mut table = self.inner.table.lock();
        table.touch(id);
        let job = table.jobs.get_mut(id)?;
        match job.view.state {
            JobState::Queued => {
                job.spec = None;
                Self::terminate(
                    job,
                    EndEvent {
                        state: JobState::Cancelled,
                        result: None,
                        error: None,
                    },
                );
            }
            JobState::Running => job.cancel.cancel(),
            _ => {}
        }
        Some(job.state_tx.subscribe())
    }

    /// Past events of the job followed by a live feed. The history and the
    /// subscription are taken under one lock so nothing falls in between.
    pub fn subscribe(&self, id: &str) -> Option<(Vec<JobEvent>, broadcast::Receiver<JobEvent>)> {
        let mut table = self.inner.table.lock();
        table.touch(id);
        let job = table.jobs.get(id)?;
        Some((job.history.clone(), job.events.subscribe()))
    }

    pub fn len(&self) -> usize {
        self.inner.table.lock().jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
