//! Solve jobs: state machine, per-level previews and the worker that runs
//! them.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use decompose_core::solver::pyramid_sizes;
use decompose_core::{
    save_layerstack, solve_alphas, AlphaStack, ColorImage, Error, LayerStack, LevelReport,
    OrderedPalette, ProgressSink, SimplifyParams, SolveOptions,
};
use serde::Serialize;
use tokio::sync::Semaphore;
use uuid::Uuid;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running {
        level: usize,
        level_count: usize,
        width: usize,
        height: usize,
        iteration: usize,
        energy: Option<f64>,
    },
    Done,
    Cancelled,
    Failed {
        reason: String,
    },
}

impl JobState {
    fn rank(&self) -> u8 {
        match self {
            JobState::Queued => 0,
            JobState::Running { .. } => 1,
            _ => 2,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.rank() == 2
    }
}

/// One pyramid level's result, copied out of the solver.
#[derive(Clone, Debug)]
pub struct Preview {
    pub level: usize,
    pub level_count: usize,
    pub energy: f64,
    pub alphas: AlphaStack,
}

pub struct Job {
    pub id: Uuid,
    pub order: Vec<usize>,
    pub palette: OrderedPalette,
    pub options: SolveOptions,
    pub simplify_params: Option<SimplifyParams>,
    state: Mutex<JobState>,
    previews: Mutex<Vec<Arc<Preview>>>,
    result: OnceLock<Arc<LayerStack>>,
    cancel: AtomicBool,
}

impl Job {
    pub fn new(
        order: Vec<usize>,
        palette: OrderedPalette,
        options: SolveOptions,
        simplify_params: Option<SimplifyParams>,
    ) -> Self {
        Self {
            id: Uuid::new_v4(),
            order,
            palette,
            options,
            simplify_params,
            state: Mutex::new(JobState::Queued),
            previews: Mutex::new(Vec::new()),
            result: OnceLock::new(),
            cancel: AtomicBool::new(false),
        }
    }

    pub fn state(&self) -> JobState {
        self.state.lock().unwrap().clone()
    }

    /// Applies `next` unless it would move the job backwards; terminal
    /// states are final.
    fn transition(&self, next: JobState) -> bool {
        let mut state = self.state.lock().unwrap();
        if state.is_terminal() || next.rank() < state.rank() {
            return false;
        }
        *state = next;
        true
    }

    /// Requests cancellation. A queued job is cancelled immediately; a
    /// running one stops at its next optimizer step. Returns false when the
    /// job already finished some other way.
    pub fn cancel(&self) -> bool {
        self.cancel.store(true, Ordering::SeqCst);
        let mut state = self.state.lock().unwrap();
        match *state {
            JobState::Queued => {
                *state = JobState::Cancelled;
                true
            }
            JobState::Running { .. } | JobState::Cancelled => true,
            JobState::Done | JobState::Failed { .. } => false,
        }
    }

    pub fn preview_count(&self) -> usize {
        self.previews.lock().unwrap().len()
    }

    pub fn latest_preview(&self) -> Option<Arc<Preview>> {
        self.previews.lock().unwrap().last().cloned()
    }

    pub fn result(&self) -> Option<Arc<LayerStack>> {
        self.result.get().cloned()
    }

    fn sink(self: &Arc<Self>, width: usize, height: usize) -> JobSink {
        JobSink {
            job: Arc::clone(self),
            sizes: pyramid_sizes(width, height, self.options.pyramid_min_dim),
        }
    }
}

struct JobSink {
    job: Arc<Job>,
    sizes: Vec<(usize, usize)>,
}

impl JobSink {
    fn running(&self, level: usize, iteration: usize, energy: Option<f64>) -> JobState {
        let (width, height) = self.sizes[level.min(self.sizes.len() - 1)];
        JobState::Running {
            level,
            level_count: self.sizes.len(),
            width,
            height,
            iteration,
            energy,
        }
    }
}

impl ProgressSink for JobSink {
    fn level_done(&mut self, report: &LevelReport) {
        self.job.previews.lock().unwrap().push(Arc::new(Preview {
            level: report.level,
            level_count: report.level_count,
            energy: report.energy,
            alphas: report.alphas.clone(),
        }));
    }

    fn iteration(&mut self, level: usize, iteration: usize, energy: f64) {
        self.job.transition(self.running(level, iteration, Some(energy)));
    }

    fn is_cancelled(&self) -> bool {
        self.job.cancel.load(Ordering::SeqCst)
    }
}

/// Waits for a worker slot, then solves on the blocking pool. Finished
/// stacks are also saved under `persist_dir` when given.
pub async fn run_job(
    job: Arc<Job>,
    image: Arc<ColorImage>,
    image_hash: String,
    workers: Arc<Semaphore>,
    persist_dir: Option<PathBuf>,
) {
    let Ok(_permit) = workers.acquire_owned().await else {
        job.transition(JobState::Failed {
            reason: "worker pool closed".into(),
        });
        return;
    };
    if job.cancel.load(Ordering::SeqCst) {
        job.transition(JobState::Cancelled);
        return;
    }
    let mut sink = job.sink(image.width(), image.height());
    job.transition(sink.running(0, 0, None));

    let worker_job = Arc::clone(&job);
    let outcome = tokio::task::spawn_blocking(move || -> Result<LayerStack, Error> {
        let alphas = solve_alphas(&image, &worker_job.palette, &worker_job.options, &mut sink)?;
        let stack = LayerStack::new(
            worker_job.palette.clone(),
            alphas,
            image_hash,
            worker_job.options.clone(),
        )?
        .with_simplify_params(worker_job.simplify_params.clone());
        if let Some(dir) = persist_dir {
            save_layerstack(&stack, dir)?;
        }
        Ok(stack)
    })
    .await;

    match outcome {
        Ok(Ok(stack)) => {
            let _ = job.result.set(Arc::new(stack));
            job.transition(JobState::Done);
        }
        Ok(Err(Error::Cancelled)) => {
            job.transition(JobState::Cancelled);
        }
        Ok(Err(err)) => {
            job.transition(JobState::Failed {
                reason: err.to_string(),
            });
        }
        Err(join) => {
            job.transition(JobState::Failed {
                reason: format!("solver task failed: {join}"),
            });
        }
    }
}
