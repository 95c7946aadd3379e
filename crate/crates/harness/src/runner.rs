//! Querying a model over a benchmark with bounded concurrency.

use std::collections::HashMap;

use chrono::Utc;
use futures::stream::{self, StreamExt};

use crate::benchmark::Datapoint;
use crate::client::{query_with_retry, ClientError, ModelClient, ModelRequest};
use crate::config::RetryPolicy;
use crate::prompt::build_prompt;
use crate::record::RunRecord;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub shots: usize,
    /// Seed for drawing few-shot examples.
    pub prompt_seed: u64,
    pub concurrency: usize,
    pub retry: RetryPolicy,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            shots: 0,
            prompt_seed: 0,
            concurrency: 4,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("building prompt for {id}: {source}")]
    Prompt {
        id: String,
        source: slbench_core::Error,
    },
}

async fn run_one(
    p: &Datapoint,
    client: &dyn ModelClient,
    opts: &RunOptions,
) -> Result<RunRecord, RunError> {
    let prompt =
        build_prompt(p, opts.shots, opts.prompt_seed).map_err(|source| RunError::Prompt {
            id: p.id.clone(),
            source,
        })?;
    let req = ModelRequest {
        id: p.id.clone(),
        prompt: prompt.clone(),
    };
    let started = Utc::now();
    let outcome = query_with_retry(client, &req, &opts.retry).await;
    let finished = Utc::now();
    let mut record = match outcome {
        Ok((completion, attempts)) => {
            let mut r = RunRecord::scored(p, client.name(), &prompt, Some(completion.text));
            r.attempts = attempts;
            r.usage = completion.usage;
            r
        }
        Err(ClientError::Exhausted { attempts, last }) => {
            let mut r = RunRecord::scored(p, client.name(), &prompt, None);
            r.attempts = attempts;
            r.transport_error = Some(last);
            r
        }
        Err(ClientError::Fatal(msg)) => {
            let mut r = RunRecord::scored(p, client.name(), &prompt, None);
            r.attempts = 1;
            r.transport_error = Some(msg);
            r
        }
        Err(e) => return Err(e.into()),
    };
    record.started_at = Some(started);
    record.finished_at = Some(finished);
    Ok(record)
}

/// Queries `client` for every datapoint, at most `opts.concurrency` at a
/// time. Records come back in the order of `points`. Unreachable datapoints
/// are recorded with a transport error; an authentication failure aborts.
pub async fn run_benchmark(
    points: &[Datapoint],
    client: &dyn ModelClient,
    opts: &RunOptions,
) -> Result<Vec<RunRecord>, RunError> {
    let results: Vec<(usize, Result<RunRecord, RunError>)> =
        stream::iter(points.iter().enumerate())
            .map(|(i, p)| async move { (i, run_one(p, client, opts).await) })
            .buffer_unordered(opts.concurrency.max(1))
            .collect()
            .await;
    let mut slots: Vec<Option<RunRecord>> = vec![None; points.len()];
    for (i, r) in results {
        slots[i] = Some(r?);
    }
    Ok(slots.into_iter().flatten().collect())
}

/// Re-scores `records` against their datapoints. Records whose id is not in
/// `points` are returned as errors.
pub fn rescore(points: &[Datapoint], records: &mut [RunRecord]) -> Result<(), String> {
    let by_id: HashMap<&str, &Datapoint> = points.iter().map(|p| (p.id.as_str(), p)).collect();
    for r in records.iter_mut() {
        let p = by_id
            .get(r.id.as_str())
            .ok_or_else(|| format!("record {} has no datapoint", r.id))?;
        r.rescore(p);
    }
    Ok(())
}
