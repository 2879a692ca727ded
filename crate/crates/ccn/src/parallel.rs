//! Seed-level parallelism with results in seed order.

use std::thread;

/// Evaluates `f(0), …, f(seeds − 1)` on up to `jobs` threads and returns
/// the results in seed order.
pub fn map_seeds<T, F>(seeds: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let jobs = jobs.clamp(1, seeds.max(1));
    if jobs == 1 {
        return (0..seeds).map(f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<T>> = (0..seeds).map(|_| None).collect();
    thread::scope(|scope| {
        let workers: Vec<_> = (0..jobs)
            .map(|w| scope.spawn(move || (w..seeds).step_by(jobs).map(|s| (s, f(s))).collect::<Vec<_>>()))
            .collect();
        for w in workers {
            for (s, v) in w.join().expect("worker panicked") {
                slots[s] = Some(v);
            }
        }
    });
    slots.into_iter().map(|v| v.expect("every seed ran")).collect()
}
