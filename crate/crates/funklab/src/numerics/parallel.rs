//! Fixed-order parallel reduction over counter blocks.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Number of worker threads to use: the smaller of the machine's
/// available parallelism and the `FUNKLAB_THREADS` cap (when set and
/// parseable), and at least 1.
pub fn thread_budget() -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = std::env::var("FUNKLAB_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(hw);
    hw.min(cap).max(1)
}

/// Sums `f` over the index blocks `[k * block, min((k+1) * block, n))`.
///
/// Blocks are processed by a worker pool but accumulated strictly in
/// block order, so the result is bit-identical for every thread count.
/// `f` receives `(start, end)` of a block and returns its partial sum.
pub fn par_sum_chunks<F>(n: u64, block: u64, f: F) -> f64
where
    F: Fn(u64, u64) -> f64 + Sync,
{
    assert!(block > 0, "block size must be positive");
    if n == 0 {
        return 0.0;
    }
    let n_blocks = n.div_ceil(block) as usize;
    let workers = thread_budget().min(n_blocks);
    if workers <= 1 {
        let mut total = 0.0;
        for k in 0..n_blocks as u64 {
            total += f(k * block, ((k + 1) * block).min(n));
        }
        return total;
    }

    let mut partials = vec![0.0_f64; n_blocks];
    let next = AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut partials);
    // Each worker claims whole blocks; writes land in distinct slots.
    std::thread::scope(|scope| {
        let f = &f;
        let next = &next;
        let slots = &slots;
        for _ in 0..workers {
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n_blocks {
                    break;
                }
                let start = k as u64 * block;
                let end = (start + block).min(n);
                let v = f(start, end);
                let mut guard = slots.lock().unwrap();
                guard[k] = v;
            });
        }
    });
    partials.iter().sum()
}
