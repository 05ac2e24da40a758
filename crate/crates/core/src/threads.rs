//! Worker-pool sizing.

use std::sync::Once;

/// Environment variable capping the rayon worker count.
pub const THREADS_ENV: &str = "SPIN_GEODESY_THREADS";

static INIT: Once = Once::new();

/// Configure the global worker pool from `SPIN_GEODESY_THREADS` (first call
/// wins; later calls are no-ops). Unset, empty, or unparsable values leave
/// the default (one worker per core). Parallelism only ever distributes
/// per-point maps, so results do not depend on the worker count.
pub fn init_from_env() {
    INIT.call_once(|| {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    // Ignore failure: a pool may already exist in tests.
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    });
}
