//! Row-parallel rendering. Rows are computed independently and placed by
//! index, so the result does not depend on the thread count.

use expray_core::render::{render_row, EscapeImage, GridSpec, Plane};
use rayon::prelude::*;

pub const THREADS_ENV: &str = "EXPRAY_THREADS";

/// Thread cap from `EXPRAY_THREADS`; unset or unparsable means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

pub fn render(grid: &GridSpec, plane: Plane, threads: Option<usize>) -> expray_core::Result<EscapeImage> {
    grid.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().expect("thread pool");
    let rows: Vec<Vec<Option<u32>>> = pool.install(|| {
        (0..grid.px_h)
            .into_par_iter()
            .map(|j| render_row(grid, plane, j))
            .collect()
    });
    EscapeImage::from_rows(*grid, rows.into_iter().flatten().collect())
}
