//! Unitary N-dimensional FFT over row-major data.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((n, forward))
            .or_insert_with(|| {
                let dir = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                planner.plan_fft(n, dir)
            })
            .clone()
    })
}

/// In-place transform of an `n^dim` row-major array, scaled by `n^{−dim/2}`.
pub(crate) fn transform(data: &mut [Complex64], n: usize, dim: usize, forward: bool) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // Last axis: contiguous lines.
    fft.process_with_scratch(data, &mut scratch);

    // Remaining axes: gather each block of strided lines into a contiguous buffer.
    let mut lines = Vec::new();
    for axis in (0..dim.saturating_sub(1)).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        lines.resize(block, Complex64::new(0.0, 0.0));
        for chunk in data.chunks_exact_mut(block) {
            for offset in 0..stride {
                let line = &mut lines[offset * n..(offset + 1) * n];
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = chunk[i * stride + offset];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for offset in 0..stride {
                let line = &lines[offset * n..(offset + 1) * n];
                for (i, v) in line.iter().enumerate() {
                    chunk[i * stride + offset] = *v;
                }
            }
        }
    }

    let scale = (n as f64).powf(-(dim as f64) / 2.0);
    for v in data.iter_mut() {
        *v *= scale;
    }
}
