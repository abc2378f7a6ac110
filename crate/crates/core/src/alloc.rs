//! Heap accounting for the `alloc` memory probe.
//!
//! [`TrackingAllocator`] forwards to the system allocator and keeps a running
//! net byte count and high-water mark per thread. Counters are thread local
//! so allocations made by unrelated threads (a test harness, a signal
//! handler) never leak into a probed region. Allocations a target makes on
//! helper threads are not attributed to it.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;

pub struct TrackingAllocator;

thread_local! {
    static CURRENT: Cell<i64> = const { Cell::new(0) };
    static PEAK: Cell<i64> = const { Cell::new(0) };
}

#[inline]
fn record(delta: i64) {
    // try_with: counters may already be gone while a thread is being torn down.
    let _ = CURRENT.try_with(|current| {
        let now = current.get() + delta;
        current.set(now);
        let _ = PEAK.try_with(|peak| {
            if now > peak.get() {
                peak.set(now);
            }
        });
    });
}

unsafe impl GlobalAlloc for TrackingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = unsafe { System.alloc(layout) };
        if !ptr.is_null() {
            record(layout.size() as i64);
        }
        ptr
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let ptr = unsafe { System.alloc_zeroed(layout) };
        if !ptr.is_null() {
            record(layout.size() as i64);
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        record(-(layout.size() as i64));
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let new_ptr = unsafe { System.realloc(ptr, layout, new_size) };
        if !new_ptr.is_null() {
            record(new_size as i64 - layout.size() as i64);
        }
        new_ptr
    }
}

#[cfg(feature = "track-alloc")]
#[global_allocator]
static GLOBAL: TrackingAllocator = TrackingAllocator;

fn current() -> i64 {
    CURRENT.with(Cell::get)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllocReading {
    /// Bytes still allocated at the end of the region minus bytes at its start.
    pub net: i64,
    /// Highest net level reached inside the region, never below zero.
    pub peak: u64,
}

/// A bracketed stretch of code on the current thread.
#[derive(Debug)]
pub struct AllocRegion {
    start: i64,
}

impl AllocRegion {
    pub fn begin() -> Self {
        let start = current();
        PEAK.with(|p| p.set(start));
        Self { start }
    }

    pub fn finish(&self) -> AllocReading {
        let peak = PEAK.with(Cell::get);
        AllocReading {
            net: current() - self.start,
            peak: (peak - self.start).max(0) as u64,
        }
    }
}

/// Whether the tracking allocator is installed as the global allocator.
pub fn is_tracking() -> bool {
    let region = AllocRegion::begin();
    let probe = std::hint::black_box(Box::new([0u8; 64]));
    let reading = region.finish();
    drop(probe);
    reading.peak >= 64
}
