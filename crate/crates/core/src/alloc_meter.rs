//! Allocation-counting global allocator used to measure working storage.
//!
//! Counters are per thread, so concurrent tests do not disturb each other.
//! A binary opts in with
//! `#[global_allocator] static A: CountingAlloc = CountingAlloc;`;
//! without it every measurement reads zero.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;

thread_local! {
    static CURRENT: Cell<usize> = const { Cell::new(0) };
    static PEAK: Cell<usize> = const { Cell::new(0) };
}

pub struct CountingAlloc;

fn grow(bytes: usize) {
    let _ = CURRENT.try_with(|c| {
        let now = c.get() + bytes;
        c.set(now);
        let _ = PEAK.try_with(|p| {
            if now > p.get() {
                p.set(now)
            }
        });
    });
}

fn shrink(bytes: usize) {
    let _ = CURRENT.try_with(|c| c.set(c.get().saturating_sub(bytes)));
}

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc_zeroed(layout);
        if !p.is_null() {
            grow(layout.size());
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        shrink(layout.size());
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = System.realloc(ptr, layout, new_size);
        if !p.is_null() {
            shrink(layout.size());
            grow(new_size);
        }
        p
    }
}

/// Byte counts observed while running a closure on the current thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Usage {
    /// Highest live allocation above the starting level.
    pub peak: usize,
    /// Bytes still allocated when the closure returned (its result, mostly).
    pub retained: usize,
}

impl Usage {
    /// Working storage that was released before returning.
    pub fn transient(&self) -> usize {
        self.peak.saturating_sub(self.retained)
    }
}

/// Runs `f` and reports how much memory it allocated on this thread.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, Usage) {
    let start = CURRENT.with(Cell::get);
    let saved_peak = PEAK.with(|p| p.replace(start));
    let out = f();
    let end = CURRENT.with(Cell::get);
    let peak = PEAK.with(|p| p.replace(saved_peak.max(p.get())));
    (out, Usage { peak: peak.saturating_sub(start), retained: end.saturating_sub(start) })
}

/// True when the counting allocator is installed in this binary.
pub fn is_active() -> bool {
    let (_, u) = measure(|| std::hint::black_box(vec![0u8; 64]));
    u.peak >= 64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_peak_and_retained() {
        assert!(is_active());
        let (v, u) = measure(|| {
            let scratch = vec![0u64; 1000];
            std::hint::black_box(&scratch);
            drop(scratch);
            vec![1u8; 10]
        });
        assert_eq!(v.len(), 10);
        assert_eq!(u.peak, 8000);
        assert_eq!(u.retained, 10);
        assert_eq!(u.transient(), 7990);
    }

    #[test]
    fn nested_measurements() {
        let (_, outer) = measure(|| {
            let a = vec![0u8; 100];
            let (_, inner) = measure(|| std::hint::black_box(vec![0u8; 50]));
            assert_eq!(inner.peak, 50);
            std::hint::black_box(a)
        });
        assert_eq!(outer.peak, 150);
    }
}
