//! Thread-local buffer recycling for the large scratch arrays of the
//! spectral kernels. Repeated megabyte-scale allocations in the step loop
//! otherwise dominate the runtime through page-fault churn; a pooled buffer
//! is handed back on drop and reused warm.
//!
//! Buffers are always fully overwritten by their constructors, so recycling
//! never leaks state between computations.

use rustfft::num_complex::Complex;
use std::cell::RefCell;

/// Per-type cap on pooled bytes per thread; oversized give-backs are
/// dropped so one huge grid cannot pin memory forever.
const POOL_BYTE_CAP: usize = 256 << 20;

macro_rules! pooled {
    ($name:ident, $elem:ty, $pool:ident, $zero:expr) => {
        thread_local! {
            static $pool: RefCell<(usize, Vec<Vec<$elem>>)> =
                const { RefCell::new((0, Vec::new())) };
        }

        /// A recycled `Vec` that returns to the thread-local pool on drop.
        pub(crate) struct $name(Vec<$elem>);

        impl $name {
            fn take(n: usize) -> Vec<$elem> {
                $pool.with(|cell| {
                    let (bytes, pool) = &mut *cell.borrow_mut();
                    // prefer a fit no larger than 4x the request so small
                    // grids do not consume huge buffers
                    let pos = pool
                        .iter()
                        .position(|v| v.capacity() >= n && v.capacity() <= 4 * n + 64);
                    match pos {
                        Some(i) => {
                            let v = pool.swap_remove(i);
                            *bytes -= v.capacity() * std::mem::size_of::<$elem>();
                            v
                        }
                        None => Vec::with_capacity(n),
                    }
                })
            }

            /// Zero-filled buffer of length n.
            pub fn zeros(n: usize) -> $name {
                let mut v = Self::take(n);
                v.clear();
                v.resize(n, $zero);
                $name(v)
            }

            /// Buffer filled from an exact-length iterator.
            pub fn from_iter_exact(n: usize, it: impl Iterator<Item = $elem>) -> $name {
                let mut v = Self::take(n);
                v.clear();
                v.extend(it);
                assert_eq!(v.len(), n, "pooled buffer fill length mismatch");
                $name(v)
            }

            /// Detach the underlying Vec (it will not return to the pool).
            pub fn into_vec(mut self) -> Vec<$elem> {
                std::mem::take(&mut self.0)
            }
        }

        impl Drop for $name {
            fn drop(&mut self) {
                let v = std::mem::take(&mut self.0);
                if v.capacity() == 0 {
                    return;
                }
                $pool.with(|cell| {
                    let (bytes, pool) = &mut *cell.borrow_mut();
                    let size = v.capacity() * std::mem::size_of::<$elem>();
                    if *bytes + size <= POOL_BYTE_CAP {
                        *bytes += size;
                        pool.push(v);
                    }
                });
            }
        }

        impl std::ops::Deref for $name {
            type Target = Vec<$elem>;
            fn deref(&self) -> &Vec<$elem> {
                &self.0
            }
        }

        impl std::ops::DerefMut for $name {
            fn deref_mut(&mut self) -> &mut Vec<$elem> {
                &mut self.0
            }
        }

        impl Clone for $name {
            fn clone(&self) -> $name {
                Self::from_iter_exact(self.0.len(), self.0.iter().copied())
            }
        }
    };
}

pooled!(CBuf, Complex<f64>, C64_POOL, Complex::new(0.0, 0.0));
pooled!(FBuf, f64, F64_POOL, 0.0);
