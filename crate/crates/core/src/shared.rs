//! The shared decision vector.
//!
//! Components are `f64` bit patterns in `AtomicU64` cells. Addition is a
//! compare-and-exchange loop, so concurrent adds to one component are never
//! lost. Nothing orders accesses to *different* components: a reader may
//! see a vector that never existed as a whole at any instant.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

#[derive(Debug, Default)]
#[repr(transparent)]
pub struct AtomicF64(AtomicU64);

impl AtomicF64 {
    pub fn new(v: f64) -> Self {
        Self(AtomicU64::new(v.to_bits()))
    }

    #[inline]
    pub fn load(&self, order: Ordering) -> f64 {
        f64::from_bits(self.0.load(order))
    }

    #[inline]
    pub fn store(&self, v: f64, order: Ordering) {
        self.0.store(v.to_bits(), order)
    }

    /// Adds `a` and returns the previous value.
    #[inline]
    pub fn fetch_add(&self, a: f64, order: Ordering) -> f64 {
        let mut current = self.0.load(Ordering::Relaxed);
        loop {
            let next = (f64::from_bits(current) + a).to_bits();
            match self
                .0
                .compare_exchange_weak(current, next, order, Ordering::Relaxed)
            {
                Ok(prev) => return f64::from_bits(prev),
                Err(seen) => current = seen,
            }
        }
    }
}

/// Decision variable shared by all workers.
///
/// The hot-path accessors use relaxed ordering; workers synchronize only at
/// epoch boundaries (thread join), which orders everything before it.
#[derive(Debug)]
pub struct SharedVector {
    data: Box<[AtomicF64]>,
}

impl SharedVector {
    pub fn zeros(n: usize) -> Self {
        Self::from_slice(&vec![0.0; n])
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            data: x.iter().map(|&v| AtomicF64::new(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, v: usize) -> f64 {
        self.data[v].load(Ordering::Relaxed)
    }

    #[inline]
    pub fn set(&self, v: usize, value: f64) {
        self.data[v].store(value, Ordering::Relaxed)
    }

    /// `x_v ← x_v + a`, atomically. Panics if `v` is out of range.
    #[inline]
    pub fn add(&self, v: usize, a: f64) {
        self.data[v].fetch_add(a, Ordering::Relaxed);
    }

    /// Checked form of [`add`](Self::add).
    pub fn atomic_add(&self, v: usize, a: f64) -> Result<()> {
        let cell = self.data.get(v).ok_or(Error::IndexOutOfRange {
            index: v,
            len: self.data.len(),
        })?;
        cell.fetch_add(a, Ordering::Relaxed);
        Ok(())
    }

    /// Component-wise reads. Exact when no writer is running; otherwise
    /// each component holds some value it had during the call.
    pub fn snapshot(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|c| c.load(Ordering::Relaxed))
            .collect()
    }
}
