use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::fit::FitOperator;
use super::grid::Grid;
use crate::Result;

type Slot = Arc<OnceLock<Result<Arc<FitOperator>>>>;

/// Fit operators keyed by the exact grid bits and degree.
///
/// Concurrent lookups of one key compute the operator once; the map lock is
/// released before the factorization runs.
#[derive(Default)]
pub struct FitCache {
    slots: Mutex<HashMap<(Vec<u64>, usize), Slot>>,
}

impl FitCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, grid: &Grid, degree: usize) -> Result<Arc<FitOperator>> {
        let slot = {
            let mut map = self.slots.lock().expect("fit cache poisoned");
            map.entry((grid.bit_key(), degree)).or_default().clone()
        };
        slot.get_or_init(|| FitOperator::for_grid(grid, degree).map(Arc::new)).clone()
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("fit cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Process-wide cache used by the model.
pub fn global_fit_cache() -> &'static FitCache {
    static CACHE: OnceLock<FitCache> = OnceLock::new();
    CACHE.get_or_init(FitCache::new)
}
