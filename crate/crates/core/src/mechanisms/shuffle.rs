use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tradeoff::PrivacyBudget;

/// Reports and their budgets after a uniform permutation. The permutation
/// itself is not retained.
#[derive(Clone, Debug, PartialEq)]
pub struct ShuffledBatch<T> {
    values: Vec<T>,
    budgets: Vec<PrivacyBudget>,
}

impl<T> ShuffledBatch<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Budgets, aligned with `values()`.
    pub fn budgets(&self) -> &[PrivacyBudget] {
        &self.budgets
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<PrivacyBudget>) {
        (self.values, self.budgets)
    }
}

/// Applies one seeded Fisher-Yates permutation to reports and budgets alike.
pub fn shuffle<T>(values: Vec<T>, budgets: Vec<PrivacyBudget>, seed: u64) -> Result<ShuffledBatch<T>> {
    if values.is_empty() {
        return Err(Error::Empty("reports"));
    }
    if values.len() != budgets.len() {
        return Err(Error::LengthMismatch { expected: values.len(), actual: budgets.len() });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut slots: Vec<Option<(T, PrivacyBudget)>> = values.into_iter().zip(budgets).map(Some).collect();
    let (values, budgets) = order.iter().map(|&i| slots[i].take().expect("permutation index used twice")).unzip();
    Ok(ShuffledBatch { values, budgets })
}
