//! Largest-remainder (Hamilton) apportionment in exact integer arithmetic.

use crate::error::ExperimentError;

/// Splits `total` units among `weights` proportionally: each entry gets the
/// floor of its exact quota, and the units left over go to the largest
/// fractional remainders (ties to the lower index).
pub fn largest_remainder(weights: &[u64], total: u64) -> Result<Vec<u64>, ExperimentError> {
    let sum: u128 = weights.iter().map(|&w| u128::from(w)).sum();
    if weights.is_empty() || sum == 0 {
        return Err(ExperimentError::Apportionment(
            "cannot apportion over zero total weight".into(),
        ));
    }
    let total = u128::from(total);
    let mut alloc = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let scaled = total * u128::from(w);
        alloc.push((scaled / sum) as u64);
        remainders.push((scaled % sum, i));
    }
    let given: u128 = alloc.iter().map(|&a| u128::from(a)).sum();
    let leftover = (total - given) as usize;
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(leftover) {
        alloc[i] += 1;
    }
    Ok(alloc)
}
