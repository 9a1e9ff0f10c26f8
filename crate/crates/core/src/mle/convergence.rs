use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, GOperator};
use crate::error::{Error, Result};
use crate::state::DensityMatrix;

use super::Objective;

/// Counts fixed-ε iterations from the maximally mixed state until every
/// matrix element is within each tolerance of `reference`.
///
/// Returns, per tolerance, the first iteration index `k` with
/// `max |ρ^(k) − reference| < tol`, or `None` if that did not happen within
/// `max_iterations`. `epsilon = ∞` runs plain `RρR`. `g` switches on the
/// `G⁻¹`-corrected map.
pub fn iterations_to_reference(
    data: &Dataset,
    epsilon: f64,
    reference: &DensityMatrix,
    tolerances: &[f64],
    max_iterations: usize,
    floor: f64,
    g: Option<&GOperator>,
) -> Result<Vec<Option<usize>>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig("epsilon must be positive"));
    }
    let obj = Objective::new(data, floor, g)?;
    obj.check(reference)?;

    let mut hit: Vec<Option<usize>> = vec![None; tolerances.len()];
    let mut rho = DensityMatrix::maximally_mixed(data.dim())?;
    for k in 0..=max_iterations {
        let dist = rho.matrix().max_abs_diff(reference.matrix());
        for (slot, &tol) in hit.iter_mut().zip(tolerances) {
            if slot.is_none() && dist < tol {
                *slot = Some(k);
            }
        }
        if hit.iter().all(Option::is_some) || k == max_iterations {
            break;
        }
        let eval = obj.evaluate(&rho);
        let generator = obj.generator(&rho, &eval);
        rho = obj.step(&rho, &generator, epsilon)?;
    }
    Ok(hit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mle::DEFAULT_FLOOR;
    use crate::povm::counterexample_dataset;

    #[test]
    fn rhor_never_reaches_mle_on_counterexample() {
        let data = counterexample_dataset();
        let mle = DensityMatrix::from_diagonal(&[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let hits = iterations_to_reference(
            &data,
            f64::INFINITY,
            &mle,
            &[1e-3],
            200,
            DEFAULT_FLOOR,
            None,
        )
        .unwrap();
        assert_eq!(hits, vec![None]);
    }

    #[test]
    fn diluted_hits_tighter_tolerances_later() {
        let data = counterexample_dataset();
        let mle = DensityMatrix::from_diagonal(&[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let hits = iterations_to_reference(
            &data,
            1.0,
            &mle,
            &[1e-3, 1e-5, 1e-7],
            1000,
            DEFAULT_FLOOR,
            None,
        )
        .unwrap();
        let k: Vec<usize> = hits.into_iter().map(Option::unwrap).collect();
        assert!(k[0] <= k[1] && k[1] <= k[2] && k[0] < k[2], "{k:?}");
    }
}
