use std::collections::HashMap;

use rayon::prelude::*;

use super::prokhorov::{prokhorov_rn, prokhorov_rn_at_most, prokhorov_rn_lower_bound};
use crate::error::{MmError, Result};
use crate::measurements::MeasureOnRN;

/// Hausdorff distance between two finite sets of measures on `(R^N, ℓ∞)`, with respect to
/// the Prokhorov metric.
pub fn hausdorff_measures(a: &[MeasureOnRN], b: &[MeasureOnRN]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(MmError::arg("Hausdorff distance of an empty set"));
    }
    // cheap marginal lower bounds for every pair
    let lower: Vec<Vec<f64>> = a
        .par_iter()
        .map(|x| b.iter().map(|y| prokhorov_rn_lower_bound(x, y)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let mut exact: HashMap<(usize, usize), f64> = HashMap::new();
    let forward = directed(a.len(), b.len(), &|i, j| lower[i][j], &mut exact, &|i, j| (&a[i], &b[j]))?;
    let mut swapped: HashMap<(usize, usize), f64> = exact.iter().map(|(&(i, j), &v)| ((j, i), v)).collect();
    let backward = directed(b.len(), a.len(), &|j, i| lower[i][j], &mut swapped, &|j, i| (&a[i], &b[j]))?;
    Ok(forward.max(backward))
}

/// `max_i min_j d_P(x_i, y_j)`, skipping pairs that cannot change the result.
fn directed<'m>(
    na: usize,
    nb: usize,
    lower: &dyn Fn(usize, usize) -> f64,
    exact: &mut HashMap<(usize, usize), f64>,
    pair: &dyn Fn(usize, usize) -> (&'m MeasureOnRN, &'m MeasureOnRN),
) -> Result<f64> {
    let mut sup = 0.0f64;
    for i in 0..na {
        let mut order: Vec<usize> = (0..nb).collect();
        order.sort_by(|&p, &q| lower(i, p).total_cmp(&lower(i, q)).then(p.cmp(&q)));
        let mut inf = f64::INFINITY;
        let mut dominated = false;
        for &j in &order {
            if lower(i, j) >= inf {
                break;
            }
            if let Some(&v) = exact.get(&(i, j)) {
                inf = inf.min(v);
            } else {
                let (x, y) = pair(i, j);
                if lower(i, j) <= sup && prokhorov_rn_at_most(x, y, sup)? {
                    dominated = true;
                    break;
                }
                if inf.is_finite() && !prokhorov_rn_at_most(x, y, inf)? {
                    continue;
                }
                let v = prokhorov_rn(x, y)?;
                exact.insert((i, j), v);
                inf = inf.min(v);
            }
            if inf <= sup {
                dominated = true;
                break;
            }
        }
        if !dominated {
            sup = sup.max(inf);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirac(x: f64) -> MeasureOnRN {
        MeasureOnRN::dirac(vec![x])
    }

    #[test]
    fn identical_sets_and_singletons() {
        let a = vec![dirac(0.0), dirac(0.3)];
        assert_eq!(hausdorff_measures(&a, &a).unwrap(), 0.0);
        let d = hausdorff_measures(&[dirac(0.0)], &[dirac(0.25)]).unwrap();
        assert_eq!(d, prokhorov_rn(&dirac(0.0), &dirac(0.25)).unwrap());
        assert!(hausdorff_measures(&[], &a).is_err());
    }

    #[test]
    fn subset_matches_brute_force() {
        let b = vec![dirac(0.0), dirac(0.1), dirac(0.45)];
        let a = vec![b[0].clone(), b[1].clone()];
        let mut brute = 0.0f64;
        for y in &b {
            let inf = a.iter().map(|x| prokhorov_rn(x, y).unwrap()).fold(f64::INFINITY, f64::min);
            brute = brute.max(inf);
        }
        assert_eq!(hausdorff_measures(&a, &b).unwrap(), brute);
        assert!((brute - 0.35).abs() < 1e-15);
    }
}
