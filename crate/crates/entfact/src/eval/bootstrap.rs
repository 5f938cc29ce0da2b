//! Paired bootstrap test over documents.

use rand::Rng;

use crate::corpus::Label;

use super::EvalError;

/// One-sided paired bootstrap: resample the test set with replacement
/// `n_resamples` times and report the fraction of resamples where system B's
/// accuracy is at least system A's. Callers pass the system that outperforms
/// on the full set as A; small p then means the gap is unlikely under
/// resampling noise.
pub fn bootstrap_significance(
    preds_a: &[Label],
    preds_b: &[Label],
    gold: &[Label],
    n_resamples: usize,
    rng: &mut impl Rng,
) -> Result<f64, EvalError> {
    if preds_a.len() != gold.len() || preds_b.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            expected: gold.len(),
            got: preds_a.len().max(preds_b.len()),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::Misaligned("empty test set".into()));
    }
    let n = gold.len();
    let correct_a: Vec<bool> = preds_a.iter().zip(gold).map(|(p, g)| p == g).collect();
    let correct_b: Vec<bool> = preds_b.iter().zip(gold).map(|(p, g)| p == g).collect();

    let mut b_at_least_a = 0usize;
    for _ in 0..n_resamples {
        let mut hits_a = 0usize;
        let mut hits_b = 0usize;
        for _ in 0..n {
            let i = rng.random_range(0..n);
            hits_a += usize::from(correct_a[i]);
            hits_b += usize::from(correct_b[i]);
        }
        if hits_b >= hits_a {
            b_at_least_a += 1;
        }
    }
    Ok(b_at_least_a as f64 / n_resamples as f64)
}

pub const DEFAULT_RESAMPLES: usize = 10_000;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_for;

    fn gold(n: usize) -> Vec<Label> {
        (0..n)
            .map(|i| {
                if i % 2 == 0 {
                    Label::HumanWritten
                } else {
                    Label::Manipulated
                }
            })
            .collect()
    }

    fn flip(l: Label) -> Label {
        match l {
            Label::HumanWritten => Label::Manipulated,
            Label::Manipulated => Label::HumanWritten,
        }
    }

    #[test]
    fn identical_systems_give_p_one() {
        let g = gold(50);
        let mut rng = rng_for(1, "boot");
        let p = bootstrap_significance(&g, &g, &g, 1000, &mut rng).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn perfect_vs_always_wrong_gives_p_zero() {
        let g = gold(50);
        let wrong: Vec<Label> = g.iter().map(|l| flip(*l)).collect();
        let mut rng = rng_for(2, "boot");
        let p = bootstrap_significance(&g, &wrong, &g, 1000, &mut rng).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn planted_two_point_gap_is_significant() {
        // 8,000 items; A errs on 8%, B errs on 10% (2-point gap), disjoint
        // error sets to keep the pairing informative.
        let g = gold(8000);
        let mut a = g.clone();
        let mut b = g.clone();
        for l in a.iter_mut().take(640) {
            *l = flip(*l);
        }
        for l in b.iter_mut().skip(640).take(800) {
            *l = flip(*l);
        }
        for seed in 0..5 {
            let mut rng = rng_for(seed, "boot-gap");
            let p = bootstrap_significance(&a, &b, &g, 2000, &mut rng).unwrap();
            assert!(p < 0.01, "seed {seed}: p = {p}");
        }
    }

    #[test]
    fn p_decreases_with_effect_size() {
        let g = gold(2000);
        let mut medians = Vec::new();
        for errors_b in [100usize, 200, 400] {
            let mut ps = Vec::new();
            for seed in 0..5 {
                let a = g.clone();
                let mut b = g.clone();
                for l in b.iter_mut().take(errors_b) {
                    *l = flip(*l);
                }
                let mut rng = rng_for(seed, "boot-mono");
                ps.push(bootstrap_significance(&a, &b, &g, 500, &mut rng).unwrap());
            }
            ps.sort_by(|x, y| x.partial_cmp(y).unwrap());
            medians.push(ps[2]);
        }
        assert!(medians[0] >= medians[1]);
        assert!(medians[1] >= medians[2]);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let g = gold(10);
        let short = gold(5);
        let mut rng = rng_for(0, "boot");
        assert!(bootstrap_significance(&short, &g, &g, 10, &mut rng).is_err());
    }
}
