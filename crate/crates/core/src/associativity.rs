//! Fixed per-neuron association signs and the layer-wide STDP update.
//!
//! Signs are stored for the label-1 convention. A label-0 sample sees every
//! sign negated, which mirrors how the output neuron's association flips
//! with the label.

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::Label;
use crate::rule::{raw_delta, RuleParams, Sign};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociativityMap {
    /// `signs[k]` belongs to layer `k + 1`; the input layer has none.
    signs: Vec<Vec<Sign>>,
}

fn balanced(n: usize) -> Vec<Sign> {
    let positives = n.div_ceil(2);
    (0..n)
        .map(|i| {
            if i < positives {
                Sign::Positive
            } else {
                Sign::Negative
            }
        })
        .collect()
}

impl AssociativityMap {
    /// Every hidden layer gets `ceil(n/2)` positive and `floor(n/2)` negative
    /// signs in seeded positions. The output layer is always `[+1]`.
    pub fn assign(layer_dims: &[usize], seed: u64) -> Result<AssociativityMap> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::Config(format!("invalid layer dims {layer_dims:?}")));
        }
        if *layer_dims.last().unwrap() != 1 {
            return Err(Error::Config("output layer must have one neuron".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = &layer_dims[1..layer_dims.len() - 1];
        let mut signs: Vec<Vec<Sign>> = hidden
            .iter()
            .map(|&n| {
                let mut s = balanced(n);
                s.shuffle(&mut rng);
                s
            })
            .collect();
        signs.push(vec![Sign::Positive]);
        Ok(AssociativityMap { signs })
    }

    /// Rebuilds a map from stored sign vectors (one per non-input layer).
    pub fn from_signs(signs: Vec<Vec<Sign>>) -> Result<AssociativityMap> {
        match signs.last() {
            Some(out) if out.as_slice() == [Sign::Positive] => {}
            _ => {
                return Err(Error::Config(
                    "output layer associativity must be [+1]".into(),
                ))
            }
        }
        if signs.iter().any(|s| s.is_empty()) {
            return Err(Error::Config("empty associativity layer".into()));
        }
        Ok(AssociativityMap { signs })
    }

    /// Stored signs for every non-input layer.
    pub fn layers(&self) -> &[Vec<Sign>] {
        &self.signs
    }

    /// Widths of the non-input layers this map covers.
    pub fn widths(&self) -> impl Iterator<Item = usize> + '_ {
        self.signs.iter().map(Vec::len)
    }

    /// Signs seen by `layer` (network layer index, 1 = first hidden) for a
    /// sample with `label`.
    pub fn effective_signs(&self, layer: usize, label: Label) -> Result<Vec<Sign>> {
        if layer == 0 {
            return Err(Error::Domain("the input layer has no associativity".into()));
        }
        let stored = self.signs.get(layer - 1).ok_or_else(|| {
            Error::Domain(format!(
                "layer {layer} out of range (map covers layers 1..={})",
                self.signs.len()
            ))
        })?;
        Ok(match label {
            Label::One => stored.clone(),
            Label::Zero => stored.iter().map(|&s| -s).collect(),
        })
    }
}

/// Per-synapse STDP update for one weight matrix:
/// `out[[j, i]] = stdp_delta(pre[i], post[j], signs[j])`.
pub fn stdp_layer_update(
    pre: ArrayView1<'_, f64>,
    post: ArrayView1<'_, f64>,
    signs: &[Sign],
    params: &RuleParams,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((post.len(), pre.len()));
    accumulate_layer_update(&mut out, pre, post, signs, params)?;
    Ok(out)
}

/// Adds the layer update into `acc` without allocating.
pub(crate) fn accumulate_layer_update(
    acc: &mut Array2<f64>,
    pre: ArrayView1<'_, f64>,
    post: ArrayView1<'_, f64>,
    signs: &[Sign],
    params: &RuleParams,
) -> Result<()> {
    if signs.len() != post.len() || acc.dim() != (post.len(), pre.len()) {
        return Err(Error::Shape(format!(
            "update {:?} from {} pre, {} post, {} signs",
            acc.dim(),
            pre.len(),
            post.len(),
            signs.len()
        )));
    }
    if pre.iter().chain(post.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite activation".into()));
    }
    // x = 0 zeroes the update exactly, and most MNIST pixels are 0.
    let active: Vec<(usize, f64)> = pre
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(i, &x)| (i, x))
        .collect();
    for ((mut row, &p), &z) in acc.rows_mut().into_iter().zip(post).zip(signs) {
        let z = z.value();
        for &(i, x) in &active {
            row[i] += raw_delta(x, p, z, params);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn count(signs: &[Sign], s: Sign) -> usize {
        signs.iter().filter(|&&v| v == s).count()
    }

    #[test]
    fn paper_architecture_is_balanced() {
        let map = AssociativityMap::assign(&[784, 32, 16, 1], 0).unwrap();
        let widths: Vec<_> = map.widths().collect();
        assert_eq!(widths, vec![32, 16, 1]);
        assert_eq!(count(&map.layers()[0], Sign::Positive), 16);
        assert_eq!(count(&map.layers()[0], Sign::Negative), 16);
        assert_eq!(count(&map.layers()[1], Sign::Positive), 8);
        assert_eq!(map.layers()[2], vec![Sign::Positive]);
    }

    #[test]
    fn width_one_hidden_layer_is_positive() {
        let map = AssociativityMap::assign(&[3, 1, 1], 5).unwrap();
        assert_eq!(map.layers()[0], vec![Sign::Positive]);
    }

    #[test]
    fn assignment_is_deterministic() {
        let a = AssociativityMap::assign(&[4, 32, 16, 1], 9).unwrap();
        let b = AssociativityMap::assign(&[4, 32, 16, 1], 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_sign_follows_label() {
        let map = AssociativityMap::assign(&[4, 8, 1], 0).unwrap();
        assert_eq!(
            map.effective_signs(2, Label::One).unwrap(),
            vec![Sign::Positive]
        );
        assert_eq!(
            map.effective_signs(2, Label::Zero).unwrap(),
            vec![Sign::Negative]
        );
    }

    #[test]
    fn hidden_signs_negate_for_label_zero() {
        let map = AssociativityMap::assign(&[4, 8, 1], 3).unwrap();
        let one = map.effective_signs(1, Label::One).unwrap();
        let zero = map.effective_signs(1, Label::Zero).unwrap();
        assert_eq!(one, map.layers()[0]);
        assert!(one.iter().zip(&zero).all(|(&a, &b)| a == -b));
    }

    #[test]
    fn input_layer_has_no_signs() {
        let map = AssociativityMap::assign(&[4, 8, 1], 3).unwrap();
        assert!(matches!(
            map.effective_signs(0, Label::One),
            Err(Error::Domain(_))
        ));
        assert!(map.effective_signs(3, Label::One).is_err());
    }

    #[test]
    fn from_signs_requires_positive_output() {
        assert!(AssociativityMap::from_signs(vec![vec![Sign::Negative]]).is_err());
        assert!(AssociativityMap::from_signs(vec![]).is_err());
        assert!(AssociativityMap::from_signs(vec![vec![Sign::Positive]]).is_ok());
    }

    #[test]
    fn single_synapse_update() {
        let u = stdp_layer_update(
            array![0.8].view(),
            array![0.2].view(),
            &[Sign::Positive],
            &RuleParams::default(),
        )
        .unwrap();
        assert!((u[[0, 0]] - 0.384).abs() < 1e-8);
    }

    #[test]
    fn matching_rates_give_zero_row() {
        let pre = array![0.3, 0.3, 0.3];
        let post = array![0.3, 0.7];
        let u = stdp_layer_update(
            pre.view(),
            post.view(),
            &[Sign::Positive, Sign::Negative],
            &RuleParams::default(),
        )
        .unwrap();
        assert!(u.row(0).iter().all(|&v| v == 0.0));
        assert!(u.row(1).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let r = stdp_layer_update(
            array![0.3, 0.3].view(),
            array![0.3, 0.7].view(),
            &[Sign::Positive],
            &RuleParams::default(),
        );
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    proptest! {
        #[test]
        fn counts_stay_balanced(n in 1usize..64, seed in any::<u64>()) {
            let map = AssociativityMap::assign(&[3, n, 1], seed).unwrap();
            let pos = count(&map.layers()[0], Sign::Positive) as i64;
            let neg = count(&map.layers()[0], Sign::Negative) as i64;
            prop_assert_eq!(pos + neg, n as i64);
            prop_assert!(pos - neg == 0 || pos - neg == 1);
        }

        #[test]
        fn label_flip_negates_update(
            pre in proptest::collection::vec(0.0f64..=1.0, 1..6),
            post in proptest::collection::vec(0.01f64..0.99, 1..6),
            seed in any::<u64>(),
        ) {
            let dims = [pre.len(), post.len(), 1];
            let map = AssociativityMap::assign(&dims, seed).unwrap();
            let params = RuleParams::default();
            let (pre, post) = (ndarray::Array1::from(pre), ndarray::Array1::from(post));
            let one = stdp_layer_update(pre.view(), post.view(),
                &map.effective_signs(1, Label::One).unwrap(), &params).unwrap();
            let zero = stdp_layer_update(pre.view(), post.view(),
                &map.effective_signs(1, Label::Zero).unwrap(), &params).unwrap();
            prop_assert_eq!(zero, -one);
        }
    }
}
