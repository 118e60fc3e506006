//! Walker/Vose alias table for the discrete overhang-slot draw.

use crate::error::AliasError;

/// O(1) sampler for a finite discrete distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Vose's small/large worklist construction.
    pub fn new(weights: &[f64]) -> Result<Self, AliasError> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(AliasError::InvalidWeight { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(AliasError::EmptyWeights);
        }

        let n = weights.len();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);

        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        Ok(Self { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    pub fn alias(&self) -> &[u32] {
        &self.alias
    }

    /// Two-uniform draw: the high bits of `index_word` pick a column, the top
    /// 53 bits of `coin_word` decide between the column and its alias.
    #[inline]
    pub fn sample(&self, index_word: u64, coin_word: u64) -> usize {
        let column = ((index_word as u128 * self.prob.len() as u128) >> 64) as usize;
        let coin = (coin_word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if coin < self.prob[column] {
            column
        } else {
            self.alias[column] as usize
        }
    }

    /// The distribution the table actually encodes.
    pub fn implied_probabilities(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut p: Vec<f64> = self.prob.iter().map(|q| q / n).collect();
        for (i, &a) in self.alias.iter().enumerate() {
            p[a as usize] += (1.0 - self.prob[i]) / n;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniform::{UniformSource, Xoshiro256pp};
    use proptest::prelude::*;

    #[test]
    fn single_category() {
        let t = AliasTable::new(&[1.0]).unwrap();
        let mut src = Xoshiro256pp::from_seed(3);
        for _ in 0..1000 {
            assert_eq!(t.sample(src.next_u64(), src.next_u64()), 0);
        }
    }

    #[test]
    fn uniform_weights_draw_evenly() {
        let t = AliasTable::new(&[1.0; 4]).unwrap();
        let mut src = Xoshiro256pp::from_seed(11);
        let mut counts = [0u64; 4];
        let n = 1_000_000;
        for _ in 0..n {
            counts[t.sample(src.next_u64(), src.next_u64())] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(AliasTable::new(&[0.0, 0.0]), Err(AliasError::EmptyWeights));
        assert_eq!(AliasTable::new(&[]), Err(AliasError::EmptyWeights));
        assert!(matches!(
            AliasTable::new(&[1.0, -1.0]),
            Err(AliasError::InvalidWeight { index: 1, .. })
        ));
        assert!(matches!(
            AliasTable::new(&[f64::NAN]),
            Err(AliasError::InvalidWeight { index: 0, .. })
        ));
    }

    #[test]
    fn zero_weight_never_drawn() {
        let t = AliasTable::new(&[0.0, 3.0, 0.0, 1.0]).unwrap();
        let mut src = Xoshiro256pp::from_seed(5);
        for _ in 0..100_000 {
            let k = t.sample(src.next_u64(), src.next_u64());
            assert!(k == 1 || k == 3);
        }
    }

    proptest! {
        #[test]
        fn implied_distribution_matches_weights(weights in prop::collection::vec(0.0f64..10.0, 1..300)) {
            prop_assume!(weights.iter().any(|w| *w > 0.0));
            let t = AliasTable::new(&weights).unwrap();
            let total: f64 = weights.iter().sum();
            for (p, w) in t.implied_probabilities().iter().zip(&weights) {
                prop_assert!((p - w / total).abs() < 1e-12);
            }
            prop_assert!(t.prob().iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}
