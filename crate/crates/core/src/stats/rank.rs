use super::StatsError;

/// Ascending ranks, ties sharing the mean of their positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector(Vec<f64>);

impl RankVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for RankVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(StatsError::NonFiniteValue {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

pub fn average_ranks(values: &[f64]) -> Result<RankVector, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    check_finite(values)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end, 1-based
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    Ok(RankVector(ranks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 20.0, 30.0]).unwrap().as_slice(),
            &[1.0, 2.5, 2.5, 4.0]
        );
        assert_eq!(average_ranks(&[5.0]).unwrap().as_slice(), &[1.0]);
        assert_eq!(
            average_ranks(&[7.0, 7.0, 7.0]).unwrap().as_slice(),
            &[2.0, 2.0, 2.0]
        );
        assert_eq!(
            average_ranks(&[3.0, -1.0, 2.0]).unwrap().as_slice(),
            &[3.0, 1.0, 2.0]
        );
    }

    #[test]
    fn errors() {
        assert_eq!(average_ranks(&[]), Err(StatsError::EmptyInput));
        assert!(matches!(
            average_ranks(&[1.0, f64::NAN]),
            Err(StatsError::NonFiniteValue { index: 1, .. })
        ));
    }

    #[test]
    fn signed_zero_ties() {
        assert_eq!(
            average_ranks(&[0.0, -0.0, 1.0]).unwrap().as_slice(),
            &[1.5, 1.5, 3.0]
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rank_sum_is_exact(values in proptest::collection::vec(0i32..20, 1..300)) {
                let values: Vec<f64> = values.into_iter().map(f64::from).collect();
                let n = values.len() as f64;
                prop_assert_eq!(average_ranks(&values).unwrap().sum(), n * (n + 1.0) / 2.0);
            }

            #[test]
            fn untied_values_get_integer_ranks(values in proptest::collection::hash_set(-1000i32..1000, 1..100)) {
                let values: Vec<f64> = values.into_iter().map(f64::from).collect();
                let ranks = average_ranks(&values).unwrap();
                let mut sorted: Vec<f64> = ranks.as_slice().to_vec();
                sorted.sort_by(f64::total_cmp);
                for (i, r) in sorted.iter().enumerate() {
                    prop_assert_eq!(*r, (i + 1) as f64);
                }
            }
        }
    }
}
