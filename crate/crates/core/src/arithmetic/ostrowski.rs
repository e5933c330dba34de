//! Ostrowski numeration in the mixed radix of convergent denominators.

use super::cf::ContinuedFraction;
use crate::error::{Error, Result};

/// Greedy digits `b_0..b_s` with `N = Σ b_n q_n`. When `q_1 = q_0 = 1`
/// the duplicate position 1 is never used, so units always land in `b_0`.
pub fn ostrowski_digits(cf: &ContinuedFraction, n: u128) -> Result<Vec<u128>> {
    if n < 1 {
        return Err(Error::InvalidInput("N must be ≥ 1".into()));
    }
    let top = cf.certified_len;
    if n > cf.q[top] && !cf.terminated {
        return Err(Error::Uncertified(format!(
            "N = {n} exceeds the largest certified denominator {}",
            cf.q[top]
        )));
    }
    let dup = top >= 1 && cf.q[1] == cf.q[0];
    let s = (0..=top)
        .rev()
        .find(|&i| cf.q[i] <= n && !(i == 1 && dup))
        .expect("q_0 = 1 ≤ N");
    let mut digits = vec![0u128; s + 1];
    let mut rest = n;
    for i in (0..=s).rev() {
        if i == 1 && dup {
            continue;
        }
        digits[i] = rest / cf.q[i];
        rest %= cf.q[i];
    }
    debug_assert_eq!(rest, 0);
    Ok(digits)
}

pub fn reconstruct(cf: &ContinuedFraction, digits: &[u128]) -> u128 {
    digits.iter().zip(&cf.q).map(|(b, q)| b * q).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::cf::expand_cf;
    use crate::arithmetic::frequency::{Frequency, Rule};
    use proptest::prelude::*;

    #[test]
    fn golden_examples() {
        let cf = expand_cf(&Frequency::golden(), 1000).unwrap();
        assert_eq!(ostrowski_digits(&cf, 4).unwrap(), vec![1, 0, 0, 1]);
        assert_eq!(ostrowski_digits(&cf, 1).unwrap(), vec![1]);
        let d = ostrowski_digits(&cf, 21).unwrap();
        assert_eq!(d.iter().filter(|&&b| b != 0).count(), 1);
        assert_eq!(d[cf.index_of(21).unwrap()], 1);
        assert!(ostrowski_digits(&cf, 10_000).is_err());
    }

    fn digit_constraints(cf: &ContinuedFraction, d: &[u128]) -> bool {
        (1..d.len()).all(|n| {
            let ok = d[n] <= cf.a[n];
            let carry = d[n] < cf.a[n] || d[n - 1] == 0;
            ok && carry
        })
    }

    proptest! {
        #[test]
        fn round_trip(n in 1u128..100_000, which in 0usize..3) {
            let f = match which {
                0 => Frequency::golden(),
                1 => Frequency::silver(),
                _ => Frequency::rule(Rule::Linear),
            };
            let cf = expand_cf(&f, 1 << 40).unwrap();
            let d = ostrowski_digits(&cf, n).unwrap();
            prop_assert_eq!(reconstruct(&cf, &d), n);
            prop_assert!(digit_constraints(&cf, &d));
        }
    }
}
