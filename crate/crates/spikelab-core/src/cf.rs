//! Continued fractions with exact big-rational convergents.
//!
//! Exact errors |q_i alpha - p_i| are computed on demand (they share the
//! full-depth denominator and are only needed at shallow indices). The
//! log-domain error and denominator ladders are computed by stable ratio
//! recurrences in f64 and stay cheap at any depth.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Convergents p_i/q_i of a number alpha = [0; a_1, a_2, ...] in [0, 1),
/// with exact pairs and log-domain approximation errors.
///
/// When built from a quotient list the value alpha is the exact rational
/// [0; a_1, ..., a_L]; the final error is then zero.
#[derive(Clone, Debug)]
pub struct Convergents {
    quotients: Vec<BigInt>,
    /// (p_i, q_i), i = 1..=L
    pairs: Vec<(BigInt, BigInt)>,
    /// exact value of the (truncated) number
    value: Q,
    /// ln q_i
    ln_q: Vec<f64>,
    /// ln |q_i alpha - p_i| (NEG_INFINITY at the final index)
    ln_err: Vec<f64>,
}

impl Convergents {
    /// Build from positive partial quotients a_1, a_2, ....
    pub fn from_quotients(quotients: &[u64]) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::InsufficientDepth(
                "need at least one partial quotient".into(),
            ));
        }
        if quotients.contains(&0) {
            return Err(Error::InvalidInput("partial quotients must be >= 1".into()));
        }
        let big: Vec<BigInt> = quotients.iter().map(|&a| BigInt::from(a)).collect();
        Ok(Self::from_bigint_quotients(big))
    }

    fn from_bigint_quotients(quotients: Vec<BigInt>) -> Self {
        let mut pairs = Vec::with_capacity(quotients.len());
        let (mut p_prev, mut p) = (BigInt::one(), BigInt::zero());
        let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
        for a in &quotients {
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            pairs.push((p.clone(), q.clone()));
        }
        let value = Q::new(p.clone(), q.clone());
        let (ln_q, ln_err) = log_ladders(&quotients);
        Self {
            quotients,
            pairs,
            value,
            ln_q,
            ln_err,
        }
    }

    /// Continued fraction of a rational beta in [0, 1).
    pub fn of_rational(beta: &Q) -> Result<Self> {
        if beta.is_negative() || *beta >= Q::one() {
            return Err(Error::InvalidInput("beta must lie in [0, 1)".into()));
        }
        if beta.is_zero() {
            // represent 0 with a single synthetic convergent 0/1
            return Ok(Self {
                quotients: vec![],
                pairs: vec![(BigInt::zero(), BigInt::one())],
                value: Q::zero(),
                ln_q: vec![0.0],
                ln_err: vec![f64::NEG_INFINITY],
            });
        }
        // Euclid on (den, num): beta = 0 + 1/(den/num + ...)
        let mut quotients = Vec::new();
        let mut num = beta.denom().clone();
        let mut den = beta.numer().clone();
        while !den.is_zero() {
            let (quot, rem) = num.div_rem(&den);
            quotients.push(quot);
            num = std::mem::replace(&mut den, rem);
        }
        // canonical form: last quotient > 1 when length > 1
        if quotients.len() > 1 && quotients.last().unwrap().is_one() {
            quotients.pop();
            if let Some(l) = quotients.last_mut() {
                *l += 1;
            }
        }
        Ok(Self::from_bigint_quotients(quotients))
    }

    pub fn depth(&self) -> usize {
        self.pairs.len()
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    /// Exact truncated value.
    pub fn value(&self) -> &Q {
        &self.value
    }

    /// (p_i, q_i), 1-based index.
    pub fn pair(&self, i: usize) -> (&BigInt, &BigInt) {
        let (p, q) = &self.pairs[i - 1];
        (p, q)
    }

    pub fn denominator(&self, i: usize) -> &BigInt {
        &self.pairs[i - 1].1
    }

    /// Exact |q_i * alpha - p_i| (zero at the final index). Computed on
    /// demand; cheap at the shallow indices where exactness matters.
    pub fn error(&self, i: usize) -> Q {
        let (p, q) = &self.pairs[i - 1];
        Signed::abs(&(Q::from_integer(q.clone()) * &self.value - Q::from_integer(p.clone())))
    }

    /// ln q_i, 1-based.
    pub fn ln_denominator(&self, i: usize) -> f64 {
        self.ln_q[i - 1]
    }

    /// ln |q_i alpha - p_i|, 1-based (NEG_INFINITY at the final index).
    pub fn ln_error(&self, i: usize) -> f64 {
        self.ln_err[i - 1]
    }

    pub fn ln_denominators(&self) -> &[f64] {
        &self.ln_q
    }

    pub fn ln_errors(&self) -> &[f64] {
        &self.ln_err
    }

    pub fn denominators(&self) -> Vec<BigInt> {
        self.pairs.iter().map(|(_, q)| q.clone()).collect()
    }
}

/// Stable log ladders from the quotients alone.
///
/// q_i = a_i q_{i-1} + q_{i-2} gives the forward ratio recurrence
/// sigma_i = a_i + 1/sigma_{i-1}; the signed errors r_i = q_i alpha - p_i
/// satisfy -r_i / r_{i-1} = tau_{i+1} with tau_j = [0; a_j, ..., a_L]
/// computed by the backward recurrence tau_j = 1/(a_j + tau_{j+1}).
fn log_ladders(quotients: &[BigInt]) -> (Vec<f64>, Vec<f64>) {
    let n = quotients.len();
    let a: Vec<f64> = quotients
        .iter()
        .map(|q| q.to_f64().unwrap_or(f64::MAX))
        .collect();
    let mut ln_q = Vec::with_capacity(n);
    let mut sigma = 0.0f64; // sigma_0 conceptually infinite; handled below
    let mut acc = 0.0f64;
    for i in 0..n {
        let s = if i == 0 { a[0] } else { a[i] + 1.0 / sigma };
        sigma = s;
        acc += s.ln();
        ln_q.push(acc);
    }
    // backward tails
    let mut tau = vec![0.0f64; n + 1];
    for j in (0..n).rev() {
        tau[j] = 1.0 / (a[j] + tau[j + 1]);
    }
    let mut ln_err = Vec::with_capacity(n);
    // ln |r_i| = sum_{k=1}^{i+1} ln tau_k with tau_{L+1} = 0 making the
    // final error exactly zero
    let mut acc_e = tau[0].ln(); // ln |r_0| = ln alpha = ln tau_1
    for i in 0..n {
        acc_e += tau.get(i + 1).map_or(f64::NEG_INFINITY, |t| t.ln());
        ln_err.push(acc_e);
        if acc_e == f64::NEG_INFINITY {
            // remaining entries (if any) stay at zero error
            for _ in i + 1..n {
                ln_err.push(f64::NEG_INFINITY);
            }
            break;
        }
    }
    (ln_q, ln_err)
}

/// Generate partial quotients n_i = base^i (geometric growth; the stock
/// choice that makes threshold dips appear at desk scale).
pub fn geometric_quotients(base: u64, count: usize) -> Result<Vec<u64>> {
    if base < 2 {
        return Err(Error::InvalidInput("geometric base must be >= 2".into()));
    }
    let mut out = Vec::with_capacity(count);
    let mut v: u64 = 1;
    for _ in 0..count {
        v = v.checked_mul(base).ok_or_else(|| {
            Error::BudgetExceeded("geometric quotient overflows u64".into())
        })?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_recurrence() {
        // [0; 10, 100, 1000] -> q = (10, 1001, 1001010)
        let c = Convergents::from_quotients(&[10, 100, 1000]).unwrap();
        let qs: Vec<String> = c.denominators().iter().map(|q| q.to_string()).collect();
        assert_eq!(qs, vec!["10", "1001", "1001010"]);
    }

    #[test]
    fn fibonacci_from_ones() {
        let c = Convergents::from_quotients(&[1; 8]).unwrap();
        let qs: Vec<u64> = c
            .denominators()
            .iter()
            .map(|q| q.to_string().parse().unwrap())
            .collect();
        assert_eq!(qs, vec![1, 2, 3, 5, 8, 13, 21, 34]);
    }

    #[test]
    fn errors_shrink_and_terminate() {
        let c = Convergents::from_quotients(&[10, 100, 1000]).unwrap();
        // |q_i alpha - p_i| <= 1/q_{i+1}, with equality exactly at the
        // penultimate convergent of the truncation
        for i in 1..c.depth() {
            let bound = Q::new(BigInt::one(), c.denominator(i + 1).clone());
            assert!(c.error(i) <= bound, "error {i} too large");
        }
        assert!(c.error(c.depth()).is_zero());
        assert_eq!(c.ln_error(c.depth()), f64::NEG_INFINITY);
    }

    #[test]
    fn log_ladders_match_exact_values() {
        let c = Convergents::from_quotients(&[3, 7, 15, 1, 292, 2, 5]).unwrap();
        for i in 1..=c.depth() {
            let exact_q = crate::exact::ln_bigint(c.denominator(i));
            assert!(
                (c.ln_denominator(i) - exact_q).abs() < 1e-9,
                "ln q at {i}"
            );
            if i < c.depth() {
                let exact_e = crate::exact::q_ln_abs(&c.error(i));
                assert!(
                    (c.ln_error(i) - exact_e).abs() < 1e-9,
                    "ln err at {i}: {} vs {exact_e}",
                    c.ln_error(i)
                );
            }
        }
    }

    #[test]
    fn deep_ladder_is_fast_and_finite() {
        let quotients = vec![1u64; 5000];
        let c = Convergents::from_quotients(&quotients).unwrap();
        // Fibonacci growth: ln q_n ~ n ln phi
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let expect = 5000.0 * phi.ln();
        assert!((c.ln_denominator(5000) - expect).abs() / expect < 1e-3);
    }

    #[test]
    fn rational_round_trip() {
        let beta = Q::new(BigInt::from(618034), BigInt::from(1000000));
        let c = Convergents::of_rational(&beta).unwrap();
        assert_eq!(c.value(), &beta);
        // golden-like start: [0; 1, 1, 1, ...]
        assert!(c.quotients()[..4].iter().all(|a| a.is_one()));
    }

    #[test]
    fn zero_beta() {
        let c = Convergents::of_rational(&Q::zero()).unwrap();
        assert_eq!(c.depth(), 1);
        assert!(c.error(1).is_zero());
        assert_eq!(c.denominator(1), &BigInt::one());
    }

    #[test]
    fn geometric_growth() {
        assert_eq!(geometric_quotients(10, 3).unwrap(), vec![10, 100, 1000]);
        assert!(geometric_quotients(10, 30).is_err());
    }
}
