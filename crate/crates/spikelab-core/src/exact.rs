//! Exact 2-dimensional lattice machinery with log-domain flowed norms.
//!
//! The diagonal flow scales coordinates by e^{+-rt}, which no rational type
//! can represent. Everything here therefore keeps the unflowed coordinates
//! as exact big rationals and carries the flow factor symbolically: a
//! vector (x, y) at time t has components (e^{rt} x, e^{-rt} y), and all
//! norms and comparisons happen on (sign, ln) pairs. The only rounding is
//! the final f64 log arithmetic, good to ~1e-14 relative.
//!
//! Two evaluation routes are provided:
//! * a convergent ladder, which gives the shortest-vector norm of a
//!   canonicalized lattice at any time in O(log) after O(depth) setup;
//! * flowed Lagrange reduction plus certified closest-point enumeration,
//!   for grid offsets (sigma) at a single time.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cf::Convergents;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Norm};
use crate::util::{log_add_exp, SignedLog};

pub type Q = BigRational;

const LN_2: f64 = std::f64::consts::LN_2;

/// ln |n| for a big integer, robust to values far beyond f64 range.
pub fn ln_bigint(n: &BigInt) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap().abs().ln();
    }
    let shift = bits - 53;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * LN_2
}

/// ln |q| for a big rational.
pub fn q_ln_abs(q: &Q) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Best-effort f64 value of a rational (sign * e^ln for extreme ranges).
pub fn q_to_f64(q: &Q) -> f64 {
    if let Some(x) = q.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    let s = if q.is_negative() { -1.0 } else { 1.0 };
    s * q_ln_abs(q).exp()
}

/// Nearest integer of a rational (ties away from zero).
pub fn q_round(q: &Q) -> BigInt {
    q.round().to_integer()
}

pub fn q_floor_int(q: &Q) -> BigInt {
    q.floor().to_integer()
}

pub fn q_ceil_int(q: &Q) -> BigInt {
    q.ceil().to_integer()
}

pub fn q_signed_log(q: &Q) -> SignedLog {
    if q.is_zero() {
        SignedLog::ZERO
    } else {
        SignedLog::new(if q.is_negative() { -1 } else { 1 }, q_ln_abs(q))
    }
}

/// Round a signed log-domain value to the nearest big integer
/// (approximately, to f64 log precision; exactness is not required where
/// this is used, a unit error only slows Lagrange reduction by one step).
fn signed_log_round_bigint(s: SignedLog) -> BigInt {
    if s.sign == 0 || s.ln_abs < -LN_2 {
        return BigInt::zero();
    }
    if s.ln_abs <= 62.0 * LN_2 {
        return BigInt::from((s.sign as f64 * s.ln_abs.exp()).round() as i64);
    }
    let k = (s.ln_abs / LN_2) as u64 - 52;
    let mant = (s.ln_abs - k as f64 * LN_2).exp().round() as i64;
    BigInt::from(s.sign as i64 * mant) << k
}

/// Unflowed exact 2D vector; the flow factor is applied symbolically.
#[derive(Clone, Debug, PartialEq)]
pub struct Vec2Q {
    pub x: Q,
    pub y: Q,
}

impl Vec2Q {
    pub fn new(x: Q, y: Q) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(Q::zero(), Q::zero())
    }

    pub fn sub(&self, o: &Vec2Q) -> Vec2Q {
        Vec2Q::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn add(&self, o: &Vec2Q) -> Vec2Q {
        Vec2Q::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn scale_int(&self, k: &BigInt) -> Vec2Q {
        let kq = Q::from_integer(k.clone());
        Vec2Q::new(&self.x * &kq, &self.y * &kq)
    }

    /// ln of the sup norm of (e^{rt} x, e^{-rt} y).
    pub fn sup_ln(&self, rate: f64, t: f64) -> f64 {
        let a = rate * t + q_ln_abs(&self.x);
        let b = -rate * t + q_ln_abs(&self.y);
        a.max(b)
    }

    /// ln of the squared Euclidean norm of the flowed vector.
    pub fn euclid_sq_ln(&self, rate: f64, t: f64) -> f64 {
        let a = 2.0 * (rate * t + q_ln_abs(&self.x));
        let b = 2.0 * (-rate * t + q_ln_abs(&self.y));
        log_add_exp(a, b)
    }

    pub fn norm_ln(&self, rate: f64, t: f64, norm: Norm) -> f64 {
        match norm {
            Norm::Sup => self.sup_ln(rate, t),
            Norm::Euclidean => 0.5 * self.euclid_sq_ln(rate, t),
        }
    }
}

/// Flowed inner product <a_t u, a_t v> as a signed log value.
fn flowed_dot(u: &Vec2Q, v: &Vec2Q, rate: f64, t: f64) -> SignedLog {
    let xs = q_signed_log(&u.x).mul(q_signed_log(&v.x));
    let ys = q_signed_log(&u.y).mul(q_signed_log(&v.y));
    let xt = SignedLog::new(xs.sign, xs.ln_abs + 2.0 * rate * t);
    let yt = SignedLog::new(ys.sign, ys.ln_abs - 2.0 * rate * t);
    xt.add(yt)
}

/// Lagrange-reduce the flowed basis at time t. Exact integer column
/// operations; only the size-reduction coefficient is estimated in log
/// domain (a unit error there costs one extra iteration, not correctness).
pub fn reduce_flowed(b1: &Vec2Q, b2: &Vec2Q, rate: f64, t: f64) -> (Vec2Q, Vec2Q) {
    let mut u = b1.clone();
    let mut v = b2.clone();
    if v.euclid_sq_ln(rate, t) < u.euclid_sq_ln(rate, t) {
        std::mem::swap(&mut u, &mut v);
    }
    for _ in 0..96 {
        let num = flowed_dot(&u, &v, rate, t);
        let den = flowed_dot(&u, &u, rate, t);
        let mu = SignedLog::new(num.sign * den.sign, num.ln_abs - den.ln_abs);
        let k = signed_log_round_bigint(mu);
        if !k.is_zero() {
            v = v.sub(&u.scale_int(&k));
        }
        if v.euclid_sq_ln(rate, t) < u.euclid_sq_ln(rate, t) {
            std::mem::swap(&mut u, &mut v);
        } else {
            break;
        }
    }
    (u, v)
}

/// Exact canonical form of a rational 2D lattice: column span of
/// (h, 0) and (u, w) with h, w > 0 and 0 <= u < h. Lattice points are
/// (m h + n u, n w). The convergent ladder of beta = u/h yields shortest
/// flowed vectors at every time.
#[derive(Clone, Debug)]
pub struct ExactLattice2 {
    h: Q,
    u: Q,
    w: Q,
    ladder: Convergents,
    ln_h: f64,
    ln_w: f64,
    /// per-entry logs: ln q_i and ln (h * delta_i)
    ln_q: Vec<f64>,
    ln_err: Vec<f64>,
}

/// Which vector attains the shortest flowed norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Governing {
    /// the horizontal vector (h, 0)
    Horizontal,
    /// ladder entry index (1-based convergent index)
    Entry(usize),
}

impl ExactLattice2 {
    pub fn from_columns(c1: Vec2Q, c2: Vec2Q) -> Result<Self> {
        // zero out the y component of one column by exact integer column ops
        let mut a = c1;
        let mut b = c2;
        // truncated division leaves |a.y| < |b.y|, so this terminates
        while !a.y.is_zero() && !b.y.is_zero() {
            if Signed::abs(&a.y) >= Signed::abs(&b.y) {
                let k = (&a.y / &b.y).trunc().to_integer();
                a = a.sub(&b.scale_int(&k));
            } else {
                std::mem::swap(&mut a, &mut b);
            }
        }
        let (mut hcol, mut gcol) = if a.y.is_zero() { (a, b) } else { (b, a) };
        if hcol.x.is_zero() || gcol.y.is_zero() {
            return Err(Error::SingularBasis { det: 0.0 });
        }
        if hcol.x.is_negative() {
            hcol = Vec2Q::new(-hcol.x, -hcol.y);
        }
        if gcol.y.is_negative() {
            gcol = Vec2Q::new(-gcol.x, -gcol.y);
        }
        let h = hcol.x;
        let w = gcol.y;
        let mut u = gcol.x;
        let k = q_floor_int(&(&u / &h));
        u = &u - &(Q::from_integer(k) * &h);
        let beta = &u / &h;
        let ladder = Convergents::of_rational(&beta)?;
        let ln_h = q_ln_abs(&h);
        let ln_w = q_ln_abs(&w);
        let ln_q: Vec<f64> = ladder.ln_denominators().to_vec();
        let ln_err: Vec<f64> = ladder.ln_errors().iter().map(|e| ln_h + e).collect();
        Ok(Self {
            h,
            u,
            w,
            ladder,
            ln_h,
            ln_w,
            ln_q,
            ln_err,
        })
    }

    /// Canonicalize any 2D lattice; float bases are lifted exactly
    /// (every finite f64 is a dyadic rational).
    pub fn from_lattice(lattice: &Lattice) -> Result<Self> {
        if lattice.dim() != 2 {
            return Err(Error::DimensionUnsupported {
                d: lattice.dim(),
                max: 2,
            });
        }
        let cols: Vec<Vec<Q>> = match lattice.rational_basis() {
            Some(cols) => cols.to_vec(),
            None => lattice
                .basis()
                .iter()
                .map(|c| c.iter().map(|x| crate::lattice::exact_from_f64(*x)).collect())
                .collect(),
        };
        Self::from_columns(
            Vec2Q::new(cols[0][0].clone(), cols[0][1].clone()),
            Vec2Q::new(cols[1][0].clone(), cols[1][1].clone()),
        )
    }

    /// The lattice of the vector alpha given by its convergents:
    /// span of (1, 0) and (alpha, 1).
    pub fn from_convergents(c: &Convergents) -> Self {
        let alpha = c.value().clone();
        Self {
            h: Q::one(),
            u: alpha,
            w: Q::one(),
            ln_h: 0.0,
            ln_w: 0.0,
            ln_q: c.ln_denominators().to_vec(),
            ln_err: c.ln_errors().to_vec(),
            ladder: c.clone(),
        }
    }

    pub fn canonical_basis(&self) -> (Vec2Q, Vec2Q) {
        (
            Vec2Q::new(self.h.clone(), Q::zero()),
            Vec2Q::new(self.u.clone(), self.w.clone()),
        )
    }

    pub fn ladder(&self) -> &Convergents {
        &self.ladder
    }

    pub fn det(&self) -> Q {
        &self.h * &self.w
    }

    /// The exact lattice vector of a ladder entry: (+-h delta_i, q_i w).
    pub fn entry_vector(&self, i: usize) -> Vec2Q {
        let (p, q) = self.ladder.pair(i);
        let qq = Q::from_integer(q.clone());
        let x = &qq * &self.u - Q::from_integer(p.clone()) * &self.h;
        Vec2Q::new(x, qq * &self.w)
    }

    pub fn governing_vector(&self, g: Governing) -> Vec2Q {
        match g {
            Governing::Horizontal => Vec2Q::new(self.h.clone(), Q::zero()),
            Governing::Entry(i) => self.entry_vector(i),
        }
    }

    fn entry_val(&self, i0: usize, rate: f64, t: f64) -> f64 {
        let a = rate * t + self.ln_err[i0];
        let b = -rate * t + self.ln_q[i0] + self.ln_w;
        a.max(b)
    }

    /// ln lambda1 of the flowed lattice under diag(e^{rt}, e^{-rt}),
    /// with the attaining vector.
    ///
    /// Valid for any t (positive or negative, arbitrarily large): the
    /// shortest flowed vector is always the horizontal one or a ladder
    /// entry, by the best-approximation property of convergents.
    pub fn lambda1_sup_ln_governing(&self, rate: f64, t: f64) -> (f64, Governing) {
        let mut best = rate * t + self.ln_h;
        let mut who = Governing::Horizontal;
        let n = self.ln_q.len();
        // B_i - A_i = -2rt + ln(q_i w) - ln(h delta_i) is increasing in i;
        // the minimum of max(A_i, B_i) sits at the sign change.
        let below = |i: usize| -> bool {
            (-rate * t + self.ln_q[i] + self.ln_w) < (rate * t + self.ln_err[i])
        };
        let (mut lo_b, mut hi_b) = (0usize, n);
        while lo_b < hi_b {
            let mid = (lo_b + hi_b) / 2;
            if below(mid) {
                lo_b = mid + 1;
            } else {
                hi_b = mid;
            }
        }
        let cross = lo_b;
        let lo = cross.saturating_sub(2);
        let hi = (cross + 2).min(n);
        for i0 in lo..hi {
            let v = self.entry_val(i0, rate, t);
            if v < best {
                best = v;
                who = Governing::Entry(i0 + 1);
            }
        }
        // the final entry has delta = 0; it governs for large t
        if n > 0 {
            let v = self.entry_val(n - 1, rate, t);
            if v < best {
                best = v;
                who = Governing::Entry(n);
            }
        }
        (best, who)
    }

    pub fn lambda1_sup_ln(&self, rate: f64, t: f64) -> f64 {
        self.lambda1_sup_ln_governing(rate, t).0
    }

    pub fn lambda1_sup(&self, rate: f64, t: f64) -> f64 {
        self.lambda1_sup_ln(rate, t).exp()
    }

    /// Open time windows where one lattice vector has flowed sup norm
    /// below the threshold, i.e. where lambda1 < theta. Unioning them over
    /// all ladder entries gives the exact sub-threshold set.
    pub fn sub_threshold_windows(&self, rate: f64, ln_theta: f64) -> Vec<ThresholdWindow> {
        let mut out = Vec::new();
        // horizontal vector (h, 0): e^{rt} h < theta
        let hi = (ln_theta - self.ln_h) / rate;
        if hi > f64::NEG_INFINITY {
            out.push(ThresholdWindow {
                lo: f64::NEG_INFINITY,
                hi,
                governing: Governing::Horizontal,
            });
        }
        for i0 in 0..self.ln_q.len() {
            let lo = (self.ln_q[i0] + self.ln_w - ln_theta) / rate;
            let hi = if self.ln_err[i0] == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                (ln_theta - self.ln_err[i0]) / rate
            };
            if lo < hi {
                out.push(ThresholdWindow {
                    lo,
                    hi,
                    governing: Governing::Entry(i0 + 1),
                });
            }
        }
        out
    }

    /// ln of the time horizon up to which the ladder is faithful to the
    /// underlying (possibly truncated) number: past the final convergent
    /// the lattice behaves as the rational truncation.
    pub fn faithful_ln_horizon(&self) -> f64 {
        match self.ln_q.len() {
            0 => f64::INFINITY,
            n => self.ln_q[n - 1],
        }
    }

    /// sigma: ln of the norm of the shortest point of the flowed grid
    /// (lattice + offset), by flowed reduction plus certified enumeration.
    pub fn sigma_ln(&self, offset: &Vec2Q, rate: f64, t: f64, norm: Norm) -> Result<f64> {
        Ok(self.sigma_ln_vector(offset, rate, t, norm)?.0)
    }

    /// sigma, certified only below the cap: the returned value is exact
    /// when it is below `cap_ln`; otherwise it merely certifies that no
    /// grid point has log-norm below `cap_ln`. Keeps the enumeration
    /// window small when the flowed lattice is long and thin.
    pub fn sigma_ln_capped(
        &self,
        offset: &Vec2Q,
        rate: f64,
        t: f64,
        norm: Norm,
        cap_ln: f64,
    ) -> Result<f64> {
        Ok(self.sigma_impl(offset, rate, t, norm, cap_ln)?.0)
    }

    /// sigma with the attaining grid point (exact unflowed coordinates).
    pub fn sigma_ln_vector(
        &self,
        offset: &Vec2Q,
        rate: f64,
        t: f64,
        norm: Norm,
    ) -> Result<(f64, Vec2Q)> {
        self.sigma_impl(offset, rate, t, norm, f64::INFINITY)
    }

    fn sigma_impl(
        &self,
        offset: &Vec2Q,
        rate: f64,
        t: f64,
        norm: Norm,
        cap_ln: f64,
    ) -> Result<(f64, Vec2Q)> {
        let (b1, b2) = self.canonical_basis();
        let (r1, r2) = reduce_flowed(&b1, &b2, rate, t);
        let det = &r1.x * &r2.y - &r2.x * &r1.y;
        if det.is_zero() {
            return Err(Error::SingularBasis { det: 0.0 });
        }
        // exact Babai coefficients of -offset in the (flow-invariant) basis
        let tx = -offset.x.clone();
        let ty = -offset.y.clone();
        let c1 = (&tx * &r2.y - &ty * &r2.x) / &det;
        let c2 = (&r1.x * &ty - &r1.y * &tx) / &det;
        let k1 = q_round(&c1);
        let k2 = q_round(&c2);
        let cand = r1.scale_int(&k1).add(&r2.scale_int(&k2)).add(offset);
        let mut best_ln = cand.norm_ln(rate, t, norm);
        let mut best_vec = cand;
        // certified window: any grid point with Euclidean flowed norm <= U
        // has coefficients within row-norm * U of the Babai solution. The
        // cap shrinks U when only values below it matter.
        let u_ln = match norm {
            Norm::Euclidean => best_ln.min(cap_ln),
            // sup ball of radius s sits inside the Euclidean ball sqrt(2) s
            Norm::Sup => best_ln.min(cap_ln) + 0.5 * LN_2,
        };
        let ln_det = q_ln_abs(&det);
        // rows of the flowed inverse basis
        let row1_ln = 0.5
            * log_add_exp(
                2.0 * (-rate * t + q_ln_abs(&r2.y)),
                2.0 * (rate * t + q_ln_abs(&r2.x)),
            )
            - ln_det;
        let row2_ln = 0.5
            * log_add_exp(
                2.0 * (-rate * t + q_ln_abs(&r1.y)),
                2.0 * (rate * t + q_ln_abs(&r1.x)),
            )
            - ln_det;
        let bound = |row_ln: f64| -> Result<i64> {
            let b = (u_ln + row_ln).exp();
            if !b.is_finite() || b > 2e5 {
                return Err(Error::BudgetExceeded(format!(
                    "flowed enumeration window too large ({b:e})"
                )));
            }
            Ok(b.floor() as i64 + 1)
        };
        let w1 = bound(row1_ln)?;
        let w2 = bound(row2_ln)?;
        // Per transverse coefficient d2, the flowed norm along d1 is the
        // max (or sum of squares) of two |linear| functions of d1, hence
        // convex: the integer minimizer is adjacent to one of the few real
        // critical points (component zeros, component crossings, window
        // ends). Evaluate only those candidates, exactly.
        let scale_x = (rate * t).exp();
        let scale_y = (-rate * t).exp();
        let dir_x = q_to_f64(&r1.x) * scale_x;
        let dir_y = q_to_f64(&r1.y) * scale_y;
        for d2 in -w2..=w2 {
            let c2 = &k2 + BigInt::from(d2);
            let base = r1.scale_int(&k1).add(&r2.scale_int(&c2)).add(offset);
            let base_x = q_to_f64(&base.x) * scale_x;
            let base_y = q_to_f64(&base.y) * scale_y;
            let mut criticals: Vec<f64> = Vec::with_capacity(6);
            if dir_x != 0.0 {
                criticals.push(-base_x / dir_x);
            }
            if dir_y != 0.0 {
                criticals.push(-base_y / dir_y);
            }
            // crossings |x(d)| = |y(d)| of the two components
            let den_a = dir_x - dir_y;
            if den_a != 0.0 {
                criticals.push((base_y - base_x) / den_a);
            }
            let den_b = dir_x + dir_y;
            if den_b != 0.0 {
                criticals.push((-base_y - base_x) / den_b);
            }
            // parabola vertex, the Euclidean minimizer
            let denom = dir_x * dir_x + dir_y * dir_y;
            if denom > 0.0 {
                criticals.push(-(base_x * dir_x + base_y * dir_y) / denom);
            }
            criticals.push(-(w1 as f64));
            criticals.push(w1 as f64);
            let mut tried: Vec<i64> = Vec::with_capacity(criticals.len() * 3);
            for c in criticals {
                if !c.is_finite() {
                    continue;
                }
                let center = c.round() as i64;
                for d1 in center - 1..=center + 1 {
                    let d1 = d1.clamp(-w1, w1);
                    if tried.contains(&d1) {
                        continue;
                    }
                    tried.push(d1);
                    let c1 = &k1 + BigInt::from(d1);
                    let p = r1.scale_int(&c1).add(&r2.scale_int(&c2)).add(offset);
                    let ln = p.norm_ln(rate, t, norm);
                    if ln < best_ln {
                        best_ln = ln;
                        best_vec = p;
                    }
                }
            }
        }
        Ok((best_ln, best_vec))
    }
}

/// Open time window where a single lattice vector stays below a norm
/// threshold under the flow.
#[derive(Clone, Debug)]
pub struct ThresholdWindow {
    pub lo: f64,
    pub hi: f64,
    pub governing: Governing,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowSpec;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ln_bigint_large() {
        let n = BigInt::from(10u32).pow(100);
        assert!((ln_bigint(&n) - 100.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn canonical_form_of_standard() {
        let l = ExactLattice2::from_lattice(&Lattice::standard(2)).unwrap();
        assert_eq!(l.h, Q::one());
        assert_eq!(l.w, Q::one());
        assert!(l.u.is_zero());
    }

    #[test]
    fn canonical_form_survives_shear_and_swap() {
        // columns (3, 2), (4, 3): det = 1
        let lat = Lattice::from_rational_basis(vec![
            vec![q(3, 1), q(2, 1)],
            vec![q(4, 1), q(3, 1)],
        ])
        .unwrap();
        let l = ExactLattice2::from_lattice(&lat).unwrap();
        assert_eq!(l.det(), Q::one());
        // the canonical lattice must contain the original columns
        // (m h + n u, n w) = (3, 2) for some integers: n = 2/w
        let n = &q(2, 1) / &l.w;
        assert!(n.is_integer());
    }

    #[test]
    fn ladder_lambda1_matches_enumeration() {
        // x_v with v = 5/8, flowed by t in [0, 3]
        let lat = Lattice::from_vector_rational(&[q(5, 8)]);
        let ex = ExactLattice2::from_lattice(&lat).unwrap();
        let flow = FlowSpec::standard_2d();
        for k in 0..=30 {
            let t = k as f64 * 0.1;
            let flowed = lat.flow(&flow, t).unwrap();
            let direct = flowed.lambda1(Norm::Sup).unwrap();
            let ladder = ex.lambda1_sup(1.0, t);
            assert!(
                (direct - ladder).abs() < 1e-9 * direct.max(1e-300),
                "t={t}: direct {direct} vs ladder {ladder}"
            );
        }
    }

    #[test]
    fn ladder_handles_deep_time() {
        // Z^2: lambda1(a_t) = e^{-t} exactly, at any depth
        let ex = ExactLattice2::from_lattice(&Lattice::standard(2)).unwrap();
        let ln = ex.lambda1_sup_ln(1.0, 500.0);
        assert!((ln + 500.0).abs() < 1e-9);
    }

    #[test]
    fn sigma_matches_float_enumeration() {
        let lat = Lattice::from_vector_rational(&[q(5, 8)]);
        let ex = ExactLattice2::from_lattice(&lat).unwrap();
        let off = Vec2Q::new(q(1, 3), q(1, 7));
        let flow = FlowSpec::standard_2d();
        for k in 0..=12 {
            let t = k as f64 * 0.25;
            let flowed_grid = lat
                .flow(&flow, t)
                .unwrap()
                .grid(vec![
                    q_to_f64(&off.x) * (t).exp(),
                    q_to_f64(&off.y) * (-t).exp(),
                ])
                .unwrap();
            let direct = flowed_grid.sigma(Norm::Sup).unwrap();
            let exact = ex.sigma_ln(&off, 1.0, t, Norm::Sup).unwrap().exp();
            assert!(
                (direct - exact).abs() < 1e-8 * direct.max(1e-10),
                "t={t}: {direct} vs {exact}"
            );
        }
    }

    #[test]
    fn sigma_zero_offset_is_lambda1() {
        let lat = Lattice::from_vector_rational(&[q(5, 8)]);
        let ex = ExactLattice2::from_lattice(&lat).unwrap();
        // offset on the lattice: shortest grid point is the origin
        let off = Vec2Q::new(q(5, 8), Q::one());
        let s = ex.sigma_ln(&off, 1.0, 1.5, Norm::Sup).unwrap();
        assert_eq!(s, f64::NEG_INFINITY);
    }

    #[test]
    fn windows_partition_the_dip() {
        // alpha = [0; 10, 100]: strong dip below 1/10 after t = ln(100)
        let conv = Convergents::from_quotients(&[10, 100, 1000]).unwrap();
        let ex = ExactLattice2::from_convergents(&conv);
        let windows = ex.sub_threshold_windows(1.0, (0.1f64).ln());
        // there is a window for the first convergent
        let w1 = windows
            .iter()
            .find(|w| matches!(w.governing, Governing::Entry(1)))
            .expect("first convergent dips");
        assert!((w1.lo - 100f64.ln()).abs() < 1e-9);
        // inside the window lambda1 < 1/10, outside >= 1/10
        let mid = 0.5 * (w1.lo + w1.hi);
        assert!(ex.lambda1_sup(1.0, mid) < 0.1);
        assert!(ex.lambda1_sup(1.0, w1.lo - 0.01) >= 0.1 - 1e-12);
    }
}
