//! Unimodular lattices and their grids (cosets), with shortest-vector and
//! closest-point computations by certified enumeration.
//!
//! A lattice carries a float64 basis and, when constructed from rational
//! data, an exact big-rational mirror. Shortest vectors in dimension 2 go
//! through Lagrange reduction; dimensions 3 and 4 use brute-force
//! enumeration over a coefficient box certified by the inverse basis.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::flow::FlowSpec;

pub type Q = BigRational;

/// Norm used for shortest-vector style computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Sup,
    Euclidean,
}

/// Scalar abstraction: exact rationals or float64, same algorithms.
pub trait Entry: Clone + PartialOrd + std::fmt::Debug {
    const EXACT: bool;
    fn zero_val() -> Self;
    fn one_val() -> Self;
    fn of_i64(n: i64) -> Self;
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn div_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn abs_val(&self) -> Self;
    fn is_zero_val(&self) -> bool;
    fn as_f64(&self) -> f64;
    /// Nearest integer (ties toward even are fine; only used for Babai
    /// rounding where a one-off error is absorbed by the search window).
    fn round_i64(&self) -> i64;
}

impl Entry for f64 {
    const EXACT: bool = false;
    fn zero_val() -> Self {
        0.0
    }
    fn one_val() -> Self {
        1.0
    }
    fn of_i64(n: i64) -> Self {
        n as f64
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn abs_val(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero_val(&self) -> bool {
        *self == 0.0
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn round_i64(&self) -> i64 {
        self.round() as i64
    }
}

impl Entry for Q {
    const EXACT: bool = true;
    fn zero_val() -> Self {
        Q::zero()
    }
    fn one_val() -> Self {
        Q::one()
    }
    fn of_i64(n: i64) -> Self {
        Q::from_integer(BigInt::from(n))
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ref(&self, o: &Self) -> Self {
        self / o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero_val(&self) -> bool {
        Zero::is_zero(self)
    }
    fn as_f64(&self) -> f64 {
        crate::exact::q_to_f64(self)
    }
    fn round_i64(&self) -> i64 {
        crate::exact::q_round(self)
            .try_into()
            .unwrap_or(if self.is_negative() { i64::MIN } else { i64::MAX })
    }
}

// ---------------------------------------------------------------------------
// small dense linear algebra over Entry (columns-of-vectors layout)
// ---------------------------------------------------------------------------

fn det_cols<E: Entry>(cols: &[Vec<E>]) -> E {
    let d = cols.len();
    match d {
        1 => cols[0][0].clone(),
        2 => cols[0][0].mul_ref(&cols[1][1]).sub_ref(&cols[1][0].mul_ref(&cols[0][1])),
        _ => {
            // Laplace expansion along the first row; d <= 4 keeps this cheap.
            let mut acc = E::zero_val();
            for (j, col) in cols.iter().enumerate() {
                let minor: Vec<Vec<E>> = cols
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, c)| c[1..].to_vec())
                    .collect();
                let term = col[0].mul_ref(&det_cols(&minor));
                acc = if j % 2 == 0 { acc.add_ref(&term) } else { acc.sub_ref(&term) };
            }
            acc
        }
    }
}

/// Inverse as rows: inv[i] is the i-th row of B^{-1}, so that the coefficient
/// vector of a point p is c_i = <inv[i], p>.
fn inverse_rows<E: Entry>(cols: &[Vec<E>]) -> Result<Vec<Vec<E>>> {
    let d = cols.len();
    let det = det_cols(cols);
    if det.is_zero_val() || (!E::EXACT && det.as_f64().abs() < 1e-14) {
        return Err(Error::SingularBasis { det: det.as_f64() });
    }
    // adjugate / det, via cofactors
    let mut inv = vec![vec![E::zero_val(); d]; d];
    #[allow(clippy::needless_range_loop)]
    for i in 0..d {
        for j in 0..d {
            // cofactor C_{j,i} for the (i,j) entry of the inverse
            let minor: Vec<Vec<E>> = cols
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, c)| {
                    c.iter()
                        .enumerate()
                        .filter(|(r, _)| *r != j)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let mut cof = if minor.is_empty() { E::one_val() } else { det_cols(&minor) };
            if (i + j) % 2 == 1 {
                cof = cof.neg_ref();
            }
            inv[i][j] = cof.div_ref(&det);
        }
    }
    Ok(inv)
}

fn mat_vec<E: Entry>(cols: &[Vec<E>], c: &[i64]) -> Vec<E> {
    let d = cols[0].len();
    let mut out = vec![E::zero_val(); d];
    for (j, col) in cols.iter().enumerate() {
        if c[j] == 0 {
            continue;
        }
        let cj = E::of_i64(c[j]);
        for (r, x) in col.iter().enumerate() {
            out[r] = out[r].add_ref(&cj.mul_ref(x));
        }
    }
    out
}

fn norm_key<E: Entry>(v: &[E], norm: Norm) -> E {
    match norm {
        Norm::Sup => {
            let mut m = E::zero_val();
            for x in v {
                let a = x.abs_val();
                if a > m {
                    m = a;
                }
            }
            m
        }
        Norm::Euclidean => {
            // squared norm: monotone key, exact for rationals
            let mut s = E::zero_val();
            for x in v {
                s = s.add_ref(&x.mul_ref(x));
            }
            s
        }
    }
}

// ---------------------------------------------------------------------------
// Lagrange (Gauss) reduction in dimension 2
// ---------------------------------------------------------------------------

fn dot<E: Entry>(a: &[E], b: &[E]) -> E {
    let mut s = E::zero_val();
    for (x, y) in a.iter().zip(b) {
        s = s.add_ref(&x.mul_ref(y));
    }
    s
}

/// Lagrange-reduce a 2D basis. The first returned vector attains the
/// Euclidean shortest norm of the lattice.
fn gauss_reduce_cols<E: Entry>(cols: &[Vec<E>]) -> Result<Vec<Vec<E>>> {
    let det = det_cols(cols);
    if det.is_zero_val() || (!E::EXACT && det.as_f64().abs() < 1e-14) {
        return Err(Error::SingularBasis { det: det.as_f64() });
    }
    let mut b1 = cols[0].clone();
    let mut b2 = cols[1].clone();
    if dot(&b2, &b2) < dot(&b1, &b1) {
        std::mem::swap(&mut b1, &mut b2);
    }
    for _ in 0..128 {
        let mu = dot(&b1, &b2).div_ref(&dot(&b1, &b1));
        let m = mu.round_i64();
        if m != 0 {
            let me = E::of_i64(m);
            for r in 0..b2.len() {
                b2[r] = b2[r].sub_ref(&me.mul_ref(&b1[r]));
            }
        }
        if dot(&b2, &b2) < dot(&b1, &b1) {
            std::mem::swap(&mut b1, &mut b2);
        } else {
            break;
        }
    }
    Ok(vec![b1, b2])
}

/// Lagrange-Gauss reduction of a 2x2 float basis given by columns.
/// The output spans the same lattice and its first column is a Euclidean
/// shortest vector.
pub fn gauss_reduce(basis: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let cols = vec![basis[0].to_vec(), basis[1].to_vec()];
    let red = gauss_reduce_cols(&cols)?;
    Ok([[red[0][0], red[0][1]], [red[1][0], red[1][1]]])
}

// ---------------------------------------------------------------------------
// shortest vector / closest point by certified enumeration
// ---------------------------------------------------------------------------

const ENUM_BUDGET: f64 = 1e7;

/// All nonzero coefficient vectors in the box [-k, k]^2.
fn shortest_2d<E: Entry>(cols: &[Vec<E>], norm: Norm) -> Result<(E, Vec<i64>)> {
    let red = gauss_reduce_cols(cols)?;
    // For the sup norm the shortest vector still has bounded coefficients
    // over the reduced basis; |i|, |j| <= 2 is safe.
    let mut best: Option<(E, Vec<i64>)> = None;
    for i in -2i64..=2 {
        for j in -2i64..=2 {
            if i == 0 && j == 0 {
                continue;
            }
            let v = mat_vec(&red, &[i, j]);
            let key = norm_key(&v, norm);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, vec![i, j]));
            }
        }
    }
    let (key, red_coeffs) = best.unwrap();
    // translate coefficients back to the original basis
    let inv = inverse_rows(cols)?;
    let v = mat_vec(&red, &red_coeffs);
    let coeffs: Vec<i64> = inv.iter().map(|row| dot(row, &v).round_i64()).collect();
    Ok((key, coeffs))
}

/// Coefficient bound for vectors of norm <= radius: |c_i| <= |row_i(B^-1)|_1 * radius
/// for the sup norm (Hoelder), with a Euclidean variant.
fn coeff_bounds<E: Entry>(inv: &[Vec<E>], radius: f64, norm: Norm) -> Vec<i64> {
    inv.iter()
        .map(|row| {
            let b = match norm {
                Norm::Sup => row.iter().map(|x| x.as_f64().abs()).sum::<f64>() * radius,
                Norm::Euclidean => {
                    let n2: f64 = row.iter().map(|x| x.as_f64().powi(2)).sum();
                    n2.sqrt() * radius
                }
            };
            (b * (1.0 + 1e-9)).floor() as i64
        })
        .collect()
}

fn enumerate_box(bounds: &[i64]) -> Result<Vec<Vec<i64>>> {
    let cells: f64 = bounds.iter().map(|b| (2 * b + 1) as f64).product();
    if cells > ENUM_BUDGET {
        return Err(Error::EnumerationTooLarge {
            cells,
            budget: ENUM_BUDGET,
        });
    }
    let mut out = Vec::with_capacity(cells as usize);
    let d = bounds.len();
    let mut c = bounds.iter().map(|b| -b).collect::<Vec<i64>>();
    loop {
        out.push(c.clone());
        let mut k = 0;
        loop {
            c[k] += 1;
            if c[k] <= bounds[k] {
                break;
            }
            c[k] = -bounds[k];
            k += 1;
            if k == d {
                return Ok(out);
            }
        }
    }
}

/// Pairwise size reduction: sweep column pairs subtracting rounded
/// Gram projections until stable. Shrinks the certified enumeration
/// boxes on skewed bases; the span is unchanged.
fn size_reduce_cols<E: Entry>(cols: &[Vec<E>]) -> Vec<Vec<E>> {
    let d = cols.len();
    let mut red = cols.to_vec();
    for _ in 0..16 {
        let mut changed = false;
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let den = dot(&red[i], &red[i]);
                if den.is_zero_val() {
                    continue;
                }
                let mu = dot(&red[i], &red[j]).div_ref(&den);
                let m = mu.round_i64();
                if m != 0 {
                    let me = E::of_i64(m);
                    let pivot = red[i].clone();
                    for (x, p) in red[j].iter_mut().zip(&pivot) {
                        *x = x.sub_ref(&me.mul_ref(p));
                    }
                    changed = true;
                }
            }
        }
        // keep shorter columns first so projections stay small
        red.sort_by(|a, b| {
            dot(a, a)
                .partial_cmp(&dot(b, b))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if !changed {
            break;
        }
    }
    red
}

/// Integer coefficients of the vector v over the basis columns.
fn coeffs_in_basis<E: Entry>(cols: &[Vec<E>], v: &[E]) -> Result<Vec<i64>> {
    let inv = inverse_rows(cols)?;
    Ok(inv.iter().map(|row| dot(row, v).round_i64()).collect())
}

fn shortest_nd<E: Entry>(cols: &[Vec<E>], norm: Norm) -> Result<(E, Vec<i64>)> {
    let d = cols.len();
    let red = size_reduce_cols(cols);
    let inv = inverse_rows(&red)?;
    // initial radius: the best reduced basis vector (in float, with slack)
    let radius = red
        .iter()
        .map(|c| {
            let v: Vec<f64> = c.iter().map(|x| x.as_f64()).collect();
            match norm {
                Norm::Sup => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                Norm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            }
        })
        .fold(f64::INFINITY, f64::min)
        * (1.0 + 1e-9);
    let bounds = coeff_bounds(&inv, radius, norm);
    let mut best: Option<(E, Vec<i64>)> = None;
    for c in enumerate_box(&bounds)? {
        if c.iter().all(|x| *x == 0) {
            continue;
        }
        let v = mat_vec(&red, &c);
        let key = norm_key(&v, norm);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, c));
        }
    }
    let (key, c_red) =
        best.ok_or_else(|| Error::InvalidInput(format!("no vectors found in dimension {d}")))?;
    // translate the attaining vector back to original-basis coefficients
    let v = mat_vec(&red, &c_red);
    let coeffs = coeffs_in_basis(cols, &v)?;
    Ok((key, coeffs))
}

/// Closest lattice point to `target`: minimizes |B c - target| over c.
/// Returned coefficients are over the original basis columns.
fn closest_point<E: Entry>(cols: &[Vec<E>], target: &[E], norm: Norm) -> Result<(E, Vec<i64>)> {
    let red = size_reduce_cols(cols);
    let inv = inverse_rows(&red)?;
    let cstar: Vec<E> = inv.iter().map(|row| dot(row, target)).collect();
    let c0: Vec<i64> = cstar.iter().map(|x| x.round_i64()).collect();
    let v0 = mat_vec(&red, &c0);
    let diff0: Vec<E> = v0.iter().zip(target).map(|(a, b)| a.sub_ref(b)).collect();
    let mut best_key = norm_key(&diff0, norm);
    let mut best_c = c0.clone();
    // certified window: any c with |Bc - target| <= best satisfies
    // |c_i - cstar_i| <= rowbound_i(best); the window is centered at the
    // rounded cstar, which costs another 1/2 per coordinate
    let radius = match norm {
        Norm::Sup => best_key.as_f64(),
        Norm::Euclidean => best_key.as_f64().sqrt(),
    };
    let bounds: Vec<i64> = coeff_bounds(&inv, radius, norm)
        .into_iter()
        .map(|b| b + 1)
        .collect();
    for dc in enumerate_box(&bounds)? {
        let c: Vec<i64> = c0.iter().zip(&dc).map(|(a, b)| a + b).collect();
        let v = mat_vec(&red, &c);
        let diff: Vec<E> = v.iter().zip(target).map(|(a, b)| a.sub_ref(b)).collect();
        let key = norm_key(&diff, norm);
        if key < best_key {
            best_key = key;
            best_c = c;
        }
    }
    let v = mat_vec(&red, &best_c);
    let coeffs = coeffs_in_basis(cols, &v)?;
    Ok((best_key, coeffs))
}

fn key_to_norm<E: Entry>(key: &E, norm: Norm) -> f64 {
    match norm {
        Norm::Sup => key.as_f64(),
        Norm::Euclidean => key.as_f64().sqrt(),
    }
}

// ---------------------------------------------------------------------------
// Lattice and Grid
// ---------------------------------------------------------------------------

/// A unimodular lattice in R^d, given by basis columns. Float64 kind by
/// default, with an exact big-rational mirror when constructed from
/// rational data.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    cols_f: Vec<Vec<f64>>,
    cols_q: Option<Vec<Vec<Q>>>,
}

impl Lattice {
    /// Float64 lattice from basis columns. |det| must equal 1 within 1e-9.
    pub fn from_basis(cols: Vec<Vec<f64>>) -> Result<Self> {
        let dim = cols.len();
        if dim < 2 || cols.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidInput("basis must be square, d >= 2".into()));
        }
        let det = det_cols(&cols);
        if (det.abs() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "basis is not unimodular: |det| = {}",
                det.abs()
            )));
        }
        Ok(Self {
            dim,
            cols_f: cols,
            cols_q: None,
        })
    }

    /// Exact rational lattice. |det| must equal 1 exactly.
    pub fn from_rational_basis(cols: Vec<Vec<Q>>) -> Result<Self> {
        let dim = cols.len();
        if dim < 2 || cols.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidInput("basis must be square, d >= 2".into()));
        }
        let det = det_cols(&cols);
        if Signed::abs(&det) != Q::one() {
            return Err(Error::InvalidInput(format!(
                "rational basis is not unimodular: |det| = {det}"
            )));
        }
        let cols_f = cols
            .iter()
            .map(|c| c.iter().map(crate::exact::q_to_f64).collect())
            .collect();
        Ok(Self {
            dim,
            cols_f,
            cols_q: Some(cols),
        })
    }

    /// The standard integer lattice Z^d.
    pub fn standard(d: usize) -> Self {
        let mut cols_q = vec![vec![Q::zero(); d]; d];
        for (j, col) in cols_q.iter_mut().enumerate() {
            col[j] = Q::one();
        }
        Self::from_rational_basis(cols_q).expect("identity basis")
    }

    /// The lattice x_v spanned by e_1, ..., e_n and (v, 1): captures the
    /// Diophantine behaviour of the vector v.
    pub fn from_vector(v: &[f64]) -> Self {
        let v_q: Vec<Q> = v.iter().map(|x| exact_from_f64(*x)).collect();
        Self::from_vector_rational(&v_q)
    }

    /// Rational-kind x_v.
    pub fn from_vector_rational(v: &[Q]) -> Self {
        let n = v.len();
        let d = n + 1;
        let mut cols = vec![vec![Q::zero(); d]; d];
        for (j, col) in cols.iter_mut().enumerate().take(n) {
            col[j] = Q::one();
        }
        for (i, x) in v.iter().enumerate() {
            cols[n][i] = x.clone();
        }
        cols[n][n] = Q::one();
        Self::from_rational_basis(cols).expect("x_v is unimodular")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_exact(&self) -> bool {
        self.cols_q.is_some()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.cols_f
    }

    pub fn rational_basis(&self) -> Option<&[Vec<Q>]> {
        self.cols_q.as_deref()
    }

    pub fn det(&self) -> f64 {
        det_cols(&self.cols_f)
    }

    fn check_dim(&self) -> Result<()> {
        if self.dim > 4 {
            return Err(Error::DimensionUnsupported {
                d: self.dim,
                max: 4,
            });
        }
        Ok(())
    }

    /// Norm of the shortest nonzero vector.
    pub fn lambda1(&self, norm: Norm) -> Result<f64> {
        Ok(self.lambda1_vector(norm)?.0)
    }

    /// Shortest nonzero vector: (norm, vector, coefficients).
    pub fn lambda1_vector(&self, norm: Norm) -> Result<(f64, Vec<f64>, Vec<i64>)> {
        self.check_dim()?;
        let coeffs = if let Some(cols_q) = &self.cols_q {
            if self.dim == 2 {
                shortest_2d(cols_q, norm)?.1
            } else {
                shortest_nd(cols_q, norm)?.1
            }
        } else if self.dim == 2 {
            shortest_2d(&self.cols_f, norm)?.1
        } else {
            shortest_nd(&self.cols_f, norm)?.1
        };
        let v = mat_vec(&self.cols_f, &coeffs);
        let value = if let Some(cols_q) = &self.cols_q {
            let vq = mat_vec(cols_q, &coeffs);
            key_to_norm(&norm_key(&vq, norm), norm)
        } else {
            key_to_norm(&norm_key(&v, norm), norm)
        };
        Ok((value, v, coeffs))
    }

    /// Apply the diagonal flow for time t. The result is float64 kind:
    /// the scale factors e^{c_j t} are irrational, so exact deep-time
    /// analysis goes through the log-domain evaluators instead.
    pub fn flow(&self, flow: &FlowSpec, t: f64) -> Result<Lattice> {
        if flow.dim() != self.dim {
            return Err(Error::InvalidInput(
                "flow dimension does not match lattice".into(),
            ));
        }
        let mut scales = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            scales.push(flow.scale_at(j, t)?);
        }
        let cols = self
            .cols_f
            .iter()
            .map(|c| c.iter().zip(&scales).map(|(x, s)| x * s).collect())
            .collect();
        let dim = self.dim;
        Ok(Lattice {
            dim,
            cols_f: cols,
            cols_q: None,
        })
    }

    /// Attach an offset, producing the grid (coset) lattice + w.
    pub fn grid(&self, offset: Vec<f64>) -> Result<Grid> {
        Grid::new(self.clone(), offset)
    }

    pub fn grid_rational(&self, offset: Vec<Q>) -> Result<Grid> {
        Grid::new_rational(self.clone(), offset)
    }

    /// JSON with decimal-string scalars (exact for the rational kind).
    pub fn to_json(&self) -> serde_json::Value {
        match &self.cols_q {
            Some(cols) => serde_json::json!({
                "kind": "rational",
                "dim": self.dim,
                "basis": cols.iter().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
            None => serde_json::json!({
                "kind": "float",
                "dim": self.dim,
                "basis": self.cols_f.iter().map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let kind = v.get("kind").and_then(|k| k.as_str()).unwrap_or("float");
        let basis = v
            .get("basis")
            .and_then(|b| b.as_array())
            .ok_or_else(|| Error::InvalidInput("missing 'basis'".into()))?;
        let parse_col = |c: &serde_json::Value| -> Result<Vec<String>> {
            c.as_array()
                .ok_or_else(|| Error::InvalidInput("basis column must be array".into()))?
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::InvalidInput("scalar must be a string".into()))
                })
                .collect()
        };
        if kind == "rational" {
            let cols = basis
                .iter()
                .map(|c| {
                    parse_col(c)?
                        .iter()
                        .map(|s| parse_rational(s))
                        .collect::<Result<Vec<Q>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Self::from_rational_basis(cols)
        } else {
            let cols = basis
                .iter()
                .map(|c| {
                    parse_col(c)?
                        .iter()
                        .map(|s| {
                            s.parse::<f64>()
                                .map_err(|e| Error::InvalidInput(format!("bad float: {e}")))
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Self::from_basis(cols)
        }
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<Q> {
    s.parse::<Q>()
        .map_err(|e| Error::InvalidInput(format!("bad rational '{s}': {e}")))
}

/// Exact rational equal to the given float (every finite f64 is dyadic).
pub fn exact_from_f64(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

/// A coset lattice + w. The stored offset is reduced into the fundamental
/// domain: its coefficient vector over the basis lies in [0, 1)^d.
#[derive(Clone, Debug)]
pub struct Grid {
    lattice: Lattice,
    offset_f: Vec<f64>,
    offset_q: Option<Vec<Q>>,
}

impl Grid {
    pub fn new(lattice: Lattice, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != lattice.dim() {
            return Err(Error::InvalidInput("offset dimension mismatch".into()));
        }
        if let Some(cols_q) = lattice.cols_q.clone() {
            let off_q: Vec<Q> = offset.iter().map(|x| exact_from_f64(*x)).collect();
            return Self::reduce_exact(lattice, cols_q, off_q);
        }
        // float reduction
        let inv = inverse_rows(&lattice.cols_f)?;
        let coeffs: Vec<f64> = inv.iter().map(|row| dot(row, &offset)).collect();
        let frac: Vec<f64> = coeffs.iter().map(|c| c - c.floor()).collect();
        let mut red = vec![0.0; lattice.dim()];
        for (j, col) in lattice.cols_f.iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                red[r] += frac[j] * x;
            }
        }
        Ok(Self {
            lattice,
            offset_f: red,
            offset_q: None,
        })
    }

    pub fn new_rational(lattice: Lattice, offset: Vec<Q>) -> Result<Self> {
        if offset.len() != lattice.dim() {
            return Err(Error::InvalidInput("offset dimension mismatch".into()));
        }
        let cols_q = lattice
            .cols_q
            .clone()
            .ok_or_else(|| Error::InvalidInput("rational offset needs a rational lattice".into()))?;
        Self::reduce_exact(lattice, cols_q, offset)
    }

    fn reduce_exact(lattice: Lattice, cols_q: Vec<Vec<Q>>, offset: Vec<Q>) -> Result<Self> {
        let inv = inverse_rows(&cols_q)?;
        let coeffs: Vec<Q> = inv.iter().map(|row| dot(row, &offset)).collect();
        let frac: Vec<Q> = coeffs.iter().map(|c| c - c.floor()).collect();
        let mut red = vec![Q::zero(); lattice.dim()];
        for (j, col) in cols_q.iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                red[r] = red[r].clone() + frac[j].clone() * x;
            }
        }
        let offset_f = red.iter().map(crate::exact::q_to_f64).collect();
        Ok(Self {
            lattice,
            offset_f,
            offset_q: Some(red),
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset_f
    }

    pub fn rational_offset(&self) -> Option<&[Q]> {
        self.offset_q.as_deref()
    }

    /// Norm of the shortest point of the grid (zero when the grid contains
    /// the origin). Exact in dimension 2, certified enumeration up to 4.
    pub fn sigma(&self, norm: Norm) -> Result<f64> {
        Ok(self.sigma_vector(norm)?.0)
    }

    /// Shortest grid point: (norm, point).
    pub fn sigma_vector(&self, norm: Norm) -> Result<(f64, Vec<f64>)> {
        self.lattice.check_dim()?;
        // shortest grid point = w - (closest lattice point to -w), i.e.
        // minimize |Bc + w| = |Bc - (-w)|
        if let (Some(cols_q), Some(off_q)) = (&self.lattice.cols_q, &self.offset_q) {
            let target: Vec<Q> = off_q.iter().map(|x| -x.clone()).collect();
            let (key, c) = closest_point(cols_q, &target, norm)?;
            let mut p = mat_vec(cols_q, &c);
            for (r, x) in p.iter_mut().enumerate() {
                *x = x.add_ref(&off_q[r]);
            }
            Ok((
                key_to_norm(&key, norm),
                p.iter().map(crate::exact::q_to_f64).collect(),
            ))
        } else {
            let target: Vec<f64> = self.offset_f.iter().map(|x| -x).collect();
            let (key, c) = closest_point(&self.lattice.cols_f, &target, norm)?;
            let mut p = mat_vec(&self.lattice.cols_f, &c);
            for (r, x) in p.iter_mut().enumerate() {
                *x += self.offset_f[r];
            }
            Ok((key_to_norm(&key, norm), p))
        }
    }

    /// Apply the diagonal flow for time t (float64 result).
    pub fn flow(&self, flow: &FlowSpec, t: f64) -> Result<Grid> {
        let lat = self.lattice.flow(flow, t)?;
        let off = flow.apply_point(t, &self.offset_f)?;
        Grid::new(lat, off)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "lattice": self.lattice.to_json(),
        });
        match &self.offset_q {
            Some(off) => {
                v["offset"] = serde_json::json!(off.iter().map(|x| x.to_string()).collect::<Vec<_>>())
            }
            None => {
                v["offset"] =
                    serde_json::json!(self.offset_f.iter().map(|x| x.to_string()).collect::<Vec<_>>())
            }
        }
        v
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let lattice = Lattice::from_json(
            v.get("lattice")
                .ok_or_else(|| Error::InvalidInput("missing 'lattice'".into()))?,
        )?;
        let raw: Vec<String> = v
            .get("offset")
            .and_then(|o| o.as_array())
            .ok_or_else(|| Error::InvalidInput("missing 'offset'".into()))?
            .iter()
            .map(|x| {
                x.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| Error::InvalidInput("offset scalar must be a string".into()))
            })
            .collect::<Result<_>>()?;
        if lattice.is_exact() {
            let off = raw.iter().map(|s| parse_rational(s)).collect::<Result<Vec<Q>>>()?;
            Grid::new_rational(lattice, off)
        } else {
            let off = raw
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("bad float: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            Grid::new(lattice, off)
        }
    }
}

/// Enumerate all grid points in the closed per-coordinate box, certified
/// via the inverse basis (interval arithmetic on coefficients).
/// Returns (point, coefficients) pairs in lexicographic coefficient order.
pub fn grid_points_in_box(
    grid: &Grid,
    ranges: &[(f64, f64)],
    budget: f64,
) -> Result<Vec<(Vec<f64>, Vec<i64>)>> {
    let d = grid.dim();
    if ranges.len() != d {
        return Err(Error::InvalidInput("box dimension mismatch".into()));
    }
    let inv = inverse_rows(&grid.lattice.cols_f)?;
    // coefficient interval: c_i = sum_j inv[i][j] * (p_j - w_j)
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            let a = inv[i][j] * (ranges[j].0 - grid.offset_f[j]);
            let b = inv[i][j] * (ranges[j].1 - grid.offset_f[j]);
            lo[i] += a.min(b);
            hi[i] += a.max(b);
        }
    }
    let slack = 1e-9;
    let lo_i: Vec<i64> = lo.iter().map(|x| (x - slack).ceil() as i64).collect();
    let hi_i: Vec<i64> = hi.iter().map(|x| (x + slack).floor() as i64).collect();
    let mut cells = 1.0f64;
    for (l, h) in lo_i.iter().zip(&hi_i) {
        cells *= ((h - l + 1).max(0)) as f64;
    }
    if cells > budget {
        return Err(Error::EnumerationTooLarge { cells, budget });
    }
    if cells == 0.0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut c: Vec<i64> = lo_i.clone();
    loop {
        let mut p = mat_vec(&grid.lattice.cols_f, &c);
        for (r, x) in p.iter_mut().enumerate() {
            *x += grid.offset_f[r];
        }
        if p
            .iter()
            .zip(ranges)
            .all(|(x, (l, h))| *x >= l - slack && *x <= h + slack)
        {
            out.push((p, c.clone()));
        }
        let mut k = 0;
        loop {
            c[k] += 1;
            if c[k] <= hi_i[k] {
                break;
            }
            c[k] = lo_i[k];
            k += 1;
            if k == d {
                return Ok(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat2(c1: [f64; 2], c2: [f64; 2]) -> Lattice {
        Lattice::from_basis(vec![c1.to_vec(), c2.to_vec()]).unwrap()
    }

    #[test]
    fn gauss_reduce_identity_fixed() {
        let red = gauss_reduce([[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let norms: Vec<f64> = red.iter().map(|c| (c[0] * c[0] + c[1] * c[1]).sqrt()).collect();
        assert!((norms[0] - 1.0).abs() < 1e-12 && (norms[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_reduce_removes_shear() {
        let red = gauss_reduce([[1.0, 0.0], [10.0, 1.0]]).unwrap();
        for c in red {
            assert!((c[0] * c[0] + c[1] * c[1] - 1.0).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn gauss_reduce_rejects_singular() {
        assert!(matches!(
            gauss_reduce([[1.0, 2.0], [0.5, 1.0]]),
            Err(Error::SingularBasis { .. })
        ));
    }

    /// Brute-force oracle: minimum norm over |coeffs| <= k.
    fn brute_lambda1(l: &Lattice, norm: Norm, k: i64) -> f64 {
        let mut best = f64::INFINITY;
        for i in -k..=k {
            for j in -k..=k {
                if i == 0 && j == 0 {
                    continue;
                }
                let v = mat_vec(l.basis(), &[i, j]);
                let n = match norm {
                    Norm::Sup => v[0].abs().max(v[1].abs()),
                    Norm::Euclidean => (v[0] * v[0] + v[1] * v[1]).sqrt(),
                };
                best = best.min(n);
            }
        }
        best
    }

    #[test]
    fn gauss_reduce_golden_matches_enumeration() {
        let v = 0.618034;
        let l = lat2([1.0, 0.0], [v, 1.0]);
        let red = gauss_reduce([[1.0, 0.0], [v, 1.0]]).unwrap();
        let first = (red[0][0] * red[0][0] + red[0][1] * red[0][1]).sqrt();
        let oracle = brute_lambda1(&l, Norm::Euclidean, 50);
        assert!((first - oracle).abs() < 1e-12);
    }

    #[test]
    fn lambda1_standard_and_flowed() {
        assert!((Lattice::standard(2).lambda1(Norm::Sup).unwrap() - 1.0).abs() < 1e-12);
        let e = 1f64.exp();
        let l = lat2([e, 0.0], [0.0, 1.0 / e]);
        assert!((l.lambda1(Norm::Sup).unwrap() - 1.0 / e).abs() < 1e-12);
    }

    #[test]
    fn lambda1_golden_vector_lattice() {
        // x_v for v = 0.618034: the sup-shortest vectors have norm exactly 1
        let l = Lattice::from_vector(&[0.618034]);
        let got = l.lambda1(Norm::Sup).unwrap();
        assert!((got - 1.0).abs() < 1e-12);
        let oracle = brute_lambda1(&l, Norm::Sup, 50);
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn sigma_examples() {
        let g = Lattice::standard(2).grid(vec![0.5, 0.5]).unwrap();
        assert!((g.sigma(Norm::Sup).unwrap() - 0.5).abs() < 1e-12);
        let g0 = Lattice::standard(2).grid(vec![0.0, 0.0]).unwrap();
        assert!(g0.sigma(Norm::Sup).unwrap().abs() < 1e-12);
        // grid over a flowed lattice, checked against brute force
        let e = 1f64.exp();
        let l = lat2([e, 0.0], [0.0, 1.0 / e]);
        let g2 = l.grid(vec![0.2, 0.3]).unwrap();
        let got = g2.sigma(Norm::Sup).unwrap();
        let mut oracle = f64::INFINITY;
        for i in -100i64..=100 {
            for j in -100i64..=100 {
                let x = i as f64 * e + 0.2;
                let y = j as f64 / e + 0.3;
                oracle = oracle.min(x.abs().max(y.abs()));
            }
        }
        assert!((got - oracle).abs() < 1e-10);
    }

    #[test]
    fn offset_reduced_to_fundamental_domain() {
        let g = Lattice::standard(2).grid(vec![2.75, -0.25]).unwrap();
        assert!((g.offset()[0] - 0.75).abs() < 1e-12);
        assert!((g.offset()[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn flow_composition_and_identity() {
        let flow = FlowSpec::standard_2d();
        let l = lat2([0.8, 0.6], [-0.6, 0.8]);
        let l0 = l.flow(&flow, 0.0).unwrap();
        for (a, b) in l.basis().iter().flatten().zip(l0.basis().iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
        let fwd = l.flow(&flow, 2.0).unwrap();
        let back = fwd.flow(&flow, -2.0).unwrap();
        for (a, b) in l.basis().iter().flatten().zip(back.basis().iter().flatten()) {
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
        assert!((fwd.det().abs() - 1.0).abs() < 1e-9);
    }

    /// Volume preservation over random flows and times: |det| stays 1
    /// within 1e-9 relative for |c_j t| <= 50.
    #[test]
    fn flow_preserves_volume_on_random_pairs() {
        let mut rng = crate::util::SplitMix64::new(321);
        for _ in 0..1000 {
            let c = 0.2 + 1.3 * rng.next_f64();
            let flow = FlowSpec::new(vec![c, -c]).unwrap();
            let shear = rng.next_f64() * 4.0 - 2.0;
            let l = lat2([1.0, 0.0], [shear, 1.0]);
            let t = (rng.next_f64() * 2.0 - 1.0) * 50.0 / c;
            let flowed = l.flow(&flow, t).unwrap();
            assert!((flowed.det().abs() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn flow_overflow_guarded() {
        let flow = FlowSpec::standard_2d();
        let l = Lattice::standard(2);
        assert!(matches!(l.flow(&flow, 701.0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn rational_kind_is_exact() {
        use num_traits::FromPrimitive;
        let half = Q::from_f64(0.5).unwrap();
        let l = Lattice::from_vector_rational(&[half]);
        assert!(l.is_exact());
        let g = l
            .grid_rational(vec![Q::new(BigInt::from(1), BigInt::from(3)), Q::zero()])
            .unwrap();
        // sigma = distance from -1/3 to the nearest point of Z + 1/2 Z = 1/2 Z... the
        // lattice x_{1/2} contains (1/2, 1), (1, 0); the shortest grid point:
        let s = g.sigma(Norm::Sup).unwrap();
        let oracle = {
            let mut best = f64::INFINITY;
            for i in -50i64..=50 {
                for j in -50i64..=50 {
                    let x = i as f64 + j as f64 * 0.5 + 1.0 / 3.0;
                    let y = j as f64;
                    best = best.min(x.abs().max(y.abs()));
                }
            }
            best
        };
        assert!((s - oracle).abs() < 1e-12);
    }

    #[test]
    fn d3_lambda1_by_enumeration() {
        // diag-flowed Z^3, still unimodular
        let l = Lattice::from_basis(vec![
            vec![2.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!((l.lambda1(Norm::Sup).unwrap() - 0.5).abs() < 1e-12);
        assert!((l.lambda1(Norm::Euclidean).unwrap() - 0.5).abs() < 1e-12);
    }

    /// A sheared 3D basis: size reduction keeps the certified boxes
    /// small and the result matches direct enumeration.
    #[test]
    fn d3_skewed_basis_matches_brute_force() {
        let cols = vec![
            vec![1.0, 0.0, 0.0],
            vec![7.0, 1.0, 0.0],
            vec![13.0, 5.0, 1.0],
        ];
        let l = Lattice::from_basis(cols.clone()).unwrap();
        let got = l.lambda1(Norm::Euclidean).unwrap();
        let mut brute = f64::INFINITY;
        for i in -20i64..=20 {
            for j in -20i64..=20 {
                for k in -20i64..=20 {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let v = mat_vec(&cols, &[i, j, k]);
                    brute = brute.min(v.iter().map(|x| x * x).sum::<f64>().sqrt());
                }
            }
        }
        assert!((got - brute).abs() < 1e-10, "{got} vs {brute}");
        // grid point paths go through the same reduction
        let g = l.grid(vec![0.4, 0.7, 0.2]).unwrap();
        let s = g.sigma(Norm::Euclidean).unwrap();
        assert!(s <= brute, "sigma {s} larger than lambda1 {brute}");
    }

    #[test]
    fn d5_unsupported() {
        let mut cols = vec![vec![0.0; 5]; 5];
        for (j, c) in cols.iter_mut().enumerate() {
            c[j] = 1.0;
        }
        let l = Lattice::from_basis(cols).unwrap();
        assert!(matches!(
            l.lambda1(Norm::Sup),
            Err(Error::DimensionUnsupported { .. })
        ));
    }

    #[test]
    fn grid_points_in_box_finds_all() {
        let g = Lattice::standard(2).grid(vec![0.5, 0.5]).unwrap();
        let pts = grid_points_in_box(&g, &[(-2.0, 2.0), (-2.0, 2.0)], 1e6).unwrap();
        // points (i+1/2, j+1/2) with both coords in [-2, 2]: i,j in {-2,-1,0,1}
        assert_eq!(pts.len(), 16);
    }

    #[test]
    fn grid_json_round_trip() {
        use num_traits::Zero;
        let l = Lattice::from_vector(&[0.25]);
        let g = l
            .grid_rational(vec![Q::new(BigInt::from(1), BigInt::from(3)), Q::zero()])
            .unwrap();
        let back = Grid::from_json(&g.to_json()).unwrap();
        assert_eq!(back.rational_offset(), g.rational_offset());
    }

    #[test]
    fn lattice_json_round_trip() {
        let l = Lattice::from_vector(&[0.25]);
        let j = l.to_json();
        let back = Lattice::from_json(&j).unwrap();
        assert!(back.is_exact());
        assert_eq!(back.rational_basis(), l.rational_basis());
    }
}
