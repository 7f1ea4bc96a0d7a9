//! Analytic operators `Σ_k M_{z^k}C_k · R_{q^m}` on vector-valued Hardy space,
//! their degree-truncated matrices, and the observability operator.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    defect, identity, matrix_serde, select_columns, upow, zeros, CMatrix, Defect, C64,
};

/// `Σ_k M_{z^k}C_k` followed by `R_{q^m}`, where `(R_q f)(z) = f(qz)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSymbol {
    fiber_dim: usize,
    q: C64,
    twist: i32,
    coeffs: Vec<CMatrix>,
}

impl TwistedSymbol {
    pub fn new(q: C64, twist: i32, coeffs: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::InvalidArgument(
                "symbol needs at least one coefficient".into(),
            ));
        };
        let f = first.nrows();
        if coeffs.iter().any(|c| c.nrows() != f || c.ncols() != f) {
            return Err(Error::FiberMismatch);
        }
        Ok(TwistedSymbol {
            fiber_dim: f,
            q,
            twist,
            coeffs,
        })
    }

    pub fn identity(fiber_dim: usize, q: C64) -> Self {
        TwistedSymbol {
            fiber_dim,
            q,
            twist: 0,
            coeffs: vec![identity(fiber_dim)],
        }
    }

    /// `M_z`.
    pub fn shift(fiber_dim: usize, q: C64) -> Self {
        TwistedSymbol {
            fiber_dim,
            q,
            twist: 0,
            coeffs: vec![zeros(fiber_dim, fiber_dim), identity(fiber_dim)],
        }
    }

    /// `R_{q^m}`.
    pub fn rotation(fiber_dim: usize, q: C64, m: i32) -> Self {
        TwistedSymbol {
            fiber_dim,
            q,
            twist: m,
            coeffs: vec![identity(fiber_dim)],
        }
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn twist(&self) -> i32 {
        self.twist
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The analytic part `φ(z) = Σ z^k C_k`.
    pub fn eval(&self, z: C64) -> CMatrix {
        let mut acc = zeros(self.fiber_dim, self.fiber_dim);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    #[serde(with = "crate::matcore::complex_serde")]
    q: C64,
    twist: i32,
    coeffs: Vec<MatrixField>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct MatrixField(#[serde(with = "matrix_serde")] CMatrix);

impl Serialize for TwistedSymbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymbolJson {
            q: self.q,
            twist: self.twist,
            coeffs: self.coeffs.iter().cloned().map(MatrixField).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwistedSymbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SymbolJson::deserialize(d)?;
        TwistedSymbol::new(
            raw.q,
            raw.twist,
            raw.coeffs.into_iter().map(|m| m.0).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// `s1 ∘ s2`, using `R_{q^m}M_{z^k}C = q^{mk}M_{z^k}C R_{q^m}`.
pub fn symbol_compose(s1: &TwistedSymbol, s2: &TwistedSymbol) -> Result<TwistedSymbol> {
    if s1.fiber_dim != s2.fiber_dim || (s1.q - s2.q).norm() > 1e-12 {
        return Err(Error::FiberMismatch);
    }
    let f = s1.fiber_dim;
    let mut coeffs = vec![zeros(f, f); s1.degree() + s2.degree() + 1];
    for (j, a) in s1.coeffs.iter().enumerate() {
        for (k, b) in s2.coeffs.iter().enumerate() {
            let phase = upow(s1.q, s1.twist as i64 * k as i64);
            coeffs[j + k] += a * b * phase;
        }
    }
    TwistedSymbol::new(s1.q, s1.twist + s2.twist, coeffs)
}

/// Inner test `Σ_k C_k*C_{k+j} = δ_{j0}I`; the rotation factor is unitary
/// and does not affect it. Returns the verdict at `1e-12` and the residual.
pub fn symbol_is_inner(s: &TwistedSymbol) -> (bool, f64) {
    let f = s.fiber_dim;
    let d = s.degree();
    let mut worst: f64 = 0.0;
    for j in 0..=d {
        let mut acc = zeros(f, f);
        for k in 0..=d - j {
            acc += s.coeffs[k].adjoint() * &s.coeffs[k + j];
        }
        if j == 0 {
            acc -= identity(f);
        }
        worst = worst.max(acc.norm());
    }
    (worst <= 1e-12, worst)
}

/// `H²(F)` truncated to polynomials of degree at most `max_degree`, stored
/// degree-major: block `n` holds the coefficient of `zⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncHardy {
    pub fiber_dim: usize,
    pub max_degree: usize,
}

impl TruncHardy {
    pub fn new(fiber_dim: usize, max_degree: usize) -> Self {
        TruncHardy {
            fiber_dim,
            max_degree,
        }
    }

    pub fn total_dim(&self) -> usize {
        (self.max_degree + 1) * self.fiber_dim
    }

    pub fn block(&self, n: usize) -> Range<usize> {
        n * self.fiber_dim..(n + 1) * self.fiber_dim
    }
}

/// `head ⊕ H²_N(F) ⊕ tail`: the shape of every lift space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub head_dim: usize,
    pub hardy: TruncHardy,
    pub tail_dim: usize,
}

impl Layout {
    pub fn hardy_only(hardy: TruncHardy) -> Self {
        Layout {
            head_dim: 0,
            hardy,
            tail_dim: 0,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.head_dim + self.hardy.total_dim() + self.tail_dim
    }

    pub fn hardy_range(&self) -> Range<usize> {
        self.head_dim..self.head_dim + self.hardy.total_dim()
    }

    pub fn tail_range(&self) -> Range<usize> {
        let start = self.head_dim + self.hardy.total_dim();
        start..start + self.tail_dim
    }

    /// Indices of the degree-`n` Hardy block within the full space.
    pub fn hardy_block(&self, n: usize) -> Range<usize> {
        let b = self.hardy.block(n);
        self.head_dim + b.start..self.head_dim + b.end
    }

    /// Head, Hardy degrees `≤ N − budget`, and tail: the inputs on which an
    /// identity of total degree `budget` is exact after truncation.
    pub fn interior(&self, budget: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.head_dim).collect();
        if budget <= self.hardy.max_degree {
            let top = self.hardy.max_degree - budget;
            idx.extend(self.head_dim..self.head_dim + (top + 1) * self.hardy.fiber_dim);
        }
        idx.extend(self.tail_range());
        idx
    }

    /// Same layout with one more Hardy degree.
    pub fn extended(&self, extra: usize) -> Layout {
        Layout {
            hardy: TruncHardy::new(self.hardy.fiber_dim, self.hardy.max_degree + extra),
            ..*self
        }
    }

    /// Rows of the extended layout that correspond to this layout.
    pub fn embed_indices(&self, extended: &Layout) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.head_dim).collect();
        idx.extend(extended.head_dim..extended.head_dim + self.hardy.total_dim());
        idx.extend(extended.tail_range());
        idx
    }
}

/// A matrix on a truncated lift space together with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncOperator {
    pub matrix: CMatrix,
    pub layout: Layout,
    /// Largest z-degree raised by the underlying symbol.
    pub degree_shift: usize,
}

/// Frobenius norm of `diff` restricted to the inputs in `layout.interior(budget)`.
pub fn restricted_residual(diff: &CMatrix, layout: &Layout, budget: usize) -> f64 {
    select_columns(diff, &layout.interior(budget)).norm()
}

/// Truncated matrix of a symbol: `zⁿ⊗ξ ↦ Σ_k q^{mn} z^{n+k}⊗C_kξ`.
pub fn materialize(s: &TwistedSymbol, max_degree: usize) -> Result<TruncOperator> {
    if max_degree < s.degree() {
        return Err(Error::InvalidArgument(format!(
            "truncation {max_degree} below symbol degree {}",
            s.degree()
        )));
    }
    let h = TruncHardy::new(s.fiber_dim, max_degree);
    let f = s.fiber_dim;
    let mut m = zeros(h.total_dim(), h.total_dim());
    for n in 0..=max_degree {
        let phase = upow(s.q, s.twist as i64 * n as i64);
        for (k, c) in s.coeffs.iter().enumerate() {
            if n + k > max_degree {
                break;
            }
            let mut view = m.view_mut(((n + k) * f, n * f), (f, f));
            view += c * phase;
        }
    }
    Ok(TruncOperator {
        matrix: m,
        layout: Layout::hardy_only(h),
        degree_shift: s.degree(),
    })
}

/// `materialize(s, N)·x` without forming the matrix.
pub fn apply_symbol(s: &TwistedSymbol, max_degree: usize, x: &CMatrix) -> CMatrix {
    let f = s.fiber_dim;
    let mut out = zeros(x.nrows(), x.ncols());
    for n in 0..=max_degree {
        let phase = upow(s.q, s.twist as i64 * n as i64);
        let block = x.rows(n * f, f) * phase;
        for (k, c) in s.coeffs.iter().enumerate() {
            if n + k > max_degree {
                break;
            }
            let mut view = out.rows_mut((n + k) * f, f);
            view += c * &block;
        }
    }
    out
}

/// `materialize(s, N)*·x` without forming the matrix.
pub fn apply_symbol_adjoint(s: &TwistedSymbol, max_degree: usize, x: &CMatrix) -> CMatrix {
    let f = s.fiber_dim;
    let mut out = zeros(x.nrows(), x.ncols());
    for n in 0..=max_degree {
        let phase = upow(s.q, s.twist as i64 * n as i64).conj();
        let mut acc = zeros(f, x.ncols());
        for (k, c) in s.coeffs.iter().enumerate() {
            if n + k > max_degree {
                break;
            }
            acc += c.adjoint() * x.rows((n + k) * f, f);
        }
        out.rows_mut(n * f, f).copy_from(&(acc * phase));
    }
    out
}

/// Evaluation at zero `H²_N(F) → F`; its adjoint embeds constants.
pub fn ev0(max_degree: usize, fiber_dim: usize) -> CMatrix {
    let mut m = zeros(fiber_dim, (max_degree + 1) * fiber_dim);
    m.view_mut((0, 0), (fiber_dim, fiber_dim))
        .copy_from(&identity(fiber_dim));
    m
}

/// `h ↦ Σ_{n≤N} zⁿ D_{T*}T*ⁿh`, read in the basis of `defect_tstar`.
pub fn obs_op(t: &CMatrix, defect_tstar: &Defect, max_degree: usize) -> CMatrix {
    let n = t.nrows();
    let k = defect_tstar.dim();
    let coords = defect_tstar.coords();
    let ts = t.adjoint();
    let mut out = zeros((max_degree + 1) * k, n);
    let mut power = identity(n);
    for deg in 0..=max_degree {
        out.view_mut((deg * k, 0), (k, n))
            .copy_from(&(&coords * &power));
        power = &ts * power;
    }
    out
}

/// Both sides of `Σ_{n≤N}‖D_{T*}T*ⁿh‖² = ‖h‖² − ‖T*^{N+1}h‖²`.
pub fn obs_tail_identity(t: &CMatrix, max_degree: usize, h: &CMatrix) -> Result<(f64, f64)> {
    let dts = defect(&t.adjoint(), None)?;
    let lhs = (obs_op(t, &dts, max_degree) * h).norm_squared();
    let mut tail = h.clone();
    let ts = t.adjoint();
    for _ in 0..=max_degree {
        tail = &ts * tail;
    }
    Ok((lhs, h.norm_squared() - tail.norm_squared()))
}

/// Reads `φ` from `A = M_φR_q` (block column of degree 0) after checking
/// `AM_z = qM_zA` on degrees `≤ N−1`. Returns the symbol (twist 1) and the
/// residual `‖A − materialize(M_φR_q)‖` on degrees `≤ N − deg φ`.
pub fn extract_symbol(
    a: &CMatrix,
    fiber_dim: usize,
    q: C64,
    max_degree: usize,
    tol: f64,
) -> Result<(TwistedSymbol, f64)> {
    let h = TruncHardy::new(fiber_dim, max_degree);
    if a.nrows() != h.total_dim() || a.ncols() != h.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, truncated space has dimension {}",
            a.nrows(),
            a.ncols(),
            h.total_dim()
        )));
    }
    let layout = Layout::hardy_only(h);
    let shift = materialize(&TwistedSymbol::shift(fiber_dim, q), max_degree)?.matrix;
    let pre = restricted_residual(&(a * &shift - &shift * a * q), &layout, 1);
    if pre > tol {
        return Err(Error::NotQCommutant { residual: pre });
    }
    let mut coeffs: Vec<CMatrix> = (0..=max_degree)
        .map(|k| {
            a.view((k * fiber_dim, 0), (fiber_dim, fiber_dim))
                .into_owned()
        })
        .collect();
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() <= 1e-13 * scale) {
        coeffs.pop();
    }
    let symbol = TwistedSymbol::new(q, 1, coeffs)?;
    let rebuilt = materialize(&symbol, max_degree)?.matrix;
    let residual = restricted_residual(&(a - rebuilt), &layout, symbol.degree());
    Ok((symbol, residual))
}

/// Scalar multiple of the identity on the fiber, as a degree-0 symbol.
pub fn constant_symbol(fiber_dim: usize, q: C64, value: C64) -> TwistedSymbol {
    TwistedSymbol::new(q, 0, vec![identity(fiber_dim) * value])
        .unwrap_or_else(|_| TwistedSymbol::identity(fiber_dim, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c64, cis};

    #[test]
    fn shift_and_rotation_matrices() {
        let q = cis(0.4);
        let s = materialize(&TwistedSymbol::shift(1, q), 2).unwrap().matrix;
        let v = CMatrix::from_column_slice(3, 1, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)]);
        let sv = &s * v;
        assert_eq!(sv[(0, 0)], c64(0.0, 0.0));
        assert_eq!(sv[(1, 0)], c64(1.0, 0.0));
        assert_eq!(sv[(2, 0)], c64(2.0, 0.0));
        let r = materialize(&TwistedSymbol::rotation(1, q, 1), 2)
            .unwrap()
            .matrix;
        assert!((r[(2, 2)] - q * q).norm() < 1e-15);
    }

    #[test]
    fn rotation_past_shift() {
        let q = cis(1.0);
        let rs = symbol_compose(
            &TwistedSymbol::rotation(2, q, 1),
            &TwistedSymbol::shift(2, q),
        )
        .unwrap();
        assert_eq!(rs.twist(), 1);
        assert!((&rs.coeffs()[1] - identity(2) * q).norm() < 1e-15);
    }
}
