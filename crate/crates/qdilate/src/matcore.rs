//! Dense complex matrix primitives: PSD square roots, defect operators,
//! orthonormal bases, unitary completion and the `T^n T*^n` limit.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Slack allowed on `‖T‖ ≤ 1` before a matrix is rejected as a contraction.
pub const CONTRACTION_SLACK: f64 = 1e-10;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Unimodular scalar `e^{iθ}`.
pub fn cis(theta: f64) -> C64 {
    Complex::from_polar(1.0, theta)
}

/// Integer power of a unimodular scalar, computed from its argument so that
/// large exponents do not accumulate rounding.
pub fn upow(q: C64, k: i64) -> C64 {
    match k {
        0 => c64(1.0, 0.0),
        1 => q,
        -1 => q.conj(),
        _ => cis(q.arg() * k as f64),
    }
}

// Dense factorizations go through faer; nalgebra's complex SVD and
// Hermitian eigensolver lose accuracy on clustered spectra.
fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Full SVD `a = UΣV*` with singular values in descending order.
struct Svd {
    u: CMatrix,
    s: Vec<f64>,
    v: CMatrix,
}

fn svd(a: &CMatrix) -> Svd {
    let f = to_faer(a);
    let d = f.svd().expect("SVD did not converge");
    Svd {
        u: from_faer(d.U()),
        s: d.S().column_vector().iter().map(|z| z.re).collect(),
        v: from_faer(d.V()),
    }
}

/// Spectral norm (largest singular value); zero for empty matrices.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("SVD did not converge");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_contraction(m: &CMatrix) -> bool {
    op_norm(m) <= 1.0 + CONTRACTION_SLACK
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = to_faer(&hermitize(h))
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver did not converge");
    let raw: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let vals = order.iter().map(|&i| raw[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    (vals, vecs)
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let asymmetry = (h - h.adjoint()).norm();
    if asymmetry > 1e-12 * h.norm().max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

/// Positive square root of a Hermitian matrix. Eigenvalues in
/// `[-clamp_tol, 0)` are treated as zero.
pub fn psd_sqrt(h: &CMatrix, clamp_tol: f64) -> Result<CMatrix> {
    psd_sqrt_floored(h, clamp_tol, 0.0)
}

/// Default clamp threshold for [`psd_sqrt`].
pub fn default_clamp_tol(h: &CMatrix) -> f64 {
    1e-10 * op_norm(h).max(1.0)
}

/// As [`psd_sqrt`], but eigenvalues at or below `floor` are also sent to zero.
/// Used where the input is known to be a difference of near-equal operators
/// and roundoff would otherwise surface as `sqrt(ε)`-sized spurious entries.
pub(crate) fn psd_sqrt_floored(h: &CMatrix, clamp_tol: f64, floor: f64) -> Result<CMatrix> {
    check_hermitian(h)?;
    let (vals, vecs) = eigh(h);
    let mut roots = Vec::with_capacity(vals.len());
    for &v in &vals {
        if v < -clamp_tol {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: v,
                clamp: clamp_tol,
            });
        }
        roots.push(if v <= floor { 0.0 } else { v.sqrt() });
    }
    Ok(from_spectrum(&vecs, &roots))
}

fn from_spectrum(vecs: &CMatrix, vals: &[f64]) -> CMatrix {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    let s = &scaled * vecs.adjoint();
    if n == 0 {
        s
    } else {
        hermitize(&s)
    }
}

/// Orthonormal basis of a subspace of `C^ambient_dim`, stored as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    columns: CMatrix,
}

impl SubspaceBasis {
    pub fn new(columns: CMatrix) -> Result<Self> {
        let k = columns.ncols();
        let gram = columns.adjoint() * &columns;
        let residual = (gram - identity(k)).norm();
        if residual > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "basis columns are not orthonormal (residual {residual:.3e})"
            )));
        }
        Ok(SubspaceBasis {
            ambient_dim: columns.nrows(),
            columns,
        })
    }

    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            columns: zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient_dim,
            columns: identity(ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }

    pub fn projector(&self) -> CMatrix {
        &self.columns * self.columns.adjoint()
    }

    pub fn complement(&self) -> SubspaceBasis {
        let n = self.ambient_dim;
        let residual = identity(n) - self.projector();
        SubspaceBasis {
            ambient_dim: n,
            columns: pivoted_orthonormal(&residual, n - self.dim()),
        }
    }
}

/// Gram–Schmidt with column pivoting: repeatedly takes the remaining column
/// of largest norm. Returns at most `max_rank` orthonormal columns.
pub fn pivoted_orthonormal(a: &CMatrix, max_rank: usize) -> CMatrix {
    let n = a.nrows();
    let mut work = a.clone();
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let scale = a.norm().max(1.0);
    while basis.len() < max_rank {
        let mut best = None;
        let mut best_norm = 0.0;
        for j in 0..work.ncols() {
            let nj = work.column(j).norm();
            if nj > best_norm {
                best_norm = nj;
                best = Some(j);
            }
        }
        let Some(j) = best else { break };
        if best_norm <= 1e-9 * scale {
            break;
        }
        let mut v: DVector<C64> = work.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let nv = v.norm();
        if nv <= 1e-9 * scale {
            work.column_mut(j).fill(c64(0.0, 0.0));
            continue;
        }
        v.unscale_mut(nv);
        for k in 0..work.ncols() {
            let coef = v.dotc(&work.column(k));
            let update = &v * coef;
            let mut col = work.column_mut(k);
            col -= update;
        }
        basis.push(v);
    }
    let mut out = zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Range of a Hermitian PSD matrix: spectral projector onto eigenvalues
/// above `tol`, then pivoted orthonormalization of its columns so that the
/// basis aligns with coordinate axes whenever possible.
pub fn range_basis_of_psd(h: &CMatrix, tol: f64) -> SubspaceBasis {
    let n = h.nrows();
    let (vals, vecs) = eigh(h);
    let k = vals.iter().filter(|&&v| v > tol).count();
    if k == 0 {
        return SubspaceBasis::empty(n);
    }
    if k == n {
        return SubspaceBasis::full(n);
    }
    let e = vecs.columns(0, k).into_owned();
    let proj = &e * e.adjoint();
    SubspaceBasis {
        ambient_dim: n,
        columns: pivoted_orthonormal(&proj, k),
    }
}

/// Orthonormal basis of the column space of `a` (left singular vectors with
/// singular value above `tol`).
pub fn column_space(a: &CMatrix, tol: f64) -> SubspaceBasis {
    let n = a.nrows();
    if a.ncols() == 0 || n == 0 {
        return SubspaceBasis::empty(n);
    }
    let d = svd(a);
    let keep: Vec<usize> = (0..d.s.len()).filter(|&i| d.s[i] > tol).collect();
    let k = keep.len();
    if k == 0 {
        return SubspaceBasis::empty(n);
    }
    if k == n {
        return SubspaceBasis::full(n);
    }
    let e = select_columns(&d.u, &keep);
    SubspaceBasis {
        ambient_dim: n,
        columns: pivoted_orthonormal(&(&e * e.adjoint()), k),
    }
}

pub fn numerical_rank(a: &CMatrix, tol: f64) -> usize {
    singular_values(a).iter().filter(|&&s| s > tol).count()
}

/// Polar factor `UV*` of `a = UΣV*`: the isometry closest to `a`.
pub fn nearest_isometry(a: &CMatrix) -> CMatrix {
    if a.nrows() == 0 || a.ncols() == 0 {
        return a.clone();
    }
    let d = svd(a);
    let k = d.s.len();
    d.u.columns(0, k) * d.v.columns(0, k).adjoint()
}

/// Moore–Penrose pseudoinverse; singular values below `rtol·σ_max` are dropped.
pub fn pinv(a: &CMatrix, rtol: f64) -> CMatrix {
    let (r, c) = (a.nrows(), a.ncols());
    if r == 0 || c == 0 {
        return zeros(c, r);
    }
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let mut out = zeros(c, r);
    for (i, &s) in d.s.iter().enumerate() {
        if s > rtol * smax && s > 0.0 {
            out += d.v.column(i) * d.u.column(i).adjoint() * c64(1.0 / s, 0.0);
        }
    }
    out
}

/// Default rank threshold for defect operators. The defect is the square root
/// of `I − T*T`, whose entries carry roundoff of order `n·ε`; this threshold
/// sits above the resulting `sqrt(n·ε)` noise.
pub fn default_rank_tol(n: usize) -> f64 {
    16.0 * ((n.max(1) as f64) * f64::EPSILON).sqrt()
}

/// Defect operator `D_T` and an orthonormal basis of its range.
#[derive(Clone, Debug)]
pub struct Defect {
    pub d: CMatrix,
    pub basis: SubspaceBasis,
}

impl Defect {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `B*·D`: the defect operator read in basis coordinates.
    pub fn coords(&self) -> CMatrix {
        self.basis.columns().adjoint() * &self.d
    }

    /// Right inverse of [`Defect::coords`] on the defect space.
    pub fn coords_pinv(&self) -> CMatrix {
        pinv(&self.coords(), 1e-12)
    }
}

pub fn defect(t: &CMatrix, rank_tol: Option<f64>) -> Result<Defect> {
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "defect of a {}x{} matrix",
            t.nrows(),
            t.ncols()
        )));
    }
    let norm = op_norm(t);
    if norm > 1.0 + CONTRACTION_SLACK {
        return Err(Error::NotContraction {
            which: "T".into(),
            norm,
        });
    }
    let n = t.nrows();
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(n));
    let h = hermitize(&(identity(n) - t.adjoint() * t));
    let floor = tol * tol;
    let d = psd_sqrt_floored(&h, 4e-10, floor)?;
    let basis = range_basis_of_psd(&h, floor);
    Ok(Defect { d, basis })
}

/// Unitary on the ambient space extending an isometry from `source` onto
/// `target`. The complements are matched by pivoted orthonormalization of
/// `I − P` applied to the standard basis, paired in pivot order.
pub fn complete_to_unitary(
    source: &SubspaceBasis,
    target: &SubspaceBasis,
    partial: &CMatrix,
) -> Result<CMatrix> {
    complete_to_unitary_with(source, target, partial, None)
}

/// As [`complete_to_unitary`]; `completion`, when given, is a unitary on the
/// complement coordinates inserted between the two complement bases.
pub fn complete_to_unitary_with(
    source: &SubspaceBasis,
    target: &SubspaceBasis,
    partial: &CMatrix,
    completion: Option<&CMatrix>,
) -> Result<CMatrix> {
    let n = source.ambient_dim();
    if target.ambient_dim() != n || partial.nrows() != n || partial.ncols() != n {
        return Err(Error::DimensionMismatch(
            "source, target and partial must share the ambient space".into(),
        ));
    }
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "source dim {} vs target dim {}",
            source.dim(),
            target.dim()
        )));
    }
    let k = source.dim();
    let image = partial * source.columns();
    let iso = (image.adjoint() * &image - identity(k)).norm();
    let outside = (&image - target.projector() * &image).norm();
    let residual = iso.max(outside);
    if residual > 1e-10 {
        return Err(Error::NotIsometricOnSource { residual });
    }
    let src_c = source.complement();
    let tgt_c = target.complement();
    let m = n - k;
    if src_c.dim() != m || tgt_c.dim() != m {
        return Err(Error::DimensionMismatch(
            "complements could not be completed to full rank".into(),
        ));
    }
    let middle = match completion {
        Some(c) => {
            if c.nrows() != m || c.ncols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "completion must be {m}x{m}"
                )));
            }
            let res = (c.adjoint() * c - identity(m)).norm();
            if res > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "completion is not unitary (residual {res:.3e})"
                )));
            }
            c.clone()
        }
        None => identity(m),
    };
    Ok(&image * source.columns().adjoint() + tgt_c.columns() * middle * src_c.columns().adjoint())
}

const POWER_LIMIT_FLOOR: f64 = 1e-10;

/// `lim T^n T*^n` by repeated squaring of `T`. Squaring doubles the roundoff
/// carried by a unitary part, so once the gap stops shrinking below
/// `POWER_LIMIT_FLOOR` the best iterate is returned.
pub fn power_limit(t: &CMatrix, tol: f64, max_doublings: usize) -> Result<CMatrix> {
    let norm = op_norm(t);
    if norm > 1.0 + CONTRACTION_SLACK {
        return Err(Error::NotContraction {
            which: "T".into(),
            norm,
        });
    }
    let mut b = t.clone();
    let mut a = hermitize(&(&b * b.adjoint()));
    let mut gap = f64::INFINITY;
    for _ in 0..max_doublings {
        b = &b * &b;
        let next = hermitize(&(&b * b.adjoint()));
        let step = (&next - &a).norm();
        if step < tol {
            return Ok(next);
        }
        if gap < POWER_LIMIT_FLOOR && (step >= gap || step.is_nan()) {
            return Ok(a);
        }
        gap = step;
        a = next;
    }
    Err(Error::MaxIterationsExceeded { gap })
}

pub fn eigenvalues(a: &CMatrix) -> Vec<C64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    to_faer(a)
        .eigenvalues()
        .expect("eigenvalue iteration did not converge")
}

pub fn spectral_radius(a: &CMatrix) -> f64 {
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of the (numerical) kernel of a square matrix.
pub fn null_space(a: &CMatrix, tol: f64) -> CMatrix {
    let n = a.ncols();
    if n == 0 {
        return zeros(0, 0);
    }
    if a.nrows() == 0 {
        return identity(n);
    }
    let d = svd(a);
    let cols: Vec<usize> = (0..n)
        .filter(|&i| d.s.get(i).is_none_or(|&s| s <= tol))
        .collect();
    select_columns(&d.v, &cols)
}

pub fn select_columns(a: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])])
}

pub fn select_rows(a: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), a.ncols(), |r, c| a[(idx[r], c)])
}

pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn vstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.ncols(), "vstack column mismatch");
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), 0), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

/// JSON form of a complex matrix: row-major `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<CMatrix> {
        if j.rows * j.cols != j.data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with {} entries",
                j.rows,
                j.cols,
                j.data.len()
            )));
        }
        if j.data
            .iter()
            .any(|[re, im]| !re.is_finite() || !im.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(CMatrix::from_fn(j.rows, j.cols, |r, c| {
            let [re, im] = j.data[r * j.cols + c];
            c64(re, im)
        }))
    }
}

/// `#[serde(with = "matrix_serde")]` adapter for [`CMatrix`] fields.
pub mod matrix_serde {
    use super::{CMatrix, MatrixJson};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        CMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "complex_serde")]` adapter storing a scalar as `[re, im]`.
pub mod complex_serde {
    use super::{c64, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(c64(re, im))
    }
}
