//! Fundamental operators, the canonical unitary pair on `ran Q_{T*}`, the
//! characteristic function and triple, and the functional model.

use crate::ando::{star_ando_tuple, AndoTuple};
use crate::error::{Error, Result};
use crate::hardy::{apply_symbol, apply_symbol_adjoint, obs_op, TwistedSymbol};
use crate::matcore::{
    c64, cis, column_space, defect, identity, null_space, op_norm, pinv, power_limit, psd_sqrt,
    psd_sqrt_floored, range_basis_of_psd, singular_values, zeros, CMatrix, Defect, SubspaceBasis,
    C64,
};
use crate::qpair::{cnu_decompose, QPair, DEFAULT_CNU_TOL};
use crate::report::{Check, CheckList};

/// `(G₁, G₂)` on `𝒟_{T*}`, in the coordinates of `defect_star`.
#[derive(Clone, Debug)]
pub struct FundamentalPair {
    pub g1: CMatrix,
    pub g2: CMatrix,
    pub defect_star: Defect,
}

impl FundamentalPair {
    pub fn dim(&self) -> usize {
        self.defect_star.dim()
    }
}

/// `G₁ = Λ_*^*P_*⊥U_*Λ_*`, `G₂ = Λ_*^*U_*^*P_*Λ_*` from the adjoint pair's tuple.
pub fn fundamental_from_star(star: &AndoTuple) -> FundamentalPair {
    let l = &star.lambda;
    let g1 = l.adjoint() * star.p_perp() * &star.u * l;
    let g2 = l.adjoint() * star.u.adjoint() * &star.p * l;
    FundamentalPair {
        g1,
        g2,
        defect_star: star.defect.clone(),
    }
}

pub fn fundamental_ops(pair: &QPair) -> Result<FundamentalPair> {
    let fp = fundamental_from_star(&star_ando_tuple(pair)?);
    let residual = funeq_residuals(pair, &fp).into_iter().fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(Error::FundamentalEquationResidual { residual });
    }
    Ok(fp)
}

/// Right-hand sides `T₁* − T₂T*` and `T₂* − qT₁T*`.
fn funeq_rhs(pair: &QPair) -> (CMatrix, CMatrix) {
    let ts = pair.product().adjoint();
    (
        pair.t1().adjoint() - pair.t2() * &ts,
        pair.t2().adjoint() - pair.t1() * &ts * pair.q(),
    )
}

fn funeq_residuals(pair: &QPair, fp: &FundamentalPair) -> [f64; 2] {
    let c = fp.defect_star.coords();
    let (r1, r2) = funeq_rhs(pair);
    [
        (c.adjoint() * &fp.g1 * &c - r1).norm(),
        (c.adjoint() * &fp.g2 * &c - r2).norm(),
    ]
}

/// Least-squares solution of `D_{T*}GD_{T*} = RHS` on `𝒟_{T*}`.
pub fn fundamental_oracle(pair: &QPair, defect_star: &Defect) -> (CMatrix, CMatrix) {
    let c = defect_star.coords();
    let left = pinv(&c.adjoint(), 1e-12);
    let right = pinv(&c, 1e-12);
    let (r1, r2) = funeq_rhs(pair);
    (&left * r1 * &right, &left * r2 * &right)
}

pub fn verify_fundamental(pair: &QPair, fp: &FundamentalPair, tol: f64) -> CheckList {
    let [e1, e2] = funeq_residuals(pair, fp);
    let (o1, o2) = fundamental_oracle(pair, &fp.defect_star);
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "fundamental.funeq.g1",
        "D_T* G1 D_T* = T1* - T2 T*",
        e1,
        tol,
    ));
    out.push(Check::at_most(
        "fundamental.funeq.g2",
        "D_T* G2 D_T* = T2* - q T1 T*",
        e2,
        tol,
    ));
    out.push(Check::at_most(
        "fundamental.oracle",
        "G from Ando tuple = pinv solution of the fundamental equations",
        (&fp.g1 - o1).norm().max((&fp.g2 - o2).norm()),
        1e-9,
    ));
    out.push(Check::at_most(
        "fundamental.contractive",
        "||G_i|| <= 1",
        (op_norm(&fp.g1).max(op_norm(&fp.g2)) - 1.0).max(0.0),
        1e-9,
    ));
    out
}

/// Canonical `(W₁, W₂, W_D)` on `ran Q_{T*}`, in the coordinates of `basis`.
#[derive(Clone, Debug)]
pub struct CanonicalUnitaryPair {
    pub q: C64,
    /// `Q_{T*} = (lim TⁿT*ⁿ)^{1/2}` on `H`.
    pub q_op: CMatrix,
    pub basis: SubspaceBasis,
    pub w1: CMatrix,
    pub w2: CMatrix,
    pub wd: CMatrix,
}

impl CanonicalUnitaryPair {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `h ↦ R*Q_{T*}h`.
    pub fn coords(&self) -> CMatrix {
        self.basis.columns().adjoint() * &self.q_op
    }
}

pub fn canonical_unitary_pair(pair: &QPair) -> Result<CanonicalUnitaryPair> {
    let t = pair.product();
    let limit = power_limit(&t, 1e-13, 64)?;
    let q_op = psd_sqrt(&limit, 1e-9)?;
    let basis = range_basis_of_psd(&q_op, 1e-6);
    let y = basis.columns().adjoint() * &q_op;
    let y_inv = pinv(&y, 1e-8);
    let solve = |op: &CMatrix| -> Result<CMatrix> {
        let x_star = &y * op.adjoint() * &y_inv;
        let r = x_star.nrows();
        let residual = (x_star.adjoint() * &x_star - identity(r)).norm();
        if residual > 1e-8 {
            return Err(Error::NonUnitarySolution { residual });
        }
        Ok(x_star.adjoint())
    };
    Ok(CanonicalUnitaryPair {
        q: pair.q(),
        w1: solve(pair.t1())?,
        w2: solve(pair.t2())?,
        wd: solve(&t)?,
        q_op,
        basis,
    })
}

pub fn verify_canonical(pair: &QPair, cp: &CanonicalUnitaryPair, tol: f64) -> CheckList {
    let y = cp.coords();
    let r = cp.dim();
    let unitary = |w: &CMatrix| {
        (w.adjoint() * w - identity(r))
            .norm()
            .max((w * w.adjoint() - identity(r)).norm())
    };
    let mut out = CheckList::new();
    for (id, w, t) in [
        ("canonical.x1", &cp.w1, pair.t1()),
        ("canonical.x2", &cp.w2, pair.t2()),
    ] {
        out.push(Check::at_most(
            id,
            "X_i* Q = Q T_i*",
            (w.adjoint() * &y - &y * t.adjoint()).norm(),
            tol,
        ));
    }
    out.push(Check::at_most(
        "canonical.unitary",
        "W_1, W_2, W_D unitary",
        unitary(&cp.w1).max(unitary(&cp.w2)).max(unitary(&cp.wd)),
        tol,
    ));
    out.push(Check::at_most(
        "canonical.qcommute",
        "W1 W2 = q W2 W1",
        (&cp.w1 * &cp.w2 - &cp.w2 * &cp.w1 * cp.q).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "canonical.product",
        "W1* W2* = q W_D*",
        (cp.w1.adjoint() * cp.w2.adjoint() - cp.wd.adjoint() * cp.q).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "canonical.fixed_point",
        "T Q^2 T* = Q^2",
        {
            let q2 = &cp.q_op * &cp.q_op;
            let t = pair.product();
            (&t * &q2 * t.adjoint() - q2).norm()
        },
        tol,
    ));
    out
}

/// `τ_ψ = ψ|_{ran Q}` read between the two canonical bases, checked against
/// all three unitaries.
pub fn canonicity_transport(a: &QPair, b: &QPair, psi: &CMatrix, tol: f64) -> Result<CheckList> {
    let intertwine = (psi * a.t1() - b.t1() * psi)
        .norm()
        .max((psi * a.t2() - b.t2() * psi).norm());
    if intertwine > 1e-10 {
        return Err(Error::NotIntertwiner {
            residual: intertwine,
        });
    }
    let ca = canonical_unitary_pair(a)?;
    let cb = canonical_unitary_pair(b)?;
    let tau = cb.basis.columns().adjoint() * psi * ca.basis.columns();
    let mut out = CheckList::new();
    out.push(Check::equal_counts(
        "canonical.transport.dim",
        "dim ran Q = dim ran Q'",
        ca.dim(),
        cb.dim(),
    ));
    if ca.dim() != cb.dim() {
        return Ok(out);
    }
    let r = ca.dim();
    out.push(Check::at_most(
        "canonical.transport.unitary",
        "tau_psi unitary on ran Q",
        (tau.adjoint() * &tau - identity(r)).norm(),
        tol,
    ));
    for (id, wa, wb) in [
        ("canonical.transport.w1", &ca.w1, &cb.w1),
        ("canonical.transport.w2", &ca.w2, &cb.w2),
        ("canonical.transport.wd", &ca.wd, &cb.wd),
    ] {
        out.push(Check::at_most(
            id,
            "tau_psi W = W' tau_psi",
            (&tau * wa - wb * &tau).norm(),
            tol,
        ));
    }
    Ok(out)
}

/// Tests a candidate pair on `ran Q_{T*}` against the defining relations and
/// then against the canonical pair. Returns the verdict with its checks.
pub fn verify_unique_canonical(
    pair: &QPair,
    w1p: &CMatrix,
    w2p: &CMatrix,
) -> Result<(bool, CheckList)> {
    let cp = canonical_unitary_pair(pair)?;
    let r = cp.dim();
    if w1p.shape() != (r, r) || w2p.shape() != (r, r) {
        return Err(Error::DimensionMismatch(format!(
            "candidates must act on ran Q of dimension {r}"
        )));
    }
    let y = cp.coords();
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "canonical.candidate.x1",
        "W1'* Q = Q T1*",
        (w1p.adjoint() * &y - &y * pair.t1().adjoint()).norm(),
        1e-9,
    ));
    out.push(Check::at_most(
        "canonical.candidate.x2",
        "W2'* Q = Q T2*",
        (w2p.adjoint() * &y - &y * pair.t2().adjoint()).norm(),
        1e-9,
    ));
    out.push(Check::at_most(
        "canonical.candidate.product",
        "W1'* W2'* = q W_D*",
        (w1p.adjoint() * w2p.adjoint() - cp.wd.adjoint() * pair.q()).norm(),
        1e-9,
    ));
    let preconditions = out.passed();
    out.push(Check::at_most(
        "canonical.candidate.equal",
        "(W1', W2') = (W1, W2)",
        (w1p - &cp.w1).norm().max((w2p - &cp.w2).norm()),
        1e-9,
    ));
    Ok((preconditions && out.passed(), out))
}

/// `Θ_T(z) = −T + zD_{T*}(I − zT*)^{-1}D_T` read from `𝒟_T` to `𝒟_{T*}`.
#[derive(Clone, Debug)]
pub struct CharFunction {
    t: CMatrix,
    defect: Defect,
    defect_star: Defect,
}

impl CharFunction {
    pub fn new(t: &CMatrix) -> Result<Self> {
        Self::with_star_defect(t, defect(&t.adjoint(), None)?)
    }

    /// Uses a given `𝒟_{T*}` basis, so that `Θ` shares coordinates with
    /// objects built from the adjoint pair's tuple.
    pub fn with_star_defect(t: &CMatrix, defect_star: Defect) -> Result<Self> {
        Ok(CharFunction {
            t: t.clone(),
            defect: defect(t, None)?,
            defect_star,
        })
    }

    pub fn defect(&self) -> &Defect {
        &self.defect
    }

    pub fn defect_star(&self) -> &Defect {
        &self.defect_star
    }

    pub fn eval(&self, z: C64) -> Result<CMatrix> {
        let b = self.defect.basis.columns();
        let bs = self.defect_star.basis.columns();
        let n = self.t.nrows();
        let resolvent = identity(n) - self.t.adjoint() * z;
        let rhs = &self.defect.d * b;
        let solved = resolvent
            .lu()
            .solve(&rhs)
            .filter(|x| x.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
            .filter(|x| x.norm() < 1e12 * rhs.norm().max(1.0))
            .ok_or(Error::SingularResolvent { re: z.re, im: z.im })?;
        let full = -(&self.t * b) + &self.defect_star.d * solved * z;
        Ok(bs.adjoint() * full)
    }

    /// `θ₀ = −T`, `θ_k = D_{T*}T*^{k−1}D_T` for `k = 1…n`.
    pub fn taylor_coeffs(&self, n: usize) -> Vec<CMatrix> {
        let b = self.defect.basis.columns();
        let bs = self.defect_star.basis.columns();
        let mut out = vec![-(bs.adjoint() * &self.t * b)];
        let mut tail = &self.defect.d * b;
        let ts = self.t.adjoint();
        for _ in 0..n {
            out.push(bs.adjoint() * &self.defect_star.d * &tail);
            tail = &ts * tail;
        }
        out
    }

    /// `Δ(z) = (I − Θ(z)*Θ(z))^{1/2}` with roundoff-level eigenvalues floored.
    pub fn delta(&self, z: C64) -> Result<CMatrix> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!("|z| = {} > 1", z.norm())));
        }
        let th = self.eval(z)?;
        let h = identity(th.ncols()) - th.adjoint() * th;
        psd_sqrt_floored(&h, 1e-9, 1e-12)
    }

    /// Smallest `1 − ‖Θ(0)f‖` over unit vectors `f ∈ 𝒟_T`.
    pub fn pure_contraction_margin(&self) -> f64 {
        let th0 = self.taylor_coeffs(0).remove(0);
        if th0.ncols() == 0 {
            return 1.0;
        }
        let mut sv = singular_values(&th0);
        sv.resize(th0.ncols(), 0.0);
        1.0 - sv[0]
    }
}

pub fn char_fn(t: &CMatrix, z: C64) -> Result<CMatrix> {
    CharFunction::new(t)?.eval(z)
}

pub fn delta_fn(t: &CMatrix, zeta: C64) -> Result<CMatrix> {
    CharFunction::new(t)?.delta(zeta)
}

/// Evaluation points `r·e^{iθ}` for `radii × angles`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskGrid {
    pub radii: Vec<f64>,
    pub angles: usize,
}

impl DiskGrid {
    pub fn new(radii: usize, angles: usize) -> Self {
        DiskGrid {
            radii: (1..=radii)
                .map(|k| 0.95 * k as f64 / radii as f64)
                .collect(),
            angles,
        }
    }

    pub fn circle(angles: usize) -> Self {
        DiskGrid {
            radii: vec![1.0],
            angles,
        }
    }

    pub fn points(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.radii.len() * self.angles);
        for &r in &self.radii {
            for k in 0..self.angles {
                out.push(cis(std::f64::consts::TAU * k as f64 / self.angles as f64) * r);
            }
        }
        out
    }
}

impl Default for DiskGrid {
    fn default() -> Self {
        DiskGrid::new(8, 16)
    }
}

/// `((G₁, G₂), (W₁, W₂), Θ_T)` for a pair with cnu product.
#[derive(Clone, Debug)]
pub struct CharTriple {
    pub q: C64,
    pub fundamental: FundamentalPair,
    /// Zero-dimensional for cnu products; kept to record `‖Q_{T*}‖`.
    pub unitary: CanonicalUnitaryPair,
    pub theta: CharFunction,
}

pub fn char_triple(pair: &QPair) -> Result<CharTriple> {
    let t = pair.product();
    let split = cnu_decompose(&t, DEFAULT_CNU_TOL)?;
    if split.unitary_part.dim() > 0 {
        return Err(Error::NotCnu {
            unitary_dim: split.unitary_part.dim(),
        });
    }
    let star = star_ando_tuple(pair)?;
    let fundamental = fundamental_from_star(&star);
    let unitary = canonical_unitary_pair(pair)?;
    let theta = CharFunction::with_star_defect(&t, star.defect)?;
    Ok(CharTriple {
        q: pair.q(),
        fundamental,
        unitary,
        theta,
    })
}

/// Checks carried by every characteristic triple: `Θ(0) = −T|𝒟_T`,
/// contractivity on the disk grid, pure contractivity, and the collapse of
/// the unitary part.
pub fn verify_triple(
    pair: &QPair,
    triple: &CharTriple,
    grid: &DiskGrid,
    tol: f64,
) -> Result<CheckList> {
    let t = pair.product();
    let b = triple.theta.defect().basis.columns();
    let bs = triple.theta.defect_star().basis.columns();
    let th0 = triple.theta.eval(c64(0.0, 0.0))?;
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "triple.theta0",
        "Theta(0) = -T on D_T",
        (bs * th0 * b.adjoint() + &t * b * b.adjoint()).norm(),
        1e-13,
    ));
    let mut worst: f64 = 0.0;
    for z in grid.points() {
        worst = worst.max(op_norm(&triple.theta.eval(z)?));
    }
    out.push(Check::at_most(
        "triple.theta.contractive",
        "||Theta(z)|| <= 1 on the disk grid",
        (worst - 1.0).max(0.0),
        tol,
    ));
    out.push(Check::at_least(
        "triple.theta.pure",
        "||Theta(0) f|| < ||f|| for f in D_T",
        triple.theta.pure_contraction_margin(),
        1e-12,
    ));
    out.push(Check::at_most(
        "triple.unitary.collapse",
        "Q_T* = 0 for a cnu product",
        op_norm(&triple.unitary.q_op),
        1e-6,
    ));
    out.extend(verify_fundamental(pair, &triple.fundamental, tol.min(1e-9)));
    Ok(out)
}

/// Largest `‖I − Θ(ζ)*Θ(ζ)‖` over `angles` points of the unit circle.
pub fn boundary_inner_defect(theta: &CharFunction, angles: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in DiskGrid::circle(angles).points() {
        let th = theta.eval(z)?;
        worst = worst.max(op_norm(&(identity(th.ncols()) - th.adjoint() * &th)));
    }
    Ok(worst)
}

/// Hardy blocks `M_{G₁*+zG₂}R_q` and `R_{q̄}M_{G₂*+zG₁}` on `H²(𝒟_{T*})`.
pub fn model_symbols(g1: &CMatrix, g2: &CMatrix, q: C64) -> Result<(TwistedSymbol, TwistedSymbol)> {
    let s1 = TwistedSymbol::new(q, 1, vec![g1.adjoint(), g2.clone()])?;
    let s2 = TwistedSymbol::new(q, -1, vec![g2.adjoint(), g1 * q.conj()])?;
    Ok((s1, s2))
}

/// `‖T*^{N+1}‖`.
pub fn truncation_tail(t: &CMatrix, max_degree: usize) -> f64 {
    let ts = t.adjoint();
    let mut p = identity(t.nrows());
    for _ in 0..=max_degree {
        p = &ts * p;
    }
    op_norm(&p)
}

/// Smallest `N ≤ cap` with `‖T*^{N+1}‖ < limit`.
pub fn truncation_for_tail(t: &CMatrix, limit: f64, cap: usize) -> Option<usize> {
    let ts = t.adjoint();
    let mut p = ts.clone();
    for n in 0..=cap {
        if op_norm(&p) < limit {
            return Some(n);
        }
        p = &ts * p;
    }
    None
}

pub const MODEL_TAIL_LIMIT: f64 = 1e-10;

/// Orthonormal basis of `ran O_N` inside `H²_N(𝒟_{T*})`, with `O_N` itself.
pub fn model_space(
    t: &CMatrix,
    defect_star: &Defect,
    max_degree: usize,
) -> Result<(SubspaceBasis, CMatrix)> {
    let tail = truncation_tail(t, max_degree);
    if tail > MODEL_TAIL_LIMIT {
        return Err(Error::TailTooLarge {
            tail,
            limit: MODEL_TAIL_LIMIT,
        });
    }
    let obs = obs_op(t, defect_star, max_degree);
    Ok((column_space(&obs, 1e-8), obs))
}

/// Compression of the model operators to `ran O_N` and its comparison with
/// the source pair through `V₀ = Mb*O_N`.
#[derive(Clone, Debug)]
pub struct ModelCompression {
    pub max_degree: usize,
    pub m1: CMatrix,
    pub m2: CMatrix,
    pub v0: CMatrix,
    /// `max_i ‖V₀T_i* − M_i*V₀‖`.
    pub defect: f64,
    /// `‖V₀*V₀ − I‖`.
    pub unitarity: f64,
    pub tail: f64,
}

pub fn model_compress(pair: &QPair, max_degree: usize) -> Result<ModelCompression> {
    let t = pair.product();
    let split = cnu_decompose(&t, DEFAULT_CNU_TOL)?;
    if split.unitary_part.dim() > 0 {
        return Err(Error::NotCnu {
            unitary_dim: split.unitary_part.dim(),
        });
    }
    let fp = fundamental_ops(pair)?;
    let (basis, obs) = model_space(&t, &fp.defect_star, max_degree)?;
    let mb = basis.columns();
    let (s1, s2) = model_symbols(&fp.g1, &fp.g2, pair.q())?;
    let m1 = mb.adjoint() * apply_symbol(&s1, max_degree, mb);
    let m2 = mb.adjoint() * apply_symbol(&s2, max_degree, mb);
    let v0 = mb.adjoint() * &obs;
    let defect = (&v0 * pair.t1().adjoint() - m1.adjoint() * &v0)
        .norm()
        .max((&v0 * pair.t2().adjoint() - m2.adjoint() * &v0).norm());
    let n = pair.dim();
    let unitarity = if v0.ncols() == v0.nrows() {
        (v0.adjoint() * &v0 - identity(n)).norm()
    } else {
        f64::INFINITY
    };
    Ok(ModelCompression {
        max_degree,
        m1,
        m2,
        v0,
        defect,
        unitarity,
        tail: truncation_tail(&t, max_degree),
    })
}

/// Equivalence defect at `N` and `2N`, with the ratio bound
/// `defect(2N) ≤ 10·defect(N)·tail(2N)/tail(N) + 1e-13`.
pub fn model_ratio_test(pair: &QPair, max_degree: usize) -> Result<CheckList> {
    let a = model_compress(pair, max_degree)?;
    let b = model_compress(pair, 2 * max_degree)?;
    let bound = if a.tail > 0.0 {
        10.0 * a.defect * b.tail / a.tail + 1e-13
    } else {
        1e-13
    };
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "model.equivalence",
        "V0 T_i* = M_i* V0 with V0 = P_H O_N",
        a.defect,
        1e-8,
    ));
    out.push(Check::at_most(
        "model.unitary",
        "V0* V0 = I - T^(N+1) T*^(N+1)",
        a.unitarity,
        1e-8,
    ));
    out.push(Check::at_most(
        "model.ratio",
        "defect(2N) <= 10 defect(N) tail(2N)/tail(N)",
        b.defect,
        bound,
    ));
    Ok(out)
}

/// `u: 𝒟_T → 𝒟_{T'}` and `u_*: 𝒟_{T*} → 𝒟_{T'*}` induced by `ψ`.
pub fn induced_defect_unitaries(
    a: &CharTriple,
    b: &CharTriple,
    psi: &CMatrix,
) -> (CMatrix, CMatrix) {
    let u = b.theta.defect().basis.columns().adjoint() * psi * a.theta.defect().basis.columns();
    let u_star = b.theta.defect_star().basis.columns().adjoint()
        * psi
        * a.theta.defect_star().basis.columns();
    (u, u_star)
}

pub fn verify_coincidence(
    a: &CharTriple,
    b: &CharTriple,
    u: &CMatrix,
    u_star: &CMatrix,
    grid: &DiskGrid,
    tol: f64,
) -> Result<CheckList> {
    let mut out = CheckList::new();
    let (d, ds) = (a.theta.defect().dim(), a.theta.defect_star().dim());
    let shapes_match = u.shape() == (b.theta.defect().dim(), d)
        && u_star.shape() == (b.theta.defect_star().dim(), ds)
        && b.fundamental.dim() == ds;
    out.push(Check::at_most(
        "coincide.shapes",
        "u: D -> D', u*: D* -> D'*",
        if shapes_match { 0.0 } else { 1.0 },
        0.0,
    ));
    if !shapes_match {
        return Ok(out);
    }
    let unitary = |w: &CMatrix| {
        let k = w.ncols();
        (w.adjoint() * w - identity(k))
            .norm()
            .max((w * w.adjoint() - identity(w.nrows())).norm())
    };
    out.push(Check::at_most(
        "coincide.unitary",
        "u, u* unitary",
        unitary(u).max(unitary(u_star)),
        tol,
    ));
    let mut worst: f64 = 0.0;
    for z in grid.points() {
        let lhs = u_star * a.theta.eval(z)?;
        let rhs = b.theta.eval(z)? * u;
        worst = worst.max((lhs - rhs).norm());
    }
    out.push(Check::at_most(
        "coincide.theta",
        "u* Theta(z) = Theta'(z) u",
        worst,
        tol,
    ));
    let g = |x: &CMatrix| u_star * x * u_star.adjoint();
    out.push(Check::at_most(
        "coincide.fundamental",
        "(G1', G2') = u* (G1, G2) u**",
        (&b.fundamental.g1 - g(&a.fundamental.g1))
            .norm()
            .max((&b.fundamental.g2 - g(&a.fundamental.g2)).norm()),
        tol,
    ));
    out.push(Check::equal_counts(
        "coincide.unitary_part",
        "omega_u intertwines the unitary parts",
        a.unitary.dim(),
        b.unitary.dim(),
    ));
    Ok(out)
}

/// Outcome of the admissibility test: the checks, the dimension of the
/// truncated `ℋ_Θ`, and the residuals of condition (4) in its literal form
/// `q·𝕎₁*M*_{φ₂} = M*_{φ₂}𝕎₁* = M_z*`, which are recorded but not checked.
#[derive(Clone, Debug)]
pub struct Admissibility {
    pub checks: CheckList,
    pub h_dim: usize,
    pub literal_cond4: [f64; 2],
}

/// Admissibility of `((G₁, G₂), 0, Θ)` with `Θ` given by Taylor coefficients
/// (`𝒟 → 𝒟_*`). `ℋ_Θ` is approximated by the left singular vectors of the
/// truncated Toeplitz matrix of `Θ` with singular value below `1e-6`.
pub fn verify_admissible(
    g1: &CMatrix,
    g2: &CMatrix,
    theta: &[CMatrix],
    q: C64,
    max_degree: usize,
    tol: f64,
) -> Result<Admissibility> {
    let ds = g1.nrows();
    if g1.shape() != (ds, ds) || g2.shape() != (ds, ds) || theta.iter().any(|c| c.nrows() != ds) {
        return Err(Error::DimensionMismatch(
            "G and Theta must act into D*".into(),
        ));
    }
    let d = theta.first().map_or(0, |c| c.ncols());
    let n = max_degree;
    let mut toeplitz = zeros((n + 1) * ds, (n + 1) * d);
    for j in 0..=n {
        for (k, c) in theta.iter().enumerate() {
            if j + k > n {
                break;
            }
            toeplitz
                .view_mut(((j + k) * ds, j * d), (ds, d))
                .copy_from(c);
        }
    }
    let h = null_space(&toeplitz.adjoint(), 1e-6);
    let ph = &h * h.adjoint();
    let total = (n + 1) * ds;
    let (s1, s2) = model_symbols(g1, g2, q)?;
    let shift = TwistedSymbol::shift(ds, q);
    let plain2 = TwistedSymbol::new(q, 0, vec![g2.adjoint(), g1.clone()])?;

    let mut checks = CheckList::new();
    let w1 = crate::hardy::materialize(&s1, n)?.matrix;
    let w2 = crate::hardy::materialize(&s2, n)?.matrix;
    checks.push(Check::at_most(
        "admissible.cond1",
        "M_(G1*+zG2) R_q and R_qbar M_(G2*+zG1) are contractions",
        (op_norm(&w1).max(op_norm(&w2)) - 1.0).max(0.0),
        tol,
    ));
    checks.push(Check::at_most(
        "admissible.cond2",
        "W1 W2 = M_zeta on the Delta space (zero-dimensional)",
        0.0,
        tol,
    ));
    let perp = identity(total) - &ph;
    let mut inv: f64 = 0.0;
    for s in [&s1, &s2, &shift] {
        inv = inv.max((&perp * apply_symbol_adjoint(s, n, &h)).norm());
    }
    checks.push(Check::at_most(
        "admissible.cond3",
        "H_Theta invariant under the adjoints of the model operators and M_z",
        inv,
        tol,
    ));
    let w1s_h = apply_symbol_adjoint(&s1, n, &h);
    let w2s_h = apply_symbol_adjoint(&s2, n, &h);
    let mzs_h = apply_symbol_adjoint(&shift, n, &h);
    let a21 = h.adjoint() * apply_symbol_adjoint(&s2, n, &w1s_h);
    let a12 = h.adjoint() * apply_symbol_adjoint(&s1, n, &w2s_h);
    let mz = h.adjoint() * &mzs_h;
    checks.push(Check::at_most(
        "admissible.cond4.product",
        "W2* W1* = M_z* on H_Theta",
        (&a21 - &mz).norm(),
        tol,
    ));
    checks.push(Check::at_most(
        "admissible.cond4.qcommute",
        "W1* W2* = q M_z* on H_Theta",
        (&a12 - &mz * q).norm(),
        tol,
    ));
    let m2s_h = apply_symbol_adjoint(&plain2, n, &h);
    let lit_a = h.adjoint() * apply_symbol_adjoint(&s1, n, &m2s_h) * q;
    let lit_b = h.adjoint() * apply_symbol_adjoint(&plain2, n, &w1s_h);
    Ok(Admissibility {
        checks,
        h_dim: h.ncols(),
        literal_cond4: [(&lit_a - &mz).norm(), (&lit_b - &mz).norm()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpair::gen_nilpotent;

    #[test]
    fn blaschke_factor() {
        let c = 0.5;
        let t = CMatrix::from_element(1, 1, c64(c, 0.0));
        for z in DiskGrid::new(4, 8).points() {
            let got = char_fn(&t, z).unwrap()[(0, 0)];
            let want = (z - c) / (c64(1.0, 0.0) - z * c);
            assert!((got - want).norm() < 1e-13);
        }
        assert!(delta_fn(&t, cis(0.3)).unwrap().norm() < 1e-12);
    }

    #[test]
    fn zero_pair_fundamentals_vanish() {
        let pair = QPair::zero(1, cis(1.0)).unwrap();
        let fp = fundamental_ops(&pair).unwrap();
        assert_eq!(fp.dim(), 1);
        assert!(fp.g1.norm() < 1e-15 && fp.g2.norm() < 1e-15);
    }

    #[test]
    fn nilpotent_fundamentals_match_oracle() {
        let pair = gen_nilpotent(2, c64(0.0, 1.0), c64(0.8, 0.0), c64(0.8, 0.0)).unwrap();
        let fp = fundamental_ops(&pair).unwrap();
        assert!(verify_fundamental(&pair, &fp, 1e-11).passed());
    }
}
