//! Special Andô tuples `(F, Λ, P, U)` for a pair and for its adjoint pair.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    block_diag, complete_to_unitary_with, defect, identity, matrix_serde, nearest_isometry, vstack,
    zeros, CMatrix, Defect, SubspaceBasis,
};
use crate::qpair::QPair;
use crate::report::{Check, CheckList};

/// `F = 𝒟_{T₁} ⊕ 𝒟_{T₂} ⊕ E` with `Λ: 𝒟_T → F`, `P` the projection onto the
/// first summand and `U` unitary on `F`. At finite dimension `E = {0}`.
#[derive(Clone, Debug)]
pub struct AndoTuple {
    /// Defect of the product `T = T₁T₂`; `Λ` acts on its basis coordinates.
    pub defect: Defect,
    pub defect1: Defect,
    pub defect2: Defect,
    pub e_dim: usize,
    pub lambda: CMatrix,
    pub p: CMatrix,
    pub u: CMatrix,
}

impl AndoTuple {
    pub fn f_dim(&self) -> usize {
        self.defect1.dim() + self.defect2.dim() + self.e_dim
    }

    pub fn d_dim(&self) -> usize {
        self.defect.dim()
    }

    /// `ΛD_T` as a map `H → F`.
    pub fn lambda_dt(&self) -> CMatrix {
        &self.lambda * self.defect.coords()
    }

    pub fn p_perp(&self) -> CMatrix {
        identity(self.f_dim()) - &self.p
    }

    pub fn summary(&self) -> AndoTupleJson {
        AndoTupleJson {
            d_dim: self.d_dim(),
            d1_dim: self.defect1.dim(),
            d2_dim: self.defect2.dim(),
            e_dim: self.e_dim,
            lambda: self.lambda.clone(),
            p: self.p.clone(),
            u: self.u.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AndoTupleJson {
    pub d_dim: usize,
    pub d1_dim: usize,
    pub d2_dim: usize,
    pub e_dim: usize,
    #[serde(with = "matrix_serde")]
    pub lambda: CMatrix,
    #[serde(with = "matrix_serde")]
    pub p: CMatrix,
    #[serde(with = "matrix_serde")]
    pub u: CMatrix,
}

pub fn special_ando_tuple(pair: &QPair) -> Result<AndoTuple> {
    special_ando_tuple_with(pair, None)
}

/// Builds the tuple from `ΛD_T h = D_{T₁}T₂h ⊕ D_{T₂}h` and
/// `U(D_{T₁}T₂h ⊕ D_{T₂}h) = D_{T₁}h ⊕ D_{T₂}T₁h`. The optional `completion`
/// is a unitary on the complement of `ran Λ`, in the coordinates fixed by
/// the deterministic complement bases.
pub fn special_ando_tuple_with(pair: &QPair, completion: Option<&CMatrix>) -> Result<AndoTuple> {
    let (t1, t2) = (pair.t1(), pair.t2());
    let dt = defect(&pair.product(), None)?;
    let d1 = defect(t1, None)?;
    let d2 = defect(t2, None)?;
    let c1 = d1.coords();
    let c2 = d2.coords();
    let source_side = vstack(&(&c1 * t2), &c2);
    let target_side = vstack(&c1, &(&c2 * t1));
    let right_inverse = dt.coords_pinv();
    let lambda = &source_side * &right_inverse;
    let lambda_t = &target_side * &right_inverse;

    let k = dt.dim();
    let coords = dt.coords();
    let residual = [
        (lambda.adjoint() * &lambda - identity(k)).norm(),
        (lambda_t.adjoint() * &lambda_t - identity(k)).norm(),
        (&source_side - &lambda * &coords).norm(),
        (&target_side - &lambda_t * &coords).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(Error::RankDeficiency { residual });
    }

    let lambda = nearest_isometry(&lambda);
    let lambda_t = nearest_isometry(&lambda_t);
    let source = SubspaceBasis::new(lambda.clone())?;
    let target = SubspaceBasis::new(lambda_t.clone())?;
    let partial = &lambda_t * lambda.adjoint();
    let u = complete_to_unitary_with(&source, &target, &partial, completion)?;
    let p = block_diag(&[&identity(d1.dim()), &zeros(d2.dim(), d2.dim())]);
    Ok(AndoTuple {
        defect: dt,
        defect1: d1,
        defect2: d2,
        e_dim: 0,
        lambda,
        p,
        u,
    })
}

/// Tuple `(F_*, Λ_*, P_*, U_*)` of the adjoint pair `(T₁*, T₂*)`.
pub fn star_ando_tuple(pair: &QPair) -> Result<AndoTuple> {
    special_ando_tuple(&pair.adjoint_pair())
}

/// Structural invariants: `Λ*Λ = I`, `P = P² = P*`, `U` unitary, and the
/// defect identity `‖D_{T₁}T₂h‖² + ‖D_{T₂}h‖² = ‖D_T h‖²` in operator form.
pub fn verify_tuple(tuple: &AndoTuple, pair: &QPair, tol: f64) -> CheckList {
    let f = tuple.f_dim();
    let k = tuple.d_dim();
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "ando.lambda.isometry",
        "L* L = I on D_T",
        (tuple.lambda.adjoint() * &tuple.lambda - identity(k)).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "ando.p.projection",
        "P^2 = P = P*",
        (&tuple.p * &tuple.p - &tuple.p)
            .norm()
            .max((tuple.p.adjoint() - &tuple.p).norm()),
        tol,
    ));
    out.push(Check::at_most(
        "ando.u.unitary",
        "U*U = UU* = I",
        (tuple.u.adjoint() * &tuple.u - identity(f))
            .norm()
            .max((&tuple.u * tuple.u.adjoint() - identity(f)).norm()),
        tol,
    ));
    let (t2, d1, d2, dt) = (
        pair.t2(),
        &tuple.defect1.d,
        &tuple.defect2.d,
        &tuple.defect.d,
    );
    let lhs = t2.adjoint() * d1 * d1 * t2 + d2 * d2;
    out.push(Check::at_most(
        "ando.defect.identity",
        "D_T^2 = D_T2^2 + T2* D_T1^2 T2",
        (lhs - dt * dt).norm(),
        tol,
    ));
    out
}

/// The four identities
/// `T₁*T₁ + D_TΛ*U*PUΛD_T = I`, `T₂*T₂ + D_TΛ*P⊥ΛD_T = I`,
/// `PUΛD_TT₂ + P⊥ΛD_T = ΛD_T`, `ΛD_T = U*(P⊥ΛD_TT₁ + PUΛD_T)`.
pub fn verify_prop1(tuple: &AndoTuple, pair: &QPair, tol: f64) -> CheckList {
    let n = pair.dim();
    let (t1, t2) = (pair.t1(), pair.t2());
    let l = tuple.lambda_dt();
    let (p, pp, u) = (&tuple.p, tuple.p_perp(), &tuple.u);
    let pul = p * u * &l;
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "ando.prop1.t1",
        "T1*T1 + D_T L* U* P U L D_T = I",
        (t1.adjoint() * t1 + pul.adjoint() * &pul - identity(n)).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "ando.prop1.t2",
        "T2*T2 + D_T L* Pperp L D_T = I",
        (t2.adjoint() * t2 + l.adjoint() * &pp * &l - identity(n)).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "ando.prop1.split",
        "P U L D_T T2 + Pperp L D_T = L D_T",
        (&pul * t2 + &pp * &l - &l).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "ando.prop1.rotate",
        "L D_T = U*(Pperp L D_T T1 + P U L D_T)",
        (&l - u.adjoint() * (&pp * &l * t1 + &pul)).norm(),
        tol,
    ));
    out
}

/// `Λ_*D_{T*}T₁* = P_*⊥U_*Λ_*D_{T*} + P_*U_*Λ_*D_{T*}T*` and
/// `Λ_*D_{T*}T₂* = U_*^*P_*Λ_*D_{T*} + qU_*^*P_*⊥Λ_*D_{T*}T*`.
pub fn verify_prop2(star: &AndoTuple, pair: &QPair, tol: f64) -> CheckList {
    let (t1, t2) = (pair.t1(), pair.t2());
    let ts = pair.product().adjoint();
    let l = star.lambda_dt();
    let (p, pp, u) = (&star.p, star.p_perp(), &star.u);
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "ando.prop2.t1",
        "L* D_T* T1* = Pperp* U* L* D_T* + P* U* L* D_T* T*",
        (&l * t1.adjoint() - (&pp * u * &l + p * u * &l * &ts)).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "ando.prop2.t2",
        "L* D_T* T2* = U** P* L* D_T* + q U** Pperp* L* D_T* T*",
        (&l * t2.adjoint() - (u.adjoint() * p * &l + u.adjoint() * &pp * &l * &ts * pair.q()))
            .norm(),
        tol,
    ));
    out
}
