//! Schäffer-type and Douglas-type isometric lifts on truncated Hardy space,
//! their verification, and recovery of Andô data from a lift in model form.

use serde::{Deserialize, Serialize};

use crate::ando::{verify_prop1, AndoTuple};
use crate::error::{Error, Result};
use crate::hardy::{
    apply_symbol_adjoint, extract_symbol, materialize, obs_op, restricted_residual, Layout,
    TruncHardy, TruncOperator, TwistedSymbol,
};
use crate::matcore::{
    block_diag, defect, identity, numerical_rank, select_columns, select_rows, zeros, CMatrix, C64,
};
use crate::model::{
    canonical_unitary_pair, fundamental_from_star, model_symbols, CanonicalUnitaryPair,
};
use crate::qpair::QPair;
use crate::report::{Check, CheckList};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftKind {
    Schaffer,
    Douglas,
}

/// An isometric-lift candidate `(Π, V₁, V₂)` on `head ⊕ H²_N(F) ⊕ tail`.
#[derive(Clone, Debug)]
pub struct LiftRealization {
    pub kind: LiftKind,
    pub q: C64,
    pub pi: CMatrix,
    pub v1: TruncOperator,
    pub v2: TruncOperator,
    pub trunc: usize,
    pub tail_space_dim: usize,
    /// The pair's tuple (Schäffer) or the adjoint pair's tuple (Douglas).
    pub tuple: AndoTuple,
    /// Analytic parts of the Hardy blocks of `V₁`, `V₂`.
    pub symbols: (TwistedSymbol, TwistedSymbol),
    pub canonical: Option<CanonicalUnitaryPair>,
}

impl LiftRealization {
    pub fn layout(&self) -> Layout {
        self.v1.layout
    }
}

fn lift_symbols_schaffer(t: &AndoTuple, q: C64) -> Result<(TwistedSymbol, TwistedSymbol)> {
    let (p, pp, u) = (&t.p, t.p_perp(), &t.u);
    let qb = q.conj();
    let s1 = TwistedSymbol::new(q, 1, vec![&pp * u * q, p * u * q])?;
    let s2 = TwistedSymbol::new(
        q,
        -1,
        vec![u.adjoint() * p * qb, u.adjoint() * &pp * (qb * qb)],
    )?;
    Ok((s1, s2))
}

fn lift_symbols_douglas(t: &AndoTuple, q: C64) -> Result<(TwistedSymbol, TwistedSymbol)> {
    let (p, pp, u) = (&t.p, t.p_perp(), &t.u);
    let s1 = TwistedSymbol::new(q, 1, vec![u.adjoint() * &pp, u.adjoint() * p])?;
    let s2 = TwistedSymbol::new(q, -1, vec![p * u, &pp * u * q.conj()])?;
    Ok((s1, s2))
}

fn place(
    m: &mut CMatrix,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    block: &CMatrix,
) {
    m.view_mut((rows.start, cols.start), (rows.len(), cols.len()))
        .copy_from(block);
}

/// `V₁ = [[T₁, 0], [ev₀*PUΛD_T, M_{q(P⊥+zP)U}R_q]]`,
/// `V₂ = [[T₂, 0], [q̄ev₀*U*P⊥ΛD_T, q̄R_{q̄}M_{U*(P+zP⊥)}]]` on `H ⊕ H²_N(F)`.
pub fn schaffer_lift(
    pair: &QPair,
    tuple: &AndoTuple,
    max_degree: usize,
) -> Result<LiftRealization> {
    let n = pair.dim();
    let q = pair.q();
    let f = tuple.f_dim();
    let layout = Layout {
        head_dim: n,
        hardy: TruncHardy::new(f, max_degree),
        tail_dim: 0,
    };
    let (s1, s2) = lift_symbols_schaffer(tuple, q)?;
    let l = tuple.lambda_dt();
    let c1 = &tuple.p * &tuple.u * &l;
    let c2 = tuple.u.adjoint() * tuple.p_perp() * &l * q.conj();
    let build = |t: &CMatrix, c: &CMatrix, s: &TwistedSymbol| -> Result<TruncOperator> {
        let mut m = zeros(layout.total_dim(), layout.total_dim());
        place(&mut m, 0..n, 0..n, t);
        place(&mut m, layout.hardy_block(0), 0..n, c);
        let h = materialize(s, max_degree)?.matrix;
        place(&mut m, layout.hardy_range(), layout.hardy_range(), &h);
        Ok(TruncOperator {
            matrix: m,
            layout,
            degree_shift: s.degree(),
        })
    };
    let mut pi = zeros(layout.total_dim(), n);
    place(&mut pi, 0..n, 0..n, &identity(n));
    Ok(LiftRealization {
        kind: LiftKind::Schaffer,
        q,
        pi,
        v1: build(pair.t1(), &c1, &s1)?,
        v2: build(pair.t2(), &c2, &s2)?,
        trunc: max_degree,
        tail_space_dim: 0,
        tuple: tuple.clone(),
        symbols: (s1, s2),
        canonical: None,
    })
}

/// `V₁ᴰ = M_{U_*^*(P_*⊥+zP_*)}R_q ⊕ W₁`, `V₂ᴰ = R_{q̄}M_{(P_*+zP_*⊥)U_*} ⊕ W₂`
/// on `H²_N(F_*) ⊕ ran Q_{T*}`, with `Πᴰh = (I⊗Λ_*)O_Nh ⊕ Q_{T*}h`.
pub fn douglas_lift(pair: &QPair, star: &AndoTuple, max_degree: usize) -> Result<LiftRealization> {
    let cp = canonical_unitary_pair(pair)?;
    let q = pair.q();
    let f = star.f_dim();
    let r = cp.dim();
    let layout = Layout {
        head_dim: 0,
        hardy: TruncHardy::new(f, max_degree),
        tail_dim: r,
    };
    let (s1, s2) = lift_symbols_douglas(star, q)?;
    let build = |s: &TwistedSymbol, w: &CMatrix| -> Result<TruncOperator> {
        let h = materialize(s, max_degree)?.matrix;
        Ok(TruncOperator {
            matrix: block_diag(&[&h, w]),
            layout,
            degree_shift: s.degree(),
        })
    };
    let pi = douglas_embedding(pair, star, &cp, max_degree);
    Ok(LiftRealization {
        kind: LiftKind::Douglas,
        q,
        pi,
        v1: build(&s1, &cp.w1)?,
        v2: build(&s2, &cp.w2)?,
        trunc: max_degree,
        tail_space_dim: r,
        tuple: star.clone(),
        symbols: (s1, s2),
        canonical: Some(cp),
    })
}

fn lift_fiber(obs: &CMatrix, lambda: &CMatrix, max_degree: usize) -> CMatrix {
    let (f, k) = lambda.shape();
    let n = obs.ncols();
    let mut out = zeros((max_degree + 1) * f, n);
    for deg in 0..=max_degree {
        out.view_mut((deg * f, 0), (f, n))
            .copy_from(&(lambda * obs.view((deg * k, 0), (k, n))));
    }
    out
}

fn douglas_embedding(
    pair: &QPair,
    star: &AndoTuple,
    cp: &CanonicalUnitaryPair,
    max_degree: usize,
) -> CMatrix {
    let obs = obs_op(&pair.product(), &star.defect, max_degree);
    let hardy = lift_fiber(&obs, &star.lambda, max_degree);
    crate::matcore::vstack(&hardy, &cp.coords())
}

/// Same lift one Hardy degree higher, used for exact tail corrections.
fn rebuild(lift: &LiftRealization, pair: &QPair, max_degree: usize) -> Result<LiftRealization> {
    match lift.kind {
        LiftKind::Schaffer => schaffer_lift(pair, &lift.tuple, max_degree),
        LiftKind::Douglas => douglas_lift(pair, &lift.tuple, max_degree),
    }
}

/// Residuals of the lift axioms under the truncation contract.
pub fn verify_lift(lift: &LiftRealization, pair: &QPair, tol: f64) -> Result<CheckList> {
    let layout = lift.layout();
    let kind = match lift.kind {
        LiftKind::Schaffer => "schaffer",
        LiftKind::Douglas => "douglas",
    };
    let total = layout.total_dim();
    let mut out = CheckList::new();

    let ext = rebuild(lift, pair, lift.trunc + 1)?;
    let keep = layout.embed_indices(&ext.layout());
    for (i, (v, vx, t)) in [
        (&lift.v1, &ext.v1, pair.t1()),
        (&lift.v2, &ext.v2, pair.t2()),
    ]
    .into_iter()
    .enumerate()
    {
        let corrected = select_rows(&(vx.matrix.adjoint() * &ext.pi), &keep);
        out.push(Check::at_most(
            format!("{kind}.intertwine.v{}", i + 1),
            "V_i* Pi = Pi T_i*",
            (corrected - &lift.pi * t.adjoint()).norm(),
            tol,
        ));
        out.push(Check::at_most(
            format!("{kind}.isometry.v{}", i + 1),
            "V_i* V_i = I",
            restricted_residual(
                &(v.matrix.adjoint() * &v.matrix - identity(total)),
                &layout,
                1,
            ),
            tol,
        ));
    }
    let (v1, v2) = (&lift.v1.matrix, &lift.v2.matrix);
    out.push(Check::at_most(
        format!("{kind}.qcommute"),
        "V1 V2 = q V2 V1",
        restricted_residual(&(v1 * v2 - v2 * v1 * lift.q), &layout, 2),
        tol,
    ));

    if lift.kind == LiftKind::Douglas {
        let t = pair.product();
        let n = pair.dim();
        let mut tpow = identity(n);
        for _ in 0..=lift.trunc {
            tpow = &t * tpow;
        }
        let q_op = &lift
            .canonical
            .as_ref()
            .expect("douglas lift carries Q")
            .q_op;
        let expected = identity(n) - &tpow * tpow.adjoint() + q_op * q_op;
        out.push(Check::at_most(
            "douglas.embedding",
            "Pi_N* Pi_N = I - T^(N+1) T*^(N+1) + Q^2",
            (lift.pi.adjoint() * &lift.pi - expected).norm(),
            1e-11,
        ));
        let cp = lift
            .canonical
            .as_ref()
            .expect("douglas lift carries the canonical pair");
        let shift = TwistedSymbol::shift(layout.hardy.fiber_dim, lift.q);
        let mz = block_diag(&[&materialize(&shift, lift.trunc)?.matrix, &cp.wd]);
        out.push(Check::at_most(
            "douglas.product",
            "V1 V2 = M_z + W_D",
            restricted_residual(&(v1 * v2 - mz), &layout, 2),
            tol,
        ));
        out.extend(verify_model_intertwining(
            pair,
            &lift.tuple,
            cp,
            lift.trunc,
            tol,
        )?);
    }
    Ok(out)
}

/// `Π_NF T_i* = 𝕎_i*Π_NF` for `𝕎₁ = M_{G₁*+zG₂}R_q ⊕ W₁`,
/// `𝕎₂ = R_{q̄}M_{G₂*+zG₁} ⊕ W₂`, with `Π_NF = O_N ⊕ Q_{T*}`. The adjoints
/// are applied at degree `N+1` and read back on degrees `≤ N`.
pub fn verify_model_intertwining(
    pair: &QPair,
    star: &AndoTuple,
    cp: &CanonicalUnitaryPair,
    max_degree: usize,
    tol: f64,
) -> Result<CheckList> {
    let fp = fundamental_from_star(star);
    let (s1, s2) = model_symbols(&fp.g1, &fp.g2, pair.q())?;
    let t = pair.product();
    let k = fp.dim();
    let y = cp.coords();
    let obs_ext = obs_op(&t, &star.defect, max_degree + 1);
    let obs = obs_op(&t, &star.defect, max_degree);
    let hardy_rows = (max_degree + 1) * k;
    let mut out = CheckList::new();
    for (i, (s, w, ti)) in [(&s1, &cp.w1, pair.t1()), (&s2, &cp.w2, pair.t2())]
        .into_iter()
        .enumerate()
    {
        let lhs_h = apply_symbol_adjoint(s, max_degree + 1, &obs_ext)
            .rows(0, hardy_rows)
            .into_owned();
        let res_h = (lhs_h - &obs * ti.adjoint()).norm();
        let res_t = (w.adjoint() * &y - &y * ti.adjoint()).norm();
        out.push(Check::at_most(
            format!("douglas.model_intertwine.w{}", i + 1),
            if i == 0 {
                "Pi T1* = (M_(G1*+zG2) R_q + W1)* Pi"
            } else {
                "Pi T2* = (R_qbar M_(G2*+zG1) + W2)* Pi"
            },
            res_h.max(res_t),
            tol,
        ));
    }
    Ok(out)
}

/// Krylov orbit `[Π, VΠ, …, V^{N+1}Π]` of `V = V₁V₂`.
pub fn krylov_orbit(v: &CMatrix, pi: &CMatrix, steps: usize) -> CMatrix {
    let (rows, n) = pi.shape();
    let mut out = zeros(rows, (steps + 1) * n);
    let mut cur = pi.clone();
    for k in 0..=steps {
        out.view_mut((0, k * n), (rows, n)).copy_from(&cur);
        cur = v * cur;
    }
    out
}

/// The same orbit from closed formulas: for the Schäffer lift
/// `Vᵏh = (Tᵏh, Σ_{j<k} z^{k−1−j}ΛD_TT^jh)`, for the Douglas lift
/// `Vᵏh = (zᵏΠᴰh, W_DᵏQh)`.
fn oracle_orbit(lift: &LiftRealization, pair: &QPair, steps: usize) -> CMatrix {
    let layout = lift.layout();
    let n = pair.dim();
    let t = pair.product();
    let f = layout.hardy.fiber_dim;
    let nmax = lift.trunc;
    let mut out = zeros(layout.total_dim(), (steps + 1) * n);
    match lift.kind {
        LiftKind::Schaffer => {
            let l = lift.tuple.lambda_dt();
            let mut tp = vec![identity(n)];
            for j in 1..=steps {
                let next = &t * &tp[j - 1];
                tp.push(next);
            }
            for k in 0..=steps {
                let col = k * n;
                out.view_mut((0, col), (n, n)).copy_from(&tp[k]);
                for (j, tj) in tp.iter().enumerate().take(k) {
                    let deg = k - 1 - j;
                    if deg <= nmax {
                        let r = layout.hardy_block(deg);
                        out.view_mut((r.start, col), (f, n)).copy_from(&(&l * tj));
                    }
                }
            }
        }
        LiftKind::Douglas => {
            let hardy_rows = layout.hardy.total_dim();
            let cp = lift
                .canonical
                .as_ref()
                .expect("douglas lift carries the canonical pair");
            let y = cp.coords();
            let mut wd = identity(cp.dim());
            for k in 0..=steps {
                let col = k * n;
                if k * f < hardy_rows {
                    let len = hardy_rows - k * f;
                    out.view_mut((k * f, col), (len, n))
                        .copy_from(&lift.pi.view((0, 0), (len, n)));
                }
                let tr = layout.tail_range();
                out.view_mut((tr.start, col), (tr.len(), n))
                    .copy_from(&(&wd * &y));
                wd = &cp.wd * wd;
            }
        }
    }
    out
}

/// Rank of the `V₁V₂`-orbit of `ran Π` against the closed-form orbit and
/// the expected count: `n + (N+1)·dim 𝒟_T` (Schäffer) or
/// `(N+1)·dim 𝒟_{T*} + dim ran Q_{T*}` (Douglas).
pub fn minimality_check(lift: &LiftRealization, pair: &QPair) -> CheckList {
    let steps = lift.trunc + 1;
    let v = &lift.v1.matrix * &lift.v2.matrix;
    let krylov = krylov_orbit(&v, &lift.pi, steps);
    let oracle = oracle_orbit(lift, pair, steps);
    let scale = krylov.norm().max(1.0);
    let tol = 1e-8 * scale;
    let got = numerical_rank(&krylov, tol);
    let oracle_rank = numerical_rank(&oracle, tol);
    let expected = match lift.kind {
        LiftKind::Schaffer => pair.dim() + (lift.trunc + 1) * lift.tuple.d_dim(),
        LiftKind::Douglas => (lift.trunc + 1) * lift.tuple.d_dim() + lift.tail_space_dim,
    };
    let kind = match lift.kind {
        LiftKind::Schaffer => "schaffer",
        LiftKind::Douglas => "douglas",
    };
    let mut out = CheckList::new();
    out.push(Check::at_most(
        format!("{kind}.minimal.orbit"),
        "V^k Pi from the closed-form orbit",
        (&krylov - &oracle).norm(),
        1e-9 * scale,
    ));
    out.push(Check::equal_counts(
        format!("{kind}.minimal.oracle_rank"),
        "rank span V^k Ran Pi = rank of the closed-form orbit",
        got,
        oracle_rank,
    ));
    out.push(Check::equal_counts(
        format!("{kind}.minimal.rank"),
        "rank span V^k Ran Pi = expected count",
        got,
        expected,
    ));
    out
}

/// Rank of the joint orbit of `ran start` under words in `gens`.
pub fn joint_orbit_rank(gens: &[&CMatrix], start: &CMatrix, tol: f64) -> usize {
    let dim = start.nrows();
    let mut basis = zeros(dim, 0);
    let mut frontier: Vec<CMatrix> = (0..start.ncols())
        .map(|j| start.columns(j, 1).into_owned())
        .collect();
    while let Some(v) = frontier.pop() {
        let mut w = v.clone();
        for _ in 0..2 {
            let proj = &basis * (basis.adjoint() * &w);
            w -= proj;
        }
        let nrm = w.norm();
        if nrm <= tol * v.norm().max(1.0) || basis.ncols() == dim {
            continue;
        }
        w /= crate::matcore::c64(nrm, 0.0);
        let k = basis.ncols();
        basis = basis.insert_column(k, crate::matcore::c64(0.0, 0.0));
        basis.set_column(k, &w.column(0));
        for g in gens {
            frontier.push(*g * &w);
        }
    }
    basis.ncols()
}

/// Andô data read back from a Schäffer-form lift.
#[derive(Clone, Debug)]
pub struct ExtractedAndo {
    pub lambda: CMatrix,
    pub p: CMatrix,
    pub u: CMatrix,
    /// Degree-0 `(2,1)` blocks of `V₁`, `V₂`: `PUΛD_T` and `q̄U*P⊥ΛD_T`.
    pub fragments: (CMatrix, CMatrix),
    pub checks: CheckList,
}

pub fn extract_ando_from_lift(
    lift: &LiftRealization,
    pair: &QPair,
    tol: f64,
) -> Result<ExtractedAndo> {
    let layout = lift.layout();
    let n = pair.dim();
    if lift.kind != LiftKind::Schaffer || layout.head_dim != n || layout.tail_dim != 0 {
        return Err(Error::NotModelForm("expected H + H^2(F) block form".into()));
    }
    let f = layout.hardy.fiber_dim;
    let nmax = lift.trunc;
    let q = pair.q();
    let head: Vec<usize> = (0..n).collect();
    let hardy: Vec<usize> = layout.hardy_range().collect();
    let v = &lift.v1.matrix * &lift.v2.matrix;
    let t = pair.product();

    let upper = select_rows(&select_columns(&v, &hardy), &head).norm();
    let corner = (select_rows(&select_columns(&v, &head), &head) - &t).norm();
    if upper > tol || corner > tol {
        return Err(Error::NotModelForm(format!(
            "V is not lower triangular over T (residuals {upper:.3e}, {corner:.3e})"
        )));
    }
    let c = select_rows(&select_columns(&v, &head), &hardy);
    let c0 = c.rows(0, f).into_owned();
    let higher = if f * (nmax + 1) > f {
        c.rows(f, f * nmax).norm()
    } else {
        0.0
    };
    if higher > tol {
        return Err(Error::NotModelForm(format!(
            "M_z* C = 0 fails (residual {higher:.3e})"
        )));
    }
    let d_t = defect(&t, None)?;
    let gram = (c0.adjoint() * &c0 - &d_t.d * &d_t.d).norm();
    if gram > tol {
        return Err(Error::NotModelForm(format!(
            "C*C = I - T*T fails (residual {gram:.3e})"
        )));
    }
    let lambda = &c0 * d_t.coords_pinv();

    let block = |m: &CMatrix| select_rows(&select_columns(m, &hardy), &hardy);
    let (u, p) = if f == 0 {
        (zeros(0, 0), zeros(0, 0))
    } else {
        let (sym, _) = extract_symbol(&block(&lift.v1.matrix), f, q, nmax, tol)?;
        let a0 = sym.coeffs()[0].clone();
        let a1 = sym.coeffs().get(1).cloned().unwrap_or_else(|| zeros(f, f));
        let u = (&a0 + &a1) * q.conj();
        let p = &a1 * u.adjoint() * q.conj();
        (u, p)
    };
    let frag = |m: &CMatrix| {
        select_rows(&select_columns(m, &head), &hardy)
            .rows(0, f)
            .into_owned()
    };
    let frag1 = frag(&lift.v1.matrix);
    let frag2 = frag(&lift.v2.matrix);

    let recovered = AndoTuple {
        defect: d_t,
        defect1: lift.tuple.defect1.clone(),
        defect2: lift.tuple.defect2.clone(),
        e_dim: lift.tuple.e_dim,
        lambda: lambda.clone(),
        p: p.clone(),
        u: u.clone(),
    };
    let l = recovered.lambda_dt();
    let mut checks = CheckList::new();
    checks.push(Check::at_most(
        "extract.lambda.isometry",
        "Lambda* Lambda = I",
        (lambda.adjoint() * &lambda - identity(lambda.ncols())).norm(),
        tol,
    ));
    checks.push(Check::at_most(
        "extract.u.unitary",
        "U*U = I",
        (u.adjoint() * &u - identity(f)).norm(),
        tol,
    ));
    checks.push(Check::at_most(
        "extract.p.projection",
        "P^2 = P = P*",
        (&p * &p - &p).norm().max((p.adjoint() - &p).norm()),
        tol,
    ));
    checks.push(Check::at_most(
        "extract.fragment.v1",
        "(2,1) block of V1 = P U L D_T",
        (&frag1 - &p * &u * &l).norm(),
        tol,
    ));
    checks.push(Check::at_most(
        "extract.fragment.v2",
        "(2,1) block of V2 = qbar U* Pperp L D_T",
        (&frag2 - u.adjoint() * recovered.p_perp() * &l * q.conj()).norm(),
        tol,
    ));
    for c in verify_prop1(&recovered, pair, tol) {
        checks.push(Check {
            id: c.id.replacen("ando.", "extract.", 1),
            ..c
        });
    }
    Ok(ExtractedAndo {
        lambda,
        p,
        u,
        fragments: (frag1, frag2),
        checks,
    })
}

/// Conjugates the Hardy part of a lift by `I ⊗ w` for a unitary `w` on the fiber.
pub fn conjugate_hardy_fiber(lift: &LiftRealization, w: &CMatrix) -> Result<LiftRealization> {
    let layout = lift.layout();
    let f = layout.hardy.fiber_dim;
    if w.shape() != (f, f) {
        return Err(Error::DimensionMismatch(format!(
            "fiber unitary must be {f}x{f}"
        )));
    }
    let mut big = identity(layout.total_dim());
    for deg in 0..=lift.trunc {
        let r = layout.hardy_block(deg);
        place(&mut big, r.clone(), r, w);
    }
    let conj = |op: &TruncOperator| TruncOperator {
        matrix: &big * &op.matrix * big.adjoint(),
        ..op.clone()
    };
    let sym = |s: &TwistedSymbol| {
        TwistedSymbol::new(
            s.q(),
            s.twist(),
            s.coeffs().iter().map(|c| w * c * w.adjoint()).collect(),
        )
    };
    Ok(LiftRealization {
        v1: conj(&lift.v1),
        v2: conj(&lift.v2),
        pi: &big * &lift.pi,
        symbols: (sym(&lift.symbols.0)?, sym(&lift.symbols.1)?),
        ..lift.clone()
    })
}

/// Two minimal isometric lifts of `(0, 0)` on `ℂ`: `A = (R_qM_z, M_z)` on
/// `H²_N(𝔻)` and `B = (R_q^{(2)}M_{z₁}, M_{z₂})` on the bidegree box of
/// `H²(𝔻²)`, where `R_q^{(2)}` rotates `z₂`. Only `B` is doubly q-commuting.
#[derive(Clone, Debug)]
pub struct NonisoliftsFixture {
    pub checks: CheckList,
    pub discriminator_a: f64,
    pub discriminator_b: f64,
}

pub fn nonisolifts_fixture(max_degree: usize, q: C64) -> Result<NonisoliftsFixture> {
    if max_degree < 2 {
        return Err(Error::InvalidArgument(format!(
            "truncation {max_degree} is below 2"
        )));
    }
    let nd = max_degree;
    let m = nd + 1;
    let s = materialize(&TwistedSymbol::shift(1, q), nd)?.matrix;
    let r = materialize(&TwistedSymbol::rotation(1, q, 1), nd)?.matrix;
    let one = identity(m);

    let a1 = &r * &s;
    let a2 = s.clone();
    let b1 = s.kronecker(&r);
    let b2 = one.kronecker(&s);

    let interior_a = |budget: usize| -> Vec<usize> { (0..m.saturating_sub(budget)).collect() };
    let interior_b = |budget: usize| -> Vec<usize> {
        let top = m.saturating_sub(budget);
        let mut idx = Vec::new();
        for a in 0..top {
            for b in 0..top {
                idx.push(a * m + b);
            }
        }
        idx
    };
    let mut checks = CheckList::new();
    let mut discs = [0.0; 2];
    for (k, (name, v1, v2, interior)) in [
        ("a", &a1, &a2, &interior_a as &dyn Fn(usize) -> Vec<usize>),
        ("b", &b1, &b2, &interior_b as &dyn Fn(usize) -> Vec<usize>),
    ]
    .into_iter()
    .enumerate()
    {
        let dim = v1.nrows();
        let mut pi = zeros(dim, 1);
        pi[(0, 0)] = crate::matcore::c64(1.0, 0.0);
        let e = identity(dim);
        checks.push(Check::at_most(
            format!("example.{name}.intertwine"),
            "V_i* Pi = Pi 0",
            (v1.adjoint() * &pi).norm().max((v2.adjoint() * &pi).norm()),
            1e-12,
        ));
        let iso = select_columns(&(v1.adjoint() * v1 - &e), &interior(1))
            .norm()
            .max(select_columns(&(v2.adjoint() * v2 - &e), &interior(1)).norm());
        checks.push(Check::at_most(
            format!("example.{name}.isometry"),
            "V_i* V_i = I",
            iso,
            1e-12,
        ));
        checks.push(Check::at_most(
            format!("example.{name}.qcommute"),
            "V1 V2 = q V2 V1",
            select_columns(&(v1 * v2 - v2 * v1 * q), &interior(2)).norm(),
            1e-12,
        ));
        checks.push(Check::equal_counts(
            format!("example.{name}.minimal"),
            "span of words in V1, V2 applied to Ran Pi = whole space",
            joint_orbit_rank(&[v1, v2], &pi, 1e-10),
            dim,
        ));
        let disc =
            select_columns(&(v2 * v1.adjoint() - v1.adjoint() * v2 * q), &interior(1)).norm();
        discs[k] = disc;
    }
    checks.push(Check::at_least(
        "example.a.not_doubly",
        "||V2 V1* - q V1* V2|| > 0.5 for A",
        discs[0],
        0.5,
    ));
    checks.push(Check::at_most(
        "example.b.doubly",
        "V2 V1* = q V1* V2 for B",
        discs[1],
        1e-12,
    ));
    checks.push(Check::at_least(
        "example.separation",
        "discriminator(A) >= 1e10 discriminator(B)",
        discs[0],
        1e10 * discs[1],
    ));
    Ok(NonisoliftsFixture {
        checks,
        discriminator_a: discs[0],
        discriminator_b: discs[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ando::{special_ando_tuple, star_ando_tuple};
    use crate::matcore::{c64, cis};

    #[test]
    fn zero_pair_schaffer_column() {
        let pair = QPair::zero(1, cis(1.0)).unwrap();
        let tuple = special_ando_tuple(&pair).unwrap();
        let lift = schaffer_lift(&pair, &tuple, 4).unwrap();
        let col = lift.v1.matrix.column(0);
        assert!((col[1] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!(col[2].norm() < 1e-15);
        assert!(verify_lift(&lift, &pair, 1e-12).unwrap().passed());
    }

    #[test]
    fn unitary_pair_douglas_is_the_pair() {
        let pair = crate::qpair::gen_clock_shift(3, 1.0).unwrap();
        let lift = douglas_lift(&pair, &star_ando_tuple(&pair).unwrap(), 4).unwrap();
        assert_eq!(lift.layout().hardy.total_dim(), 0);
        assert!((&lift.v1.matrix - pair.t1()).norm() < 1e-12);
        assert!(verify_lift(&lift, &pair, 1e-12).unwrap().passed());
    }

    #[test]
    fn example_fixture_small() {
        let fx = nonisolifts_fixture(2, cis(1.0)).unwrap();
        assert!(fx.checks.passed(), "{:?}", fx.checks.failures());
        assert!(nonisolifts_fixture(1, cis(1.0)).is_err());
    }
}
