//! Pseudo q-commuting contractive triples `(𝕎₁, 𝕎₂, 𝕎)`, the Douglas-model
//! pseudo lift, and its uniqueness as an executable check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ando::star_ando_tuple;
use crate::error::{Error, Result};
use crate::hardy::{
    extract_symbol, materialize, obs_op, restricted_residual, Layout, TruncHardy, TwistedSymbol,
};
use crate::lifts::krylov_orbit;
use crate::matcore::{
    block_diag, c64, identity, numerical_rank, op_norm, pinv, select_columns, select_rows, vstack,
    zeros, CMatrix, C64,
};
use crate::model::{canonical_unitary_pair, fundamental_from_star, model_symbols, FundamentalPair};
use crate::qpair::QPair;
use crate::report::{Check, CheckList};

/// Operators on `H²_N(𝒟_{T*}) ⊕ tail`.
#[derive(Clone, Debug)]
pub struct PseudoTriple {
    pub q: C64,
    pub w1: CMatrix,
    pub w2: CMatrix,
    pub w: CMatrix,
    pub layout: Layout,
}

impl PseudoTriple {
    pub fn trunc(&self) -> usize {
        self.layout.hardy.max_degree
    }
}

/// Douglas-model pseudo lift with its embedding and fundamental operators.
#[derive(Clone, Debug)]
pub struct DouglasPseudoLift {
    pub pi: CMatrix,
    pub triple: PseudoTriple,
    pub fundamental: FundamentalPair,
}

/// `𝕎₁ = M_{G₁*+zG₂}R_q ⊕ W₁`, `𝕎₂ = R_{q̄}M_{G₂*+zG₁} ⊕ W₂`, `𝕎 = M_z ⊕ W_D`,
/// with `Π_D = O_N ⊕ Q_{T*}`.
pub fn douglas_pseudo_lift(pair: &QPair, max_degree: usize) -> Result<DouglasPseudoLift> {
    let star = star_ando_tuple(pair)?;
    let fp = fundamental_from_star(&star);
    let cp = canonical_unitary_pair(pair)?;
    let q = pair.q();
    let k = fp.dim();
    let layout = Layout {
        head_dim: 0,
        hardy: TruncHardy::new(k, max_degree),
        tail_dim: cp.dim(),
    };
    let (s1, s2) = model_symbols(&fp.g1, &fp.g2, q)?;
    let shift = TwistedSymbol::shift(k, q);
    let m = |s: &TwistedSymbol| materialize(s, max_degree).map(|t| t.matrix);
    let triple = PseudoTriple {
        q,
        w1: block_diag(&[&m(&s1)?, &cp.w1]),
        w2: block_diag(&[&m(&s2)?, &cp.w2]),
        w: block_diag(&[&m(&shift)?, &cp.wd]),
        layout,
    };
    let pi = vstack(
        &obs_op(&pair.product(), &fp.defect_star, max_degree),
        &cp.coords(),
    );
    Ok(DouglasPseudoLift {
        pi,
        triple,
        fundamental: fp,
    })
}

/// Axioms: `‖𝕎_i‖ ≤ 1`, `𝕎*𝕎 = I`, `𝕎₁𝕎 = q𝕎𝕎₁`, `𝕎₂𝕎 = q̄𝕎𝕎₂`,
/// `𝕎₁ = q̄𝕎₂*𝕎`, each on its degree budget.
pub fn is_pseudo_triple(c: &PseudoTriple, tol: f64) -> CheckList {
    let layout = &c.layout;
    let total = layout.total_dim();
    let q = c.q;
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "pseudo.contractive",
        "||W_1||, ||W_2|| <= 1",
        (op_norm(&c.w1).max(op_norm(&c.w2)) - 1.0).max(0.0),
        tol,
    ));
    out.push(Check::at_most(
        "pseudo.isometry",
        "W* W = I",
        restricted_residual(&(c.w.adjoint() * &c.w - identity(total)), layout, 1),
        tol,
    ));
    out.push(Check::at_most(
        "pseudo.commute.w1",
        "W_1 W = q W W_1",
        restricted_residual(&(&c.w1 * &c.w - &c.w * &c.w1 * q), layout, 2),
        tol,
    ));
    out.push(Check::at_most(
        "pseudo.commute.w2",
        "W_2 W = qbar W W_2",
        restricted_residual(&(&c.w2 * &c.w - &c.w * &c.w2 * q.conj()), layout, 2),
        tol,
    ));
    out.push(Check::at_most(
        "pseudo.factor",
        "W_1 = qbar W_2* W",
        restricted_residual(&(&c.w1 - c.w2.adjoint() * &c.w * q.conj()), layout, 1),
        tol,
    ));
    out
}

/// `Π(T₁*, T₂*, T*) = (𝕎₁*, 𝕎₂*, 𝕎*)Π` and minimality of `(Π, 𝕎)`. The
/// intertwinings are asserted to `tol` on the output rows of Hardy degree
/// `≤ N − 1` plus head and tail; the degree-`N` rows need the missing degree
/// `N+1` block of `Π`.
pub fn is_pseudo_lift(pi: &CMatrix, c: &PseudoTriple, pair: &QPair, tol: f64) -> Result<CheckList> {
    let layout = &c.layout;
    if pi.shape() != (layout.total_dim(), pair.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "embedding is {}x{}, expected {}x{}",
            pi.nrows(),
            pi.ncols(),
            layout.total_dim(),
            pair.dim()
        )));
    }
    let t = pair.product();
    let nmax = c.trunc();
    let rows = layout.interior(1);
    let mut out = CheckList::new();
    for (id, anchor, x, ti) in [
        (
            "pseudo.lift.w1",
            "Pi T1* = W_1* Pi",
            &c.w1,
            pair.t1().clone(),
        ),
        (
            "pseudo.lift.w2",
            "Pi T2* = W_2* Pi",
            &c.w2,
            pair.t2().clone(),
        ),
        ("pseudo.lift.w", "Pi T* = W* Pi", &c.w, t.clone()),
    ] {
        let diff = x.adjoint() * pi - pi * ti.adjoint();
        let residual = select_rows(&diff, &rows).norm();
        out.push(Check::at_most(id, anchor, residual, tol));
    }
    let orbit = krylov_orbit(&c.w, pi, nmax + 1);
    let rank = numerical_rank(&orbit, 1e-8 * orbit.norm().max(1.0));
    out.push(Check::equal_counts(
        "pseudo.lift.minimal",
        "K = span W^n Ran Pi",
        rank,
        layout.total_dim(),
    ));
    Ok(out)
}

/// Result of comparing a candidate with the Douglas-model pseudo lift.
#[derive(Clone, Debug)]
pub struct Uniqueness {
    /// Whether the candidate satisfied the triple and lift axioms.
    pub accepted: bool,
    pub checks: CheckList,
}

/// A candidate over `(Π_D, 𝕎ᴰ)` either fails an axiom, or equals the
/// Douglas-model pseudo lift on the interior degree block.
pub fn uniqueness_test(pair: &QPair, candidate: &PseudoTriple, tol: f64) -> Result<Uniqueness> {
    let d = douglas_pseudo_lift(pair, candidate.trunc())?;
    if candidate.layout != d.triple.layout {
        return Err(Error::DimensionMismatch(
            "candidate layout differs from the model".into(),
        ));
    }
    let mut checks = is_pseudo_triple(candidate, tol);
    checks.extend(is_pseudo_lift(&d.pi, candidate, pair, tol)?);
    checks.push(Check::at_most(
        "pseudo.unique.w",
        "W = M_z + W_D",
        restricted_residual(&(&candidate.w - &d.triple.w), &d.triple.layout, 1),
        tol,
    ));
    let accepted = checks.passed();
    if accepted {
        let layout = &d.triple.layout;
        checks.push(Check::at_most(
            "pseudo.unique.w1",
            "W_1 = W_1^D",
            restricted_residual(&(&candidate.w1 - &d.triple.w1), layout, 1),
            tol,
        ));
        checks.push(Check::at_most(
            "pseudo.unique.w2",
            "W_2 = W_2^D",
            restricted_residual(&(&candidate.w2 - &d.triple.w2), layout, 1),
            tol,
        ));
    }
    Ok(Uniqueness { accepted, checks })
}

/// The intertwiner `τ` with `τΠ_a = Π_b` and `τV_a = V_bτ` between two
/// minimal isometric lifts, read off their Krylov orbits.
pub fn intertwiner_from_orbits(
    pi_a: &CMatrix,
    v_a: &CMatrix,
    pi_b: &CMatrix,
    v_b: &CMatrix,
    steps: usize,
) -> CMatrix {
    let ka = krylov_orbit(v_a, pi_a, steps);
    let kb = krylov_orbit(v_b, pi_b, steps);
    kb * pinv(&ka, 1e-10)
}

/// Transport of the Douglas-model pseudo lift along `τ`: a pseudo lift
/// `(Π', 𝕎')` over another minimal isometric lift must satisfy
/// `τ𝕎_iᴰ = 𝕎'_iτ`.
pub fn corollary_transport(
    pair: &QPair,
    pi_prime: &CMatrix,
    candidate: &PseudoTriple,
    tau: &CMatrix,
    tol: f64,
) -> Result<CheckList> {
    let d = douglas_pseudo_lift(pair, candidate.trunc())?;
    let layout = &d.triple.layout;
    let total = layout.total_dim();
    let mut out = CheckList::new();
    out.push(Check::at_most(
        "pseudo.transport.unitary",
        "tau* tau = I",
        (tau.adjoint() * tau - identity(total)).norm(),
        tol,
    ));
    out.push(Check::at_most(
        "pseudo.transport.embedding",
        "tau Pi_D = Pi'",
        (tau * &d.pi - pi_prime).norm(),
        tol,
    ));
    for (id, a, b) in [
        ("pseudo.transport.w", &d.triple.w, &candidate.w),
        ("pseudo.transport.w1", &d.triple.w1, &candidate.w1),
        ("pseudo.transport.w2", &d.triple.w2, &candidate.w2),
    ] {
        out.push(Check::at_most(
            id,
            "tau W^D = W' tau",
            restricted_residual(&(tau * a - b * tau), layout, 1),
            tol,
        ));
    }
    Ok(out)
}

/// Rank-one block `εuv*` joining the degree-1 Hardy block and the tail,
/// added to `𝕎₁`. `hardy_to_tail` picks the direction.
pub fn perturb_off_diagonal(
    c: &PseudoTriple,
    eps: f64,
    seed: u64,
    hardy_to_tail: bool,
) -> Result<PseudoTriple> {
    let layout = &c.layout;
    if layout.tail_dim == 0 || layout.hardy.fiber_dim == 0 || layout.hardy.max_degree < 2 {
        return Err(Error::InvalidArgument(
            "off-diagonal perturbation needs a Hardy part, a tail and N >= 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = |len: usize| {
        let v = CMatrix::from_fn(len, 1, |_, _| {
            c64(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        });
        let nrm = v.norm();
        v / c64(nrm, 0.0)
    };
    let hb = layout.hardy_block(1);
    let tr = layout.tail_range();
    let (rows, cols) = if hardy_to_tail { (tr, hb) } else { (hb, tr) };
    let u = unit(rows.len());
    let v = unit(cols.len());
    let mut w1 = c.w1.clone();
    let block = &u * v.adjoint() * c64(eps, 0.0);
    let mut view = w1.view_mut((rows.start, cols.start), (rows.len(), cols.len()));
    view += block;
    Ok(PseudoTriple { w1, ..c.clone() })
}

/// `εE₁₁` added to `𝕎₁`.
pub fn perturb_corner(c: &PseudoTriple, eps: f64) -> PseudoTriple {
    let mut w1 = c.w1.clone();
    if w1.nrows() > 0 {
        w1[(0, 0)] += c64(eps, 0.0);
    }
    PseudoTriple { w1, ..c.clone() }
}

/// `Π` restricted to the first `keep` columns and zero elsewhere.
pub fn restrict_embedding(pi: &CMatrix, keep: usize) -> CMatrix {
    let mut out = zeros(pi.nrows(), pi.ncols());
    let k = keep.min(pi.ncols());
    out.columns_mut(0, k).copy_from(&pi.columns(0, k));
    out
}

/// Taylor coefficients read from the Hardy blocks of a candidate:
/// `φ₁ = G₁* + zG₂` from `𝕎₁ = M_{φ₁}R_q` and `φ₂ = G₂* + q̄zG₁` from
/// `𝕎₂ = M_{φ₂}R_{q̄}`, compared with the fundamental operators.
pub fn taylor_rigidity(
    candidate: &PseudoTriple,
    fp: &FundamentalPair,
    tol: f64,
) -> Result<CheckList> {
    let layout = &candidate.layout;
    let k = layout.hardy.fiber_dim;
    let nmax = layout.hardy.max_degree;
    let q = candidate.q;
    let idx: Vec<usize> = layout.hardy_range().collect();
    let hardy = |m: &CMatrix| select_rows(&select_columns(m, &idx), &idx);
    let coeffs = |s: &TwistedSymbol| -> [CMatrix; 2] {
        let c = s.coeffs();
        [
            c[0].clone(),
            c.get(1).cloned().unwrap_or_else(|| zeros(k, k)),
        ]
    };
    let mut out = CheckList::new();
    if k == 0 {
        out.push(Check::at_most(
            "pseudo.taylor.phi1",
            "phi_1 = G1* + z G2",
            0.0,
            tol,
        ));
        out.push(Check::at_most(
            "pseudo.taylor.phi2",
            "phi_2 = G2* + qbar z G1",
            0.0,
            tol,
        ));
        return Ok(out);
    }
    let (s1, r1) = extract_symbol(&hardy(&candidate.w1), k, q, nmax, tol)?;
    let (s2, r2) = extract_symbol(&hardy(&candidate.w2), k, q.conj(), nmax, tol)?;
    let [a0, a1] = coeffs(&s1);
    let [b0, b1] = coeffs(&s2);
    out.push(Check::at_most(
        "pseudo.taylor.phi1",
        "phi_1 = G1* + z G2",
        (a0 - fp.g1.adjoint())
            .norm()
            .max((a1 - &fp.g2).norm())
            .max(r1)
            .max(if s1.degree() > 1 { f64::INFINITY } else { 0.0 }),
        tol,
    ));
    out.push(Check::at_most(
        "pseudo.taylor.phi2",
        "phi_2 = G2* + qbar z G1",
        (b0 - fp.g2.adjoint())
            .norm()
            .max((b1 - &fp.g1 * q.conj()).norm())
            .max(r2)
            .max(if s2.degree() > 1 { f64::INFINITY } else { 0.0 }),
        tol,
    ));
    Ok(out)
}
