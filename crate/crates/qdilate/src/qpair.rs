//! Validated q-commuting contraction pairs, generators, and the
//! unitary ⊕ completely-non-unitary splitting of the product.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    block_diag, c64, cis, eigenvalues, identity, matrix_serde, null_space, op_norm,
    range_basis_of_psd, upow, zeros, CMatrix, SubspaceBasis, C64,
};
use crate::report::{Check, CheckList};

pub const DEFAULT_PAIR_TOL: f64 = 1e-10;

/// A pair `(T₁, T₂)` of contractions with `T₁T₂ = qT₂T₁`, `|q| = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QPair {
    q: C64,
    t1: CMatrix,
    t2: CMatrix,
}

impl QPair {
    pub fn validate(q: C64, t1: CMatrix, t2: CMatrix, tol: f64) -> Result<Self> {
        if !t1.is_square() || !t2.is_square() || t1.nrows() != t2.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "T1 is {}x{}, T2 is {}x{}",
                t1.nrows(),
                t1.ncols(),
                t2.nrows(),
                t2.ncols()
            )));
        }
        let modulus = q.norm();
        if (modulus - 1.0).abs() >= 1e-12 {
            return Err(Error::NotUnimodular { modulus });
        }
        for (which, t) in [("T1", &t1), ("T2", &t2)] {
            let norm = op_norm(t);
            if norm > 1.0 + tol {
                return Err(Error::NotContraction {
                    which: which.into(),
                    norm,
                });
            }
        }
        let residual = (&t1 * &t2 - (&t2 * &t1) * q).norm();
        if residual >= tol {
            return Err(Error::NotQCommuting { residual });
        }
        Ok(QPair { q, t1, t2 })
    }

    /// The zero pair on `C^n`, valid for every `q`.
    pub fn zero(n: usize, q: C64) -> Result<Self> {
        QPair::validate(q, zeros(n, n), zeros(n, n), DEFAULT_PAIR_TOL)
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    pub fn t1(&self) -> &CMatrix {
        &self.t1
    }

    pub fn t2(&self) -> &CMatrix {
        &self.t2
    }

    pub fn dim(&self) -> usize {
        self.t1.nrows()
    }

    /// `T = T₁T₂`.
    pub fn product(&self) -> CMatrix {
        &self.t1 * &self.t2
    }

    /// `(T₁*, T₂*)`, again q-commuting with the same `q`.
    pub fn adjoint_pair(&self) -> QPair {
        QPair {
            q: self.q,
            t1: self.t1.adjoint(),
            t2: self.t2.adjoint(),
        }
    }

    /// `(WT₁W*, WT₂W*)`.
    pub fn conjugate(&self, w: &CMatrix) -> Result<QPair> {
        QPair::validate(
            self.q,
            w * &self.t1 * w.adjoint(),
            w * &self.t2 * w.adjoint(),
            DEFAULT_PAIR_TOL,
        )
    }

    pub fn from_json(text: &str) -> std::result::Result<QPair, PairFileError> {
        let raw: PairJson = serde_json::from_str(text).map_err(PairFileError::Syntax)?;
        QPair::validate(raw.q, raw.t1, raw.t2, DEFAULT_PAIR_TOL).map_err(PairFileError::Invalid)
    }

    pub fn to_json(&self) -> String {
        let raw = PairJson {
            q: self.q,
            t1: self.t1.clone(),
            t2: self.t2.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("pair serializes")
    }
}

/// Reading a pair file can fail before or after parsing.
#[derive(Debug, thiserror::Error)]
pub enum PairFileError {
    #[error("malformed pair JSON: {0}")]
    Syntax(serde_json::Error),
    #[error("invalid pair: {0}")]
    Invalid(Error),
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    #[serde(with = "crate::matcore::complex_serde")]
    q: C64,
    #[serde(rename = "T1", with = "matrix_serde")]
    t1: CMatrix,
    #[serde(rename = "T2", with = "matrix_serde")]
    t2: CMatrix,
}

/// Clock and shift: `T₁ = s·diag(1, q, …, q^{n−1})`, `T₂ = s·(cyclic shift)`
/// with `q = e^{2πi/n}`.
pub fn gen_clock_shift(n: usize, scale: f64) -> Result<QPair> {
    if n == 0 {
        return Err(Error::InvalidArgument("clock-shift needs n >= 1".into()));
    }
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "scale {scale} outside (0, 1]"
        )));
    }
    let q = match n {
        1 => c64(1.0, 0.0),
        2 => c64(-1.0, 0.0),
        4 => c64(0.0, 1.0),
        _ => cis(2.0 * PI / n as f64),
    };
    let s = c64(scale, 0.0);
    let clock = CMatrix::from_diagonal(&DVector::from_fn(n, |k, _| upow(q, k as i64) * s));
    let mut shift = zeros(n, n);
    for k in 0..n {
        shift[((k + 1) % n, k)] = s;
    }
    QPair::validate(q, clock, shift, DEFAULT_PAIR_TOL)
}

/// `T₁ = c·S` (truncated shift), `T₂ = d·diag(q^{n−1}, …, q, 1)`; valid for
/// every unimodular `q`.
pub fn gen_nilpotent(n: usize, q: C64, c: C64, d: C64) -> Result<QPair> {
    if n < 2 {
        return Err(Error::InvalidArgument("nilpotent pair needs n >= 2".into()));
    }
    if c.norm() > 1.0 || d.norm() > 1.0 {
        return Err(Error::InvalidArgument(
            "|c| and |d| must be at most 1".into(),
        ));
    }
    let mut t1 = zeros(n, n);
    for k in 0..n - 1 {
        t1[(k + 1, k)] = c;
    }
    let t2 = CMatrix::from_diagonal(&DVector::from_fn(n, |k, _| d * upow(q, (n - 1 - k) as i64)));
    QPair::validate(q, t1, t2, DEFAULT_PAIR_TOL)
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    });
    if n == 0 {
        return g;
    }
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c64(1.0, 0.0)
        };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Random unitary conjugate of `pair`; the conjugating `W` is returned too.
pub fn gen_conjugated(pair: &QPair, seed: u64) -> Result<(QPair, CMatrix)> {
    let w = random_unitary(pair.dim(), seed);
    Ok((pair.conjugate(&w)?, w))
}

pub fn gen_direct_sum(pairs: &[QPair]) -> Result<QPair> {
    let first = pairs.first().ok_or(Error::EmptyList)?;
    if pairs.iter().any(|p| (p.q - first.q).norm() >= 1e-12) {
        return Err(Error::MixedTwist);
    }
    let t1: Vec<&CMatrix> = pairs.iter().map(|p| &p.t1).collect();
    let t2: Vec<&CMatrix> = pairs.iter().map(|p| &p.t2).collect();
    QPair::validate(first.q, block_diag(&t1), block_diag(&t2), DEFAULT_PAIR_TOL)
}

/// Splitting `H = H_u ⊕ H_c` into the unitary part of `T` and its
/// completely non-unitary complement.
#[derive(Clone, Debug)]
pub struct ProductDecomposition {
    pub unitary_part: SubspaceBasis,
    pub cnu_part: SubspaceBasis,
    pub t_unitary: CMatrix,
    pub t_cnu: CMatrix,
}

pub const DEFAULT_CNU_TOL: f64 = 1e-8;

/// Unitary part = span of eigenvectors with unimodular eigenvalue. For a
/// contraction these reduce `T`, which is checked.
pub fn cnu_decompose(t: &CMatrix, tol: f64) -> Result<ProductDecomposition> {
    let n = t.nrows();
    let norm = op_norm(t);
    if norm > 1.0 + crate::matcore::CONTRACTION_SLACK {
        return Err(Error::NotContraction {
            which: "T".into(),
            norm,
        });
    }
    let mut proj_sum = zeros(n, n);
    for lambda in eigenvalues(t) {
        if lambda.norm() > 1.0 - tol {
            let shifted = t - identity(n) * lambda;
            let k = null_space(&shifted, 1e-7);
            proj_sum += &k * k.adjoint();
        }
    }
    let unitary_part = range_basis_of_psd(&proj_sum, 0.5);
    let cnu_part = unitary_part.complement();
    let pu = unitary_part.projector();
    let pc = cnu_part.projector();
    let residual = (&pu * t * &pc).norm().max((&pc * t * &pu).norm());
    if residual > 1e-10 {
        return Err(Error::NotReducing { residual });
    }
    let bu = unitary_part.columns();
    let bc = cnu_part.columns();
    Ok(ProductDecomposition {
        t_unitary: bu.adjoint() * t * bu,
        t_cnu: bc.adjoint() * t * bc,
        unitary_part,
        cnu_part,
    })
}

/// `T₁Tⁿ = qⁿTⁿT₁`, `T₂Tⁿ = q̄ⁿTⁿT₂`, and isometry of the factors when `T`
/// is isometric.
pub fn check_lemma_prod(pair: &QPair, n_max: usize, tol: f64) -> CheckList {
    let t = pair.product();
    let n = pair.dim();
    let mut out = CheckList::new();
    let iso = (t.adjoint() * &t - identity(n)).norm();
    if iso < 1e-10 {
        for (i, ti) in [pair.t1(), pair.t2()].into_iter().enumerate() {
            out.push(Check::at_most(
                format!("lemma.isometric.t{}", i + 1),
                "T*T = I implies Ti*Ti = I",
                (ti.adjoint() * ti - identity(n)).norm(),
                tol,
            ));
        }
    }
    let mut power = identity(n);
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for k in 1..=n_max {
        power = &power * &t;
        let qk = upow(pair.q(), k as i64);
        r1 = r1.max((pair.t1() * &power - &power * pair.t1() * qk).norm());
        r2 = r2.max((pair.t2() * &power - &power * pair.t2() * qk.conj()).norm());
    }
    out.push(Check::at_most(
        "lemma.power.t1",
        "T1 T^n = q^n T^n T1",
        r1,
        tol,
    ));
    out.push(Check::at_most(
        "lemma.power.t2",
        "T2 T^n = conj(q)^n T^n T2",
        r2,
        tol,
    ));
    out
}

/// Parses a complex literal: `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, ch)| {
                (ch == '+' || ch == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
            })
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse().ok()?,
        };
        Some(c64(re.parse().ok()?, im))
    } else {
        Some(c64(s.parse().ok()?, 0.0))
    }
}

/// Builds a pair from a generator spec string:
/// `name ":" key "=" value ("," key "=" value)*`.
///
/// Generators: `zero` (n, q), `clock-shift` (n, scale), `nilpotent`
/// (n, q or theta, c, d), `mixed` (clock-shift block ⊕ nilpotent block with
/// the clock-shift twist; keys n, m, c, d). Any generator accepts
/// `conjugate=1` to apply a random unitary drawn from `seed`.
/// Values given for `q` are normalized to the unit circle.
pub fn parse_generator(spec: &str, seed: u64) -> Result<QPair> {
    let (name, rest) = match spec.find(':') {
        Some(i) => (&spec[..i], Some((i + 1, &spec[i + 1..]))),
        None => (spec, None),
    };
    let mut params: Vec<(usize, &str, &str)> = Vec::new();
    if let Some((offset, body)) = rest {
        let mut pos = offset;
        for item in body.split(',') {
            let Some(eq) = item.find('=') else {
                return Err(Error::Parse {
                    position: pos,
                    message: format!("expected key=value, found '{item}'"),
                });
            };
            let key = item[..eq].trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    position: pos,
                    message: "empty key".into(),
                });
            }
            params.push((pos + eq + 1, key, item[eq + 1..].trim()));
            pos += item.len() + 1;
        }
    }
    let lookup = |key: &str| params.iter().find(|(_, k, _)| *k == key);
    let known: &[&str] = match name.trim() {
        "zero" => &["n", "q", "theta", "conjugate"],
        "clock-shift" => &["n", "scale", "conjugate"],
        "nilpotent" => &["n", "q", "theta", "c", "d", "conjugate"],
        "mixed" => &["n", "m", "scale", "c", "d", "conjugate"],
        other => {
            return Err(Error::Parse {
                position: 0,
                message: format!("unknown generator '{other}'"),
            })
        }
    };
    if let Some((pos, key, _)) = params.iter().find(|(_, k, _)| !known.contains(k)) {
        return Err(Error::Parse {
            position: *pos - key.len() - 1,
            message: format!("unknown key '{key}' for generator '{}'", name.trim()),
        });
    }
    let count = |key: &str, default: Option<usize>| -> Result<usize> {
        match lookup(key) {
            Some((pos, _, v)) => v.parse().map_err(|_| Error::Parse {
                position: *pos,
                message: format!("'{v}' is not a count"),
            }),
            None => default.ok_or(Error::Parse {
                position: spec.len(),
                message: format!("missing key '{key}'"),
            }),
        }
    };
    let complex = |key: &str, default: C64| -> Result<C64> {
        match lookup(key) {
            Some((pos, _, v)) => parse_complex(v).ok_or(Error::Parse {
                position: *pos,
                message: format!("'{v}' is not a complex literal"),
            }),
            None => Ok(default),
        }
    };
    let twist = || -> Result<C64> {
        if let Some((pos, _, v)) = lookup("theta") {
            let theta: f64 = v.parse().map_err(|_| Error::Parse {
                position: *pos,
                message: format!("'{v}' is not a real number"),
            })?;
            return Ok(cis(theta));
        }
        let q = complex("q", c64(1.0, 0.0))?;
        if q.norm() == 0.0 {
            return Err(Error::InvalidArgument("q must be nonzero".into()));
        }
        Ok(q / q.norm())
    };
    let pair = match name.trim() {
        "zero" => QPair::zero(count("n", Some(1))?, twist()?)?,
        "clock-shift" => gen_clock_shift(count("n", None)?, complex("scale", c64(1.0, 0.0))?.re)?,
        "nilpotent" => gen_nilpotent(
            count("n", None)?,
            twist()?,
            complex("c", c64(1.0, 0.0))?,
            complex("d", c64(1.0, 0.0))?,
        )?,
        _ => {
            let unitary = gen_clock_shift(count("n", None)?, complex("scale", c64(1.0, 0.0))?.re)?;
            let nil = gen_nilpotent(
                count("m", None)?,
                unitary.q(),
                complex("c", c64(0.9, 0.0))?,
                complex("d", c64(0.9, 0.0))?,
            )?;
            gen_direct_sum(&[unitary, nil])?
        }
    };
    match count("conjugate", Some(0))? {
        0 => Ok(pair),
        _ => Ok(gen_conjugated(&pair, seed)?.0),
    }
}

/// The five twists exercised by the standard corpus.
pub fn corpus_twists() -> [C64; 5] {
    [
        c64(1.0, 0.0),
        c64(-1.0, 0.0),
        c64(0.0, 1.0),
        cis(2.0 * PI / 3.0),
        cis(1.0),
    ]
}

/// Deterministic corpus of named pairs: dimensions 1–6, twists
/// `{1, −1, i, e^{2πi/3}, e^{i}}`, unitary, nilpotent, mixed and
/// randomly conjugated members.
pub fn standard_corpus() -> Vec<(String, QPair)> {
    let mut out: Vec<(String, QPair)> = Vec::new();
    let mut add = |name: String, pair: Result<QPair>| {
        out.push((
            name.clone(),
            pair.unwrap_or_else(|e| panic!("corpus pair {name}: {e}")),
        ));
    };
    let twists = corpus_twists();
    for (qi, &q) in twists.iter().enumerate() {
        add(format!("zero:n=1,q#{qi}"), QPair::zero(1, q));
        for n in 2..=6 {
            let (c, d) = if n % 2 == 0 {
                (c64(0.9, 0.0), c64(0.8, 0.0))
            } else {
                (c64(1.0, 0.0), cis(0.3) * 0.7)
            };
            add(format!("nilpotent:n={n},q#{qi}"), gen_nilpotent(n, q, c, d));
        }
    }
    add(
        "nilpotent:n=3,c=0,q#4".into(),
        gen_nilpotent(3, twists[4], c64(0.0, 0.0), c64(0.6, 0.2)),
    );
    for n in [1usize, 2, 4, 3] {
        for scale in [1.0, 0.9, 0.6] {
            add(
                format!("clock-shift:n={n},scale={scale}"),
                gen_clock_shift(n, scale),
            );
        }
    }
    let mixed = |n: usize, scale: f64, m: usize| -> Result<QPair> {
        let u = gen_clock_shift(n, scale)?;
        let nil = gen_nilpotent(m, u.q(), c64(0.8, 0.0), c64(0.9, 0.0))?;
        gen_direct_sum(&[u, nil])
    };
    add("mixed:n=1,m=4".into(), mixed(1, 1.0, 4));
    add("mixed:n=2,m=3".into(), mixed(2, 1.0, 3));
    add("mixed:n=4,m=2".into(), mixed(4, 1.0, 2));
    add("mixed:n=3,m=3".into(), mixed(3, 1.0, 3));
    add(
        "sum:clock-shift(3,0.7)+clock-shift(3,1)".into(),
        gen_clock_shift(3, 0.7).and_then(|a| gen_direct_sum(&[a, gen_clock_shift(3, 1.0)?])),
    );
    let conj_sources: Vec<(String, QPair)> = out
        .iter()
        .filter(|(name, _)| {
            matches!(
                name.as_str(),
                "nilpotent:n=4,q#4"
                    | "nilpotent:n=5,q#2"
                    | "nilpotent:n=3,q#3"
                    | "clock-shift:n=3,scale=0.9"
                    | "mixed:n=2,m=3"
                    | "mixed:n=4,m=2"
                    | "zero:n=1,q#1"
            )
        })
        .cloned()
        .collect();
    for (seed, (name, pair)) in conj_sources.into_iter().enumerate() {
        let conj = gen_conjugated(&pair, 1000 + seed as u64).map(|(p, _)| p);
        out.push((
            format!("{name}+conjugate(seed={})", 1000 + seed),
            conj.unwrap(),
        ));
    }
    out
}
