//! The continued-fraction polynomial family.
//!
//! `P_0 = 1`, `P_1(x_1) = x_1` and
//! `P_n(x_1, …, x_n) = x_1·P_{n−1}(x_2, …, x_n) − P_{n−2}(x_3, …, x_n)`,
//! together with the cyclic combination `Q_p = P_p(x) − P_{p−2}(x_1, …, x_{p−2})`
//! and the discriminant `Δ_p = (P_p + P_{p−2})² − 4·P_{p−1}(head)·P_{p−1}(tail)`.
//!
//! Numeric evaluation runs the recurrence over suffixes in O(n). Symbolic
//! expansion builds [`SparsePolynomial`]s with the same recurrence and is capped
//! in arity, since term counts grow like Fibonacci numbers.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact::Rational;

pub const DEFAULT_ARITY_CAP: usize = 12;

/// Largest arity checked symbolically by [`verify_identities`].
pub const SYMBOLIC_IDENTITY_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("arity {got} is below the minimum {min}")]
    ArityTooSmall { got: usize, min: usize },
    #[error("arity {n} exceeds the symbolic cap {cap}")]
    ArityCapExceeded { n: usize, cap: usize },
    #[error("identity violated: {0}")]
    IdentityViolation(String),
}

/// `P_n(x)` for `n = x.len()`.
pub fn eval_p(x: &[Rational]) -> Rational {
    // suffix[k] = P over x[k..]; suffix[n] = P_0 = 1.
    let n = x.len();
    let mut next = Rational::one(); // P of x[k+1..]
    let mut next2 = Rational::zero(); // P of x[k+2..], with P_{-1} = 0
    for k in (0..n).rev() {
        let cur = &x[k] * &next - &next2;
        next2 = std::mem::replace(&mut next, cur);
    }
    next
}

fn check_arity(x: &[Rational]) -> Result<(), PolyError> {
    if x.len() < 2 {
        Err(PolyError::ArityTooSmall {
            got: x.len(),
            min: 2,
        })
    } else {
        Ok(())
    }
}

/// `Q_p(x) = P_p(x_0..x_{p−1}) − P_{p−2}(x_1..x_{p−2})`.
pub fn eval_q(x: &[Rational]) -> Result<Rational, PolyError> {
    check_arity(x)?;
    let p = x.len();
    Ok(eval_p(x) - eval_p(&x[1..p - 1]))
}

/// `Δ_p` in its defining form.
pub fn eval_delta(x: &[Rational]) -> Result<Rational, PolyError> {
    check_arity(x)?;
    let p = x.len();
    let s = eval_p(x) + eval_p(&x[1..p - 1]);
    Ok(s.square() - Rational::from(4) * eval_p(&x[..p - 1]) * eval_p(&x[1..]))
}

/// `Δ_p` through the cyclic form `Q_p² − 4`.
pub fn eval_delta_cyclic(x: &[Rational]) -> Result<Rational, PolyError> {
    Ok(eval_q(x)?.square() - Rational::from(4))
}

/// `Δ_p` computed both ways; disagreement is reported as an error.
pub fn eval_delta_checked(x: &[Rational]) -> Result<Rational, PolyError> {
    let direct = eval_delta(x)?;
    let cyclic = eval_delta_cyclic(x)?;
    if direct != cyclic {
        return Err(PolyError::IdentityViolation(format!(
            "discriminant forms differ at {x:?}: {direct} vs {cyclic}"
        )));
    }
    Ok(direct)
}

/// Exponent vector of a monomial.
pub type Monomial = Vec<u16>;

/// Sparse polynomial over the rationals in a fixed number of variables `X_0..X_{n−1}`.
///
/// The P/Q family is multilinear; products such as `Δ_p` are not, so exponents
/// are general and [`SparsePolynomial::is_multilinear`] reports the property.
#[derive(Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    arity: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl SparsePolynomial {
    pub fn zero(arity: usize) -> Self {
        SparsePolynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational, arity: usize) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(vec![0; arity], c);
        p
    }

    pub fn var(i: usize, arity: usize) -> Self {
        assert!(i < arity, "variable X_{i} out of range for arity {arity}");
        let mut m = vec![0; arity];
        m[i] = 1;
        let mut p = Self::zero(arity);
        p.add_term(m, Rational::one());
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e <= 1))
    }

    pub fn coefficient(&self, m: &[u16]) -> Rational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.arity, rhs.arity);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&-Rational::one()))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut out = Self::zero(self.arity);
        if k.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.arity, rhs.arity);
        let mut out = Self::zero(self.arity);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let m = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.arity);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.clone();
                for (x, &e) in point.iter().zip(m) {
                    for _ in 0..e {
                        v = v * x;
                    }
                }
                v
            })
            .sum()
    }

    /// Formal partial derivative in `X_var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[var] = e - 1;
            out.add_term(m2, c * &Rational::from(i64::from(e)));
        }
        out
    }

    /// Renames `X_i` to `X_{map[i]}`; `map` must be injective.
    pub fn rename(&self, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.arity);
        let mut out = Self::zero(self.arity);
        for (m, c) in &self.terms {
            let mut m2 = vec![0; self.arity];
            for (i, &e) in m.iter().enumerate() {
                m2[map[i]] += e;
            }
            out.add_term(m2, c.clone());
        }
        out
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest degree first, then by variable index.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().map(|&e| u32::from(e)).sum();
            let db: u32 = b.iter().map(|&e| u32::from(e)).sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (idx, (m, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = c.abs();
            let is_const = m.iter().all(|&e| e == 0);
            if !abs.is_one() || is_const {
                write!(f, "{abs}")?;
            }
            for (i, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "X{i}")?,
                    _ => write!(f, "X{i}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn check_cap(n: usize, cap: usize) -> Result<(), PolyError> {
    if n > cap {
        Err(PolyError::ArityCapExceeded { n, cap })
    } else {
        Ok(())
    }
}

/// `P_m(X_{vars[0]}, …, X_{vars[m−1]})` inside a ring of `arity` variables.
pub fn expand_p_over(vars: &[usize], arity: usize) -> SparsePolynomial {
    let mut next = SparsePolynomial::constant(Rational::one(), arity);
    let mut next2 = SparsePolynomial::zero(arity);
    for &v in vars.iter().rev() {
        let cur = SparsePolynomial::var(v, arity).mul(&next).sub(&next2);
        next2 = std::mem::replace(&mut next, cur);
    }
    next
}

/// `Q_p` over the variable list `vars` (length ≥ 2).
pub fn expand_q_over(vars: &[usize], arity: usize) -> SparsePolynomial {
    let p = vars.len();
    expand_p_over(vars, arity).sub(&expand_p_over(&vars[1..p - 1], arity))
}

/// `Δ_p` over the variable list `vars` (length ≥ 2), defining form.
pub fn expand_delta_over(vars: &[usize], arity: usize) -> SparsePolynomial {
    let p = vars.len();
    let s = expand_p_over(vars, arity).add(&expand_p_over(&vars[1..p - 1], arity));
    let prod = expand_p_over(&vars[..p - 1], arity).mul(&expand_p_over(&vars[1..], arity));
    s.mul(&s).sub(&prod.scale(&Rational::from(4)))
}

fn identity_vars(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn expand_p(n: usize, cap: usize) -> Result<SparsePolynomial, PolyError> {
    check_cap(n, cap)?;
    Ok(expand_p_over(&identity_vars(n), n))
}

pub fn expand_q(n: usize, cap: usize) -> Result<SparsePolynomial, PolyError> {
    check_cap(n, cap)?;
    if n < 2 {
        return Err(PolyError::ArityTooSmall { got: n, min: 2 });
    }
    Ok(expand_q_over(&identity_vars(n), n))
}

pub fn expand_delta(n: usize, cap: usize) -> Result<SparsePolynomial, PolyError> {
    check_cap(n, cap)?;
    if n < 2 {
        return Err(PolyError::ArityTooSmall { got: n, min: 2 });
    }
    Ok(expand_delta_over(&identity_vars(n), n))
}

// ---------------------------------------------------------------------------
// Identity suite

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `P_p(x) = P_p(reversed x)`.
    Reversal,
    /// `Q_p` is invariant under every rotation of its arguments.
    CyclicInvariance,
    /// `P_p·P_{p−2}(middle) − P_{p−1}(head)·P_{p−1}(tail) = −1`.
    TelescopingProduct,
    /// `(P_p + P_{p−2})² − 4·P_{p−1}·P_{p−1} = Q_p² − 4`.
    DiscriminantForms,
    /// `Σ_j (p+1−j)·e_j(x) = ∏(1+x_i) + Σ_k ∏_{i≠k}(1+x_i)`.
    WeightedSymmetricSum,
}

impl Identity {
    pub const ALL: [Identity; 5] = [
        Identity::Reversal,
        Identity::CyclicInvariance,
        Identity::TelescopingProduct,
        Identity::DiscriminantForms,
        Identity::WeightedSymmetricSum,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Symbolic,
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// The evaluation point; absent for symbolic comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<Rational>>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub identity: Identity,
    pub p: usize,
    pub mode: CheckMode,
    pub trials: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub description: String,
    pub checked: usize,
    pub mismatches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mismatch: Option<ProbeMismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeMismatch {
    pub case: String,
    pub computed: String,
    pub claimed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub p_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub all_passed: bool,
    pub checks: Vec<IdentityCheck>,
    /// Claims that are compared and reported but never gate `all_passed`.
    pub probes: Vec<ProbeReport>,
}

/// Seeded generator of positive rationals with numerator and denominator in `[1, 50]`.
pub struct RationalSampler {
    rng: ChaCha8Rng,
}

impl RationalSampler {
    pub fn new(seed: u64) -> Self {
        RationalSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> Rational {
        let n: i64 = self.rng.gen_range(1..=50);
        let d: i64 = self.rng.gen_range(1..=50);
        Rational::frac(n, d)
    }

    pub fn vector(&mut self, len: usize) -> Vec<Rational> {
        (0..len).map(|_| self.sample()).collect()
    }
}

fn rotate(x: &[Rational], k: usize) -> Vec<Rational> {
    let mut v = x.to_vec();
    v.rotate_left(k);
    v
}

/// Elementary symmetric polynomials `e_0..e_n` at `x`.
fn elementary_symmetric(x: &[Rational]) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); x.len() + 1];
    e[0] = Rational::one();
    for (i, xi) in x.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let add = xi * &e[j - 1];
            e[j] = &e[j] + add;
        }
    }
    e
}

fn weighted_sum_sides(x: &[Rational]) -> (Rational, Rational) {
    let p = x.len();
    let e = elementary_symmetric(x);
    let lhs = e
        .iter()
        .enumerate()
        .map(|(j, ej)| Rational::from((p + 1 - j) as i64) * ej)
        .sum();
    let ones: Vec<Rational> = x.iter().map(|xi| xi + &Rational::one()).collect();
    let full: Rational = ones.iter().cloned().product();
    let leave_one: Rational = (0..p)
        .map(|k| {
            ones.iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, v)| v.clone())
                .product::<Rational>()
        })
        .sum();
    (lhs, full + leave_one)
}

/// Both sides of an identity at a numeric point.
fn numeric_sides(id: Identity, x: &[Rational]) -> Vec<(Rational, Rational)> {
    let p = x.len();
    match id {
        Identity::Reversal => {
            let rev: Vec<_> = x.iter().rev().cloned().collect();
            vec![(eval_p(x), eval_p(&rev))]
        }
        Identity::CyclicInvariance => {
            let base = eval_q(x).expect("p >= 2");
            (1..p)
                .map(|k| (base.clone(), eval_q(&rotate(x, k)).expect("p >= 2")))
                .collect()
        }
        Identity::TelescopingProduct => {
            let a = eval_p(x) * eval_p(&x[1..p - 1]) - eval_p(&x[..p - 1]) * eval_p(&x[1..]);
            vec![(a, -Rational::one())]
        }
        Identity::DiscriminantForms => vec![(
            eval_delta(x).expect("p >= 2"),
            eval_delta_cyclic(x).expect("p >= 2"),
        )],
        Identity::WeightedSymmetricSum => vec![weighted_sum_sides(x)],
    }
}

fn symbolic_sides(id: Identity, p: usize) -> Vec<(SparsePolynomial, SparsePolynomial)> {
    let vars = identity_vars(p);
    match id {
        Identity::Reversal => {
            let rev: Vec<usize> = vars.iter().rev().cloned().collect();
            vec![(expand_p_over(&vars, p), expand_p_over(&rev, p))]
        }
        Identity::CyclicInvariance => {
            let base = expand_q_over(&vars, p);
            (1..p)
                .map(|k| {
                    let mut rot = vars.clone();
                    rot.rotate_left(k);
                    (base.clone(), expand_q_over(&rot, p))
                })
                .collect()
        }
        Identity::TelescopingProduct => {
            let a = expand_p_over(&vars, p)
                .mul(&expand_p_over(&vars[1..p - 1], p))
                .sub(&expand_p_over(&vars[..p - 1], p).mul(&expand_p_over(&vars[1..], p)));
            vec![(a, SparsePolynomial::constant(-Rational::one(), p))]
        }
        Identity::DiscriminantForms => {
            let q = expand_q_over(&vars, p);
            let cyclic = q.mul(&q).sub(&SparsePolynomial::constant(4.into(), p));
            vec![(expand_delta_over(&vars, p), cyclic)]
        }
        Identity::WeightedSymmetricSum => {
            let one = SparsePolynomial::constant(Rational::one(), p);
            let mut lhs = SparsePolynomial::zero(p);
            // Σ_j (p+1−j) Σ_{|q|=j} x^q, over all 0/1 exponent vectors.
            for mask in 0u32..(1 << p) {
                let m: Monomial = (0..p).map(|i| ((mask >> i) & 1) as u16).collect();
                let j = mask.count_ones() as usize;
                let mut t = SparsePolynomial::zero(p);
                t.add_term(m, Rational::from((p + 1 - j) as i64));
                lhs = lhs.add(&t);
            }
            let factors: Vec<_> = (0..p).map(|i| one.add(&SparsePolynomial::var(i, p))).collect();
            let full = factors.iter().fold(one.clone(), |acc, f| acc.mul(f));
            let mut rhs = full;
            for k in 0..p {
                let prod = factors
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .fold(one.clone(), |acc, (_, f)| acc.mul(f));
                rhs = rhs.add(&prod);
            }
            vec![(lhs, rhs)]
        }
    }
}

/// Checks the identities of the family for every `2 ≤ p ≤ p_max`, symbolically
/// up to [`SYMBOLIC_IDENTITY_MAX`] and at `trials` seeded random points.
pub fn verify_identities(p_max: usize, trials: usize, seed: u64) -> Result<IdentityReport, PolyError> {
    if p_max < 2 {
        return Err(PolyError::ArityTooSmall { got: p_max, min: 2 });
    }
    let mut checks = Vec::new();

    for p in 2..=p_max.min(SYMBOLIC_IDENTITY_MAX) {
        for id in Identity::ALL {
            let mismatch = symbolic_sides(id, p).into_iter().find(|(l, r)| l != r);
            checks.push(IdentityCheck {
                identity: id,
                p,
                mode: CheckMode::Symbolic,
                trials: 0,
                passed: mismatch.is_none(),
                counterexample: mismatch.map(|(l, r)| Counterexample {
                    input: None,
                    lhs: l.to_string(),
                    rhs: r.to_string(),
                }),
            });
        }
    }

    let mut sampler = RationalSampler::new(seed);
    for p in 2..=p_max {
        let points: Vec<Vec<Rational>> = (0..trials).map(|_| sampler.vector(p)).collect();
        for id in Identity::ALL {
            let mut counterexample = None;
            'points: for x in &points {
                for (l, r) in numeric_sides(id, x) {
                    if l != r {
                        counterexample = Some(Counterexample {
                            input: Some(x.clone()),
                            lhs: l.to_string(),
                            rhs: r.to_string(),
                        });
                        break 'points;
                    }
                }
            }
            checks.push(IdentityCheck {
                identity: id,
                p,
                mode: CheckMode::Random,
                trials,
                passed: counterexample.is_none(),
                counterexample,
            });
        }
    }

    let probes = vec![
        probe_derivative_claim(p_max.min(SYMBOLIC_IDENTITY_MAX)),
        probe_q_closed_form(p_max, trials, seed),
        probe_p_closed_form(p_max, trials, seed),
    ];

    Ok(IdentityReport {
        p_max,
        trials,
        seed,
        all_passed: checks.iter().all(|c| c.passed),
        checks,
        probes,
    })
}

/// Compares `∂^q P_j` against `P_{j−|q|}` with the differentiated variables
/// omitted, for every `1 ≤ j ≤ j_max` and every 0/1 multi-index `q`.
pub fn probe_derivative_claim(j_max: usize) -> ProbeReport {
    let mut checked = 0;
    let mut mismatches = 0;
    let mut first = None;
    for j in 1..=j_max {
        let p = expand_p_over(&identity_vars(j), j);
        for mask in 1u32..(1 << j) {
            let diffed: Vec<usize> = (0..j).filter(|i| (mask >> i) & 1 == 1).collect();
            let kept: Vec<usize> = (0..j).filter(|i| (mask >> i) & 1 == 0).collect();
            let derivative = diffed.iter().fold(p.clone(), |acc, &v| acc.derivative(v));
            let claimed = expand_p_over(&kept, j);
            checked += 1;
            if derivative != claimed {
                mismatches += 1;
                if first.is_none() {
                    let names: Vec<String> = diffed.iter().map(|v| format!("X{v}")).collect();
                    first = Some(ProbeMismatch {
                        case: format!("j={j}, differentiate in {}", names.join(",")),
                        computed: derivative.to_string(),
                        claimed: claimed.to_string(),
                    });
                }
            }
        }
    }
    ProbeReport {
        name: "derivative_claim".into(),
        description: "d^q P_j equals P_{j-|q|} with the differentiated variables omitted".into(),
        checked,
        mismatches,
        first_mismatch: first,
    }
}

/// Probe points: the all-2 point for each arity, then `(3,3)`, then random points.
fn probe_points(p_max: usize, trials: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut pts: Vec<Vec<Rational>> = (2..=p_max).map(|p| vec![Rational::from(2); p]).collect();
    pts.push(vec![Rational::from(3), Rational::from(3)]);
    // Offset seed so probe points differ from the identity trials.
    let mut sampler = RationalSampler::new(seed.wrapping_add(0x9e37_79b9));
    for p in 2..=p_max {
        for _ in 0..trials.min(10) {
            pts.push(sampler.vector(p).into_iter().map(|v| v + Rational::one()).collect());
        }
    }
    pts
}

fn run_point_probe(
    name: &str,
    description: &str,
    points: &[Vec<Rational>],
    f: impl Fn(&[Rational]) -> (Rational, Rational),
) -> ProbeReport {
    let mut mismatches = 0;
    let mut first = None;
    for x in points {
        let (computed, claimed) = f(x);
        if computed != claimed {
            mismatches += 1;
            if first.is_none() {
                let xs: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                first = Some(ProbeMismatch {
                    case: format!("delta=({})", xs.join(",")),
                    computed: computed.to_string(),
                    claimed: claimed.to_string(),
                });
            }
        }
    }
    ProbeReport {
        name: name.into(),
        description: description.into(),
        checked: points.len(),
        mismatches,
        first_mismatch: first,
    }
}

/// Compares `Q_p(δ)` with the closed form `2·∏(δ_j − 1)`.
pub fn probe_q_closed_form(p_max: usize, trials: usize, seed: u64) -> ProbeReport {
    run_point_probe(
        "q_closed_form",
        "Q_p(delta) equals 2*prod(delta_j - 1)",
        &probe_points(p_max, trials, seed),
        |x| {
            let claimed = Rational::from(2)
                * x.iter().map(|d| d - &Rational::one()).product::<Rational>();
            (eval_q(x).expect("p >= 2"), claimed)
        },
    )
}

/// Compares `P_{p−1}(δ_0..δ_{p−2})` with `∏(δ_i − 1) + Σ_k ∏_{i≠k}(δ_i − 1)`.
pub fn probe_p_closed_form(p_max: usize, trials: usize, seed: u64) -> ProbeReport {
    run_point_probe(
        "p_closed_form",
        "P_{p-1}(delta) equals prod(delta_i - 1) + sum_k prod_{i!=k}(delta_i - 1)",
        &probe_points(p_max, trials, seed),
        |x| {
            let head = &x[..x.len() - 1];
            let y: Vec<Rational> = head.iter().map(|d| d - &Rational::one()).collect();
            let full: Rational = y.iter().cloned().product();
            let rest: Rational = (0..y.len())
                .map(|k| {
                    y.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != k)
                        .map(|(_, v)| v.clone())
                        .product::<Rational>()
                })
                .sum();
            (eval_p(head), full + rest)
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&n| Rational::from(n)).collect()
    }

    #[test]
    fn p_small_values() {
        assert_eq!(eval_p(&[]), Rational::one());
        assert_eq!(eval_p(&ints(&[2, 2, 2])), Rational::from(4));
        // 2·(11/4·2 − 1) − 2
        assert_eq!(eval_p(&[r(2, 1), r(11, 4), r(2, 1)]), Rational::from(7));
        assert_eq!(eval_p(&[r(2, 1), r(2, 1), r(11, 4)]), r(25, 4));
    }

    #[test]
    fn q_and_delta_values() {
        assert_eq!(eval_q(&ints(&[2, 2])).unwrap(), Rational::from(2));
        for p in 2..=12 {
            assert_eq!(eval_q(&vec![Rational::from(2); p]).unwrap(), Rational::from(2));
        }
        let x = [r(2, 1), r(11, 4), r(2, 1)];
        assert_eq!(eval_q(&x).unwrap(), r(17, 4));
        assert_eq!(eval_delta_checked(&x).unwrap(), r(225, 16));
        assert_eq!(eval_delta_checked(&ints(&[2, 2, 2])).unwrap(), Rational::zero());
        assert_eq!(eval_delta_checked(&ints(&[0, 1])).unwrap(), Rational::zero());
        assert_eq!(eval_q(&ints(&[0, 1])).unwrap(), Rational::from(-2));
    }

    #[test]
    fn arity_errors() {
        assert_eq!(
            eval_q(&ints(&[2])),
            Err(PolyError::ArityTooSmall { got: 1, min: 2 })
        );
        assert!(eval_delta(&[]).is_err());
        assert_eq!(
            expand_p(13, DEFAULT_ARITY_CAP),
            Err(PolyError::ArityCapExceeded { n: 13, cap: 12 })
        );
    }

    #[test]
    fn expansions_match_printed_polynomials() {
        assert_eq!(expand_p(0, 12).unwrap().to_string(), "1");
        assert_eq!(expand_p(2, 12).unwrap().to_string(), "X0X1 - 1");
        assert_eq!(expand_p(3, 12).unwrap().to_string(), "X0X1X2 - X0 - X2");
        assert_eq!(
            expand_p(4, 12).unwrap().to_string(),
            "X0X1X2X3 - X0X1 - X0X3 - X2X3 + 1"
        );
        assert_eq!(expand_q(2, 12).unwrap().to_string(), "X0X1 - 2");
        assert_eq!(
            expand_q(4, 12).unwrap().to_string(),
            "X0X1X2X3 - X0X1 - X0X3 - X1X2 - X2X3 + 2"
        );
    }

    #[test]
    fn p6_matches_printed_expansion() {
        let p6 = expand_p(6, 12).unwrap();
        assert_eq!(p6.num_terms(), 13);
        // Printed display: 1 sextic, 5 quartic, 6 quadratic terms and a constant.
        let mono = |idx: &[usize]| {
            let mut m = vec![0u16; 6];
            for &i in idx {
                m[i] = 1;
            }
            m
        };
        assert_eq!(p6.coefficient(&mono(&[0, 1, 2, 3, 4, 5])), Rational::one());
        for quartic in [[0, 1, 2, 3], [2, 3, 4, 5], [0, 3, 4, 5], [0, 1, 4, 5], [0, 1, 2, 5]] {
            assert_eq!(p6.coefficient(&mono(&quartic)), -Rational::one());
        }
        for quad in [[0, 1], [2, 3], [4, 5], [0, 5], [0, 3], [2, 5]] {
            assert_eq!(p6.coefficient(&mono(&quad)), Rational::one());
        }
        assert_eq!(p6.coefficient(&mono(&[])), -Rational::one());
        assert!(p6.is_multilinear());
    }

    #[test]
    fn q6_contains_the_new_monomials() {
        let q6 = expand_q(6, 12).unwrap();
        let mut m = vec![0u16; 6];
        m[1] = 1;
        m[4] = 1;
        assert_eq!(q6.coefficient(&m), Rational::one());
        assert_eq!(q6.coefficient(&[0; 6]), Rational::from(-2));
    }

    #[test]
    fn expansion_agrees_with_evaluation() {
        let mut s = RationalSampler::new(3);
        for n in 0..=9 {
            let poly = expand_p(n, 12).unwrap();
            for _ in 0..5 {
                let x = s.vector(n);
                assert_eq!(poly.eval(&x), eval_p(&x));
            }
        }
    }

    #[test]
    fn weighted_sum_at_p2() {
        // 3 + 2x0 + 2x1 + x0x1 on both sides
        let sides = symbolic_sides(Identity::WeightedSymmetricSum, 2);
        let (l, r) = &sides[0];
        assert_eq!(l, r);
        assert_eq!(l.to_string(), "X0X1 + 2X0 + 2X1 + 3");
    }

    #[test]
    fn identities_pass_small() {
        let report = verify_identities(4, 20, 11).unwrap();
        assert!(report.all_passed, "{report:?}");
        assert_eq!(
            verify_identities(1, 1, 1).unwrap_err(),
            PolyError::ArityTooSmall { got: 1, min: 2 }
        );
    }

    #[test]
    fn derivative_probe_reports_interior_variable() {
        let probe = probe_derivative_claim(3);
        let first = probe.first_mismatch.expect("mismatch at j=3");
        assert_eq!(first.case, "j=3, differentiate in X1");
        assert_eq!(first.computed, "X0X2");
        assert_eq!(first.claimed, "X0X2 - 1");
    }

    #[test]
    fn q_closed_form_probe_reports_three_three() {
        let probe = probe_q_closed_form(4, 5, 1);
        let first = probe.first_mismatch.unwrap();
        assert_eq!(first.case, "delta=(3,3)");
        assert_eq!((first.computed.as_str(), first.claimed.as_str()), ("7", "8"));
    }

    #[test]
    fn derivative_and_rename() {
        let p3 = expand_p(3, 12).unwrap();
        assert_eq!(p3.derivative(0).to_string(), "X1X2 - 1");
        let rev = p3.rename(&[2, 1, 0]);
        assert_eq!(rev, p3);
    }
}
