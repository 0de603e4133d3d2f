//! The cyclic system `α_i + 1/α_{i+1} = δ_i` (indices mod p).
//!
//! Signs follow the flipped convention: `α_i = −CS(𝓕, D_i, D_i ∩ D_{i−1})`, so a
//! positive `α_i` means a negative Camacho-Sad index. Conversion back to actual
//! indices happens only in [`Certificate::cs_indices`].

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::cfpoly::eval_p;
use crate::exact::{quad_solve, ExactError, QuadraticNumber, Rational};
use crate::surface::{CurveConfiguration, SurfaceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsError {
    #[error("system has no equations")]
    EmptySystem,
    #[error("index {j} out of range for p = {p}")]
    IndexOutOfRange { j: usize, p: usize },
    #[error("degenerate system: c_{j}(delta) = 0")]
    DegenerateSystem { j: usize },
    #[error("complex roots, discriminant {0}")]
    ComplexRoots(Rational),
    #[error("alpha_0 = {alpha0} is a forbidden value (denominator vanishes at step {step})")]
    ForbiddenValue { alpha0: QuadraticNumber, step: usize },
    #[error("invalid chain {0:?}: self-intersections must be <= -2")]
    InvalidChain(Vec<i64>),
    #[error("closed-form and sequential propagation disagree at alpha_{index}")]
    PropagationMismatch { index: usize },
    #[error("solution violates equation {index}")]
    UnsatisfiedEquation { index: usize },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Exact(ExactError),
}

impl From<ExactError> for CsError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::ComplexRoots(d) => CsError::ComplexRoots(d),
            other => CsError::Exact(other),
        }
    }
}

/// Right-hand side `δ` of the cyclic system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaSystem {
    pub delta: Vec<Rational>,
    #[serde(skip)]
    pub provenance: Option<Box<CurveConfiguration>>,
}

impl DeltaSystem {
    pub fn new(delta: Vec<Rational>) -> Result<Self, CsError> {
        if delta.is_empty() {
            return Err(CsError::EmptySystem);
        }
        Ok(DeltaSystem {
            delta,
            provenance: None,
        })
    }

    pub fn from_ints(delta: &[i64]) -> Result<Self, CsError> {
        Self::new(delta.iter().map(|&d| Rational::from(d)).collect())
    }

    pub fn p(&self) -> usize {
        self.delta.len()
    }

    /// `(δ_j, δ_{j+1}, …, δ_{j−1})`.
    pub fn rotated(&self, j: usize) -> Vec<Rational> {
        let mut v = self.delta.clone();
        v.rotate_left(j % self.p());
        v
    }

    /// `Δ_p(δ)`; for `p = 1` the discriminant `δ_0² − 4` of `X² − δ_0X + 1`.
    pub fn discriminant(&self) -> Rational {
        let d = &self.delta;
        let p = d.len();
        let outer = if p >= 2 { eval_p(&d[1..p - 1]) } else { Rational::zero() };
        let s = eval_p(d) + outer;
        let head = eval_p(&d[..p - 1]);
        let tail = eval_p(&d[1..]);
        s.square() - Rational::from(4) * head * tail
    }
}

/// `a_j X² + b_j X + c_j = 0`, satisfied by `α_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadraticEquation {
    pub index: usize,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl QuadraticEquation {
    pub fn discriminant(&self) -> Rational {
        self.b.square() - Rational::from(4) * &self.a * &self.c
    }

    /// Coprime integer coefficients with a positive leading term.
    pub fn normalized(&self) -> (i128, i128, i128) {
        use num_integer::Integer;
        use num_traits::ToPrimitive;
        let coeffs = [&self.a, &self.b, &self.c];
        let lcm = coeffs
            .iter()
            .fold(num_bigint::BigInt::from(1), |acc, r| acc.lcm(r.denom()));
        let ints: Vec<num_bigint::BigInt> = coeffs
            .iter()
            .map(|r| (*r * &Rational::from(lcm.clone())).numer().clone())
            .collect();
        let g = ints.iter().fold(num_bigint::BigInt::from(0), |acc, v| acc.gcd(v));
        let sign = if self.a.is_negative() { -1 } else { 1 };
        let out: Vec<i128> = ints
            .iter()
            .map(|v| (v / &g).to_i128().expect("coefficient fits in i128") * sign)
            .collect();
        (out[0], out[1], out[2])
    }
}

/// The coefficients of the quadratic satisfied by `α_j`.
///
/// With the convention `P_{−1} = 0` the same formulas give `X² − δ_0X + 1` for `p = 1`.
pub fn coefficients(system: &DeltaSystem, j: usize) -> Result<QuadraticEquation, CsError> {
    let p = system.p();
    if j >= p {
        return Err(CsError::IndexOutOfRange { j, p });
    }
    check_degenerate(system)?;
    Ok(equation_unchecked(system, j))
}

fn equation_unchecked(system: &DeltaSystem, j: usize) -> QuadraticEquation {
    let r = system.rotated(j);
    let p = r.len();
    let a = eval_p(&r[1..]);
    let c = eval_p(&r[..p - 1]);
    let inner = if p >= 2 { eval_p(&r[1..p - 1]) } else { Rational::zero() };
    let b = -(eval_p(&r) + inner);
    QuadraticEquation { index: j, a, b, c }
}

fn check_degenerate(system: &DeltaSystem) -> Result<(), CsError> {
    for j in 0..system.p() {
        let r = system.rotated(j);
        if eval_p(&r[..r.len() - 1]).is_zero() {
            return Err(CsError::DegenerateSystem { j });
        }
    }
    Ok(())
}

pub fn all_coefficients(system: &DeltaSystem) -> Result<Vec<QuadraticEquation>, CsError> {
    check_degenerate(system)?;
    Ok((0..system.p()).map(|j| equation_unchecked(system, j)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CsSolution {
    pub alpha: Vec<QuadraticNumber>,
    pub branch: Branch,
    pub mu: QuadraticNumber,
    pub discriminant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionPair {
    pub plus: CsSolution,
    pub minus: CsSolution,
    /// Both branches coincide (`μ = 1`).
    pub collapsed: bool,
}

/// Solves `(𝓔_0)` and propagates both roots around the cycle.
pub fn solve_system(system: &DeltaSystem) -> Result<SolutionPair, CsError> {
    check_degenerate(system)?;
    let eq = equation_unchecked(system, 0);
    let roots = quad_solve(&eq.a, &eq.b, &eq.c)?;
    let discriminant = system.discriminant();

    let mut sols = Vec::with_capacity(2);
    for root in [roots.larger, roots.smaller] {
        let alpha = propagate(&root, system)?;
        check_equations(&alpha, system)?;
        let mu = torsion(&alpha)?;
        sols.push((alpha, mu));
    }
    let (second, first) = (sols.pop().unwrap(), sols.pop().unwrap());
    let (hi, lo) = if first.1.cmp_value(&second.1)? == Ordering::Less {
        (second, first)
    } else {
        (first, second)
    };
    let collapsed = hi.1 == lo.1;
    Ok(SolutionPair {
        plus: CsSolution {
            alpha: hi.0,
            branch: Branch::Plus,
            mu: hi.1,
            discriminant: discriminant.clone(),
        },
        minus: CsSolution {
            alpha: lo.0,
            branch: Branch::Minus,
            mu: lo.1,
            discriminant,
        },
        collapsed,
    })
}

/// Full solution vector from `α_0`, by the closed form and by the sequential
/// recurrence `α_{i+1} = 1/(δ_i − α_i)`; the two must agree.
pub fn propagate(alpha0: &QuadraticNumber, system: &DeltaSystem) -> Result<Vec<QuadraticNumber>, CsError> {
    let d = &system.delta;
    let p = d.len();
    let forbidden = |step| CsError::ForbiddenValue {
        alpha0: alpha0.clone(),
        step,
    };

    let mut closed = vec![alpha0.clone()];
    for i in 0..p - 1 {
        let p_prev = if i == 0 { Rational::zero() } else { eval_p(&d[1..i]) };
        let num = alpha0.mul_rational(&p_prev).add_rational(&-eval_p(&d[..i]));
        let den = alpha0
            .mul_rational(&eval_p(&d[1..=i]))
            .add_rational(&-eval_p(&d[..=i]));
        if den.is_zero() {
            return Err(forbidden(i));
        }
        closed.push(num.checked_div(&den)?);
    }

    let mut seq = vec![alpha0.clone()];
    for i in 0..p - 1 {
        let den = QuadraticNumber::from(d[i].clone()).checked_sub(&seq[i])?;
        if den.is_zero() {
            return Err(forbidden(i));
        }
        seq.push(den.recip()?);
    }

    if let Some(index) = (0..p).find(|&i| closed[i] != seq[i]) {
        return Err(CsError::PropagationMismatch { index });
    }
    if seq.iter().any(QuadraticNumber::is_zero) {
        return Err(forbidden(p));
    }
    Ok(seq)
}

/// Checks `α_i + 1/α_{i+1} = δ_i` exactly for every `i` mod p.
pub fn check_equations(alpha: &[QuadraticNumber], system: &DeltaSystem) -> Result<(), CsError> {
    let p = system.p();
    for i in 0..p {
        let next = &alpha[(i + 1) % p];
        if next.is_zero() {
            return Err(CsError::UnsatisfiedEquation { index: i });
        }
        let lhs = alpha[i].checked_add(&next.recip()?)?;
        if lhs != QuadraticNumber::from(system.delta[i].clone()) {
            return Err(CsError::UnsatisfiedEquation { index: i });
        }
    }
    Ok(())
}

/// `μ = ∏ α_i`.
pub fn torsion(alpha: &[QuadraticNumber]) -> Result<QuadraticNumber, CsError> {
    alpha
        .iter()
        .try_fold(QuadraticNumber::from(1), |acc, a| acc.checked_mul(a))
        .map_err(CsError::from)
}

/// Contribution `t ∈ (0, 1)` of a chain attached to a cycle curve.
///
/// `chain` lists self-intersections from the top `C_0` to the curve meeting the
/// cycle. With `β_0 = −C_0²` and `β_{i+1} = −C_{i+1}² − 1/β_i`, `t = 1/β_{k−1}`,
/// and `−1/C_{k−1}² ≤ t ≤ k/(k+1)`.
pub fn branch_contribution(chain: &[i64]) -> Result<Rational, CsError> {
    if chain.iter().any(|&c| c > -2) {
        return Err(CsError::InvalidChain(chain.to_vec()));
    }
    let mut beta: Option<Rational> = None;
    for &c in chain {
        let next = match beta {
            None => Rational::from(-c),
            Some(b) => Rational::from(-c) - b.recip()?,
        };
        beta = Some(next);
    }
    match beta {
        None => Ok(Rational::zero()),
        Some(b) => Ok(b.recip()?),
    }
}

/// `δ_j = −D_j² − t_j` for each cycle curve, in cycle order.
pub fn build_delta(config: &CurveConfiguration) -> Result<DeltaSystem, CsError> {
    config.validate()?;
    let mut delta: Vec<Rational> = config
        .cycle
        .iter()
        .map(|c| Rational::from(-c.self_intersection))
        .collect();
    for br in &config.branches {
        let t = branch_contribution(&br.chain)?;
        delta[br.attach] = &delta[br.attach] - t;
    }
    debug_assert!(delta.iter().all(|d| d > &Rational::one()));
    Ok(DeltaSystem {
        delta,
        provenance: Some(Box::new(config.clone())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl From<Ordering> for Sign {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Greater => Sign::Positive,
            Ordering::Equal => Sign::Zero,
            Ordering::Less => Sign::Negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativityVerdict {
    AllNegativeCs,
    NotAllNegative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub branch: Branch,
    /// Sign of each `α_i`; positive means a negative Camacho-Sad index.
    pub alpha_signs: Vec<Sign>,
    /// The actual indices `−α_i`.
    pub cs_indices: Vec<QuadraticNumber>,
    pub verdict: NegativityVerdict,
    pub mu: QuadraticNumber,
    pub mu_at_least_one: bool,
}

pub fn verify_negativity(solution: &CsSolution) -> Certificate {
    let alpha_signs: Vec<Sign> = solution.alpha.iter().map(|a| a.signum().into()).collect();
    let verdict = if alpha_signs.iter().all(|s| *s == Sign::Positive) {
        NegativityVerdict::AllNegativeCs
    } else {
        NegativityVerdict::NotAllNegative
    };
    let mu_at_least_one = solution
        .mu
        .cmp_value(&QuadraticNumber::from(1))
        .map(|o| o != Ordering::Less)
        .unwrap_or(false);
    Certificate {
        branch: solution.branch,
        alpha_signs,
        cs_indices: solution
            .alpha
            .iter()
            .map(|a| a.mul_rational(&-Rational::one()))
            .collect(),
        verdict,
        mu: solution.mu.clone(),
        mu_at_least_one,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{Branch as ChainBranch, CycleCurve};

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn qn(n: i64, d: i64) -> QuadraticNumber {
        QuadraticNumber::from(r(n, d))
    }

    fn sys(v: &[Rational]) -> DeltaSystem {
        DeltaSystem::new(v.to_vec()).unwrap()
    }

    #[test]
    fn coefficients_examples() {
        let s = sys(&[r(2, 1), r(11, 4), r(2, 1)]);
        let eq = coefficients(&s, 0).unwrap();
        assert_eq!((eq.a.clone(), eq.b.clone(), eq.c.clone()), (r(9, 2), r(-39, 4), r(9, 2)));
        assert_eq!(eq.normalized(), (6, -13, 6));
        assert_eq!(eq.discriminant(), r(225, 16));

        let eq = coefficients(&DeltaSystem::from_ints(&[2, 2, 2]).unwrap(), 1).unwrap();
        assert_eq!((eq.a, eq.b, eq.c), (3.into(), (-6).into(), 3.into()));
    }

    #[test]
    fn degenerate_and_range_errors() {
        let s = DeltaSystem::from_ints(&[0, 1]).unwrap();
        assert_eq!(coefficients(&s, 0), Err(CsError::DegenerateSystem { j: 0 }));
        assert_eq!(solve_system(&s).unwrap_err(), CsError::DegenerateSystem { j: 0 });
        let s = DeltaSystem::from_ints(&[2, 2]).unwrap();
        assert_eq!(coefficients(&s, 2), Err(CsError::IndexOutOfRange { j: 2, p: 2 }));
        assert_eq!(DeltaSystem::new(vec![]), Err(CsError::EmptySystem));
    }

    #[test]
    fn four_curve_example_in_solving_order() {
        // The printed solution satisfies the system in the order (2, 11/4, 2).
        let s = sys(&[r(2, 1), r(11, 4), r(2, 1)]);
        let pair = solve_system(&s).unwrap();
        assert_eq!(pair.plus.alpha, vec![qn(3, 2), qn(2, 1), qn(4, 3)]);
        assert_eq!(pair.plus.mu, qn(4, 1));
        assert_eq!(pair.minus.alpha, vec![qn(2, 3), qn(3, 4), qn(1, 2)]);
        assert_eq!(pair.minus.mu, qn(1, 4));
        assert_eq!(pair.plus.discriminant, r(225, 16));
        assert!(!pair.collapsed);
    }

    #[test]
    fn configuration_order_gives_rotated_solution() {
        let s = sys(&[r(2, 1), r(2, 1), r(11, 4)]);
        let pair = solve_system(&s).unwrap();
        assert_eq!(pair.plus.alpha, vec![qn(4, 3), qn(3, 2), qn(2, 1)]);
        assert_eq!(pair.minus.alpha, vec![qn(1, 2), qn(2, 3), qn(3, 4)]);
        assert_eq!(pair.plus.mu, qn(4, 1));
    }

    #[test]
    fn enoki_case_collapses() {
        let pair = solve_system(&DeltaSystem::from_ints(&[2, 2, 2, 2]).unwrap()).unwrap();
        assert!(pair.collapsed);
        assert_eq!(pair.plus.alpha, vec![qn(1, 1); 4]);
        assert_eq!(pair.plus.mu, qn(1, 1));
        assert_eq!(pair.plus.discriminant, Rational::zero());
        let cert = verify_negativity(&pair.plus);
        assert_eq!(cert.verdict, NegativityVerdict::AllNegativeCs);
        assert!(cert.mu_at_least_one);
    }

    #[test]
    fn single_nodal_curve() {
        let pair = solve_system(&DeltaSystem::from_ints(&[3]).unwrap()).unwrap();
        // α + 1/α = 3: α = (3 ± √5)/2
        assert_eq!(pair.plus.alpha[0].d(), &Rational::from(5));
        assert_eq!(pair.plus.mu, pair.plus.alpha[0]);
        let err = solve_system(&sys(&[r(4, 3)])).unwrap_err();
        assert_eq!(err, CsError::ComplexRoots(r(16, 9) - Rational::from(4)));
    }

    #[test]
    fn propagate_examples() {
        let s = sys(&[r(2, 1), r(11, 4), r(2, 1)]);
        assert_eq!(propagate(&qn(3, 2), &s).unwrap(), vec![qn(3, 2), qn(2, 1), qn(4, 3)]);
        let s = DeltaSystem::from_ints(&[2, 2, 2]).unwrap();
        assert_eq!(propagate(&qn(1, 1), &s).unwrap(), vec![qn(1, 1); 3]);
        // δ_0 = α_0 makes the first denominator vanish
        let err = propagate(&qn(2, 1), &s).unwrap_err();
        assert!(matches!(err, CsError::ForbiddenValue { step: 0, .. }));
    }

    #[test]
    fn irrational_solutions_satisfy_system() {
        let s = DeltaSystem::from_ints(&[3, 2, 4]).unwrap();
        let pair = solve_system(&s).unwrap();
        for sol in [&pair.plus, &pair.minus] {
            check_equations(&sol.alpha, &s).unwrap();
            assert!(!sol.alpha[0].is_rational());
            assert_eq!(sol.alpha[0].d(), &s.discriminant());
        }
        let prod = pair.plus.mu.checked_mul(&pair.minus.mu).unwrap();
        assert_eq!(prod, qn(1, 1));
    }

    #[test]
    fn chain_contributions() {
        assert_eq!(branch_contribution(&[-4]).unwrap(), r(1, 4));
        assert_eq!(branch_contribution(&[]).unwrap(), Rational::zero());
        assert_eq!(branch_contribution(&[-2, -2]).unwrap(), r(2, 3));
        assert_eq!(branch_contribution(&[-2, -1]), Err(CsError::InvalidChain(vec![-2, -1])));
    }

    #[test]
    fn build_delta_examples() {
        let cfg = CurveConfiguration::new(
            vec![CycleCurve::new(-2), CycleCurve::new(-2), CycleCurve::new(-3)],
            vec![ChainBranch::new(2, vec![-4])],
        );
        assert_eq!(build_delta(&cfg).unwrap().delta, vec![r(2, 1), r(2, 1), r(11, 4)]);

        let enoki = CurveConfiguration::new(vec![CycleCurve::new(-2); 4], vec![]);
        assert_eq!(build_delta(&enoki).unwrap().delta, vec![Rational::from(2); 4]);

        let nodal = CurveConfiguration::new(
            vec![CycleCurve::nodal(-2)],
            vec![ChainBranch::new(0, vec![-2, -2])],
        );
        assert_eq!(build_delta(&nodal).unwrap().delta, vec![r(4, 3)]);
    }

    #[test]
    fn certificates() {
        let s = sys(&[r(2, 1), r(11, 4), r(2, 1)]);
        let pair = solve_system(&s).unwrap();
        let plus = verify_negativity(&pair.plus);
        assert_eq!(plus.verdict, NegativityVerdict::AllNegativeCs);
        assert!(plus.mu_at_least_one);
        assert_eq!(plus.cs_indices[0], qn(-3, 2));
        let minus = verify_negativity(&pair.minus);
        assert_eq!(minus.verdict, NegativityVerdict::AllNegativeCs);
        assert!(!minus.mu_at_least_one);

        // δ = (1, 1): Δ = -3, no real solutions at all
        let s = DeltaSystem::from_ints(&[1, 1]).unwrap();
        assert!(matches!(solve_system(&s), Err(CsError::ComplexRoots(_))));
    }

    #[test]
    fn torsion_values() {
        assert_eq!(torsion(&[qn(3, 2), qn(2, 1), qn(4, 3)]).unwrap(), qn(4, 1));
        assert_eq!(torsion(&[qn(2, 3), qn(3, 4), qn(1, 2)]).unwrap(), qn(1, 4));
        assert_eq!(torsion(&vec![qn(1, 1); 5]).unwrap(), qn(1, 1));
    }
}
