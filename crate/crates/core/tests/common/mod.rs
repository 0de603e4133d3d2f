#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use viikit::surface::{Branch, CurveConfiguration, CycleCurve};
use viikit::{QuadraticNumber, Rational};

pub fn q(n: i64, d: i64) -> QuadraticNumber {
    QuadraticNumber::from(Rational::frac(n, d))
}

pub fn rats(v: &[(i64, i64)]) -> Vec<Rational> {
    v.iter().map(|&(n, d)| Rational::frac(n, d)).collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<i64>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0] as i128,
        n => (0..n)
            .filter(|&j| m[0][j] != 0)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| (0..n).filter(|&c| c != j).map(|c| r[c]).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] as i128 * cofactor_det(&minor)
            })
            .sum(),
    }
}

/// Solves the cyclic system by composing `α ↦ 1/(δ − α)` around the cycle and
/// taking the fixed points of the resulting Möbius map.
pub fn mobius_solutions(delta: &[Rational]) -> Option<Vec<Vec<QuadraticNumber>>> {
    let one = Rational::one();
    let zero = Rational::zero();
    // [[a, b], [c, d]] acts as x ↦ (a x + b)/(c x + d)
    let mut m = [one.clone(), zero.clone(), zero.clone(), one.clone()];
    for di in delta {
        let step = [zero.clone(), one.clone(), -one.clone(), di.clone()];
        m = [
            &step[0] * &m[0] + &step[1] * &m[2],
            &step[0] * &m[1] + &step[1] * &m[3],
            &step[2] * &m[0] + &step[3] * &m[2],
            &step[2] * &m[1] + &step[3] * &m[3],
        ];
    }
    let [a, b, c, d] = m;
    // c x² + (d − a) x − b = 0
    if c.is_zero() {
        return None;
    }
    let lin = &d - &a;
    let disc = lin.square() + Rational::from(4) * &c * &b;
    if disc.is_negative() {
        return None;
    }
    let two_c = Rational::from(2) * &c;
    let center = -(lin / &two_c);
    let half = two_c.recip().ok()?;
    let mut out = Vec::new();
    for sign in [1i64, -1] {
        let x0 = QuadraticNumber::new(center.clone(), &half * &Rational::from(sign), disc.clone()).ok()?;
        let mut alpha = vec![x0];
        for di in &delta[..delta.len() - 1] {
            let den = QuadraticNumber::from(di.clone()).checked_sub(alpha.last().unwrap()).ok()?;
            alpha.push(den.recip().ok()?);
        }
        out.push(alpha);
    }
    Some(out)
}

/// Cycle of length 2..=8 with up to three chains of length ≤ 3, self-intersections
/// in [−6, −2], chains attached only to cycle curves of self-intersection ≤ −3.
pub fn random_configuration(rng: &mut ChaCha8Rng) -> CurveConfiguration {
    let p = rng.gen_range(2..=8);
    let cycle: Vec<CycleCurve> = (0..p).map(|_| CycleCurve::new(rng.gen_range(-6..=-2))).collect();
    let mut hosts: Vec<usize> = (0..p).filter(|&i| cycle[i].self_intersection <= -3).collect();
    let count = rng.gen_range(0..=3usize).min(hosts.len());
    let mut branches = Vec::new();
    for _ in 0..count {
        let host = hosts.remove(rng.gen_range(0..hosts.len()));
        let len = rng.gen_range(1..=3);
        branches.push(Branch::new(host, (0..len).map(|_| rng.gen_range(-6..=-2)).collect()));
    }
    branches.sort_by_key(|b| b.attach);
    CurveConfiguration::new(cycle, branches)
}

/// All −2 cycles without chains, `δ = (2, …, 2)`.
pub fn control_configurations() -> Vec<CurveConfiguration> {
    (2..=8)
        .map(|p| CurveConfiguration::new(vec![CycleCurve::new(-2); p], vec![]))
        .collect()
}
