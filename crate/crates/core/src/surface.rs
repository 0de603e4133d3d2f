//! Curve configurations: a cycle of rational curves with chains attached.
//!
//! Computes the opposite intersection matrix `M(S)`, its determinant, the
//! torsion `k = √det M + 1`, the numerically anticanonical divisor and the
//! index `m`, and runs the full analysis pipeline.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::cs_solver::{self, Certificate, QuadraticEquation, SolutionPair};
use crate::exact::{is_perfect_square, QuadraticNumber, Rational};

/// Largest multiset accepted by [`search_configurations`].
pub const SEARCH_SIZE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("determinant {0} is not a perfect square")]
    NotPerfectSquare(BigInt),
    #[error("intersection matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square")]
    NotSquare,
    #[error("search size {0} exceeds the cap {SEARCH_SIZE_CAP}")]
    SizeCapExceeded(usize),
    #[error("unknown curve label {0:?}")]
    UnknownLabel(String),
}

pub(crate) fn bigint_str<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleCurve {
    #[serde(rename = "self")]
    pub self_intersection: i64,
    #[serde(default)]
    pub node: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl CycleCurve {
    pub fn new(self_intersection: i64) -> Self {
        CycleCurve {
            self_intersection,
            node: 0,
            label: None,
        }
    }

    pub fn nodal(self_intersection: i64) -> Self {
        CycleCurve {
            node: 1,
            ..Self::new(self_intersection)
        }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }
}

/// A chain attached to cycle curve `attach`, listed from its top `C_0` to the
/// curve `C_{k−1}` that meets the cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub attach: usize,
    pub chain: Vec<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl Branch {
    pub fn new(attach: usize, chain: Vec<i64>) -> Self {
        Branch {
            attach,
            chain,
            labels: Vec::new(),
        }
    }

    pub fn labeled(mut self, labels: &[&str]) -> Self {
        self.labels = labels.iter().map(|s| s.to_string()).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveConfiguration {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub cycle: Vec<CycleCurve>,
    #[serde(default)]
    pub branches: Vec<Branch>,
}

impl CurveConfiguration {
    pub fn new(cycle: Vec<CycleCurve>, branches: Vec<Branch>) -> Self {
        CurveConfiguration {
            name: None,
            cycle,
            branches,
        }
    }

    pub fn p(&self) -> usize {
        self.cycle.len()
    }

    pub fn curve_count(&self) -> usize {
        self.cycle.len() + self.branches.iter().map(|b| b.chain.len()).sum::<usize>()
    }

    pub fn validate(&self) -> Result<(), SurfaceError> {
        let bad = |msg: String| Err(SurfaceError::InvalidConfiguration(msg));
        let p = self.p();
        if p == 0 {
            return bad("cycle is empty".into());
        }
        for (i, c) in self.cycle.iter().enumerate() {
            if c.self_intersection > -2 {
                return bad(format!("cycle curve {i} has self-intersection {} > -2", c.self_intersection));
            }
            if c.node > 1 {
                return bad(format!("cycle curve {i} has node count {}", c.node));
            }
            if c.node == 1 && p != 1 {
                return bad("a nodal curve is only allowed in a cycle of length 1".into());
            }
        }
        let mut seen = HashSet::new();
        for (b, br) in self.branches.iter().enumerate() {
            if br.attach >= p {
                return bad(format!("branch {b} attaches to {} outside the cycle", br.attach));
            }
            if !seen.insert(br.attach) {
                return bad(format!("cycle curve {} carries more than one branch", br.attach));
            }
            if br.chain.is_empty() {
                return bad(format!("branch {b} is empty"));
            }
            if let Some(c) = br.chain.iter().find(|&&c| c > -2) {
                return bad(format!("branch {b} has self-intersection {c} > -2"));
            }
            if !br.labels.is_empty() && br.labels.len() != br.chain.len() {
                return bad(format!("branch {b} has {} labels for {} curves", br.labels.len(), br.chain.len()));
            }
        }
        Ok(())
    }

    /// Curve names in matrix row order: cycle first, then branches in order.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .cycle
            .iter()
            .enumerate()
            .map(|(i, c)| c.label.clone().unwrap_or_else(|| format!("D{i}")))
            .collect();
        for (b, br) in self.branches.iter().enumerate() {
            for i in 0..br.chain.len() {
                out.push(br.labels.get(i).cloned().unwrap_or_else(|| format!("B{b}.{i}")));
            }
        }
        out
    }

    /// `(self-intersection, node count)` per curve in row order.
    fn curves(&self) -> Vec<(i64, u8)> {
        let mut out: Vec<(i64, u8)> = self.cycle.iter().map(|c| (c.self_intersection, c.node)).collect();
        for br in &self.branches {
            out.extend(br.chain.iter().map(|&c| (c, 0)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionData {
    pub matrix: Vec<Vec<i64>>,
    pub labels: Vec<String>,
}

impl IntersectionData {
    /// The matrix with rows and columns reordered to `order` (a permutation of the labels).
    pub fn permuted(&self, order: &[&str]) -> Result<IntersectionData, SurfaceError> {
        let idx: Vec<usize> = order
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| SurfaceError::UnknownLabel(l.to_string()))
            })
            .collect::<Result<_, _>>()?;
        if idx.len() != self.labels.len() {
            return Err(SurfaceError::InvalidConfiguration("label order has the wrong length".into()));
        }
        let matrix = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.matrix[i][j]).collect())
            .collect();
        Ok(IntersectionData {
            matrix,
            labels: order.iter().map(|s| s.to_string()).collect(),
        })
    }
}

/// The opposite intersection matrix, rows ordered cycle first then branch curves.
pub fn intersection_matrix(config: &CurveConfiguration) -> Result<IntersectionData, SurfaceError> {
    config.validate()?;
    let n = config.curve_count();
    let p = config.p();
    let mut m = vec![vec![0i64; n]; n];
    for (i, (s, _)) in config.curves().iter().enumerate() {
        m[i][i] = -s;
    }
    match p {
        1 => {}
        2 => {
            m[0][1] = -2;
            m[1][0] = -2;
        }
        _ => {
            for i in 0..p {
                let j = (i + 1) % p;
                m[i][j] = -1;
                m[j][i] = -1;
            }
        }
    }
    let mut row = p;
    for br in &config.branches {
        let k = br.chain.len();
        for i in 0..k - 1 {
            m[row + i][row + i + 1] = -1;
            m[row + i + 1][row + i] = -1;
        }
        let last = row + k - 1;
        m[last][br.attach] = -1;
        m[br.attach][last] = -1;
        row += k;
    }
    Ok(IntersectionData {
        matrix: m,
        labels: config.labels(),
    })
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(matrix: &[Vec<i64>]) -> Result<BigInt, SurfaceError> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(SurfaceError::NotSquare);
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// `k = √det + 1`.
pub fn torsion_from_det(det: &BigInt) -> Result<BigInt, SurfaceError> {
    is_perfect_square(det)
        .map(|r| r + 1)
        .ok_or_else(|| SurfaceError::NotPerfectSquare(det.clone()))
}

pub fn torsion_k(matrix: &[Vec<i64>]) -> Result<BigInt, SurfaceError> {
    torsion_from_det(&determinant(matrix)?)
}

/// Solves `M·x = b` over the rationals; `None` if `M` is singular.
pub fn solve_rational(matrix: &[Vec<i64>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = matrix.len();
    let mut a: Vec<Vec<Rational>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r: Vec<Rational> = row.iter().map(|&v| Rational::from(v)).collect();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip().ok()?;
        for j in col..=n {
            a[col][j] = &a[col][j] * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=n {
                    let v = &a[r][j] - &f * &a[col][j];
                    a[r][j] = v;
                }
            }
        }
    }
    Some(a.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnticanonicalResult {
    /// Coefficients of `D_{−K}` in row order.
    pub lambda: Vec<Rational>,
    pub lambda_by_label: BTreeMap<String, Rational>,
    #[serde(serialize_with = "bigint_str")]
    pub m: BigInt,
    /// `√det + 1`, absent when the determinant is not a perfect square.
    #[serde(serialize_with = "opt_bigint_str")]
    pub k: Option<BigInt>,
}

fn opt_bigint_str<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

/// Adjunction right-hand side `b_j = −D_j² − 2 + 2·nodes(D_j)`.
pub fn adjunction_rhs(config: &CurveConfiguration) -> Vec<Rational> {
    config
        .curves()
        .iter()
        .map(|&(s, node)| Rational::from(-s - 2 + 2 * i64::from(node)))
        .collect()
}

/// Least `m ≥ 1` with `m·λ` integral.
pub fn index_of(lambda: &[Rational]) -> BigInt {
    lambda.iter().fold(BigInt::one(), |acc, l| acc.lcm(l.denom()))
}

/// Solves `M·λ = b` for the numerically anticanonical divisor.
pub fn anticanonical(config: &CurveConfiguration) -> Result<AnticanonicalResult, SurfaceError> {
    let data = intersection_matrix(config)?;
    let b = adjunction_rhs(config);
    let lambda = solve_rational(&data.matrix, &b).ok_or(SurfaceError::SingularMatrix)?;
    debug_assert!(residual_is_zero(&data.matrix, &lambda, &b));
    let det = determinant(&data.matrix)?;
    Ok(AnticanonicalResult {
        m: index_of(&lambda),
        k: torsion_from_det(&det).ok(),
        lambda_by_label: data.labels.iter().cloned().zip(lambda.iter().cloned()).collect(),
        lambda,
    })
}

/// `M·λ − b = 0` exactly.
pub fn residual_is_zero(matrix: &[Vec<i64>], lambda: &[Rational], b: &[Rational]) -> bool {
    matrix.iter().zip(b).all(|(row, bi)| {
        let s: Rational = row
            .iter()
            .zip(lambda)
            .map(|(&m, l)| Rational::from(m) * l)
            .sum();
        &s == bi
    })
}

/// Either a stage's value or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage<T> {
    Value(T),
    Error(StageError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageError {
    pub kind: String,
    pub message: String,
}

impl<T> Stage<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Stage::Value(v) => Some(v),
            Stage::Error(_) => None,
        }
    }

    pub fn from_result<E: std::fmt::Display + std::fmt::Debug>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Stage::Value(v),
            Err(e) => {
                let dbg = format!("{e:?}");
                let kind = dbg
                    .split(|c: char| !c.is_alphanumeric())
                    .find(|s| !s.is_empty())
                    .unwrap_or("Error")
                    .to_string();
                let kind = match kind.as_str() {
                    "Surface" | "Exact" => dbg
                        .split(|c: char| !c.is_alphanumeric())
                        .filter(|s| !s.is_empty())
                        .nth(1)
                        .unwrap_or("Error")
                        .to_string(),
                    _ => kind,
                };
                Stage::Error(StageError {
                    kind,
                    message: e.to_string(),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificates {
    pub plus: Certificate,
    pub minus: Certificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuComparison {
    pub mu_plus: QuadraticNumber,
    #[serde(serialize_with = "bigint_str")]
    pub k: BigInt,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<i64>>,
    #[serde(serialize_with = "bigint_str")]
    pub det: BigInt,
    pub k: Stage<String>,
    pub anticanonical: Stage<AnticanonicalResult>,
    pub delta: Stage<Vec<Rational>>,
    pub equations: Stage<Vec<QuadraticEquation>>,
    pub solutions: Stage<SolutionPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Certificates>,
    /// `μ⁺` against `k`; reported only, never asserted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_vs_k: Option<MuComparison>,
}

/// Runs every stage; per-stage failures are embedded in the report.
pub fn analyze(config: &CurveConfiguration) -> Result<AnalysisReport, SurfaceError> {
    let data = intersection_matrix(config)?;
    let det = determinant(&data.matrix)?;
    let k = torsion_from_det(&det);
    let anticanonical = Stage::from_result(anticanonical(config));
    let system = cs_solver::build_delta(config);
    let delta = Stage::from_result(system.as_ref().map(|s| s.delta.clone()).map_err(Clone::clone));
    let equations = Stage::from_result(
        system
            .clone()
            .and_then(|s| cs_solver::all_coefficients(&s)),
    );
    let solutions = Stage::from_result(system.and_then(|s| cs_solver::solve_system(&s)));

    let certificates = solutions.value().map(|pair: &SolutionPair| Certificates {
        plus: cs_solver::verify_negativity(&pair.plus),
        minus: cs_solver::verify_negativity(&pair.minus),
    });
    let mu_vs_k = match (solutions.value(), &k) {
        (Some(pair), Ok(k)) => Some(MuComparison {
            mu_plus: pair.plus.mu.clone(),
            k: k.clone(),
            equal: pair.plus.mu == QuadraticNumber::from(Rational::from(k.clone())),
        }),
        _ => None,
    };
    Ok(AnalysisReport {
        name: config.name.clone(),
        labels: data.labels,
        matrix: data.matrix,
        det,
        k: Stage::from_result(k.map(|k| k.to_string())),
        anticanonical,
        delta,
        equations,
        solutions,
        certificates,
        mu_vs_k,
    })
}

/// A configuration found by [`search_configurations`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchMatch {
    pub configuration: CurveConfiguration,
    #[serde(serialize_with = "bigint_str")]
    pub det: BigInt,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Rational>>,
    #[serde(serialize_with = "opt_bigint_str")]
    pub m: Option<BigInt>,
}

pub type CanonicalKey = Vec<(i64, u8, Vec<i64>)>;

/// Key identifying a configuration up to rotation and reflection of its cycle.
pub fn canonical_key(config: &CurveConfiguration) -> CanonicalKey {
    let p = config.p();
    let mut at: Vec<Vec<i64>> = vec![Vec::new(); p];
    for br in &config.branches {
        at[br.attach] = br.chain.clone();
    }
    let base: Vec<(i64, u8, Vec<i64>)> = (0..p)
        .map(|i| (config.cycle[i].self_intersection, config.cycle[i].node, at[i].clone()))
        .collect();
    let mut best: Option<CanonicalKey> = None;
    for reflect in [false, true] {
        for r in 0..p {
            let key: CanonicalKey = (0..p)
                .map(|i| {
                    let idx = if reflect { (r + p - i) % p } else { (r + i) % p };
                    base[idx].clone()
                })
                .collect();
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    best.unwrap_or_default()
}

fn is_minimal_necklace(seq: &[i64]) -> bool {
    let p = seq.len();
    for reflect in [false, true] {
        for r in 0..p {
            let rot = (0..p).map(|i| {
                let idx = if reflect { (r + p - i) % p } else { (r + i) % p };
                seq[idx]
            });
            if rot.lt(seq.iter().copied()) {
                return false;
            }
        }
    }
    true
}

fn next_permutation(v: &mut [i64]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Increasing `k`-subsets of `0..n`.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Every cycle-plus-chains structure on the multiset, up to rotation and
/// reflection of the cycle. A cycle of length one is taken to be nodal.
pub fn enumerate_configurations(self_ints: &[i64]) -> Result<Vec<CurveConfiguration>, SurfaceError> {
    let n = self_ints.len();
    if n > SEARCH_SIZE_CAP {
        return Err(SurfaceError::SizeCapExceeded(n));
    }
    if n == 0 || self_ints.iter().any(|&s| s > -2) {
        return Err(SurfaceError::InvalidConfiguration(
            "search needs a non-empty multiset of self-intersections <= -2".into(),
        ));
    }
    let mut perm = self_ints.to_vec();
    perm.sort_unstable();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    loop {
        for p in 1..=n {
            let cycle_seq = &perm[..p];
            if !is_minimal_necklace(cycle_seq) {
                continue;
            }
            let cycle: Vec<CycleCurve> = cycle_seq
                .iter()
                .map(|&s| if p == 1 { CycleCurve::nodal(s) } else { CycleCurve::new(s) })
                .collect();
            let rest = &perm[p..];
            let m = rest.len();
            let mut candidates = Vec::new();
            if m == 0 {
                candidates.push(CurveConfiguration::new(cycle.clone(), vec![]));
            }
            for blocks in 1..=m.min(p) {
                // cut points split `rest` into `blocks` consecutive chains
                for cuts in subsets(m.saturating_sub(1), blocks - 1) {
                    let mut bounds = vec![0];
                    bounds.extend(cuts.iter().map(|c| c + 1));
                    bounds.push(m);
                    for attach in subsets(p, blocks) {
                        let branches = attach
                            .iter()
                            .enumerate()
                            .map(|(b, &a)| Branch::new(a, rest[bounds[b]..bounds[b + 1]].to_vec()))
                            .collect();
                        candidates.push(CurveConfiguration::new(cycle.clone(), branches));
                    }
                }
            }
            for c in candidates {
                if seen.insert(canonical_key(&c)) {
                    out.push(c);
                }
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

/// Configurations on the multiset matching the requested determinant and/or
/// multiset of anticanonical coefficients.
pub fn search_configurations(
    self_ints: &[i64],
    det: Option<&BigInt>,
    anticanonical_multiset: Option<&[Rational]>,
) -> Result<Vec<SearchMatch>, SurfaceError> {
    let mut target = anticanonical_multiset.map(|a| a.to_vec());
    if let Some(t) = target.as_mut() {
        t.sort();
    }
    let mut out = Vec::new();
    for config in enumerate_configurations(self_ints)? {
        let data = intersection_matrix(&config)?;
        let d = determinant(&data.matrix)?;
        if det.is_some_and(|want| *want != d) {
            continue;
        }
        let lambda = solve_rational(&data.matrix, &adjunction_rhs(&config));
        if let Some(t) = &target {
            let Some(l) = &lambda else { continue };
            let mut sorted = l.clone();
            sorted.sort();
            if &sorted != t {
                continue;
            }
        }
        out.push(SearchMatch {
            configuration: config,
            det: d,
            m: lambda.as_deref().map(index_of),
            lambda,
        });
    }
    Ok(out)
}
