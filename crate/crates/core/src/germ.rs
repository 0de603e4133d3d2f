//! Contracting germs `F(z,ζ) = (λzζˢ + P(ζ) + cζ^{sk/(k−1)}, ζᵏ)` in normal
//! form, their index, and the reduction to index one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact::Rational;
use crate::surface::{self, CurveConfiguration};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    #[error("invalid germ: {}", .0.join("; "))]
    InvalidGerm(Vec<String>),
    #[error("invalid reduction: {0}")]
    InvalidReduction(String),
    #[error("no value assigned to symbol {0:?}")]
    UnknownSymbol(String),
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
}

/// An exact rational or a named indeterminate such as `c3` or `lambda`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Exact(Rational),
    Symbol(String),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Exact(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Exact(r) if r.is_one())
    }

    pub fn instantiate(&self, assignment: &HashMap<String, Rational>) -> Result<Rational, GermError> {
        match self {
            Scalar::Exact(r) => Ok(r.clone()),
            Scalar::Symbol(s) => assignment
                .get(s)
                .cloned()
                .ok_or_else(|| GermError::UnknownSymbol(s.clone())),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Exact(Rational::from(v))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Symbol(s) => f.write_str(s),
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

impl FromStr for Scalar {
    type Err = GermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Ok(r) = t.parse::<Rational>() {
            return Ok(Scalar::Exact(r));
        }
        if is_identifier(t) {
            return Ok(Scalar::Symbol(t.to_string()));
        }
        Err(GermError::Parse(s.to_string()))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(i) => Ok(Scalar::from(i)),
        }
    }
}

fn zero_scalar() -> Scalar {
    Scalar::from(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Germ {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Name of the configuration this germ is declared to belong to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
    pub k: u32,
    pub s: u32,
    pub j: u32,
    pub coeffs: BTreeMap<u32, Scalar>,
    pub lambda: Scalar,
    #[serde(default = "zero_scalar")]
    pub c_extra: Scalar,
}

impl Germ {
    pub fn new(k: u32, s: u32, j: u32, coeffs: &[(u32, Scalar)], lambda: Scalar) -> Germ {
        Germ {
            name: None,
            surface: None,
            k,
            s,
            j,
            coeffs: coeffs.iter().cloned().collect(),
            lambda,
            c_extra: zero_scalar(),
        }
    }

    /// Exponents `p` with `c_p ≠ 0`; symbolic coefficients count as nonzero.
    pub fn support(&self) -> Vec<u32> {
        self.coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(&p, _)| p)
            .collect()
    }

    /// Exponent of the `c` term, when `(k−1) | sk`.
    pub fn extra_exponent(&self) -> Option<u32> {
        let num = u64::from(self.s) * u64::from(self.k);
        let den = u64::from(self.k).checked_sub(1)?;
        (den > 0 && num % den == 0).then(|| (num / den) as u32)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.k < 2 {
            v.push(format!("k = {} must exceed 1", self.k));
        }
        if self.s == 0 {
            v.push("s must be positive".into());
        }
        if self.j == 0 || self.j >= self.k {
            v.push(format!("j = {} must satisfy 0 < j < k = {}", self.j, self.k));
        }
        if self.j > self.s {
            v.push(format!("j = {} exceeds s = {}", self.j, self.s));
        }
        for &p in self.coeffs.keys() {
            if p < self.j || p > self.s {
                v.push(format!("coefficient c_{p} lies outside [j, s] = [{}, {}]", self.j, self.s));
            }
        }
        match self.coeffs.get(&self.j) {
            Some(c) if c.is_one() => {}
            Some(c) => v.push(format!("c_{} = {c} must be 1", self.j)),
            None => v.push(format!("c_{} is missing", self.j)),
        }
        if self.lambda.is_zero() {
            v.push("lambda must be nonzero".into());
        }
        match &self.c_extra {
            Scalar::Symbol(s) => v.push(format!("c_extra must be exact, got symbol {s}")),
            c if !c.is_zero() && (self.extra_exponent().is_none() || !self.lambda.is_one()) => {
                v.push(format!("c_extra = {c} must be 0 unless (k-1) | sk and lambda = 1"))
            }
            _ => {}
        }
        let g = self
            .support()
            .into_iter()
            .fold(self.k, |acc, p| acc.gcd(&p));
        if g != 1 {
            v.push(format!("gcd of k and the support of P is {g}, not 1"));
        }
        v
    }

    pub fn validate(&self) -> Result<(), GermError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(GermError::InvalidGerm(v))
        }
    }

    /// `m = (k−1)/gcd(k−1, s)`.
    pub fn index_m(&self) -> u32 {
        let km1 = self.k.saturating_sub(1);
        if km1 == 0 {
            return 1;
        }
        km1 / km1.gcd(&self.s)
    }

    /// The reduced germ `(s′, j′, P′)` for a divisor `q` of `k−1` with `(k−1) | qs`.
    pub fn reduce(&self, q: u32) -> Result<Germ, GermError> {
        self.validate()?;
        let km1 = self.k - 1;
        if q == 0 || !km1.is_multiple_of(q) {
            return Err(GermError::InvalidReduction(format!("q = {q} does not divide k-1 = {km1}")));
        }
        if (u64::from(q) * u64::from(self.s)) % u64::from(km1) != 0 {
            return Err(GermError::InvalidReduction(format!(
                "k-1 = {km1} does not divide q*s = {}",
                q * self.s
            )));
        }
        let r = q * self.j / self.k;
        let shift = r * self.k;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&p, c)| (q * p - shift, c.clone()))
            .collect();
        Ok(Germ {
            name: self.name.as_ref().map(|n| format!("{n}_reduced")),
            surface: None,
            k: self.k,
            s: q * self.s - r * km1,
            j: q * self.j - shift,
            coeffs,
            lambda: self.lambda.clone(),
            c_extra: self.c_extra.clone(),
        })
    }

    /// `r′ = ⌊qj/k⌋`.
    pub fn reduction_shift(&self, q: u32) -> u32 {
        q * self.j / self.k.max(1)
    }

    /// `P(ζ)` rendered as text, for example `ζ^2 + c3·ζ^3`.
    pub fn p_string(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(p, c)| {
                let mono = if *p == 1 { "ζ".to_string() } else { format!("ζ^{p}") };
                if c.is_one() {
                    mono
                } else {
                    format!("{c}·{mono}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub q: u32,
    pub r: u32,
    pub reduced: Germ,
    pub p_reduced: String,
    pub preserves_k: bool,
    pub index_before: u32,
    pub index_after: u32,
    /// Only meaningful when `q` is the index.
    pub index_one: Option<bool>,
    pub exponents_in_range: bool,
    pub leading_maps_to_j: bool,
    pub violations: Vec<String>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.preserves_k
            && self.index_one != Some(false)
            && self.exponents_in_range
            && self.leading_maps_to_j
            && self.violations.is_empty()
    }
}

pub fn reduction_report(germ: &Germ, q: u32) -> Result<ReductionReport, GermError> {
    let reduced = germ.reduce(q)?;
    let exponents_in_range = reduced.coeffs.keys().all(|&e| reduced.j <= e && e <= reduced.s);
    let leading_maps_to_j = reduced.coeffs.get(&reduced.j).is_some_and(Scalar::is_one);
    Ok(ReductionReport {
        q,
        r: germ.reduction_shift(q),
        p_reduced: reduced.p_string(),
        preserves_k: reduced.k == germ.k,
        index_before: germ.index_m(),
        index_after: reduced.index_m(),
        index_one: (q == germ.index_m()).then(|| reduced.index_m() == 1),
        exponents_in_range,
        leading_maps_to_j,
        violations: reduced.violations(),
        reduced,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantCheck {
    pub configuration: surface::Stage<String>,
    pub germ: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub configuration: Option<String>,
    pub germ: Option<String>,
    /// True only when the germ names this configuration as its surface.
    pub declared_pair: bool,
    pub cross_pairing: bool,
    pub k: InvariantCheck,
    pub m: InvariantCheck,
    pub passed: bool,
}

/// Compares `k` and `m` computed from a configuration and from a germ.
pub fn cross_check(config: &CurveConfiguration, germ: &Germ) -> ConsistencyReport {
    let k_cfg = surface::intersection_matrix(config)
        .and_then(|d| surface::torsion_k(&d.matrix))
        .map(|k| k.to_string());
    let m_cfg = surface::anticanonical(config).map(|a| a.m.to_string());
    let k_germ = germ.k.to_string();
    let m_germ = germ.index_m().to_string();
    let k = InvariantCheck {
        passed: k_cfg.as_ref() == Ok(&k_germ),
        configuration: surface::Stage::from_result(k_cfg),
        germ: k_germ,
    };
    let m = InvariantCheck {
        passed: m_cfg.as_ref() == Ok(&m_germ),
        configuration: surface::Stage::from_result(m_cfg),
        germ: m_germ,
    };
    let declared_pair = matches!((&germ.surface, &config.name), (Some(a), Some(b)) if a == b);
    ConsistencyReport {
        configuration: config.name.clone(),
        germ: germ.name.clone(),
        declared_pair,
        cross_pairing: !declared_pair,
        passed: k.passed && m.passed,
        k,
        m,
    }
}

/// `[α₁+1, 2^{α₁−2}, 2^{s−j+1}]`, the sequence of a single tree.
pub fn bracket_single(alpha1: u32, s: u32, j: u32) -> Option<Vec<u32>> {
    let mut out = vec![alpha1 + 1];
    out.extend(std::iter::repeat_n(2, alpha1.checked_sub(2)? as usize));
    out.extend(std::iter::repeat_n(2, (s.checked_sub(j)? + 1) as usize));
    Some(out)
}

/// `[α₁+2, 2^{α₁−1}, α₂+1, 2^{α₂−2}, 2^{s−j+1}]`.
pub fn bracket_double(alpha1: u32, alpha2: u32, s: u32, j: u32) -> Option<Vec<u32>> {
    let mut out = vec![alpha1 + 2];
    out.extend(std::iter::repeat_n(2, alpha1.checked_sub(1)? as usize));
    out.push(alpha2 + 1);
    out.extend(std::iter::repeat_n(2, alpha2.checked_sub(2)? as usize));
    out.extend(std::iter::repeat_n(2, (s.checked_sub(j)? + 1) as usize));
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{Branch, CycleCurve};

    fn sym(s: &str) -> Scalar {
        Scalar::Symbol(s.into())
    }

    fn ex1() -> Germ {
        Germ::new(3, 1, 1, &[(1, 1.into())], sym("lambda"))
    }

    fn ex2() -> Germ {
        Germ::new(3, 3, 2, &[(2, 1.into()), (3, sym("c3"))], sym("lambda"))
    }

    #[test]
    fn validation() {
        assert!(ex1().validate().is_ok());
        assert!(ex2().validate().is_ok());
        let bad = Germ::new(4, 2, 2, &[(2, 1.into())], 1.into());
        match bad.validate() {
            Err(GermError::InvalidGerm(v)) => assert!(v.iter().any(|s| s.contains("gcd"))),
            other => panic!("{other:?}"),
        }
        let mut no_lead = ex2();
        no_lead.coeffs.insert(2, 3.into());
        assert!(no_lead.validate().is_err());
        let mut extra = ex1();
        extra.c_extra = 1.into();
        assert!(extra.validate().is_err());
    }

    #[test]
    fn index_values() {
        assert_eq!(ex1().index_m(), 2);
        assert_eq!(ex2().index_m(), 2);
        assert_eq!(Germ::new(3, 2, 1, &[(1, 1.into())], 1.into()).index_m(), 1);
    }

    #[test]
    fn reduce_examples() {
        let r1 = ex1().reduce(2).unwrap();
        assert_eq!((r1.k, r1.s, r1.j), (3, 2, 2));
        assert_eq!(r1.p_string(), "ζ^2");
        let r2 = ex2().reduce(2).unwrap();
        assert_eq!(ex2().reduction_shift(2), 1);
        assert_eq!((r2.k, r2.s, r2.j), (3, 4, 1));
        assert_eq!(r2.p_string(), "ζ + c3·ζ^3");
        assert_eq!(r2.index_m(), 1);
        assert!(matches!(ex1().reduce(3), Err(GermError::InvalidReduction(_))));
        let same = r2.reduce(1).unwrap();
        assert_eq!((same.s, same.j, &same.coeffs), (r2.s, r2.j, &r2.coeffs));
        assert!(matches!(ex2().reduce(1), Err(GermError::InvalidReduction(_))));
    }

    #[test]
    fn report_checks() {
        let rep = reduction_report(&ex2(), 2).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.index_one, Some(true));
        assert_eq!(rep.r, 1);
    }

    #[test]
    fn serde_schema() {
        let g: Germ = serde_json::from_str(
            r#"{"k":3,"s":3,"j":2,"coeffs":{"2":"1","3":"c3"},"lambda":"lambda","c_extra":"0"}"#,
        )
        .unwrap();
        assert_eq!(g, ex2());
        let back: Germ = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Germ>(r#"{"k":3,"s":3,"j":2,"coeffs":{"2":"1 +"},"lambda":"1"}"#).is_err());
    }

    #[test]
    fn brackets() {
        assert_eq!(bracket_single(3, 1, 1), Some(vec![4, 2, 2]));
        assert_eq!(bracket_double(1, 2, 3, 2), Some(vec![3, 3, 2, 2]));
    }

    #[test]
    fn cross_check_pairs() {
        let mut cfg = CurveConfiguration::new(
            vec![CycleCurve::nodal(-2)],
            vec![Branch::new(0, vec![-2, -2])],
        );
        cfg.name = Some("app_ex1".into());
        let mut g = ex1();
        g.surface = Some("app_ex1".into());
        let rep = cross_check(&cfg, &g);
        assert!(rep.passed && rep.declared_pair && !rep.cross_pairing);
        let rep = cross_check(&cfg, &ex2());
        assert!(rep.m.passed && rep.cross_pairing);
    }
}
