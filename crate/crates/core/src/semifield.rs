//! Semifields: positive rationals/reals and the max-plus tropical semifields.
//!
//! Tropical elements are stored additively: `a ⊕ b = max(a, b)`, `a ⊗ b = a + b`,
//! and the multiplicative identity is `0`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemifieldTag {
    PosRat,
    PosFloat,
    TropQ,
    TropZ,
    TropR,
}

impl SemifieldTag {
    pub fn is_tropical(self) -> bool {
        matches!(self, SemifieldTag::TropQ | SemifieldTag::TropZ | SemifieldTag::TropR)
    }

    pub fn name(self) -> &'static str {
        match self {
            SemifieldTag::PosRat => "posRat",
            SemifieldTag::PosFloat => "posFloat",
            SemifieldTag::TropQ => "tropQ",
            SemifieldTag::TropZ => "tropZ",
            SemifieldTag::TropR => "tropR",
        }
    }
}

impl std::str::FromStr for SemifieldTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "posrat" => Ok(SemifieldTag::PosRat),
            "posfloat" => Ok(SemifieldTag::PosFloat),
            "tropq" => Ok(SemifieldTag::TropQ),
            "tropz" => Ok(SemifieldTag::TropZ),
            "tropr" => Ok(SemifieldTag::TropR),
            _ => Err(Error::Parse(format!("unknown semifield {s}"))),
        }
    }
}

pub trait Semifield: Clone + fmt::Debug + 'static {
    type Elem: Clone + fmt::Debug + PartialEq;
    const TAG: SemifieldTag;

    fn one() -> Self::Elem;
    fn add(a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(a: &Self::Elem) -> Self::Elem;
    fn pow(a: &Self::Elem, n: i64) -> Self::Elem;
    /// Image of a positive rational constant (tropical: the identity).
    fn constant(q: &BigRational) -> Self::Elem;
    /// Square root when it exists inside the semifield.
    fn sqrt(a: &Self::Elem) -> Option<Self::Elem>;
    /// Interprets a rational as an element: a positive value, or a tropical coordinate.
    fn from_rational(q: &BigRational) -> Result<Self::Elem>;
    fn to_rational(a: &Self::Elem) -> Option<BigRational>;
    fn to_f64(a: &Self::Elem) -> f64;
    /// Scaling by `u`: multiplication for tropical tags, the power `a^u` otherwise.
    fn scale(a: &Self::Elem, u: &BigRational) -> Result<Self::Elem>;

    fn div(a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        Self::mul(a, &Self::inv(b))
    }

    fn is_one(a: &Self::Elem) -> bool {
        *a == Self::one()
    }

    fn format(a: &Self::Elem) -> String {
        match Self::to_rational(a) {
            Some(q) => fmt_rat(&q),
            None => format!("{}", Self::to_f64(a)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PosRat;
#[derive(Clone, Debug)]
pub struct PosFloat;
#[derive(Clone, Debug)]
pub struct TropQ;
#[derive(Clone, Debug)]
pub struct TropZ;
#[derive(Clone, Debug)]
pub struct TropR;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rationals are written `p/q`, integers without a denominator.
pub fn fmt_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else if let Some((a, b)) = s.split_once('.') {
        let digits = b.len() as u32;
        let whole: BigInt = format!("{a}{b}").parse().map_err(|_| bad())?;
        Ok(BigRational::new(whole, BigInt::from(10u32).pow(digits)))
    } else {
        Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
    }
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // huge numerators or denominators
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn rat_pow(q: &BigRational, n: i64) -> BigRational {
    if n >= 0 {
        num_traits::pow(q.clone(), n as usize)
    } else {
        num_traits::pow(q.recip(), (-n) as usize)
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rat_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

impl Semifield for PosRat {
    type Elem = BigRational;
    const TAG: SemifieldTag = SemifieldTag::PosRat;
    fn one() -> BigRational {
        BigRational::one()
    }
    fn add(a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(a: &BigRational) -> BigRational {
        a.recip()
    }
    fn pow(a: &BigRational, n: i64) -> BigRational {
        rat_pow(a, n)
    }
    fn constant(q: &BigRational) -> BigRational {
        q.clone()
    }
    fn sqrt(a: &BigRational) -> Option<BigRational> {
        rat_sqrt(a)
    }
    fn from_rational(q: &BigRational) -> Result<BigRational> {
        if q.is_positive() {
            Ok(q.clone())
        } else {
            Err(Error::DomainViolation(fmt_rat(q)))
        }
    }
    fn to_rational(a: &BigRational) -> Option<BigRational> {
        Some(a.clone())
    }
    fn to_f64(a: &BigRational) -> f64 {
        rat_to_f64(a)
    }
    fn scale(a: &Self::Elem, u: &BigRational) -> Result<Self::Elem> {
        if u.is_integer() {
            Ok(Self::pow(a, u.to_integer().to_i64().ok_or_else(|| Error::NonIntegralPowerOnPositiveTag(fmt_rat(u)))?))
        } else {
            Err(Error::NonIntegralPowerOnPositiveTag(fmt_rat(u)))
        }
    }
}

impl Semifield for PosFloat {
    type Elem = f64;
    const TAG: SemifieldTag = SemifieldTag::PosFloat;
    fn one() -> f64 {
        1.0
    }
    fn add(a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn inv(a: &f64) -> f64 {
        1.0 / a
    }
    fn pow(a: &f64, n: i64) -> f64 {
        a.powi(n as i32)
    }
    fn constant(q: &BigRational) -> f64 {
        rat_to_f64(q)
    }
    fn sqrt(a: &f64) -> Option<f64> {
        Some(a.sqrt())
    }
    fn from_rational(q: &BigRational) -> Result<f64> {
        if q.is_positive() {
            Ok(rat_to_f64(q))
        } else {
            Err(Error::DomainViolation(fmt_rat(q)))
        }
    }
    fn to_rational(_: &f64) -> Option<BigRational> {
        None
    }
    fn to_f64(a: &f64) -> f64 {
        *a
    }
    fn scale(a: &Self::Elem, u: &BigRational) -> Result<Self::Elem> {
        if u.is_integer() {
            Ok(Self::pow(a, u.to_integer().to_i64().ok_or_else(|| Error::NonIntegralPowerOnPositiveTag(fmt_rat(u)))?))
        } else {
            Err(Error::NonIntegralPowerOnPositiveTag(fmt_rat(u)))
        }
    }
}

impl Semifield for TropQ {
    type Elem = BigRational;
    const TAG: SemifieldTag = SemifieldTag::TropQ;
    fn one() -> BigRational {
        BigRational::zero()
    }
    fn add(a: &BigRational, b: &BigRational) -> BigRational {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }
    fn mul(a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn inv(a: &BigRational) -> BigRational {
        -a
    }
    fn pow(a: &BigRational, n: i64) -> BigRational {
        a * BigRational::from_integer(BigInt::from(n))
    }
    fn constant(_: &BigRational) -> BigRational {
        BigRational::zero()
    }
    fn sqrt(a: &BigRational) -> Option<BigRational> {
        Some(a / BigRational::from_integer(BigInt::from(2)))
    }
    fn from_rational(q: &BigRational) -> Result<BigRational> {
        Ok(q.clone())
    }
    fn to_rational(a: &BigRational) -> Option<BigRational> {
        Some(a.clone())
    }
    fn to_f64(a: &BigRational) -> f64 {
        rat_to_f64(a)
    }
    fn scale(a: &BigRational, u: &BigRational) -> Result<BigRational> {
        Ok(a * u)
    }
}

impl Semifield for TropZ {
    type Elem = BigInt;
    const TAG: SemifieldTag = SemifieldTag::TropZ;
    fn one() -> BigInt {
        BigInt::zero()
    }
    fn add(a: &BigInt, b: &BigInt) -> BigInt {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }
    fn mul(a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn inv(a: &BigInt) -> BigInt {
        -a
    }
    fn pow(a: &BigInt, n: i64) -> BigInt {
        a * BigInt::from(n)
    }
    fn constant(_: &BigRational) -> BigInt {
        BigInt::zero()
    }
    fn sqrt(a: &BigInt) -> Option<BigInt> {
        if a.is_even() {
            Some(a / 2)
        } else {
            None
        }
    }
    fn from_rational(q: &BigRational) -> Result<BigInt> {
        if q.is_integer() {
            Ok(q.to_integer())
        } else {
            Err(Error::DomainViolation(format!("{} is not an integer", fmt_rat(q))))
        }
    }
    fn to_rational(a: &BigInt) -> Option<BigRational> {
        Some(BigRational::from_integer(a.clone()))
    }
    fn to_f64(a: &BigInt) -> f64 {
        a.to_f64().unwrap_or(f64::NAN)
    }
    fn scale(a: &BigInt, u: &BigRational) -> Result<BigInt> {
        let v = BigRational::from_integer(a.clone()) * u;
        if v.is_integer() {
            Ok(v.to_integer())
        } else {
            Err(Error::DomainViolation(format!("{} is not an integer", fmt_rat(&v))))
        }
    }
}

impl Semifield for TropR {
    type Elem = f64;
    const TAG: SemifieldTag = SemifieldTag::TropR;
    fn one() -> f64 {
        0.0
    }
    fn add(a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn inv(a: &f64) -> f64 {
        -a
    }
    fn pow(a: &f64, n: i64) -> f64 {
        a * n as f64
    }
    fn constant(_: &BigRational) -> f64 {
        0.0
    }
    fn sqrt(a: &f64) -> Option<f64> {
        Some(a / 2.0)
    }
    fn from_rational(q: &BigRational) -> Result<f64> {
        Ok(rat_to_f64(q))
    }
    fn to_rational(_: &f64) -> Option<BigRational> {
        None
    }
    fn to_f64(a: &f64) -> f64 {
        *a
    }
    fn scale(a: &f64, u: &BigRational) -> Result<f64> {
        Ok(a * rat_to_f64(u))
    }
}

/// Subtraction-free expression.
#[derive(Clone, Debug, PartialEq)]
pub enum SfExpr {
    Const(BigRational),
    Var(String),
    Sum(Vec<SfExpr>),
    Prod(Vec<SfExpr>),
    Quot(Box<SfExpr>, Box<SfExpr>),
    /// Integer power, negative allowed.
    Pow(Box<SfExpr>, i64),
    /// Power `k/2` with `k` odd.
    HalfPow(Box<SfExpr>, i64),
}

impl SfExpr {
    pub fn var(name: &str) -> SfExpr {
        SfExpr::Var(name.to_string())
    }

    pub fn size(&self) -> usize {
        match self {
            SfExpr::Const(_) | SfExpr::Var(_) => 1,
            SfExpr::Sum(v) | SfExpr::Prod(v) => 1 + v.iter().map(|e| e.size()).sum::<usize>(),
            SfExpr::Quot(a, b) => 1 + a.size() + b.size(),
            SfExpr::Pow(a, _) | SfExpr::HalfPow(a, _) => 1 + a.size(),
        }
    }

    pub fn parse(s: &str) -> Result<SfExpr> {
        let toks = tokenize(s);
        let mut pos = 0;
        let e = parse_tokens(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(Error::Parse(format!("trailing input in {s:?}")));
        }
        Ok(e)
    }
}

impl fmt::Display for SfExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, v: &[SfExpr]| -> fmt::Result {
            write!(f, "({op}")?;
            for e in v {
                write!(f, " {e}")?;
            }
            write!(f, ")")
        };
        match self {
            SfExpr::Const(q) => write!(f, "{}", fmt_rat(q)),
            SfExpr::Var(v) => write!(f, "{v}"),
            SfExpr::Sum(v) => list(f, "+", v),
            SfExpr::Prod(v) => list(f, "*", v),
            SfExpr::Quot(a, b) => write!(f, "(/ {a} {b})"),
            SfExpr::Pow(a, n) => write!(f, "(^ {a} {n})"),
            SfExpr::HalfPow(a, k) => write!(f, "(^ {a} {k}/2)"),
        }
    }
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(String::from).collect()
}

fn parse_tokens(t: &[String], pos: &mut usize) -> Result<SfExpr> {
    let tok = t.get(*pos).ok_or_else(|| Error::Parse("unexpected end".into()))?.clone();
    *pos += 1;
    if tok == ")" {
        return Err(Error::Parse("unexpected )".into()));
    }
    if tok != "(" {
        if tok.chars().next().map_or(false, |c| c.is_ascii_digit()) {
            let q = parse_rat(&tok)?;
            if !q.is_positive() {
                return Err(Error::Parse(format!("constant {tok} is not positive")));
            }
            return Ok(SfExpr::Const(q));
        }
        if tok == "-" || tok.starts_with('-') {
            return Err(Error::Parse("subtraction is not allowed".into()));
        }
        return Ok(SfExpr::Var(tok));
    }
    let op = t.get(*pos).ok_or_else(|| Error::Parse("missing operator".into()))?.clone();
    *pos += 1;
    let mut args = vec![];
    let mut raw_exp: Option<String> = None;
    while t.get(*pos).map(|s| s.as_str()) != Some(")") {
        if *pos >= t.len() {
            return Err(Error::Parse("unbalanced parentheses".into()));
        }
        if op == "^" && args.len() == 1 {
            raw_exp = Some(t[*pos].clone());
            *pos += 1;
            continue;
        }
        args.push(parse_tokens(t, pos)?);
    }
    *pos += 1;
    match op.as_str() {
        "+" if !args.is_empty() => Ok(SfExpr::Sum(args)),
        "*" if !args.is_empty() => Ok(SfExpr::Prod(args)),
        "/" if args.len() == 2 => {
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            Ok(SfExpr::Quot(Box::new(a), Box::new(b)))
        }
        "^" if args.len() == 1 => {
            let r = raw_exp.ok_or_else(|| Error::Parse("missing exponent".into()))?;
            let q = parse_rat(&r)?;
            let a = Box::new(args.pop().unwrap());
            if q.is_integer() {
                Ok(SfExpr::Pow(a, q.to_integer().to_i64().ok_or_else(|| Error::Parse(r.clone()))?))
            } else if q.denom() == &BigInt::from(2) {
                Ok(SfExpr::HalfPow(a, q.numer().to_i64().ok_or_else(|| Error::Parse(r.clone()))?))
            } else {
                Err(Error::Parse(format!("exponent {r} is not in Z/2")))
            }
        }
        _ => Err(Error::Parse(format!("bad form ({op} ...)"))),
    }
}

/// Evaluates `e` in the semifield `S`.
pub fn sf_eval<S: Semifield>(e: &SfExpr, env: &BTreeMap<String, S::Elem>) -> Result<S::Elem> {
    Ok(match e {
        SfExpr::Const(q) => S::constant(q),
        SfExpr::Var(v) => env.get(v).cloned().ok_or_else(|| Error::MissingVariable(v.clone()))?,
        SfExpr::Sum(v) => {
            let mut acc = sf_eval::<S>(&v[0], env)?;
            for x in &v[1..] {
                acc = S::add(&acc, &sf_eval::<S>(x, env)?);
            }
            acc
        }
        SfExpr::Prod(v) => {
            let mut acc = S::one();
            for x in v {
                acc = S::mul(&acc, &sf_eval::<S>(x, env)?);
            }
            acc
        }
        SfExpr::Quot(a, b) => S::div(&sf_eval::<S>(a, env)?, &sf_eval::<S>(b, env)?),
        SfExpr::Pow(a, n) => S::pow(&sf_eval::<S>(a, env)?, *n),
        SfExpr::HalfPow(a, k) => {
            let v = S::pow(&sf_eval::<S>(a, env)?, *k);
            S::sqrt(&v).ok_or_else(|| Error::NonSquareHalfPower(S::format(&v)))?
        }
    })
}

/// A value of any tag, for callers that pick the semifield at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum SfValue {
    Rat(BigRational),
    Int(BigInt),
    Float(f64),
}

impl fmt::Display for SfValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SfValue::Rat(q) => write!(f, "{}", fmt_rat(q)),
            SfValue::Int(n) => write!(f, "{n}"),
            SfValue::Float(x) => write!(f, "{x}"),
        }
    }
}

fn env_as<S: Semifield>(env: &BTreeMap<String, BigRational>) -> Result<BTreeMap<String, S::Elem>> {
    env.iter().map(|(k, v)| Ok((k.clone(), S::from_rational(v)?))).collect()
}

/// `sf_eval` with the tag chosen at run time and a rational environment.
pub fn sf_eval_tag(e: &SfExpr, env: &BTreeMap<String, BigRational>, tag: SemifieldTag) -> Result<SfValue> {
    Ok(match tag {
        SemifieldTag::PosRat => SfValue::Rat(sf_eval::<PosRat>(e, &env_as::<PosRat>(env)?)?),
        SemifieldTag::TropQ => SfValue::Rat(sf_eval::<TropQ>(e, &env_as::<TropQ>(env)?)?),
        SemifieldTag::TropZ => SfValue::Int(sf_eval::<TropZ>(e, &env_as::<TropZ>(env)?)?),
        SemifieldTag::PosFloat => SfValue::Float(sf_eval::<PosFloat>(e, &env_as::<PosFloat>(env)?)?),
        SemifieldTag::TropR => SfValue::Float(sf_eval::<TropR>(e, &env_as::<TropR>(env)?)?),
    })
}

/// `ε log f(e^{a/ε})` for each `ε`, computed in the log domain.
pub fn tropical_limit_probe(e: &SfExpr, env: &BTreeMap<String, BigRational>, eps_list: &[f64]) -> Result<Vec<f64>> {
    fn go(e: &SfExpr, env: &BTreeMap<String, f64>, eps: f64) -> Result<f64> {
        Ok(match e {
            SfExpr::Const(q) => eps * rat_to_f64(q).ln(),
            SfExpr::Var(v) => *env.get(v).ok_or_else(|| Error::MissingVariable(v.clone()))?,
            SfExpr::Sum(v) => {
                let ls = v.iter().map(|x| go(x, env, eps)).collect::<Result<Vec<_>>>()?;
                let m = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + eps * ls.iter().map(|l| ((l - m) / eps).exp()).sum::<f64>().ln()
            }
            SfExpr::Prod(v) => v.iter().map(|x| go(x, env, eps)).sum::<Result<f64>>()?,
            SfExpr::Quot(a, b) => go(a, env, eps)? - go(b, env, eps)?,
            SfExpr::Pow(a, n) => *n as f64 * go(a, env, eps)?,
            SfExpr::HalfPow(a, k) => *k as f64 * 0.5 * go(a, env, eps)?,
        })
    }
    let fenv: BTreeMap<String, f64> = env.iter().map(|(k, v)| (k.clone(), rat_to_f64(v))).collect();
    eps_list
        .iter()
        .map(|&eps| {
            let v = go(e, &fenv, eps)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Diverged(eps.to_string()))
            }
        })
        .collect()
}

/// Random subtraction-free expression in the given variables.
pub fn random_expr<R: Rng>(rng: &mut R, vars: &[&str], depth: usize) -> SfExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.7) {
            SfExpr::var(vars[rng.gen_range(0..vars.len())])
        } else {
            SfExpr::Const(rat(rng.gen_range(1..6), rng.gen_range(1..4)))
        };
    }
    match rng.gen_range(0..4) {
        0 => SfExpr::Sum((0..rng.gen_range(2..4)).map(|_| random_expr(rng, vars, depth - 1)).collect()),
        1 => SfExpr::Prod((0..rng.gen_range(2..4)).map(|_| random_expr(rng, vars, depth - 1)).collect()),
        2 => SfExpr::Quot(Box::new(random_expr(rng, vars, depth - 1)), Box::new(random_expr(rng, vars, depth - 1))),
        _ => SfExpr::Pow(Box::new(random_expr(rng, vars, depth - 1)), rng.gen_range(-3..4)),
    }
}

/// Maximum of affine forms without constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct PlFunction {
    pub forms: Vec<Vec<BigRational>>,
}

impl PlFunction {
    pub fn eval(&self, x: &[BigRational]) -> BigRational {
        self.forms
            .iter()
            .map(|f| f.iter().zip(x).map(|(a, b)| a * b).fold(BigRational::zero(), |s, t| s + t))
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

/// Drops coefficients and reads each monomial as a linear form.
pub fn tropical_analogue_poly(p: &LaurentPoly) -> Result<PlFunction> {
    let mut forms = vec![];
    for (exp, c) in p.terms() {
        if !c.is_positive() {
            return Err(Error::NonPositiveCoefficient(p.to_string()));
        }
        forms.push(exp.iter().map(|&d| rat(d, 2)).collect());
    }
    if forms.is_empty() {
        return Err(Error::NonPositiveCoefficient("0".into()));
    }
    Ok(PlFunction { forms })
}
