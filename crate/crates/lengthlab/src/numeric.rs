//! The scalar tower shared by every module: exact arbitrary-precision
//! rationals where the input data is rational, tolerance-bearing 64-bit
//! floats where it is not (logarithms). Mixed-mode arithmetic promotes
//! exact values to approximate ones.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default tolerance for approximate comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Hard cap on the lattice size explored by [`submonoid_member`].
const SUBMONOID_LATTICE_CAP: usize = 2_000_000;

/// Exact rational or tolerance-bearing float.
///
/// Comparisons on the `Approx` side treat values within the tolerance as
/// equal; the `Exact` side is a genuine total order.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Approx { value: f64, tol: f64 },
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact fraction `num/den`. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn exact(r: BigRational) -> Self {
        Scalar::Exact(r)
    }

    pub fn approx(value: f64) -> Self {
        Scalar::Approx { value, tol: DEFAULT_TOL }
    }

    pub fn approx_with_tol(value: f64, tol: f64) -> Self {
        Scalar::Approx { value, tol }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        self.compare(&Scalar::zero()) == Ordering::Equal
    }

    /// True for exact integers (denominator 1). Approx values are never
    /// considered integral.
    pub fn is_integer(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.denom().is_one(),
            Scalar::Approx { .. } => false,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx { value, .. } => *value,
        }
    }

    pub fn tol(&self) -> f64 {
        match self {
            Scalar::Exact(_) => 0.0,
            Scalar::Approx { tol, .. } => *tol,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx { .. } => None,
        }
    }

    /// Tolerance-collapsed comparison: exact order on two exact values,
    /// `|a - b| <= tol` counts as equality once an approximate value is
    /// involved.
    pub fn compare(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let tol = self.tol().max(other.tol());
                if (a - b).abs() <= tol {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    /// Strict total order used for data structures (heaps, sorting); no
    /// tolerance collapsing.
    pub fn total_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    pub fn le(&self, other: &Scalar) -> bool {
        self.compare(other) != Ordering::Greater
    }

    pub fn lt(&self, other: &Scalar) -> bool {
        self.compare(other) == Ordering::Less
    }

    pub fn ge(&self, other: &Scalar) -> bool {
        self.compare(other) != Ordering::Less
    }

    pub fn gt(&self, other: &Scalar) -> bool {
        self.compare(other) == Ordering::Greater
    }

    pub fn half(&self) -> Scalar {
        self / &Scalar::int(2)
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx { value, tol } => Scalar::Approx { value: value.abs(), tol: *tol },
        }
    }

    pub fn powi(&self, exp: u32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(num::pow::pow(r.clone(), exp as usize)),
            Scalar::Approx { value, tol } => {
                Scalar::Approx { value: value.powi(exp as i32), tol: *tol }
            }
        }
    }

    /// Largest integer `<= self`, clamped at zero, as u64. Approx values
    /// include the tolerance before flooring.
    pub fn floor_u64(&self) -> u64 {
        match self {
            Scalar::Exact(r) => {
                if r.is_negative() {
                    0
                } else {
                    r.floor().to_integer().to_u64().unwrap_or(u64::MAX)
                }
            }
            Scalar::Approx { value, tol } => {
                let v = value + tol;
                if v < 0.0 {
                    0
                } else {
                    v.floor() as u64
                }
            }
        }
    }

    pub fn ceil_u64(&self) -> u64 {
        match self {
            Scalar::Exact(r) => {
                if r.is_negative() {
                    0
                } else {
                    r.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
                }
            }
            Scalar::Approx { value, tol } => {
                let v = value - tol;
                if v < 0.0 {
                    0
                } else {
                    v.ceil() as u64
                }
            }
        }
    }
}

fn binop(a: &Scalar, b: &Scalar, f_exact: impl Fn(&BigRational, &BigRational) -> BigRational, f_approx: impl Fn(f64, f64) -> f64) -> Scalar {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(f_exact(x, y)),
        _ => Scalar::Approx {
            value: f_approx(a.to_f64(), b.to_f64()),
            tol: a.tol().max(b.tol()).max(f64::MIN_POSITIVE),
        },
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        binop(self, rhs, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        binop(self, rhs, |a, b| a - b, |a, b| a - b)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        binop(self, rhs, |a, b| a * b, |a, b| a * b)
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        binop(self, rhs, |a, b| a / b, |a, b| a / b)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx { value, tol } => Scalar::Approx { value: -value, tol: *tol },
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(other))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Approx { value, .. } => write!(f, "~{value}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Textual syntax: `3/2` (exact), `1.5` (exact decimal fraction),
    /// `-7` (exact integer), `~0.693147` (approx, default tolerance).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('~') {
            let v: f64 = rest
                .parse()
                .map_err(|_| Error::Validation(format!("bad approx scalar: {s:?}")))?;
            return Ok(Scalar::approx(v));
        }
        if let Some((num, den)) = s.split_once('/') {
            let n = BigInt::from_str(num.trim())
                .map_err(|_| Error::Validation(format!("bad scalar numerator: {s:?}")))?;
            let d = BigInt::from_str(den.trim())
                .map_err(|_| Error::Validation(format!("bad scalar denominator: {s:?}")))?;
            if d.is_zero() {
                return Err(Error::Validation(format!("zero denominator: {s:?}")));
            }
            return Ok(Scalar::Exact(BigRational::new(n, d)));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let digits = frac_part.trim();
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Validation(format!("bad decimal scalar: {s:?}")));
            }
            let negative = int_part.trim_start().starts_with('-');
            let i = BigInt::from_str(int_part.trim())
                .map_err(|_| Error::Validation(format!("bad decimal scalar: {s:?}")))?;
            let frac = BigInt::from_str(digits)
                .map_err(|_| Error::Validation(format!("bad decimal scalar: {s:?}")))?;
            let scale = num::pow::pow(BigInt::from(10), digits.len());
            let mag = i.abs() * &scale + frac;
            let signed = if negative { -mag } else { mag };
            return Ok(Scalar::Exact(BigRational::new(signed, scale)));
        }
        let n = BigInt::from_str(s)
            .map_err(|_| Error::Validation(format!("bad scalar: {s:?}")))?;
        Ok(Scalar::Exact(BigRational::from_integer(n)))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Scalar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a scalar string like \"3/2\", \"1.5\" or \"~0.69\", or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
                v.parse().map_err(|e| E::custom(format!("{e}")))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Exact(BigRational::from_integer(BigInt::from(v))))
            }
            fn visit_f64<E: de::Error>(self, _v: f64) -> std::result::Result<Scalar, E> {
                Err(E::custom(
                    "float literals are lossy; use a string like \"1/2\", \"0.5\" or \"~0.5\"",
                ))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Ord-by-total_cmp wrapper so scalars can live in heaps and sorted sets.
#[derive(Clone, Debug)]
pub struct OrdScalar(pub Scalar);

impl PartialEq for OrdScalar {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for OrdScalar {}
impl PartialOrd for OrdScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Outcome of a submonoid membership query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    /// `v = sum n_i * basis_i` with the returned non-negative coefficients.
    Yes { coefficients: Vec<u64> },
    /// Certified non-member: the bounded search was exhaustive below `v`.
    No,
    /// The coefficient cap truncated the search before it was exhaustive.
    Unknown,
}

/// Decides whether `v` lies in the additive submonoid of the reals generated
/// by `basis`, i.e. whether `v = sum n_i * basis_i` for non-negative integers
/// `n_i <= depth_cap`. Exact mode only: the question is not tolerance-stable.
///
/// The search runs bounded dynamic programming on the lattice spanned by the
/// common denominator of `v` and the basis; `No` is only reported when the
/// cap provably did not truncate anything.
pub fn submonoid_member(v: &Scalar, basis: &[Scalar], depth_cap: u64) -> Result<Membership> {
    let vr = v
        .as_exact()
        .ok_or_else(|| Error::Mode("submonoid membership requires an exact value".into()))?;
    let mut rats = Vec::with_capacity(basis.len());
    for b in basis {
        let br = b
            .as_exact()
            .ok_or_else(|| Error::Mode("submonoid membership requires an exact basis".into()))?;
        if !br.is_positive() {
            return Err(Error::Validation(format!("basis entry {b} is not positive")));
        }
        rats.push(br.clone());
    }
    if vr.is_negative() {
        return Ok(Membership::No);
    }
    if vr.is_zero() {
        return Ok(Membership::Yes { coefficients: vec![0; basis.len()] });
    }
    if rats.is_empty() {
        return Ok(Membership::No);
    }

    let mut denom = vr.denom().clone();
    for r in &rats {
        denom = denom.lcm(r.denom());
    }
    let to_lattice = |r: &BigRational| -> BigInt { (r * BigRational::from_integer(denom.clone())).to_integer() };
    let target_big = to_lattice(vr);
    let target = target_big.to_usize().ok_or(Error::Resource {
        what: "submonoid lattice target".into(),
        cap: SUBMONOID_LATTICE_CAP,
    })?;
    if target > SUBMONOID_LATTICE_CAP {
        return Err(Error::Resource { what: "submonoid lattice target".into(), cap: SUBMONOID_LATTICE_CAP });
    }
    let steps: Vec<usize> = rats
        .iter()
        .map(|r| to_lattice(r).to_usize().unwrap_or(usize::MAX))
        .collect();

    // Was any coefficient bound actually binding? If not, failure is a proof.
    let exhaustive = steps.iter().all(|&a| a == 0 || depth_cap >= (target / a) as u64);

    // Bounded-knapsack reachability; counts[i][x] records how many copies of
    // item i a witness for x uses, u32::MAX meaning unreachable.
    let mut reach = vec![false; target + 1];
    reach[0] = true;
    let mut counts: Vec<Vec<u32>> = Vec::with_capacity(steps.len());
    for &a in &steps {
        let mut cnt = vec![u32::MAX; target + 1];
        if a == 0 || a > target {
            for x in 0..=target {
                if reach[x] {
                    cnt[x] = 0;
                }
            }
            counts.push(cnt);
            continue;
        }
        let mut new_reach = vec![false; target + 1];
        for r in 0..a.min(target + 1) {
            // positions r, r+a, r+2a, ...; track the latest reachable base
            // within the coefficient window.
            let mut last_base: Option<usize> = None;
            let mut x = r;
            loop {
                if let Some(b) = last_base {
                    let n = ((x - b) / a) as u64;
                    if n > depth_cap {
                        last_base = None;
                    }
                }
                if reach[x] {
                    last_base = Some(x);
                }
                if let Some(b) = last_base {
                    new_reach[x] = true;
                    cnt[x] = ((x - b) / a) as u32;
                }
                match x.checked_add(a) {
                    Some(nx) if nx <= target => x = nx,
                    _ => break,
                }
            }
        }
        reach = new_reach;
        counts.push(cnt);
    }

    if reach[target] {
        let mut coeffs = vec![0u64; steps.len()];
        let mut x = target;
        for i in (0..steps.len()).rev() {
            let n = counts[i][x];
            if n == u32::MAX {
                return Err(Error::Internal("submonoid backtrack lost the witness".into()));
            }
            coeffs[i] = n as u64;
            x -= (n as usize) * steps[i];
        }
        if x != 0 {
            return Err(Error::Internal("submonoid backtrack did not land on zero".into()));
        }
        let mut check = BigRational::zero();
        for (c, r) in coeffs.iter().zip(&rats) {
            check += BigRational::from_integer(BigInt::from(*c)) * r;
        }
        if &check != vr {
            return Err(Error::Internal("submonoid witness does not reconstruct the value".into()));
        }
        return Ok(Membership::Yes { coefficients: coeffs });
    }

    if exhaustive {
        Ok(Membership::No)
    } else {
        Ok(Membership::Unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn compare_reduced_fractions() {
        assert_eq!(Scalar::ratio(1, 2).compare(&Scalar::ratio(2, 4)), Ordering::Equal);
        assert_eq!(Scalar::ratio(3, 8).compare(&Scalar::ratio(6, 16)), Ordering::Equal);
        assert_eq!(Scalar::ratio(1, 3).compare(&Scalar::ratio(1, 2)), Ordering::Less);
    }

    #[test]
    fn compare_approx_with_tolerance() {
        // ln 2 to well past 10 places: 0.6931471805599453
        let a = Scalar::approx(0.6931471805);
        let b = Scalar::approx(0.6931471805599453);
        assert_eq!(a.compare(&b), Ordering::Equal);
        let c = Scalar::approx(0.69315);
        assert_eq!(a.compare(&c), Ordering::Less);
    }

    #[test]
    fn mixed_mode_promotes() {
        let r = &Scalar::ratio(1, 2) + &Scalar::approx(0.25);
        assert!(!r.is_exact());
        assert_eq!(r.compare(&Scalar::approx(0.75)), Ordering::Equal);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(s("3/2").to_string(), "3/2");
        assert_eq!(s("1.5").to_string(), "3/2");
        assert_eq!(s("-0.25").to_string(), "-1/4");
        assert_eq!(s("7").to_string(), "7");
        assert!(s("~0.5").compare(&Scalar::approx(0.5)) == Ordering::Equal);
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("x".parse::<Scalar>().is_err());
    }

    #[test]
    fn submonoid_examples() {
        // 7/2 = 2*1 + 1*(3/2)
        let m = submonoid_member(&s("7/2"), &[s("1"), s("3/2")], 64).unwrap();
        assert_eq!(m, Membership::Yes { coefficients: vec![2, 1] });

        // smallest positive combination of {1, 3/2} is 1 > 1/4
        let m = submonoid_member(&s("1/4"), &[s("1"), s("3/2")], 64).unwrap();
        assert_eq!(m, Membership::No);

        // zero is the empty sum
        let m = submonoid_member(&Scalar::zero(), &[s("5/3")], 64).unwrap();
        assert_eq!(m, Membership::Yes { coefficients: vec![0] });

        // approx input is a mode error
        assert!(submonoid_member(&Scalar::approx(1.0), &[s("1")], 64).is_err());
    }

    #[test]
    fn submonoid_single_rational_basis_is_divisibility() {
        let q = s("3/4");
        for k in 0..20i64 {
            let v = &Scalar::int(k) * &q;
            let m = submonoid_member(&v, &[q.clone()], 1024).unwrap();
            assert_eq!(m, Membership::Yes { coefficients: vec![k as u64] });
        }
        assert_eq!(submonoid_member(&s("1/2"), &[q.clone()], 1024).unwrap(), Membership::No);
    }

    #[test]
    fn submonoid_unknown_when_cap_binds() {
        // 10 = 10*1 but cap 3 truncates, and nothing else reaches it
        let m = submonoid_member(&s("10"), &[s("1")], 3).unwrap();
        assert_eq!(m, Membership::Unknown);
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(s("7/2").floor_u64(), 3);
        assert_eq!(s("7/2").ceil_u64(), 4);
        assert_eq!(s("-1").floor_u64(), 0);
        assert_eq!(Scalar::approx(2.9999999999).ceil_u64(), 3);
    }
}
