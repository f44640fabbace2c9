//! Numeric backends for the iteration engines.
//!
//! Every engine is generic over a [`Field`], which fixes how constants are
//! created and how rounding-sensitive comparisons behave. Two fields exist:
//! [`ExactRational`] (GMP rationals, no rounding at all) and [`BinaryFloat`]
//! (MPFR binary floats with a configurable mantissa width, round to nearest).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::Error;

/// Arithmetic on a single value of a numeric backend.
///
/// Method names deliberately shadow nothing on `rug`'s inherent APIs, so that
/// calls on owned values never pick up a consuming inherent method.
pub trait Scalar: Clone + PartialEq + PartialOrd + fmt::Debug + Send + Sync + 'static {
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs_val(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn sign(&self) -> Ordering;
    /// The exact value as a rational number.
    fn to_rational(&self) -> Rational;
    fn to_f64(&self) -> f64;
    /// Deterministic textual form: `p/q` for rationals, shortest round-trip
    /// decimal for floats.
    fn render(&self) -> String;

    fn max_of(&self, other: &Self) -> Self {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }

    fn min_of(&self, other: &Self) -> Self {
        if other < self {
            other.clone()
        } else {
            self.clone()
        }
    }
}

/// A numeric backend: constant construction plus the tolerances that depend on
/// the rounding model.
// `from_*` here are conversions into the field, so they take the field.
#[allow(clippy::wrong_self_convention)]
pub trait Field: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Scalar;

    /// Nearest representable value.
    fn from_rational(&self, r: &Rational) -> Self::Elem;
    /// Smallest representable value `>= r`.
    fn from_rational_up(&self, r: &Rational) -> Self::Elem;
    /// Re-rounds a value coming from another element of this field type
    /// (possibly with a different precision).
    fn coerce(&self, x: &Self::Elem) -> Self::Elem;
    /// A value `>= sqrt(x)` for `x >= 0`.
    fn sqrt_up(&self, x: &Self::Elem) -> Self::Elem;
    fn is_exact(&self) -> bool;
    /// `2^(-bits/2)` in float mode, `None` in exact mode. Used as the pivot
    /// cutoff, the negative-component clamp and the discriminant clamp.
    fn noise_floor(&self) -> Option<Self::Elem>;
    /// `a <= b`, allowing 4 ulps of slack in float mode.
    fn leq_slack(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// `a <= b` up to the noise floor (relative to `max(1, |b|)`); used to
    /// tell rounding noise from a genuine violation of monotonicity.
    fn leq_noise(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    fn default_divergence_guard(&self) -> Rational;
    /// Upper cap for certified bit counts.
    fn bits_cap(&self) -> u32;
    fn kind(&self) -> ScalarKind;

    fn zero(&self) -> Self::Elem {
        self.from_rational(&Rational::new())
    }

    fn one(&self) -> Self::Elem {
        self.from_rational(&Rational::from(1))
    }

    fn from_u64(&self, v: u64) -> Self::Elem {
        self.from_rational(&Rational::from(v))
    }

    fn zeros(&self, n: usize) -> Vec<Self::Elem> {
        vec![self.zero(); n]
    }

    fn from_rationals(&self, v: &[Rational]) -> Vec<Self::Elem> {
        v.iter().map(|r| self.from_rational(r)).collect()
    }
}

/// Which backend to use; parsed from `rational` or `float:<bits>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Rational,
    Float(u32),
}

impl Default for ScalarKind {
    fn default() -> Self {
        ScalarKind::Float(BinaryFloat::DEFAULT_BITS)
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarKind::Rational => f.write_str("rational"),
            ScalarKind::Float(bits) => write!(f, "float:{bits}"),
        }
    }
}

impl FromStr for ScalarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "rational" {
            return Ok(ScalarKind::Rational);
        }
        if s == "float" {
            return Ok(ScalarKind::default());
        }
        let bits = s
            .strip_prefix("float:")
            .and_then(|b| b.parse::<u32>().ok())
            .ok_or_else(|| Error::InvalidScalar(format!("`{s}` (expected `rational` or `float:<bits>`)")))?;
        if bits < BinaryFloat::MIN_BITS {
            return Err(Error::InvalidScalar(format!(
                "`{s}` (need at least {} bits)",
                BinaryFloat::MIN_BITS
            )));
        }
        Ok(ScalarKind::Float(bits))
    }
}

/// Exact arbitrary-precision rationals.
///
/// Square roots are the one operation that leaves the rationals; they are
/// rounded upward onto the grid `2^-sqrt_bits` unless the argument is a
/// perfect square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactRational {
    pub sqrt_bits: u32,
}

impl Default for ExactRational {
    fn default() -> Self {
        ExactRational { sqrt_bits: 256 }
    }
}

/// Cap reported by [`ExactRational::bits_cap`] for zero-width certificates.
pub const EXACT_BITS_CAP: u32 = 4096;

impl Field for ExactRational {
    type Elem = Rational;

    fn from_rational(&self, r: &Rational) -> Rational {
        r.clone()
    }

    fn from_rational_up(&self, r: &Rational) -> Rational {
        r.clone()
    }

    fn coerce(&self, x: &Rational) -> Rational {
        x.clone()
    }

    fn sqrt_up(&self, x: &Rational) -> Rational {
        assert!(x.cmp0() != Ordering::Less, "sqrt of a negative rational");
        let (num, den) = (x.numer(), x.denom());
        if num.is_perfect_square() && den.is_perfect_square() {
            return Rational::from((num.clone().sqrt(), den.clone().sqrt()));
        }
        // ceil(sqrt(ceil(x * 4^k))) / 2^k >= sqrt(x)
        let k = self.sqrt_bits;
        let scaled = Integer::from(num << (2 * k));
        let (q, r) = scaled.div_rem_ref(den).into();
        let q: Integer = q;
        let r: Integer = r;
        let t = if r.cmp0() == Ordering::Greater { q + 1u32 } else { q };
        let (s, rem) = t.sqrt_rem(Integer::new());
        let s = if rem.cmp0() == Ordering::Greater { s + 1u32 } else { s };
        Rational::from((s, Integer::from(1) << k))
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn noise_floor(&self) -> Option<Rational> {
        None
    }

    fn leq_slack(&self, a: &Rational, b: &Rational) -> bool {
        a <= b
    }

    fn leq_noise(&self, a: &Rational, b: &Rational) -> bool {
        a <= b
    }

    fn default_divergence_guard(&self) -> Rational {
        Rational::from(Integer::from(1) << 1024u32)
    }

    fn bits_cap(&self) -> u32 {
        EXACT_BITS_CAP
    }

    fn kind(&self) -> ScalarKind {
        ScalarKind::Rational
    }
}

/// Binary floating point with a fixed mantissa width, round to nearest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryFloat {
    bits: u32,
}

impl Default for BinaryFloat {
    fn default() -> Self {
        BinaryFloat::new(Self::DEFAULT_BITS)
    }
}

impl BinaryFloat {
    pub const DEFAULT_BITS: u32 = 256;
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Self {
        assert!(bits >= 8, "mantissa too narrow: {bits}");
        BinaryFloat { bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    fn pow2(&self, e: i32) -> Float {
        Float::with_val(self.bits, 1) << e
    }
}

impl Field for BinaryFloat {
    type Elem = Float;

    fn from_rational(&self, r: &Rational) -> Float {
        Float::with_val(self.bits, r)
    }

    fn from_rational_up(&self, r: &Rational) -> Float {
        Float::with_val_round(self.bits, r, Round::Up).0
    }

    fn coerce(&self, x: &Float) -> Float {
        Float::with_val(self.bits, x)
    }

    fn sqrt_up(&self, x: &Float) -> Float {
        assert!(x.cmp0() != Some(Ordering::Less), "sqrt of a negative float");
        Float::with_val_round(self.bits, x.sqrt_ref(), Round::Up).0
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn noise_floor(&self) -> Option<Float> {
        Some(self.pow2(-((self.bits / 2) as i32)))
    }

    fn leq_slack(&self, a: &Float, b: &Float) -> bool {
        if a <= b {
            return true;
        }
        let scale = Float::with_val(self.bits, a.abs_ref()).max(&Float::with_val(self.bits, b.abs_ref()));
        let slack = scale * self.pow2(3 - self.bits as i32);
        Float::with_val(self.bits, a - b) <= slack
    }

    fn leq_noise(&self, a: &Float, b: &Float) -> bool {
        if a <= b {
            return true;
        }
        let scale = Float::with_val(self.bits, b.abs_ref()).max(&Float::with_val(self.bits, 1));
        let tol = scale * self.pow2(-((self.bits / 2) as i32));
        Float::with_val(self.bits, a - b) <= tol
    }

    fn default_divergence_guard(&self) -> Rational {
        Rational::from(Integer::from(10).pow(30))
    }

    fn bits_cap(&self) -> u32 {
        self.bits
    }

    fn kind(&self) -> ScalarKind {
        ScalarKind::Float(self.bits)
    }
}

impl Scalar for Rational {
    fn add(&self, rhs: &Self) -> Self {
        Rational::from(self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Rational::from(self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Rational::from(self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Rational::from(self / rhs)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn abs_val(&self) -> Self {
        Rational::from(self.abs_ref())
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
    fn sign(&self) -> Ordering {
        self.cmp0()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for Float {
    fn add(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec().max(rhs.prec()), self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec().max(rhs.prec()), self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec().max(rhs.prec()), self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec().max(rhs.prec()), self / rhs)
    }
    fn neg(&self) -> Self {
        Float::with_val(self.prec(), -self)
    }
    fn abs_val(&self) -> Self {
        Float::with_val(self.prec(), self.abs_ref())
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn sign(&self) -> Ordering {
        self.cmp0().expect("NaN in float computation")
    }
    fn to_rational(&self) -> Rational {
        Float::to_rational(self).expect("non-finite float")
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
    fn render(&self) -> String {
        render_float(self)
    }
}

/// Shortest decimal string that parses back to exactly `x` at its precision,
/// written positionally when the exponent is moderate.
pub fn render_float(x: &Float) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if Float::is_zero(x) {
        return "0".to_string();
    }
    let prec = x.prec();
    let max_digits = (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    let mut text = x.to_string_radix(10, Some(max_digits));
    for digits in 1..=max_digits {
        let candidate = x.to_string_radix(10, Some(digits));
        let parsed = Float::parse(&candidate).map(|p| Float::with_val(prec, p));
        if matches!(parsed, Ok(ref v) if v == x) {
            text = candidate;
            break;
        }
    }
    positional(&text)
}

/// Rewrites MPFR's `d.ddde±x` form as plain positional notation for
/// exponents in `-24..=24`.
fn positional(sci: &str) -> String {
    let (neg, body) = match sci.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, sci),
    };
    let (mantissa, exp) = match body.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: String = format!("{int_part}{frac_part}");
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    // value = 0.digits * 10^(point)
    let point = int_part.len() as i64 + exp;
    let sign = if neg { "-" } else { "" };
    if !(-24..=24).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let e = point - 1;
        return if tail.is_empty() {
            format!("{sign}{head}e{e}")
        } else {
            format!("{sign}{head}.{tail}e{e}")
        };
    }
    let n = digits.len() as i64;
    let s = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point >= n {
        format!("{}{}", digits, "0".repeat((point - n) as usize))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{s}")
}

/// Parses a nonnegative decimal (`0.4`, `12`, `.5`) or fraction (`3/10`,
/// `1.5/2`) into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_decimal(p.trim())?;
        let q = parse_decimal(q.trim())?;
        if q.cmp0() == Ordering::Equal {
            return None;
        }
        return Some(p / q);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    if text.is_empty() {
        return None;
    }
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = Integer::from_str_radix(&digits, 10).ok()?;
    let denom = Integer::from(10).pow(frac_part.len() as u32);
    Some(Rational::from((numer, denom)))
}

/// Renders a rational as a terminating decimal when it has one, else `p/q`.
pub fn render_rational_decimal(r: &Rational) -> String {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_divisible_u(2) {
        den /= 2u32;
        twos += 1;
    }
    while den.is_divisible_u(5) {
        den /= 5u32;
        fives += 1;
    }
    if den != 1 {
        return r.to_string();
    }
    let places = twos.max(fives);
    let scaled = (r.numer() * Integer::from(10).pow(places)) / r.denom();
    let neg = scaled.cmp0() == Ordering::Less;
    let s = Integer::from(scaled.abs_ref()).to_string();
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{s}");
    }
    let places = places as usize;
    let padded = if s.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - s.len()), s)
    } else {
        s
    };
    let (a, b) = padded.split_at(padded.len() - places);
    format!("{sign}{a}.{b}")
}

/// Bit length of a positive integer (`bits(1) = 1`, `bits(10) = 4`).
pub fn bit_length(i: &Integer) -> u32 {
    i.significant_bits()
}

/// `ceil(log2(r))` for `r > 0`, computed exactly.
pub fn ceil_log2(r: &Rational) -> i64 {
    assert!(r.cmp0() == Ordering::Greater, "log of a nonpositive value");
    // 2^(e-1) < r <= 2^e
    let e0 = r.numer().significant_bits() as i64 - r.denom().significant_bits() as i64;
    let mut e = e0 - 1;
    while pow2_rational(e) < *r {
        e += 1;
    }
    while e > i64::MIN + 1 && pow2_rational(e - 1) >= *r {
        e -= 1;
    }
    e
}

/// `floor(log2(r))` for `r > 0`, computed exactly.
pub fn floor_log2(r: &Rational) -> i64 {
    assert!(r.cmp0() == Ordering::Greater, "log of a nonpositive value");
    let e0 = r.numer().significant_bits() as i64 - r.denom().significant_bits() as i64;
    let mut e = e0 + 1;
    while pow2_rational(e) > *r {
        e -= 1;
    }
    while pow2_rational(e + 1) <= *r {
        e += 1;
    }
    e
}

pub fn pow2_rational(e: i64) -> Rational {
    if e >= 0 {
        Rational::from(Integer::from(1) << e as u32)
    } else {
        Rational::from((Integer::from(1), Integer::from(1) << (-e) as u32))
    }
}
