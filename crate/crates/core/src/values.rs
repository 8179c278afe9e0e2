//! The value domain: nonnegative reals extended with infinity.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::ValueError;

/// Default divergence cap: ascending iterates above it are promoted to infinity,
/// descending iterates below its reciprocal are floored to zero.
pub const DEFAULT_CAP: f64 = 1e12;
pub const DEFAULT_TOL_FIX: f64 = 1e-9;
pub const DEFAULT_TOL_CMP: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Integers below 2^53 are exactly representable and print without a fraction.
const EXACT_INT_BOUND: f64 = 9_007_199_254_740_992.0;

/// An element of `[0, ∞]`. NaN and negative magnitudes cannot be constructed.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtValue(f64);

impl ExtValue {
    pub const ZERO: ExtValue = ExtValue(0.0);
    pub const ONE: ExtValue = ExtValue(1.0);
    pub const INFINITY: ExtValue = ExtValue(f64::INFINITY);

    pub fn new(x: f64) -> Result<Self, ValueError> {
        if x.is_nan() {
            Err(ValueError::NaN)
        } else if x < 0.0 || x == f64::NEG_INFINITY {
            Err(ValueError::Negative(x))
        } else {
            // normalizes -0.0
            Ok(ExtValue(x + 0.0))
        }
    }

    /// Panicking constructor for literals known to be valid.
    pub fn of(x: f64) -> Self {
        Self::new(x).expect("invalid extended value")
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// Multiplication by a discount. Never hits the `0·∞` case because discounts are
    /// strictly positive and finite.
    pub fn scale(self, d: Discount) -> Self {
        ExtValue(self.0 * d.0)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// |self − c| for a finite constant; `∞ − c = ∞`.
    pub fn abs_diff(self, c: f64) -> Self {
        if self.is_infinite() {
            ExtValue::INFINITY
        } else {
            ExtValue((self.0 - c).abs())
        }
    }
}

impl Eq for ExtValue {}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtValue is never NaN")
    }
}

impl fmt::Debug for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl TryFrom<f64> for ExtValue {
    type Error = ValueError;
    fn try_from(x: f64) -> Result<Self, ValueError> {
        ExtValue::new(x)
    }
}

impl From<Discount> for ExtValue {
    fn from(d: Discount) -> Self {
        ExtValue(d.0)
    }
}

impl Serialize for ExtValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else if self.0.fract() == 0.0 && self.0 < EXACT_INT_BOUND {
            s.serialize_u64(self.0 as u64)
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtVisitor;
        impl Visitor<'_> for ExtVisitor {
            type Value = ExtValue;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nonnegative number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtValue, E> {
                ExtValue::new(v).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtValue, E> {
                Ok(ExtValue(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtValue, E> {
                ExtValue::new(v as f64).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtValue, E> {
                match v {
                    "inf" | "Infinity" | "infinity" => Ok(ExtValue::INFINITY),
                    _ => Err(E::custom(format!("unexpected string value {v:?}"))),
                }
            }
        }
        d.deserialize_any(ExtVisitor)
    }
}

/// A strictly positive, finite multiplicative factor on an edge or in `d·φ`.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Discount(f64);

impl Discount {
    pub const ONE: Discount = Discount(1.0);

    pub fn new(x: f64) -> Result<Self, ValueError> {
        if x.is_finite() && x > 0.0 {
            Ok(Discount(x))
        } else {
            Err(ValueError::BadDiscount(x))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn recip(self) -> Discount {
        Discount(1.0 / self.0)
    }
}

impl fmt::Debug for Discount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Discount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<'de> Deserialize<'de> for Discount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        Discount::new(x).map_err(de::Error::custom)
    }
}

/// Product on `[0, ∞]`. The combination `0·∞` is undefined here and reported as an error.
pub fn ext_mul(a: ExtValue, b: ExtValue) -> Result<ExtValue, ValueError> {
    if (a.is_zero() && b.is_infinite()) || (a.is_infinite() && b.is_zero()) {
        return Err(ValueError::ZeroTimesInfinity);
    }
    Ok(ExtValue(a.0 * b.0))
}

/// The negation map: `1/x`, exchanging `0` and `∞`.
pub fn ext_recip(a: ExtValue) -> ExtValue {
    if a.is_zero() {
        ExtValue::INFINITY
    } else if a.is_infinite() {
        ExtValue::ZERO
    } else {
        ExtValue(1.0 / a.0)
    }
}

/// `k` is `eps`-close to `p`: `|k − p| ≤ eps` for finite `p`, `k ≥ 1/eps` for `p = ∞`.
/// Not symmetric: `∞` is close to no finite number.
pub fn eps_close(k: ExtValue, p: ExtValue, eps: f64) -> bool {
    if p.is_infinite() {
        k.0 >= 1.0 / eps
    } else {
        k.is_finite() && (k.0 - p.0).abs() <= eps
    }
}

/// `k ≥ p'` for some `p'` that is `eps`-close to `p`.
pub fn eps_above(k: ExtValue, p: ExtValue, eps: f64) -> bool {
    if p.is_infinite() {
        k.0 >= 1.0 / eps
    } else {
        k.0 >= p.0 - eps
    }
}

/// `k ≤ p'` for some `p'` that is `eps`-close to `p`.
pub fn eps_below(k: ExtValue, p: ExtValue, eps: f64) -> bool {
    // ∞ is eps-close to ∞, so every k qualifies when p = ∞.
    p.is_infinite() || k.0 <= p.0 + eps
}

/// Smallest `eps` for which `k` is `eps`-close to `p` (`∞` when no `eps` works).
pub fn closeness_gap(k: ExtValue, p: ExtValue) -> f64 {
    match (k.is_infinite(), p.is_infinite()) {
        (_, true) => {
            if k.is_infinite() {
                0.0
            } else if k.is_zero() {
                f64::INFINITY
            } else {
                1.0 / k.0
            }
        }
        (true, false) => f64::INFINITY,
        (false, false) => (k.0 - p.0).abs(),
    }
}

/// Relative change between two iterates, used as the stabilization measure of every
/// fixpoint loop. Equal values (including both infinite) have change 0.
pub fn rel_change(a: ExtValue, b: ExtValue) -> f64 {
    if a == b {
        return 0.0;
    }
    if a.is_infinite() || b.is_infinite() {
        return f64::INFINITY;
    }
    (a.0 - b.0).abs() / a.0.max(b.0)
}

/// Numerical knobs shared by the evaluator and the game solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_fix: f64,
    pub tol_cmp: f64,
    pub cap: f64,
    pub max_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_fix: DEFAULT_TOL_FIX,
            tol_cmp: DEFAULT_TOL_CMP,
            cap: DEFAULT_CAP,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), ValueError> {
        for (name, t) in [("tol_fix", self.tol_fix), ("tol_cmp", self.tol_cmp)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(ValueError::BadTolerance(name, t));
            }
        }
        if !(self.cap > 1.0 && self.cap.is_finite()) {
            return Err(ValueError::BadTolerance("cap", self.cap));
        }
        if self.max_iters == 0 {
            return Err(ValueError::BadTolerance("max_iters", 0.0));
        }
        Ok(())
    }

    /// Promotion/flooring applied to one coordinate of an iterate.
    /// `ascending` iterations promote runaway growth to `∞`; descending ones floor
    /// geometric decay to `0`. A coordinate that already reached its limit keeps it.
    pub(crate) fn limit_step(&self, prev: ExtValue, next: ExtValue, ascending: bool) -> ExtValue {
        if ascending {
            if prev.is_infinite() || (next.is_finite() && next.0 > self.cap && next > prev) {
                return ExtValue::INFINITY;
            }
        } else if prev.is_zero() && next > prev {
            return ExtValue::ZERO;
        }
        if ascending {
            if next.is_finite() && next.0 > self.cap && next > prev {
                return ExtValue::INFINITY;
            }
        } else if !next.is_zero() && next.0 < 1.0 / self.cap && next < prev {
            return ExtValue::ZERO;
        }
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64) -> ExtValue {
        ExtValue::of(x)
    }

    #[test]
    fn construction_rejects_nan_and_negative() {
        assert!(ExtValue::new(f64::NAN).is_err());
        assert!(ExtValue::new(-1.0).is_err());
        assert!(ExtValue::new(f64::NEG_INFINITY).is_err());
        assert!(ExtValue::new(f64::INFINITY).unwrap().is_infinite());
        assert!(Discount::new(0.0).is_err());
        assert!(Discount::new(f64::INFINITY).is_err());
    }

    #[test]
    fn products() {
        assert_eq!(ext_mul(v(2.0), v(3.0)).unwrap(), v(6.0));
        assert_eq!(ext_mul(v(0.5), ExtValue::INFINITY).unwrap(), ExtValue::INFINITY);
        assert_eq!(ext_mul(v(1.0), v(7.25)).unwrap(), v(7.25));
        assert_eq!(ext_mul(ExtValue::ZERO, ExtValue::INFINITY), Err(ValueError::ZeroTimesInfinity));
        assert_eq!(ext_mul(ExtValue::INFINITY, ExtValue::ZERO), Err(ValueError::ZeroTimesInfinity));
    }

    #[test]
    fn reciprocals() {
        assert_eq!(ext_recip(ExtValue::ZERO), ExtValue::INFINITY);
        assert_eq!(ext_recip(ExtValue::INFINITY), ExtValue::ZERO);
        assert_eq!(ext_recip(v(4.0)), v(0.25));
    }

    #[test]
    fn closeness_examples() {
        assert!(eps_close(v(10.0), ExtValue::INFINITY, 0.1));
        assert!(!eps_close(ExtValue::INFINITY, v(5.0), 0.5));
        assert!(eps_close(v(1.05), v(1.0), 0.05 + 1e-12));
        assert!(!eps_close(v(9.0), ExtValue::INFINITY, 0.1));
        assert!(eps_above(ExtValue::INFINITY, v(5.0), 0.1));
        assert!(eps_above(v(4.95), v(5.0), 0.1));
        assert!(!eps_above(v(4.8), v(5.0), 0.1));
        assert!(eps_below(v(1e300), ExtValue::INFINITY, 0.1));
        assert!(!eps_below(ExtValue::INFINITY, v(5.0), 0.1));
        assert_eq!(closeness_gap(v(10.0), ExtValue::INFINITY), 0.1);
        assert_eq!(closeness_gap(ExtValue::INFINITY, v(1.0)), f64::INFINITY);
    }

    #[test]
    fn json_encoding() {
        let vals = vec![v(3.0), ExtValue::INFINITY, v(0.5)];
        let s = serde_json::to_string(&vals).unwrap();
        assert_eq!(s, r#"[3,"inf",0.5]"#);
        let back: Vec<ExtValue> = serde_json::from_str(r#"[3, "inf", 0.5]"#).unwrap();
        assert_eq!(back, vals);
        assert!(serde_json::from_str::<ExtValue>("-1").is_err());
    }

    fn ext() -> impl Strategy<Value = ExtValue> {
        prop_oneof![
            1 => Just(ExtValue::ZERO),
            1 => Just(ExtValue::INFINITY),
            8 => (1e-6f64..1e6).prop_map(ExtValue::of),
        ]
    }

    proptest! {
        #[test]
        fn recip_is_involutive(x in ext()) {
            let back = ext_recip(ext_recip(x));
            if x.is_finite() && !x.is_zero() {
                let ulp = x.get() * f64::EPSILON;
                prop_assert!((back.get() - x.get()).abs() <= ulp);
            } else {
                prop_assert_eq!(back, x);
            }
        }

        #[test]
        fn recip_reverses_order(x in ext(), y in ext()) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(ext_recip(hi) <= ext_recip(lo));
        }

        #[test]
        fn scaled_closeness(x in ext(), y in ext(), delta in 0.01f64..100.0, eps in 0.001f64..0.999) {
            let d = delta.max(1.0 / delta);
            let disc = Discount::new(delta).unwrap();
            if eps_close(x, y, eps / d) {
                prop_assert!(eps_close(x.scale(disc), y.scale(disc), eps * (1.0 + 1e-12)));
            }
            if eps_above(x, y, eps / d) {
                prop_assert!(eps_above(x.scale(disc), y.scale(disc), eps * (1.0 + 1e-12)));
            }
            if eps_below(x, y, eps / d) {
                prop_assert!(eps_below(x.scale(disc), y.scale(disc), eps * (1.0 + 1e-12)));
            }
        }

        #[test]
        fn closeness_chains(x in ext(), y in ext(), z in ext(), eps in 0.001f64..0.999) {
            let h = eps / 2.0;
            if eps_close(x, y, h) && eps_close(y, z, h) {
                prop_assert!(eps_close(x, z, eps * (1.0 + 1e-12)));
            }
            // ∞ is above every number, so the chain breaks when only the middle term is ∞
            let above_applies = !(y.is_infinite() && z.is_finite());
            if above_applies && eps_above(x, y, h) && eps_above(y, z, h) {
                prop_assert!(eps_above(x, z, eps * (1.0 + 1e-12)));
            }
            if eps_below(x, y, h) && eps_below(y, z, h) {
                prop_assert!(eps_below(x, z, eps * (1.0 + 1e-12)));
            }
        }
    }

    #[test]
    fn chained_closeness_near_infinity() {
        // y finite but huge, z infinite: x close to y and y close to ∞ gives x close to ∞
        let eps = 0.1;
        let y = v(25.0);
        let x = v(24.96);
        assert!(eps_close(y, ExtValue::INFINITY, eps / 2.0));
        assert!(eps_close(x, y, eps / 2.0));
        assert!(eps_close(x, ExtValue::INFINITY, eps));
    }
}
