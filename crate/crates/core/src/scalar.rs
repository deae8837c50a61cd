//! Scalar abstraction for bit counts.
//!
//! Every cost, score and size in the crate is generic over [`Bits`], so the
//! same engine runs on `f64`, `f32` or exact rationals. Exact arithmetic is
//! what lets a 17-symbol sentence at 160/17 bits per symbol measure exactly
//! 160 bits.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Num, Signed};

/// A numeric type usable as a bit count.
pub trait Bits:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Half-width of the band inside which two values compare equal.
    fn tolerance() -> Self;

    fn from_count(n: u64) -> Self;

    fn from_int(n: i64) -> Self;

    /// Lossy conversion used for display and heuristic ranking.
    fn to_f64(&self) -> f64;

    /// Parses a decimal (`9.41`), integer (`7`) or fraction (`160/17`).
    fn parse_bits(text: &str) -> Option<Self>;

    /// Canonical textual form; `parse_bits(format_bits(x)) == x`.
    fn format_bits(&self) -> String;

    /// Total order that treats values within [`Bits::tolerance`] as equal.
    fn cmp_bits(&self, other: &Self) -> Ordering {
        let diff = self.clone() - other.clone();
        if diff.abs() <= Self::tolerance() {
            Ordering::Equal
        } else if diff > Self::zero() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    fn sum<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        iter.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }
}

fn split_fraction(text: &str) -> Option<(&str, &str)> {
    let (num, den) = text.split_once('/')?;
    Some((num.trim(), den.trim()))
}

macro_rules! impl_float_bits {
    ($t:ty, $tol:expr) => {
        impl Bits for $t {
            fn tolerance() -> Self {
                $tol
            }

            fn from_count(n: u64) -> Self {
                n as $t
            }

            fn from_int(n: i64) -> Self {
                n as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn parse_bits(text: &str) -> Option<Self> {
                let value = match split_fraction(text) {
                    Some((num, den)) => {
                        let den: $t = den.parse().ok()?;
                        if den == 0.0 {
                            return None;
                        }
                        num.parse::<$t>().ok()? / den
                    }
                    None => text.trim().parse().ok()?,
                };
                value.is_finite().then_some(value)
            }

            fn format_bits(&self) -> String {
                format!("{self}")
            }
        }
    };
}

impl_float_bits!(f64, 1e-9);
impl_float_bits!(f32, 1e-4);

impl Bits for Ratio<i64> {
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn from_count(n: u64) -> Self {
        Ratio::from_integer(n as i64)
    }

    fn from_int(n: i64) -> Self {
        Ratio::from_integer(n)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn parse_bits(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((num, den)) = split_fraction(text) {
            let den: i64 = den.parse().ok()?;
            if den == 0 {
                return None;
            }
            return Some(Ratio::new(num.parse().ok()?, den));
        }
        let (negative, digits) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        if !whole
            .chars()
            .chain(frac.chars())
            .all(|c| c.is_ascii_digit())
            || frac.len() > 15
        {
            return None;
        }
        let scale = 10_i64.checked_pow(frac.len() as u32)?;
        let whole: i64 = if whole.is_empty() {
            0
        } else {
            whole.parse().ok()?
        };
        let frac: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().ok()?
        };
        let value = Ratio::new(whole.checked_mul(scale)?.checked_add(frac)?, scale);
        Some(if negative { -value } else { value })
    }

    fn format_bits(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}
