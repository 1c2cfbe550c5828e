//! Finite-precision views of Cantor space `2^ω`.
//!
//! Text grammar for points (used in JSON catalogs, pool files and the CLI):
//!
//! ```text
//! ep:<prefix>|<period>        eventually periodic, e.g. "ep:1|0", "ep:|10"
//! rat<d>:<q1>,...,<qd>        rational point of [0,1)^d, interleaved, e.g. "rat2:1/2,1/4"
//! asg:<var>=<bit>,...|<bit>   finite assignment with default bit, e.g. "asg:0=1,3=0|0"
//! ```
//!
//! A bit word is written as its bits (`"0110"`); the empty word is `""`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, parse_rational, Rational};

/// A finite binary string, i.e. a node of the full binary tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord(Vec<bool>);

impl BitWord {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn pop(&mut self) -> Option<bool> {
        self.0.pop()
    }

    pub fn child(&self, b: bool) -> Self {
        let mut w = self.clone();
        w.push(b);
        w
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self(self.0[..n.min(self.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &BitWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// All words of length `n`, in lexicographic order.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = BitWord> {
        assert!(n < 32, "refusing to enumerate 2^{n} words");
        (0u64..(1u64 << n)).map(move |code| BitWord((0..n).map(|i| (code >> (n - 1 - i)) & 1 == 1).collect()))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bad bit `{other}` in word `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitWord)
    }
}

impl Serialize for BitWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Anything that can supply bits of a point of `2^ω`.
///
/// `None` means the bit is not available, which only happens for external
/// sources that carry finitely many bits.
pub trait BitSource {
    fn bit(&self, i: usize) -> Option<bool>;

    fn prefix_bits(&self, n: usize) -> Option<BitWord> {
        (0..n).map(|i| self.bit(i)).collect::<Option<Vec<_>>>().map(BitWord)
    }

    /// The finite description of the source, when it has one.
    fn description(&self) -> Option<&PointGen> {
        None
    }
}

/// Bits supplied from outside without a finite description.
#[derive(Clone, Debug)]
pub struct ExternalBits(pub BitWord);

impl BitSource for ExternalBits {
    fn bit(&self, i: usize) -> Option<bool> {
        self.0.bits().get(i).copied()
    }
}

/// A finitely described computable point of Cantor space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointGen {
    /// `prefix` followed by `period` repeated forever. `period` is nonempty.
    EventuallyPeriodic { prefix: BitWord, period: BitWord },
    /// Point of `[0,1)^d` (unit coordinates), bits interleaved round-robin.
    RationalReal { coords: Vec<Rational> },
    /// Truth assignment: bit `i` is `values[i]`, or `default` when absent.
    Assignment { values: BTreeMap<usize, bool>, default: bool },
}

impl PointGen {
    pub fn eventually_periodic(prefix: BitWord, period: BitWord) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidArgument("eventually periodic point needs a nonempty period".into()));
        }
        Ok(PointGen::EventuallyPeriodic { prefix, period })
    }

    /// `prefix` followed by zeros.
    pub fn zero_tail(prefix: BitWord) -> Self {
        PointGen::EventuallyPeriodic { prefix, period: BitWord(vec![false]) }
    }

    pub fn rational(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("rational point needs at least one coordinate".into()));
        }
        for c in &coords {
            if c.is_negative() || *c >= Rational::one() {
                return Err(Error::Domain(format!("unit coordinate {} outside [0,1)", format_rational(c))));
            }
        }
        Ok(PointGen::RationalReal { coords })
    }

    /// Bit `i` of the described path.
    pub fn bit_at(&self, i: usize) -> bool {
        match self {
            PointGen::EventuallyPeriodic { prefix, period } => {
                if i < prefix.len() {
                    prefix.0[i]
                } else {
                    period.0[(i - prefix.len()) % period.len()]
                }
            }
            PointGen::RationalReal { coords } => {
                let d = coords.len();
                rational_bit(&coords[i % d], i / d)
            }
            PointGen::Assignment { values, default } => *values.get(&i).unwrap_or(default),
        }
    }

    pub fn prefix(&self, n: usize) -> BitWord {
        match self {
            PointGen::RationalReal { coords } => {
                // Long division on every coordinate at once.
                let d = coords.len();
                let mut rems: Vec<BigInt> = coords.iter().map(|c| c.numer().clone()).collect();
                let dens: Vec<&BigInt> = coords.iter().map(|c| c.denom()).collect();
                let mut out = Vec::with_capacity(n);
                for k in 0..n {
                    let c = k % d;
                    rems[c] <<= 1;
                    let bit = rems[c] >= *dens[c];
                    if bit {
                        rems[c] -= dens[c];
                    }
                    out.push(bit);
                }
                BitWord(out)
            }
            _ => BitWord((0..n).map(|i| self.bit_at(i)).collect()),
        }
    }

    /// Canonical eventually-periodic form: shortest period, then shortest prefix.
    ///
    /// Two descriptions denote the same path iff their canonical forms agree.
    pub fn canonical(&self) -> (BitWord, BitWord) {
        let (prefix, period) = match self {
            PointGen::EventuallyPeriodic { prefix, period } => (prefix.clone(), period.clone()),
            PointGen::Assignment { values, default } => {
                let len = values.keys().next_back().map_or(0, |m| m + 1);
                (self.prefix(len), BitWord(vec![*default]))
            }
            PointGen::RationalReal { coords } => {
                let d = coords.len();
                let (mut pre, mut per) = (0usize, 1usize);
                for c in coords {
                    let (a, b) = rational_cycle(c);
                    pre = pre.max(a);
                    per = per.lcm(&b);
                }
                let all = self.prefix(d * (pre + per));
                (all.truncated(d * pre), BitWord(all.0[d * pre..].to_vec()))
            }
        };
        minimize_periodic(prefix, period)
    }

    pub fn same_point(&self, other: &PointGen) -> bool {
        self == other || self.canonical() == other.canonical()
    }

    /// Converts to the eventually periodic form.
    pub fn to_eventually_periodic(&self) -> PointGen {
        let (prefix, period) = self.canonical();
        PointGen::EventuallyPeriodic { prefix, period }
    }
}

/// Bit `i` (0-based, after the binary point) of `x ∈ [0,1)`.
fn rational_bit(x: &Rational, i: usize) -> bool {
    let q = x.denom();
    let r = (BigInt::from(2u32).modpow(&BigInt::from(i), q) * x.numer()) % q;
    (r << 1) >= *q
}

/// (preperiod, period) lengths of the binary expansion of `x ∈ [0,1)`.
fn rational_cycle(x: &Rational) -> (usize, usize) {
    let q = x.denom();
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut r = x.numer().clone();
    let mut k = 0usize;
    loop {
        if let Some(&first) = seen.get(&r) {
            return (first, k - first);
        }
        seen.insert(r.clone(), k);
        r <<= 1;
        if r >= *q {
            r -= q;
        }
        k += 1;
    }
}

fn minimize_periodic(mut prefix: BitWord, mut period: BitWord) -> (BitWord, BitWord) {
    let n = period.len();
    if let Some(p) = (1..=n).find(|&p| n.is_multiple_of(p) && (p..n).all(|i| period.0[i] == period.0[i - p])) {
        period.0.truncate(p);
    }
    while let (Some(&last), Some(&per_last)) = (prefix.0.last(), period.0.last()) {
        if last != per_last {
            break;
        }
        prefix.0.pop();
        period.0.rotate_right(1);
    }
    (prefix, period)
}

impl BitSource for PointGen {
    fn bit(&self, i: usize) -> Option<bool> {
        Some(self.bit_at(i))
    }

    fn prefix_bits(&self, n: usize) -> Option<BitWord> {
        Some(self.prefix(n))
    }

    fn description(&self) -> Option<&PointGen> {
        Some(self)
    }
}

impl fmt::Display for PointGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointGen::EventuallyPeriodic { prefix, period } => write!(f, "ep:{prefix}|{period}"),
            PointGen::RationalReal { coords } => {
                let parts: Vec<String> = coords.iter().map(format_rational).collect();
                write!(f, "rat{}:{}", coords.len(), parts.join(","))
            }
            PointGen::Assignment { values, default } => {
                let parts: Vec<String> = values.iter().map(|(k, v)| format!("{k}={}", u8::from(*v))).collect();
                write!(f, "asg:{}|{}", parts.join(","), u8::from(*default))
            }
        }
    }
}

fn parse_bit(s: &str) -> Result<bool> {
    match s.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse(format!("expected a bit, found `{other}`"))),
    }
}

impl FromStr for PointGen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, body) = s.split_once(':').ok_or_else(|| Error::Parse(format!("point `{s}` lacks a kind tag")))?;
        match tag {
            "ep" => {
                let (pre, per) = body
                    .split_once('|')
                    .ok_or_else(|| Error::Parse(format!("`{s}`: expected ep:<prefix>|<period>")))?;
                PointGen::eventually_periodic(pre.parse()?, per.parse()?)
            }
            "asg" => {
                let (assigns, default) = body
                    .split_once('|')
                    .ok_or_else(|| Error::Parse(format!("`{s}`: expected asg:<var>=<bit>,...|<bit>")))?;
                let mut values = BTreeMap::new();
                for item in assigns.split(',').filter(|t| !t.trim().is_empty()) {
                    let (var, bit) =
                        item.split_once('=').ok_or_else(|| Error::Parse(format!("`{item}`: expected <var>=<bit>")))?;
                    let var: usize =
                        var.trim().parse().map_err(|_| Error::Parse(format!("bad variable index `{var}`")))?;
                    values.insert(var, parse_bit(bit)?);
                }
                Ok(PointGen::Assignment { values, default: parse_bit(default)? })
            }
            t if t.starts_with("rat") => {
                let d: usize = t[3..].parse().map_err(|_| Error::Parse(format!("bad dimension in `{t}`")))?;
                let coords = body.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
                if coords.len() != d {
                    return Err(Error::Parse(format!("`{s}` declares {d} coordinates, found {}", coords.len())));
                }
                PointGen::rational(coords)
            }
            other => Err(Error::Parse(format!("unknown point kind `{other}`"))),
        }
    }
}

impl Serialize for PointGen {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PointGen {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// The bounded box `[lo, hi)^d` that real points are rescaled from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorBox {
    #[serde(with = "rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "rational::serde_str")]
    pub hi: Rational,
}

impl Default for CantorBox {
    fn default() -> Self {
        Self::unit()
    }
}

impl CantorBox {
    pub fn unit() -> Self {
        Self { lo: Rational::zero(), hi: Rational::one() }
    }

    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidArgument("box needs lo < hi".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn to_unit(&self, x: &Rational) -> Result<Rational> {
        let u = (x - &self.lo) / self.width();
        if u.is_negative() || u >= Rational::one() {
            return Err(Error::Domain(format!(
                "coordinate {} outside [{}, {})",
                format_rational(x),
                format_rational(&self.lo),
                format_rational(&self.hi)
            )));
        }
        Ok(u)
    }

    pub fn from_unit(&self, u: &Rational) -> Rational {
        &self.lo + u * self.width()
    }

    /// Closed axis-aligned cell `[v, v + 2^-n]` per coordinate, in box
    /// coordinates, for the node `sigma` under `d`-way interleaving.
    ///
    /// The closed cell is exactly the image of the cylinder `[sigma]` under
    /// binary decoding.
    pub fn cell(&self, sigma: &BitWord, d: usize) -> Vec<(Rational, Rational)> {
        let mut nums = vec![BigInt::zero(); d];
        let mut depth = vec![0usize; d];
        for (k, &b) in sigma.bits().iter().enumerate() {
            let c = k % d;
            nums[c] <<= 1;
            if b {
                nums[c] += 1;
            }
            depth[c] += 1;
        }
        let w = self.width();
        nums.into_iter()
            .zip(depth)
            .map(|(num, n)| {
                let scale = BigInt::one() << n;
                let lo = BigRational::new(num.clone(), scale.clone());
                let hi = BigRational::new(num + 1, scale);
                (&self.lo + &w * lo, &self.lo + &w * hi)
            })
            .collect()
    }
}

/// Encodes a point of `[lo, hi)^d` by interleaving coordinate expansions:
/// bit `k` of the result is bit `⌊k/d⌋` of coordinate `k mod d`.
pub fn interleave_encode(coords: &[Rational], bbox: &CantorBox) -> Result<PointGen> {
    if coords.is_empty() {
        return Err(Error::InvalidArgument("need at least one coordinate".into()));
    }
    let unit = coords.iter().map(|x| bbox.to_unit(x)).collect::<Result<Vec<_>>>()?;
    PointGen::rational(unit)
}

/// The first `n` bits of coordinate `i` of a `d`-interleaved point.
pub fn extract_coordinate(p: &impl BitSource, i: usize, d: usize, n: usize) -> Option<BitWord> {
    (0..n).map(|k| p.bit(k * d + i)).collect::<Option<Vec<_>>>().map(BitWord)
}

/// `B_r(σ)`: paths that extend `σ` or first differ from it at index
/// `⌈−log₂ r⌉` or later (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicBall {
    pub center: BitWord,
    pub radius: Rational,
    cutoff: usize,
}

impl DyadicBall {
    pub fn new(center: BitWord, radius: Rational) -> Result<Self> {
        let cutoff = rational::neg_log2_ceil(&radius)?;
        Ok(Self { center, radius, cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// The ball is the cylinder of this word.
    pub fn cylinder(&self) -> BitWord {
        self.center.truncated(self.cutoff)
    }

    /// `None` if the source runs out of bits before a verdict.
    pub fn contains(&self, p: &impl BitSource) -> Option<bool> {
        let cyl = self.cylinder();
        for (i, &b) in cyl.bits().iter().enumerate() {
            if p.bit(i)? != b {
                return Some(false);
            }
        }
        Some(true)
    }
}

pub fn ball_contains(ball: &DyadicBall, p: &PointGen) -> bool {
    ball.contains(p).expect("described points are total")
}
