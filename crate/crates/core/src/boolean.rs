//! Boolean functions over `{0,1}^d`: full truth tables and restricted pattern sets.

use crate::error::{Error, Result};
use crate::statevec::check_capacity;

/// Deutsch-Jozsa classification of a truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionClass {
    Constant,
    Balanced,
    Neither,
}

/// All `2^d` values of `B`, `values[x] = B(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    d: usize,
    values: Vec<bool>,
}

impl TruthTable {
    pub fn new(d: usize, values: Vec<bool>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("truth_table", "d must be at least 1"));
        }
        if d >= usize::BITS as usize || values.len() != 1usize << d {
            return Err(Error::validation(
                "truth_table",
                format!("{} values do not cover 2^{d} arguments", values.len()),
            ));
        }
        Ok(TruthTable { d, values })
    }

    /// Infers `d` from the length, which must be a power of two no smaller than 2.
    pub fn from_values(values: Vec<bool>) -> Result<Self> {
        let n = values.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::validation(
                "truth_table",
                format!("length {n} is not 2^d for d >= 1"),
            ));
        }
        Self::new(n.trailing_zeros() as usize, values)
    }

    pub fn constant(d: usize, value: bool) -> Result<Self> {
        guard_width("truth_table", d)?;
        Self::new(d, vec![value; 1 << d])
    }

    pub fn from_fn(d: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        guard_width("truth_table", d)?;
        Self::new(d, (0..1usize << d).map(f).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn eval(&self, x: usize) -> bool {
        self.values[x]
    }

    pub fn ones(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }
}

fn guard_width(op: &'static str, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::domain(op, "d must be at least 1"));
    }
    if d >= 40 {
        return Err(Error::capacity(op, format!("2^{d} entries")));
    }
    Ok(())
}

/// A restricted set of `(x, B(x))` examples with distinct arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    d: usize,
    pairs: Vec<(usize, bool)>,
}

impl PatternSet {
    pub fn new(d: usize, pairs: Vec<(usize, bool)>) -> Result<Self> {
        guard_width("pattern_set", d)?;
        if pairs.is_empty() {
            return Err(Error::domain("pattern_set", "pattern set is empty"));
        }
        let mut seen = std::collections::HashSet::with_capacity(pairs.len());
        for &(x, _) in &pairs {
            if x >= 1usize << d {
                return Err(Error::domain(
                    "pattern_set",
                    format!("argument {x} out of range for d = {d}"),
                ));
            }
            if !seen.insert(x) {
                return Err(Error::domain(
                    "pattern_set",
                    format!("argument {x} repeated"),
                ));
            }
        }
        Ok(PatternSet { d, pairs })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pairs(&self) -> &[(usize, bool)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True when every pattern agrees with `t`.
    pub fn consistent_with(&self, t: &TruthTable) -> bool {
        self.d == t.d() && self.pairs.iter().all(|&(x, b)| t.eval(x) == b)
    }
}

pub fn classify(t: &TruthTable) -> FunctionClass {
    let ones = t.ones();
    if ones == 0 || ones == t.values.len() {
        FunctionClass::Constant
    } else if ones == t.values.len() / 2 {
        FunctionClass::Balanced
    } else {
        FunctionClass::Neither
    }
}

/// `(sum_i x_i a_i) mod 2`.
pub fn dot_parity(x: usize, a: usize, d: usize) -> Result<bool> {
    if d < usize::BITS as usize && (x >> d != 0 || a >> d != 0) {
        return Err(Error::domain(
            "dot_parity",
            format!("labels {x}, {a} must be below 2^{d}"),
        ));
    }
    Ok(parity(x & a))
}

#[inline]
pub(crate) fn parity(x: usize) -> bool {
    x.count_ones() % 2 == 1
}

/// The linear function `x -> x . s mod 2`.
pub fn linear_table(s: usize, d: usize) -> Result<TruthTable> {
    guard_width("linear_table", d)?;
    if s >> d != 0 {
        return Err(Error::domain(
            "linear_table",
            format!("mask {s} out of range for d = {d}"),
        ));
    }
    TruthTable::from_fn(d, |x| parity(x & s))
}

/// Every `(x, B(x))` pair of the table, in basis order.
pub fn full_pattern_set(t: &TruthTable) -> Result<PatternSet> {
    check_capacity("full_pattern_set", t.d())?;
    Ok(PatternSet {
        d: t.d(),
        pairs: t.values().iter().copied().enumerate().collect(),
    })
}
