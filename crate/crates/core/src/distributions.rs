//! Probability subdistributions over finite state sets.
//!
//! A [`Subdistr`] stores only strictly positive entries, so its key set is
//! its support and two subdistributions are equal exactly when their maps
//! are equal. All arithmetic is exact.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistrError {
    #[error("scaling factor {0} is outside [0, 1]")]
    ScaleOutOfRange(String),
    #[error("subdistribution size {0} exceeds 1")]
    Overflow(String),
    #[error("negative probability {0}")]
    Negative(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subdistr<S: Ord> {
    entries: BTreeMap<S, Rational>,
}

impl<S: Ord> Default for Subdistr<S> {
    fn default() -> Self {
        Subdistr {
            entries: BTreeMap::new(),
        }
    }
}

impl<S: Ord + Clone> Subdistr<S> {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn dirac(state: S) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(state, Rational::one());
        Subdistr { entries }
    }

    /// Builds a subdistribution from `(state, probability)` pairs. Repeated
    /// states are summed, zero entries dropped.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, DistrError>
    where
        I: IntoIterator<Item = (S, Rational)>,
    {
        let mut d = Self::empty();
        for (s, p) in pairs {
            if p.is_negative() {
                return Err(DistrError::Negative(fmt_rational(&p)));
            }
            d.accumulate(s, p);
        }
        d.check_size()?;
        Ok(d)
    }

    /// Adds mass to one state without a size check. Callers building sums
    /// piecewise must validate the result themselves.
    pub(crate) fn accumulate(&mut self, state: S, p: Rational) {
        if p.is_zero() {
            return;
        }
        let entry = self.entries.entry(state).or_insert_with(Rational::zero);
        *entry += p;
    }

    fn check_size(&self) -> Result<(), DistrError> {
        let size = self.size();
        if size > Rational::one() {
            Err(DistrError::Overflow(fmt_rational(&size)))
        } else {
            Ok(())
        }
    }

    pub fn get(&self, state: &S) -> Rational {
        self.entries.get(state).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn size(&self) -> Rational {
        self.entries.values().fold(Rational::zero(), |acc, p| acc + p)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.size().is_one()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &S> + '_ {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, &Rational)> + '_ {
        self.entries.iter()
    }

    pub fn contains(&self, state: &S) -> bool {
        self.entries.contains_key(state)
    }

    /// `x ⊙ d`, restricted to probability weights `x ∈ [0, 1]`.
    pub fn scale(&self, x: &Rational) -> Result<Self, DistrError> {
        if x.is_negative() || *x > Rational::one() {
            return Err(DistrError::ScaleOutOfRange(fmt_rational(x)));
        }
        Ok(self.scale_unchecked(x))
    }

    pub(crate) fn scale_unchecked(&self, x: &Rational) -> Self {
        if x.is_zero() {
            return Self::empty();
        }
        Subdistr {
            entries: self
                .entries
                .iter()
                .map(|(s, p)| (s.clone(), p * x))
                .collect(),
        }
    }

    /// Pointwise sum; fails when the result would exceed size 1.
    pub fn add(&self, other: &Self) -> Result<Self, DistrError> {
        let sum = self.add_unchecked(other);
        sum.check_size()?;
        Ok(sum)
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let mut sum = self.clone();
        for (s, p) in &other.entries {
            sum.accumulate(s.clone(), p.clone());
        }
        sum
    }

    /// `d1 ⊗ d2` over pairs of states.
    pub fn product<T: Ord + Clone>(&self, other: &Subdistr<T>) -> Subdistr<(S, T)> {
        let mut entries = BTreeMap::new();
        for (s, p) in &self.entries {
            for (t, q) in &other.entries {
                entries.insert((s.clone(), t.clone()), p * q);
            }
        }
        Subdistr { entries }
    }

    /// `d ⊖ s`.
    pub fn remove(&self, state: &S) -> Self {
        let mut entries = self.entries.clone();
        entries.remove(state);
        Subdistr { entries }
    }

    /// Pushes the distribution through a state map, merging collisions.
    pub fn map_states<T: Ord + Clone>(&self, mut f: impl FnMut(&S) -> T) -> Subdistr<T> {
        let mut out = Subdistr::empty();
        for (s, p) in &self.entries {
            out.accumulate(f(s), p.clone());
        }
        out
    }
}

impl<S: Ord + fmt::Display> fmt::Display for Subdistr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (s, p)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", s, fmt_rational(p))?;
        }
        write!(f, "}}")
    }
}

impl<S: Ord + fmt::Debug> fmt::Debug for Subdistr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(s, p)| (s, fmt_rational(p))))
            .finish()
    }
}
