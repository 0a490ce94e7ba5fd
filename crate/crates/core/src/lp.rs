//! Exact-rational linear feasibility.
//!
//! Decides whether `A x = b, x >= 0` has a solution using the Phase I
//! simplex method on a dense tableau with Bland's anti-cycling rule. Every
//! combined-transition and relation-closure question in the checkers is
//! reduced to one of these problems.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

/// A feasibility problem over non-negative variables.
#[derive(Debug, Clone, Default)]
pub struct Feasibility {
    num_vars: usize,
    rows: Vec<(BTreeMap<usize, Rational>, Rational)>,
}

impl Feasibility {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates a fresh non-negative variable and returns its index.
    pub fn var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds `Σ coeff · x_var = rhs`. Repeated variables are summed.
    pub fn equal<I>(&mut self, terms: I, rhs: Rational)
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut row = BTreeMap::new();
        for (v, c) in terms {
            assert!(v < self.num_vars, "unknown variable {v}");
            let e = row.entry(v).or_insert_with(Rational::zero);
            *e += c;
        }
        row.retain(|_, c: &mut Rational| !c.is_zero());
        self.rows.push((row, rhs));
    }

    /// Returns a feasible point, or `None` if the system has no
    /// non-negative solution.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        // Trivial rows are decided up front; they would otherwise keep an
        // artificial variable in the basis.
        let mut rows = Vec::new();
        for (row, rhs) in &self.rows {
            if row.is_empty() {
                if !rhs.is_zero() {
                    return None;
                }
            } else {
                rows.push((row, rhs));
            }
        }
        if rows.is_empty() {
            return Some(vec![Rational::zero(); self.num_vars]);
        }
        // Machine-word arithmetic first; the pivot sequence is the same in
        // both fields, so the answer does not depend on which one finishes.
        let small: Option<Vec<_>> = rows
            .iter()
            .map(|(row, rhs)| {
                let r: Option<Vec<(usize, Small)>> =
                    row.iter().map(|(&v, c)| Small::from_big(c).map(|q| (v, q))).collect();
                Some((r?, Small::from_big(rhs)?))
            })
            .collect();
        let x: Option<Vec<Rational>> = match small.and_then(|rows| phase_one(&rows, self.num_vars)) {
            Some(x) => x.map(|x| x.into_iter().map(Small::to_big).collect()),
            None => {
                let rows: Vec<_> = rows
                    .iter()
                    .map(|(row, rhs)| (row.iter().map(|(&v, c)| (v, Big(c.clone()))).collect(), Big((*rhs).clone())))
                    .collect();
                phase_one(&rows, self.num_vars)
                    .expect("exact arithmetic cannot overflow")
                    .map(|x| x.into_iter().map(|b| b.0).collect())
            }
        };
        debug_assert!(x.as_ref().is_none_or(|x| self.satisfied_by(x)));
        x
    }

    pub fn is_feasible(&self) -> bool {
        self.solve().is_some()
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        x.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|(row, rhs)| {
                let lhs = row
                    .iter()
                    .fold(Rational::zero(), |acc, (&v, c)| acc + c * &x[v]);
                lhs == *rhs
            })
    }
}

/// Ordered field operations, `None` on overflow.
trait Field: Clone + PartialOrd {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
    fn neg(&self) -> Self;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
}

/// Arbitrary-precision fallback.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
struct Big(Rational);

impl Field for Big {
    fn zero() -> Self {
        Big(Rational::zero())
    }
    fn one() -> Self {
        Big(Rational::from_integer(1.into()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn neg(&self) -> Self {
        Big(-&self.0)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(Big(&self.0 - &o.0))
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(Big(&self.0 * &o.0))
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(Big(&self.0 / &o.0))
    }
}

/// Reduced fraction of machine integers, denominator positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Small {
    n: i128,
    d: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    // binary gcd; i128 division is slow
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    if a == 0 || b == 0 {
        return (a | b) as i128;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    while b != 0 {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
    }
    (a << shift) as i128
}

impl Small {
    fn new(n: i128, d: i128) -> Option<Small> {
        let g = gcd(n, d).max(1);
        let (n, d) = (n / g, d / g);
        if d < 0 {
            Some(Small { n: n.checked_neg()?, d: d.checked_neg()? })
        } else {
            Some(Small { n, d })
        }
    }

    fn from_big(q: &Rational) -> Option<Small> {
        Some(Small {
            n: i128::try_from(q.numer()).ok()?,
            d: i128::try_from(q.denom()).ok()?,
        })
    }

    fn to_big(self) -> Rational {
        Rational::new(self.n.into(), self.d.into())
    }
}

impl PartialOrd for Small {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        match (self.n.checked_mul(o.d), o.n.checked_mul(self.d)) {
            (Some(a), Some(b)) => Some(a.cmp(&b)),
            _ => Some(self.to_big().cmp(&o.to_big())),
        }
    }
}

impl Field for Small {
    fn zero() -> Self {
        Small { n: 0, d: 1 }
    }
    fn one() -> Self {
        Small { n: 1, d: 1 }
    }
    fn is_zero(&self) -> bool {
        self.n == 0
    }
    fn neg(&self) -> Self {
        Small { n: -self.n, d: self.d }
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        let g = gcd(self.d, o.d);
        let (a, b) = (self.d / g, o.d / g);
        let n = self.n.checked_mul(b)?.checked_sub(o.n.checked_mul(a)?)?;
        Small::new(n, self.d.checked_mul(b)?)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        let g1 = gcd(self.n, o.d).max(1);
        let g2 = gcd(o.n, self.d).max(1);
        Small::new(
            (self.n / g1).checked_mul(o.n / g2)?,
            (self.d / g2).checked_mul(o.d / g1)?,
        )
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.mul(&Small::new(o.d, o.n)?)
    }
}

/// Phase I simplex with Bland's rule. Outer `None` means overflow, inner
/// `None` infeasibility.
fn phase_one<F: Field>(rows: &[(Vec<(usize, F)>, F)], n: usize) -> Option<Option<Vec<F>>> {
    let m = rows.len();
    let width = n + m + 1;
    let rhs_col = n + m;
    let mut tab: Vec<Vec<F>> = Vec::with_capacity(m);
    for (i, (row, rhs)) in rows.iter().enumerate() {
        let flip = rhs.is_negative();
        let mut r = vec![F::zero(); width];
        for (v, c) in row {
            r[*v] = if flip { c.neg() } else { c.clone() };
        }
        r[n + i] = F::one();
        r[rhs_col] = if flip { rhs.neg() } else { rhs.clone() };
        tab.push(r);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of the Phase I objective (sum of artificials).
    let mut cost = vec![F::zero(); width];
    for r in &tab {
        for j in (0..n).chain([rhs_col]) {
            if !r[j].is_zero() {
                cost[j] = cost[j].sub(&r[j])?;
            }
        }
    }

    loop {
        let entering = (0..n + m).find(|&j| cost[j].is_negative());
        let Some(col) = entering else { break };
        let mut leave: Option<(usize, F)> = None;
        for (i, r) in tab.iter().enumerate() {
            if r[col].is_positive() {
                let ratio = r[rhs_col].div(&r[col])?;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            // Unbounded direction cannot occur for Phase I; treat as done.
            break;
        };
        pivot(&mut tab, &mut cost, row, col)?;
        basis[row] = col;
    }

    if !cost[rhs_col].is_zero() {
        return Some(None);
    }
    let mut x = vec![F::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = tab[i][rhs_col].clone();
        }
    }
    Some(Some(x))
}

fn pivot<F: Field>(tab: &mut [Vec<F>], cost: &mut [F], row: usize, col: usize) -> Option<()> {
    let p = tab[row][col].clone();
    let nonzero: Vec<usize> = (0..tab[row].len()).filter(|&j| !tab[row][j].is_zero()).collect();
    for &j in &nonzero {
        tab[row][j] = tab[row][j].div(&p)?;
    }
    let pivot_row: Vec<(usize, F)> = nonzero.iter().map(|&j| (j, tab[row][j].clone())).collect();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (j, v) in &pivot_row {
            r[*j] = r[*j].sub(&f.mul(v)?)?;
        }
    }
    if !cost[col].is_zero() {
        let f = cost[col].clone();
        for (j, v) in &pivot_row {
            cost[*j] = cost[*j].sub(&f.mul(v)?)?;
        }
    }
    Some(())
}

/// Weights `w >= 0, Σ w = 1` with `Σ w_i · points_i = target`, if any.
/// Points are sparse vectors over arbitrary ordered coordinates.
pub fn convex_combination<K: Ord + Clone>(
    target: &BTreeMap<K, Rational>,
    points: &[BTreeMap<K, Rational>],
) -> Option<Vec<Rational>> {
    let mut lp = Feasibility::new();
    let vars: Vec<usize> = points.iter().map(|_| lp.var()).collect();
    lp.equal(
        vars.iter().map(|&v| (v, Rational::from_integer(1.into()))),
        Rational::from_integer(1.into()),
    );
    let mut coords: BTreeMap<K, Vec<(usize, Rational)>> = BTreeMap::new();
    for k in target.keys() {
        coords.entry(k.clone()).or_default();
    }
    for (p, &v) in points.iter().zip(&vars) {
        for (k, c) in p {
            coords.entry(k.clone()).or_default().push((v, c.clone()));
        }
    }
    for (k, terms) in coords {
        let rhs = target.get(&k).cloned().unwrap_or_else(Rational::zero);
        lp.equal(terms, rhs);
    }
    lp.solve().map(|x| vars.iter().map(|&v| x[v].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn simple_feasible_system() {
        let mut lp = Feasibility::new();
        let x = lp.var();
        let y = lp.var();
        lp.equal([(x, int(1)), (y, int(1))], int(1));
        lp.equal([(x, int(1)), (y, int(-1))], ratio(1, 3));
        let sol = lp.solve().unwrap();
        assert_eq!(sol[x], ratio(2, 3));
        assert_eq!(sol[y], ratio(1, 3));
    }

    #[test]
    fn infeasible_sign() {
        let mut lp = Feasibility::new();
        let x = lp.var();
        lp.equal([(x, int(1))], int(-1));
        assert!(lp.solve().is_none());
    }

    #[test]
    fn contradictory_rows() {
        let mut lp = Feasibility::new();
        let x = lp.var();
        let y = lp.var();
        lp.equal([(x, int(1)), (y, int(1))], int(1));
        lp.equal([(x, int(1)), (y, int(1))], int(2));
        assert!(lp.solve().is_none());
    }

    #[test]
    fn empty_rows() {
        let mut lp = Feasibility::new();
        lp.var();
        lp.equal([], int(0));
        assert!(lp.is_feasible());
        lp.equal([], int(1));
        assert!(!lp.is_feasible());
    }

    #[test]
    fn degenerate_redundant_rows() {
        let mut lp = Feasibility::new();
        let v: Vec<_> = (0..4).map(|_| lp.var()).collect();
        lp.equal([(v[0], int(1)), (v[1], int(1))], int(1));
        lp.equal([(v[0], int(2)), (v[1], int(2))], int(2));
        lp.equal([(v[2], int(1)), (v[3], int(1)), (v[0], int(-1))], int(0));
        assert!(lp.is_feasible());
    }

    #[test]
    fn hull_membership() {
        let p = |a: i64, b: i64| -> BTreeMap<u8, Rational> {
            [(0u8, int(a)), (1u8, int(b))].into_iter().collect()
        };
        let pts = vec![p(0, 0), p(2, 0), p(0, 2)];
        let mid: BTreeMap<u8, Rational> = [(0u8, int(1)), (1u8, ratio(1, 2))].into_iter().collect();
        assert!(convex_combination(&mid, &pts).is_some());
        assert!(convex_combination(&p(2, 2), &pts).is_none());
    }
}
