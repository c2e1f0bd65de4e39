//! Differential polynomials in `u, u_1, u_2, …` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Product `Π u_k^{e_k}` stored as the sorted multiset of derivative orders,
/// so `u_0² u_1` is `[0, 0, 1]`. The derived order compares total degree
/// first, then the order lists lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    orders: Vec<u32>,
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.orders
            .len()
            .cmp(&other.orders.len())
            .then_with(|| self.orders.cmp(&other.orders))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn one() -> Self {
        Self { orders: Vec::new() }
    }

    /// `u_k`.
    pub fn var(k: u32) -> Self {
        Self { orders: vec![k] }
    }

    pub fn from_powers(powers: &BTreeMap<u32, u32>) -> Self {
        let mut orders = Vec::new();
        for (&k, &e) in powers {
            orders.extend(std::iter::repeat_n(k, e as usize));
        }
        Self { orders }
    }

    /// Derivative order → exponent, zero exponents omitted.
    pub fn powers(&self) -> BTreeMap<u32, u32> {
        let mut map = BTreeMap::new();
        for &k in &self.orders {
            *map.entry(k).or_insert(0) += 1;
        }
        map
    }

    pub fn degree(&self) -> usize {
        self.orders.len()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.orders.last().copied()
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    fn mul(&self, other: &Self) -> Self {
        let mut orders = Vec::with_capacity(self.orders.len() + other.orders.len());
        let (mut i, mut j) = (0, 0);
        while i < self.orders.len() && j < other.orders.len() {
            if self.orders[i] <= other.orders[j] {
                orders.push(self.orders[i]);
                i += 1;
            } else {
                orders.push(other.orders[j]);
                j += 1;
            }
        }
        orders.extend_from_slice(&self.orders[i..]);
        orders.extend_from_slice(&other.orders[j..]);
        Self { orders }
    }

    /// Replaces one factor `u_from` by `u_to`.
    fn replace_one(&self, from: u32, to: u32) -> Self {
        let mut orders = self.orders.clone();
        let pos = orders.iter().position(|&k| k == from).expect("factor present");
        orders.remove(pos);
        let at = orders.partition_point(|&k| k <= to);
        orders.insert(at, to);
        Self { orders }
    }

    fn remove_one(&self, k: u32) -> Self {
        let mut orders = self.orders.clone();
        let pos = orders.iter().position(|&x| x == k).expect("factor present");
        orders.remove(pos);
        Self { orders }
    }
}

/// One term `coeff · Π u_k^{e_k}` of a [`DiffPoly`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffMonomial {
    pub coeff: BigRational,
    pub monomial: Monomial,
}

/// Canonical sum of monomials: no zero coefficients, at most one term per
/// monomial, terms ordered by [`Monomial`]'s ordering.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Monomial::one())
    }

    /// `u_k`.
    pub fn var(k: u32) -> Self {
        Self::term(BigRational::one(), Monomial::var(k))
    }

    /// `u`.
    pub fn u() -> Self {
        Self::var(0)
    }

    pub fn term(coeff: BigRational, monomial: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(monomial, coeff);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = DiffMonomial>) -> Self {
        let mut p = Self::zero();
        for t in terms {
            p.add_term(t.monomial, t.coeff);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<DiffMonomial> {
        self.terms
            .iter()
            .map(|(m, c)| DiffMonomial {
                coeff: c.clone(),
                monomial: m.clone(),
            })
            .collect()
    }

    /// Highest derivative order present.
    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().filter_map(|m| m.max_order()).max()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    fn add_term(&mut self, monomial: Monomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(monomial) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    /// Total x-derivative `D_x` by the Leibniz rule, `D_x u_k = u_{k+1}`.
    pub fn total_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (k, e) in m.powers() {
                out.add_term(m.replace_one(k, k + 1), c * BigInt::from(e));
            }
        }
        out
    }

    /// `∂/∂u_k`.
    pub fn partial(&self, k: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.orders().iter().filter(|&&x| x == k).count();
            if e > 0 {
                out.add_term(m.remove_one(k), c * BigInt::from(e));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(BigRational::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Derivative orders that appear anywhere.
    pub fn variables(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .terms
            .keys()
            .flat_map(|m| m.orders().iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&-BigRational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: DiffPoly) -> DiffPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, e) in self.powers() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "u_{k}")?;
            } else {
                write!(f, "u_{k}^{e}")?;
            }
        }
        Ok(())
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.degree() == 0 {
                write_rational(f, &mag)?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write_rational(f, &mag)?;
                write!(f, "*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_degree_then_lex() {
        let p = &(&DiffPoly::var(3) + &(&DiffPoly::u() * &DiffPoly::var(1))) + &DiffPoly::u();
        let keys: Vec<Vec<u32>> = p.terms().map(|(m, _)| m.orders().to_vec()).collect();
        assert_eq!(keys, vec![vec![0], vec![3], vec![0, 1]]);
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = &DiffPoly::var(2) - &DiffPoly::var(2);
        assert!(p.is_zero());
        assert_eq!(p.to_string(), "0");
    }

    #[test]
    fn leibniz_total_derivative() {
        // D(u u_1) = u_1² + u u_2
        let p = &DiffPoly::u() * &DiffPoly::var(1);
        let d = p.total_derivative();
        let expected = &DiffPoly::var(1).pow(2) + &(&DiffPoly::u() * &DiffPoly::var(2));
        assert_eq!(d, expected);
        // D(u³) = 3u² u_1
        let c = DiffPoly::u().pow(3).total_derivative();
        assert_eq!(c.to_string(), "3*u_0^2*u_1");
    }

    #[test]
    fn partials() {
        let p = &DiffPoly::u().pow(2) * &DiffPoly::var(1);
        assert_eq!(p.partial(0).to_string(), "2*u_0*u_1");
        assert_eq!(p.partial(1).to_string(), "u_0^2");
        assert!(p.partial(2).is_zero());
    }

    #[test]
    fn powers_round_trip() {
        let m = Monomial::from_powers(&BTreeMap::from([(0, 2), (3, 1)]));
        assert_eq!(m.orders(), &[0, 0, 3]);
        assert_eq!(m.powers(), BTreeMap::from([(0, 2), (3, 1)]));
    }

    #[test]
    fn display_signs_and_rationals() {
        let p = DiffPoly::from_terms([
            DiffMonomial {
                coeff: rational(-1, 10),
                monomial: Monomial::var(2),
            },
            DiffMonomial {
                coeff: rational(1, 1),
                monomial: Monomial::from_powers(&BTreeMap::from([(0, 1), (1, 1)])),
            },
            DiffMonomial {
                coeff: rational(-3, 2),
                monomial: Monomial::one(),
            },
        ]);
        assert_eq!(p.to_string(), "-3/2 - 1/10*u_2 + u_0*u_1");
    }
}
