//! Dense Cl(5,3) kernel in the null (Witt) basis of the conic model.
//!
//! Coefficients are indexed by a bitmask over the eight generators
//! `n̄₊, n̄₋, n̄ₓ, e₁, e₂, n₊, n₋, nₓ` (bit 0 first). Blade `m` is the *outer*
//! product of its generators in ascending order, which is the only canonical
//! blade basis when the bilinear form is not diagonal. The geometric product
//! of every pair of basis blades is expanded once, through Chevalley's
//! recursion `e_i ∧ X = e_i X − e_i ⌋ X`, and cached in a sparse table.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Number of generators.
pub const DIM: usize = 8;
/// Number of basis blades.
pub const BLADES: usize = 1 << DIM;

pub const NBAR_PLUS: usize = 0;
pub const NBAR_MINUS: usize = 1;
pub const NBAR_TIMES: usize = 2;
pub const E1: usize = 3;
pub const E2: usize = 4;
pub const N_PLUS: usize = 5;
pub const N_MINUS: usize = 6;
pub const N_TIMES: usize = 7;

/// Blade mask of the full pseudoscalar `I`.
pub const PSEUDOSCALAR: usize = BLADES - 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliffordError {
    #[error("element is not an invertible versor (V·Ṽ = {scalar:e} with non-scalar residue {residue:e})")]
    NonInvertible { scalar: f64, residue: f64 },
}

/// The generator ordering, the bilinear form and its diagonalisation.
#[derive(Debug, Clone, Copy, Default)]
pub struct BasisConvention;

impl BasisConvention {
    pub const NAMES: [&'static str; DIM] = ["n̄₊", "n̄₋", "n̄ₓ", "e₁", "e₂", "n₊", "n₋", "nₓ"];

    /// `B(eᵢ, eⱼ)` on generators: `B(e₁,e₁) = B(e₂,e₂) = 1`, `B(n̄ᵤ, nᵤ) = −1`.
    #[inline]
    pub fn form(i: usize, j: usize) -> f64 {
        match (i, j) {
            (E1, E1) | (E2, E2) => 1.0,
            (0..=2, 5..=7) if j == i + 5 => -1.0,
            (5..=7, 0..=2) if i == j + 5 => -1.0,
            _ => 0.0,
        }
    }

    pub fn gram() -> [[f64; DIM]; DIM] {
        let mut g = [[0.0; DIM]; DIM];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = Self::form(i, j);
            }
        }
        g
    }

    /// Change of basis whose columns are an orthonormal frame written in the
    /// null basis: `e₁, e₂, (n̄ᵤ − nᵤ)/√2` (square +1), then `(n̄ᵤ + nᵤ)/√2`
    /// (square −1) for `u ∈ {+, −, ×}`.
    pub fn diagonalizing() -> [[f64; DIM]; DIM] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut p = [[0.0; DIM]; DIM];
        p[E1][0] = 1.0;
        p[E2][1] = 1.0;
        for u in 0..3 {
            p[u][2 + u] = h;
            p[u + 5][2 + u] = -h;
            p[u][5 + u] = h;
            p[u + 5][5 + u] = h;
        }
        p
    }

    /// Signature `(positive, negative)` read off `Pᵀ G P`.
    #[allow(clippy::needless_range_loop)]
    pub fn signature() -> (usize, usize) {
        let g = Self::gram();
        let p = Self::diagonalizing();
        let (mut pos, mut neg) = (0, 0);
        for k in 0..DIM {
            let mut d = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    d += p[i][k] * g[i][j] * p[j][k];
                }
            }
            if d > 0.5 {
                pos += 1;
            } else if d < -0.5 {
                neg += 1;
            }
        }
        (pos, neg)
    }
}

#[inline]
fn grade_of(mask: usize) -> usize {
    mask.count_ones() as usize
}

/// Sign of reordering `e_a ∧ e_b` into ascending order.
#[inline]
fn wedge_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `v · e_m = v ⌋ e_m + v ∧ e_m` for generator `v` and blade `m`.
fn vector_times_blade(v: usize, m: usize, out: &mut Vec<(usize, f64)>) {
    out.clear();
    let mut pos = 0;
    for j in 0..DIM {
        if m & (1 << j) != 0 {
            let g = BasisConvention::form(v, j);
            if g != 0.0 {
                let s = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.push((m & !(1 << j), s * g));
            }
            pos += 1;
        }
    }
    if m & (1 << v) == 0 {
        let below = (m & ((1 << v) - 1)).count_ones();
        let s = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
        out.push((m | (1 << v), s));
    }
}

struct ProductTable {
    offsets: Vec<u32>,
    terms: Vec<(u8, f64)>,
}

impl ProductTable {
    #[inline]
    fn get(&self, a: usize, b: usize) -> &[(u8, f64)] {
        let k = a * BLADES + b;
        &self.terms[self.offsets[k] as usize..self.offsets[k + 1] as usize]
    }

    fn build() -> Self {
        let mut prod: Vec<Vec<(u8, f64)>> = vec![Vec::new(); BLADES * BLADES];
        let mut order: Vec<usize> = (0..BLADES).collect();
        order.sort_by_key(|&m| grade_of(m));
        let mut scratch = Vec::with_capacity(DIM + 1);
        let mut acc = [0.0f64; BLADES];
        for &a in &order {
            for b in 0..BLADES {
                if a == 0 {
                    prod[b] = vec![(b as u8, 1.0)];
                    continue;
                }
                acc.iter_mut().for_each(|x| *x = 0.0);
                let first = a.trailing_zeros() as usize;
                let rest = a & !(1 << first);
                for &(m, c) in &prod[rest * BLADES + b] {
                    vector_times_blade(first, m as usize, &mut scratch);
                    for &(m2, c2) in &scratch {
                        acc[m2] += c * c2;
                    }
                }
                let mut pos = 0;
                for j in 0..DIM {
                    if rest & (1 << j) == 0 {
                        continue;
                    }
                    let g = BasisConvention::form(first, j);
                    if g != 0.0 {
                        let s = if pos % 2 == 0 { 1.0 } else { -1.0 };
                        let reduced = rest & !(1 << j);
                        for &(m, c) in &prod[reduced * BLADES + b] {
                            acc[m as usize] -= s * g * c;
                        }
                    }
                    pos += 1;
                }
                prod[a * BLADES + b] = acc
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(m, c)| (m as u8, *c))
                    .collect();
            }
        }
        let mut offsets = Vec::with_capacity(BLADES * BLADES + 1);
        let mut terms = Vec::new();
        offsets.push(0);
        for entry in prod {
            terms.extend(entry);
            offsets.push(terms.len() as u32);
        }
        Self { offsets, terms }
    }
}

fn table() -> &'static ProductTable {
    static TABLE: OnceLock<ProductTable> = OnceLock::new();
    TABLE.get_or_init(ProductTable::build)
}

/// A general element of Cl(5,3): 256 real coefficients.
#[derive(Clone, PartialEq)]
pub struct Multivector {
    c: [f64; BLADES],
}

impl Default for Multivector {
    fn default() -> Self {
        Self::zero()
    }
}

impl Multivector {
    pub fn zero() -> Self {
        Self { c: [0.0; BLADES] }
    }

    pub fn scalar(s: f64) -> Self {
        Self::blade(0, s)
    }

    pub fn blade(mask: usize, coefficient: f64) -> Self {
        let mut m = Self::zero();
        m.c[mask] = coefficient;
        m
    }

    /// Generator `i` as a 1-vector.
    pub fn basis(i: usize) -> Self {
        Self::blade(1 << i, 1.0)
    }

    /// 1-vector from its eight coefficients in generator order.
    pub fn vector(coefficients: [f64; DIM]) -> Self {
        let mut m = Self::zero();
        for (i, v) in coefficients.into_iter().enumerate() {
            m.c[1 << i] = v;
        }
        m
    }

    /// The full pseudoscalar `I = n̄₊∧n̄₋∧n̄ₓ∧e₁∧e₂∧n₊∧n₋∧nₓ`.
    pub fn pseudoscalar() -> Self {
        Self::blade(PSEUDOSCALAR, 1.0)
    }

    pub fn coefficients(&self) -> &[f64; BLADES] {
        &self.c
    }

    #[inline]
    pub fn get(&self, mask: usize) -> f64 {
        self.c[mask]
    }

    #[inline]
    pub fn set(&mut self, mask: usize, value: f64) {
        self.c[mask] = value;
    }

    pub fn scalar_part(&self) -> f64 {
        self.c[0]
    }

    /// Grade-1 coefficients in generator order.
    pub fn vector_part(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.c[1 << i])
    }

    pub fn grade(&self, k: usize) -> Self {
        let mut out = Self::zero();
        for (m, v) in self.c.iter().enumerate() {
            if grade_of(m) == k {
                out.c[m] = *v;
            }
        }
        out
    }

    /// Grades carrying a coefficient above `tol` (absolute).
    pub fn grades(&self, tol: f64) -> Vec<usize> {
        let mut present = [false; DIM + 1];
        for (m, v) in self.c.iter().enumerate() {
            if v.abs() > tol {
                present[grade_of(m)] = true;
            }
        }
        (0..=DIM).filter(|&k| present[k]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when every coefficient is below `rel` times the largest one
    /// of `reference`.
    pub fn is_negligible(&self, reference: f64, rel: f64) -> bool {
        self.max_abs() <= rel * reference
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.c
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(m, v)| (m, *v))
    }

    /// Geometric product.
    pub fn gp(&self, other: &Self) -> Self {
        let t = table();
        let rhs: Vec<(usize, f64)> = other.nonzero().collect();
        let mut out = Self::zero();
        for (a, x) in self.nonzero() {
            for &(b, y) in &rhs {
                let xy = x * y;
                for &(m, c) in t.get(a, b) {
                    out.c[m as usize] += xy * c;
                }
            }
        }
        out
    }

    /// Outer product; metric independent.
    pub fn wedge(&self, other: &Self) -> Self {
        let rhs: Vec<(usize, f64)> = other.nonzero().collect();
        let mut out = Self::zero();
        for (a, x) in self.nonzero() {
            for &(b, y) in &rhs {
                if a & b == 0 {
                    out.c[a | b] += wedge_sign(a, b) * x * y;
                }
            }
        }
        out
    }

    /// Left contraction `self ⌋ other`.
    pub fn inner(&self, other: &Self) -> Self {
        let t = table();
        let rhs: Vec<(usize, f64)> = other.nonzero().collect();
        let mut out = Self::zero();
        for (a, x) in self.nonzero() {
            let ga = grade_of(a);
            for &(b, y) in &rhs {
                let gb = grade_of(b);
                if ga > gb {
                    continue;
                }
                let xy = x * y;
                for &(m, c) in t.get(a, b) {
                    if grade_of(m as usize) == gb - ga {
                        out.c[m as usize] += xy * c;
                    }
                }
            }
        }
        out
    }

    /// Scalar part of the geometric product.
    pub fn scalar_product(&self, other: &Self) -> f64 {
        let t = table();
        let mut s = 0.0;
        for (a, x) in self.nonzero() {
            for (b, y) in other.nonzero() {
                if grade_of(a) != grade_of(b) {
                    continue;
                }
                for &(m, c) in t.get(a, b) {
                    if m == 0 {
                        s += x * y * c;
                    }
                }
            }
        }
        s
    }

    pub fn reverse(&self) -> Self {
        let mut out = self.clone();
        for (m, v) in out.c.iter_mut().enumerate() {
            if matches!(grade_of(m) % 4, 2 | 3) {
                *v = -*v;
            }
        }
        out
    }

    /// `A* = A I⁻¹`. In this basis `I² = −1`, so `dual(dual(A)) = −A`.
    pub fn dual(&self) -> Self {
        self.gp(inverse_pseudoscalar())
    }

    /// Inverse of [`dual`](Self::dual): `A = A* I`.
    pub fn undual(&self) -> Self {
        self.gp(&Self::pseudoscalar())
    }
}

fn inverse_pseudoscalar() -> &'static Multivector {
    static INV: OnceLock<Multivector> = OnceLock::new();
    INV.get_or_init(|| {
        let i = Multivector::pseudoscalar();
        let sq = i.gp(&i).scalar_part();
        i.scale(1.0 / sq)
    })
}

/// The global sign `s` with `dual(dual(A)) = s·A`.
pub fn double_dual_sign() -> f64 {
    let i = Multivector::pseudoscalar();
    1.0 / i.gp(&i).scalar_part()
}

impl fmt::Debug for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, v) in self.nonzero() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m == 0 {
                write!(f, "{v}")?;
            } else {
                let names: Vec<&str> = (0..DIM)
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| BasisConvention::NAMES[i])
                    .collect();
                write!(f, "{v}·{}", names.join("∧"))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: Self) -> Multivector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(mut self, rhs: Self) -> Multivector {
        self += &rhs;
        self
    }
}

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        for (a, b) in self.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: Self) -> Multivector {
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        out
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(self, rhs: Self) -> Multivector {
        &self - &rhs
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        self.scale(s)
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        self.scale(s)
    }
}

impl Mul for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Self) -> Multivector {
        self.gp(rhs)
    }
}

/// An invertible element acting by sandwich conjugation.
#[derive(Debug, Clone)]
pub struct Versor {
    v: Multivector,
    rev: Multivector,
    norm: f64,
}

impl Versor {
    /// Accepts `v` when `v·ṽ` is a nonzero scalar up to `1e−10` relative.
    pub fn new(v: Multivector) -> Result<Self, CliffordError> {
        let rev = v.reverse();
        let p = v.gp(&rev);
        let scalar = p.scalar_part();
        let mut residue = p;
        residue.set(0, 0.0);
        let residue = residue.max_abs();
        let scale = v.max_abs().powi(2).max(f64::MIN_POSITIVE);
        if scalar.abs() <= 1e-12 * scale || residue > 1e-10 * scalar.abs() {
            return Err(CliffordError::NonInvertible { scalar, residue });
        }
        Ok(Self {
            v,
            rev,
            norm: scalar,
        })
    }

    pub fn identity() -> Self {
        Self::new(Multivector::scalar(1.0)).expect("1 is invertible")
    }

    pub fn element(&self) -> &Multivector {
        &self.v
    }

    /// The scalar `V·Ṽ`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &Versor) -> Versor {
        Versor::new(self.v.gp(&other.v)).expect("product of versors is a versor")
    }

    /// `V x Ṽ / (V Ṽ)`.
    pub fn conjugate(&self, x: &Multivector) -> Multivector {
        let out = self.v.gp(x).gp(&self.rev);
        if self.norm == 1.0 {
            out
        } else {
            out.scale(1.0 / self.norm)
        }
    }
}

/// Free-function form of [`Versor::conjugate`].
pub fn versor_conjugate(r: &Versor, x: &Multivector) -> Multivector {
    r.conjugate(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> Multivector {
        Multivector::basis(i)
    }

    #[test]
    fn generator_squares() {
        assert_eq!(e(E1).gp(&e(E1)), Multivector::scalar(1.0));
        assert_eq!(e(E2).gp(&e(E2)), Multivector::scalar(1.0));
        for i in [NBAR_PLUS, NBAR_MINUS, NBAR_TIMES, N_PLUS, N_MINUS, N_TIMES] {
            assert_eq!(e(i).gp(&e(i)), Multivector::zero(), "generator {i}");
        }
    }

    #[test]
    fn witt_pair_product() {
        let p = e(NBAR_PLUS).gp(&e(N_PLUS));
        let mut expected = Multivector::scalar(-1.0);
        expected.set((1 << NBAR_PLUS) | (1 << N_PLUS), 1.0);
        assert_eq!(p, expected);
        // n₊ n̄₊ = −1 − n̄₊∧n₊
        let q = e(N_PLUS).gp(&e(NBAR_PLUS));
        assert_eq!(q.scalar_part(), -1.0);
        assert_eq!(q.get((1 << NBAR_PLUS) | (1 << N_PLUS)), -1.0);
    }

    #[test]
    fn signature_is_five_three() {
        assert_eq!(BasisConvention::signature(), (5, 3));
    }

    #[test]
    fn wedge_basics() {
        assert_eq!(e(E1).wedge(&e(E1)), Multivector::zero());
        assert_eq!(e(E1).wedge(&e(E2)), Multivector::blade(0b11000, 1.0));
        assert_eq!(e(E2).wedge(&e(E1)), Multivector::blade(0b11000, -1.0));
    }

    #[test]
    fn reverse_signs() {
        assert_eq!(Multivector::scalar(5.0).reverse(), Multivector::scalar(5.0));
        let b = e(E1).wedge(&e(E2));
        assert_eq!(b.reverse(), b.scale(-1.0));
    }

    #[test]
    fn pseudoscalar_squares_to_minus_one() {
        let i = Multivector::pseudoscalar();
        assert_eq!(i.gp(&i), Multivector::scalar(-1.0));
        assert_eq!(double_dual_sign(), -1.0);
        let d = i.dual();
        assert_eq!(d, Multivector::scalar(1.0));
    }

    #[test]
    fn inner_of_vectors_is_the_form() {
        for i in 0..DIM {
            for j in 0..DIM {
                let got = e(i).inner(&e(j));
                assert_eq!(got, Multivector::scalar(BasisConvention::form(i, j)));
            }
        }
    }

    #[test]
    fn versor_rejects_null_element() {
        let v = e(NBAR_PLUS);
        assert!(matches!(
            Versor::new(v),
            Err(CliffordError::NonInvertible { .. })
        ));
        assert!(Versor::new(Multivector::zero()).is_err());
    }

    #[test]
    fn identity_versor_is_neutral() {
        let mut m = Multivector::zero();
        for k in 0..BLADES {
            m.set(k, (k as f64 * 0.37).sin());
        }
        assert_eq!(Versor::identity().conjugate(&m), m);
    }

    #[test]
    fn debug_lists_terms() {
        let m = &Multivector::scalar(2.0) + &Multivector::basis(E1);
        assert_eq!(format!("{m:?}"), "2 + 1·e₁");
    }
}
