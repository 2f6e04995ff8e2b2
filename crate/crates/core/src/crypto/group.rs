use std::fmt::Debug;

use rand::Rng;

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A cyclic group of prime order written additively: scalars act on
/// elements, elements add and subtract.
pub trait CyclicGroup: Debug + Clone + Send + Sync {
    type Element: Copy + Eq + Debug + Send + Sync;

    /// Prime order `q` of the group; scalars live in `[0, q)`.
    fn order(&self) -> u64;
    fn generator(&self) -> Self::Element;
    fn identity(&self) -> Self::Element;
    /// `k · e`
    fn scale(&self, k: u64, e: Self::Element) -> Self::Element;
    fn add(&self, a: Self::Element, b: Self::Element) -> Self::Element;
    fn sub(&self, a: Self::Element, b: Self::Element) -> Self::Element;

    /// `k · Z` for the generator `Z`.
    fn base(&self, k: u64) -> Self::Element {
        self.scale(k, self.generator())
    }

    fn scalar_mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.order())
    }

    fn scalar_add(&self, a: u64, b: u64) -> u64 {
        add_mod(a, b, self.order())
    }

    fn reduce(&self, k: u64) -> u64 {
        k % self.order()
    }

    /// Uniform nonzero scalar.
    fn random_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(1..self.order())
    }
}

/// Prime-order subgroup of the multiplicative integers modulo `p`.
///
/// Scalar action is modular exponentiation and the group law is modular
/// multiplication, so `k · Z` is `g^k mod p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchnorrGroup {
    p: u64,
    q: u64,
    g: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModElement(pub u64);

impl SchnorrGroup {
    /// `p = 607`, `q = 101`, generator `64` of the order-101 subgroup.
    /// Small enough for exhaustive tests.
    pub const fn toy() -> Self {
        Self { p: 607, q: 101, g: 64 }
    }

    /// Quadratic residues modulo the safe prime `p = 2q + 1` just below 2^62.
    pub const fn standard() -> Self {
        Self {
            p: 4_611_686_018_427_377_339,
            q: 2_305_843_009_213_688_669,
            g: 4,
        }
    }

    /// Checks that `g` generates a subgroup of order exactly `q` and that `q | p - 1`.
    /// `q` prime is taken on trust.
    pub fn new(p: u64, q: u64, g: u64) -> Option<Self> {
        if q < 2 || !(3..1 << 63).contains(&p) || !(p - 1).is_multiple_of(q) {
            return None;
        }
        let g = g % p;
        if g <= 1 || pow_mod(g, q, p) != 1 {
            return None;
        }
        Some(Self { p, q, g })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn inverse(&self, a: u64) -> u64 {
        // the group has order q, so a^(q-1) = a^-1
        pow_mod(a, self.q - 1, self.p)
    }
}

impl CyclicGroup for SchnorrGroup {
    type Element = ModElement;

    fn order(&self) -> u64 {
        self.q
    }

    fn generator(&self) -> ModElement {
        ModElement(self.g)
    }

    fn identity(&self) -> ModElement {
        ModElement(1)
    }

    fn scale(&self, k: u64, e: ModElement) -> ModElement {
        ModElement(pow_mod(e.0, k % self.q, self.p))
    }

    fn add(&self, a: ModElement, b: ModElement) -> ModElement {
        ModElement(mul_mod(a.0, b.0, self.p))
    }

    fn sub(&self, a: ModElement, b: ModElement) -> ModElement {
        ModElement(mul_mod(a.0, self.inverse(b.0), self.p))
    }
}

/// The additive group of integers modulo a prime `q`, generator 1.
///
/// Offers no hardness at all; it exists as a second, structurally different
/// realization for cross-checking the protocol algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdditiveGroup {
    q: u64,
}

impl AdditiveGroup {
    pub const fn new(q: u64) -> Self {
        Self { q }
    }
}

impl CyclicGroup for AdditiveGroup {
    type Element = u64;

    fn order(&self) -> u64 {
        self.q
    }

    fn generator(&self) -> u64 {
        1
    }

    fn identity(&self) -> u64 {
        0
    }

    fn scale(&self, k: u64, e: u64) -> u64 {
        mul_mod(k, e, self.q)
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        add_mod(a, b, self.q)
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        add_mod(a, self.q - b % self.q, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_laws<G: CyclicGroup>(g: &G) {
        let q = g.order();
        let z = g.generator();
        assert_ne!(z, g.identity());
        assert_eq!(g.scale(q, z), g.identity());
        for a in 0..q {
            for b in 0..q {
                assert_eq!(g.add(g.base(a), g.base(b)), g.base(g.scalar_add(a, b)));
                assert_eq!(g.scale(a, g.base(b)), g.base(g.scalar_mul(a, b)));
                assert_eq!(g.sub(g.base(a), g.base(b)), g.base(g.scalar_add(a, q - b)));
            }
        }
    }

    #[test]
    fn toy_group_laws_exhaustive() {
        check_laws(&SchnorrGroup::toy());
    }

    #[test]
    fn additive_group_laws_exhaustive() {
        check_laws(&AdditiveGroup::new(101));
    }

    #[test]
    fn toy_generator_has_order_q() {
        let g = SchnorrGroup::toy();
        let mut seen = std::collections::BTreeSet::new();
        for k in 0..101 {
            seen.insert(g.base(k));
        }
        assert_eq!(seen.len(), 101);
    }

    #[test]
    fn standard_group_is_consistent() {
        let g = SchnorrGroup::standard();
        assert!(SchnorrGroup::new(g.modulus(), g.order(), 4).is_some());
        assert_eq!(g.base(g.order()), g.identity());
        let a = 123_456_789_012_345;
        let b = 987_654_321;
        assert_eq!(g.add(g.base(a), g.base(b)), g.base(g.scalar_add(a, b)));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SchnorrGroup::new(607, 101, 1).is_none());
        assert!(SchnorrGroup::new(607, 100, 64).is_none());
        // 2 does not lie in the order-101 subgroup
        assert!(SchnorrGroup::new(607, 101, 2).is_none());
    }
}
