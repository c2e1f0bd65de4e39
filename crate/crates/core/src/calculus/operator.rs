//! The generator `A_F = ∫dζ F(u(ζ)) δ/δu(ζ)` on differential polynomials.
//!
//! Integrating the Dirac kernel leaves the prolongation formula
//! `A_F G = Σ_k D_xᵏ(F) · ∂G/∂u_k`, which is what [`apply_a`] computes.

use crate::error::{Error, Result};

use super::poly::DiffPoly;

/// Caches `D_xᵏ F` for repeated applications of the same generator.
#[derive(Debug, Clone)]
pub struct Generator {
    derivatives: Vec<DiffPoly>,
}

impl Generator {
    pub fn new(f: &DiffPoly) -> Self {
        Self {
            derivatives: vec![f.clone()],
        }
    }

    pub fn rhs(&self) -> &DiffPoly {
        &self.derivatives[0]
    }

    fn derivative(&mut self, k: usize) -> &DiffPoly {
        while self.derivatives.len() <= k {
            let next = self.derivatives.last().expect("non-empty").total_derivative();
            self.derivatives.push(next);
        }
        &self.derivatives[k]
    }

    pub fn apply(&mut self, g: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for k in g.variables() {
            let dg = g.partial(k);
            let dkf = self.derivative(k as usize);
            out = &out + &(dkf * &dg);
        }
        out
    }
}

/// `A_F g`.
pub fn apply_a(f: &DiffPoly, g: &DiffPoly) -> DiffPoly {
    Generator::new(f).apply(g)
}

/// `Aⁿu` with `A⁰u = u`.
pub fn a_power_u(f: &DiffPoly, n: i64) -> Result<DiffPoly> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!(
            "power of the generator must be non-negative, got {n}"
        )));
    }
    Ok(a_powers_u(f, n as usize).pop().expect("non-empty"))
}

/// `[u, Au, …, Aⁿu]`.
pub fn a_powers_u(f: &DiffPoly, n: usize) -> Vec<DiffPoly> {
    let mut gen = Generator::new(f);
    let mut out = vec![DiffPoly::u()];
    for _ in 0..n {
        let next = gen.apply(out.last().expect("non-empty"));
        out.push(next);
    }
    out
}

/// Whether `map(g·h) - map(g)·h - g·map(h)` vanishes exactly.
pub fn derivation_check_with(
    mut map: impl FnMut(&DiffPoly) -> DiffPoly,
    g: &DiffPoly,
    h: &DiffPoly,
) -> bool {
    let gh = g * h;
    let lhs = map(&gh);
    let rhs = &(&map(g) * h) + &(g * &map(h));
    (&lhs - &rhs).is_zero()
}

/// Leibniz law `A(g·h) = (Ag)·h + g·(Ah)` for the generator of `f`.
pub fn derivation_check(f: &DiffPoly, g: &DiffPoly, h: &DiffPoly) -> bool {
    let mut gen = Generator::new(f);
    derivation_check_with(|p| gen.apply(p), g, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::poly::rational;
    use crate::calculus::syntax::parse;

    fn p(s: &str) -> DiffPoly {
        parse(s).unwrap()
    }

    /// Hand-rolled oracle for the inviscid Burgers generator acting on a
    /// polynomial in u and u_1 only: chain rule with `A u = -u u_1` and
    /// `A u_1 = D_x(-u u_1) = -u_1² - u u_2`.
    #[test]
    fn inviscid_burgers_second_power() {
        let f = p("-u_0*u_1");
        let a2 = apply_a(&f, &f);
        assert_eq!(a2, p("2*u_0*u_1^2 + u_0^2*u_2"));
        assert_eq!(a_power_u(&f, 2).unwrap(), a2);
    }

    #[test]
    fn heat_generator_shifts_orders() {
        let f = p("u_2");
        assert_eq!(apply_a(&f, &DiffPoly::u()), p("u_2"));
        assert_eq!(a_power_u(&f, 2).unwrap(), p("u_4"));
        assert_eq!(a_power_u(&f, 5).unwrap(), p("u_10"));
    }

    #[test]
    fn a_on_u_is_f() {
        for s in ["u_0^3 - 2/7*u_1*u_4", "1/10*u_2 - u_0*u_1", "5"] {
            let f = p(s);
            assert_eq!(apply_a(&f, &DiffPoly::u()), f);
            assert_eq!(a_power_u(&f, 1).unwrap(), f);
        }
        assert_eq!(a_power_u(&p("u_1"), 0).unwrap(), DiffPoly::u());
        assert!(a_power_u(&p("u_1"), -1).is_err());
    }

    #[test]
    fn viscous_burgers_second_power() {
        // F = νu₂ - u u₁ with ν = 1/10, by hand:
        // A²u = ν D²F - u DF - u₁ F = ν²u₄ - 2ν u u₃ - 4ν u₁u₂ + 2u u₁² + u²u₂
        let nu = rational(1, 10);
        let f = &DiffPoly::var(2).scale(&nu) - &p("u_0*u_1");
        let expected = p("1/100*u_4 - 1/5*u_0*u_3 - 2/5*u_1*u_2 + 2*u_0*u_1^2 + u_0^2*u_2");
        assert_eq!(a_power_u(&f, 2).unwrap(), expected);
    }

    #[test]
    fn leibniz_examples() {
        assert!(derivation_check(&p("u_2"), &p("u_0"), &p("u_1")));
        assert!(derivation_check(&p("-u_0*u_1"), &p("u_0"), &p("u_0")));
        let f = p("-u_0*u_1");
        let au2 = apply_a(&f, &p("u_0^2"));
        assert_eq!(au2, &p("2*u_0") * &f);
    }

    #[test]
    fn non_derivation_is_detected() {
        // A broken map that also adds F to every input.
        let f = p("-u_0*u_1");
        let mut gen = Generator::new(&f);
        let broken = |g: &DiffPoly| &gen.apply(g) + &f;
        assert!(!derivation_check_with(broken, &p("u_0"), &p("u_1")));
    }
}
