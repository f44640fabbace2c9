use std::cmp::Ordering;

use super::{check_guard, clamp_negatives, residual_norm, Driver, IterationTrace, Method, StopRule};
use crate::compiled::{CompiledSystem, Matrix};
use crate::certify::require_quadratic_scspp;
use crate::error::{Error, Result};
use crate::linalg::{solve, SolveNote};
use crate::scalar::{Field, Scalar};
use crate::system::SppSystem;

/// `h_i(x_rest)`: the least nonnegative root of `f_i(X_i, x_rest) - X_i`.
///
/// `x_rest` lists the other components in order, without component `i`.
pub fn surface_height<F: Field>(sys: &SppSystem, field: &F, i: usize, x_rest: &[F::Elem]) -> Result<F::Elem> {
    require_quadratic_scspp(sys)?;
    if i >= sys.len() {
        return Err(Error::DimensionMismatch {
            expected: sys.len(),
            actual: i + 1,
        });
    }
    sys.check_dim(x_rest.len() + 1)?;
    let mut x = x_rest.to_vec();
    x.insert(i, field.zero());
    height(field, &sys.compile(field), i, &x)
}

/// `a X^2 + (b - 1) X + c = 0`, least nonnegative root. The square root is
/// rounded up, so the root is never overestimated.
pub(crate) fn height<F: Field>(field: &F, c: &CompiledSystem<F::Elem>, i: usize, x: &[F::Elem]) -> Result<F::Elem> {
    let (a, b, k) = c.univariate(i, x)?;
    let big_b = b.sub(&field.one());
    if k.is_zero() && big_b.sign() != Ordering::Greater {
        return Ok(field.zero());
    }
    if a.is_zero() {
        // (b - 1) X + c = 0
        if big_b.sign() == Ordering::Less {
            return Ok(k.div(&big_b.neg()));
        }
        return if k.is_zero() { Ok(field.zero()) } else { Err(Error::NoRealRoot { component: i }) };
    }
    if big_b.sign() == Ordering::Greater {
        // Both roots are negative.
        return if k.is_zero() { Ok(field.zero()) } else { Err(Error::NoRealRoot { component: i }) };
    }
    let four = field.from_u64(4);
    let mut disc = big_b.mul(&big_b).sub(&four.mul(&a).mul(&k));
    if disc.sign() == Ordering::Less {
        match field.noise_floor() {
            Some(eps) if disc > eps.neg() => disc = field.zero(),
            _ => return Err(Error::NoRealRoot { component: i }),
        }
    }
    // 2c / (|B| + sqrt(D)) avoids the cancellation in (-B - sqrt(D)) / 2a.
    let denom = big_b.abs_val().add(&field.sqrt_up(&disc));
    if denom.is_zero() {
        return Ok(field.zero());
    }
    Ok(field.from_u64(2).mul(&k).div(&denom))
}

/// `x >= 0` and `f(x) - x >= 0`. In float mode both comparisons tolerate
/// rounding noise. Always false unless `sys` is a clean, quadratic, strongly
/// connected system, the only case where this characterizes the region.
pub fn in_region<F: Field>(sys: &SppSystem, field: &F, x: &[F::Elem]) -> bool {
    if sys.check_dim(x.len()).is_err() || require_quadratic_scspp(sys).is_err() {
        return false;
    }
    let c = sys.compile(field);
    region_violation(field, &c, x, &c.eval(x)).is_none()
}

fn region_violation<F: Field>(field: &F, c: &CompiledSystem<F::Elem>, x: &[F::Elem], fx: &[F::Elem]) -> Option<usize> {
    let zero = c.zero();
    (0..x.len()).find(|&i| !field.leq_noise(zero, &x[i]) || !field.leq_noise(&x[i], &fx[i]))
}

/// One step of the tangent operator `Ta` at `x`.
pub fn tangent_step<F: Field>(sys: &SppSystem, field: &F, x: &[F::Elem]) -> Result<Vec<F::Elem>> {
    require_quadratic_scspp(sys)?;
    sys.check_dim(x.len())?;
    let c = sys.compile(field);
    let fx = c.eval(x);
    Ok(step_compiled(field, &c, x, &fx)?.0)
}

fn step_compiled<F: Field>(
    field: &F,
    c: &CompiledSystem<F::Elem>,
    x: &[F::Elem],
    fx: &[F::Elem],
) -> Result<(Vec<F::Elem>, SolveNote)> {
    if let Some(component) = region_violation(field, c, x, fx) {
        return Err(Error::RegionViolation { component });
    }
    let n = x.len();
    let one = field.one();
    let mut a = Matrix::filled(n, n, field.zero());
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let h = height(field, c, i, x)?;
        let mut pi = x.to_vec();
        pi[i] = h.clone();
        let grad = c.jacobian_row(i, &pi);
        let q = c.eval_row(i, &pi).sub(&h);
        for (j, g) in grad.iter().enumerate() {
            let v = if i == j { one.sub(g) } else { g.neg() };
            a.set(i, j, v);
        }
        // (e_i - J_i) d = q_i(π_i) + (1 - J_ii)(h_i - x_i)
        rhs.push(q.add(&one.sub(&grad[i]).mul(&h.sub(&x[i]))));
    }
    let (d, note) = solve(field, &a, &rhs)?;
    Ok((x.iter().zip(&d).map(|(v, dv)| v.add(dv)).collect(), note))
}

/// Iterates [`tangent_step`] from zero.
pub fn tangent_run<F: Field>(sys: &SppSystem, field: &F, stop: &StopRule) -> Result<IterationTrace<F::Elem>> {
    if stop.target_certified_bits.is_some() {
        return Err(Error::InvalidStopRule("certified bits are only available for Newton".into()));
    }
    require_quadratic_scspp(sys)?;
    let compiled = sys.compile(field);
    let driver = Driver::new(field, stop)?;
    let mut x = field.zeros(sys.len());
    let mut iterates: Vec<Vec<F::Elem>> = Vec::new();
    let mut residuals = Vec::new();
    let mut notes = Vec::new();
    for k in 0.. {
        let fx = compiled.eval(&x);
        residuals.push(residual_norm(compiled.zero(), &x, &fx));
        iterates.push(x);
        if let Some(reason) = driver.should_stop(k, residuals.last().unwrap()) {
            return Ok(IterationTrace {
                method: Method::Tangent,
                iterates,
                residuals,
                solver_notes: notes,
                stop_reason: reason,
                certificate: None,
            });
        }
        let cur = iterates.last().unwrap();
        let (mut next, note) = step_compiled(field, &compiled, cur, &fx)?;
        notes.push(note);
        clamp_negatives(field, &mut next, k + 1)?;
        check_guard(&driver.guard, &next, k + 1)?;
        if let Some(i) = cur.iter().zip(&next).position(|(a, b)| !field.leq_noise(a, b)) {
            return Err(Error::DivergenceSuspected {
                iteration: k + 1,
                reason: format!("tangent step decreased component {i}"),
            });
        }
        x = next;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::iterate::{newton_run, newton_step};
    use crate::scalar::{BinaryFloat, ExactRational};
    use rug::Rational;

    #[test]
    fn heights_of_the_two_quadrics() {
        let f = BinaryFloat::default();
        let sys = catalog::ellipse_parabola();
        let h1 = surface_height(&sys, &f, 0, &[f.zero()]).unwrap().to_f64();
        assert!((h1 - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        let h2 = surface_height(&sys, &f, 1, &[f.zero()]).unwrap().to_f64();
        assert!((h2 - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        let one = surface_height(&catalog::critical(), &f, 0, &[]).unwrap();
        assert_eq!(one, f.one());
    }

    #[test]
    fn exact_heights_never_overshoot() {
        let e = ExactRational::default();
        let sys = catalog::ellipse_parabola();
        let h1 = surface_height(&sys, &e, 0, &[Rational::new()]).unwrap();
        // q(h) >= 0 on [0, root]: 0.5 h^2 - h + 0.25 >= 0
        let q = Rational::from((1, 2)) * h1.clone() * h1.clone() - h1 + Rational::from((1, 4));
        assert!(q >= 0);
    }

    #[test]
    fn region_membership() {
        let e = ExactRational::default();
        let bb = catalog::back_button();
        assert!(in_region(&bb, &e, &e.zeros(3)));
        let out = vec![Rational::from((11, 10)), Rational::from(1), Rational::from(1)];
        assert!(!in_region(&bb, &e, &out));
        let t = newton_run(&bb, &e, &StopRule::iterations(4)).unwrap();
        assert!(t.iterates.iter().all(|x| in_region(&bb, &e, x)));
        let chain = catalog::worst_case_family(2);
        assert!(!in_region(&chain, &e, &e.zeros(2)));
    }

    #[test]
    fn tangent_dominates_newton() {
        let f = BinaryFloat::default();
        for sys in [catalog::back_button(), catalog::ellipse_parabola()] {
            let z = f.zeros(sys.len());
            let ne = newton_step(&sys, &f, &z).unwrap();
            let ta = tangent_step(&sys, &f, &z).unwrap();
            let mu = newton_run(&sys, &f, &StopRule::iterations(60)).unwrap();
            for j in 0..sys.len() {
                assert!(ne[j] <= ta[j]);
                assert!(ta[j] <= mu.last()[j]);
            }
        }
    }

    #[test]
    fn fixed_points_are_stationary() {
        let e = ExactRational::default();
        // Least fixed point (1/2, 1/2); the other one is (1, 1).
        let sys = crate::dsl::parse_system("X = 0.5*X*Y + 0.25*Y + 0.25\nY = 0.5*X*Y + 0.25*X + 0.25").unwrap();
        let half = vec![Rational::from((1, 2)); 2];
        assert_eq!(sys.eval(&e, &half).unwrap(), half);
        assert_eq!(tangent_step(&sys, &e, &half).unwrap(), half);
        assert_eq!(newton_step(&sys, &e, &half).unwrap(), half);
    }

    #[test]
    fn tangent_run_converges() {
        let f = BinaryFloat::default();
        let t = tangent_run(&catalog::back_button(), &f, &StopRule::iterations(8)).unwrap();
        let nt = newton_run(&catalog::back_button(), &f, &StopRule::iterations(8)).unwrap();
        for (a, b) in t.last().iter().zip(nt.last()) {
            assert!(a >= b);
        }
    }
}
