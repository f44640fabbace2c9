#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use rug::{Float, Rational};
use sppfix_core::certify::{certified_bits, cone_vector_estimate, proximity2, upper_bound_scspp};
use sppfix_core::frontends::{back_button_to_spp, is_strict, ppda_to_spp, BackButtonModel, Ppda, PpdaRule};
use sppfix_core::iterate::{dnm_budget, dnm_run, kleene_run, newton_run, newton_step, tangent_step, StopRule};
use sppfix_core::{
    catalog, clean, parse_system, reduce_to_quadratic, scc_decompose, BinaryFloat, ExactRational, Field, Polynomial,
    Scalar, SppSystem,
};

use common::*;

fn random_point(seed: u64, n: usize, hi: u32) -> Vec<Rational> {
    let mut r = rng(seed);
    (0..n).map(|_| Rational::from((r.gen_range(0..=hi * 64), 64))).collect()
}

fn leq_all(a: &[Rational], b: &[Rational]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eval_is_monotone(seed in any::<u64>(), n in 1usize..=5) {
        let sys = probabilistic(&mut rng(seed), n, 3);
        let e = ExactRational::default();
        let x = random_point(seed ^ 1, n, 1);
        let dx = random_point(seed ^ 2, n, 1);
        let y: Vec<Rational> = x.iter().zip(&dx).map(|(a, b)| Rational::from(a + b)).collect();
        prop_assert!(leq_all(&sys.eval(&e, &x).unwrap(), &sys.eval(&e, &y).unwrap()));
    }

    #[test]
    fn jacobian_matches_central_differences(seed in any::<u64>(), n in 1usize..=5) {
        let sys = probabilistic(&mut rng(seed), n, 3);
        let f = BinaryFloat::new(256);
        let x: Vec<Float> = random_point(seed ^ 3, n, 1).iter().map(|v| f.from_rational(v)).collect();
        let jac = sys.jacobian_at(&f, &x).unwrap();
        let h = f.from_rational(&Rational::from((1, 1u64 << 30)));
        let two_h = h.add(&h);
        for j in 0..n {
            let mut up = x.clone();
            let mut down = x.clone();
            up[j] = up[j].add(&h);
            down[j] = down[j].sub(&h);
            let fu = sys.eval(&f, &up).unwrap();
            let fd = sys.eval(&f, &down).unwrap();
            for i in 0..n {
                let approx = fu[i].sub(&fd[i]).div(&two_h).to_f64();
                let exact = jac.get(i, j).to_f64();
                prop_assert!((approx - exact).abs() <= 1e-6 * exact.abs().max(1.0), "({i},{j}): {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn cleaning_is_sound(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let base = probabilistic(&mut r, n, 2);
        // Drop about half of the constants so that some components may die.
        let eqs: Vec<Polynomial> = base
            .equations()
            .iter()
            .map(|p| {
                let c = if r.gen_bool(0.5) { p.constant_term().clone() } else { Rational::new() };
                Polynomial::from_terms(c, p.monomials().iter().cloned())
            })
            .collect();
        let sys = SppSystem::new(base.variables().to_vec(), eqs);
        let cleaned = clean(&sys);
        let kappa = kleene_exact(&sys, n);
        for &i in &cleaned.removed {
            prop_assert_eq!(&kappa[i], &Rational::new());
        }
        let k2 = kleene_exact(&cleaned.system, cleaned.system.len());
        prop_assert!(k2.iter().all(|v| *v > 0));
        for (new, &old) in cleaned.kept.iter().enumerate() {
            prop_assert!(kappa[old] > 0, "kept {} is zero", new);
        }
    }

    #[test]
    fn sccs_match_transitive_closure(seed in any::<u64>(), n in 1usize..=6) {
        let sys = probabilistic(&mut rng(seed), n, 2);
        let d = scc_decompose(&sys);
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            for k in sys.dependencies(i) {
                reach[i][k] = true;
            }
        }
        for m in 0..n {
            for i in 0..n {
                for k in 0..n {
                    if reach[i][m] && reach[m][k] {
                        reach[i][k] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                let same = i == k || (reach[i][k] && reach[k][i]);
                prop_assert_eq!(d.scc_of[i] == d.scc_of[k], same);
            }
            let s = d.scc_of[i];
            prop_assert_eq!(d.sccs[s].nontrivial, d.sccs[s].vars.len() > 1 || reach[i][i]);
        }
        // Depth: longest chain of distinct SCCs from a top SCC.
        let above = |s: usize| -> Vec<usize> {
            (0..d.len()).filter(|&t| t != s && reach[d.sccs[t].vars[0]][d.sccs[s].vars[0]]).collect()
        };
        for s in 0..d.len() {
            let expected = above(s).iter().map(|&t| d.depth[t] + 1).max().unwrap_or(0);
            prop_assert_eq!(d.depth[s], expected);
        }
        let covered: BTreeSet<usize> = d.sccs.iter().flat_map(|s| s.vars.iter().copied()).collect();
        prop_assert_eq!(covered.len(), n);
    }

    #[test]
    fn reduced_newton_is_dominated_by_lifted(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=3) {
        let sys = probabilistic(&mut rng(seed), n, 4);
        let red = reduce_to_quadratic(&sys);
        prop_assert!(red.reduced.is_quadratic());
        let e = ExactRational::default();
        let orig = newton_run(&sys, &e, &StopRule::iterations(k)).unwrap();
        let redt = newton_run(&red.reduced, &e, &StopRule::iterations(k)).unwrap();
        let idx = orig.steps().min(redt.steps());
        let lifted = red.lift(&orig.iterates[idx]);
        prop_assert!(leq_all(&redt.iterates[idx], &lifted));
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), n in 1usize..=5) {
        let sys = probabilistic(&mut rng(seed), n, 3);
        prop_assert_eq!(parse_system(&sys.to_dsl()).unwrap(), sys);
    }

    #[test]
    fn newton_sandwich(seed in any::<u64>(), n in 1usize..=4) {
        let sys = probabilistic(&mut rng(seed), n, 2);
        let e = ExactRational::default();
        let t = newton_run(&sys, &e, &StopRule::iterations(5)).unwrap();
        for w in t.iterates.windows(2) {
            let fx = sys.eval(&e, &w[0]).unwrap();
            prop_assert!(leq_all(&w[0], &fx));
            prop_assert!(leq_all(&fx, &w[1]));
        }
    }

    #[test]
    fn kleene_below_newton(seed in any::<u64>(), n in 1usize..=4) {
        let sys = probabilistic(&mut rng(seed), n, 2);
        let e = ExactRational::default();
        let kl = kleene_run(&sys, &e, &StopRule::iterations(5)).unwrap();
        let nt = newton_run(&sys, &e, &StopRule::iterations(5)).unwrap();
        for k in 0..=nt.steps() {
            prop_assert!(leq_all(&kl.iterates[k], &nt.iterates[k]));
        }
    }

    #[test]
    fn fixed_points_are_stationary(seed in any::<u64>(), n in 1usize..=4) {
        let sys = strongly_connected(&mut rng(seed), n, 1);
        let e = ExactRational::default();
        let mu = newton_step(&sys, &e, &e.zeros(n)).unwrap();
        prop_assert_eq!(&sys.eval(&e, &mu).unwrap(), &mu);
        prop_assert_eq!(&newton_step(&sys, &e, &mu).unwrap(), &mu);
        prop_assert_eq!(&tangent_step(&sys, &e, &mu).unwrap(), &mu);
    }

    #[test]
    fn tangent_between_newton_and_oracle(seed in any::<u64>(), n in 1usize..=3, k in 0usize..=2) {
        let sys = strongly_connected(&mut rng(seed), n, 2);
        let e = ExactRational::default();
        let x = newton_run(&sys, &e, &StopRule::iterations(k)).unwrap().last().to_vec();
        let ne = newton_step(&sys, &e, &x).unwrap();
        // A critical system makes the tangent at the fixed point singular.
        let ta = match tangent_step(&sys, &e, &x) {
            Ok(v) => v,
            Err(sppfix_core::Error::SingularSystem { .. }) => return Ok(()),
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        prop_assert!(leq_all(&ne, &ta));
        let f = BinaryFloat::new(256);
        let oracle = newton_run(&sys, &f, &StopRule::iterations(60)).unwrap();
        let k = oracle.steps();
        let upper = if k == 0 {
            return Ok(());
        } else {
            upper_bound_scspp(&sys, &f, &oracle.iterates[k - 1], &oracle.iterates[k]).unwrap().upper
        };
        let upper: Vec<Rational> = upper.iter().map(|v| v.to_rational().unwrap()).collect();
        prop_assert!(leq_all(&ta, &upper));
    }

    #[test]
    fn dnm_on_one_scc_is_newton(seed in any::<u64>(), n in 1usize..=3, i in 1u64..=3) {
        let sys = strongly_connected(&mut rng(seed), n, 2);
        let e = ExactRational::default();
        let d = dnm_run(&sys, &e, i).unwrap();
        let t = newton_run(&sys, &e, &StopRule::iterations(i as usize)).unwrap();
        if t.steps() == i as usize {
            prop_assert_eq!(&d.rho[..], t.last());
        }
    }

    #[test]
    fn dnm_step_count(seed in any::<u64>(), blocks in 1usize..=4, i in 1u64..=2) {
        let sys = dag_shaped(&mut rng(seed), blocks);
        let f = BinaryFloat::new(256);
        let r = dnm_run(&sys, &f, i).unwrap();
        let b = dnm_budget(&sys, i);
        prop_assert_eq!(rug::Integer::from(r.total_steps), b.exact.clone());
        prop_assert!(b.exact <= b.bound);
    }

    #[test]
    fn proximity_is_sound_in_one_dimension(a in 1u32..=20, b in 0u32..=20, c in 1u32..=20, k in 1usize..=10) {
        // a X^2 + b X + c with a + b + c = 1 has roots 1 and c/a.
        let total = a + b + c;
        let q = |v: u32| Rational::from((v, total));
        let text = format!("X = {}*X^2 + {}*X + {}", q(a), q(b), q(c));
        let sys = parse_system(&text).unwrap();
        let mu = Rational::from((c, a)).min(Rational::from(1));
        let e = ExactRational::default();
        let t = newton_run(&sys, &e, &StopRule::iterations(k)).unwrap();
        let s = t.steps();
        prop_assume!(s >= 1);
        let cert = upper_bound_scspp(&sys, &e, &t.iterates[s - 1], &t.iterates[s]).unwrap();
        prop_assert!(cert.lower[0] <= mu && mu <= cert.upper[0]);
    }

    #[test]
    fn proximity_is_sound_at_one(seed in any::<u64>(), n in 1usize..=3) {
        // Mass exactly one: 1 is a fixed point. Use it as reference only when
        // a long Newton run agrees with it.
        let mut r = rng(seed);
        let base = strongly_connected(&mut r, n, 2);
        let eqs: Vec<Polynomial> = base
            .equations()
            .iter()
            .map(|p| {
                let sum: Rational = p.coefficients().fold(Rational::new(), |acc, c| acc + c);
                let slack = Rational::from(1) - sum;
                Polynomial::from_terms(p.constant_term() + slack , p.monomials().iter().cloned())
            })
            .collect();
        let sys = SppSystem::new(base.variables().to_vec(), eqs);
        let f = BinaryFloat::new(512);
        let long = newton_run(&sys, &f, &StopRule::iterations(200)).unwrap();
        let tol = Rational::from((1, 1u128 << 100));
        let at_one = long.last().iter().all(|v| (Rational::from(1) - v.to_rational().unwrap()).abs() < tol);
        prop_assume!(at_one);
        let t = newton_run(&sys, &f, &StopRule::iterations(12)).unwrap();
        let s = t.steps();
        prop_assume!(s >= 1);
        let cert = upper_bound_scspp(&sys, &f, &t.iterates[s - 1], &t.iterates[s]).unwrap();
        // Float iterates may overshoot by rounding noise; the upper bound may not.
        let noise = Rational::from(1) + Rational::from((1, 1u128 << 120)).square().square();
        for (l, u) in cert.lower.iter().zip(&cert.upper) {
            prop_assert!(l.to_rational().unwrap() <= noise && u.to_rational().unwrap() >= 1);
        }
    }

    #[test]
    fn certified_bits_antitone_in_upper(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let lower: Vec<Rational> = (0..n).map(|_| Rational::from((r.gen_range(1..=100), 100))).collect();
        let upper: Vec<Rational> = lower.iter().map(|l| l + Rational::from((r.gen_range(0..=50), 1000)) ).collect();
        let before = certified_bits(&lower, &upper, 4096).unwrap();
        let j = r.gen_range(0..n);
        let mut tighter = upper.clone();
        tighter[j] = &lower[j] + Rational::from(&upper[j] - &lower[j]) / 2 ;
        prop_assert!(certified_bits(&lower, &tighter, 4096).unwrap() >= before);
    }

    #[test]
    fn cone_vectors_are_positive(seed in any::<u64>(), n in 1usize..=4, k in 0usize..=6) {
        let sys = strongly_connected(&mut rng(seed), n, 2);
        let f = BinaryFloat::new(256);
        let t = newton_run(&sys, &f, &StopRule::iterations(k)).unwrap();
        let c = cone_vector_estimate(&sys, &f, t.last()).unwrap();
        prop_assert!(c.vector.iter().all(|v| v.sign() == std::cmp::Ordering::Greater));
    }

    #[test]
    fn back_button_translation_has_mass_one(seed in any::<u64>(), pages in 1usize..=5) {
        let mut r = rng(seed);
        let names: Vec<String> = (0..pages).map(|i| format!("page{i}")).collect();
        let mut back = std::collections::BTreeMap::new();
        let mut links = std::collections::BTreeMap::new();
        for a in &names {
            let wb: u32 = r.gen_range(1..=10);
            let ws: Vec<u32> = names.iter().map(|_| if r.gen_bool(0.5) { r.gen_range(1..=10) } else { 0 }).collect();
            let total = wb + ws.iter().sum::<u32>();
            back.insert(a.clone(), Rational::from((wb, total)));
            let row: std::collections::BTreeMap<String, Rational> = names
                .iter()
                .zip(&ws)
                .filter(|(_, w)| **w > 0)
                .map(|(b, w)| (b.clone(), Rational::from((*w, total))))
                .collect();
            links.insert(a.clone(), row);
        }
        let model = BackButtonModel { pages: names, back, links };
        let sys = back_button_to_spp(&model).unwrap();
        prop_assert!(sys.bounded_by_one());
        let e = ExactRational::default();
        let ones = vec![Rational::from(1); pages];
        prop_assert!(leq_all(&sys.eval(&e, &ones).unwrap(), &ones));
        prop_assert!(is_strict(&model.to_ppda()));
        prop_assert_eq!(BackButtonModel::from_json(&model.to_json()).unwrap(), model);
    }

    #[test]
    fn ppda_legend_is_a_bijection(seed in any::<u64>(), ns in 1usize..=3, na in 1usize..=2) {
        let mut r = rng(seed);
        let states: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
        let alphabet: Vec<String> = ["A", "B"][..na].iter().map(|s| s.to_string()).collect();
        let mut rules = Vec::new();
        for p in &states {
            for x in &alphabet {
                let count = r.gen_range(1..=3);
                let ws: Vec<u32> = (0..count).map(|_| r.gen_range(1..=5)).collect();
                let total: u32 = ws.iter().sum();
                for w in ws {
                    let len = r.gen_range(0..=2);
                    rules.push(PpdaRule {
                        state: p.clone(),
                        symbol: x.clone(),
                        target: states[r.gen_range(0..ns)].clone(),
                        push: (0..len).map(|_| alphabet[r.gen_range(0..na)].clone()).collect(),
                        prob: Rational::from((w, total)),
                    });
                }
            }
        }
        let ppda = Ppda { states, alphabet, rules };
        let tr = ppda_to_spp(&ppda).unwrap();
        prop_assert_eq!(tr.legend.len(), tr.system.len());
        let triples: BTreeSet<_> = tr.legend.iter().chain(&tr.removed).collect();
        prop_assert_eq!(triples.len(), ns * na * ns);
        let names: BTreeSet<_> = tr.system.variables().iter().collect();
        prop_assert_eq!(names.len(), tr.system.len());
        prop_assert!(sppfix_core::is_clean(&tr.system));
        prop_assert_eq!(Ppda::from_json(&ppda.to_json()).unwrap(), ppda);
    }
}

/// More Newton steps never loosen the proximity certificate on the reference
/// systems. The precision is high enough that no step reaches rounding noise.
#[test]
fn certificates_tighten_with_more_steps() {
    let f = BinaryFloat::new(1 << 16);
    for sys in [catalog::back_button(), catalog::ellipse_parabola(), catalog::critical()] {
        let t = newton_run(&sys, &f, &StopRule::iterations(20)).unwrap();
        let c_min = sys.coefficient_stats().unwrap().c_min;
        let mut last = 0;
        for k in 5..=t.steps() {
            let cert = proximity2(&f, &c_min, sys.len(), &t.iterates[k - 1], &t.iterates[k]).unwrap();
            assert!(cert.certified_bits >= last, "{} at k={k}", sys.variables()[0]);
            last = cert.certified_bits;
        }
    }
}
