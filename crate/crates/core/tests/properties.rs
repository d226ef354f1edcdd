use gpsmbo_core::distance::{shd1, shd2, ted, distance_triple};
use gpsmbo_core::expr::{
    crossover_subtree_capped, format_sexpr, mutate_subtree, parse_sexpr, ramped_half_and_half, ExprTree,
    GeneratorParams, MutationParams, OperatorSet,
};
use gpsmbo_core::kriging::KernelWeights;
use gpsmbo_core::optim::{direct_minimize, nelder_mead, BoxBounds};
use gpsmbo_core::stats::midranks;
use gpsmbo_core::ProblemInstance;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tree(seed: u64) -> ExprTree {
    ramped_half_and_half(&OperatorSet::full(3), &GeneratorParams::default(), &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #[test]
    fn sexpr_round_trip(seed in any::<u64>()) {
        let t = tree(seed);
        let text = format_sexpr(&t);
        prop_assert_eq!(parse_sexpr(&text, &OperatorSet::full(3)).unwrap(), t);
    }

    #[test]
    fn distances_symmetric_and_bounded(a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (tree(a), tree(b));
        prop_assert_eq!(ted(&a, &b), ted(&b, &a));
        prop_assert_eq!(shd1(&a, &b), shd1(&b, &a));
        prop_assert_eq!(shd2(&a, &b), shd2(&b, &a));
        let (s1, s2) = (shd1(&a, &b), shd2(&a, &b));
        prop_assert!((0.0..=1.0).contains(&s1));
        prop_assert!(s2 <= s1);
        prop_assert!(ted(&a, &b) <= a.node_count() + b.node_count());
    }

    #[test]
    fn ted_triangle(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (tree(a), tree(b), tree(c));
        prop_assert!(ted(&a, &c) <= ted(&a, &b) + ted(&b, &c));
    }

    #[test]
    fn phd_in_unit_interval(a in any::<u64>(), b in any::<u64>()) {
        let p = ProblemInstance::builtin("sine-cosine").unwrap();
        let ops = &p.spec.ops;
        let g = GeneratorParams::default();
        let ta = ramped_half_and_half(ops, &g, &mut ChaCha8Rng::seed_from_u64(a));
        let tb = ramped_half_and_half(ops, &g, &mut ChaCha8Rng::seed_from_u64(b));
        let d = distance_triple(&ta, &tb, &p.data.x);
        prop_assert!((0.0..=1.0).contains(&d.phd));
        prop_assert_eq!(distance_triple(&ta, &ta, &p.data.x).phd, 0.0);
    }

    #[test]
    fn variation_respects_depth_and_arity(a in any::<u64>(), b in any::<u64>(), s in any::<u64>()) {
        let ops = OperatorSet::full(3);
        let (a, b) = (tree(a), tree(b));
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (c, d) = crossover_subtree_capped(&a, &b, 4, 32, &mut rng);
        let m = mutate_subtree(&c, &ops, &MutationParams::default(), &mut rng);
        for t in [&c, &d, &m] {
            prop_assert!(t.depth() <= 4);
            prop_assert!(t.is_consistent(Some(&ops)));
        }
    }

    #[test]
    fn normalized_weights_sum_to_one(b in prop::array::uniform3(1e-4f64..100.0)) {
        let w = KernelWeights { beta: b, nugget: 1e-6 }.normalized();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn midranks_sum(values in prop::collection::vec(0u8..6, 1..40)) {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        let n = v.len() as f64;
        let r = midranks(&v);
        prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        for i in 0..v.len() {
            for j in 0..v.len() {
                if v[i] < v[j] { prop_assert!(r[i] < r[j]); }
                if v[i] == v[j] { prop_assert_eq!(r[i], r[j]); }
            }
        }
    }

    #[test]
    fn optimizers_stay_in_bounds(cx in -2.0f64..2.0, cy in -2.0f64..2.0, budget in 1usize..200) {
        let bounds = BoxBounds::uniform(2, -1.0, 1.0).unwrap();
        let f = |x: &[f64]| (x[0] - cx).powi(2) + (x[1] - cy).powi(2);
        let d = direct_minimize(f, &bounds, budget);
        prop_assert!(bounds.contains(&d.x));
        prop_assert!(d.evaluations <= budget);
        let n = nelder_mead(f, &d.x, &bounds, budget);
        prop_assert!(bounds.contains(&n.x));
        prop_assert!(n.value <= d.value);
    }
}
