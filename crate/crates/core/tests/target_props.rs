use dfp_core::game::{expected_utility, is_pure_nash, ActionSpace, JointAction, MixedStrategy, StateBelief};
use dfp_core::target::{enumerate_pure_ne, make_world, task_utility, TargetWorld};
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
        }
        for i in k..items.len() {
            items.swap(k, i);
            go(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut out = Vec::new();
    go(&mut (0..n).collect(), 0, &mut out);
    out
}

/// Σ_i 1(no j ≠ i picks a_i)·‖x_i − θ_{a_i}‖⁻², as a plain double loop.
fn naive_utility(world: &TargetWorld, a: &[usize]) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        let mut alone = true;
        for j in 0..a.len() {
            if j != i && a[j] == a[i] {
                alone = false;
            }
        }
        if alone {
            let x = world.agents[i];
            let t = world.targets[a[i]];
            total += 1.0 / ((x[0] - t[0]).powi(2) + (x[1] - t[1]).powi(2));
        }
    }
    total
}

fn world_and_profile() -> impl Strategy<Value = (TargetWorld, Vec<usize>)> {
    (2usize..7, any::<u64>()).prop_flat_map(|(n, seed)| {
        let world = make_world(n, seed, 0.0).unwrap();
        (Just(world), prop::collection::vec(0..n, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn task_utility_matches_double_loop((world, a) in world_and_profile()) {
        let ja = JointAction::new(&world.action_space().unwrap(), a.clone()).unwrap();
        let got = task_utility(&world, &ja, &world.theta()).unwrap();
        let want = naive_utility(&world, &a);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn relabelling_agents_and_targets_preserves_utility(
        (world, a) in world_and_profile(),
        shuffle_seed in any::<u64>(),
    ) {
        let n = world.n();
        let perms = permutations(n.min(4));
        let pick = |s: u64| {
            // extend a small permutation with the identity on the tail
            let mut p = perms[(s % perms.len() as u64) as usize].clone();
            p.extend(n.min(4)..n);
            p
        };
        let pa = pick(shuffle_seed);
        let pt = pick(shuffle_seed.rotate_left(17));
        // agent pa[i] of the new world is agent i of the old; target pt[k] likewise
        let mut agents = world.agents.clone();
        let mut targets = world.targets.clone();
        for i in 0..n {
            agents[pa[i]] = world.agents[i];
            targets[pt[i]] = world.targets[i];
        }
        let relabelled = TargetWorld::new(agents, targets, 0.0).unwrap();
        let mut b = vec![0; n];
        for i in 0..n {
            b[pa[i]] = pt[a[i]];
        }
        let space = world.action_space().unwrap();
        let u = task_utility(&world, &JointAction::new(&space, a).unwrap(), &world.theta()).unwrap();
        let v = task_utility(&relabelled, &JointAction::new(&space, b).unwrap(), &relabelled.theta()).unwrap();
        prop_assert!((u - v).abs() <= 1e-12 * u.max(1.0));
    }

    #[test]
    fn closed_form_expectation_matches_enumeration(
        (n, seed) in (2usize..5, any::<u64>()),
        raw in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 4), 4),
    ) {
        let world = make_world(n, seed, 0.0).unwrap();
        let sigma: Vec<Vec<f64>> = raw[..n]
            .iter()
            .map(|v| {
                let v: Vec<f64> = v[..n].iter().map(|x| x + 1e-3).collect();
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let game = world.game().unwrap();
        let got = expected_utility(&game, &MixedStrategy::new(sigma.clone()).unwrap(), &StateBelief::point(world.theta())).unwrap();
        let space = ActionSpace::with_any_agents(vec![n; n]).unwrap();
        let mut want = 0.0;
        for a in space.profiles() {
            let w: f64 = a.as_slice().iter().enumerate().map(|(i, &x)| sigma[i][x]).product();
            want += w * naive_utility(&world, a.as_slice());
        }
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covering_profiles_are_equilibria(n in 2usize..6, seed in any::<u64>()) {
        let world = make_world(n, seed, 0.0).unwrap();
        let theta = world.theta();
        let game = world.game().unwrap();
        let space = world.action_space().unwrap();
        let belief = StateBelief::point(theta.clone());
        let found = enumerate_pure_ne(&world, &theta).unwrap();
        for p in permutations(n) {
            let a = JointAction::new(&space, p).unwrap();
            prop_assert!(is_pure_nash(&game, &a, &belief).unwrap());
            prop_assert!(found.contains(&a));
        }
        // and nothing else: a profile with a collision leaves a target free
        prop_assert_eq!(found.len(), permutations(n).len());
    }
}
