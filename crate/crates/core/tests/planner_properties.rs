use std::collections::BTreeSet;

use firstocc_core::mdp::{build_gridworld, one_action_policy, random_deterministic_mdp, random_mdp, ActionSet, Cell, GridSpec, Policy};
use firstocc_core::occupancy::{fr_dp, gpi_select_policy, OccupancyMatrix};
use firstocc_core::planner::{construct_plan, frp, frp_converged, frp_k, shortest_path_oracle, IMPROVEMENT_TOL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn deterministic_policies(n: usize, m: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Policy> {
    (0..count)
        .map(|_| Policy::Deterministic((0..n).map(|_| rng.gen_range(0..m)).collect()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn discount_table_never_decreases(seed in any::<u64>(), n in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mdp = random_mdp(n, 3, 0.9, &mut rng).unwrap();
        let frs: Vec<OccupancyMatrix> = deterministic_policies(n, 3, 3, &mut rng)
            .iter()
            .map(|pi| fr_dp(&mdp, pi, 1e-12).unwrap())
            .collect();
        let goal = rng.gen_range(0..n);
        let table = frp(&frs, goal, 50, IMPROVEMENT_TOL).unwrap();
        for pair in table.history.windows(2) {
            for s in 0..n {
                prop_assert!(pair[1][s] >= pair[0][s]);
            }
        }
    }

    #[test]
    fn deterministic_inputs_stop_within_state_count(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mdp = random_deterministic_mdp(n, 3, 0.9, &mut rng).unwrap();
        let frs: Vec<OccupancyMatrix> = deterministic_policies(n, 3, 3, &mut rng)
            .iter()
            .map(|pi| fr_dp(&mdp, pi, 1e-14).unwrap())
            .collect();
        let table = frp(&frs, rng.gen_range(0..n), n + 1, IMPROVEMENT_TOL).unwrap();
        prop_assert!(table.converged);
        prop_assert!(table.iterations_used <= n + 1);
    }

    #[test]
    fn zero_refinements_is_gpi(seed in any::<u64>(), n in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mdp = random_mdp(n, 2, 0.9, &mut rng).unwrap();
        let frs: Vec<OccupancyMatrix> = deterministic_policies(n, 2, 4, &mut rng)
            .iter()
            .map(|pi| fr_dp(&mdp, pi, 1e-12).unwrap())
            .collect();
        let goal = rng.gen_range(0..n);
        let mut r = vec![0.0; n];
        r[goal] = 1.0;
        let table = frp_k(&frs, goal, 0).unwrap();
        for s in 0..n {
            let (p, v) = gpi_select_policy(&frs, &r, s).unwrap();
            prop_assert_eq!(table.plan_policy[s], p);
            prop_assert!((table.gamma_to_goal[s] - v.clamp(0.0, 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn planned_discount_is_shortest_path(seed in any::<u64>(), w in 2usize..7, h in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = GridSpec::open(w, h, ActionSet::FourConnected);
        let walls: BTreeSet<Cell> = (0..(w * h) / 4)
            .map(|_| Cell::new(rng.gen_range(0..h), rng.gen_range(0..w)))
            .filter(|c| *c != Cell::new(0, 0))
            .collect();
        spec.walls = walls;
        let gamma = 0.9;
        let world = build_gridworld(&spec, &[], gamma).unwrap();
        let n = world.num_states();
        let policies: Vec<Policy> = (0..4).map(|a| one_action_policy(world.mdp(), a).unwrap()).collect();
        let frs: Vec<OccupancyMatrix> = policies.iter().map(|pi| fr_dp(world.mdp(), pi, 1e-14).unwrap()).collect();
        let goal = rng.gen_range(0..n);
        let table = frp_converged(&frs, goal).unwrap();
        let s0 = world.state(Cell::new(0, 0)).unwrap();
        match shortest_path_oracle(world.mdp(), &policies, s0, goal).unwrap() {
            Some(len) => {
                prop_assert!((table.gamma_to_goal[s0] - gamma.powi(len as i32)).abs() < 1e-12);
                let plan = construct_plan(&table, s0).unwrap();
                prop_assert!((plan.discount - gamma.powi(len as i32)).abs() < 1e-12);
            }
            None => prop_assert_eq!(table.gamma_to_goal[s0], 0.0),
        }
    }
}
