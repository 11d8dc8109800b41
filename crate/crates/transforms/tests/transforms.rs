use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sslab_game::{
    derive_normal_form, outcome, BehaviorProfile, Game, GameFile, NodeSpec, PureStrategy,
};
use sslab_transforms::{
    auxiliary_game, box_measure_check, coalesce, dirichlet_log_density, phi, phi_inverse, transform_dirichlet,
    CoalescePlan, ProductDirichlet, Pruning, SimplexBox, SimplexDensity, TransformError, TransformedPrior,
};

fn load(text: &str) -> Game {
    Game::from_json(text).unwrap()
}

fn fig(name: &str) -> Game {
    load(match name {
        "fig2" => include_str!("../../experiments/corpus/fig2.json"),
        "fig3-left" => include_str!("../../experiments/corpus/fig3-left.json"),
        "fig3-right" => include_str!("../../experiments/corpus/fig3-right.json"),
        "fig4-left" => include_str!("../../experiments/corpus/fig4-left.json"),
        "fig4-right" => include_str!("../../experiments/corpus/fig4-right.json"),
        "fig5-left" => include_str!("../../experiments/corpus/fig5-left.json"),
        "fig1" => include_str!("../../experiments/corpus/fig1.json"),
        "fig9" => include_str!("../../experiments/corpus/fig9.json"),
        _ => unreachable!(),
    })
}

/// Structural equality up to node order in the file.
fn same_game(a: &Game, b: &Game) {
    let norm = |g: &Game| {
        let file = g.to_file();
        let mut nodes: Vec<String> = file.nodes.iter().map(|n| serde_json::to_string(n).unwrap()).collect();
        nodes.sort();
        let parts: Vec<Vec<Vec<String>>> = (0..g.players())
            .map(|r| {
                let p = g.partition(r);
                let mut cells: Vec<Vec<String>> = p
                    .cells
                    .iter()
                    .map(|c| {
                        let mut ids: Vec<String> = c.iter().map(|&t| g.tree.node(g.tree.terminals()[t]).id.clone()).collect();
                        ids.sort();
                        ids
                    })
                    .collect();
                cells.sort();
                cells
            })
            .collect();
        (nodes, parts)
    };
    assert_eq!(norm(a), norm(b));
}

#[test]
fn fig3_right_coalesces_to_fig3_left() {
    let plan = CoalescePlan { role: 0, h1: "h1".into(), h2: "h1b".into() };
    let out = coalesce(&fig("fig3-right"), &plan).unwrap();
    same_game(&out.game, &fig("fig3-left"));
    assert_eq!(out.identification.merged_actions, ["Out", "1", "2"]);
    assert_eq!((out.identification.m, out.identification.n, out.identification.pass), (1, 2, 1));
}

#[test]
fn fig4_left_coalesces_to_fig4_right() {
    let plan = CoalescePlan { role: 0, h1: "hx".into(), h2: "hy".into() };
    let out = coalesce(&fig("fig4-left"), &plan).unwrap();
    same_game(&out.game, &fig("fig4-right"));
    // (a1, ·) collapses; pass/a2 and pass/a3 map to a2 and a3.
    assert_eq!(out.identification.strategy_map, vec![0, 0, 1, 2]);
}

#[test]
fn single_action_tail_is_a_relabeling() {
    let file = GameFile {
        players: 2,
        nodes: vec![
            NodeSpec::decision("r", 1, "h1", &[("a", "za"), ("go", "x")]),
            NodeSpec::terminal("za", &[1.0, 0.0]),
            NodeSpec::decision("x", 1, "h2", &[("only", "y")]),
            NodeSpec::decision("y", 2, "g", &[("l", "zl"), ("r", "zr")]),
            NodeSpec::terminal("zl", &[2.0, 1.0]),
            NodeSpec::terminal("zr", &[0.0, 3.0]),
        ],
        partitions: vec![],
    };
    let g = Game::from_file(&file).unwrap();
    let out = coalesce(&g, &CoalescePlan { role: 0, h1: "h1".into(), h2: "h2".into() }).unwrap();
    assert_eq!(out.identification.merged_actions, ["a", "only"]);
    let before = derive_normal_form(&g.tree).unwrap();
    let after = derive_normal_form(&out.game.tree).unwrap();
    assert_eq!(before.payoffs, after.payoffs);
    assert_eq!(g.tree.terminals().len(), out.game.tree.terminals().len());
}

#[test]
fn bad_plans_are_rejected() {
    let g = fig("fig4-left");
    let reversed = CoalescePlan { role: 0, h1: "hy".into(), h2: "hx".into() };
    assert!(matches!(coalesce(&g, &reversed), Err(TransformError::NotConsecutive { .. })));
    let wrong_role = CoalescePlan { role: 1, h1: "hx".into(), h2: "hy".into() };
    assert!(matches!(coalesce(&g, &wrong_role), Err(TransformError::NotConsecutive { .. })));
    let unknown = CoalescePlan { role: 0, h1: "hx".into(), h2: "nope".into() };
    assert!(matches!(coalesce(&g, &unknown), Err(TransformError::UnknownInfoSet(_))));
}

fn random_profile(rng: &mut ChaCha8Rng, g: &Game) -> BehaviorProfile {
    let probs = g
        .tree
        .infosets()
        .iter()
        .map(|info| {
            let v: Vec<f64> = (0..info.actions.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect()
        })
        .collect();
    BehaviorProfile { probs }
}

#[test]
fn coalescing_preserves_expected_payoffs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, h1, h2) in [("fig3-right", "h1", "h1b"), ("fig4-left", "hx", "hy")] {
        let g = fig(name);
        let out = coalesce(&g, &CoalescePlan { role: 0, h1: h1.into(), h2: h2.into() }).unwrap();
        for _ in 0..1000 {
            let b = random_profile(&mut rng, &g);
            let mapped = out.identification.map_behavior(&g, &out.game, &b);
            let u0 = b.expected_payoff(&g.tree);
            let u1 = mapped.expected_payoff(&out.game.tree);
            for (x, y) in u0.iter().zip(&u1) {
                assert!((x - y).abs() <= 1e-12, "{name}: {x} vs {y}");
            }
        }
        // Pure strategies reach identical terminal nodes.
        let nf = derive_normal_form(&g.tree).unwrap();
        for idx in 0..nf.profile_count() {
            let p = nf.decode(idx);
            let profile: Vec<PureStrategy> = p.iter().enumerate().map(|(r, &k)| nf.strategies[r][k].clone()).collect();
            let mapped: Vec<PureStrategy> =
                profile.iter().map(|s| out.identification.map_strategy(&g, &out.game, s)).collect();
            let z0 = outcome(&g.tree, &profile).unwrap();
            let z1 = outcome(&out.game.tree, &mapped).unwrap();
            assert_eq!(g.tree.node(z0).id, out.game.tree.node(z1).id);
        }
    }
}

#[test]
fn phi_examples() {
    let star = phi(&[0.5, 0.5], &[0.4, 0.6], 1).unwrap();
    assert_eq!(star.len(), 3);
    for (x, y) in star.iter().zip([0.5, 0.2, 0.3]) {
        assert!((x - y).abs() < 1e-15);
    }
    assert!(matches!(phi(&[0.0, 1.0], &[0.4, 0.6], 1), Err(TransformError::Boundary(_))));
    let (a, b) = phi_inverse(&[0.5, 0.2, 0.3], 1, 1).unwrap();
    assert!((a[0] - 0.5).abs() < 1e-15 && (a[1] - 0.5).abs() < 1e-15);
    assert!((b[0] - 0.4).abs() < 1e-15 && (b[1] - 0.6).abs() < 1e-15);
}

#[test]
fn phi_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let m = rng.random_range(1..4);
        let n = rng.random_range(1..4);
        let pass = rng.random_range(0..=m);
        let draw = |rng: &mut ChaCha8Rng, k: usize| {
            let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-6).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let a = draw(&mut rng, m + 1);
        let b = draw(&mut rng, n);
        let star = phi(&a, &b, pass).unwrap();
        let (a2, b2) = phi_inverse(&star, m, pass).unwrap();
        let back = phi(&a2, &b2, pass).unwrap();
        for (x, y) in a.iter().zip(&a2).chain(b.iter().zip(&b2)).chain(star.iter().zip(&back)) {
            worst = worst.max((x - y).abs());
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn jacobian_factor() {
    let two = TransformedPrior::new(ProductDirichlet { weights: vec![vec![1.0, 1.0], vec![1.0, 1.0]] }, 0, 1, 1).unwrap();
    assert_eq!(two.jacobian(&[0.5, 0.5]), 0.5);
    let one = TransformedPrior::new(ProductDirichlet { weights: vec![vec![1.0, 1.0], vec![1.0]] }, 0, 1, 1).unwrap();
    assert_eq!(one.jacobian(&[0.3, 0.7]), 1.0);
}

#[test]
fn uniform_prior_density_picks_up_tail_mass() {
    let t = TransformedPrior::new(ProductDirichlet { weights: vec![vec![1.0, 1.0], vec![1.0, 1.0]] }, 0, 1, 1).unwrap();
    for star in [[0.5, 0.2, 0.3], [0.1, 0.6, 0.3], [0.8, 0.05, 0.15]] {
        let expect = 1.0 / (star[1] + star[2]);
        assert!((t.log_density(&[star.to_vec()]).exp() - expect).abs() < 1e-12);
    }
}

#[test]
fn aggregated_dirichlet_is_closed_form() {
    let (w1, w2, w3) = (0.7, 1.3, 2.2);
    let weights = transform_dirichlet(&[w1, w2 + w3], &[w2, w3], 1).unwrap();
    assert_eq!(weights, vec![w1, w2, w3]);
    let t = TransformedPrior::new(ProductDirichlet { weights: vec![vec![w1, w2 + w3], vec![w2, w3]] }, 0, 1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let y = t.sample(&mut rng);
        let direct = dirichlet_log_density(&weights, &y[0]);
        assert!((t.log_density(&y) - direct).abs() < 1e-9);
    }
    assert!(matches!(transform_dirichlet(&[1.0, 1.0], &[1.0, 1.0], 1), Err(TransformError::NotDirichlet { .. })));
}

#[test]
fn box_measures_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for weights in [vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![vec![2.0, 0.5], vec![1.5, 0.7]]] {
        let t = TransformedPrior::new(ProductDirichlet { weights }, 0, 1, 1).unwrap();
        let dims = t.inner.dims();
        for _ in 0..5 {
            let bx = SimplexBox::random(&dims, &mut rng);
            let check = box_measure_check(&t, &bx, 100_000, &mut rng);
            assert!(check.pass, "{check:?}");
        }
    }
}

#[test]
fn fig2_auxiliary_for_p2_is_fig9() {
    let aux = auxiliary_game(&fig("fig2"), 1, &Pruning::Auto).unwrap();
    assert_eq!(aux.pruned, ["p3_out"]);
    same_game(&aux.game, &fig("fig9"));
}

#[test]
fn fig5_auxiliary_for_p2_flattens_only() {
    let g = fig("fig5-left");
    let aux = auxiliary_game(&g, 1, &Pruning::Auto).unwrap();
    assert!(aux.pruned.is_empty());
    for &z in g.tree.terminals() {
        let id = &g.tree.node(z).id;
        let z2 = aux.game.tree.find_node(id).unwrap();
        let u = aux.game.tree.payoffs(z2);
        assert_eq!(u, &[0.0, g.tree.payoffs(z)[1], 0.0]);
    }
}

#[test]
fn last_mover_with_discrete_feedback_is_not_pruned() {
    let g = fig("fig1");
    let aux = auxiliary_game(&g, 1, &Pruning::Auto).unwrap();
    assert!(aux.pruned.is_empty());
    assert_eq!(aux.game.tree.nodes().len(), g.tree.nodes().len());
}

#[test]
fn pruning_across_cells_is_rejected() {
    let g = fig("fig2");
    let err = auxiliary_game(&g, 1, &Pruning::Nodes(vec!["p3_in1".into()])).unwrap_err();
    assert!(matches!(err, TransformError::WouldChangeCells { .. }), "{err}");
    let ok = auxiliary_game(&g, 1, &Pruning::Nodes(vec!["p3_out".into()])).unwrap();
    same_game(&ok.game, &fig("fig9"));
}
