use sslab_beliefs::{CountState, DirichletPrior};
use sslab_game::{derive_normal_form, p_equivalent_partition, Game};
use sslab_policy::*;
use sslab_transforms::{coalesce, transform_dirichlet, CoalescePlan};

fn corpus(name: &str) -> Game {
    let text = match name {
        "fig1" => include_str!("../../experiments/corpus/fig1.json"),
        "fig2" => include_str!("../../experiments/corpus/fig2.json"),
        "fig4-left" => include_str!("../../experiments/corpus/fig4-left.json"),
        "fig5-left" => include_str!("../../experiments/corpus/fig5-left.json"),
        "fig8" => include_str!("../../experiments/corpus/fig8.json"),
        "fig9" => include_str!("../../experiments/corpus/fig9.json"),
        _ => unreachable!(),
    };
    Game::from_json(text).unwrap()
}

fn prior(game: &Game, json: &str) -> DirichletPrior {
    DirichletPrior::from_json(&game.tree, json).unwrap()
}

fn name(game: &Game, p: &Policy, x: usize) -> String {
    p.model.strategies[p.choice[x] as usize].name(&game.tree)
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn horizon_closed_form() {
    let expected = ((1e-3f64 * (1.0 - 0.81)).ln() / 0.81f64.ln()).ceil() as u32;
    assert_eq!(effective_horizon(0.9, 0.9, 1e-3, 1.0).unwrap(), expected);
    assert_eq!(expected, 41);
    let t = effective_horizon(0.9, 0.9, 1e-3, 1.0).unwrap();
    assert!(0.81f64.powi(t as i32) / 0.19 < 1e-3);
    assert!(0.81f64.powi(t as i32 - 1) / 0.19 >= 1e-3);
    assert_eq!(effective_horizon(0.0, 0.99, 1e-6, 10.0).unwrap(), 1);
    assert_eq!(effective_horizon(0.99, 0.0, 1e-6, 10.0).unwrap(), 1);
    assert!(effective_horizon(1.0, 0.5, 1e-3, 1.0).is_err());
    assert!(effective_horizon(0.5, 0.5, 0.0, 1.0).is_err());
}

#[test]
fn uncertain_entrant_probes_with_the_cheap_entry() {
    let g = corpus("fig1");
    let p = solve_policy(&g, &prior(&g, r#"{"role": 1, "weights": {"h2": {"L": 1, "R": 1}}}"#), 0.95, 0.99, &opts()).unwrap();
    assert_eq!(name(&g, &p, 0), "In1");
    assert!(p.bellman_residual < 1e-9);
    // Both entries reveal the same set; In2 is only chosen once L looks likely enough to exploit.
    let m = &p.model;
    let mut sc = Vec::new();
    for x in 0..m.state_count() {
        if name(&g, &p, x) == "In2" {
            m.means(m.states[x], &mut sc);
            let l = m.slots.iter().position(|s| s.action == "L").unwrap();
            assert!(7.0 * sc[l] - 5.0 > -1.0 - 1e-9, "{sc:?}");
        }
    }
}

#[test]
fn confident_entrant_stays_out() {
    let g = corpus("fig1");
    let pr = prior(&g, r#"{"role": 1, "weights": {"h2": {"L": 0.1, "R": 10}}}"#);
    let p = solve_policy(&g, &pr, 0.95, 0.99, &opts()).unwrap();
    assert_eq!(name(&g, &p, 0), "Out");
    assert_eq!(p.action(&CountState::empty(&g.tree, 0)), Some(0));
}

#[test]
fn no_patience_means_myopic() {
    for (file, role, json) in [
        ("fig1", 0, r#"{"role": 1, "weights": {}}"#),
        ("fig1", 1, r#"{"role": 2, "weights": {"h1": {"Out": 1, "In1": 2, "In2": 1}}}"#),
        ("fig8", 1, r#"{"role": 2, "weights": {"h1": {"A": 1, "B": 1, "C": 10}}}"#),
        ("fig2", 0, r#"{"role": 1, "weights": {}}"#),
    ] {
        let g = corpus(file);
        let pr = prior(&g, json);
        assert_eq!(pr.role, role);
        let p = solve_policy(&g, &pr, 0.0, 0.9, &opts()).unwrap();
        assert_eq!(p.choice, p.myopic_choice(), "{file}");
        assert_eq!(p.horizon, 1);
    }
}

#[test]
fn play_independent_feedback_gives_myopic_play() {
    let g = corpus("fig8");
    let p = solve_policy(&g, &prior(&g, r#"{"role": 2, "weights": {"h1": {"A": 1, "B": 1, "C": 10}}}"#), 0.95, 0.99, &opts())
        .unwrap();
    assert_eq!(p.choice, p.myopic_choice());
    assert_eq!(name(&g, &p, 0), "Y");
    let m = &p.model;
    let slot = |a: &str| m.slots.iter().position(|s| s.action == a).unwrap();
    let (a, c) = (slot("A"), slot("C"));
    let mut means = Vec::new();
    for x in 0..m.state_count() {
        m.means(m.states[x], &mut means);
        // Y beats X exactly when P(C) > 2 P(A).
        let gap = means[c] - 2.0 * means[a];
        if gap > 1e-9 {
            assert_eq!(name(&g, &p, x), "Y");
        } else if gap < -1e-9 {
            assert_eq!(name(&g, &p, x), "X");
        }
    }
}

#[test]
fn dominated_entry_is_never_an_experiment() {
    let g = corpus("fig2");
    let pr = prior(&g, r#"{"role": 2, "weights": {"h1": {"Out": 3, "In": 1}, "h3": {"L": 1, "R": 3}}}"#);
    let p = solve_policy(&g, &pr, 0.95, 0.99, &opts()).unwrap();
    let in2 = p.model.strategies.iter().position(|s| s.name(&g.tree) == "In2").unwrap();
    assert!(p.choice.iter().all(|&c| c as usize != in2));
    assert!(p.bellman_residual < 1e-9);
}

#[test]
fn exact_values_match_value_iteration() {
    let g = corpus("fig1");
    let p = solve_policy(&g, &prior(&g, r#"{"role": 1, "weights": {}}"#), 0.8, 0.9, &opts()).unwrap();
    let check = value_iteration_check(&p, 200);
    assert!(check.deltas.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    // Range 7 and β = 0.72: the truncation error after 200 sweeps is far below 1e-9.
    assert!(check.max_value_gap < 1e-9, "{check:?}");
    assert_eq!(check.choice_mismatches, 0);
}

#[test]
fn information_has_nonnegative_value() {
    for (file, json) in [
        ("fig1", r#"{"role": 1, "weights": {}}"#),
        ("fig1", r#"{"role": 2, "weights": {}}"#),
        ("fig8", r#"{"role": 2, "weights": {"h1": {"A": 1, "B": 1, "C": 10}}}"#),
    ] {
        let g = corpus(file);
        let p = solve_policy(&g, &prior(&g, json), 0.5, 0.9, &opts()).unwrap();
        // β^(64 - 20) is below 1e-15, so the cap cannot bite.
        assert!(p.information_value_gap(20) < 1e-9, "{file}");
    }
}

#[test]
fn transition_rows_are_distributions() {
    let g = corpus("fig2");
    let p = sslab_policy::BeliefModel::build(&g, &DirichletPrior::uniform(&g.tree, 0, 1.0), 16, DEFAULT_MAX_STATES).unwrap();
    let truth = sslab_game::BehaviorProfile::uniform(&g.tree);
    let mut means = Vec::new();
    let mut probs = Vec::new();
    for x in 0..p.state_count() {
        p.means(p.states[x], &mut means);
        for s in 0..p.strategies.len() {
            p.predictive(&means, s, &mut probs);
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
    for s in 0..p.strategies.len() {
        assert!((p.true_class_probs(&truth, s).iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn state_budget_is_reported() {
    let g = corpus("fig2");
    let err = BeliefModel::build(&g, &DirichletPrior::uniform(&g.tree, 2, 1.0), 64, 1000).unwrap_err();
    assert!(matches!(err, PolicyError::StateBudget { cap: 64, .. }), "{err}");
    assert!(err.to_string().contains("cap 64"));
}

#[test]
fn identity_map_is_trivially_equal() {
    let g = corpus("fig1");
    let pr = prior(&g, r#"{"role": 2, "weights": {}}"#);
    let a = solve_policy(&g, &pr, 0.9, 0.9, &opts()).unwrap();
    let b = a.clone();
    let r = policy_invariance_check(&a, &b, &SlotMap::identity(&a, &b).unwrap(), |s| s).unwrap();
    assert!(r.equal);
    assert_eq!(r.states_checked, a.model.state_count());
}

#[test]
fn auxiliary_game_gives_the_same_problem() {
    let (g2, g9) = (corpus("fig2"), corpus("fig9"));
    let json = r#"{"role": 2, "weights": {"h1": {"Out": 3, "In": 1}, "h3": {"L": 1, "R": 3}}}"#;
    let opts = SolveOptions { cap: 24, ..opts() };
    let a = solve_policy(&g2, &prior(&g2, json), 0.95, 0.99, &opts).unwrap();
    let b = solve_policy(&g9, &prior(&g9, json), 0.95, 0.99, &opts).unwrap();
    let r = policy_invariance_check(&a, &b, &SlotMap::identity(&a, &b).unwrap(), |s| s).unwrap();
    assert!(r.equal, "{r:?}");
    assert!(r.max_value_gap < 1e-9);
}

#[test]
fn coalescing_keeps_both_policies() {
    let left = corpus("fig4-left");
    let c = coalesce(&left, &CoalescePlan { role: 0, h1: "hx".into(), h2: "hy".into() }).unwrap();
    let right = c.game;
    let id = c.identification;

    // First mover's beliefs concern the root only.
    let root = r#"{"role": 1, "weights": {"g": {"b1": 1, "b2": 2, "b3": 0.5}}}"#;
    let a = solve_policy(&left, &prior(&left, root), 0.9, 0.95, &opts()).unwrap();
    let b = solve_policy(&right, &prior(&right, root), 0.9, 0.95, &opts()).unwrap();
    let r = policy_invariance_check(&a, &b, &SlotMap::identity(&a, &b).unwrap(), |s| id.strategy_map[s]).unwrap();
    assert!(r.equal, "{r:?}");

    // Second mover: beliefs about the merged sets, transformed so the aggregate is Dirichlet.
    let (w1, w2, w3) = (1.0, 2.0, 0.5);
    let merged = transform_dirichlet(&[w1, w2 + w3], &[w2, w3], 1).unwrap();
    let pa = prior(&left, &format!(r#"{{"role": 2, "weights": {{"hx": {{"a1": {w1}, "pass": {}}}, "hy": {{"a2": {w2}, "a3": {w3}}}}}}}"#, w2 + w3));
    let pb = prior(
        &right,
        &format!(r#"{{"role": 2, "weights": {{"hx": {{"a1": {}, "a2": {}, "a3": {}}}}}}}"#, merged[0], merged[1], merged[2]),
    );
    let a = solve_policy(&left, &pa, 0.9, 0.95, &opts()).unwrap();
    let b = solve_policy(&right, &pb, 0.9, 0.95, &opts()).unwrap();
    let map = SlotMap::by_name(&a, &b, |h, x| match (h, x) {
        ("hx", "pass") => vec![("hx".into(), "a2".into()), ("hx".into(), "a3".into())],
        (_, x) => vec![("hx".into(), x.into())],
    })
    .unwrap();
    let r = policy_invariance_check(&a, &b, &map, |s| s).unwrap();
    assert!(r.equal, "{r:?}");
    assert!(r.max_value_gap < 1e-9);
}

/// Solves every role in a game and in its normal form with profile-level feedback.
fn normal_form_matches(file: &str, priors: &[&str], delta: f64, gamma: f64) {
    let g = corpus(file);
    let mut nf = derive_normal_form(&g.tree).unwrap();
    nf.partitions = Some(p_equivalent_partition(&g, &nf));
    let n = Game::from_file(&nf.to_game_file()).unwrap();
    let rename = |h: &str| h.replacen('h', "S", 1);
    for json in priors {
        let pg = prior(&g, json);
        let mut pn = DirichletPrior::uniform(&n.tree, pg.role, 1.0);
        for (h, w) in pg.weights.iter().enumerate() {
            if !w.is_empty() {
                let id = rename(&g.tree.infoset(h).id);
                pn.weights[n.tree.find_infoset(&id).unwrap()] = w.clone();
            }
        }
        let a = solve_policy(&g, &pg, delta, gamma, &opts()).unwrap();
        let b = solve_policy(&n, &pn, delta, gamma, &opts()).unwrap();
        let map = SlotMap::by_name(&a, &b, |h, x| vec![(rename(h), x.to_string())]).unwrap();
        let names = |p: &Policy, t: &sslab_game::GameTree, s: usize| p.model.strategies[s].name(t);
        let r = policy_invariance_check(&a, &b, &map, |s| {
            let target = names(&a, &g.tree, s);
            (0..b.model.strategies.len()).find(|&k| names(&b, &n.tree, k) == target).unwrap()
        })
        .unwrap();
        assert!(r.equal, "{file} {json}: {r:?}");
        assert!(r.max_value_gap < 1e-9);
    }
}

#[test]
fn normal_form_feedback_is_equivalent() {
    normal_form_matches(
        "fig1",
        &[r#"{"role": 1, "weights": {}}"#, r#"{"role": 2, "weights": {"h1": {"Out": 2, "In1": 1, "In2": 0.5}}}"#],
        0.9,
        0.95,
    );
    normal_form_matches(
        "fig5-left",
        &[r#"{"role": 1, "weights": {}}"#, r#"{"role": 2, "weights": {}}"#, r#"{"role": 3, "weights": {"h1": {"Pass": 3, "Drop": 1}}}"#],
        0.9,
        0.95,
    );
}
