use num_traits::Zero;
use sslab_elimination::lp::{q, ratio, Cmp, Lp, LpResult, Row};
use sslab_elimination::*;
use sslab_game::{derive_normal_form, Game, GameFile, NodeSpec, NormalFormGame, PureStrategy};

const CORPUS: [(&str, &str); 13] = [
    ("fig1", include_str!("../../experiments/corpus/fig1.json")),
    ("fig2", include_str!("../../experiments/corpus/fig2.json")),
    ("fig3-left", include_str!("../../experiments/corpus/fig3-left.json")),
    ("fig3-right", include_str!("../../experiments/corpus/fig3-right.json")),
    ("fig4-left", include_str!("../../experiments/corpus/fig4-left.json")),
    ("fig4-right", include_str!("../../experiments/corpus/fig4-right.json")),
    ("fig5-left", include_str!("../../experiments/corpus/fig5-left.json")),
    ("fig5-right", include_str!("../../experiments/corpus/fig5-right.json")),
    ("fig6", include_str!("../../experiments/corpus/fig6.json")),
    ("fig7-left", include_str!("../../experiments/corpus/fig7-left.json")),
    ("fig7-right", include_str!("../../experiments/corpus/fig7-right.json")),
    ("fig8", include_str!("../../experiments/corpus/fig8.json")),
    ("fig9", include_str!("../../experiments/corpus/fig9.json")),
];

fn game(name: &str) -> Game {
    Game::from_json(CORPUS.iter().find(|(n, _)| *n == name).unwrap().1).unwrap()
}

fn nf(name: &str) -> NormalFormGame {
    derive_normal_form(&game(name).tree).unwrap()
}

fn idx(nf: &NormalFormGame, role: usize, name: &str) -> usize {
    nf.strategy_index(role, name).unwrap()
}

fn sets_without(nf: &NormalFormGame, gone: &[(usize, &str)]) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = nf.sizes().into_iter().map(|n| (0..n).collect()).collect();
    for &(r, n) in gone {
        let k = idx(nf, r, n);
        sets[r].retain(|&s| s != k);
    }
    sets
}

fn row(coeffs: &[i64], cmp: Cmp, rhs: i64) -> Row {
    Row { coeffs: coeffs.iter().map(|&c| q(c)).collect(), cmp, rhs: q(rhs) }
}

#[test]
fn simplex_small_programs() {
    let lp = Lp { vars: 2, objective: vec![q(1), q(1)], rows: vec![row(&[1, 2], Cmp::Le, 4), row(&[3, 1], Cmp::Le, 6)] };
    match lp.solve() {
        LpResult::Optimal { x, value } => {
            assert_eq!(x, vec![ratio(8, 5), ratio(6, 5)]);
            assert_eq!(value, ratio(14, 5));
        }
        other => panic!("{other:?}"),
    }
    // Equalities, a redundant row and a negative right-hand side.
    let lp = Lp {
        vars: 3,
        objective: vec![q(-1), q(0), q(0)],
        rows: vec![row(&[1, 1, 1], Cmp::Eq, 1), row(&[2, 2, 2], Cmp::Eq, 2), row(&[-1, 0, 1], Cmp::Le, -1)],
    };
    match lp.solve() {
        LpResult::Optimal { x, value } => {
            assert!(lp.satisfied_by(&x));
            assert_eq!(value, q(-1));
        }
        other => panic!("{other:?}"),
    }
    let unbounded = Lp { vars: 2, objective: vec![q(1), q(0)], rows: vec![row(&[1, -1], Cmp::Le, 1)] };
    assert_eq!(unbounded.solve(), LpResult::Unbounded);
    let infeasible = Lp::feasibility(2, vec![row(&[1, 1], Cmp::Ge, 3), row(&[1, 0], Cmp::Le, 1), row(&[0, 1], Cmp::Le, 1)]);
    assert_eq!(infeasible.solve(), LpResult::Infeasible);
    let y = infeasible.farkas().unwrap();
    assert!(infeasible.check_farkas(&y));
    assert!(!infeasible.check_farkas(&[q(0), q(0), q(0)]));
    assert!(Lp::feasibility(1, vec![row(&[1], Cmp::Ge, 0)]).farkas().is_none());
}

#[test]
fn weak_dominance_examples() {
    for (file, role, expected) in [("fig1", 0, "In1"), ("fig5-left", 2, "Drop"), ("fig8", 0, "C")] {
        let n = nf(file);
        let g = ExactGame::new(&n).unwrap();
        let found = weakly_dominated(&g, role);
        let names: Vec<&str> = found.iter().map(|d| n.names[role][d.strategy].as_str()).collect();
        assert_eq!(names, vec![expected], "{file}");
        assert!(check_dominance(&g, &found[0], &g.all_sets(), false));
    }
    let n = nf("fig1");
    let g = ExactGame::new(&n).unwrap();
    assert!(weakly_dominated(&g, 1).is_empty());
    let strict = strictly_dominated(&g, 0, &g.all_sets());
    assert_eq!(strict.len(), 1);
    assert!(check_dominance(&g, &strict[0], &g.all_sets(), true));
}

#[test]
fn conjecture_examples() {
    let n = nf("fig1");
    let g = ExactGame::new(&n).unwrap();
    let prev = sets_without(&n, &[(0, "In1")]);
    let eps = ratio(1, 10);
    let eta = &eps / q(12);
    let c = eliminable(&g, 1, idx(&n, 1, "R"), &prev, &eps, &eta).unwrap();
    assert!(c.feasible);
    assert!(verify_check(&g, 1, idx(&n, 1, "R"), &prev, &c));
    assert!(grid_feasible(&g, 1, idx(&n, 1, "R"), &prev, &eps, &eta, 50).unwrap());

    let n = nf("fig5-left");
    let g = ExactGame::new(&n).unwrap();
    let prev = sets_without(&n, &[(2, "Drop")]);
    let drop = idx(&n, 1, "Drop");
    let c = eliminable(&g, 1, drop, &prev, &ratio(1, 10), &ratio(1, 10_000)).unwrap();
    assert!(!c.feasible);
    assert!(c.farkas.is_some() && verify_check(&g, 1, drop, &prev, &c));
    // Without a floor P1 may be thought to drop for sure, and then nothing separates P2's moves.
    let c = eliminable(&g, 1, drop, &prev, &ratio(1, 10), &q(0)).unwrap();
    assert!(c.feasible);
    let flat = Schedule { full_support: false, ..Schedule::default() };
    assert!(!decide(&g, 1, drop, &prev, &flat).unwrap().eliminable);
    assert!(decide(&g, 1, drop, &prev, &Schedule::default()).unwrap().eliminable);

    assert!(eliminable(&g, 1, drop, &prev, &q(1), &q(0)).is_err());
    assert!(eliminable(&g, 1, drop, &prev, &ratio(1, 10), &ratio(1, 10)).is_err());
}

#[test]
fn unique_best_replies_survive_every_schedule_point() {
    // Out is the only best reply to R, and R is among the survivors.
    let n = nf("fig1");
    let g = ExactGame::new(&n).unwrap();
    let prev = sets_without(&n, &[(0, "In1")]);
    let d = decide(&g, 0, idx(&n, 0, "Out"), &prev, &Schedule::default()).unwrap();
    assert!(d.feasible.iter().all(|&f| f));
    assert!(!d.eliminable);
    for (_, c) in &d.last {
        assert!(verify_check(&g, 0, idx(&n, 0, "Out"), &prev, c));
    }
}

fn survivors(t: &EliminationTrace) -> Vec<Vec<&str>> {
    (0..t.survivors.len()).map(|r| t.survivor_set(r)).collect()
}

#[test]
fn generator_examples() {
    let s = Schedule::default();
    let t = run_valid_sequence(&nf("fig8"), None, &Generator::Sw, &s).unwrap();
    assert_eq!(survivors(&t), vec![vec!["A", "B"], vec!["X", "Y"]]);
    verify_trace(&nf("fig8"), &t).unwrap();

    let t = run_valid_sequence(&nf("fig1"), None, &Generator::Sw, &s).unwrap();
    assert_eq!(survivors(&t), vec![vec!["Out", "In2"], vec!["L", "R"]]);
    assert_eq!(t.stages[0].deleted.len(), 1);
    verify_trace(&nf("fig1"), &t).unwrap();

    let g = game("fig5-left");
    let n = nf("fig5-left");
    let t = run_valid_sequence(&n, Some(&g.tree), &Generator::Bi, &s).unwrap();
    assert_eq!(survivors(&t), vec![vec!["Pass"], vec!["Pass"], vec!["Pass"]]);
    let order: Vec<(usize, usize, &str)> =
        t.stages.iter().flat_map(|st| st.deleted.iter().map(move |d| (st.stage, d.role, d.strategy.as_str()))).collect();
    assert_eq!(order, vec![(0, 3, "Drop"), (1, 2, "Drop"), (2, 1, "Drop")]);
    verify_trace(&n, &t).unwrap();

    let json = serde_json::to_string(&t).unwrap();
    let back: EliminationTrace = serde_json::from_str(&json).unwrap();
    assert_eq!(back, t);

    let custom = Generator::Custom {
        stages: vec![vec![vec![], vec![], vec!["Drop".into()]], vec![vec![], vec!["Drop".into()], vec![]], vec![vec!["Drop".into()], vec![], vec![]]],
    };
    let c = run_valid_sequence(&n, None, &custom, &s).unwrap();
    assert_eq!(c.survivors, t.survivors);

    // Without full support the second BI stage is not certified.
    let flat = Schedule { full_support: false, ..Schedule::default() };
    match run_valid_sequence(&n, Some(&g.tree), &Generator::Bi, &flat) {
        Err(EliminationError::ValidityBreach { stage: 1, role: 2, strategy, .. }) => assert_eq!(strategy, "Drop"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn breaches_and_bad_input() {
    let s = Schedule::default();
    let n = nf("fig1");
    let bad = Generator::Custom { stages: vec![vec![vec!["Out".into()], vec![]]] };
    assert!(matches!(run_valid_sequence(&n, None, &bad, &s), Err(EliminationError::ValidityBreach { stage: 0, role: 1, .. })));
    let bad = Generator::Custom { stages: vec![vec![vec!["In1".into()], vec![]], vec![vec![], vec!["R".into()]]] };
    assert!(matches!(run_valid_sequence(&n, None, &bad, &s), Err(EliminationError::ValidityBreach { stage: 1, role: 2, .. })));
    let bad = Generator::Custom { stages: vec![vec![vec!["Nope".into()], vec![]]] };
    assert!(matches!(run_valid_sequence(&n, None, &bad, &s), Err(EliminationError::UnknownStrategy { .. })));
    assert!(run_valid_sequence(&n, None, &Generator::Bi, &s).is_err());
    assert!(matches!(run_valid_sequence(&n, Some(&game("fig1").tree), &Generator::Bi, &s), Err(EliminationError::NotSimple(_))));
}

#[test]
fn tampered_traces_are_rejected() {
    let n = nf("fig5-left");
    let t = run_valid_sequence(&n, Some(&game("fig5-left").tree), &Generator::Bi, &Schedule::default()).unwrap();
    let mut forged = t.clone();
    if let Certificate::Schedule { checks, .. } = &mut forged.stages[1].deleted[0].certificate {
        let y = checks[1].farkas.as_mut().unwrap();
        y[0] = "0".into();
        y.iter_mut().for_each(|v| *v = "0".into());
    }
    assert!(verify_trace(&n, &forged).is_err());
    let mut forged = t.clone();
    forged.survivors[0].push("Drop".into());
    assert!(verify_trace(&n, &forged).is_err());
    let mut forged = t.clone();
    if let Certificate::WeakDominance { mixture, .. } = &mut forged.stages[0].deleted[0].certificate {
        mixture.insert("Pass".into(), "1/2".into());
    }
    assert!(verify_trace(&n, &forged).is_err());
}

#[test]
fn every_corpus_game_keeps_a_nonempty_refinement_of_strict_dominance() {
    let s = Schedule::default();
    for (name, _) in CORPUS {
        let n = nf(name);
        let g = ExactGame::new(&n).unwrap();
        let t = run_valid_sequence(&n, None, &Generator::Sw, &s).unwrap();
        verify_trace(&n, &t).unwrap();
        let isd = iterated_strict_dominance(&g);
        for r in 0..n.players {
            assert!(!t.survivors[r].is_empty(), "{name}");
            for k in &t.survivors[r] {
                assert!(isd[r].contains(&idx(&n, r, k)), "{name}: {k}");
            }
        }
        let tree = &game(name).tree;
        if is_simple_game(tree).relaxed {
            let b = run_valid_sequence(&n, Some(tree), &Generator::Bi, &s).unwrap();
            verify_trace(&n, &b).unwrap();
            let bi = bi_profile(tree).unwrap();
            for r in 0..n.players {
                assert_eq!(b.survivors[r], vec![bi[r].name(tree)], "{name}");
            }
        }
    }
}

#[test]
fn lp_matches_grid_on_two_role_games() {
    for (name, _) in CORPUS {
        let n = nf(name);
        if n.players != 2 {
            continue;
        }
        let g = ExactGame::new(&n).unwrap();
        let t = run_valid_sequence(&n, None, &Generator::Sw, &Schedule::default()).unwrap();
        let mut stage_sets = vec![g.all_sets()];
        for st in &t.stages {
            stage_sets.push(st.survivors.iter().enumerate().map(|(r, ns)| ns.iter().map(|k| idx(&n, r, k)).collect()).collect());
        }
        for prev in &stage_sets {
            for role in 0..2 {
                let opp = n.sizes()[1 - role];
                for eps in [ratio(1, 2), ratio(1, 4), ratio(1, 10)] {
                    let eta = &eps / q(4 * opp as i64);
                    for &s in &prev[role] {
                        let lp = eliminable(&g, role, s, prev, &eps, &eta).unwrap().feasible;
                        let grid = grid_feasible(&g, role, s, prev, &eps, &eta, 50).unwrap();
                        assert_eq!(lp, grid, "{name} role {role} {} eps {eps}", n.names[role][s]);
                    }
                }
            }
        }
    }
}

#[test]
fn simple_game_reports() {
    let r = is_simple_game(&game("fig5-left").tree);
    assert!(r.perfect_info && r.moves_once && !r.no_terminal_ties && r.bi_comparison_ties.is_empty());
    assert!(r.relaxed && !r.simple);
    let r = is_simple_game(&game("fig1").tree);
    assert!(!r.perfect_info && !r.relaxed);
    let alt = chain(&[(1, &[3.0, 0.0]), (2, &[1.0, 2.0])], &[4.0, 5.0]);
    let r = is_simple_game(&alt.tree);
    assert!(r.perfect_info && r.moves_once && r.no_terminal_ties && r.simple);
    assert!(!is_simple_game(&game("fig3-right").tree).moves_once);
}

/// A chain where mover k either stops (payoffs `stop`) or continues; the last continue ends at `end`.
fn chain(movers: &[(usize, &[f64])], end: &[f64]) -> Game {
    let players = end.len();
    let mut nodes = Vec::new();
    for (k, (owner, stop)) in movers.iter().enumerate() {
        let next = if k + 1 == movers.len() { "end".to_string() } else { format!("n{}", k + 1) };
        nodes.push(NodeSpec::decision(&format!("n{k}"), *owner, &format!("h{k}"), &[("C", next.as_str()), ("S", &format!("z{k}"))]));
        nodes.push(NodeSpec::terminal(&format!("z{k}"), stop));
    }
    nodes.push(NodeSpec::terminal("end", end));
    Game::from_file(&GameFile { players, nodes, partitions: Vec::new() }).unwrap()
}

#[test]
fn backward_induction_examples() {
    let g = game("fig5-left");
    let names: Vec<String> = bi_profile(&g.tree).unwrap().iter().map(|s| s.name(&g.tree)).collect();
    assert_eq!(names, vec!["Pass", "Pass", "Pass"]);

    let one = chain(&[(1, &[1.0])], &[0.0]);
    assert_eq!(bi_profile(&one.tree).unwrap()[0].name(&one.tree), "S");

    let tie = chain(&[(1, &[1.0, 0.0])], &[1.0, 3.0]);
    match bi_profile(&tie.tree) {
        Err(EliminationError::NotSimple(m)) => assert!(m.contains("n0"), "{m}"),
        other => panic!("{other:?}"),
    }
    assert_eq!(is_simple_game(&tie.tree).bi_comparison_ties, vec!["n0".to_string()]);
    assert!(bi_profile(&game("fig1").tree).is_err());
}

#[test]
fn backward_induction_matches_exhaustive_search() {
    // Three movers, each stopping or continuing; the profile that is optimal at every node.
    let g = chain(&[(1, &[1.0, 0.0, 0.0]), (2, &[0.0, 2.0, 1.0]), (3, &[3.0, 1.0, 0.0])], &[2.0, 3.0, 4.0]);
    let tree = &g.tree;
    let all: Vec<Vec<PureStrategy>> = (0..3).map(|r| PureStrategy::enumerate(tree, r)).collect();
    let n = derive_normal_form(tree).unwrap();
    let mut spe = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                let p = [a, b, c];
                // Optimal at every subgame: the mover cannot gain by switching there, given later play.
                let sub_ok = (0..3).all(|k| {
                    let mut alt = p;
                    alt[k] = 1 - p[k];
                    let from = |q: &[usize; 3]| -> f64 {
                        let mut pr = *q;
                        pr[..k].iter_mut().for_each(|x| *x = 0);
                        n.payoff(k, &pr)
                    };
                    from(&p) >= from(&alt)
                });
                if sub_ok {
                    spe.push(p);
                }
            }
        }
    }
    assert_eq!(spe.len(), 1);
    let bi = bi_profile(tree).unwrap();
    let expected: Vec<usize> = (0..3).map(|r| all[r].iter().position(|s| *s == bi[r]).unwrap()).collect();
    assert_eq!(spe[0].to_vec(), expected);
    let heights = node_heights(tree);
    assert_eq!(heights[tree.find_node("n0").unwrap()], 3);
    assert!(heights[tree.find_node("end").unwrap()].is_zero());
}
