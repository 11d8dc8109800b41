use sslab_beliefs::{make_supportive_priors, DirichletPrior};
use sslab_game::{BehaviorProfile, Game, PureStrategy};
use sslab_policy::{solve_policy, Policy, SolveOptions};
use sslab_population::*;

fn corpus(name: &str) -> Game {
    let text = match name {
        "fig1" => include_str!("../../experiments/corpus/fig1.json"),
        "fig7-left" => include_str!("../../experiments/corpus/fig7-left.json"),
        "fig7-right" => include_str!("../../experiments/corpus/fig7-right.json"),
        "fig8" => include_str!("../../experiments/corpus/fig8.json"),
        _ => unreachable!(),
    };
    Game::from_json(text).unwrap()
}

fn prior(game: &Game, json: &str) -> DirichletPrior {
    DirichletPrior::from_json(&game.tree, json).unwrap()
}

fn pure_profile(game: &Game, names: &[&str]) -> BehaviorProfile {
    let ps: Vec<PureStrategy> = names.iter().enumerate().map(|(r, n)| PureStrategy::parse(&game.tree, r, n).unwrap()).collect();
    BehaviorProfile::from_pure(&game.tree, &ps)
}

fn strategy_name(game: &Game, p: &Policy, x: usize) -> String {
    p.model.strategies[p.choice[x] as usize].name(&game.tree)
}

fn fig1_probe() -> (Game, Policy) {
    let g = corpus("fig1");
    let p = solve_policy(&g, &prior(&g, r#"{"role": 1, "weights": {"h2": {"L": 1, "R": 1}}}"#), 0.95, 0.99, &SolveOptions::default())
        .unwrap();
    (g, p)
}

fn fig8_priors(g: &Game) -> Vec<DirichletPrior> {
    vec![
        prior(g, r#"{"role": 1, "weights": {"h2": {"X": 1, "Y": 20}}}"#),
        prior(g, r#"{"role": 2, "weights": {"h1": {"A": 1, "B": 1, "C": 10}}}"#),
    ]
}

#[test]
fn no_survivors_means_all_newborn() {
    let (g, p) = fig1_probe();
    let pi = pure_profile(&g, &["Out", "R"]);
    let mut mu = PopulationState::newborn(&p);
    mu.mass[0] = 0.25;
    mu.mass[3] = 0.75;
    let (next, report) = update_rule(&p, &mu, &pi, 0.0, 0.0).unwrap();
    assert_eq!(next.support(), vec![(0, 1.0)]);
    assert_eq!(report.dropped, 0.0);
    let r = aggregate_response(&g.tree, &p, &pi, 0.0);
    assert_eq!(r.mix[0][p.choice[0] as usize], 1.0);
}

#[test]
fn one_step_against_fighters() {
    let (g, p) = fig1_probe();
    assert_eq!(strategy_name(&g, &p, 0), "In1");
    let gamma = 0.9;
    let pi = pure_profile(&g, &["Out", "R"]);
    let (next, report) = update_rule(&p, &PopulationState::newborn(&p), &pi, gamma, 0.0).unwrap();
    let mut seen = sslab_beliefs::CountState::empty(&g.tree, 0);
    let h2 = g.tree.find_infoset("h2").unwrap();
    seen.counts[h2][1] = 1;
    let x = p.model.state_index(p.model.key_of(&seen).unwrap()).unwrap();
    assert!((next.mass[x] - gamma).abs() < 1e-15);
    assert!((next.mass[0] - (1.0 - gamma)).abs() < 1e-15);
    assert_eq!(next.support().len(), 2);
    assert!((report.mass_in - report.mass_out - report.dropped).abs() < 1e-15);
}

#[test]
fn truncation_is_reported_and_mass_is_conserved() {
    let (g, p) = fig1_probe();
    let mut pi = BehaviorProfile::uniform(&g.tree);
    let h2 = g.tree.find_infoset("h2").unwrap();
    pi.probs[h2] = vec![1e-9, 1.0 - 1e-9];
    let mut mu = PopulationState::newborn(&p);
    let mut dropped = 0.0;
    for _ in 0..40 {
        let (next, report) = update_rule(&p, &mu, &pi, 0.99, 1e-12).unwrap();
        let expected = (1.0 - 0.99) + 0.99 * report.mass_in;
        assert!((report.mass_out + report.dropped - expected).abs() < 1e-14);
        assert!(next.mass.iter().all(|&m| m == 0.0 || m >= 1e-12));
        dropped += report.dropped;
        mu = next;
    }
    assert!(dropped > 0.0);
    assert!((mu.total() + dropped - 1.0).abs() < 1e-12);
}

#[test]
fn mixture_arithmetic() {
    let (g, p) = fig1_probe();
    let out = (0..p.model.state_count()).find(|&x| strategy_name(&g, &p, x) == "Out").unwrap();
    let mut mu = PopulationState { role: 0, mass: vec![0.0; p.model.state_count()] };
    mu.mass[out] = 1.0;
    assert_eq!(aggregate_strategy(&g.tree, &p, &mu).unwrap().mix[0], vec![1.0, 0.0, 0.0]);
    mu.mass[out] = 0.5;
    mu.mass[0] = 0.5;
    assert_eq!(aggregate_strategy(&g.tree, &p, &mu).unwrap().mix[0], vec![0.5, 0.5, 0.0]);
    mu.mass.iter_mut().for_each(|m| *m = 0.0);
    assert!(aggregate_strategy(&g.tree, &p, &mu).is_err());
    assert!(aggregate_strategy(&g.tree, &p, &PopulationState { role: 0, mass: vec![1.0] }).is_err());
}

#[test]
fn lifespans_are_geometric() {
    let g = corpus("fig8");
    let p = solve_policy(&g, &fig8_priors(&g)[1], 0.5, 0.9, &SolveOptions::default()).unwrap();
    let pi = pure_profile(&g, &["B", "Y"]);
    let gamma = 0.9;
    let mu = stationary(&p, &pi, gamma);
    assert!((mu.total() - 1.0).abs() < 1e-12);
    for t in 0..20u32 {
        let older: f64 = mu.mass.iter().enumerate().filter(|&(x, _)| p.model.total(p.model.states[x]) >= t).map(|(_, m)| m).sum();
        assert!((older - gamma.powi(t as i32)).abs() < 1e-12, "t = {t}: {older}");
    }
}

#[test]
fn stationary_matches_iterated_updates() {
    let (g, p) = fig1_probe();
    let mut pi = BehaviorProfile::uniform(&g.tree);
    let h2 = g.tree.find_infoset("h2").unwrap();
    pi.probs[h2] = vec![0.3, 0.7];
    let gamma = 0.8;
    let exact = stationary(&p, &pi, gamma);
    let mut mu = PopulationState::newborn(&p);
    for _ in 0..400 {
        mu = update_rule(&p, &mu, &pi, gamma, 0.0).unwrap().0;
    }
    let gap = exact.mass.iter().zip(&mu.mass).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-12, "{gap}");
}

#[test]
fn experiment_length_sets_the_entry_share() {
    // Against fighters the probe path is deterministic: entries last until the policy quits.
    let g = corpus("fig1");
    let pr = make_supportive_priors(&g.tree, &[PureStrategy::parse(&g.tree, 0, "Out").unwrap(), PureStrategy::parse(&g.tree, 1, "R").unwrap()], 64)
        .unwrap();
    let (delta, gamma) = (0.95, 0.99);
    let p = solve_policy(&g, &pr.0[0], delta, gamma, &SolveOptions::default()).unwrap();
    let pi = pure_profile(&g, &["Out", "R"]);
    let h2 = g.tree.find_infoset("h2").unwrap();
    let mut seen = sslab_beliefs::CountState::empty(&g.tree, 0);
    let mut periods = 0;
    while let Some(s) = p.action(&seen).filter(|_| strategy_name(&g, &p, p.model.state_index(p.model.key_of(&seen).unwrap()).unwrap()) != "Out") {
        assert_eq!(p.model.strategies[s].name(&g.tree), "In1");
        seen.counts[h2][1] += 1;
        periods += 1;
    }
    let r = aggregate_response(&g.tree, &p, &pi, gamma);
    let expected = 1.0 - gamma.powi(periods);
    assert!((r.mix[0][1] - expected).abs() < 1e-12, "{periods} {:?}", r.mix[0]);
    assert_eq!(r.mix[0][2], 0.0);
}

#[test]
fn fig8_steady_state_is_pooled() {
    let g = corpus("fig8");
    let target = pure_profile(&g, &["B", "Y"]);
    for (delta, gamma) in [(0.0, 0.0), (0.5, 0.5), (0.9, 0.9), (0.0, 0.9)] {
        let l = Learners::solve(&g, &fig8_priors(&g), delta, gamma, &SolveOptions::default()).unwrap();
        let pinned = l.response(&target);
        assert!(pinned.sup_distance(&target) < 1e-12);
        let rep = steady_state(&l, &BehaviorProfile::uniform(&g.tree), &SteadyOptions::default()).unwrap();
        assert!(rep.best.converged);
        assert!(rep.best.profile.sup_distance(&target) < 1e-6, "{delta} {gamma}: {:?}", rep.best.profile.probs);
        // Re-evaluate the reported residual directly.
        assert!(l.residual(&rep.best.profile) < SteadyOptions::default().tol);
    }
}

#[test]
fn strong_priors_hold_the_fine_partition_fixed() {
    let g = corpus("fig7-left");
    let target = ["Out", "R"];
    let priors = vec![
        prior(&g, r#"{"role": 1, "weights": {"h2": {"L": 1, "R": 10}}}"#),
        prior(&g, r#"{"role": 2, "weights": {"h1": {"Out": 100, "In1": 2, "In2": 1}}}"#),
    ];
    let pi = pure_profile(&g, &target);
    for (delta, gamma) in [(0.0, 0.5), (0.5, 0.9), (0.9, 0.99), (0.99, 0.999)] {
        let l = Learners::solve(&g, &priors, delta, gamma, &SolveOptions::default()).unwrap();
        assert_eq!(l.residual(&pi), 0.0, "{delta} {gamma}");
    }
}

#[test]
fn exact_and_simulated_populations_agree() {
    let g = corpus("fig1");
    let priors = vec![
        prior(&g, r#"{"role": 1, "weights": {"h2": {"L": 3, "R": 1}}}"#),
        prior(&g, r#"{"role": 2, "weights": {"h1": {"Out": 1, "In1": 5, "In2": 1}}}"#),
    ];
    let l = Learners::solve(&g, &priors, 0.5, 0.9, &SolveOptions::default()).unwrap();
    let exact = steady_state(&l, &BehaviorProfile::uniform(&g.tree), &SteadyOptions { starts: 2, ..Default::default() }).unwrap();
    assert!(exact.best.converged);
    let p = &exact.best.profile;
    assert!(p.probs[0][0] > 0.05 && p.probs[0][2] > 0.05, "interior mix expected: {:?}", p.probs);
    let opts = SteadyOptions { method: Method::MonteCarlo, mc: McOptions { seed: 7, ..Default::default() }, ..Default::default() };
    let mc = steady_state(&l, &BehaviorProfile::uniform(&g.tree), &opts).unwrap();
    let bound = 3.0 / (McOptions::default().agents as f64).sqrt();
    assert!(mc.best.profile.sup_distance(p) < bound, "{:?} vs {:?}", mc.best.profile.probs, p.probs);
}

#[test]
fn coarse_partition_sweep_retreats_from_fighting() {
    let g = corpus("fig7-right");
    let priors = vec![
        prior(&g, r#"{"role": 1, "weights": {"h2": {"L": 2, "R": 1}}}"#),
        prior(&g, r#"{"role": 2, "weights": {"h1": {"Out": 1, "In1": 2, "In2": 1}}}"#),
    ];
    let cfg = SweepConfig {
        deltas: vec![0.99],
        gammas: vec![vec![0.991, 0.995, 0.999]],
        solve: SolveOptions::default(),
        steady: SteadyOptions { starts: 1, ..Default::default() },
        monitors: vec![Monitor { name: "fight".into(), infoset: "h2".into(), action: "R".into(), per_survival: false }],
        cauchy_tol: 0.05,
    };
    let res = patient_sweep(&g, &priors, &BehaviorProfile::uniform(&g.tree), &cfg).unwrap();
    let fight = &res.series("fight")[0];
    assert!(fight.windows(2).all(|w| w[1] < w[0]), "{fight:?}");
    assert!(*fight.last().unwrap() <= 0.2);
    assert!(res.cells[0].iter().all(|c| c.converged));
    assert!(res.inner[0].cauchy);
    assert!(!res.discipline);
    let slack = &res.terminal().nash_slack;
    assert!(slack.iter().all(|&s| s < 0.05), "{slack:?}");
}

#[test]
fn nash_slack_vanishes_at_equilibrium() {
    let g = corpus("fig1");
    assert!(nash_slack(&g, &pure_profile(&g, &["Out", "R"])).iter().all(|&s| s.abs() < 1e-15));
    let slack = nash_slack(&g, &pure_profile(&g, &["In1", "L"]));
    assert!((slack[0] - 3.0).abs() < 1e-12 && (slack[1] - 2.0).abs() < 1e-12, "{slack:?}");
}

#[test]
fn bad_grids_are_rejected() {
    let g = corpus("fig8");
    let init = BehaviorProfile::uniform(&g.tree);
    let base = SweepConfig {
        deltas: vec![0.5],
        gammas: vec![vec![0.95]],
        solve: SolveOptions::default(),
        steady: SteadyOptions::default(),
        monitors: Vec::new(),
        cauchy_tol: 0.05,
    };
    let run = |cfg: &SweepConfig| patient_sweep(&g, &fig8_priors(&g), &init, cfg);
    assert!(run(&SweepConfig { gammas: vec![vec![0.4]], ..base.clone() }).is_err());
    assert!(run(&SweepConfig { gammas: vec![vec![1.0]], ..base.clone() }).is_err());
    assert!(run(&SweepConfig { gammas: vec![], ..base.clone() }).is_err());
    assert!(run(&SweepConfig { gammas: vec![vec![]], ..base.clone() }).is_err());
    let mut bad = base.clone();
    bad.monitors.push(Monitor { name: "x".into(), infoset: "nope".into(), action: "A".into(), per_survival: false });
    assert!(run(&bad).is_err());
    let ok = run(&base).unwrap();
    assert!(ok.discipline && ok.cells[0][0].converged);
    assert!(steady_state(&Learners::solve(&g, &fig8_priors(&g), 0.5, 0.5, &SolveOptions::default()).unwrap(), &init, &SteadyOptions { damping: 0.0, ..Default::default() }).is_err());
}

#[test]
fn options_parse_from_json() {
    let o: SteadyOptions = serde_json::from_str(r#"{"method": "mc", "starts": 2, "mc": {"agents": 10}}"#).unwrap();
    assert_eq!(o.method, Method::MonteCarlo);
    assert_eq!(o.mc.agents, 10);
    assert_eq!(o.damping, 0.5);
    assert!(serde_json::from_str::<SteadyOptions>(r#"{"dampng": 0.5}"#).is_err());
}
