use sslab_game::{validate_game, Game, GameError, GameFile, NodeSpec, PartitionSpec, ViolationKind};

const FIG1: &str = include_str!("../../experiments/corpus/fig1.json");

const CORPUS: &[(&str, &str)] = &[
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

fn fig1_file() -> GameFile {
    GameFile::from_json(FIG1).unwrap()
}

#[test]
fn every_corpus_game_is_admissible() {
    for (name, text) in CORPUS {
        let report = validate_game(&GameFile::from_json(text).unwrap());
        assert!(report.is_empty(), "{name}: {report}");
        Game::from_json(text).unwrap();
    }
}

#[test]
fn pooling_unequal_payoffs_breaks_measurability() {
    let mut file = fig1_file();
    file.partitions[0] = PartitionSpec {
        role: 1,
        cells: vec![
            vec!["z_out".into(), "z_in2_L".into()],
            vec!["z_in1_L".into()],
            vec!["z_in1_R".into()],
            vec!["z_in2_R".into()],
        ],
    };
    let report = validate_game(&file);
    assert!(report.has(ViolationKind::PayoffMeasurability));
    assert!(report.to_string().contains("payoff measurability violated"));
}

#[test]
fn mismatched_action_sets_in_one_infoset() {
    let mut file = fig1_file();
    let node = file.nodes.iter_mut().find(|n| n.id == "n_in2").unwrap();
    node.edges[1].action = "M".into();
    let report = validate_game(&file);
    assert!(report.has(ViolationKind::InfoSetInconsistency));
    assert!(report.to_string().contains("information set inconsistency"));
}

#[test]
fn cell_not_generated_by_revealed_actions() {
    // Same P2 payoff, but the two terminals share no path action.
    let mut file = fig1_file();
    file.partitions[1] = PartitionSpec {
        role: 2,
        cells: vec![
            vec!["z_out".into()],
            vec!["z_in1_L".into()],
            vec!["z_in1_R".into(), "z_in2_L".into()],
            vec!["z_in2_R".into()],
        ],
    };
    let report = validate_game(&file);
    assert!(report.has(ViolationKind::ActionMeasurability), "{report}");
    assert!(!report.has(ViolationKind::PayoffMeasurability));
}

#[test]
fn partition_must_cover_all_terminals() {
    let mut file = fig1_file();
    file.partitions[0].cells.pop();
    assert!(validate_game(&file).has(ViolationKind::PartitionCoverage));
    let mut file = fig1_file();
    file.partitions[0].cells.push(vec!["z_out".into()]);
    assert!(validate_game(&file).has(ViolationKind::PartitionCoverage));
}

#[test]
fn forgetting_own_move_is_imperfect_recall() {
    let file = GameFile {
        players: 1,
        nodes: vec![
            NodeSpec::decision("r", 1, "h1", &[("a", "x"), ("b", "y")]),
            NodeSpec::decision("x", 1, "h2", &[("c", "z1"), ("d", "z2")]),
            NodeSpec::decision("y", 1, "h2", &[("c", "z3"), ("d", "z4")]),
            NodeSpec::terminal("z1", &[1.0]),
            NodeSpec::terminal("z2", &[2.0]),
            NodeSpec::terminal("z3", &[3.0]),
            NodeSpec::terminal("z4", &[4.0]),
        ],
        partitions: vec![],
    };
    assert!(validate_game(&file).has(ViolationKind::PerfectRecall));
}

#[test]
fn structural_errors_are_reported() {
    let mut file = fig1_file();
    // A second parent for an existing node.
    file.nodes[2].edges[0].child = "z_in2_L".into();
    assert!(validate_game(&file).has(ViolationKind::TreeStructure));

    let mut file = fig1_file();
    file.nodes[0].edges[0].child = "nowhere".into();
    assert!(validate_game(&file).has(ViolationKind::TreeStructure));

    let mut file = fig1_file();
    file.nodes[1].payoffs = Some(vec![0.0]);
    assert!(validate_game(&file).has(ViolationKind::TreeStructure));
}

#[test]
fn unknown_keys_are_rejected() {
    let text = FIG1.replacen("\"players\": 2,", "\"players\": 2, \"chance\": [],", 1);
    assert!(matches!(GameFile::from_json(&text), Err(GameError::Schema(_))));
}

#[test]
fn malformed_file_error_names_path() {
    let dir = std::env::temp_dir().join(format!("sslab-game-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"players\": 2, \"nodes\": 5}").unwrap();
    let err = Game::load(&path).unwrap_err();
    assert!(err.to_string().contains("broken.json"), "{err}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_partition_defaults_to_discrete() {
    let game = Game::from_json(include_str!("../../experiments/corpus/fig3-left.json")).unwrap();
    for r in 0..2 {
        assert!(game.partition(r).is_discrete());
    }
}

#[test]
fn file_round_trip_preserves_game() {
    for (name, text) in CORPUS {
        let game = Game::from_json(text).unwrap();
        let again = Game::from_file(&game.to_file()).unwrap();
        assert_eq!(game.tree.terminals().len(), again.tree.terminals().len(), "{name}");
        for r in 0..game.players() {
            assert_eq!(game.partition(r).cells, again.partition(r).cells, "{name}");
        }
    }
}
