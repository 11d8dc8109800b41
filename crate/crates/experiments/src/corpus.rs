//! The encoded example games and the payoff constraints each must satisfy.

use serde::Serialize;
use sslab_game::{derive_normal_form, Game, GameTree};

use crate::ExperimentError;

pub const CORPUS: [(&str, &str); 13] = [
    ("fig1", include_str!("../corpus/fig1.json")),
    ("fig2", include_str!("../corpus/fig2.json")),
    ("fig3-left", include_str!("../corpus/fig3-left.json")),
    ("fig3-right", include_str!("../corpus/fig3-right.json")),
    ("fig4-left", include_str!("../corpus/fig4-left.json")),
    ("fig4-right", include_str!("../corpus/fig4-right.json")),
    ("fig5-left", include_str!("../corpus/fig5-left.json")),
    ("fig5-right", include_str!("../corpus/fig5-right.json")),
    ("fig6", include_str!("../corpus/fig6.json")),
    ("fig7-left", include_str!("../corpus/fig7-left.json")),
    ("fig7-right", include_str!("../corpus/fig7-right.json")),
    ("fig8", include_str!("../corpus/fig8.json")),
    ("fig9", include_str!("../corpus/fig9.json")),
];

pub fn corpus_names() -> impl Iterator<Item = &'static str> {
    CORPUS.iter().map(|(n, _)| *n)
}

pub fn corpus_text(name: &str) -> Option<&'static str> {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// A corpus game, validated and checked against its constraints.
pub fn corpus_game(name: &str) -> Result<Game, ExperimentError> {
    let text = corpus_text(name).ok_or_else(|| ExperimentError::UnknownGame(name.to_string()))?;
    let game = Game::from_json(text).map_err(|e| ExperimentError::context(format!("corpus game {name}"), e))?;
    let failed: Vec<String> = check_constraints(name, &game)?.into_iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if !failed.is_empty() {
        return Err(ExperimentError::Constraint { game: name.to_string(), failed });
    }
    Ok(game)
}

/// Loads a game file from disk.
pub fn load_game(path: impl AsRef<std::path::Path>) -> Result<Game, ExperimentError> {
    let path = path.as_ref();
    Game::load(path).map_err(|e| ExperimentError::context(path.display().to_string(), e))
}

/// A corpus name if there is one by that name, otherwise a path.
pub fn resolve_game(reference: &str) -> Result<Game, ExperimentError> {
    if corpus_text(reference).is_some() {
        corpus_game(reference)
    } else if std::path::Path::new(reference).exists() {
        load_game(reference)
    } else {
        Err(ExperimentError::UnknownGame(reference.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub pass: bool,
}

/// Payoff table of the normal form, keyed by strategy names in role order.
type Table = &'static [(&'static [&'static str], &'static [f64])];

const FIG1_TABLE: Table = &[
    (&["Out", "L"], &[0.0, 0.0]),
    (&["Out", "R"], &[0.0, 0.0]),
    (&["In1", "L"], &[-1.0, -1.0]),
    (&["In1", "R"], &[-1.0, 1.0]),
    (&["In2", "L"], &[2.0, 1.0]),
    (&["In2", "R"], &[-5.0, -1.0]),
];

const FIG5_TABLE: Table = &[
    (&["Pass", "Pass", "Pass"], &[2.0, 2.0, 2.0]),
    (&["Pass", "Drop", "Pass"], &[0.0, 1.0, 0.0]),
    (&["Drop", "Pass", "Pass"], &[1.0, 0.0, 0.0]),
    (&["Drop", "Drop", "Pass"], &[1.0, 0.0, 0.0]),
    (&["Pass", "Pass", "Drop"], &[0.0, 0.0, 1.0]),
    (&["Pass", "Drop", "Drop"], &[0.0, 1.0, 0.0]),
    (&["Drop", "Pass", "Drop"], &[1.0, 0.0, 0.0]),
    (&["Drop", "Drop", "Drop"], &[1.0, 0.0, 0.0]),
];

const FIG8_TABLE: Table = &[
    (&["A", "X"], &[2.0, 2.0]),
    (&["A", "Y"], &[0.0, 0.0]),
    (&["B", "X"], &[1.0, 1.0]),
    (&["B", "Y"], &[1.0, 1.0]),
    (&["C", "X"], &[-10.0, 0.0]),
    (&["C", "Y"], &[-10.0, 1.0]),
];

fn table_check(tree: &GameTree, table: Table) -> Result<bool, ExperimentError> {
    let nf = derive_normal_form(tree)?;
    if nf.profile_count() != table.len() {
        return Ok(false);
    }
    for (names, payoffs) in table {
        let Some(profile) = names.iter().enumerate().map(|(r, n)| nf.strategy_index(r, n)).collect::<Option<Vec<_>>>() else {
            return Ok(false);
        };
        if nf.payoffs[nf.index(&profile)] != *payoffs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn payoff(tree: &GameTree, node: &str, role: usize) -> Option<f64> {
    tree.find_node(node).map(|z| tree.payoffs(z)[role])
}

fn fig2_checks(tree: &GameTree) -> Vec<ConstraintCheck> {
    let u = |node: &str, role: usize| payoff(tree, node, role).unwrap_or(f64::NAN);
    let after = ["out", "in1", "in2"];
    let check = |name: &str, pass: bool| ConstraintCheck { name: name.to_string(), pass };
    vec![
        check("P1 gets 0 after Out", u("z_out", 0) == 0.0),
        check("P1 gets 1 whenever P3 plays L", after.iter().all(|a| u(&format!("z_{a}_L"), 0) == 1.0)),
        check("P1 gets -1 whenever P3 plays R", after.iter().all(|a| u(&format!("z_{a}_R"), 0) == -1.0)),
        check("P2 gets 0 after Out", u("z_out_L", 1) == 0.0 && u("z_out_R", 1) == 0.0),
        check("In2 pays P2 strictly less than In1 against L", u("z_in2_L", 1) < u("z_in1_L", 1)),
        check("In2 pays P2 strictly less than In1 against R", u("z_in2_R", 1) < u("z_in1_R", 1)),
        check("P3 prefers L against In1", u("z_in1_L", 2) > u("z_in1_R", 2)),
        check("P3 prefers R against In2", u("z_in2_R", 2) > u("z_in2_L", 2)),
    ]
}

/// Constraints recorded for a corpus game; empty for games without any.
pub fn check_constraints(name: &str, game: &Game) -> Result<Vec<ConstraintCheck>, ExperimentError> {
    let tree = &game.tree;
    let table = |label: &str, t: Table| -> Result<Vec<ConstraintCheck>, ExperimentError> {
        Ok(vec![ConstraintCheck { name: format!("normal form matches the {label} table"), pass: table_check(tree, t)? }])
    };
    match name {
        "fig1" | "fig7-left" | "fig7-right" => table("entry game", FIG1_TABLE),
        "fig5-left" | "fig5-right" | "fig6" => table("three-player pass/drop", FIG5_TABLE),
        "fig8" => table("A/B/C against X/Y", FIG8_TABLE),
        "fig2" => Ok(fig2_checks(tree)),
        _ => Ok(Vec::new()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    pub players: usize,
    pub infosets: usize,
    pub terminals: usize,
    pub strategies: Vec<u128>,
    pub constraints: Vec<ConstraintCheck>,
}

pub fn corpus_list() -> Result<Vec<CorpusEntry>, ExperimentError> {
    corpus_names()
        .map(|name| {
            let game = corpus_game(name)?;
            let tree = &game.tree;
            Ok(CorpusEntry {
                name: name.to_string(),
                players: game.players(),
                infosets: tree.infosets().len(),
                terminals: tree.terminals().len(),
                strategies: (0..game.players()).map(|r| tree.strategy_count(r)).collect(),
                constraints: check_constraints(name, &game)?,
            })
        })
        .collect()
}
