//! The `.seqgame` text format.
//!
//! ```text
//! # entry deterrence
//! players E I
//! at / actions E: Out In
//! at /(In,wait) actions I: Fight Accommodate
//! payoff /(Out,wait) = 0 2
//! payoff /(In,wait)/(wait,Fight) = -1 -1
//! payoff /(In,wait)/(wait,Accommodate) = 1 1
//! ```
//!
//! A player omitted from an `at` line has the single action `wait` there.
//! Static games may use a `matrix` block instead: a header listing every
//! player's actions, then one row per action profile of all players but the
//! last, with `|`-separated cells for the last player's actions:
//!
//! ```text
//! players Row Col
//! matrix Row: T B Col: L R
//! (T): 1 1 | 0 0
//! (B): 0 0 | 1 1
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::game_core::{decode_profile, Game, GameError, Tree, DEFAULT_STRATEGY_CAP};
use crate::hyperreal::{parse_rational, Rational};

pub type Path = Vec<Vec<String>>;

pub const WAIT: &str = "wait";

/// Normalized document: static shorthand is already expanded.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GameDoc {
    pub players: Vec<String>,
    pub stages: BTreeMap<Path, Vec<Vec<String>>>,
    pub payoffs: BTreeMap<Path, Vec<Rational>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind} error: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Syntax => "syntax",
            ErrorKind::Semantic => "semantic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElaborateError {
    #[error("invalid document: {0}")]
    Semantic(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
}

const PUNCT: &[char] = &['(', ')', '/', ',', ':', '=', '|'];

fn tokenize(line: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut word = String::new();
    let mut start = 0;
    for (col, c) in line.chars().enumerate() {
        let col = col + 1;
        if c == '#' {
            break;
        }
        // A slash inside a word belongs to a rational such as 3/4.
        let glue = c == '/' && !word.is_empty();
        if c.is_whitespace() || (PUNCT.contains(&c) && !glue) {
            if !word.is_empty() {
                out.push(Token { tok: Tok::Word(std::mem::take(&mut word)), column: start });
            }
            if !c.is_whitespace() {
                out.push(Token { tok: Tok::Punct(c), column: col });
            }
        } else {
            if word.is_empty() {
                start = col;
            }
            word.push(c);
        }
    }
    if !word.is_empty() {
        out.push(Token { tok: Tok::Word(word), column: start });
    }
    out
}

pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '-')
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.column)
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError { kind: ErrorKind::Syntax, line: self.line, column: self.column(), message: message.into() }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.syntax(format!("expected '{c}'"))),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(p)) if *p == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<&'a str, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.syntax("expected a name or number")),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let col = self.column();
        let w = self.word()?;
        if is_ident(w) {
            Ok(w.to_string())
        } else {
            Err(ParseError { kind: ErrorKind::Syntax, line: self.line, column: col, message: format!("invalid name '{w}'") })
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.syntax(format!("expected '{kw}'"))),
        }
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let col = self.column();
        let w = self.word()?;
        parse_rational(w).ok_or_else(|| ParseError {
            kind: ErrorKind::Syntax,
            line: self.line,
            column: col,
            message: format!("invalid rational '{w}' (use an integer or p/q)"),
        })
    }

    fn rationals(&mut self) -> Result<Vec<Rational>, ParseError> {
        let mut out = Vec::new();
        while matches!(self.peek(), Some(Tok::Word(_))) {
            out.push(self.rational()?);
        }
        Ok(out)
    }

    fn path(&mut self) -> Result<Path, ParseError> {
        self.punct('/')?;
        let mut path = Vec::new();
        if !matches!(self.peek(), Some(Tok::Punct('('))) {
            return Ok(path);
        }
        loop {
            path.push(self.profile()?);
            if !(matches!(self.peek(), Some(Tok::Punct('/'))) && matches!(self.tokens.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Punct('(')))) {
                return Ok(path);
            }
            self.pos += 1;
        }
    }

    fn profile(&mut self) -> Result<Vec<String>, ParseError> {
        self.punct('(')?;
        let mut actions = Vec::new();
        if self.eat_punct(')') {
            return Ok(actions);
        }
        loop {
            actions.push(self.ident()?);
            if self.eat_punct(')') {
                return Ok(actions);
            }
            self.punct(',')?;
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.done() {
            Ok(())
        } else {
            Err(self.syntax("unexpected trailing input"))
        }
    }
}

fn semantic(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { kind: ErrorKind::Semantic, line, column, message: message.into() }
}

pub fn path_label(path: &Path) -> String {
    if path.is_empty() {
        return "/".into();
    }
    path.iter().map(|p| format!("/({})", p.join(","))).collect()
}

/// Parses raw bytes, rejecting invalid UTF-8 with a located diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<GameDoc, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
            let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
            Err(ParseError { kind: ErrorKind::Syntax, line, column, message: "input is not valid UTF-8".into() })
        }
    }
}

struct Located {
    line: usize,
    column: usize,
}

pub fn parse(text: &str) -> Result<GameDoc, ParseError> {
    let mut doc = GameDoc::default();
    let mut have_players = false;
    let mut player_line = Located { line: 1, column: 1 };
    let mut stage_at: BTreeMap<Path, Located> = BTreeMap::new();
    let mut payoff_at: BTreeMap<Path, Located> = BTreeMap::new();
    let mut matrix: Option<(Located, Vec<Vec<String>>, Vec<(Located, Vec<String>, Vec<Vec<Rational>>)>)> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let end = raw.chars().count() + 1;
        let mut cur = Cursor { tokens: &tokens, pos: 0, line, end };
        let head_col = cur.column();
        if let Some(Tok::Punct('(')) = cur.peek() {
            let Some((_, _, rows)) = matrix.as_mut() else {
                return Err(cur.syntax("matrix row outside a matrix block"));
            };
            let profile = cur.profile()?;
            cur.punct(':')?;
            let mut cells = vec![cur.rationals()?];
            while cur.eat_punct('|') {
                cells.push(cur.rationals()?);
            }
            cur.expect_end()?;
            rows.push((Located { line, column: head_col }, profile, cells));
            continue;
        }
        let head = cur.word()?;
        if !have_players && head != "players" {
            return Err(semantic(line, head_col, "the first statement must be 'players'"));
        }
        match head {
            "players" => {
                if have_players {
                    return Err(semantic(line, head_col, "players declared twice"));
                }
                let mut seen = BTreeSet::new();
                while !cur.done() {
                    let col = cur.column();
                    let name = cur.ident()?;
                    if !seen.insert(name.clone()) {
                        return Err(semantic(line, col, format!("duplicate player '{name}'")));
                    }
                    doc.players.push(name);
                }
                if doc.players.is_empty() {
                    return Err(cur.syntax("expected at least one player name"));
                }
                have_players = true;
                player_line = Located { line, column: head_col };
            }
            "at" => {
                if matrix.is_some() {
                    return Err(semantic(line, head_col, "'at' cannot be mixed with a matrix block"));
                }
                let path_col = cur.column();
                let path = cur.path()?;
                cur.keyword("actions")?;
                let mut actions: Vec<Option<Vec<String>>> = vec![None; doc.players.len()];
                let mut any = false;
                while !cur.done() {
                    let col = cur.column();
                    let who = cur.ident()?;
                    let Some(i) = doc.players.iter().position(|p| *p == who) else {
                        return Err(semantic(line, col, format!("undeclared player '{who}'")));
                    };
                    if actions[i].is_some() {
                        return Err(semantic(line, col, format!("actions for '{who}' listed twice")));
                    }
                    cur.punct(':')?;
                    let mut list = Vec::new();
                    while matches!(cur.peek(), Some(Tok::Word(_))) && !matches!(cur.tokens.get(cur.pos + 1).map(|t| &t.tok), Some(Tok::Punct(':'))) {
                        let acol = cur.column();
                        let a = cur.ident()?;
                        if list.contains(&a) {
                            return Err(semantic(line, acol, format!("duplicate action '{a}'")));
                        }
                        list.push(a);
                    }
                    if list.is_empty() {
                        return Err(cur.syntax(format!("player '{who}' needs at least one action")));
                    }
                    actions[i] = Some(list);
                    any = true;
                }
                if !any {
                    return Err(cur.syntax("expected 'player: actions'"));
                }
                if stage_at.contains_key(&path) {
                    return Err(semantic(line, path_col, format!("duplicate history {}", path_label(&path))));
                }
                let actions = actions.into_iter().map(|a| a.unwrap_or_else(|| vec![WAIT.to_string()])).collect();
                stage_at.insert(path.clone(), Located { line, column: path_col });
                doc.stages.insert(path, actions);
            }
            "payoff" => {
                if matrix.is_some() {
                    return Err(semantic(line, head_col, "'payoff' cannot be mixed with a matrix block"));
                }
                let path_col = cur.column();
                let path = cur.path()?;
                cur.punct('=')?;
                let values = cur.rationals()?;
                cur.expect_end()?;
                if values.len() != doc.players.len() {
                    return Err(semantic(line, path_col, format!("expected {} payoffs, found {}", doc.players.len(), values.len())));
                }
                if payoff_at.contains_key(&path) {
                    return Err(semantic(line, path_col, format!("duplicate payoff for {}", path_label(&path))));
                }
                payoff_at.insert(path.clone(), Located { line, column: path_col });
                doc.payoffs.insert(path, values);
            }
            "matrix" => {
                if matrix.is_some() || !doc.stages.is_empty() || !doc.payoffs.is_empty() {
                    return Err(semantic(line, head_col, "a matrix block must be the only game body"));
                }
                let mut lists: Vec<Option<Vec<String>>> = vec![None; doc.players.len()];
                while !cur.done() {
                    let col = cur.column();
                    let who = cur.ident()?;
                    let Some(i) = doc.players.iter().position(|p| *p == who) else {
                        return Err(semantic(line, col, format!("undeclared player '{who}'")));
                    };
                    if lists[i].is_some() {
                        return Err(semantic(line, col, format!("actions for '{who}' listed twice")));
                    }
                    cur.punct(':')?;
                    let mut list = Vec::new();
                    while matches!(cur.peek(), Some(Tok::Word(_))) && !matches!(cur.tokens.get(cur.pos + 1).map(|t| &t.tok), Some(Tok::Punct(':'))) {
                        let acol = cur.column();
                        let a = cur.ident()?;
                        if list.contains(&a) {
                            return Err(semantic(line, acol, format!("duplicate action '{a}'")));
                        }
                        list.push(a);
                    }
                    if list.is_empty() {
                        return Err(cur.syntax(format!("player '{who}' needs at least one action")));
                    }
                    lists[i] = Some(list);
                }
                let mut full = Vec::new();
                for (i, l) in lists.into_iter().enumerate() {
                    match l {
                        Some(l) => full.push(l),
                        None => return Err(semantic(line, head_col, format!("matrix header is missing player '{}'", doc.players[i]))),
                    }
                }
                matrix = Some((Located { line, column: head_col }, full, Vec::new()));
            }
            other => return Err(semantic(line, head_col, format!("unknown statement '{other}'"))),
        }
    }
    if !have_players {
        return Err(semantic(last_line.max(1), 1, "missing 'players' declaration"));
    }
    if let Some((at, lists, rows)) = matrix {
        expand_matrix(&mut doc, at, lists, rows)?;
        return Ok(doc);
    }
    check_tree(&doc, &stage_at, &payoff_at, &player_line)?;
    Ok(doc)
}

type MatrixRow = (Located, Vec<String>, Vec<Vec<Rational>>);

fn expand_matrix(doc: &mut GameDoc, at: Located, lists: Vec<Vec<String>>, rows: Vec<MatrixRow>) -> Result<(), ParseError> {
    let n = doc.players.len();
    let last = &lists[n - 1];
    let mut seen = BTreeSet::new();
    for (loc, profile, cells) in &rows {
        if profile.len() != n - 1 {
            return Err(semantic(loc.line, loc.column, format!("row profile needs {} actions", n - 1)));
        }
        for (i, a) in profile.iter().enumerate() {
            if !lists[i].contains(a) {
                return Err(semantic(loc.line, loc.column, format!("action '{a}' is not declared for '{}'", doc.players[i])));
            }
        }
        if !seen.insert(profile.clone()) {
            return Err(semantic(loc.line, loc.column, "duplicate matrix row"));
        }
        if cells.len() != last.len() {
            return Err(semantic(loc.line, loc.column, format!("row needs {} cells, found {}", last.len(), cells.len())));
        }
        for (cell, a) in cells.iter().zip(last) {
            if cell.len() != n {
                return Err(semantic(loc.line, loc.column, format!("each cell needs {n} payoffs")));
            }
            let mut full = profile.clone();
            full.push(a.clone());
            doc.payoffs.insert(vec![full], cell.clone());
        }
    }
    let expected: usize = lists[..n - 1].iter().map(Vec::len).product();
    if seen.len() != expected {
        return Err(semantic(at.line, at.column, format!("matrix needs {expected} rows, found {}", seen.len())));
    }
    doc.stages.insert(Vec::new(), lists);
    Ok(())
}

fn check_tree(
    doc: &GameDoc,
    stage_at: &BTreeMap<Path, Located>,
    payoff_at: &BTreeMap<Path, Located>,
    players: &Located,
) -> Result<(), ParseError> {
    let n = doc.players.len();
    if !doc.stages.contains_key(&Vec::new()) {
        return Err(semantic(players.line, players.column, "missing 'at /' for the root history"));
    }
    // Every declared path must hang off a declared stage with legal actions.
    let attach = |path: &Path, loc: &Located| -> Result<(), ParseError> {
        if path.is_empty() {
            return Ok(());
        }
        let parent = &path[..path.len() - 1];
        let Some(actions) = doc.stages.get(parent) else {
            return Err(semantic(loc.line, loc.column, format!("parent history {} is not declared", path_label(&parent.to_vec()))));
        };
        let profile = &path[path.len() - 1];
        if profile.len() != n {
            return Err(semantic(loc.line, loc.column, format!("action profile needs {n} entries")));
        }
        for (i, a) in profile.iter().enumerate() {
            if !actions[i].contains(a) {
                return Err(semantic(
                    loc.line,
                    loc.column,
                    format!("action '{a}' is not available to '{}' at {}", doc.players[i], path_label(&parent.to_vec())),
                ));
            }
        }
        Ok(())
    };
    for (path, loc) in stage_at {
        if payoff_at.contains_key(path) {
            return Err(semantic(loc.line, loc.column, format!("history {} has both actions and a payoff", path_label(path))));
        }
        attach(path, loc)?;
    }
    for (path, loc) in payoff_at {
        if path.is_empty() {
            return Err(semantic(loc.line, loc.column, "the root history cannot be terminal"));
        }
        attach(path, loc)?;
    }
    let total = doc.stages.len() + doc.payoffs.len();
    for (path, actions) in &doc.stages {
        let loc = &stage_at[path];
        let radices: Vec<usize> = actions.iter().map(Vec::len).collect();
        let count = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
        match count {
            Some(c) if c < total => {
                for k in 0..c {
                    let idx = decode_profile(k, &radices);
                    let mut child = path.clone();
                    child.push(idx.iter().enumerate().map(|(i, &a)| actions[i][a].clone()).collect());
                    if !doc.stages.contains_key(&child) && !doc.payoffs.contains_key(&child) {
                        return Err(semantic(loc.line, loc.column, format!("missing payoff for {}", path_label(&child))));
                    }
                }
            }
            _ => return Err(semantic(loc.line, loc.column, format!("history {} has more successors than the document declares", path_label(path)))),
        }
    }
    Ok(())
}

fn format_actions(doc: &GameDoc, actions: &[Vec<String>]) -> String {
    let mut parts = Vec::new();
    let trivial = |a: &Vec<String>| a.len() == 1 && a[0] == WAIT;
    let all_trivial = actions.iter().all(trivial);
    for (i, list) in actions.iter().enumerate() {
        if trivial(list) && !(all_trivial && i == 0) {
            continue;
        }
        parts.push(format!("{}: {}", doc.players[i], list.join(" ")));
    }
    parts.join(" ")
}

/// Canonical text: players, then `at` lines, then `payoff` lines, each
/// sorted by path.
pub fn serialize(doc: &GameDoc) -> String {
    let mut out = format!("players {}\n", doc.players.join(" "));
    for (path, actions) in &doc.stages {
        out.push_str(&format!("at {} actions {}\n", path_label(path), format_actions(doc, actions)));
    }
    for (path, values) in &doc.payoffs {
        let vals: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("payoff {} = {}\n", path_label(path), vals.join(" ")));
    }
    out
}

pub fn elaborate(doc: &GameDoc) -> Result<Game, ElaborateError> {
    elaborate_with_cap(doc, DEFAULT_STRATEGY_CAP)
}

pub fn elaborate_with_cap(doc: &GameDoc, cap: usize) -> Result<Game, ElaborateError> {
    let tree = build(doc, &Vec::new(), 0)?;
    Ok(Game::with_cap(doc.players.clone(), tree, cap)?)
}

fn build(doc: &GameDoc, path: &Path, depth: usize) -> Result<Tree, ElaborateError> {
    if depth > doc.stages.len() {
        return Err(ElaborateError::Semantic("history tree is cyclic or too deep".into()));
    }
    if let Some(values) = doc.payoffs.get(path) {
        if values.len() != doc.players.len() {
            return Err(ElaborateError::Semantic(format!("payoff arity mismatch at {}", path_label(path))));
        }
        return Ok(Tree::Terminal { payoffs: values.clone() });
    }
    let Some(actions) = doc.stages.get(path) else {
        return Err(ElaborateError::Semantic(format!("missing payoff for {}", path_label(path))));
    };
    if actions.len() != doc.players.len() || actions.iter().any(Vec::is_empty) {
        return Err(ElaborateError::Semantic(format!("malformed action sets at {}", path_label(path))));
    }
    let radices: Vec<usize> = actions.iter().map(Vec::len).collect();
    let count: usize = radices.iter().product();
    let mut children = Vec::with_capacity(count);
    for k in 0..count {
        let idx = decode_profile(k, &radices);
        let mut child = path.clone();
        child.push(idx.iter().enumerate().map(|(i, &a)| actions[i][a].clone()).collect());
        children.push(build(doc, &child, depth + 1)?);
    }
    Ok(Tree::Decision { actions: actions.clone(), children })
}

pub fn load(text: &str) -> Result<Game, Box<dyn std::error::Error + Send + Sync>> {
    Ok(elaborate(&parse(text)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperreal::{integer, rational};

    const PENNIES: &str = "players Row Col\nmatrix Row: H T Col: H T\n(H): 1 -1 | -1 1\n(T): -1 1 | 1 -1\n";

    const ENTRY: &str = "
# entry
players E I
at / actions E: Out In
at /(In,wait) actions I: F A   # incumbent
payoff /(Out,wait) = 0 2
payoff /(In,wait)/(wait,F) = -1 -1
payoff /(In,wait)/(wait,A) = 1 1/2
";

    #[test]
    fn static_document() {
        let doc = parse(PENNIES).unwrap();
        assert_eq!(doc.stages.len(), 1);
        assert_eq!(doc.payoffs.len(), 4);
        let g = elaborate(&doc).unwrap();
        assert_eq!(g.strategies(0).len(), 2);
        assert_eq!(g.strategies(1).len(), 2);
        assert!(g.is_static());
    }

    #[test]
    fn sequential_document() {
        let doc = parse(ENTRY).unwrap();
        assert_eq!(doc.stages[&vec![]], vec![vec!["Out".to_string(), "In".into()], vec![WAIT.to_string()]]);
        assert_eq!(doc.payoffs[&vec![vec!["In".to_string(), "wait".into()], vec!["wait".into(), "A".into()]]][1], rational(1, 2));
        let g = elaborate(&doc).unwrap();
        assert_eq!(g.histories().len(), doc.stages.len());
        assert_eq!(g.terminals().count(), doc.payoffs.len());
    }

    #[test]
    fn missing_payoff_is_named() {
        let text = ENTRY.replace("payoff /(Out,wait) = 0 2\n", "");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Semantic);
        assert!(err.message.contains("/(Out,wait)"), "{err}");
        assert_eq!(err.line, 4);
    }

    #[test]
    fn diagnostics_carry_locations() {
        let err = parse("players A\nat / actions B: x\n").unwrap_err();
        assert_eq!((err.kind, err.line, err.column), (ErrorKind::Semantic, 2, 14));
        let err = parse("players A\nat / actions A: x\npayoff /(x) = 1.5\n").unwrap_err();
        assert_eq!((err.kind, err.line, err.column), (ErrorKind::Syntax, 3, 15));
        let err = parse("players A\nat / actions A x\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::Syntax);
        let err = parse("players A\nat / actions A: x\nat / actions A: y\npayoff /(x) = 1\n").unwrap_err();
        assert!(err.message.contains("duplicate history"));
        let err = parse_bytes(b"players A\n\xff").unwrap_err();
        assert_eq!((err.line, err.column), (2, 1));
    }

    #[test]
    fn undeclared_action_in_path() {
        let err = parse("players A\nat / actions A: x\npayoff /(x) = 1\npayoff /(y) = 2\n").unwrap_err();
        assert_eq!(err.line, 4);
        assert!(err.message.contains("'y'"));
    }

    #[test]
    fn one_player_one_action_is_three_lines() {
        let mut doc = GameDoc { players: vec!["P".into()], ..GameDoc::default() };
        doc.stages.insert(vec![], vec![vec!["a".into()]]);
        doc.payoffs.insert(vec![vec!["a".into()]], vec![integer(0)]);
        let text = serialize(&doc);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(parse(&text).unwrap(), doc);
    }

    #[test]
    fn round_trip_and_idempotence() {
        for text in [PENNIES, ENTRY] {
            let doc = parse(text).unwrap();
            let canon = serialize(&doc);
            assert_eq!(parse(&canon).unwrap(), doc);
            assert_eq!(serialize(&parse(&canon).unwrap()), canon);
        }
    }

    #[test]
    fn all_wait_stage_round_trips() {
        let text = "players A B\nat / actions A: wait\nat /(wait,wait) actions B: x y\npayoff /(wait,wait)/(wait,x) = 0 1\npayoff /(wait,wait)/(wait,y) = 1 0\n";
        let doc = parse(text).unwrap();
        assert_eq!(parse(&serialize(&doc)).unwrap(), doc);
    }

    #[test]
    fn matrix_cannot_mix() {
        let text = format!("{PENNIES}at / actions Row: H\n");
        assert!(parse(&text).is_err());
        assert!(parse("players A B\nmatrix A: x B: y z\n(x): 1 1\n").is_err());
        assert!(parse("(x): 1 1\n").is_err());
    }

    #[test]
    fn one_player_matrix() {
        let doc = parse("players P\nmatrix P: a b\n(): 1 | 2\n").unwrap();
        assert_eq!(doc.payoffs.len(), 2);
        elaborate(&doc).unwrap();
    }
}
