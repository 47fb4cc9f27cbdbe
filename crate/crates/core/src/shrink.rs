//! Greedy counterexample shrinking on [`GameDoc`]s.

use num_traits::{Signed, Zero};

use crate::game_dsl::{elaborate, GameDoc, Path};
use crate::hyperreal::Rational;

fn retain_paths(doc: &GameDoc, keep: impl Fn(&Path) -> bool) -> GameDoc {
    GameDoc {
        players: doc.players.clone(),
        stages: doc.stages.iter().filter(|(p, _)| keep(p)).map(|(p, a)| (p.clone(), a.clone())).collect(),
        payoffs: doc.payoffs.iter().filter(|(p, _)| keep(p)).map(|(p, v)| (p.clone(), v.clone())).collect(),
    }
}

/// Drops action `action` of player `player` at history `at`, with every
/// history that passes through it.
pub fn remove_action(doc: &GameDoc, at: &Path, player: usize, action: &str) -> Option<GameDoc> {
    let list = &doc.stages.get(at)?[player];
    if list.len() < 2 || !list.iter().any(|a| a == action) {
        return None;
    }
    let depth = at.len();
    let mut out = retain_paths(doc, |p| !(p.len() > depth && p[..depth] == at[..] && p[depth][player] == action));
    out.stages.get_mut(at)?[player].retain(|a| a != action);
    Some(out)
}

/// Replaces the subtree at `at` with a terminal carrying the payoff of its
/// first terminal descendant.
pub fn collapse(doc: &GameDoc, at: &Path) -> Option<GameDoc> {
    if at.is_empty() || !doc.stages.contains_key(at) {
        return None;
    }
    let depth = at.len();
    let below = |p: &Path| p.len() > depth && p[..depth] == at[..];
    let payoff = doc.payoffs.iter().find(|(p, _)| below(p)).map(|(_, v)| v.clone())?;
    let mut out = retain_paths(doc, |p| p != at && !below(p));
    out.payoffs.insert(at.clone(), payoff);
    Some(out)
}

/// Removes a player, who is fixed to their first action everywhere.
pub fn remove_player(doc: &GameDoc, player: usize) -> Option<GameDoc> {
    if doc.players.len() < 2 {
        return None;
    }
    let first = |p: &Path| -> bool {
        (0..p.len()).all(|d| doc.stages.get(&p[..d].to_vec()).is_some_and(|a| a[player][0] == p[d][player]))
    };
    let drop = |profile: &Vec<String>| -> Vec<String> {
        profile.iter().enumerate().filter(|&(i, _)| i != player).map(|(_, a)| a.clone()).collect()
    };
    let mut out = GameDoc { players: doc.players.clone(), ..GameDoc::default() };
    out.players.remove(player);
    for (p, a) in doc.stages.iter().filter(|(p, _)| first(p)) {
        let mut a = a.clone();
        a.remove(player);
        out.stages.insert(p.iter().map(drop).collect(), a);
    }
    for (p, v) in doc.payoffs.iter().filter(|(p, _)| first(p)) {
        let mut v = v.clone();
        v.remove(player);
        out.payoffs.insert(p.iter().map(drop).collect(), v);
    }
    Some(out)
}

fn simpler(v: &Rational) -> Vec<Rational> {
    let mut out = Vec::new();
    if !v.is_zero() {
        out.push(Rational::zero());
    }
    if !v.is_integer() {
        out.push(v.trunc());
    } else if v.abs() > Rational::from_integer(1.into()) {
        out.push(v - v.signum());
    }
    out
}

fn candidates(doc: &GameDoc) -> Vec<GameDoc> {
    let mut out = Vec::new();
    for i in 0..doc.players.len() {
        out.extend(remove_player(doc, i));
    }
    for path in doc.stages.keys() {
        out.extend(collapse(doc, path));
    }
    for (path, actions) in &doc.stages {
        for (i, list) in actions.iter().enumerate() {
            for a in list.iter().rev() {
                out.extend(remove_action(doc, path, i, a));
            }
        }
    }
    for (path, values) in &doc.payoffs {
        for (i, v) in values.iter().enumerate() {
            for s in simpler(v) {
                let mut next = doc.clone();
                next.payoffs.get_mut(path).expect("present")[i] = s;
                out.push(next);
            }
        }
    }
    out
}

/// Applies the first structural or payoff simplification that keeps
/// `fails` true, until none does.
pub fn shrink(doc: &GameDoc, mut fails: impl FnMut(&GameDoc) -> bool) -> GameDoc {
    let mut best = doc.clone();
    loop {
        let next = candidates(&best).into_iter().find(|c| elaborate(c).is_ok() && fails(c));
        match next {
            Some(c) => best = c,
            None => return best,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_dsl::{parse, serialize};

    const DOC: &str = "players A B
at / actions A: a b B: l r
at /(a,l) actions A: x y
payoff /(a,l)/(x,wait) = 1 2
payoff /(a,l)/(y,wait) = 3/2 0
payoff /(a,r) = 1 -2
payoff /(b,l) = 0 0
payoff /(b,r) = 4 4
";

    #[test]
    fn structural_moves_stay_valid() {
        let doc = parse(DOC).unwrap();
        for c in candidates(&doc) {
            elaborate(&c).unwrap();
            assert_eq!(parse(&serialize(&c)).unwrap(), c);
        }
        let collapsed = collapse(&doc, &vec![vec!["a".into(), "l".into()]]).unwrap();
        assert_eq!(collapsed.stages.len(), 1);
        let single = remove_player(&doc, 1).unwrap();
        assert_eq!(single.players, vec!["A".to_string()]);
        assert_eq!(single.payoffs.len(), 3);
    }

    #[test]
    fn shrinks_to_a_minimal_witness() {
        let doc = parse(DOC).unwrap();
        // Property: some terminal pays player A at least 4.
        let four = Rational::from_integer(4.into());
        let small = shrink(&doc, |d| d.payoffs.values().any(|v| v[0] >= four));
        assert_eq!(small.players.len(), 1);
        assert_eq!(small.payoffs.len(), 1);
        assert_eq!(serialize(&small).lines().count(), 3);
    }
}
