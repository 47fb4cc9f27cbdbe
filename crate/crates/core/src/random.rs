//! Seeded random games for differential testing.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game_dsl::{GameDoc, Path, WAIT};
use crate::hyperreal::{integer, rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_players: usize,
    pub max_histories: usize,
    pub max_actions: usize,
    pub max_strategies: usize,
    pub max_depth: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_players: 3, max_histories: 12, max_actions: 3, max_strategies: 6, max_depth: 3 }
    }
}

const PLAYER_NAMES: [&str; 3] = ["A", "B", "C"];
const ACTION_NAMES: [[&str; 3]; 3] = [["a", "b", "c"], ["l", "m", "r"], ["x", "y", "z"]];

/// Generator for game number `index` of the campaign `seed`.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn generate(seed: u64, bounds: Bounds) -> GameDoc {
    generate_with(&mut ChaCha8Rng::seed_from_u64(seed), bounds)
}

fn payoff(rng: &mut impl Rng) -> Rational {
    if rng.gen_bool(0.1) {
        rational(rng.gen_range(-5..=5), 2)
    } else {
        integer(rng.gen_range(-3..=3))
    }
}

struct Builder<'a, R: Rng> {
    rng: &'a mut R,
    bounds: Bounds,
    players: usize,
    /// Running `|S_i|` as stages are added.
    strategies: Vec<usize>,
    simultaneous: bool,
    doc: GameDoc,
}

impl<R: Rng> Builder<'_, R> {
    fn movers(&mut self) -> Option<Vec<(usize, usize)>> {
        let mut order: Vec<usize> = (0..self.players).collect();
        order.shuffle(self.rng);
        let wanted = if self.simultaneous { self.rng.gen_range(1..=self.players) } else { 1 };
        let mut out = Vec::new();
        for i in order {
            if out.len() == wanted {
                break;
            }
            let room = self.bounds.max_strategies / self.strategies[i];
            if room < 2 {
                continue;
            }
            let hi = room.min(self.bounds.max_actions);
            let k = self.rng.gen_range(2..=hi);
            out.push((i, k));
        }
        (!out.is_empty()).then_some(out)
    }

    fn stage(&mut self, path: Path, depth: usize, movers: Vec<(usize, usize)>) {
        let mut actions: Vec<Vec<String>> = vec![vec![WAIT.to_string()]; self.players];
        for &(i, k) in &movers {
            actions[i] = ACTION_NAMES[i][..k].iter().map(|s| s.to_string()).collect();
            self.strategies[i] *= k;
        }
        self.doc.stages.insert(path.clone(), actions.clone());
        let radices: Vec<usize> = actions.iter().map(Vec::len).collect();
        let count: usize = radices.iter().product();
        let mut children = Vec::with_capacity(count);
        for k in 0..count {
            let idx = crate::game_core::decode_profile(k, &radices);
            let mut child = path.clone();
            child.push(idx.iter().enumerate().map(|(i, &a)| actions[i][a].clone()).collect());
            children.push(child);
        }
        for child in children {
            let grow = depth + 1 < self.bounds.max_depth
                && self.doc.stages.len() < self.bounds.max_histories
                && self.rng.gen_bool(0.45);
            let next = if grow { self.movers() } else { None };
            match next {
                Some(m) => self.stage(child, depth + 1, m),
                None => {
                    let values = (0..self.players).map(|_| payoff(self.rng)).collect();
                    self.doc.payoffs.insert(child, values);
                }
            }
        }
    }
}

/// A random document within `bounds`: static or sequential, with
/// simultaneous or alternating moves.
pub fn generate_with(rng: &mut impl Rng, bounds: Bounds) -> GameDoc {
    let max = bounds.max_players.clamp(1, PLAYER_NAMES.len());
    let players = match rng.gen_range(0..20) {
        0..=2 => 1,
        3..=12 => 2,
        _ => 3,
    }
    .min(max);
    let simultaneous = players > 1 && rng.gen_bool(0.5);
    let doc = GameDoc { players: PLAYER_NAMES[..players].iter().map(|s| s.to_string()).collect(), stages: BTreeMap::new(), payoffs: BTreeMap::new() };
    let mut b = Builder { rng, bounds, players, strategies: vec![1; players], simultaneous, doc };
    let root = b.movers().expect("every player can move at the root");
    b.stage(Vec::new(), 0, root);
    b.doc
}
