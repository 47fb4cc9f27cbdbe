mod common;

use common::*;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prudens::beliefs::{c_strongly_believes, strongly_believes, ConditioningFamily, ExplicitCPS, PriorCNPS, ProfileSet};
use prudens::best_reply::Optimality;
use prudens::game_core::{StrategicForm, StrategySpace};
use prudens::game_dsl::{parse, serialize};
use prudens::hyperreal::{rational, Hyperreal, Rational};
use prudens::procedures::{reduced_variants, verify_theorems, verify_with, Analysis, Settings, WitnessBelief};

fn h(s: &str) -> Hyperreal {
    s.parse().unwrap()
}

fn set(n: usize, xs: &[usize]) -> ProfileSet {
    ProfileSet::from_indices(n, xs)
}

#[test]
fn corpus_elaborates_and_round_trips() {
    let games = corpus();
    assert!(games.len() >= 10, "corpus has {} games", games.len());
    for g in &games {
        let text = serialize(&g.doc);
        assert_eq!(parse(&text).unwrap(), g.doc, "{}", g.name);
        assert_eq!(serialize(&parse(&text).unwrap()), text);
    }
}

#[test]
fn corpus_step_sets_match_certified_ia() {
    for g in corpus() {
        let form = StrategicForm::new(&g.game, StrategySpace::Full);
        let steps = certified_ia(&form);
        let analysis = Analysis::new(&g.game, StrategySpace::Full);
        assert_eq!(analysis.ia.steps, steps, "{}", g.name);
    }
}

#[test]
fn expected_verdicts_under_each_best_reply() {
    let refuted = ["centipede", "out_in", "two_stage_simultaneous"];
    for g in corpus() {
        let report = verify_theorems(&g.game).unwrap();
        assert_eq!(report.violations.is_empty(), !refuted.contains(&g.name.as_str()), "{}", g.name);
        let form = StrategicForm::new(&g.game, StrategySpace::Full);
        let steps = certified_ia(&form);
        for v in &report.violations {
            let family = ConditioningFamily::new(&form, v.player);
            assert!(check_refutation(&form, &steps, &v.failure, Optimality::Sequential), "{}: failure without refutation", g.name);
            assert!(check_failure(&form, &family, &steps, &v.failure, Optimality::Sequential), "{}", g.name);
        }
        let weak = verify_with(&g.game, Settings { optimality: Optimality::WeakSequential, ..Settings::default() }).unwrap();
        assert!(weak.violations.is_empty(), "{}", g.name);
        let reduced = reduced_variants(&g.game).unwrap();
        assert!(reduced.verify.violations.is_empty() && reduced.projection_matches, "{}", g.name);
    }
}

#[test]
fn weak_dominance_removes_b_first() {
    let g = corpus_game("weak_dom_2x2");
    let a = Analysis::new(&g.game, StrategySpace::Full);
    let names: Vec<String> = a.ia.step(1).sets[0].iter().map(|&s| a.form.strategy_name(0, s)).collect();
    assert_eq!(names, vec!["T"]);
}

#[test]
fn mixed_dominance_needs_a_mixture() {
    let g = corpus_game("mixed_dominance");
    let a = Analysis::new(&g.game, StrategySpace::Full);
    assert_eq!(a.ia.step(1).sets[0], vec![0, 1]);
    let cert = &a.ia.eliminations[0].certificate;
    assert_eq!(cert.weights.len(), 2);
}

#[test]
fn two_stage_three_round_witness_believes_each_level() {
    let g = corpus_game("two_stage_three_rounds");
    assert!(!g.game.is_static());
    let mut a = Analysis::new(&g.game, StrategySpace::Full);
    let (s0, s1, s2) = (a.ia.step(0).clone(), a.ia.step(1).clone(), a.ia.step(2).clone());
    assert!(s2.is_subset_of(&s1) && s1.is_subset_of(&s0) && s2 != s1 && s1 != s0);
    let trace = a.pr_cnps(Settings::default()).unwrap();
    for w in trace.witnesses.iter().filter(|w| w.step == 3) {
        let WitnessBelief::Cnps(b) = &w.belief else { unreachable!() };
        let family = &a.families[w.player];
        for q in [&s0, &s1, &s2] {
            let e = a.form.coprofiles_in(w.player, q);
            assert!(naive_c_strong(family, &prior_masses(b, family), &e));
            assert!(c_strongly_believes(b, family, &set(family.num_coprofiles, &e)));
        }
    }
}

#[test]
fn later_witnesses_do_not_nest() {
    for name in ["two_stage_three_rounds", "three_round_static"] {
        let g = corpus_game(name);
        let mut a = Analysis::new(&g.game, StrategySpace::Full);
        let trace = a.pr_cps(Settings::default());
        let mut found = false;
        for w in trace.witnesses.iter().filter(|w| w.step >= 2) {
            let WitnessBelief::Cps(b) = &w.belief else { unreachable!() };
            let earlier = a.audit_cps(w.step - 1, w.player, w.strategy, b, Optimality::Sequential);
            assert!(w.audit.passed());
            let root = a.families[w.player].root();
            let narrowed = a.coprofile_set(w.player, a.ia.step(w.step - 1)).len() < a.coprofile_set(w.player, a.ia.step(w.step - 2)).len();
            if narrowed {
                assert!(!earlier.restrictions, "{name}: step-{} witness also valid a step earlier", w.step);
                assert!(b.support(&a.families[w.player], root).len() < a.coprofile_set(w.player, a.ia.step(w.step - 2)).len());
                found = true;
            }
        }
        assert!(found, "{name}");
    }
}

#[test]
fn unreachable_history_has_index_zero() {
    let g = corpus_game("dominated_entry");
    let a = Analysis::new(&g.game, StrategySpace::Full);
    let k = g.game.histories().iter().position(|&n| g.game.history_label(n) == "/(In,wait)").unwrap();
    assert_eq!(a.sophistication_index(1, k), 0);
    assert_eq!(a.sophistication_index(1, 0), a.ia.fixpoint);
}

fn two_stage() -> (CorpusGame, usize) {
    (corpus_game("two_stage_simultaneous"), 0)
}

fn stored_prior() -> PriorCNPS {
    // B's strategies c.x c.y d.x d.y.
    PriorCNPS { owner: 0, prior: vec![h("1 - 2*e - e^2"), h("e^2"), h("e"), h("e")] }
}

#[test]
fn c_strong_belief_is_not_monotone() {
    let (g, i) = two_stage();
    let form = StrategicForm::new(&g.game, StrategySpace::Full);
    let family = ConditioningFamily::new(&form, i);
    let prior = stored_prior();
    prior.validate(family.num_coprofiles).unwrap();
    let (e, f) = (vec![0], vec![0, 1]);
    assert!(c_strongly_believes(&prior, &family, &set(4, &e)));
    assert!(!c_strongly_believes(&prior, &family, &set(4, &f)));
    assert!(naive_c_strong(&family, &prior_masses(&prior, &family), &e));
    assert!(!naive_c_strong(&family, &prior_masses(&prior, &family), &f));
}

#[test]
fn strong_belief_is_not_monotone() {
    let (g, i) = two_stage();
    let form = StrategicForm::new(&g.game, StrategySpace::Full);
    let family = ConditioningFamily::new(&form, i);
    let zero = Rational::zero;
    let one = || rational(1, 1);
    let cps = ExplicitCPS { owner: 0, table: vec![vec![zero(), zero(), zero(), one()], vec![one(), zero()]] };
    assert!(valid_cps(&cps, &family));
    assert!(strongly_believes(&cps, &family, &set(4, &[3])));
    assert!(!strongly_believes(&cps, &family, &set(4, &[1, 3])));
}

#[test]
fn strong_and_c_strong_belief_are_incomparable() {
    let (g, i) = two_stage();
    let form = StrategicForm::new(&g.game, StrategySpace::Full);
    let family = ConditioningFamily::new(&form, i);
    let zero = Rational::zero;
    let one = || rational(1, 1);
    let cps = ExplicitCPS { owner: 0, table: vec![vec![one(), zero(), zero(), zero()], vec![one(), zero()]] };
    assert!(valid_cps(&cps, &family));
    assert!(strongly_believes(&cps, &family, &set(4, &[0, 1])));
    assert!(!c_strongly_believes(&cps, &family, &set(4, &[0, 1])));
    let prior = stored_prior();
    assert!(c_strongly_believes(&prior, &family, &set(4, &[0])));
    assert!(!strongly_believes(&prior, &family, &set(4, &[0])));
}

/// The stored instances are reproducible: a seeded search over the corpus
/// finds witnesses of each kind.
#[test]
fn search_finds_belief_witnesses_in_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut found = [false; 4];
    for g in corpus().into_iter().filter(|g| !g.game.is_static()) {
        let form = StrategicForm::new(&g.game, StrategySpace::Full);
        for i in 0..g.game.num_players() {
            let family = ConditioningFamily::new(&form, i);
            let n = family.num_coprofiles;
            if !(3..=8).contains(&n) {
                continue;
            }
            for _ in 0..50 {
                let prior = random_prior(&mut rng, i, n, 2);
                let cps = standard_cps(&prior, &family);
                for em in 1u32..(1 << n) {
                    let e: Vec<usize> = (0..n).filter(|x| em >> x & 1 == 1).collect();
                    let es = set(n, &e);
                    let csb_e = c_strongly_believes(&prior, &family, &es);
                    let sb_e = strongly_believes(&cps, &family, &es);
                    found[2] |= sb_e && !c_strongly_believes(&cps, &family, &es);
                    found[3] |= csb_e && !strongly_believes(&prior, &family, &es);
                    for fm in (em + 1)..(1 << n) {
                        if fm & em != em {
                            continue;
                        }
                        let fs = set(n, &(0..n).filter(|x| fm >> x & 1 == 1).collect::<Vec<_>>());
                        found[0] |= csb_e && !c_strongly_believes(&prior, &family, &fs);
                        found[1] |= sb_e && !strongly_believes(&cps, &family, &fs);
                    }
                }
                if found.iter().all(|&f| f) {
                    return;
                }
            }
        }
    }
    panic!("search found only {found:?}");
}

#[test]
fn fuzzed_obstructions_replay_independently() {
    let mut obstructed = 0;
    for index in 0..400 {
        let game = prudens::game_dsl::elaborate(&fuzz_doc(20_241_019, index)).unwrap();
        let report = verify_theorems(&game).unwrap();
        let form = StrategicForm::new(&game, StrategySpace::Full);
        let steps = certified_ia(&form);
        for v in &report.violations {
            let family = ConditioningFamily::new(&form, v.player);
            assert!(check_failure(&form, &family, &steps, &v.failure, Optimality::Sequential), "game {index}");
            if v.failure.obstruction.is_some() {
                obstructed += 1;
                assert!(check_obstruction(&form, &family, &steps, &v.failure, Optimality::Sequential), "game {index}");
            }
        }
    }
    assert!(obstructed >= 2, "{obstructed}");
}
