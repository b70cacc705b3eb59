mod common;

use std::collections::{BTreeSet, HashSet};

use foonkit::config::{RecipeConfig, TokenizerConfig};
use foonkit::corpus::{ingredient_overlap, match_equivalent, TextRecipe};
use foonkit::recipegen::{generate_recipe, merge_consecutive, unit_to_sentence, PortionTable, Recipe};
use foonkit::stats::{
    t_test, tost, weighted_mean, weighted_std, RatingSample, SummaryStats, TestKind,
};
use foonkit::{
    merge, node_equals, parse_graph, reachable_goals, retrieve, serialize_graph,
    topological_order, unit_equals, validate, FoonGraph, TaskTree,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::*;

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn unit_set(g: &FoonGraph) -> BTreeSet<foonkit::graph::UnitKey> {
    g.units().iter().map(|u| u.key()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn node_equality_is_an_equivalence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let nodes: Vec<_> = (0..6).map(|_| random_node(&mut r, &NAMES[..3])).collect();
        for a in &nodes {
            prop_assert!(node_equals(a, a));
            for b in &nodes {
                prop_assert_eq!(node_equals(a, b), node_equals(b, a));
                for c in &nodes {
                    if node_equals(a, b) && node_equals(b, c) {
                        prop_assert!(node_equals(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn unit_equality_is_an_equivalence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = random_pair(&mut r, 4, 0.7);
        let units: Vec<_> = a.iter().chain(&b).collect();
        for x in &units {
            prop_assert!(unit_equals(x, x));
            for y in &units {
                prop_assert_eq!(unit_equals(x, y), unit_equals(y, x));
                for z in &units {
                    if unit_equals(x, y) && unit_equals(y, z) {
                        prop_assert!(unit_equals(x, z));
                    }
                }
            }
        }
    }

    #[test]
    fn merge_laws(seed in any::<u64>(), share in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let (a, b) = random_pair(&mut r, 10, share);
        let (ga, gb) = (FoonGraph::new(a.clone()), FoonGraph::new(b.clone()));
        let ab = merge([&ga, &gb]);
        let ba = merge([&gb, &ga]);
        prop_assert_eq!(ab.len(), merged_count_oracle(&a, &b));
        prop_assert_eq!(unit_set(&ab), unit_set(&ba));
        prop_assert_eq!(unit_set(&merge([&ga, &ga])), unit_set(&ga));
        prop_assert_eq!(merge([&ga, &ga]).len(), ga.len());
        // first occurrence wins
        for (x, y) in ab.units().iter().zip(&a) {
            prop_assert_eq!(x.motion.start_time.clone(), y.motion.start_time.clone());
        }
    }

    #[test]
    fn serialization_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let names: Vec<&str> = NAMES.iter().chain(ODD_NAMES).copied().collect();
        let g = FoonGraph::new(random_units(&mut r, 12, &names));
        prop_assert!(validate(&g).is_empty());
        let text = serialize_graph(&g);
        let (back, diags) = parse_graph(&text);
        prop_assert!(diags.is_empty(), "{:?}", diags);
        prop_assert_eq!(back.len(), g.len());
        for (x, y) in back.units().iter().zip(g.units()) {
            prop_assert!(unit_equals(x, y));
            prop_assert_eq!(&x.motion.start_time, &y.motion.start_time);
        }
        prop_assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        let (g, diags) = parse_graph(&text);
        for d in &diags {
            prop_assert!(d.line_number >= 1);
            prop_assert!(!d.message.is_empty());
        }
        if !foonkit::parser::has_errors(&diags) {
            prop_assert!(validate(&g).is_empty());
        }
    }

    #[test]
    fn parser_survives_tag_soup(lines in proptest::collection::vec(
        (prop::sample::select(vec!["O", "o", "S", "M", "//", "X", "#", ""]),
         "[a-z {},:\t]{0,12}"), 0..40)) {
        let text: String = lines.iter().map(|(t, rest)| format!("{t}\t{rest}\n")).collect();
        let (g, diags) = parse_graph(&text);
        if !foonkit::parser::has_errors(&diags) {
            prop_assert!(validate(&g).is_empty(), "{:?}", validate(&g));
        }
        // whatever survived serializes to a fixed point
        let once = serialize_graph(&g);
        prop_assert_eq!(serialize_graph(&parse_graph(&once).0), once);
    }

    #[test]
    fn retrieval_matches_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let case = retrieval_case(&mut r, 12);
        let oracle = obtainable_oracle(case.graph.units(), &case.kitchen);
        let reachable = reachable_goals(&case.graph, &case.kitchen);
        for goal in &case.pool {
            let got = retrieve(&case.graph, goal, &case.kitchen);
            prop_assert_eq!(got.is_ok(), oracle.contains(goal), "goal {}", goal);
            prop_assert_eq!(
                reachable.contains(goal),
                got.is_ok() && !case.kitchen.contains(goal)
            );
            if let Ok(tree) = got {
                let have = replay(&tree);
                prop_assert!(have.is_ok(), "{:?}", have);
                prop_assert!(have.unwrap().contains(goal));
                prop_assert!(all_units_feed_goal(&tree));
                let again = retrieve(&case.graph, goal, &case.kitchen).unwrap();
                prop_assert_eq!(serialize_graph(&again.graph), serialize_graph(&tree.graph));
            }
        }
    }

    #[test]
    fn topological_order_replays(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = FoonGraph::new(random_units(&mut r, 10, NAMES));
        let tree = TaskTree::from_subgraph(g);
        if let Ok(order) = topological_order(&tree) {
            prop_assert_eq!(order.len(), tree.len());
            prop_assert!(replay(&tree).is_ok());
        }
    }

    #[test]
    fn recipe_invariants(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = FoonGraph::new(random_units(&mut r, 12, NAMES));
        let tree = TaskTree::from_subgraph(g);
        let portions = PortionTable::new().with("egg", "4").with("milk", "2 tsp").with("flour", "1 cup");
        let cfg = RecipeConfig::default();
        if let Ok(recipe) = generate_recipe(&tree, &portions, "t", &cfg) {
            prop_assert!(recipe.steps.len() <= tree.len());
            for p in ["4 egg", "2 tsp milk", "1 cup flour"] {
                let hits: usize = recipe.steps.iter().map(|s| s.matches(p).count()).sum();
                prop_assert!(hits <= 1, "{p} appears {hits} times in {:?}", recipe.steps);
            }
            prop_assert_eq!(generate_recipe(&tree, &portions, "t", &cfg).unwrap(), recipe);
        }
    }

    #[test]
    fn merging_sentences_keeps_pairs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let units = random_units(&mut r, 10, &NAMES[..5]);
        let cfg = RecipeConfig::default();
        let mut seen = HashSet::new();
        let sentences: Vec<_> = units
            .iter()
            .filter_map(|u| unit_to_sentence(u, &PortionTable::new(), &mut seen, &cfg))
            .collect();
        let pairs = |s: &[foonkit::recipegen::Sentence]| -> BTreeSet<(String, String)> {
            s.iter()
                .flat_map(|x| x.objects.iter().map(|o| (x.motion.clone(), o.name.clone())))
                .collect()
        };
        let merged = merge_consecutive(sentences.clone());
        prop_assert!(merged.len() <= sentences.len());
        prop_assert_eq!(pairs(&merged), pairs(&sentences));
        for w in merged.windows(2) {
            prop_assert!(w[0].motion != w[1].motion || w[0].extra != w[1].extra);
        }
    }

    #[test]
    fn overlap_is_a_bounded_symmetric_similarity(
        a in proptest::collection::btree_set("[a-e]", 0..5),
        b in proptest::collection::btree_set("[a-e]", 0..5),
    ) {
        let s = ingredient_overlap(&a, &b);
        prop_assert_eq!(s, ingredient_overlap(&b, &a));
        prop_assert!((0.0..=1.0).contains(&s));
        if !a.is_empty() || !b.is_empty() {
            prop_assert_eq!(s == 1.0, a == b);
        }
        prop_assert_eq!(s == 0.0, a.is_disjoint(&b));
    }

    #[test]
    fn matching_is_stable(seed in any::<u64>(), k in 1usize..8) {
        use rand::seq::SliceRandom;
        let mut r = rng(seed);
        let corpus: Vec<TextRecipe> = (0..6)
            .map(|i| TextRecipe {
                id: format!("r{i}"),
                title: format!("dish {i}"),
                ingredients: NAMES.choose_multiple(&mut r, 3).map(|s| s.to_string()).collect(),
                instructions: vec!["cook".into()],
            })
            .collect();
        let recipe = Recipe {
            title: "eggs".into(),
            steps: vec![],
            ingredients: NAMES.choose_multiple(&mut r, 3).map(|s| s.to_string()).collect(),
        };
        let cfg = TokenizerConfig::default();
        let m1 = match_equivalent(&recipe, &corpus, k, &cfg).unwrap();
        let m2 = match_equivalent(&recipe, &corpus, k, &cfg).unwrap();
        prop_assert_eq!(&m1, &m2);
        prop_assert_eq!(m1.len(), k.min(corpus.len()));
        for w in m1.windows(2) {
            prop_assert!(w[0].score >= w[1].score);
            if w[0].score == w[1].score {
                let pos = |id: &str| corpus.iter().position(|c| c.id == id).unwrap();
                prop_assert!(pos(&w[0].recipe.id) < pos(&w[1].recipe.id));
            }
        }
    }
}

fn ratings() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..40).prop_flat_map(|n| {
        (
            proptest::collection::vec(1.0f64..=10.0, n),
            proptest::collection::vec(0.1f64..5.0, n),
        )
    })
}

fn summary() -> impl Strategy<Value = SummaryStats> {
    (1.0f64..10.0, 0.0f64..4.0, 2u32..200).prop_map(|(m, s, n)| SummaryStats::new(m, s, n as f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn weighted_mean_is_scale_invariant_and_bounded((x, w) in ratings(), c in 0.01f64..100.0) {
        let s = RatingSample::new("q", x.clone(), w.clone()).unwrap();
        let scaled = RatingSample::new("q", x.clone(), w.iter().map(|v| v * c).collect()).unwrap();
        let m = weighted_mean(&s).unwrap();
        prop_assert!((m - weighted_mean(&scaled).unwrap()).abs() <= 1e-12 * m.abs());
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= m && m <= hi);
    }

    #[test]
    fn uniform_weights_match_textbook((x, _) in ratings(), w in 0.1f64..10.0) {
        let s = RatingSample::new("q", x.clone(), vec![w; x.len()]).unwrap();
        let (mean, std) = textbook_mean_std(&x);
        prop_assert!((weighted_mean(&s).unwrap() - mean).abs() < 1e-12);
        prop_assert!((weighted_std(&s).unwrap() - std).abs() < 1e-12);
    }

    #[test]
    fn t_test_is_antisymmetric(a in summary(), b in summary(), welch in any::<bool>()) {
        let kind = if welch { TestKind::Welch } else { TestKind::Student };
        if let (Ok(ab), Ok(ba)) = (t_test(&a, &b, 0.05, kind), t_test(&b, &a, 0.05, kind)) {
            prop_assert_eq!(ab.t, -ba.t);
            prop_assert_eq!(ab.p_value, ba.p_value);
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
            prop_assert_eq!(ab.reject, ab.p_value <= ab.alpha);
        }
    }

    #[test]
    fn tost_verdict_is_symmetric(a in summary(), b in summary(), d in 0.05f64..1.5, welch in any::<bool>()) {
        let kind = if welch { TestKind::Welch } else { TestKind::Student };
        if let (Ok(ab), Ok(ba)) = (tost(&a, &b, d, 0.05, kind), tost(&b, &a, d, 0.05, kind)) {
            prop_assert_eq!(ab.equivalent, ba.equivalent);
            prop_assert!(ab.bounds.0 <= ab.bounds.1 && ab.ci90.0 <= ab.ci90.1);
            prop_assert_eq!(
                ab.equivalent,
                ab.bounds.0 <= ab.ci90.0 && ab.ci90.1 <= ab.bounds.1
            );
        }
    }
}
