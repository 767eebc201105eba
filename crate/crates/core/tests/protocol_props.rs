use proptest::prelude::*;
use rydberg_grover::protocols::{
    analytic_success, bits_of, grover_search, reduction_tree, Architecture, Layout, Partition, PhaseScheme,
    ProtocolConfig, Reflection,
};
use rydberg_grover::verify::{equivalence_deviation, oracle_deviation};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grover_follows_the_sine_law(k in 2..=10usize, seed in any::<u64>()) {
        let x = (seed as usize) % (1 << k);
        let trace = grover_search(&ProtocolConfig::new(Architecture::Sequential, bits_of(x, k)), None).unwrap();
        for r in &trace.records {
            prop_assert!((r.success_prob - analytic_success(k, r.iteration)).abs() < 1e-9);
            prop_assert!((r.norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn simultaneous_matches_sequential(k in 1..=4usize, seed in any::<u64>()) {
        let x = (seed as usize) % (1 << k);
        let seq = Layout::new(Architecture::Sequential, k, None).unwrap();
        let sim = Layout::new(Architecture::Simultaneous, k, None).unwrap();
        let r = Reflection::Marked(bits_of(x, k));
        prop_assert!(equivalence_deviation(&seq, &sim, &r, PhaseScheme::default()).unwrap() < 1e-10);
    }

    #[test]
    fn subregister_traces_match_sequential(seed in any::<u64>(), n_s in 2..=3usize) {
        let k = 2 * n_s;
        let x = bits_of((seed as usize) % (1 << k), k);
        let seq = grover_search(&ProtocolConfig::new(Architecture::Sequential, x.clone()), None).unwrap();
        let sub = grover_search(
            &ProtocolConfig::new(Architecture::Subregister, x).with_partition(n_s, 2),
            None,
        ).unwrap();
        prop_assert_eq!(seq.records.len(), sub.records.len());
        for (a, b) in seq.records.iter().zip(&sub.records) {
            prop_assert!((a.success_prob - b.success_prob).abs() < 1e-9);
        }
    }

    #[test]
    fn reduction_tree_uses_every_ancilla_once(n in 1..=12usize) {
        let ancillas: Vec<usize> = (10..10 + n).collect();
        let (pairs, root) = reduction_tree(&ancillas);
        prop_assert_eq!(pairs.len(), n - 1);
        prop_assert_eq!(root, 10);
        // each ancilla is consumed as a second partner at most once, never the root
        let mut consumed: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        consumed.sort_unstable();
        consumed.dedup();
        prop_assert_eq!(consumed.len(), n - 1);
        prop_assert!(!consumed.contains(&root));
    }
}

#[test]
fn prescribed_reverse_order_is_correct() {
    for k in 1..=5 {
        let layout = Layout::new(Architecture::Sequential, k, None).unwrap();
        let xs: Vec<usize> = (0..1 << k).collect();
        let (dev, leak) = oracle_deviation(&layout, PhaseScheme::default(), &xs).unwrap();
        assert!(dev < 1e-10 && leak < 1e-12, "k={k}");
    }
}

#[test]
fn subregister_partition_of_eight() {
    let seq = Layout::new(Architecture::Sequential, 6, None).unwrap();
    let sub = Layout::new(Architecture::Subregister, 6, Some(Partition { n_s: 3, k_s: 2 })).unwrap();
    for x in [0, 21, 42, 63] {
        let r = Reflection::Marked(bits_of(x, 6));
        assert!(equivalence_deviation(&seq, &sub, &r, PhaseScheme::default()).unwrap() < 1e-10);
    }
}
