use proptest::prelude::*;
use rydberg_grover::dynamics::min_error_formula;
use rydberg_grover::interactions::{lattice_positions, pair_shift, relevant_pairs, LatticeMode, LatticeSpec, Species};

type Transform = fn([f64; 2]) -> [f64; 2];

const D4: [Transform; 7] = [
    |p| [-p[1], p[0]],
    |p| [-p[0], -p[1]],
    |p| [p[1], -p[0]],
    |p| [-p[0], p[1]],
    |p| [p[0], -p[1]],
    |p| [p[1], p[0]],
    |p| [-p[1], -p[0]],
];

fn shift_multiset(species: &Species, positions: &[[f64; 2]], mode: LatticeMode) -> Vec<f64> {
    let n = species.setup.n_sequential;
    let mut b: Vec<f64> = relevant_pairs(&species.model, n, positions, mode)
        .unwrap()
        .into_iter()
        .map(|p| p.2)
        .collect();
    b.sort_by(f64::total_cmp);
    b
}

proptest! {
    #[test]
    fn lattice_shifts_invariant_under_square_symmetries(
        side in 2..=6usize,
        d in 1.0..10.0f64,
        g in 0..7usize,
        rb in any::<bool>(),
    ) {
        let species = if rb { Species::rb_like() } else { Species::cs_like() };
        // an ancilla at the exact centre needs an odd side
        let center = side % 2 == 1;
        let spec = LatticeSpec { side, d, center_ancilla: center };
        let pos = lattice_positions(&spec).unwrap();
        let c = (side as f64 - 1.0) * d / 2.0;
        let moved: Vec<[f64; 2]> = pos
            .iter()
            .map(|p| {
                let q = D4[g]([p[0] - c, p[1] - c]);
                [q[0] + c, q[1] + c]
            })
            .collect();
        let mode = if center { LatticeMode::TwoSpecies } else { LatticeMode::SingleSpecies };
        let a = shift_multiset(&species, &pos, mode);
        let b = shift_multiset(&species, &moved, mode);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs());
        }
    }

    #[test]
    fn pair_error_scales_as_fourth_power_of_distance(r in 25.0..80.0f64) {
        let s = Species::cs_like();
        let n = s.setup.n_sequential;
        let tau = s.model.tau_at(n).unwrap();
        let near = min_error_formula(pair_shift(&s.model, n, r).unwrap(), tau).unwrap();
        let far = min_error_formula(pair_shift(&s.model, n, r * 2f64.sqrt()).unwrap(), tau).unwrap();
        prop_assert!((far / near / 4.0 - 1.0).abs() < 0.01, "ratio {}", far / near);
    }
}

#[test]
fn shipped_presets_match_builtins() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets");
    for (file, builtin) in [
        ("cs_like.json", Species::cs_like()),
        ("rb_like.json", Species::rb_like()),
    ] {
        let text = std::fs::read_to_string(format!("{root}/{file}")).unwrap();
        assert_eq!(Species::from_json(&text).unwrap(), builtin, "{file}");
    }
}
