//! End-to-end pipeline runs: the long-cycle segment route at a size where
//! the spanning machinery genuinely engages, and a soundness sweep against
//! the exhaustive oracle at small sizes.

use cycle_embed::cycles::{classify, ConstantsProfile, CycleSpec, FamilyClass};
use cycle_embed::embed::{audit_against_layers, embed, make_layers, verify_embedding, Phase};
use cycle_embed::graph::RandomSeed;
use cycle_embed::oracle::brute_force_embed;

#[test]
fn pipeline_successes_are_sound_against_the_oracle() {
    // Every pipeline success must verify and be confirmed embeddable by the
    // exhaustive search; pipeline failures are permitted data.
    let profile = ConstantsProfile::desk();
    let mut successes = 0;
    for n in 5..=8usize {
        for spec in cycle_embed::cycles::enumerate_bounded_family(n, 3, n as u64) {
            for seed in 0..4u64 {
                let layers = make_layers(n, 0.8, &RandomSeed::new(seed, "sound")).unwrap();
                if let Ok(report) = embed(&layers, &spec, &profile, &RandomSeed::new(seed, "e")) {
                    let union = layers.union();
                    verify_embedding(&union, &spec, &report.embedding).unwrap();
                    let oracle = brute_force_embed(&union, &spec, 14).unwrap();
                    assert!(oracle.embeddable, "pipeline found what the oracle cannot");
                    successes += 1;
                }
            }
        }
    }
    assert!(successes > 0, "the pipeline never succeeded at p = 0.8");
}

#[test]
fn h1_long_cycle_via_segments_end_to_end() {
    // One cycle far above the cutoff forces the phase-2 route: balanced
    // segment decomposition, anchor rotation, two spanning-connector calls,
    // and cycle stitching. Sized so the robust sets inside the spanning
    // calls use an exhaustively certified template.
    let mut profile = ConstantsProfile::desk();
    profile.spanning_segment = 156;
    profile.spanning_leftover = 1;
    profile.big_k = 130;
    profile.phase_retries = 3;
    profile.validate().unwrap();

    // 45 segments of length L and 45 of length L + 1: a cycle of length
    // 45 * (2 * 156 + 1) = 14085, plus a handful of small components.
    let long_len = 45 * (2 * profile.spanning_segment + 1);
    let spec = CycleSpec::new(vec![long_len, 3, 3, 2, 1]);
    assert_eq!(classify(&spec, &profile), FamilyClass::H1);

    let n = spec.n + 6;
    let layers = make_layers(n, 0.68, &RandomSeed::new(2024, "h1-e2e")).unwrap();
    let report = embed(&layers, &spec, &profile, &RandomSeed::new(7, "h1-e2e")).unwrap();
    assert_eq!(report.phase, Phase::Phase2);
    audit_against_layers(&layers, &spec, &report.embedding).unwrap();
}
