//! Chamber-structure properties on random rank-2 spectra.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slowent_core::{
    classify_element, enumerate_chambers, lyapunov_hyperplanes, pick_generic_element,
    Classification, LyapunovFunctional, LyapunovSpectrum, NormSpec, DEFAULT_GROUPING_TOL,
};

/// Random rank-2 spectrum from ± pairs (so the determinant-sum invariant
/// holds by construction).
fn random_spectrum(seed: u64) -> LyapunovSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = rng.gen_range(1..=4usize);
    let mut functionals = Vec::new();
    for _ in 0..pairs {
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let len: f64 = rng.gen_range(0.3..2.0);
        let c = vec![len * angle.cos(), len * angle.sin()];
        functionals.push(LyapunovFunctional {
            coeffs: c.clone(),
            multiplicity: 1,
            orbit_direction: false,
        });
        functionals.push(LyapunovFunctional {
            coeffs: c.iter().map(|x| -x).collect(),
            multiplicity: 1,
            orbit_direction: false,
        });
    }
    LyapunovSpectrum {
        functionals,
        dim: 2 * pairs,
        rank: 2,
        grouping_tolerance: DEFAULT_GROUPING_TOL,
    }
}

#[test]
fn k2_chamber_count_is_twice_the_normals() {
    for seed in 0..10u64 {
        let spec = random_spectrum(seed);
        let arr = lyapunov_hyperplanes(&spec).unwrap();
        let chambers = enumerate_chambers(&arr).unwrap();
        assert_eq!(
            chambers.len(),
            2 * arr.normals.len(),
            "seed {seed}: {} normals, {} chambers",
            arr.normals.len(),
            chambers.len()
        );
    }
}

#[test]
fn representatives_are_regular_with_their_signs() {
    for seed in 0..10u64 {
        let spec = random_spectrum(seed);
        let arr = lyapunov_hyperplanes(&spec).unwrap();
        let chambers = enumerate_chambers(&arr).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for c in &chambers {
            assert!(seen.insert(c.sign_vector.clone()), "duplicate sign vector");
            match classify_element(&spec, &c.representative, 1e-8).unwrap() {
                Classification::Regular { signs } => assert_eq!(signs, c.sign_vector),
                Classification::Singular { .. } => {
                    panic!("seed {seed}: representative on a hyperplane")
                }
            }
        }
        // Antipodal closure.
        for c in &chambers {
            let neg: Vec<i8> = c.sign_vector.iter().map(|s| -s).collect();
            assert!(
                chambers.iter().any(|d| d.sign_vector == neg),
                "seed {seed}: missing antipode"
            );
        }
    }
}

#[test]
fn generic_elements_stay_in_the_ball_and_are_regular() {
    for seed in 0..10u64 {
        let spec = random_spectrum(seed);
        for norm in [
            NormSpec::L2,
            NormSpec::Linf,
            NormSpec::WeightedBox {
                weights: vec![0.8, 1.4],
            },
        ] {
            let t = match pick_generic_element(&spec, &norm, 128) {
                Ok(t) => t,
                // Random pairs can coincide projectively; separation then
                // legitimately fails.
                Err(_) => continue,
            };
            assert!(norm.value(&t).unwrap() <= 1.0 + 1e-12);
            assert!(matches!(
                classify_element(&spec, &t, 1e-9).unwrap(),
                Classification::Regular { .. }
            ));
        }
    }
}
