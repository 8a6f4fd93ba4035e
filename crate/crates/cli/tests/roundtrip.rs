use ghzwit_cli::StateFile;
use ghzwit_core::random_density;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_files_round_trip(seed in any::<u64>(), n in 2usize..=3, rank in 1usize..=8) {
        let rank = rank.min(1 << n);
        let rho = random_density(seed, n, rank).unwrap();
        let file = StateFile::from_state(&rho, Some(format!("seed {seed}")));
        let back = StateFile::parse(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        let m = back.to_matrix().unwrap();
        for (a, b) in m.entries().iter().zip(rho.matrix().entries()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        prop_assert!(back.to_state().is_ok());
    }

    #[test]
    fn arbitrary_floats_round_trip(vals in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 32)) {
        let matrix = vals.chunks(8).map(|row| row.chunks(2).map(|z| [z[0], z[1]]).collect()).collect();
        let file = StateFile { nqubits: 2, matrix, label: None };
        let back = StateFile::parse(&file.to_json()).unwrap();
        for (r, s) in back.matrix.iter().flatten().zip(file.matrix.iter().flatten()) {
            prop_assert_eq!(r[0].to_bits(), s[0].to_bits());
            prop_assert_eq!(r[1].to_bits(), s[1].to_bits());
        }
    }
}
