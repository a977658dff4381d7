use proptest::prelude::*;

use spectral_surgery::domain::{
    connected_components, diam_e, load_domain, measure, perimeter, remove_strips, save_domain,
    Axis, GridDomain, Strip,
};
use spectral_surgery::harness::richardson;
use spectral_surgery::pde::{eigenvalues, solve_torsion, EigenOptions, TorsionOptions};
use spectral_surgery::surgery::{subsolution_truncate, DescentOptions};

const H: f64 = 1.0 / 16.0;

/// Random pattern of at least three cells inside an 8 x 8 block.
fn domain() -> impl Strategy<Value = GridDomain> {
    prop::collection::vec(prop::bool::weighted(0.7), 64).prop_filter_map("too few cells", |bits| {
        let cells: Vec<(i64, i64)> = (0..64)
            .filter(|&n| bits[n])
            .map(|n| ((n % 8) as i64, (n / 8) as i64))
            .collect();
        (cells.len() >= 3).then(|| GridDomain::from_lattice_cells(H, [0.0, 0.0], cells).unwrap())
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rescaling_scales_geometry_and_spectrum(d in domain(), t in 0.1f64..10.0) {
        let r = d.rescale(t).unwrap();
        prop_assert!(rel(measure(&r), t * t * measure(&d)) < 1e-14);
        prop_assert!(rel(perimeter(&r), t * perimeter(&d)) < 1e-14);
        prop_assert!(rel(diam_e(&r, Axis::Y), t * diam_e(&d, Axis::Y)) < 1e-14);
        let k = 2.min(d.cell_count());
        let a = eigenvalues(&d, k, &EigenOptions::default()).unwrap();
        let b = eigenvalues(&r, k, &EigenOptions::default()).unwrap();
        for i in 1..=k {
            prop_assert!(rel(b.lambda(i), a.lambda(i) / (t * t)) < 1e-9);
        }
    }

    #[test]
    fn strip_removal_keeps_exactly_the_cells_outside(d in domain(), x in 0.0f64..0.7, w in 2.0f64..3.0) {
        let s = Strip::new(Axis::X, x, w * H).unwrap();
        match remove_strips(&d, &[s]) {
            Ok(cut) => {
                prop_assert!(cut.is_subset_of(&d).unwrap());
                prop_assert!(measure(&cut) <= measure(&d));
                let (di, dj) = d.lattice_offset(&cut).unwrap();
                for (i, j) in d.occupied() {
                    let inside = s.contains(d.center_coord(Axis::X, i));
                    let (ci, cj) = (i as i64 - di, j as i64 - dj);
                    prop_assert_eq!(cut.get(ci as isize, cj as isize), !inside);
                }
            }
            Err(_) => prop_assert!(d.occupied().all(|(i, _)| s.contains(d.center_coord(Axis::X, i)))),
        }
    }

    #[test]
    fn components_partition_the_domain(d in domain()) {
        let parts = connected_components(&d);
        prop_assert!(!parts.is_empty());
        let total: usize = parts.iter().map(|p| p.cell_count()).sum();
        prop_assert_eq!(total, d.cell_count());
        for p in &parts {
            prop_assert!(p.is_subset_of(&d).unwrap());
            prop_assert_eq!(connected_components(p).len(), 1);
        }
    }

    #[test]
    fn shrinking_lowers_torsion_and_raises_eigenvalues(d in domain(), drop in prop::collection::vec(prop::bool::weighted(0.2), 100)) {
        let inner = d.retain(|i, j| !drop[(d.index(i, j)) % drop.len()]);
        prop_assume!(inner.cell_count() >= 2);
        let opts = TorsionOptions::default();
        let (wi, wo) = (solve_torsion(&inner, &opts).unwrap(), solve_torsion(&d, &opts).unwrap());
        let (di, dj) = d.lattice_offset(&inner).unwrap();
        for (i, j) in inner.occupied() {
            let outer = wo.value((i as i64 + di) as usize, (j as i64 + dj) as usize);
            prop_assert!(wi.value(i, j) <= outer + 1e-12);
        }
        let a = eigenvalues(&inner, 1, &EigenOptions::default()).unwrap().lambda(1);
        let b = eigenvalues(&d, 1, &EigenOptions::default()).unwrap().lambda(1);
        prop_assert!(a >= b * (1.0 - 1e-9));
    }

    #[test]
    fn disjoint_union_merges_spectra(d in domain(), e in domain()) {
        // place a copy of `e` far to the right of `d`
        let shift = d.nx() as i64 + 2;
        let cells = d.lattice_cells().chain(e.lattice_cells().map(|(i, j)| (i + shift, j)));
        let u = GridDomain::from_lattice_cells(H, [0.0, 0.0], cells.collect::<Vec<_>>()).unwrap();
        let k = 3.min(d.cell_count()).min(e.cell_count());
        let opts = EigenOptions::default();
        let mut merged: Vec<f64> = eigenvalues(&d, k, &opts).unwrap().eigenvalues;
        merged.extend(eigenvalues(&e, k, &opts).unwrap().eigenvalues);
        merged.sort_by(f64::total_cmp);
        let s = eigenvalues(&u, k, &opts).unwrap();
        for i in 1..=k {
            prop_assert!(rel(s.lambda(i), merged[i - 1]) < 1e-7, "{} vs {}", s.lambda(i), merged[i - 1]);
        }
    }

    #[test]
    fn descent_moves_strictly_decrease(d in domain(), c in 1e-5f64..1e-2) {
        let out = subsolution_truncate(&d, c, &DescentOptions::default(), &TorsionOptions::default()).unwrap();
        prop_assert!(out.is_monotone());
        prop_assert!(out.final_energy <= out.initial_energy);
        let result = out.domain.as_ref().unwrap();
        prop_assert!(result.is_subset_of(&d).unwrap());
        prop_assert!(out.output_measure <= out.input_measure);
    }

    #[test]
    fn richardson_recovers_random_power_laws(limit in -5.0f64..5.0, a in 0.1f64..10.0, p in 1.0f64..4.0) {
        let h: [f64; 3] = [0.1, 0.05, 0.025];
        let f: Vec<f64> = h.iter().map(|x| limit + a * x.powf(p)).collect();
        let e = richardson(&h, &f).unwrap();
        prop_assert!((e.order - p).abs() < 1e-6);
        prop_assert!((e.limit - limit).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pbm_round_trip_preserves_the_domain(d in domain()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.pbm");
        save_domain(&d, &path).unwrap();
        let back = load_domain(&path).unwrap();
        prop_assert_eq!(back.cell_count(), d.cell_count());
        prop_assert_eq!(measure(&back).to_bits(), measure(&d).to_bits());
        prop_assert_eq!(perimeter(&back).to_bits(), perimeter(&d).to_bits());
        prop_assert!(back.is_subset_of(&d).unwrap() && d.is_subset_of(&back).unwrap());
    }
}
