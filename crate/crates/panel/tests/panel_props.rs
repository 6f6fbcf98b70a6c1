use gfic_panel::{
    first_difference, load_panel, project_out_controls, read_panel, save_panel, write_panel,
    ColumnSchema, Control, PanelDataset, PanelError,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_panel(n: usize, t: usize, seed: u64, controls: usize) -> PanelDataset {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut m = || DMatrix::from_fn(n, t, |_, _| rng.random_range(-3.0..3.0));
    let y = m();
    let x = m();
    let cs = (0..controls)
        .map(|k| Control {
            name: format!("c{}", k + 1),
            values: m(),
        })
        .collect();
    PanelDataset::new(
        (0..n).map(|i| format!("id{i}")).collect(),
        (0..t as i64).map(|p| 1990 + p).collect(),
        y,
        x,
        cs,
    )
    .unwrap()
}

#[test]
fn difference_matches_loop_oracle() {
    let p = random_panel(3, 4, 11, 0);
    let d = first_difference(&p).unwrap();
    for i in 0..3 {
        for t in 2..=4 {
            let expect = p.y()[(i, t - 1)] - p.y()[(i, t - 2)];
            assert_eq!(d.dy_at(i, t).unwrap(), expect);
            let expect_x = p.x()[(i, t - 1)] - p.x()[(i, t - 2)];
            assert_eq!(d.dx_at(i, t).unwrap(), expect_x);
        }
    }
}

#[test]
fn constant_series_differences_to_zero() {
    let y = DMatrix::from_element(2, 5, 4.2);
    let p = PanelDataset::from_matrices(y.clone(), y).unwrap();
    assert!(first_difference(&p).unwrap().dy.iter().all(|&v| v == 0.0));
}

#[test]
fn exact_linear_combination_is_projected_to_zero() {
    let base = random_panel(5, 6, 3, 2);
    let c = base.controls();
    let x = &c[0].values * 1.5 - &c[1].values * 0.25;
    let p = PanelDataset::new(
        base.ids().to_vec(),
        base.times().to_vec(),
        base.y().clone(),
        x,
        c.to_vec(),
    )
    .unwrap();
    let q = project_out_controls(&p, false).unwrap();
    assert!(q.x().amax() < 1e-10);
}

#[test]
fn projected_residuals_are_orthogonal_to_controls() {
    for dummies in [false, true] {
        let p = random_panel(5, 6, 5, 2);
        let q = project_out_controls(&p, dummies).unwrap();
        for c in p.controls() {
            assert!(q.y().component_mul(&c.values).sum().abs() < 1e-10);
            assert!(q.x().component_mul(&c.values).sum().abs() < 1e-10);
        }
        if dummies {
            for t in 0..6 {
                assert!(q.y().column(t).sum().abs() < 1e-10);
            }
        }
    }
}

#[test]
fn save_then_load_round_trips() {
    let p = random_panel(4, 3, 9, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("panel.csv");
    save_panel(&p, &path).unwrap();
    let q = load_panel(&path, &ColumnSchema::default()).unwrap();
    assert_eq!(p, q);
}

#[test]
fn explicit_schema_renames_columns() {
    let csv = "state,year,sales,price,inc\nA,1,1,2,3\nA,2,1,2,3\nB,1,1,2,3\nB,2,1,2,3\n";
    let schema = ColumnSchema {
        id: "state".into(),
        time: "year".into(),
        y: "sales".into(),
        x: "price".into(),
        controls: Some(vec![]),
    };
    let p = read_panel(csv.as_bytes(), &schema).unwrap();
    assert_eq!((p.n(), p.periods(), p.controls().len()), (2, 2, 0));
}

#[test]
fn cigarette_panel_shape_when_available() {
    // Optional: point GFIC_CIGAR_CSV at the cigarette panel in id,time,y,x,c1,c2 form.
    let Ok(path) = std::env::var("GFIC_CIGAR_CSV") else {
        eprintln!("GFIC_CIGAR_CSV not set; skipping");
        return;
    };
    let p = load_panel(path, &ColumnSchema::default()).unwrap();
    assert_eq!((p.n(), p.periods()), (46, 30));
}

#[test]
fn gap_in_time_is_rejected() {
    let e = read_panel(
        "id,time,y,x\n1,1,0,0\n1,3,0,0\n".as_bytes(),
        &ColumnSchema::default(),
    )
    .unwrap_err();
    assert!(matches!(e, PanelError::NonContiguousTimes { .. }));
}

proptest! {
    #[test]
    fn differences_telescope(seed in 0u64..1000, n in 1usize..5, t in 2usize..8) {
        let p = random_panel(n, t, seed, 0);
        let d = first_difference(&p).unwrap();
        for i in 0..n {
            let s: f64 = d.dy.row(i).iter().sum();
            let direct = p.y()[(i, t - 1)] - p.y()[(i, 0)];
            prop_assert!((s - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_identity(seed in 0u64..1000, n in 1usize..5, t in 1usize..5, k in 0usize..3) {
        let p = random_panel(n, t, seed, k);
        let mut buf = Vec::new();
        write_panel(&p, &mut buf).unwrap();
        let q = read_panel(buf.as_slice(), &ColumnSchema::default()).unwrap();
        prop_assert_eq!(p, q);
    }
}
