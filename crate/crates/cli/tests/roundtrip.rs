use boxloc::gen::{generate, GenConfig, ThresholdExpansion};
use boxloc_cli::file::{FileError, InstanceFile};
use proptest::prelude::*;

#[test]
fn hundred_generated_instances_round_trip() {
    for seed in 0..100u64 {
        let mut cfg = GenConfig::new(5 + (seed as usize * 7) % 40, 4 + seed as usize % 20, seed);
        if seed % 2 == 1 {
            cfg.expansion = ThresholdExpansion::Global;
        }
        let inst = generate(&cfg).unwrap();
        let file = InstanceFile::from_instance(&inst);
        let parsed = InstanceFile::parse(&file.emit()).unwrap();
        assert_eq!(parsed, file, "seed {seed}");
        assert_eq!(parsed.to_instance().unwrap(), inst, "seed {seed}");
    }
}

#[test]
fn bundled_fixture_survives_emit() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/tiny.json")).unwrap();
    let file = InstanceFile::parse(&text).unwrap();
    assert!(file.durations.is_some());
    assert_eq!(InstanceFile::parse(&file.emit()).unwrap(), file);
}

#[test]
fn wrong_version_is_refused() {
    let inst = generate(&GenConfig::new(5, 4, 0)).unwrap();
    let text = InstanceFile::from_instance(&inst).emit().replace("\"version\": 1", "\"version\": 2");
    assert!(matches!(InstanceFile::parse(&text), Err(FileError::Version(2))));
}

#[test]
fn ragged_triangle_is_refused() {
    let inst = generate(&GenConfig::new(5, 4, 0)).unwrap();
    let mut file = InstanceFile::from_instance(&inst);
    file.edge_costs[2].push(1.0);
    assert!(matches!(file.to_instance(), Err(FileError::Triangle { row: 2, found: 3 })));
}

proptest! {
    #[test]
    fn arbitrary_costs_round_trip(costs in prop::collection::vec(0.0f64..1e9, 6), fixed in 0.0f64..1e7) {
        let mut inst = generate(&GenConfig::new(3, 4, 9)).unwrap();
        let mut k = 0;
        inst.edge_costs = boxloc::EdgeCosts::from_fn(4, |_, _| { k += 1; costs[k - 1] });
        inst.locations[1].fixed_cost = fixed;
        let file = InstanceFile::from_instance(&inst);
        let back = InstanceFile::parse(&file.emit()).unwrap().to_instance().unwrap();
        prop_assert_eq!(back, inst);
    }
}
