use std::fs;
use std::path::PathBuf;

use ccn::formats::*;
use ccn_core::coloring::enumerate_balanced;
use ccn_core::{fixtures, Trajectory, TypedNetwork};
use proptest::prelude::*;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

/// Shipped fixture files match the built-in fixtures. Set `CCN_BLESS=1` to
/// regenerate them.
#[test]
fn fixture_files_match_the_built_in_networks() {
    for (name, net) in fixtures::all() {
        let expected = network_to_json(&net.to_spec());
        let path = fixture_path(name);
        if std::env::var_os("CCN_BLESS").is_some() {
            fs::write(&path, &expected).unwrap();
        }
        assert_eq!(fs::read_to_string(&path).unwrap(), expected, "{name}");
        let loaded = load_network(path.to_str().unwrap()).unwrap();
        assert_eq!(loaded.to_spec(), net.to_spec(), "{name}");
        assert_eq!(loaded.to_spec(), load_network(&format!("fixture:{name}")).unwrap().to_spec());
    }
}

#[test]
fn network_documents_round_trip() {
    for (name, net) in fixtures::all() {
        let text = network_to_json(&net.to_spec());
        let spec = parse_network_spec(&text).unwrap();
        assert_eq!(spec, net.to_spec(), "{name}");
        assert_eq!(network_to_json(&spec), text);
    }
}

#[test]
fn network_documents_are_strict() {
    let text = network_to_json(&fixtures::fig1().to_spec());
    let extra = text.replacen("\"version\": 1,", "\"version\": 1, \"extra\": 0,", 1);
    assert!(matches!(parse_network_spec(&extra), Err(FormatError::Json(_))));
    let future = text.replacen("\"version\": 1", "\"version\": 2", 1);
    assert!(matches!(parse_network_spec(&future), Err(FormatError::Version { .. })));
}

#[test]
fn colorings_round_trip() {
    for (name, net) in fixtures::all() {
        for col in enumerate_balanced(&net).unwrap() {
            let text = coloring_to_json(&net, &col);
            assert_eq!(parse_coloring(&text, &net).unwrap(), col, "{name}");
        }
    }
    let net = fixtures::fig1();
    let named = parse_coloring(r#"{"colors": {"4": "x", "3": "y", "2": "x", "1": "y"}}"#, &net).unwrap();
    assert_eq!(named, parse_coloring(r#"{"colors": {"1": 5, "2": 0, "3": 5, "4": 0}}"#, &net).unwrap());
    for bad in [r#"{"colors": {"1": 0, "2": 0, "3": 0}}"#, r#"{"colors": {"1": 0, "2": 0, "3": 0, "4": 0, "5": 1}}"#, r#"{"colors": {"1": -1, "2": 0, "3": 0, "4": 0}}"#] {
        assert!(matches!(parse_coloring(bad, &net), Err(FormatError::Coloring(_))), "{bad}");
    }
}

#[test]
fn states_round_trip_with_vector_cells() {
    let net = fixtures::chain();
    let x = [1.25, -0.5, 3.0];
    let text = state_to_json(&net, &x);
    assert_eq!(parse_state(&text, &net).unwrap(), x);
    assert!(text.contains("[\n"));
    assert!(matches!(parse_state(r#"{"state": {"1": 1.0, "2": 0.5}}"#, &net), Err(FormatError::State(_))));
}

fn trajectory(net: &TypedNetwork, n: usize, values: &[f64]) -> Trajectory {
    let d = net.layout().total_dim();
    let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.125).collect();
    let states: Vec<f64> = (0..n * d).map(|i| values[i % values.len()] * (i as f64 + 1.0)).collect();
    let rates: Vec<f64> = states.iter().map(|v| -v).collect();
    Trajectory::from_samples(net.layout().clone(), times, states, Some(rates)).unwrap()
}

proptest! {
    #[test]
    fn cache_round_trips_bit_for_bit(n in 2usize..40, values in prop::collection::vec(-1e6f64..1e6, 1..16)) {
        let net = fixtures::chain();
        let traj = trajectory(&net, n, &values);
        let bytes = encode_cache(&traj);
        prop_assert_eq!(bytes.len(), 28 + 8 * n * (1 + 2 * 3));
        let back = decode_cache(net.layout(), &bytes).unwrap();
        prop_assert_eq!(back.times(), traj.times());
        prop_assert_eq!(back.states(), traj.states());
        prop_assert_eq!(back.derivatives(), traj.derivatives());
        prop_assert_eq!(back.meta.derivatives, traj.meta.derivatives);
        prop_assert!(decode_cache(net.layout(), &bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn csv_round_trips_states_exactly(n in 2usize..40, values in prop::collection::vec(-1e6f64..1e6, 1..16)) {
        let net = fixtures::fig1();
        let traj = trajectory(&net, n, &values);
        let mut buf = Vec::new();
        write_trajectory_csv(&net, &traj, &mut buf).unwrap();
        let back = read_trajectory_csv(&net, buf.as_slice()).unwrap();
        prop_assert_eq!(back.times(), traj.times());
        prop_assert_eq!(back.states(), traj.states());
    }
}

#[test]
fn csv_columns_may_be_permuted_but_not_repeated() {
    let net = fixtures::chain();
    let text = "t, 2[0], 1[1], 1[0]\n0, 3, 2, 1\n1, 6, 5, 4\n";
    let traj = read_trajectory_csv(&net, text.as_bytes()).unwrap();
    assert_eq!(traj.state(1), &[4.0, 5.0, 6.0]);
    for bad in ["t,1[0],1[1]\n0,1,2\n1,1,2\n", "t,1[0],1[0],1[1],2[0]\n0,1,1,2,3\n1,1,1,2,3\n", "1[0],1[1],2[0]\n1,2,3\n"] {
        assert!(matches!(read_trajectory_csv(&net, bad.as_bytes()), Err(FormatError::Trajectory(_))), "{bad}");
    }
}

#[test]
fn cache_header_layout() {
    let net = fixtures::single_cell();
    let traj = trajectory(&net, 3, &[1.0]);
    let bytes = encode_cache(&traj);
    assert_eq!(&bytes[..4], b"CCNT");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 3);
    assert_eq!(u64::from_le_bytes(bytes[20..28].try_into().unwrap()), 1);
    assert_eq!(f64::from_le_bytes(bytes[28..36].try_into().unwrap()), 0.0);
    assert_eq!(f64::from_le_bytes(bytes[36..44].try_into().unwrap()), 0.125);
    let mut other = bytes.clone();
    other[4] = 9;
    assert!(matches!(decode_cache(net.layout(), &other), Err(FormatError::Version { .. })));
    assert!(decode_cache(fixtures::fig1().layout(), &bytes).is_err());
}
