use std::fs;
use std::path::PathBuf;

use pgcodes::channel::{parse_channel_json, parse_channel_tsv};
use pgcodes::{BuiltinChannel, DihedralParams, Labeling};

fn channel_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../channels")
}

#[test]
fn bundled_channel_files_parse() {
    let mut seen = 0;
    for entry in fs::read_dir(channel_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        let (channel, labeling) =
            parse_channel_json(&text).unwrap_or_else(|d| panic!("{}: {d}", path.display()));
        assert_eq!(channel.input_size(), 6);
        assert_eq!(labeling.len(), 6);
        seen += 1;
    }
    assert!(seen >= 6, "only {seen} channel files found");
}

#[test]
fn bundled_files_match_their_builtins() {
    let d6 = DihedralParams::D6;
    let cases = [
        ("identity.json", BuiltinChannel::Identity),
        ("rotation_revealing.json", BuiltinChannel::RotationRevealing),
        (
            "reflection_revealing.json",
            BuiltinChannel::ReflectionRevealing,
        ),
        (
            "three_eps.json",
            BuiltinChannel::ThreeEps {
                eps1: 0.1,
                eps2: 0.05,
                eps3: 0.02,
            },
        ),
    ];
    for (file, builtin) in cases {
        let text = fs::read_to_string(channel_dir().join(file)).unwrap();
        let (channel, _) = parse_channel_json(&text).unwrap();
        assert_eq!(channel, builtin.build(d6).unwrap(), "{file}");
    }
}

#[test]
fn json_round_trip_keeps_labeling() {
    let channel = BuiltinChannel::ThreeEps {
        eps1: 0.2,
        eps2: 0.1,
        eps3: 0.05,
    }
    .build(DihedralParams::D6)
    .unwrap();
    let labeling = Labeling::from_permutation(vec![1, 0, 3, 2, 5, 4]).unwrap();
    let (back, back_labeling) = parse_channel_json(&channel.to_json(Some(&labeling))).unwrap();
    assert_eq!(back, channel);
    assert_eq!(back_labeling, labeling);
}

#[test]
fn syntax_errors_carry_a_position() {
    let err = parse_channel_json("{\n  \"p\": 3,\n  \"rows\": [1 2]\n}").unwrap_err();
    // each row must be an array, so the first `1` is the offending token
    assert_eq!((err.line, err.column), (3, 12));

    let err = parse_channel_tsv("1\t0\n0\tx\n").unwrap_err();
    assert_eq!(err.line, 2);
}

#[test]
fn semantic_errors_are_reported() {
    // rows do not sum to one
    let text = r#"{"p": 3, "outputs": 1, "rows": [[0.5], [1], [1], [1], [1], [1]]}"#;
    assert!(parse_channel_json(text).is_err());
    // wrong number of rows for the group order
    assert!(parse_channel_tsv("1\n1\n1\n").is_err());
}
