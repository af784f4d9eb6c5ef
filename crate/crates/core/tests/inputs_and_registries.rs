use gkz_core::gamma::FamilyRegistry;
use gkz_core::input::{key_example, load_fan, parse_pairing};
use gkz_core::ktheory::ChiRegistry;
use gkz_core::verify::CheckRegistry;
use gkz_core::Error;

#[test]
fn registries_list_their_strategies() {
    assert_eq!(ChiRegistry::default().names(), ["character", "hrr"]);
    assert_eq!(FamilyRegistry::default().names(), ["gamma", "gamma-circ", "trivial"]);
    assert_eq!(
        CheckRegistry::default().names(),
        ["gkz", "hessian-one", "hrr", "pairing", "rank", "volume"]
    );
    assert!(matches!(
        FamilyRegistry::default().get("nope"),
        Err(Error::Unknown { .. })
    ));
}

#[test]
fn malformed_fans_are_rejected() {
    for json in [
        "{",
        r#"{"rank": 2, "points": [[0, 1], [1, 1]]}"#,
        // overlapping simplices
        r#"{"rank": 2, "points": [[0, 1], [1, 1], [3, 1]], "max_simplices": [[1, 2], [1, 3]]}"#,
        // index out of range
        r#"{"rank": 2, "points": [[0, 1], [1, 1]], "max_simplices": [[1, 3]]}"#,
    ] {
        assert!(load_fan(json).is_err(), "{json}");
    }
}

#[test]
fn json_errors_carry_positions() {
    let e = load_fan("{\n  \"rank\": 2,\n  \"points\": oops\n}").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
}

#[test]
fn pairing_tables_are_checked_against_the_fan() {
    let fan = key_example();
    let bad = r#"[{"c": [0, 0], "d": [1, 2], "poly": [{"coeff": "1", "monomial": [1, 1]}]}]"#;
    assert!(parse_pairing(bad, &fan).is_err());
    let ok = r#"[{"c": [0, 0], "d": [1, 2], "poly": [{"coeff": "-3/2", "monomial": [1, 1, 0]}]}]"#;
    assert_eq!(parse_pairing(ok, &fan).unwrap()[0].poly[0].0.to_string(), "-3/2");
}

#[test]
fn gorenstein_is_checked_on_demand() {
    // height functional (1/3, 1/3) is not integral
    let fan = load_fan(r#"{"rank": 2, "points": [[2, 1], [1, 2]], "max_simplices": [[1, 2]]}"#).unwrap();
    assert!(matches!(fan.require_gorenstein(), Err(Error::BadGorenstein(_))));
    assert_eq!(key_example().require_gorenstein().unwrap(), [0, 1]);
}

#[test]
fn single_cone_fans_get_default_samples() {
    let fan = load_fan(r#"{"rank": 3, "points": [[1, 0, 1], [0, 1, 1], [-1, -1, 1]], "max_simplices": [[1, 2, 3]]}"#)
        .unwrap();
    let samples = gkz_core::gamma::default_samples(&fan);
    assert_eq!(samples.len(), 3);
    assert!(samples.iter().all(|s| s.len() == 3));
}
