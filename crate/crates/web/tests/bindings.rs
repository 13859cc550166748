use serde_json::Value;
use slag_web::*;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn constants_rows_carry_exact_values() {
    let v = parse(constants(3, 19, 0).unwrap());
    let rows = v["rows"].as_array().unwrap();
    let find = |name: &str| rows.iter().find(|r| r[0] == name).unwrap()[1]["exact"].clone();
    assert_eq!(find("delta = delta0/d_l0"), "4/692871");
    assert_eq!(find("delta = delta0/(d_l0+1)"), "4/697633");
    assert_eq!(find("l0"), "117");
    assert!(constants(2, 2, 0).unwrap_err().contains("not tabulated"));
    assert!(constants(2, 2, 4).is_ok());
}

#[test]
fn xi_curve_reports_samples_and_fit() {
    let v = parse(xi_curve(1, 2, 6.0, 12.0, 8).unwrap());
    assert_eq!(v["samples"].as_array().unwrap().len(), 8);
    assert!((v["fit"]["r"].as_f64().unwrap() - 0.5).abs() < 0.05);
    assert!(xi_curve(1, 3, 6.0, 12.0, 8).unwrap_err().contains("rho(H)"));
}

#[test]
fn census_matches_the_engine_and_respects_the_budget() {
    let v = parse(census("2U", 7, 100.0, 3).unwrap());
    let counts: Vec<u64> = v["records"].as_array().unwrap().iter().map(|r| r["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, [22974, 104314, 468016]);
    assert!(v["fit"]["slope"].as_f64().is_some());
    assert!(census("3U", 0, 100.0, 3).unwrap_err().contains("too large"));
    assert!(census("XU", 0, 10.0, 3).is_err());
}

#[test]
fn projections_have_the_bounded_norm() {
    let v = parse(projections("2U", 7, 10.0).unwrap());
    assert_eq!(v["plane_dim"], 2);
    let points = v["points"].as_array().unwrap();
    let n = parse(census("2U", 7, 10.0, 1).unwrap())["records"][0]["count"].as_u64().unwrap();
    assert_eq!(points.len() as u64, n);
    for p in points {
        let (x, y) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        assert!(x * x + y * y <= 100.0 * (1.0 + 1e-9));
    }
}
