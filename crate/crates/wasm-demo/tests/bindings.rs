use antipt_wasm::{point_json, spectrum_rows, sweep};

#[test]
fn spectrum_rows_are_flat_records() {
    let rows = spectrum_rows(1.0, 1.0, -4.0, 4.0, 401).unwrap();
    assert_eq!(rows.len(), 5 * 401);
    let at_ep = &rows[5 * 300..5 * 301];
    assert_eq!(at_ep[0], 2.0);
    assert_eq!(at_ep[1], at_ep[2]);
    assert!(spectrum_rows(1.0, 1.0, 4.0, -4.0, 10).is_err());
}

#[test]
fn point_summary() {
    let v: serde_json::Value = serde_json::from_str(&point_json(4.0, 1.0, -1.0).unwrap()).unwrap();
    assert_eq!(v["phase"], "broken");
    assert_eq!(v["case"], "broken-detuned");
    assert!((v["real_roots"][1].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-9);
    assert_eq!(v["laurent"]["order"], 1);
    let v: serde_json::Value = serde_json::from_str(&point_json(1.0, 1.0, 1.0).unwrap()).unwrap();
    assert!(v["laurent"].is_null());
}

#[test]
fn sweep_slopes() {
    let ep = sweep(0.0, 1.0, 0.5, 200).unwrap();
    assert!((ep.slope.unwrap() - 2.0).abs() < 0.05);
    let broken = sweep(0.1, 1.0, 0.5, 200).unwrap();
    assert!((broken.slope.unwrap() - 1.0).abs() < 0.05);
    assert!((broken.omega0 - 0.41f64.sqrt() / 2.0).abs() < 1e-12);
    assert_eq!(ep.pairs.len(), 400);
}
