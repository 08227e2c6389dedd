//! Indicator values frozen from `fixtures/indicator_oracle.py`.

use dlo_core::explore::indicator;
use dlo_core::geom::Pose;
use dlo_core::worldsim::TactileMap;

#[test]
fn matches_numpy_reference() {
    let text = include_str!("fixtures/indicator_cases.txt");
    let mut n = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f.len(), 14, "{line}");
        let expect: f64 = f[1].parse().unwrap();
        let v: Vec<f64> = f[2..].iter().map(|s| s.parse().unwrap()).collect();
        let map = TactileMap {
            pressures: std::array::from_fn(|i| [v[2 * i], v[2 * i + 1]]),
            pose: Pose::identity(),
            pitch: 0.005,
        };
        let got = indicator(&map);
        assert!((got - expect).abs() <= 1e-9 * expect.abs(), "{}: {got} vs {expect}", f[0]);
        n += 1;
    }
    assert_eq!(n, 5);
}
