//! Frozen FEM values for the discrete eigenvalue of the T, Y and crossing
//! junctions. There are no published numbers; the oracle is a 4-level
//! extrapolation from h = 0.25 on stubs of length 3, which must agree with
//! stubs of length 6 within its own error estimate. Drift beyond 1e-8
//! means the mesher or solver changed.

use star_spectra::fem::polygon_spectrum;
use star_spectra::geom::{crossing_strips, t_junction, truncate, y_junction, ValidatedConfig};

const BASELINES: [(&str, f64); 3] = [
    ("t_junction", 7.940_305_947_503_386),
    ("y_junction", 8.479_805_209_070_072),
    ("crossing_strips", 6.510_868_287_059_58),
];

fn config(name: &str) -> ValidatedConfig {
    match name {
        "t_junction" => t_junction(),
        "y_junction" => y_junction(),
        _ => crossing_strips(false),
    }
}

fn extrapolate(cfg: &ValidatedConfig, length: f64) -> (f64, f64) {
    let spec = polygon_spectrum(&truncate(cfg, length).unwrap(), 1, 0.25, 4).unwrap();
    (spec.extrapolated[0], spec.error_estimate[0])
}

#[test]
fn discrete_eigenvalues_match_baselines() {
    let nu = std::f64::consts::PI.powi(2);
    for (name, frozen) in BASELINES {
        let cfg = config(name);
        let (short, err) = extrapolate(&cfg, 3.0);
        assert!((short - frozen).abs() <= 1e-8 * frozen, "{name}: {short:.17e} vs frozen {frozen:.17e}");
        assert!(short < nu);
        let (long, _) = extrapolate(&cfg, 6.0);
        assert!((long - short).abs() <= err, "{name}: stub doubling moved {short} to {long}, estimate {err}");
    }
}
