//! Shipped scenario configs. The JSON files under scenarios/ are generated
//! from here (see the ignored regen test) and must round-trip bit-identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::operator::Operator;
use crate::scenario::config::{
    EtaSpec, HamiltonianConfig, LindbladConfig, OutputSpec, ScenarioConfig, TimeSpec, Tolerances,
};
use crate::scenario::randgen::{random_fourier, random_pd};

fn mat2(rows: [[f64; 4]; 2]) -> Operator {
    // rows of [re00, im00, re01, im01] per row, dim 2
    Operator::from_rows(&[
        vec![[rows[0][0], rows[0][1]], [rows[0][2], rows[0][3]]],
        vec![[rows[1][0], rows[1][1]], [rows[1][2], rows[1][3]]],
    ])
    .expect("square 2x2")
}

fn base(name: &str, dim: usize, t1: f64, steps: usize) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        hbar: 1.0,
        dimension: dim,
        time: TimeSpec { t0: 0.0, t1, steps },
        hamiltonian: HamiltonianConfig::Constant {
            matrix: Operator::zeros(dim),
        },
        eta0: EtaSpec::Identity,
        eta1: None,
        lindblad: None,
        tolerances: Tolerances::default(),
        seed: 0,
        outputs: OutputSpec::default(),
    }
}

fn trivial() -> ScenarioConfig {
    base("trivial", 2, 1.0, 200)
}

fn stationary() -> ScenarioConfig {
    let mut cfg = base("stationary", 2, 2.0, 400);
    cfg.hamiltonian = HamiltonianConfig::Constant {
        matrix: mat2([[0.7, 0.0, 0.0, 0.0], [0.0, 0.0, -0.3, 0.0]]),
    };
    cfg.eta0 = EtaSpec::Diagonal {
        values: vec![1.0, 2.0],
    };
    cfg
}

/// Driven two-level system over one drive period. eta0 = 2 + n.sigma with n
/// the co-rotating precession axis (omega1, 0, omega0 - omega)/Omega', so its
/// rays close after T = 2 pi / omega.
fn rabi() -> ScenarioConfig {
    let (omega0, omega1, omega) = (1.0f64, 0.5f64, 0.8f64);
    let op = ((omega0 - omega).powi(2) + omega1 * omega1).sqrt();
    let (nx, nz) = (omega1 / op, (omega0 - omega) / op);
    let mut cfg = base("rabi", 2, 2.0 * std::f64::consts::PI / omega, 10_000);
    cfg.hamiltonian = HamiltonianConfig::PauliRotating {
        omega0,
        omega1,
        omega,
    };
    cfg.eta0 = EtaSpec::Matrix {
        matrix: mat2([[2.0 + nz, 0.0, nx, 0.0], [nx, 0.0, 2.0 - nz, 0.0]]),
    };
    cfg.seed = 5;
    cfg
}

fn random() -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (a, b, c, nu) = random_fourier(&mut rng, 4);
    let eta0 = random_pd(&mut rng, 4, 0.1);
    let mut cfg = base("random", 4, 2.0, 10_000);
    cfg.hamiltonian = HamiltonianConfig::Fourier {
        base: a.scale_re(0.5),
        cos_term: b.scale_re(0.5),
        sin_term: c.scale_re(0.5),
        nu,
    };
    cfg.eta0 = EtaSpec::Matrix { matrix: eta0 };
    cfg.seed = 7;
    cfg
}

fn dephasing() -> ScenarioConfig {
    let kappa = 0.2f64;
    let s = kappa.sqrt();
    let mut cfg = base("dephasing", 2, 5.0, 1000);
    cfg.eta0 = EtaSpec::Matrix {
        matrix: mat2([[1.0, 0.0, 0.5, 0.0], [0.5, 0.0, 1.0, 0.0]]),
    };
    cfg.lindblad = Some(LindbladConfig {
        ops: vec![mat2([[s, 0.0, 0.0, 0.0], [0.0, 0.0, -s, 0.0]])],
        rate_convention: "sqrt_rate_embedded".into(),
    });
    cfg
}

fn permutation() -> ScenarioConfig {
    let mut cfg = base("permutation", 2, 3.0, 4000);
    cfg.hamiltonian = HamiltonianConfig::PauliRotating {
        omega0: 1.0,
        omega1: 0.5,
        omega: 0.8,
    };
    cfg.eta0 = EtaSpec::Matrix {
        matrix: mat2([[2.0, 0.0, 0.4, 0.0], [0.4, 0.0, 1.0, 0.0]]),
    };
    cfg.eta1 = Some(EtaSpec::Matrix {
        matrix: mat2([[1.5, 0.0, -0.3, 0.0], [-0.3, 0.0, 2.5, 0.0]]),
    });
    cfg
}

fn equivalence() -> ScenarioConfig {
    let mut cfg = base("equivalence", 2, 2.0, 2000);
    cfg.hamiltonian = HamiltonianConfig::Constant {
        matrix: mat2([[0.9, 0.0, 0.1, 0.0], [0.1, 0.0, -0.4, 0.0]]),
    };
    cfg.eta0 = EtaSpec::Matrix {
        matrix: mat2([[1.8, 0.0, 0.5, 0.0], [0.5, 0.0, 1.2, 0.0]]),
    };
    cfg
}

/// Trace-one positive operator used directly as the metric.
fn density_metric() -> ScenarioConfig {
    let mut cfg = base("density_metric", 2, 4.0, 4000);
    cfg.hamiltonian = HamiltonianConfig::PauliRotating {
        omega0: 1.0,
        omega1: 0.5,
        omega: 0.8,
    };
    cfg.eta0 = EtaSpec::Matrix {
        matrix: mat2([[0.6, 0.0, 0.15, 0.0], [0.15, 0.0, 0.4, 0.0]]),
    };
    cfg
}

pub fn library() -> Vec<ScenarioConfig> {
    vec![
        trivial(),
        stationary(),
        rabi(),
        random(),
        dephasing(),
        permutation(),
        equivalence(),
        density_metric(),
    ]
}

pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    library().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::{load_config, parse_config, save_config};
    use std::path::PathBuf;

    fn scenarios_dir() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("..")
            .join("..")
            .join("scenarios")
    }

    #[test]
    fn library_configs_validate() {
        let lib = library();
        assert_eq!(lib.len(), 8);
        for cfg in &lib {
            cfg.validate().unwrap();
        }
        assert!(by_name("rabi").is_some());
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn shipped_files_match_library_and_round_trip() {
        for cfg in library() {
            let path = scenarios_dir().join(format!("{}.json", cfg.name));
            let text = std::fs::read_to_string(&path)
                .unwrap_or_else(|_| panic!("{} missing; run the regen test", path.display()));
            let parsed = parse_config(&text).unwrap();
            assert_eq!(parsed, cfg, "{} drifted from the library", cfg.name);
            assert_eq!(parsed.to_json(), text, "{} not byte-stable", cfg.name);
            let reloaded = load_config(&path).unwrap();
            assert_eq!(reloaded.to_json(), text);
        }
    }

    #[test]
    #[ignore = "writes the shipped scenario files; run once after editing the library"]
    fn regen_scenarios() {
        let dir = scenarios_dir();
        std::fs::create_dir_all(&dir).unwrap();
        for cfg in library() {
            save_config(&cfg, dir.join(format!("{}.json", cfg.name))).unwrap();
        }
    }
}
