use sbp_cli::{parse_config_str, Command, ConfigError};
use sbp_core::ansatz::choose_exponents;

#[test]
fn minimal_file_fills_exponents() {
    let cfg = parse_config_str("alpha = 6\nK = 2\np = 3\na = 1\neps_list = [0.1, 0.05]\n").unwrap();
    let (lambda, beta) = choose_exponents(6.0).unwrap();
    assert_eq!(cfg.params.lambda, lambda);
    assert_eq!(cfg.params.beta, beta);
    assert_eq!(cfg.eps_list, vec![0.1, 0.05]);
    assert_eq!(cfg.params.eps, 0.1);
    assert_eq!(cfg.params.p, 3.0);
    assert_eq!(cfg.k, 2);
    assert_eq!(cfg.command, Command::Sweep);
    assert_eq!(cfg.grid, None);
}

#[test]
fn alpha_below_threshold() {
    let err = parse_config_str("alpha = 5\n").unwrap_err();
    assert_eq!(
        err,
        ConfigError::Validation {
            key: "alpha".into(),
            constraint: "> 3+sqrt(7) ≈ 5.6458".into()
        }
    );
}

#[test]
fn single_peak_rejected() {
    let err = parse_config_str("K = 1\n").unwrap_err();
    assert_eq!(err.to_string(), "K must be >= 2");
}

#[test]
fn unknown_and_repeated_keys() {
    match parse_config_str("alpha = 6\ncolour = blue\n").unwrap_err() {
        ConfigError::Parse { line, key, .. } => assert_eq!((line, key.as_str()), (2, "colour")),
        other => panic!("{other:?}"),
    }
    match parse_config_str("p = 2\np = 3\n").unwrap_err() {
        ConfigError::Parse { line, key, .. } => assert_eq!((line, key.as_str()), (2, "p")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn repeated_list_keys_and_comments() {
    let cfg = parse_config_str("# sweep\neps = 0.1\neps = 0.05 # second\ncommand = landscape\nworkers = 2\n").unwrap();
    assert_eq!(cfg.eps_list, vec![0.1, 0.05]);
    assert_eq!(cfg.command, Command::Landscape);
    assert_eq!(cfg.workers, 2);
}

#[test]
fn grid_and_values_validated() {
    assert!(matches!(
        parse_config_str("grid_L = 16\ngrid_n = 33\n").unwrap_err(),
        ConfigError::Validation { .. }
    ));
    assert!(matches!(parse_config_str("p = 5\n").unwrap_err(), ConfigError::Validation { key, .. } if key == "p"));
    assert!(matches!(parse_config_str("a = -1\n").unwrap_err(), ConfigError::Validation { key, .. } if key == "a"));
    assert!(matches!(parse_config_str("eps = 1.5\n").unwrap_err(), ConfigError::Validation { key, .. } if key == "eps"));
    assert!(matches!(parse_config_str("alpha = six\n").unwrap_err(), ConfigError::Parse { .. }));
    let cfg = parse_config_str("grid_L = 16\ngrid_n = 64\n").unwrap();
    assert_eq!(cfg.grid, Some((16.0, 64)));
}

#[test]
fn command_names_round_trip() {
    for name in ["ground-state", "field-check", "ansatz-check", "landscape", "solve", "verify-theorem", "sweep"] {
        let c: Command = name.parse().unwrap();
        assert_eq!(c.name(), name);
    }
    assert!("plot".parse::<Command>().is_err());
}
