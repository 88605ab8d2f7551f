use kramers_harness::config::{InitialState, PotentialKind, SweepParam};
use kramers_harness::{HarnessError, RunConfig};

const BASE: &str = r#"
seed = 3

[params]
lambda = 10.0
T = 0.25
R = 1.0

[pulse]
family = "linear"
epsilon = [1.0, 0.0, 0.0]

[potential]
kind = "coulomb"
soft_a = 0.5

[grid]
dim = 2
n = 64
L = 20.0

[evolution]
t_final = 0.5
dt = 0.01
"#;

/// Same content as `BASE` with sections and keys in a different order.
const REORDERED: &str = r#"
[grid]
L = 20.0
n = 64
dim = 2

[evolution]
dt = 0.01
t_final = 0.5

[potential]
soft_a = 0.5
kind = "coulomb"

[pulse]
epsilon = [1.0, 0.0, 0.0]
family = "linear"

[params]
R = 1.0
T = 0.25
lambda = 10.0
"#;

fn base() -> RunConfig {
    RunConfig::from_toml_str(BASE).unwrap()
}

#[test]
fn defaults_are_filled_in() {
    let c = base();
    assert_eq!(c.seed, 3);
    assert_eq!(c.params.z, 1.0);
    assert_eq!(c.params.theta, 0.2);
    assert_eq!(c.potential.kind, PotentialKind::Coulomb);
    assert!(matches!(c.initial, InitialState::Hydrogenic { soft_a: None, relax_n: None }));
    assert_eq!(c.evolution.observe_every, 1);
    assert_eq!(c.bound_time(), 0.5);
}

#[test]
fn round_trips_through_toml() {
    let c = base();
    let back = RunConfig::from_toml_str(&c.to_toml()).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.hash(), c.hash());
}

#[test]
fn hash_ignores_ordering() {
    let mut a = base();
    let b = RunConfig::from_toml_str(&format!("seed = 3\n{REORDERED}")).unwrap();
    assert_eq!(a.hash(), b.hash());
    a.seed = 4;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn hash_tracks_every_semantic_field() {
    let c = base();
    let mut variants = vec![c.clone(); 5];
    variants[0].params.lambda = 10.5;
    variants[1].grid.n = 128;
    variants[2].evolution.dt = 0.005;
    variants[3].potential.soft_a = 0.6;
    variants[4].initial = InitialState::Gaussian { r: None, center: [0.0; 3], momentum: [0.0; 3] };
    for v in &variants {
        assert_ne!(v.hash(), c.hash());
    }
    // an explicitly written default is not a semantic change
    let explicit = RunConfig::from_toml_str(&BASE.replace("[evolution]", "[evolution]\nobserve_every = 1")).unwrap();
    assert_eq!(explicit.hash(), c.hash());
}

fn config_error(text: &str) -> String {
    match RunConfig::from_toml_str(text) {
        Err(HarnessError::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn unknown_field_reports_line() {
    let m = config_error(&BASE.replace("n = 64", "n = 64\nwidth = 3"));
    assert!(m.contains("line 20"), "{m}");
    assert!(m.contains("width"), "{m}");
}

#[test]
fn syntax_error_reports_line() {
    let m = config_error(&BASE.replace("dt = 0.01", "dt = = 0.01"));
    assert!(m.contains("line 24"), "{m}");
}

#[test]
fn semantic_errors_name_the_field() {
    let cases = [
        (BASE.replace("n = 64", "n = 60"), "grid"),
        (BASE.replace("dt = 0.01", "dt = 0.03"), "evolution.dt"),
        (BASE.replace("lambda = 10.0", "lambda = -1.0"), "params"),
        (format!("{BASE}\n[sweep]\nparameter = \"lambda\"\nvalues = [5.0, 20.0, 10.0]\n"), "sweep.values"),
        (format!("{BASE}\n[initial]\nkind = \"hydrogenic\"\nrelax_n = 256\n"), "initial.relax_n"),
    ];
    for (text, field) in cases {
        let m = config_error(&text);
        assert!(m.contains(&format!("field `{field}`")), "{field}: {m}");
    }
}

#[test]
fn with_param_replaces_one_value() {
    let c = RunConfig::from_toml_str(&format!(
        "{BASE}\n[sweep]\nparameter = \"lambda\"\nvalues = [5.0, 10.0]\n"
    ))
    .unwrap();
    let p = c.with_param(SweepParam::Lambda, 40.0);
    assert_eq!(p.params.lambda, 40.0);
    assert!(p.sweep.is_none());
    assert_eq!(c.with_param(SweepParam::Z, 2.0).params.z, 2.0);
    assert_eq!(c.with_param(SweepParam::R, 1.5).params.r, 1.5);
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            RunConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            count += 1;
        }
    }
    assert!(count >= 3);
}
