//! End-to-end checks of the binary: exit codes, report determinism, config
//! round trips, and the cross-check mode.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bridgesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bridgesim"))
        .args(args)
        .env_remove("BRIDGESIM_SEED")
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("bridgesim_cli_{}_{name}", std::process::id()));
    path
}

const HONEST_CONFIG: &str = r#"{
  "chains": [
    {
      "chain_id": "b1",
      "confirmation_delay": 1,
      "genesis": [ { "address": "a1", "token": "ETH", "amount": "1000" } ]
    },
    { "chain_id": "b2", "confirmation_delay": 1 }
  ],
  "bridge": {
    "source_chain_id": "b1",
    "dest_chain_id": "b2",
    "functional_type": "AssetLockMint",
    "offchain": { "type": "notary", "n": 5, "quorum": 3 },
    "token_pairs": [ { "source_token": "ETH", "dest_token": "wETH" } ]
  },
  "honest_traffic": [
    { "at": 10, "from": "a1", "to": "a2", "value": "40" }
  ],
  "run": { "seed": 1, "horizon": 100 }
}
"#;

#[test]
fn honest_config_exits_zero() {
    let config = tmp("honest.json");
    std::fs::write(&config, HONEST_CONFIG).unwrap();
    let out = bridgesim(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
}

#[test]
fn preset_run_exits_two_with_violations() {
    let report = tmp("ronin.json");
    let out = bridgesim(&[
        "run",
        "--preset",
        "ronin_2022",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{:?}", out);
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"Causality\""));
}

#[test]
fn bad_usage_exits_one() {
    let out = bridgesim(&["run"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bridgesim(&["run", "--config", "/nonexistent/path.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bridgesim(&["run", "--preset", "not_a_preset"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_config_exits_one() {
    let config = tmp("bad.json");
    std::fs::write(&config, HONEST_CONFIG.replace("\"chains\"", "\"mystery\"")).unwrap();
    let out = bridgesim(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{:?}", out);
}

#[test]
fn presets_lists_all_nine() {
    let out = bridgesim(&["presets"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    for name in [
        "ronin_2022",
        "wormhole_2022",
        "nomad_2022",
        "qubit_2022",
        "bsc_token_hub_2022",
        "harmony_2022",
        "omni_2022",
        "poly_2021",
        "multichain_2023",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn exit_code_contract_holds_for_every_preset() {
    for name in [
        "ronin_2022",
        "wormhole_2022",
        "nomad_2022",
        "qubit_2022",
        "bsc_token_hub_2022",
        "harmony_2022",
        "omni_2022",
        "poly_2021",
        "multichain_2023",
    ] {
        let out = bridgesim(&["run", "--preset", name]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: incident presets violate"
        );
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in [
        "ronin_2022",
        "wormhole_2022",
        "nomad_2022",
        "qubit_2022",
        "bsc_token_hub_2022",
        "harmony_2022",
        "omni_2022",
        "poly_2021",
        "multichain_2023",
    ] {
        let first = tmp(&format!("det_a_{name}.json"));
        let second = tmp(&format!("det_b_{name}.json"));
        for path in [&first, &second] {
            let out = bridgesim(&[
                "run",
                "--preset",
                name,
                "--seed",
                "7",
                "--out",
                path.to_str().unwrap(),
            ]);
            assert_eq!(out.status.code(), Some(2), "{name}");
        }
        let a = std::fs::read(&first).unwrap();
        let b = std::fs::read(&second).unwrap();
        assert_eq!(a, b, "{name}: report bytes differ");
    }
}

#[test]
fn env_seed_override_is_honored() {
    let with_flag = tmp("seed_flag.json");
    let with_env = tmp("seed_env.json");
    let out = bridgesim(&[
        "run",
        "--preset",
        "omni_2022",
        "--seed",
        "11",
        "--out",
        with_flag.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_bridgesim"))
        .args([
            "run",
            "--preset",
            "omni_2022",
            "--out",
            with_env.to_str().unwrap(),
        ])
        .env("BRIDGESIM_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        std::fs::read(&with_flag).unwrap(),
        std::fs::read(&with_env).unwrap()
    );
}

#[test]
fn surface_subcommand_reports_areas_without_simulating() {
    let config = tmp("surface.json");
    std::fs::write(&config, HONEST_CONFIG).unwrap();
    let out = bridgesim(&["surface", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("areas: source="));
}

#[test]
fn verify_agrees_on_presets_and_honest_runs() {
    let config = tmp("verify.json");
    std::fs::write(&config, HONEST_CONFIG).unwrap();
    for args in [
        vec!["verify", "--config", config.to_str().unwrap()],
        vec!["verify", "--preset", "omni_2022"],
        vec!["verify", "--preset", "nomad_2022"],
    ] {
        let out = bridgesim(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {out:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("verdicts agree"), "{args:?}: {text}");
    }
}
