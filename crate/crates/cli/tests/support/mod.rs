#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

/// Golden file name and the CLI arguments that produce it.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("axis_x.csv", &["axis-sweep", "--axis", "x"]),
    (
        "axis_y_sampled.csv",
        &[
            "axis-sweep",
            "--axis",
            "y",
            "--shots",
            "8192",
            "--seed",
            "7",
        ],
    ),
    (
        "axis_z_down.csv",
        &["axis-sweep", "--axis", "z", "--direction", "down"],
    ),
    (
        "axis_x_random.csv",
        &[
            "axis-sweep",
            "--axis",
            "x",
            "--direction",
            "random",
            "--seed",
            "3",
        ],
    ),
    ("witness_phi_plus.json", &["witness", "--state", "phi+"]),
    ("witness_psi_minus.json", &["witness", "--state", "psi-"]),
    ("witness_00.json", &["witness", "--state", "00"]),
    (
        "witness_random.json",
        &["witness", "--state", "random", "--seed", "11"],
    ),
    (
        "purity_identity.json",
        &["purity", "--channel", "identity", "--state", "0"],
    ),
    (
        "purity_depolarizing.json",
        &[
            "purity",
            "--channel",
            "depolarizing",
            "--param",
            "0.4",
            "--mode",
            "two-qubit",
        ],
    ),
    (
        "twirl_pauli.json",
        &[
            "twirl",
            "--channel",
            "amplitude_damping",
            "--param",
            "0.3",
            "--state",
            "+",
        ],
    ),
    (
        "twirl_random.json",
        &[
            "twirl",
            "--set",
            "random",
            "--size",
            "3",
            "--channel",
            "dephasing",
            "--param",
            "0.2",
            "--observable",
            "X",
            "--state",
            "random",
            "--seed",
            "5",
        ],
    ),
    (
        "run_linear_sum.json",
        &["run-spec", "configs/linear_sum.json"],
    ),
    (
        "run_quadratic_sum.json",
        &["run-spec", "configs/quadratic_sum.json"],
    ),
    (
        "run_noisy_projective.json",
        &["run-spec", "configs/noisy_projective.json"],
    ),
    (
        "run_large_blocks.json",
        &["run-spec", "configs/large_blocks.json"],
    ),
    ("complexity_default.csv", &["complexity"]),
];

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_path(name: &str) -> PathBuf {
    manifest_dir().join("tests").join("golden").join(name)
}

/// Runs the CLI and returns (exit code, stdout, stderr).
pub fn run_cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qfork"))
        .args(args)
        .current_dir(manifest_dir())
        .env_remove("QFORK_PURE_DIM_CAP")
        .env_remove("QFORK_DENSITY_DIM_CAP")
        .output()
        .expect("spawn qfork");
    (
        out.status.code().unwrap_or(-1),
        out.stdout,
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}
