//! One PASS/FAIL line per acceptance criterion, with the tolerance it is held to.
//!
//! Runs the long tier (k=8 tables included) unless ACCEPTANCE_TIER is set to
//! quick or full. Positional arguments select criteria by id, so a
//! `cargo test <name>` filter aimed at another target runs nothing here.

use std::process::ExitCode;

use cliffcomm::verify::{self, tol, Tier};

/// Criteria whose published value disagrees with the exact computation. They
/// are run and reported as FAIL like any other; the detail shows the value
/// that does hold.
const KNOWN_CONFLICTS: &[&str] = &["8", "12"];

fn tolerance(id: &str) -> String {
    match id {
        "1" => format!("exact integers, runtime < {} s", tol::DIM_SECONDS),
        "2" | "10" | "P3" => "exact integers".into(),
        "3" | "11" => format!("singular values > {:e} counted", tol::TWIRL_RANK_SV),
        "4" => format!("max-entry residual <= {:e}", tol::COMMUTATION),
        "5" => format!("relative error <= {:e}", tol::ORTHOGONALITY_REL),
        "6" => format!("dense max diff <= {:e}", tol::REWRITE),
        "7" => format!("twirl diff <= {:e}, k=2 closed form rel <= {:e}", tol::WEINGARTEN, tol::HAAR_K2_REL),
        "8" => format!("residual <= {:e}, |sum - 1| <= {:e}", tol::ORBIT, tol::ORBIT_SUM),
        "9" => format!(
            "values {:e}, B(stab) {:e}, bounds {:e}, entropy identity {:e}",
            tol::MAGIC_VALUE,
            tol::BELL_STABILIZER,
            tol::BELL_BOUNDS,
            tol::ENTROPY_IDENTITY
        ),
        "12" => format!("{:e}", tol::HAAR),
        "A" => "ratio in [0.28, 20.3], two-regime ratio in [0.56, 40.6]".into(),
        "P1" => format!("within a factor {} of the Haar scaling", tol::HAAR_SCALING_FACTOR),
        _ => "-".into(),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let ids: Vec<String> = args.into_iter().filter(|a| !a.starts_with('-')).collect();
    let tier = match std::env::var("ACCEPTANCE_TIER") {
        Ok(s) => s.parse::<Tier>().expect("ACCEPTANCE_TIER is quick, full or long"),
        Err(_) => Tier::Long,
    };
    println!("acceptance: tier {tier:?}, seed {}", verify::SEED);
    let checks = verify::run_selected(tier, &ids, &mut |c| {
        println!("{}", c.line());
        println!("{:>10}tolerance: {}", "", tolerance(c.id));
    });
    let passed = checks.iter().filter(|c| c.pass).count();
    let unexpected: Vec<&str> = checks.iter().filter(|c| !c.pass && !KNOWN_CONFLICTS.contains(&c.id)).map(|c| c.id).collect();
    let stale: Vec<&str> = checks.iter().filter(|c| c.pass && KNOWN_CONFLICTS.contains(&c.id)).map(|c| c.id).collect();
    println!("acceptance: {passed} passed, {} failed (known conflicts: {})", checks.len() - passed, KNOWN_CONFLICTS.join(", "));
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures: {}", unexpected.join(", "));
    }
    if !stale.is_empty() {
        println!("acceptance: listed as conflicts but passing: {}", stale.join(", "));
    }
    if unexpected.is_empty() && stale.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
