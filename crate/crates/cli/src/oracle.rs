//! Exhaustive-bijection causality oracle. Deliberately independent of the
//! monitor's matching algorithm: the feasibility predicate is re-derived
//! here and the search tries every injective assignment.

use bridgesim_core::chain::Tick;
use bridgesim_core::engine::{run_scenario_full, Scenario};
use bridgesim_core::monitors::{build_views, check_causality, CausalityEvent};

pub struct CrossCheck {
    pub instances: usize,
    pub monitor_verdict: bool,
    pub oracle_verdict: bool,
    pub agree: bool,
}

const ORACLE_EVENT_CAP: usize = 12;
const NO_GRACE: u64 = 1 << 40;

/// A settlement may consume a lock iff their transfer ids agree, the lock
/// strictly precedes it, and the lock carried at least its value.
fn oracle_admissible(lock: &CausalityEvent, mint: &CausalityEvent) -> bool {
    lock.nonce == mint.nonce && lock.at.0 < mint.at.0 && lock.value.0 >= mint.value.0
}

fn search(
    mint_idx: usize,
    locks: &[CausalityEvent],
    mints: &[CausalityEvent],
    used: &mut [bool],
) -> bool {
    if mint_idx == mints.len() {
        return true;
    }
    for (li, lock) in locks.iter().enumerate() {
        if used[li] || !oracle_admissible(lock, &mints[mint_idx]) {
            continue;
        }
        used[li] = true;
        if search(mint_idx + 1, locks, mints, used) {
            return true;
        }
        used[li] = false;
    }
    false
}

/// True iff some total injective admissible assignment of settlements onto
/// initiations exists.
pub fn oracle_feasible(locks: &[CausalityEvent], mints: &[CausalityEvent]) -> bool {
    let mut used = vec![false; locks.len()];
    search(0, locks, mints, &mut used)
}

/// Run the scenario, extract the final initiation/settlement event lists,
/// and compare the monitor's safety verdict with the exhaustive search on
/// every direction of every token pair.
pub fn cross_check(scenario: &Scenario) -> Result<CrossCheck, String> {
    let (_result, state) = run_scenario_full(scenario).map_err(|e| e.to_string())?;
    let views = build_views(
        &state.effective_config,
        &state.source,
        &state.dest,
        &state.records,
    );

    let now = Tick(scenario.horizon);
    let mut instances = 0;
    let mut monitor_any = false;
    let mut oracle_any = false;
    let mut agree = true;

    for view in &views {
        let directions = [
            (&view.forward_locks, &view.forward_mints),
            (&view.reverse_burns, &view.reverse_releases),
        ];
        for (locks, mints) in directions {
            instances += locks.len() + mints.len();
            if mints.len() > ORACLE_EVENT_CAP {
                return Err(format!(
                    "instance too large for exhaustive search: {} settlements",
                    mints.len()
                ));
            }
            // a huge grace keeps the liveness direction quiet, so any
            // finding is a safety-direction verdict
            let monitor = !check_causality(locks, mints, now, NO_GRACE).is_empty();
            let oracle = !oracle_feasible(locks, mints);
            monitor_any |= monitor;
            oracle_any |= oracle;
            if monitor != oracle {
                agree = false;
            }
        }
    }

    Ok(CrossCheck {
        instances,
        monitor_verdict: monitor_any,
        oracle_verdict: oracle_any,
        agree,
    })
}
