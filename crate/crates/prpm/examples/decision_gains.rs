//! From scores to treat/wait decisions via gain and opportunity cost.
//!
//! The gain of treating now is the expected cost saved: the treatment-effect
//! share of the outcome cost, minus the treatment cost. The opportunity cost
//! compares that gain with the gain the projected *future* state would offer;
//! a positive opportunity cost says waiting is worth more.
//!
//! ```bash
//! cargo run -p prpm --example decision_gains
//! ```

use chrono::{TimeZone, Utc};
use prpm::future_state::ScoreTriple;
use prpm::policy::{
    breakdown, filter, rank, Candidate, CostParams, PolicyConfig, PolicyMode,
};

fn triple(avg_pred: f64, cate: f64) -> ScoreTriple {
    ScoreTriple {
        avg_pred,
        total_uncer: 0.5,
        cate,
    }
}

fn main() {
    // Outcome cost 20 if the case ends badly, treatment cost 1.
    let costs = CostParams::default();
    println!(
        "costs: undesired outcome {} | treatment {}",
        costs.c_uout, costs.c_t1
    );
    println!();

    // Three cases at the same risk level whose effect estimates differ now
    // versus one step ahead.
    let cases = [
        ("A", triple(0.9, 0.4), triple(0.9, 0.65)),
        ("B", triple(0.9, 0.3), triple(0.9, 0.1)),
        ("C", triple(0.9, 0.2), triple(0.9, 0.2)),
    ];

    println!("case   c_gain   f_gain   opp_cost   adj_gain   decision");
    println!("----   ------   ------   --------   --------   --------");
    for (name, current, future) in &cases {
        let b = breakdown(current, future, &costs);
        println!(
            "{name:<4}   {:>6}   {:>6}   {:>8}   {:>8}   {:?}",
            b.c_gain, b.f_gain, b.opp_cost, b.adj_gain, b.decision
        );
    }
    println!();
    println!("A's effect is still growing: waiting earns more (positive opportunity cost).");
    println!("B's effect is fading: treat now. C is indifferent either way.");
    println!();

    // Ranking under a bounded budget uses the adjusted gain (current gain
    // minus opportunity cost), so fading-effect cases jump the queue.
    let arrival = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let candidates: Vec<Candidate> = cases
        .iter()
        .map(|(name, current, future)| Candidate {
            case_id: name.to_string(),
            arrival,
            current: *current,
            future: *future,
        })
        .collect();

    let adjusted = PolicyConfig::default();
    let order = rank(filter(&candidates, &adjusted), &adjusted, &costs);
    let names: Vec<&str> = order.iter().map(|(c, _)| c.case_id.as_str()).collect();
    println!("rank by adjusted gain:          {}", names.join(" > "));

    let current_only = PolicyConfig {
        mode: PolicyMode::CurrentOnly,
        ..adjusted
    };
    let order = rank(filter(&candidates, &current_only), &current_only, &costs);
    let names: Vec<&str> = order.iter().map(|(c, _)| c.case_id.as_str()).collect();
    println!("rank by current gain only:      {}", names.join(" > "));
    println!();
    println!("with one resource, the future-aware policy spends it on B, not A.");
}
