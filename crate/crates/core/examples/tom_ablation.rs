//! Exact-reasoning agents of each ToM order against a scripted opponent.
//!
//!     cargo run --release --example tom_ablation -- reactive_conservative_folder 500

use std::sync::Arc;

use leduc_tom::agent::{DeliberationAgent, PolicyAgent, ToMOrder};
use leduc_tom::game::LeducConfig;
use leduc_tom::harness::run_position_swap;
use leduc_tom::opponents::archetype;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let opponent = args.next().unwrap_or_else(|| "reactive_conservative_folder".into());
    let games: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(500);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    println!("{games} games per leg against {opponent}");
    for order in ToMOrder::ALL {
        let mut me = DeliberationAgent::oracle(order, true);
        let mut them = PolicyAgent::new(Arc::new(archetype(&opponent)?));
        let out = run_position_swap(&mut me, &mut them, games, seed, LeducConfig::default())?;
        let r = &out.report;
        let s = r.action_shares[0];
        println!(
            "{order:>6}: total {:+6}  raise {:5.1}%  call {:5.1}%  fold {:5.1}%  check {:5.1}%",
            r.totals[0],
            100.0 * s.raise,
            100.0 * s.call,
            100.0 * s.fold,
            100.0 * s.check
        );
    }
    Ok(())
}
