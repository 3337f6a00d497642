//! Runs a position-swapped match, writes the report files and replays, and
//! shows that both legs were dealt the same cards.
//!
//!     cargo run --release --example position_swap -- 200 runs/swap

use std::path::PathBuf;
use std::sync::Arc;

use leduc_tom::agent::{DeliberationAgent, PolicyAgent, ToMOrder};
use leduc_tom::game::LeducConfig;
use leduc_tom::harness::{emit_report, run_position_swap, write_replays};
use leduc_tom::opponents::Archetype;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let games: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let out_dir = args.next().map_or_else(|| std::env::temp_dir().join("leduc-swap"), PathBuf::from);

    let mut me = DeliberationAgent::oracle(ToMOrder::Second, true);
    let mut them = PolicyAgent::new(Arc::new(Archetype::PolarBluffer));
    let out = run_position_swap(&mut me, &mut them, games, 11, LeducConfig::default())?;

    let (leg1, leg2) = out.records.split_at(games);
    let same = leg1.iter().zip(leg2).filter(|(a, b)| a.deal == b.deal).count();
    println!("{same}/{games} paired games share their deal");

    let r = &out.report;
    for (name, total) in r.agents.iter().zip(r.totals) {
        println!("{name}: {total:+} chips over {} games", r.games.len());
    }
    println!("winner: {}", r.winner.as_deref().unwrap_or("tie"));

    let files = emit_report(r, &out_dir)?;
    write_replays(&out.records, &out_dir.join("replays.jsonl"), false)?;
    println!("wrote {}, {}, {}", files.summary.display(), files.payoffs.display(), files.chart.display());
    Ok(())
}
