//! Trains the CFR baseline and reports exploitability as it converges.
//!
//!     cargo run --release --example solve_cfr -- 100000 /tmp/leduc.cfr

use std::path::PathBuf;
use std::time::Instant;

use leduc_tom::cfr::{self, CfrConfig, StrategyProfile};
use leduc_tom::game::{Action, BetEvent, Rank};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let iterations: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10_000);
    let out = args.next().map(PathBuf::from);

    let start = Instant::now();
    let checkpoints = [10, 100, 1_000, 10_000, 100_000, 1_000_000];
    let profile = cfr::train_with_checkpoints(iterations, CfrConfig::default(), &checkpoints, |t, p| {
        println!(
            "iter {t:>8}  nash_conv {:.6}  ({:.1?})",
            cfr::nash_conv(p),
            start.elapsed()
        );
    })?;
    println!("final nash_conv {:.6}", cfr::nash_conv(&profile));
    println!("seat 0 game value {:+.4} chips/game", cfr::game_value(&profile, 0));

    // A few headline decisions of the average strategy.
    let raise = [BetEvent { seat: 0, round: 1, action: Action::Raise }];
    for rank in Rank::ALL {
        let key = cfr::InfoSetKey::new(1, rank, None, &raise);
        let d = profile.average_strategy(&key, &[Action::Call, Action::Raise, Action::Fold]);
        println!(
            "seat 1 holding {rank:<5} facing an opening raise: call {:.3} raise {:.3} fold {:.3}",
            d.get(Action::Call),
            d.get(Action::Raise),
            d.get(Action::Fold)
        );
    }

    if let Some(path) = out {
        profile.save(&path)?;
        let reloaded = StrategyProfile::load(&path)?;
        assert_eq!(reloaded.entries(), profile.entries());
        println!("saved {} infosets to {}", profile.len(), path.display());
    }
    Ok(())
}
