use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{HarnessError, MatchReport};
use crate::game::Action;

/// Paths written by [`emit_report`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub summary: PathBuf,
    pub payoffs: PathBuf,
    pub chart: PathBuf,
}

/// Writes `summary.json`, `payoffs.csv` and `actions.svg` into `out_dir`.
pub fn emit_report(report: &MatchReport, out_dir: &Path) -> Result<ReportFiles, HarnessError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| HarnessError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let files = ReportFiles {
        summary: out_dir.join("summary.json"),
        payoffs: out_dir.join("payoffs.csv"),
        chart: out_dir.join("actions.svg"),
    };

    let summary = serde_json::to_string_pretty(report).expect("reports serialize");
    fs::write(&files.summary, summary + "\n").map_err(io(&files.summary))?;

    let mut w = csv::Writer::from_path(&files.payoffs).map_err(|e| HarnessError::Io {
        path: files.payoffs.display().to_string(),
        source: e.into(),
    })?;
    let csv_err = |e: csv::Error| HarnessError::Io {
        path: files.payoffs.display().to_string(),
        source: e.into(),
    };
    w.write_record(["game_id", "leg", "seed", "a_seat", &report.agents[0], &report.agents[1]])
        .map_err(csv_err)?;
    for g in &report.games {
        w.write_record([
            g.game_id.to_string(),
            g.leg.to_string(),
            g.seed.to_string(),
            g.a_seat.to_string(),
            g.payoffs[0].to_string(),
            g.payoffs[1].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io(&files.payoffs))?;

    fs::write(&files.chart, render_svg(report)).map_err(io(&files.chart))?;
    Ok(files)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Grouped bar chart of each agent's action shares.
pub fn render_svg(report: &MatchReport) -> String {
    const W: f64 = 560.0;
    const H: f64 = 300.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 250.0;
    const COLORS: [&str; 2] = ["#4878a8", "#d07a3a"];
    let plot_h = BOTTOM - TOP;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">Action percentages</text>"#, W / 2.0);
    let _ = writeln!(s, r#"<line x1="40" y1="{BOTTOM}" x2="{}" y2="{BOTTOM}" stroke="black"/>"#, W - 20.0);
    for (i, action) in [Action::Raise, Action::Call, Action::Fold, Action::Check].into_iter().enumerate() {
        let group_x = 60.0 + i as f64 * 120.0;
        for (j, shares) in report.action_shares.iter().enumerate() {
            let v = shares.get(action);
            let h = v * plot_h;
            let x = group_x + j as f64 * 40.0;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{:.2}" width="36" height="{h:.2}" fill="{}"><title>{}: {:.1}%</title></rect>"#,
                BOTTOM - h,
                COLORS[j],
                escape(&report.agents[j]),
                100.0 * v
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="middle" font-size="10">{:.0}%</text>"#,
                x + 18.0,
                BOTTOM - h - 4.0,
                100.0 * v
            );
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, group_x + 38.0, BOTTOM + 16.0, action.name());
    }
    for (j, name) in report.agents.iter().enumerate() {
        let y = BOTTOM + 34.0;
        let x = 60.0 + j as f64 * 250.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/>"#, y - 10.0, COLORS[j]);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 18.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}
