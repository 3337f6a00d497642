pub mod agent;
pub mod belief;
pub mod cfr;
pub mod cli;
pub mod dist;
pub mod game;
pub mod harness;
pub mod llm;
pub mod opponents;
pub mod record;
