//! Dumps a generated instance to the text format, reloads it and checks the
//! reloaded model is bit-identical and solves to the same value.
//!
//!     cargo run --example instance_replay -- [chain|grid] [seed]

use psqlab::instance_file::{from_text, to_text};
use psqlab::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let family = EnvFamily::parse(&args.next().unwrap_or_else(|| "grid".into()))?;
    let seed: u64 = args.next().map_or(5, |a| a.parse().expect("seed"));

    let inst = family.instance(seed, 0)?;
    let text = to_text(&inst)?;
    let back = from_text(&text, std::path::Path::new("<memory>"))?;
    assert_eq!(back, inst);

    let a = solve_optimal(&inst.mdp)?.v(1, inst.mdp.start_state());
    let b = solve_optimal(&back.mdp)?.v(1, back.mdp.start_state());
    println!("{:?}", inst.spec);
    println!("{} bytes of text; v* before {a:.10}, after {b:.10}", text.len());
    Ok(())
}
