//! Packs a short stream with the shipped parameters and prints the trace,
//! the bin contents and the audit.
//!
//! cargo run --example pack_trace

use advanced_harmonic::data;
use advanced_harmonic::engine::PackingState;
use advanced_harmonic::Rational;

fn main() {
    let mut state = PackingState::new(data::canonical_table());
    let stream = ["7/20", "3/5", "1/3", "2/5", "3/10", "1/4", "1/7", "1/50", "11/20", "1/100"];
    println!("item class container kind bin [transition]");
    for s in stream {
        let size: Rational = s.parse().unwrap();
        let ev = state.pack_item(&size).unwrap();
        println!("{ev}    size {size}");
    }
    println!();
    for bin in state.bins() {
        let show = |c: Option<usize>| {
            c.map(|c| {
                let c = &state.containers()[c];
                format!("{} class {} total {}", c.kind, c.class, c.total)
            })
            .unwrap_or_else(|| "-".into())
        };
        println!("bin {}: positive [{}] negative [{}]", bin.id, show(bin.positive), show(bin.negative));
    }
    let (neg, pos) = state.thetas();
    println!("\ntheta_neg {:?} theta_pos {:?}", neg.map(|t| t.to_decimal(4)), pos.map(|t| t.to_decimal(4)));
    print!("{}", state.audit());
}
