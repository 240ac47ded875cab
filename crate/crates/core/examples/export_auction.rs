//! Writes the discretized second-price auction network as a document.
//!
//! Usage: `cargo run --example export_auction -- [GRID] [EPSILON] > auction.eun`

use eun::decision::auction::{build_vickrey_auction, AuctionModel};
use eun::format::serialize_network;

fn main() {
    let mut args = std::env::args().skip(1);
    let grid = args
        .next()
        .map_or(2, |a| a.parse().expect("grid resolution"));
    let epsilon = args.next().map_or(1e-6, |a| a.parse().expect("smoothing"));
    let model = AuctionModel::new(grid, epsilon).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(1);
    });
    let auction = build_vickrey_auction(model).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(1);
    });
    print!("{}", serialize_network(&auction.network));
}
