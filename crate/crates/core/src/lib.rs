pub mod arith;
pub mod poly;
pub mod valuation;
pub mod wildquot;
pub mod graph;
pub mod resolve;
pub mod aposteriori;
pub mod cli;

#[cfg(test)]
mod testutil;
