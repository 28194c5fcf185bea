pub mod compare;
pub mod derive;
pub mod oracle;
pub mod selfcheck;
pub mod simulate;

pub use compare::cmd_compare;
pub use derive::cmd_derive;
pub use oracle::cmd_oracle;
pub use selfcheck::cmd_selfcheck;
pub use simulate::cmd_simulate;
