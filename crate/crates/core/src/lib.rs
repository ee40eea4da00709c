pub mod cfg;
pub mod checker;
pub mod cli;
pub mod constraints;
pub mod diagnostics;
pub mod frontend;
pub mod oracle;
pub mod smt;
pub mod symexec;
