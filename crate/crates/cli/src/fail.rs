//! Exit-code classification.

use std::fmt;

/// Bad input or arguments (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// 2 for validation and parse failures anywhere in the chain, else 1.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<Usage>() || cause.is::<serde_json::Error>() {
            return EXIT_INVALID;
        }
        if let Some(e) = cause.downcast_ref::<mcsf_core::Error>() {
            return if e.is_validation() { EXIT_INVALID } else { EXIT_IO };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_IO
}
