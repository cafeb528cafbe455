//! Variational generators: a plain VAE over z-scored columns and a tabular
//! VAE over mode-normalized columns, behind one fit/sample contract.

mod codec;
mod model;
pub(crate) mod persist;

pub use codec::{Codec, ZScoreCodec};
pub use model::{ElboGrads, ElboParts, FitReport, Generator, GeneratorConfig, GeneratorKind};

use sha2::{Digest, Sha256};

/// Hex SHA-256 of a byte buffer.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests;
